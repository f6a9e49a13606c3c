//! Packet-to-cell segmentation and the cell-merging state machine.
//!
//! Plain segmentation cuts a packet of `L` bytes into `ceil(L/S)` cells and
//! pads the last one. With merging, a partial trailer cell is held back and
//! topped up with the leading bytes of the next packet bound for the same
//! virtual output queue.
//!
//! ```text
//!            T0 (arrival)                 T1 (trailer partial)
//!   EMPTY ─────────────────▶ SEGMENTING ───────────────────────▶ PARTIAL
//!     ▲                       │   ▲                                 │  │
//!     │       T2 (no trailer) │   └──────── T3 (arrival) ───────────┘  │
//!     └───────────────────────┘                                        │
//!     └──────────────── T4 (timer: held cell padded) ──────────────────┘
//! ```

use arrayvec::ArrayVec;
use thiserror::Error;

pub type PacketId = u64;

/// Merge timer default, in external cell times.
pub const DEFAULT_MERGE_TIMEOUT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegmentError {
    #[error("packet {packet} for output {dest} offered to the segmenter of output {owner}")]
    WrongQueue { packet: PacketId, dest: usize, owner: usize },
    #[error("packet {0} has zero length")]
    EmptyPacket(PacketId),
    #[error("cell size must be at least one byte")]
    ZeroCellSize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub id: PacketId,
    /// Input port the packet arrives on.
    pub input: usize,
    /// Destination output port (already classified).
    pub dest: usize,
    /// Arrival time in external cell times.
    pub arrival: f64,
    /// Length in bytes.
    pub length: u32,
}

/// A contiguous byte range `[offset, offset + len)` of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub packet: PacketId,
    pub offset: u32,
    pub len: u32,
}

/// Fixed-size switch cell. At most two packets share a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    capacity: u32,
    segments: ArrayVec<Segment, 2>,
    padding: u32,
}

impl Cell {
    fn with_segment(capacity: u32, seg: Segment) -> Self {
        debug_assert!(seg.len >= 1 && seg.len <= capacity);
        let mut segments = ArrayVec::new();
        segments.push(seg);
        Cell { capacity, segments, padding: capacity - seg.len }
    }

    fn append(&mut self, seg: Segment) {
        debug_assert!(seg.len <= self.padding);
        self.segments.push(seg);
        self.padding -= seg.len;
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn padding(&self) -> u32 {
        self.padding
    }

    pub fn payload(&self) -> u32 {
        self.capacity - self.padding
    }

    pub fn is_full(&self) -> bool {
        self.padding == 0
    }
}

/// Appends the cells for bytes `[offset, length)` of `packet` to `out` and
/// returns the trailing partial cell, if any.
fn cut(packet: &Packet, mut offset: u32, cell_size: u32, out: &mut Vec<Cell>) -> Option<Cell> {
    while offset < packet.length {
        let len = (packet.length - offset).min(cell_size);
        let cell = Cell::with_segment(cell_size, Segment { packet: packet.id, offset, len });
        offset += len;
        if cell.is_full() {
            out.push(cell);
        } else {
            return Some(cell);
        }
    }
    None
}

/// Segments a packet into `ceil(L/S)` cells, padding the last one with
/// `S − (L mod S)` bytes when `S` does not divide `L`.
pub fn segment_packet(packet: &Packet, cell_size: u32) -> Result<Vec<Cell>, SegmentError> {
    if cell_size == 0 {
        return Err(SegmentError::ZeroCellSize);
    }
    if packet.length == 0 {
        return Err(SegmentError::EmptyPacket(packet.id));
    }
    let mut cells = Vec::with_capacity(packet.length.div_ceil(cell_size) as usize);
    if let Some(last) = cut(packet, 0, cell_size, &mut cells) {
        cells.push(last);
    }
    Ok(cells)
}

/// Speed-up `1 + (S − r)/L` needed to switch one packet at link rate.
pub fn packet_speedup(length: u32, cell_size: u32) -> f64 {
    let cells = length.div_ceil(cell_size) as f64;
    cells * cell_size as f64 / length as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsmState {
    Empty,
    /// Only observable from inside an arrival; segmentation takes no time.
    Segmenting,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// EMPTY → SEGMENTING on arrival.
    T0,
    /// SEGMENTING → PARTIAL, trailer held back.
    T1,
    /// SEGMENTING → EMPTY, packet ended on a cell boundary.
    T2,
    /// PARTIAL → SEGMENTING on arrival.
    T3,
    /// PARTIAL → EMPTY on timer expiry, held cell released with padding.
    T4,
}

impl Transition {
    pub const ALL: [Transition; 5] = [Self::T0, Self::T1, Self::T2, Self::T3, Self::T4];

    fn index(self) -> usize {
        self as usize
    }
}

/// Cell-merging segmenter for a single virtual output queue.
#[derive(Debug, Clone)]
pub struct SegmenterFsm {
    dest: usize,
    cell_size: u32,
    timeout: f64,
    state: FsmState,
    held: Option<Cell>,
    deadline: Option<f64>,
    counts: [u64; 5],
}

impl SegmenterFsm {
    pub fn new(dest: usize, cell_size: u32, timeout: f64) -> Result<Self, SegmentError> {
        if cell_size == 0 {
            return Err(SegmentError::ZeroCellSize);
        }
        Ok(Self {
            dest,
            cell_size,
            timeout,
            state: FsmState::Empty,
            held: None,
            deadline: None,
            counts: [0; 5],
        })
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn held(&self) -> Option<&Cell> {
        self.held.as_ref()
    }

    pub fn deadline(&self) -> Option<f64> {
        self.deadline
    }

    pub fn timeout(&self) -> f64 {
        self.timeout
    }

    /// How many times each of T0..T4 has fired.
    pub fn transition_counts(&self) -> [u64; 5] {
        self.counts
    }

    fn fire(&mut self, t: Transition) {
        self.counts[t.index()] += 1;
    }

    /// Segments an arriving packet, merging its head into a held cell.
    ///
    /// A packet too short to fill the held cell cannot share it without the
    /// cell carrying three packets, so the held cell is released padded
    /// first and the packet is segmented on its own.
    pub fn on_packet_arrival(&mut self, packet: &Packet, _now: f64) -> Result<Vec<Cell>, SegmentError> {
        if packet.dest != self.dest {
            return Err(SegmentError::WrongQueue { packet: packet.id, dest: packet.dest, owner: self.dest });
        }
        if packet.length == 0 {
            return Err(SegmentError::EmptyPacket(packet.id));
        }
        let mut out = Vec::with_capacity(packet.length.div_ceil(self.cell_size) as usize + 1);
        let mut offset = 0;
        match self.state {
            FsmState::Partial => {
                self.fire(Transition::T3);
                self.deadline = None;
                let mut held = self.held.take().expect("PARTIAL implies a held cell");
                let room = held.padding();
                if packet.length >= room {
                    held.append(Segment { packet: packet.id, offset: 0, len: room });
                    offset = room;
                }
                out.push(held);
            }
            FsmState::Empty => self.fire(Transition::T0),
            FsmState::Segmenting => unreachable!("segmentation completes within one arrival"),
        }
        self.state = FsmState::Segmenting;
        match cut(packet, offset, self.cell_size, &mut out) {
            Some(trailer) => {
                self.fire(Transition::T1);
                self.held = Some(trailer);
                self.state = FsmState::Partial;
            }
            None => {
                self.fire(Transition::T2);
                self.state = FsmState::Empty;
            }
        }
        Ok(out)
    }

    /// Starts the hold-back timer if a cell is held and no timer is running.
    /// Returns the (possibly pre-existing) deadline.
    pub fn arm_timer(&mut self, now: f64) -> Option<f64> {
        if self.state != FsmState::Partial {
            return None;
        }
        Some(*self.deadline.get_or_insert(now + self.timeout))
    }

    /// Releases the held cell if the timer has run out. Expiries for a
    /// cancelled or not-yet-due timer are ignored and return `None`.
    pub fn on_timer_expiry(&mut self, now: f64) -> Option<Cell> {
        match self.deadline {
            Some(deadline) if self.state == FsmState::Partial && now >= deadline => {
                self.fire(Transition::T4);
                self.deadline = None;
                self.state = FsmState::Empty;
                self.held.take()
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OverheadStats {
    pub payload_bytes: u64,
    pub padding_bytes: u64,
    pub cell_count: u64,
    /// `(payload + padding) / payload`, or 1 when nothing was carried.
    pub implied_speedup: f64,
}

impl OverheadStats {
    pub fn record(&mut self, cell: &Cell) {
        self.payload_bytes += u64::from(cell.payload());
        self.padding_bytes += u64::from(cell.padding());
        self.cell_count += 1;
        self.implied_speedup = if self.payload_bytes == 0 {
            1.0
        } else {
            (self.payload_bytes + self.padding_bytes) as f64 / self.payload_bytes as f64
        };
    }
}

pub fn overhead_stats<'a>(cells: impl IntoIterator<Item = &'a Cell>) -> OverheadStats {
    let mut stats = OverheadStats { implied_speedup: 1.0, ..Default::default() };
    for cell in cells {
        stats.record(cell);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(id: PacketId, length: u32) -> Packet {
        Packet { id, input: 0, dest: 0, arrival: id as f64, length }
    }

    fn seg_lens(cells: &[Cell]) -> Vec<Vec<u32>> {
        cells.iter().map(|c| c.segments().iter().map(|s| s.len).collect()).collect()
    }

    #[test]
    fn ethernet_maximum_frame() {
        let cells = segment_packet(&pkt(1, 1518), 64).unwrap();
        assert_eq!(cells.len(), 24);
        assert_eq!(cells.last().unwrap().padding(), 18);
        assert!(cells[..23].iter().all(Cell::is_full));
    }

    #[test]
    fn exact_multiple_has_no_padding() {
        let cells = segment_packet(&pkt(1, 64), 64).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].padding(), 0);
    }

    #[test]
    fn one_byte_over_nearly_doubles() {
        let cells = segment_packet(&pkt(1, 65), 64).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[1].padding(), 63);
        assert!((packet_speedup(65, 64) - 128.0 / 65.0).abs() < 1e-15);
        let stats = overhead_stats(&cells);
        assert!((stats.implied_speedup - 1.969_230_769).abs() < 1e-9);
        assert_eq!(overhead_stats(&segment_packet(&pkt(2, 64), 64).unwrap()).implied_speedup, 1.0);
    }

    #[test]
    fn segment_errors() {
        assert_eq!(segment_packet(&pkt(1, 10), 0), Err(SegmentError::ZeroCellSize));
        assert_eq!(segment_packet(&pkt(7, 0), 64), Err(SegmentError::EmptyPacket(7)));
    }

    #[test]
    fn empty_overhead() {
        let s = overhead_stats(std::iter::empty());
        assert_eq!(s, OverheadStats { payload_bytes: 0, padding_bytes: 0, cell_count: 0, implied_speedup: 1.0 });
    }

    #[test]
    fn merge_trace_two_packets() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        let out = fsm.on_packet_arrival(&pkt(1, 65), 0.0).unwrap();
        assert_eq!(seg_lens(&out), vec![vec![64]]);
        assert_eq!(fsm.state(), FsmState::Partial);
        assert_eq!(fsm.held().unwrap().payload(), 1);

        let out = fsm.on_packet_arrival(&pkt(2, 65), 1.0).unwrap();
        assert_eq!(seg_lens(&out), vec![vec![1, 63]]);
        assert!(out[0].is_full());
        assert_eq!(out[0].segments()[1], Segment { packet: 2, offset: 0, len: 63 });
        assert_eq!(fsm.held().unwrap().segments(), &[Segment { packet: 2, offset: 63, len: 2 }]);
        assert_eq!(fsm.state(), FsmState::Partial);
    }

    #[test]
    fn exact_division_returns_to_empty() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        let out = fsm.on_packet_arrival(&pkt(1, 128), 0.0).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(fsm.state(), FsmState::Empty);
        assert!(fsm.held().is_none());
    }

    #[test]
    fn timer_releases_padded_cell() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        fsm.on_packet_arrival(&pkt(1, 65), 0.0).unwrap();
        assert_eq!(fsm.arm_timer(2.0), Some(12.0));
        // Re-arming keeps the original deadline.
        assert_eq!(fsm.arm_timer(5.0), Some(12.0));
        assert!(fsm.on_timer_expiry(11.0).is_none());
        let cell = fsm.on_timer_expiry(12.0).unwrap();
        assert_eq!(cell.padding(), 63);
        assert_eq!(fsm.state(), FsmState::Empty);
        assert!(fsm.on_timer_expiry(13.0).is_none());
    }

    #[test]
    fn arrival_cancels_timer() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        fsm.on_packet_arrival(&pkt(1, 65), 0.0).unwrap();
        fsm.arm_timer(1.0);
        let out = fsm.on_packet_arrival(&pkt(2, 127), 3.0).unwrap();
        assert!(out.iter().all(Cell::is_full));
        assert_eq!(fsm.state(), FsmState::Empty);
        assert_eq!(fsm.deadline(), None);
        assert!(fsm.on_timer_expiry(11.0).is_none());
        assert_eq!(overhead_stats(&out).padding_bytes, 0);
    }

    #[test]
    fn short_packet_flushes_held_cell() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        fsm.on_packet_arrival(&pkt(1, 40), 0.0).unwrap();
        let out = fsm.on_packet_arrival(&pkt(2, 20), 1.0).unwrap();
        assert_eq!(seg_lens(&out), vec![vec![40]]);
        assert_eq!(out[0].padding(), 24);
        assert_eq!(fsm.held().unwrap().payload(), 20);
        let out = fsm.on_packet_arrival(&pkt(3, 44), 2.0).unwrap();
        assert_eq!(seg_lens(&out), vec![vec![20, 44]]);
        assert_eq!(fsm.state(), FsmState::Empty);
    }

    #[test]
    fn wrong_queue_is_rejected() {
        let mut fsm = SegmenterFsm::new(3, 64, 10.0).unwrap();
        let p = Packet { dest: 2, ..pkt(9, 100) };
        assert_eq!(
            fsm.on_packet_arrival(&p, 0.0),
            Err(SegmentError::WrongQueue { packet: 9, dest: 2, owner: 3 })
        );
    }

    #[test]
    fn all_transitions_reachable() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        fsm.on_packet_arrival(&pkt(1, 64), 0.0).unwrap(); // T0, T2
        fsm.on_packet_arrival(&pkt(2, 65), 1.0).unwrap(); // T0, T1
        fsm.on_packet_arrival(&pkt(3, 65), 2.0).unwrap(); // T3, T1
        fsm.arm_timer(3.0);
        fsm.on_timer_expiry(13.0).unwrap(); // T4
        assert!(fsm.transition_counts().iter().all(|&c| c > 0), "{:?}", fsm.transition_counts());
        assert_eq!(fsm.transition_counts(), [2, 2, 1, 1, 1]);
    }

    #[test]
    fn long_back_to_back_stream_approaches_unit_speedup() {
        let mut fsm = SegmenterFsm::new(0, 64, 10.0).unwrap();
        let mut cells = Vec::new();
        for id in 0..1000 {
            cells.extend(fsm.on_packet_arrival(&pkt(id, 65), id as f64).unwrap());
        }
        fsm.arm_timer(1000.0);
        cells.extend(fsm.on_timer_expiry(1010.0));
        let stats = overhead_stats(&cells);
        assert_eq!(stats.payload_bytes, 65_000);
        assert!(stats.implied_speedup < 1.001, "{}", stats.implied_speedup);
    }
}
