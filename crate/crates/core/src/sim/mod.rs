//! Discrete-event model of an N-port input-buffered crossbar switch.
//!
//! Pipeline per input port: classified packets are segmented into cells
//! (optionally merging trailers with the next packet of the same VOQ), cells
//! wait in N virtual output queues, and at every internal slot iSLIP picks a
//! matching and each matched pair moves one cell across the crossbar. Cells
//! are reassembled into packets at the outputs.
//!
//! Time is measured in external cell times (the link needs one cell time to
//! deliver `S` bytes). With speed-up `σ` the fabric runs one slot every
//! `1/σ` cell times, so a cell sent at slot time `t` lands at `t + 1/σ`.

mod event;
mod experiment;
mod reassembly;

use std::collections::VecDeque;

use thiserror::Error;

pub use event::{Event, EventKind, EventQueue};
pub use experiment::{find_min_speedup, sweep_utilization, SpeedupSearch, SweepPoint};
pub use reassembly::{reassemble_and_verify, Departure, DeliveredCell, Reassembler, ReassemblyError};

use crate::islip::{self, IslipState, RequestMatrix};
use crate::segmenter::{self, Cell, FsmState, Packet, SegmentError, SegmenterFsm};
use crate::traffic::{ScaledTraffic, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid switch configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error("{count} reassembly error(s), first: {first}")]
    Reassembly { count: u64, first: ReassemblyError },
    #[error("no stable speed-up up to {max_speedup}")]
    SearchFailed { max_speedup: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchConfig {
    pub ports: usize,
    /// Cell size `S` in bytes.
    pub cell_size: u32,
    /// Fabric speed-up `σ >= 1`.
    pub speedup: f64,
    pub islip_iterations: usize,
    pub merge: bool,
    /// Hold-back timer in external cell times.
    pub merge_timeout: f64,
    /// Leading fraction of the traffic span excluded from statistics.
    pub warmup_fraction: f64,
    /// Queued cells at one input port that count as instability.
    pub instability_threshold: usize,
    pub seed: u64,
    /// End the run as soon as instability is detected.
    pub stop_on_unstable: bool,
    /// Keep running after the last arrival until every packet has left.
    pub drain: bool,
    /// Cap on internal slots; hitting it marks the run truncated.
    pub max_slots: Option<u64>,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            ports: 16,
            cell_size: 64,
            speedup: 1.0,
            islip_iterations: islip::default_iterations(16),
            merge: false,
            merge_timeout: segmenter::DEFAULT_MERGE_TIMEOUT,
            warmup_fraction: 0.1,
            instability_threshold: 1000,
            seed: 1,
            stop_on_unstable: true,
            drain: false,
            max_slots: None,
        }
    }
}

impl SwitchConfig {
    /// Defaults for an `n`-port switch.
    pub fn with_ports(n: usize) -> Self {
        Self { ports: n, islip_iterations: islip::default_iterations(n), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.ports < 2 {
            return bad(format!("need at least 2 ports, got {}", self.ports));
        }
        if self.cell_size == 0 {
            return bad("cell size must be at least one byte".into());
        }
        if !(self.speedup >= 1.0 && self.speedup.is_finite()) {
            return bad(format!("speed-up must be >= 1, got {}", self.speedup));
        }
        if self.islip_iterations == 0 {
            return bad("iSLIP needs at least one iteration".into());
        }
        if !(self.merge_timeout >= 0.0) {
            return bad(format!("merge timeout must be non-negative, got {}", self.merge_timeout));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad(format!("warm-up fraction {} outside [0, 1)", self.warmup_fraction));
        }
        if self.instability_threshold == 0 {
            return bad("instability threshold must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimStats {
    /// Time-averaged cells queued per input port (held cells excluded),
    /// averaged over ports.
    pub mean_queue_cells: f64,
    pub mean_queue_cells_per_port: Vec<f64>,
    /// Time-averaged packets in system (arrived, last byte not yet at the
    /// output), averaged over ports.
    pub mean_packets_in_system: f64,
    pub mean_packets_per_port: Vec<f64>,
    /// Largest total queued at one input port after warm-up.
    pub max_port_cells: usize,
    /// Largest single VOQ after warm-up.
    pub max_voq_cells: usize,
    pub unstable: bool,
    /// The run hit `max_slots` before finishing.
    pub truncated: bool,
    pub cells_forwarded: u64,
    pub payload_bytes: u64,
    pub padding_bytes: u64,
    pub packets_arrived: u64,
    pub packets_departed: u64,
    pub payload_bytes_in: u64,
    pub payload_bytes_queued: u64,
    pub payload_bytes_held: u64,
    pub per_port_offered_load: Vec<f64>,
    pub reassembly_errors: u64,
    /// Measurement window `[warmup_end, end_time]`.
    pub warmup_end: f64,
    pub end_time: f64,
    /// Segmenter FSM transitions T0..T4 summed over all VOQs.
    pub transition_counts: [u64; 5],
    pub slots: u64,
}

impl SimStats {
    /// `(payload + padding) / payload` over all forwarded cells.
    pub fn padding_overhead_ratio(&self) -> f64 {
        if self.payload_bytes == 0 {
            1.0
        } else {
            (self.payload_bytes + self.padding_bytes) as f64 / self.payload_bytes as f64
        }
    }
}

/// Piecewise-constant level integrated over the measurement window.
#[derive(Debug, Clone, Copy, Default)]
struct Level {
    value: usize,
    since: f64,
    area: f64,
}

impl Level {
    fn set(&mut self, value: usize, now: f64, window_start: f64) {
        let from = self.since.max(window_start);
        if now > from {
            self.area += self.value as f64 * (now - from);
        }
        self.value = value;
        self.since = now;
    }
}

pub struct Simulator<'a> {
    cfg: SwitchConfig,
    traffic: &'a ScaledTraffic,
    voqs: Vec<VecDeque<Cell>>,
    fsms: Vec<SegmenterFsm>,
    requests: RequestMatrix,
    islip: IslipState,
    reassembler: Reassembler,
    port_cells: Vec<Level>,
    packets_in_system: Vec<f64>,
    departures: Vec<Departure>,
    queued_cells: usize,
    warmup_end: f64,
    horizon: f64,
    stats: SimStats,
    first_reassembly_error: Option<ReassemblyError>,
}

impl<'a> Simulator<'a> {
    pub fn new(cfg: &SwitchConfig, traffic: &'a ScaledTraffic) -> Result<Self, SimError> {
        cfg.validate()?;
        let n = cfg.ports;
        let mut prev = f64::NEG_INFINITY;
        for p in &traffic.packets {
            if p.input >= n || p.dest >= n {
                return Err(SimError::Config(format!("packet {} uses a port outside 0..{n}", p.id)));
            }
            if !(p.arrival >= prev) || !p.arrival.is_finite() {
                return Err(SimError::Config("packets must be sorted by arrival time".into()));
            }
            prev = p.arrival;
        }
        let fsms = (0..n * n)
            .map(|idx| SegmenterFsm::new(idx % n, cfg.cell_size, cfg.merge_timeout))
            .collect::<Result<Vec<_>, _>>()?;
        let horizon = traffic.packets.last().map_or(0.0, |p| p.arrival);
        Ok(Self {
            cfg: cfg.clone(),
            traffic,
            voqs: vec![VecDeque::new(); n * n],
            fsms,
            requests: RequestMatrix::new(n),
            islip: IslipState::new(n),
            reassembler: Reassembler::new(),
            port_cells: vec![Level::default(); n],
            packets_in_system: vec![0.0; n],
            departures: Vec::new(),
            queued_cells: 0,
            warmup_end: cfg.warmup_fraction * horizon,
            horizon,
            stats: SimStats {
                per_port_offered_load: traffic.per_port_load.clone(),
                ..SimStats::default()
            },
            first_reassembly_error: None,
        })
    }

    pub fn islip_state(&self) -> &IslipState {
        &self.islip
    }

    fn voq(&self, i: usize, j: usize) -> usize {
        i * self.cfg.ports + j
    }

    fn check_conservation(&self) {
        debug_assert_eq!(
            self.stats.payload_bytes_in,
            self.stats.payload_bytes + self.stats.payload_bytes_queued + self.stats.payload_bytes_held,
            "payload bytes not conserved"
        );
    }

    fn enqueue(&mut self, i: usize, j: usize, cell: Cell, now: f64) {
        let v = self.voq(i, j);
        self.stats.payload_bytes_queued += u64::from(cell.payload());
        self.voqs[v].push_back(cell);
        self.requests.set(i, j, true);
        self.queued_cells += 1;
        let port = self.port_cells[i].value + 1;
        self.port_cells[i].set(port, now, self.warmup_end);
        if now >= self.warmup_end {
            self.stats.max_port_cells = self.stats.max_port_cells.max(port);
            self.stats.max_voq_cells = self.stats.max_voq_cells.max(self.voqs[v].len());
            if port >= self.cfg.instability_threshold {
                self.stats.unstable = true;
            }
        }
    }

    fn held_payload(&self, v: usize) -> u64 {
        self.fsms[v].held().map_or(0, |c| u64::from(c.payload()))
    }

    fn arm_timer_if_idle(&mut self, i: usize, j: usize, now: f64, events: &mut EventQueue) {
        let v = self.voq(i, j);
        if self.cfg.merge && self.voqs[v].is_empty() && self.fsms[v].state() == FsmState::Partial {
            let fresh = self.fsms[v].deadline().is_none();
            if let Some(deadline) = self.fsms[v].arm_timer(now) {
                if fresh {
                    events.schedule_timer(deadline, i, j);
                }
            }
        }
    }

    fn on_arrival(&mut self, p: Packet, now: f64, events: &mut EventQueue) -> Result<(), SimError> {
        let (i, j) = (p.input, p.dest);
        let v = self.voq(i, j);
        self.stats.packets_arrived += 1;
        self.stats.payload_bytes_in += u64::from(p.length);
        if let Err(e) = self.reassembler.register(&p) {
            self.record_reassembly_error(e);
        }
        let cells = if self.cfg.merge {
            let before = self.held_payload(v);
            let cells = self.fsms[v].on_packet_arrival(&p, now)?;
            let after = self.held_payload(v);
            self.stats.payload_bytes_held = self.stats.payload_bytes_held - before + after;
            debug_assert_eq!(
                cells.iter().map(|c| u64::from(c.payload())).sum::<u64>() + after,
                before + u64::from(p.length)
            );
            cells
        } else {
            segmenter::segment_packet(&p, self.cfg.cell_size)?
        };
        for cell in cells {
            self.enqueue(i, j, cell, now);
        }
        self.arm_timer_if_idle(i, j, now, events);
        Ok(())
    }

    fn on_timer(&mut self, i: usize, j: usize, now: f64) {
        let v = self.voq(i, j);
        if let Some(cell) = self.fsms[v].on_timer_expiry(now) {
            self.stats.payload_bytes_held -= u64::from(cell.payload());
            self.enqueue(i, j, cell, now);
        }
    }

    fn on_slot(&mut self, now: f64, events: &mut EventQueue) {
        self.stats.slots += 1;
        if self.requests.is_empty() {
            return;
        }
        let matching = islip::islip_schedule(&self.requests, &mut self.islip, self.cfg.islip_iterations);
        debug_assert!(matching.is_valid_for(&self.requests), "crossbar constraint violated");
        let landing = now + 1.0 / self.cfg.speedup;
        for &(i, j) in matching.pairs() {
            let v = self.voq(i, j);
            let cell = self.voqs[v].pop_front().expect("requested VOQ is non-empty");
            if self.voqs[v].is_empty() {
                self.requests.set(i, j, false);
            }
            self.queued_cells -= 1;
            let port = self.port_cells[i].value - 1;
            self.port_cells[i].set(port, now, self.warmup_end);

            self.stats.cells_forwarded += 1;
            self.stats.payload_bytes += u64::from(cell.payload());
            self.stats.padding_bytes += u64::from(cell.padding());
            self.stats.payload_bytes_queued -= u64::from(cell.payload());

            let first_new = self.departures.len();
            if let Err(e) = self.reassembler.accept(i, j, &cell, landing, &mut self.departures) {
                self.record_reassembly_error(e);
            }
            for d in &self.departures[first_new..] {
                let from = d.arrival.max(self.warmup_end);
                // Departures past the horizon are clipped at finalisation.
                let to = if self.cfg.drain { d.departure } else { d.departure.min(self.horizon) };
                if to > from {
                    self.packets_in_system[d.input] += to - from;
                }
            }
            self.stats.packets_departed += (self.departures.len() - first_new) as u64;
            self.departures.clear();

            self.arm_timer_if_idle(i, j, now, events);
        }
    }

    fn record_reassembly_error(&mut self, e: ReassemblyError) {
        self.stats.reassembly_errors += 1;
        self.first_reassembly_error.get_or_insert(e);
    }

    fn held_cells(&self) -> bool {
        self.stats.payload_bytes_held > 0
    }

    /// Runs to completion and returns the statistics.
    pub fn run(self) -> Result<SimStats, SimError> {
        self.run_with_state().map(|(stats, _)| stats)
    }

    /// Like [`Simulator::run`], also returning the final iSLIP pointers.
    pub fn run_with_state(mut self) -> Result<(SimStats, IslipState), SimError> {
        let packets = &self.traffic.packets;
        let mut events = EventQueue::new(packets, self.cfg.speedup);
        let mut end = self.horizon;
        let mut last_landing = 0.0_f64;
        loop {
            let idle = self.queued_cells == 0;
            if idle {
                match events.next_non_slot_time() {
                    Some(t) => events.skip_slots_to(t),
                    None => {
                        // Nothing queued, nothing coming.
                        if self.cfg.drain {
                            end = end.max(last_landing);
                        }
                        break;
                    }
                }
            }
            let Some(ev) = events.pop(true) else { break };
            if !self.cfg.drain && ev.time > self.horizon {
                break;
            }
            if let Some(cap) = self.cfg.max_slots {
                if self.stats.slots >= cap {
                    self.stats.truncated = true;
                    end = if self.cfg.drain { ev.time } else { ev.time.min(self.horizon) };
                    break;
                }
            }
            match ev.kind {
                EventKind::Arrival(idx) => self.on_arrival(packets[idx], ev.time, &mut events)?,
                EventKind::Slot(_) => {
                    let had_cells = self.queued_cells > 0;
                    self.on_slot(ev.time, &mut events);
                    if had_cells {
                        last_landing = ev.time + 1.0 / self.cfg.speedup;
                    }
                }
                EventKind::Timer { input, output } => self.on_timer(input, output, ev.time),
            }
            self.check_conservation();
            if self.stats.unstable && self.cfg.stop_on_unstable {
                end = ev.time;
                break;
            }
            if self.cfg.drain
                && events.arrivals_left() == 0
                && self.queued_cells == 0
                && !self.held_cells()
                && self.reassembler.outstanding() == 0
            {
                end = ev.time.max(last_landing).max(self.horizon);
                break;
            }
        }
        self.finish(end)
    }

    fn finish(mut self, end: f64) -> Result<(SimStats, IslipState), SimError> {
        let n = self.cfg.ports;
        let window = (end - self.warmup_end).max(0.0);
        for level in &mut self.port_cells {
            level.set(level.value, end, self.warmup_end);
            self.stats.mean_queue_cells_per_port.push(if window > 0.0 { level.area / window } else { 0.0 });
        }
        for (input, arrival) in self.reassembler.outstanding_arrivals() {
            let from = arrival.max(self.warmup_end);
            if end > from {
                self.packets_in_system[input] += end - from;
            }
        }
        self.stats.mean_packets_per_port = self
            .packets_in_system
            .iter()
            .map(|&a| if window > 0.0 { a / window } else { 0.0 })
            .collect();
        self.stats.mean_queue_cells = self.stats.mean_queue_cells_per_port.iter().sum::<f64>() / n as f64;
        self.stats.mean_packets_in_system = self.stats.mean_packets_per_port.iter().sum::<f64>() / n as f64;
        self.stats.warmup_end = self.warmup_end;
        self.stats.end_time = end;
        for fsm in &self.fsms {
            for (acc, c) in self.stats.transition_counts.iter_mut().zip(fsm.transition_counts()) {
                *acc += c;
            }
        }
        if let Some(first) = self.first_reassembly_error {
            return Err(SimError::Reassembly { count: self.stats.reassembly_errors, first });
        }
        Ok((self.stats, self.islip))
    }
}

/// Simulates `traffic` (arrival times in cell times) through the switch.
pub fn run_simulation(cfg: &SwitchConfig, traffic: &ScaledTraffic) -> Result<SimStats, SimError> {
    Simulator::new(cfg, traffic)?.run()
}
