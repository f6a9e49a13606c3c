//! Output-side reassembly of cells back into packets.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::segmenter::{Cell, Packet, PacketId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReassemblyError {
    #[error("cell carries bytes of unknown packet {0}")]
    UnknownPacket(PacketId),
    #[error("packet {packet} belongs to VOQ ({want_in}, {want_out}) but arrived via ({got_in}, {got_out})")]
    WrongPath { packet: PacketId, want_in: usize, want_out: usize, got_in: usize, got_out: usize },
    #[error("packet {packet}: expected byte {expected}, cell starts at {got}")]
    OutOfOrder { packet: PacketId, expected: u32, got: u32 },
    #[error("packet {packet}: {extra} bytes beyond its length")]
    Overrun { packet: PacketId, extra: u32 },
    #[error("packet {0} registered twice")]
    Duplicate(PacketId),
}

/// A cell as seen at an output port.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveredCell {
    pub input: usize,
    pub output: usize,
    pub time: f64,
    pub cell: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Departure {
    pub packet: PacketId,
    pub input: usize,
    pub output: usize,
    pub arrival: f64,
    /// Time the last byte reached the output.
    pub departure: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    input: usize,
    output: usize,
    length: u32,
    received: u32,
    arrival: f64,
}

/// Per-packet reassembly contexts, keyed by packet id.
///
/// Cells of one VOQ reach the output in FIFO order, so a packet is rebuilt by
/// checking each segment continues exactly where the previous one ended.
#[derive(Debug, Default)]
pub struct Reassembler {
    pending: BTreeMap<PacketId, Pending>,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, p: &Packet) -> Result<(), ReassemblyError> {
        let ctx = Pending { input: p.input, output: p.dest, length: p.length, received: 0, arrival: p.arrival };
        if self.pending.insert(p.id, ctx).is_some() {
            return Err(ReassemblyError::Duplicate(p.id));
        }
        Ok(())
    }

    /// Feeds one cell, appending completed packets to `done`.
    pub fn accept(
        &mut self,
        input: usize,
        output: usize,
        cell: &Cell,
        time: f64,
        done: &mut Vec<Departure>,
    ) -> Result<(), ReassemblyError> {
        for seg in cell.segments() {
            let ctx = self.pending.get_mut(&seg.packet).ok_or(ReassemblyError::UnknownPacket(seg.packet))?;
            if ctx.input != input || ctx.output != output {
                return Err(ReassemblyError::WrongPath {
                    packet: seg.packet,
                    want_in: ctx.input,
                    want_out: ctx.output,
                    got_in: input,
                    got_out: output,
                });
            }
            if seg.offset != ctx.received {
                return Err(ReassemblyError::OutOfOrder { packet: seg.packet, expected: ctx.received, got: seg.offset });
            }
            let end = ctx.received + seg.len;
            if end > ctx.length {
                return Err(ReassemblyError::Overrun { packet: seg.packet, extra: end - ctx.length });
            }
            ctx.received = end;
            if end == ctx.length {
                let ctx = self.pending.remove(&seg.packet).expect("present");
                done.push(Departure {
                    packet: seg.packet,
                    input: ctx.input,
                    output: ctx.output,
                    arrival: ctx.arrival,
                    departure: time,
                });
            }
        }
        Ok(())
    }

    /// Packets registered but not yet complete.
    pub fn outstanding(&self) -> usize {
        self.pending.len()
    }

    /// `(input, arrival time)` of every outstanding packet, in id order.
    pub fn outstanding_arrivals(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pending.values().map(|p| (p.input, p.arrival))
    }
}

/// Rebuilds `packets` from the cell streams seen at the outputs.
pub fn reassemble_and_verify(
    packets: &[Packet],
    cells: impl IntoIterator<Item = DeliveredCell>,
) -> Result<Vec<Departure>, ReassemblyError> {
    let mut r = Reassembler::new();
    for p in packets {
        r.register(p)?;
    }
    let mut done = Vec::new();
    for c in cells {
        r.accept(c.input, c.output, &c.cell, c.time, &mut done)?;
    }
    Ok(done)
}
