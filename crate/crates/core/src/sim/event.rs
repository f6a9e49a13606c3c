//! Time-ordered event source for the switch simulation.
//!
//! Three streams are merged: packet arrivals (already sorted), internal
//! cell-slot boundaries every `1/σ` cell times, and merge-timer expiries.
//! Ties resolve arrival < slot < timer, then by insertion order.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::segmenter::Packet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Index into the packet slice.
    Arrival(usize),
    /// Internal slot number `k`, at time `k / σ`.
    Slot(u64),
    Timer { input: usize, output: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy)]
struct TimerEntry {
    time: f64,
    seq: u64,
    input: usize,
    output: usize,
}

impl PartialEq for TimerEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for TimerEntry {}
impl PartialOrd for TimerEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TimerEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

pub struct EventQueue<'a> {
    packets: &'a [Packet],
    next_arrival: usize,
    next_slot: u64,
    speedup: f64,
    timers: BinaryHeap<Reverse<TimerEntry>>,
    seq: u64,
}

impl<'a> EventQueue<'a> {
    pub fn new(packets: &'a [Packet], speedup: f64) -> Self {
        Self { packets, next_arrival: 0, next_slot: 0, speedup, timers: BinaryHeap::new(), seq: 0 }
    }

    pub fn slot_time(&self, k: u64) -> f64 {
        k as f64 / self.speedup
    }

    pub fn schedule_timer(&mut self, time: f64, input: usize, output: usize) {
        self.seq += 1;
        self.timers.push(Reverse(TimerEntry { time, seq: self.seq, input, output }));
    }

    pub fn arrivals_left(&self) -> usize {
        self.packets.len() - self.next_arrival
    }

    pub fn timers_pending(&self) -> usize {
        self.timers.len()
    }

    /// Earliest pending arrival or timer, ignoring slots.
    pub fn next_non_slot_time(&self) -> Option<f64> {
        let a = self.packets.get(self.next_arrival).map(|p| p.arrival);
        let t = self.timers.peek().map(|Reverse(e)| e.time);
        match (a, t) {
            (Some(a), Some(t)) => Some(a.min(t)),
            (a, t) => a.or(t),
        }
    }

    /// Skips idle slots: the next slot becomes the last one at or before `t`
    /// (never moving backwards).
    pub fn skip_slots_to(&mut self, t: f64) {
        let k = (t * self.speedup).floor();
        if k.is_finite() && k > self.next_slot as f64 {
            self.next_slot = k as u64;
        }
    }

    /// Pops the next event. Slots are always available, so this only
    /// returns `None` if the caller never wants slots and nothing else is left.
    pub fn pop(&mut self, slots: bool) -> Option<Event> {
        let arrival = self.packets.get(self.next_arrival).map(|p| p.arrival);
        let slot = slots.then(|| self.slot_time(self.next_slot));
        let timer = self.timers.peek().map(|Reverse(e)| e.time);

        // Rank: arrival 0, slot 1, timer 2.
        let mut best: Option<(f64, u8)> = None;
        for (t, rank) in [(arrival, 0u8), (slot, 1), (timer, 2)] {
            if let Some(t) = t {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, rank));
                }
            }
        }
        let (time, rank) = best?;
        let kind = match rank {
            0 => {
                self.next_arrival += 1;
                EventKind::Arrival(self.next_arrival - 1)
            }
            1 => {
                self.next_slot += 1;
                EventKind::Slot(self.next_slot - 1)
            }
            _ => {
                let Reverse(e) = self.timers.pop().expect("peeked");
                EventKind::Timer { input: e.input, output: e.output }
            }
        };
        Some(Event { time, kind })
    }
}
