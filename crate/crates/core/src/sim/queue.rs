use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::time::SimTime;
use super::SimError;

/// Handle returned by [`EventQueue::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u64);

/// A scheduled event: `due` time, insertion sequence, and payload.
#[derive(Debug, Clone)]
pub struct Event<K> {
    pub due: SimTime,
    pub seq: u64,
    pub kind: K,
}

/// Deterministic pending-event set.
///
/// Events dispatch in `(due, seq)` order where `seq` is the insertion
/// counter, so equal-time events fire in FIFO order.
#[derive(Debug)]
pub struct EventQueue<K> {
    clock: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Reverse<(SimTime, u64)>>,
    payloads: HashMap<u64, K>,
    dispatched: u64,
    cancelled: u64,
}

impl<K> Default for EventQueue<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> EventQueue<K> {
    pub fn new() -> Self {
        Self {
            clock: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            payloads: HashMap::new(),
            dispatched: 0,
            cancelled: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    pub fn schedule(&mut self, due: SimTime, kind: K) -> Result<EventId, SimError> {
        if due < self.clock {
            return Err(SimError::Causality { due, now: self.clock });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse((due, seq)));
        self.payloads.insert(seq, kind);
        Ok(EventId(seq))
    }

    pub fn schedule_in(&mut self, delay_ms: u64, kind: K) -> EventId {
        let due = self.clock + delay_ms;
        // cannot fail: due >= clock
        self.schedule(due, kind).expect("non-negative delay")
    }

    /// Cancels a pending event. Returns false if it already fired or was cancelled.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if self.payloads.remove(&id.0).is_some() {
            self.cancelled += 1;
            true
        } else {
            false
        }
    }

    /// Removes the next event and advances the clock to its due time.
    pub fn pop(&mut self) -> Option<Event<K>> {
        while let Some(Reverse((due, seq))) = self.heap.pop() {
            if let Some(kind) = self.payloads.remove(&seq) {
                debug_assert!(due >= self.clock);
                self.clock = due;
                self.dispatched += 1;
                return Some(Event { due, seq, kind });
            }
        }
        None
    }

    pub fn peek_due(&mut self) -> Option<SimTime> {
        while let Some(Reverse((due, seq))) = self.heap.peek().copied() {
            if self.payloads.contains_key(&seq) {
                return Some(due);
            }
            self.heap.pop();
        }
        None
    }

    pub fn pending(&self) -> usize {
        self.payloads.len()
    }

    pub fn scheduled_total(&self) -> u64 {
        self.next_seq
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn cancelled(&self) -> u64 {
        self.cancelled
    }
}
