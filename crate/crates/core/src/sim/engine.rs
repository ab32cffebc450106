use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use super::time::SimTime;

/// Handle returned by [`Engine::schedule`]; usable for cancellation until the
/// event fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventId(u64);

/// A scheduled event carrying a module-defined payload.
#[derive(Debug, Clone)]
pub struct Event<P> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: P,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("cannot schedule at {at} before current time {now}")]
    InPast { at: SimTime, now: SimTime },
}

#[derive(Debug)]
struct HeapEntry<P> {
    fire_at: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for HeapEntry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}
impl<P> Eq for HeapEntry<P> {}
impl<P> PartialOrd for HeapEntry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<P> Ord for HeapEntry<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.fire_at, self.seq).cmp(&(other.fire_at, other.seq))
    }
}

/// Single-threaded event queue with a (fire_at, seq) total order.
///
/// `seq` is assigned at scheduling time, so two events at the same instant
/// dispatch in the order they were scheduled, independent of payload
/// contents. This makes whole runs reproducible from the scenario alone.
#[derive(Debug)]
pub struct Engine<P> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Reverse<HeapEntry<P>>>,
    cancelled: HashSet<u64>,
}

impl<P> Default for Engine<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Engine<P> {
    pub fn new() -> Self {
        Engine {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Enqueue an event. Scheduling strictly in the past is rejected;
    /// scheduling at the current instant is allowed and dispatches after the
    /// events already queued for that instant.
    pub fn schedule(&mut self, fire_at: SimTime, payload: P) -> Result<EventId, ScheduleError> {
        if fire_at < self.now {
            return Err(ScheduleError::InPast {
                at: fire_at,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(HeapEntry {
            fire_at,
            seq,
            payload,
        }));
        Ok(EventId(seq))
    }

    /// Convenience for `schedule(now() + delay, ..)`.
    pub fn schedule_in(&mut self, delay: SimTime, payload: P) -> EventId {
        self.schedule(self.now + delay, payload)
            .expect("now + delay is never in the past")
    }

    /// Cancel a pending event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_seq {
            return false;
        }
        self.cancelled.insert(id.0)
    }

    /// Pop the next event with `fire_at <= t_end`, advancing `now` to its
    /// fire time. When the queue holds no such event, `now` advances to
    /// `t_end` and `None` is returned.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<Event<P>> {
        while let Some(Reverse(entry)) = self.heap.peek() {
            if entry.fire_at > t_end {
                break;
            }
            let Reverse(entry) = self.heap.pop().expect("peeked entry");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            debug_assert!(entry.fire_at >= self.now, "event queue went backwards");
            self.now = entry.fire_at;
            return Some(Event {
                fire_at: entry.fire_at,
                seq: entry.seq,
                payload: entry.payload,
            });
        }
        self.now = t_end.max(self.now);
        None
    }

    /// Drain events up to `t_end`, passing each to `handler` together with
    /// the engine so handlers can schedule follow-ups. Returns the dispatch
    /// trace as (fire_at, seq) pairs.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Vec<(SimTime, u64)>
    where
        F: FnMut(&mut Engine<P>, Event<P>),
    {
        let mut trace = Vec::new();
        while let Some(ev) = self.pop_due(t_end) {
            trace.push((ev.fire_at, ev.seq));
            handler(self, ev);
        }
        trace
    }

    pub fn is_empty(&self) -> bool {
        self.heap.len() == self.cancelled.len()
    }
}
