//! Discrete-event kernel that owns simulation time.
//!
//! Events pop in `(time, insertion_seq)` order. Before the first event at a
//! new timestamp is dispatched the kernel asks its [`TimeMaster`] to step the
//! engine there and waits for confirmation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("cannot schedule at {requested} s, kernel is at {now} s")]
    TimeRegression { now: f64, requested: f64 },
    #[error("event time {0} is not finite")]
    NonFiniteTime(f64),
    #[error("engine step to {time} s failed: {reason}")]
    Step { time: f64, reason: String },
    #[error("engine confirmed {got} s for a step to {requested} s")]
    StepMismatch { requested: f64, got: f64 },
    #[error("handler failed at {time} s: {reason}")]
    Handler { time: f64, reason: String },
}

struct Entry<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed so the max-heap pops the earliest entry.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

/// Min-ordered queue of `(time, insertion_seq, event)`.
pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
    now: f64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
        }
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time of the last popped event (0 before any).
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Inserts `event` at `time` and returns its insertion sequence number.
    pub fn schedule(&mut self, time: f64, event: E) -> Result<u64, KernelError> {
        if !time.is_finite() {
            return Err(KernelError::NonFiniteTime(time));
        }
        if time < self.now {
            return Err(KernelError::TimeRegression {
                now: self.now,
                requested: time,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time, seq, event });
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<(f64, u64, E)> {
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.time, e.seq, e.event))
    }
}

/// Whatever actually advances the engine: a protocol client or an in-process engine.
pub trait TimeMaster {
    /// Steps the engine to `time` and returns the time it confirms.
    fn step_to(&mut self, time: f64) -> Result<f64, String>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEntry {
    StepRequested(f64),
    StepDone(f64),
    Dispatch { time: f64, seq: u64 },
}

/// Dispatches that were not preceded by a `StepDone` at their own time.
pub fn lockstep_violations(trace: &[TraceEntry]) -> Vec<TraceEntry> {
    let mut confirmed: Option<f64> = None;
    let mut out = Vec::new();
    for entry in trace {
        match *entry {
            TraceEntry::StepRequested(_) => confirmed = None,
            TraceEntry::StepDone(t) => confirmed = Some(t),
            TraceEntry::Dispatch { time, .. } => {
                if confirmed.map(f64::to_bits) != Some(time.to_bits()) {
                    out.push(*entry);
                }
            }
        }
    }
    out
}

pub struct Kernel<E, M> {
    queue: EventQueue<E>,
    master: M,
    engine_time: Option<f64>,
    trace: Vec<TraceEntry>,
}

impl<E, M: TimeMaster> Kernel<E, M> {
    pub fn new(master: M) -> Self {
        Kernel {
            queue: EventQueue::new(),
            master,
            engine_time: None,
            trace: Vec::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn schedule(&mut self, time: f64, event: E) -> Result<u64, KernelError> {
        self.queue.schedule(time, event)
    }

    pub fn into_master(self) -> M {
        self.master
    }

    pub fn master(&mut self) -> &mut M {
        &mut self.master
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn sync(&mut self, time: f64) -> Result<(), KernelError> {
        if self.engine_time.map(f64::to_bits) == Some(time.to_bits()) {
            return Ok(());
        }
        self.trace.push(TraceEntry::StepRequested(time));
        let got = self
            .master
            .step_to(time)
            .map_err(|reason| KernelError::Step { time, reason })?;
        if got.to_bits() != time.to_bits() {
            return Err(KernelError::StepMismatch { requested: time, got });
        }
        self.trace.push(TraceEntry::StepDone(got));
        self.engine_time = Some(got);
        Ok(())
    }

    /// Processes every event with time ≤ `t_end`; returns how many were dispatched.
    pub fn run_until(
        &mut self,
        t_end: f64,
        handler: &mut dyn FnMut(&mut Self, f64, E) -> Result<(), String>,
    ) -> Result<usize, KernelError> {
        let mut count = 0;
        while self.queue.peek_time().is_some_and(|t| t <= t_end) {
            let (time, seq, event) = self.queue.pop().expect("peeked");
            self.sync(time)?;
            self.trace.push(TraceEntry::Dispatch { time, seq });
            handler(self, time, event).map_err(|reason| KernelError::Handler { time, reason })?;
            count += 1;
        }
        Ok(count)
    }
}
