use std::collections::VecDeque;

use super::{DropReason, EnqueueOutcome, Packet, QueueDiscipline};
use crate::error::SchedulerError;

/// Plain FIFO with tail drop. Baseline for comparison runs.
#[derive(Debug, Clone)]
pub struct DropTailQueue {
    capacity: usize,
    q: VecDeque<Packet>,
}

impl DropTailQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            q: VecDeque::with_capacity(capacity),
        }
    }
}

impl QueueDiscipline for DropTailQueue {
    fn enqueue(&mut self, packet: Packet, _now: f64) -> Result<EnqueueOutcome, SchedulerError> {
        if self.q.len() >= self.capacity {
            return Ok(EnqueueOutcome::Dropped(DropReason::TailDrop));
        }
        self.q.push_back(packet);
        Ok(EnqueueOutcome::Enqueued { evicted: None })
    }

    fn dequeue(&mut self, _now: f64) -> Option<Packet> {
        self.q.pop_front()
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}
