//! Queue disciplines for the relay node.
//!
//! [`PopAwareScheduler`] is the popularity-aware discipline: FIFO while the
//! buffer is at most half full, centrality-driven priority service and
//! admission above that. [`DropTailQueue`] is the plain FIFO baseline.

mod drop_tail;
mod load;
mod pop_aware;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use drop_tail::DropTailQueue;
pub use load::{ratio as load_ratio, LoadEstimator};
pub use pop_aware::{Decision, DecisionKind, PopAwareScheduler, PriorityClass, SchedulerConfig};

use crate::error::SchedulerError;
use crate::flow_model::{Flow, FlowId};

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub flow: FlowId,
    pub size: u32,
    pub created_at: f64,
    /// Per-flow sequence number.
    pub seqno: u64,
}

impl Packet {
    pub fn new(flow: FlowId, size: u32, created_at: f64, seqno: u64) -> Self {
        debug_assert!(size > 0);
        Self {
            flow,
            size,
            created_at,
            seqno,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fifo,
    Priority,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fifo => "fifo",
            Mode::Priority => "priority",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    TailDrop,
    LowCentrality,
    Feasibility,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::TailDrop => "tail-drop",
            DropReason::LowCentrality => "low-centrality",
            DropReason::Feasibility => "feasibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnqueueOutcome {
    /// The packet is queued. `evicted` holds the packet pushed out to make
    /// room, if any.
    Enqueued {
        evicted: Option<Packet>,
    },
    Dropped(DropReason),
}

impl EnqueueOutcome {
    pub fn is_enqueued(&self) -> bool {
        matches!(self, EnqueueOutcome::Enqueued { .. })
    }
}

pub trait QueueDiscipline: Send {
    fn enqueue(&mut self, packet: Packet, now: f64) -> Result<EnqueueOutcome, SchedulerError>;

    fn dequeue(&mut self, now: f64) -> Option<Packet>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn capacity(&self) -> usize;

    fn mode(&self) -> Mode {
        Mode::Fifo
    }

    /// Last measured arrival/output ratio, if the discipline tracks one.
    fn load(&self) -> f64 {
        0.0
    }
}

/// `load / c`; lower is served first. A zero-centrality flow never beats a
/// flow with positive centrality.
pub fn social_rate(load: f64, centrality: f64) -> f64 {
    if centrality <= 0.0 {
        f64::INFINITY
    } else {
        load / centrality
    }
}

/// Cached ordering key for a flow. Smaller keys are served first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityKey {
    pub social_rate: f64,
    /// Active service minus packets served in the current window.
    pub deficit: f64,
}

impl PriorityKey {
    /// Compares social rate ascending, then deficit descending.
    pub fn rank(&self, other: &Self) -> Ordering {
        self.social_rate
            .total_cmp(&other.social_rate)
            .then_with(|| other.deficit.total_cmp(&self.deficit))
    }
}

pub fn compute_priority(flow: &Flow, load: f64, active: f64) -> PriorityKey {
    PriorityKey {
        social_rate: social_rate(load, flow.centrality),
        deficit: active - flow.served_in_window as f64,
    }
}

/// Flow with the smallest centrality among `queued`, lowest id on ties.
pub fn find_lowest_centrality<'a, I>(queued: I) -> Result<(FlowId, f64), SchedulerError>
where
    I: IntoIterator<Item = &'a Flow>,
{
    queued
        .into_iter()
        .map(|f| (f.id, f.centrality))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(SchedulerError::NoQueuedFlows)
}

/// Greedy selection over flows given best-priority first: a flow joins when
/// the running utilization stays at or below 1, otherwise it is skipped and
/// the scan continues.
pub fn select_schedulable<'a, I>(by_priority: I) -> Vec<FlowId>
where
    I: IntoIterator<Item = &'a Flow>,
{
    let mut total = 0.0;
    let mut chosen = Vec::new();
    for f in by_priority {
        let u = f.utilization();
        if total + u <= 1.0 {
            total += u;
            chosen.push(f.id);
        }
    }
    chosen
}
