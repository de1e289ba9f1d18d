//! Popularity-aware packet scheduling for a congested relay in an ad-hoc
//! social network.
//!
//! Senders are ranked by the degree centrality of their node within its
//! social group. Once the relay's buffer passes half full, packets of more
//! central senders are served first, a utilization-bounded subset of flows is
//! admitted for priority service, and a full buffer only accepts packets from
//! senders more central than the least central one already queued.
//!
//! * [`social_graph`]: groups, raw degree, degree centrality.
//! * [`flow_model`]: flow parameters and per-flow service shares.
//! * [`scheduler`]: the queue disciplines.
//! * [`analysis`]: closed-form transmission and delay model.
//! * [`simulator`]: discrete-event runs, scenarios, sweeps.
//! * [`report`]: CSV output.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod flow_model;
pub mod report;
pub mod scheduler;
pub mod simulator;
pub mod social_graph;

pub use error::{AnalysisError, FlowError, GraphError, SchedulerError, SimError};
pub use flow_model::{Flow, FlowId, ServiceShare};
pub use scheduler::{
    DropReason, DropTailQueue, EnqueueOutcome, Mode, Packet, PopAwareScheduler, QueueDiscipline,
    SchedulerConfig,
};
pub use simulator::{Discipline, FlowSpec, Metrics, Scenario};
pub use social_graph::{Centrality, GroupId, NodeId, SocialGraph};
