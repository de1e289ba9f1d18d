//! Sender flows and the per-flow service-share arithmetic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FlowError;
use crate::social_graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sender's stream as seen by the relay.
///
/// `inter_arrival` is seconds between packets and `tx_cost` is seconds of
/// link time per packet, so `tx_cost / inter_arrival` is the fraction of the
/// link the flow needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: FlowId,
    pub source: NodeId,
    pub inter_arrival: f64,
    pub tx_cost: f64,
    pub centrality: f64,
    /// Last social rate assigned by the scheduler. Lower is served earlier.
    pub priority: f64,
    pub served_count: u64,
    pub queued_count: usize,
    pub queued_bytes: u64,
    pub served_in_window: u64,
}

impl Flow {
    pub fn new(
        id: FlowId,
        source: NodeId,
        inter_arrival: f64,
        tx_cost: f64,
        centrality: f64,
    ) -> Result<Self, FlowError> {
        if !(inter_arrival > 0.0 && inter_arrival.is_finite()) {
            return Err(FlowError::InvalidParams(format!(
                "flow {id}: inter_arrival must be > 0, got {inter_arrival}"
            )));
        }
        if !(tx_cost > 0.0 && tx_cost.is_finite()) {
            return Err(FlowError::InvalidParams(format!(
                "flow {id}: tx_cost must be > 0, got {tx_cost}"
            )));
        }
        if tx_cost > inter_arrival {
            return Err(FlowError::InvalidParams(format!(
                "flow {id}: utilization {} exceeds 1",
                tx_cost / inter_arrival
            )));
        }
        if !(0.0..=1.0).contains(&centrality) {
            return Err(FlowError::InvalidParams(format!(
                "flow {id}: centrality {centrality} outside [0, 1]"
            )));
        }
        Ok(Self {
            id,
            source,
            inter_arrival,
            tx_cost,
            centrality,
            priority: f64::INFINITY,
            served_count: 0,
            queued_count: 0,
            queued_bytes: 0,
            served_in_window: 0,
        })
    }

    /// Flow for a constant-bit-rate source of `rate` packets/s with
    /// `packet_bytes` packets over a link of `link_bps` bits/s.
    pub fn from_cbr(
        id: FlowId,
        source: NodeId,
        rate: f64,
        packet_bytes: u32,
        link_bps: f64,
        centrality: f64,
    ) -> Result<Self, FlowError> {
        if !(rate > 0.0) || !(link_bps > 0.0) || packet_bytes == 0 {
            return Err(FlowError::InvalidParams(format!(
                "flow {id}: rate, packet size and link rate must be positive"
            )));
        }
        Self::new(
            id,
            source,
            1.0 / rate,
            f64::from(packet_bytes) * 8.0 / link_bps,
            centrality,
        )
    }

    pub fn utilization(&self) -> f64 {
        utilization(self)
    }

    /// No packets of this flow are waiting at the relay.
    pub fn is_fully_served(&self) -> bool {
        self.queued_count == 0
    }

    /// Remaining workload in seconds at service rate `rate_bps`.
    pub fn residual_workload(&self, rate_bps: f64) -> f64 {
        self.queued_bytes as f64 * 8.0 / rate_bps
    }

    /// Fraction of this window's backlog that has been served, in [0, 1].
    /// Reporting only; the scheduler never reads it.
    pub fn service_ratio(&self) -> f64 {
        let total = self.served_in_window + self.queued_count as u64;
        if total == 0 {
            1.0
        } else {
            self.served_in_window as f64 / total as f64
        }
    }
}

pub fn utilization(f: &Flow) -> f64 {
    f.tx_cost / f.inter_arrival
}

/// Throughput and loss split of one flow's backlog when the queue holds
/// `p_sum` packets against a capacity of `p_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceShare {
    pub p_max: usize,
    pub p_sum: usize,
    pub share: f64,
    pub loss_share: f64,
}

pub fn throughput_share(
    flows: &[Flow],
    f: FlowId,
    p_max: usize,
) -> Result<ServiceShare, FlowError> {
    let p_sum: usize = flows.iter().map(|x| x.queued_count).sum();
    let flow = find(flows, f)?;
    if p_sum == 0 {
        return Err(FlowError::EmptyQueue);
    }
    let p_a = flow.queued_count as f64;
    let share = p_a * (p_max as f64 / p_sum as f64);
    Ok(ServiceShare {
        p_max,
        p_sum,
        share,
        // Subtracting keeps share + loss_share == P_a exactly.
        loss_share: p_a - share,
    })
}

/// Largest inter-arrival and largest per-packet transmission cost among
/// flows that currently hold queued packets.
pub fn rate_maxima(flows: &[Flow]) -> Option<(f64, f64)> {
    flows
        .iter()
        .filter(|x| x.queued_count > 0)
        .fold(None, |acc, x| match acc {
            None => Some((x.inter_arrival, x.tx_cost)),
            Some((i, t)) => Some((i.max(x.inter_arrival), t.max(x.tx_cost))),
        })
}

/// The flow's share of `P_max * t_max / i_max` in proportion to its
/// utilization-weighted backlog.
pub fn active_service(
    flows: &[Flow],
    f: FlowId,
    p_max: usize,
    i_max: f64,
    t_max: f64,
) -> Result<f64, FlowError> {
    let flow = find(flows, f)?;
    let denom: f64 = flows
        .iter()
        .map(|x| x.queued_count as f64 * x.utilization())
        .sum();
    if denom <= 0.0 {
        return Err(FlowError::NoActiveFlows);
    }
    let ratio = flow.queued_count as f64 * flow.utilization() / denom;
    Ok(p_max as f64 * (t_max / i_max) * ratio)
}

/// [`active_service`] for every flow in `flows`, in order, with the maxima
/// taken over the flows that hold packets. One pass for the shared
/// denominator instead of one per flow.
pub fn active_services(flows: &[Flow], p_max: usize) -> Result<Vec<f64>, FlowError> {
    let (i_max, t_max) = rate_maxima(flows).ok_or(FlowError::NoActiveFlows)?;
    let denom: f64 = flows
        .iter()
        .map(|x| x.queued_count as f64 * x.utilization())
        .sum();
    if denom <= 0.0 {
        return Err(FlowError::NoActiveFlows);
    }
    let scale = p_max as f64 * (t_max / i_max);
    Ok(flows
        .iter()
        .map(|x| scale * (x.queued_count as f64 * x.utilization() / denom))
        .collect())
}

fn find(flows: &[Flow], f: FlowId) -> Result<&Flow, FlowError> {
    flows
        .iter()
        .find(|x| x.id == f)
        .ok_or(FlowError::UnknownFlow(f.0))
}
