use serde::Serialize;

use crate::flow_model::FlowId;
use crate::scheduler::{DropReason, Mode};

/// Counters for one flow, or for the whole run when aggregated.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FlowMetrics {
    pub generated: u64,
    pub enqueued: u64,
    pub delivered: u64,
    pub dropped_tail: u64,
    pub dropped_low_centrality: u64,
    pub dropped_feasibility: u64,
    /// Queued packets pushed out by a more central newcomer.
    pub evicted: u64,
    /// Still queued or in service when the run ended.
    pub residual: u64,
    pub bytes_generated: u64,
    pub bytes_delivered: u64,
    pub delay_sum: f64,
    pub delay_max: f64,
}

impl FlowMetrics {
    pub fn dropped(&self) -> u64 {
        self.dropped_tail + self.dropped_low_centrality + self.dropped_feasibility + self.evicted
    }

    pub fn record_drop(&mut self, reason: DropReason) {
        match reason {
            DropReason::TailDrop => self.dropped_tail += 1,
            DropReason::LowCentrality => self.dropped_low_centrality += 1,
            DropReason::Feasibility => self.dropped_feasibility += 1,
        }
    }

    pub fn record_delivery(&mut self, bytes: u32, delay: f64) {
        self.delivered += 1;
        self.bytes_delivered += u64::from(bytes);
        self.delay_sum += delay;
        self.delay_max = self.delay_max.max(delay);
    }

    pub fn delivery_rate(&self) -> f64 {
        fraction(self.delivered, self.generated)
    }

    pub fn loss_rate(&self) -> f64 {
        fraction(self.dropped(), self.generated)
    }

    pub fn residual_rate(&self) -> f64 {
        fraction(self.residual, self.generated)
    }

    /// Mean delay of delivered packets in seconds; zero when none were.
    pub fn mean_delay(&self) -> f64 {
        if self.delivered == 0 {
            0.0
        } else {
            self.delay_sum / self.delivered as f64
        }
    }

    /// `generated == delivered + dropped + residual`.
    pub fn is_conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped() + self.residual
    }

    pub fn absorb(&mut self, other: &FlowMetrics) {
        self.generated += other.generated;
        self.enqueued += other.enqueued;
        self.delivered += other.delivered;
        self.dropped_tail += other.dropped_tail;
        self.dropped_low_centrality += other.dropped_low_centrality;
        self.dropped_feasibility += other.dropped_feasibility;
        self.evicted += other.evicted;
        self.residual += other.residual;
        self.bytes_generated += other.bytes_generated;
        self.bytes_delivered += other.bytes_delivered;
        self.delay_sum += other.delay_sum;
        self.delay_max = self.delay_max.max(other.delay_max);
    }
}

fn fraction(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Static description of a flow, carried next to its counters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowInfo {
    pub id: FlowId,
    pub source: String,
    pub group: String,
    pub raw_degree: usize,
    pub centrality: f64,
    /// Packets per second.
    pub rate: f64,
    pub packet_size: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickSample {
    pub time: f64,
    pub queue_len: usize,
    pub mode: Mode,
    pub load: f64,
    pub delivered: u64,
    pub dropped: u64,
}

/// A delivered packet, recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeliveryRecord {
    pub flow: FlowId,
    pub seqno: u64,
    pub created_at: f64,
    pub delivered_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub duration: f64,
    pub link_rate: f64,
    pub info: Vec<FlowInfo>,
    pub flows: Vec<FlowMetrics>,
    pub ticks: Vec<TickSample>,
}

impl Metrics {
    pub fn aggregate(&self) -> FlowMetrics {
        let mut total = FlowMetrics::default();
        for f in &self.flows {
            total.absorb(f);
        }
        total
    }

    /// Delivered bits per second over the whole run.
    pub fn throughput_bps(&self) -> f64 {
        self.aggregate().bytes_delivered as f64 * 8.0 / self.duration
    }

    pub fn is_conserved(&self) -> bool {
        self.flows.iter().all(FlowMetrics::is_conserved) && self.aggregate().is_conserved()
    }
}

/// Spearman rank correlation with average ranks for ties. Returns `None`
/// when either side is constant or the inputs are shorter than two.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    pearson(&rx, &ry)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa * sbb).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_and_conservation() {
        let mut m = FlowMetrics {
            generated: 10,
            ..Default::default()
        };
        m.record_delivery(512, 0.5);
        m.record_delivery(512, 1.5);
        m.record_drop(DropReason::TailDrop);
        m.evicted = 1;
        m.residual = 6;
        assert!(m.is_conserved());
        assert_eq!(m.delivery_rate(), 0.2);
        assert_eq!(m.loss_rate(), 0.2);
        assert_eq!(m.mean_delay(), 1.0);
        assert_eq!(m.delay_max, 1.5);
        assert!((m.delivery_rate() + m.loss_rate() + m.residual_rate() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_cases() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        // Ties share the average rank: ranks (1.5, 1.5, 3) vs (1, 2, 3).
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
    }
}
