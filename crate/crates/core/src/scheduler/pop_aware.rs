use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{
    compute_priority, find_lowest_centrality, select_schedulable, DropReason, EnqueueOutcome,
    LoadEstimator, Mode, Packet, PriorityKey, QueueDiscipline,
};
use crate::analysis::{params_from_state, AnalysisParams, FlowSnapshot};
use crate::error::SchedulerError;
use crate::flow_model::{active_services, Flow, FlowId};

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerConfig {
    /// Buffer size in packets.
    pub capacity: usize,
    /// Width of the arrival/output counting window, seconds.
    pub load_window: f64,
    /// Service rate used for residual workload, bits/s.
    pub link_bps: f64,
    /// Serve only the schedulable set in priority mode, even when it has
    /// nothing queued. Off by default: the scheduler falls back to the best
    /// queued flow instead of idling.
    pub strict_schedulable: bool,
    pub record_decisions: bool,
}

impl SchedulerConfig {
    pub fn new(capacity: usize, link_bps: f64) -> Self {
        Self {
            capacity,
            load_window: 1.0,
            link_bps,
            strict_schedulable: false,
            record_decisions: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionKind {
    Enqueue,
    Dequeue,
    Drop(DropReason),
    Evict,
    ModeChange(Mode),
}

/// One scheduler decision, for the optional decision log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub time: f64,
    pub kind: DecisionKind,
    pub flow: FlowId,
    pub seqno: u64,
    pub queue_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorityClass {
    High,
    Low,
}

#[derive(Debug, Clone)]
struct FlowSlot {
    flow: Flow,
    /// Arrival indices of this flow's queued packets, oldest first.
    queued: VecDeque<u64>,
    key: Option<PriorityKey>,
}

/// Popularity-aware queue for the relay.
///
/// Below half occupancy it is a drop-tail FIFO. Above it, flows are ranked by
/// social rate (load over centrality), then by service deficit, and a greedy
/// utilization-bounded subset of them is served first. A full queue admits a
/// newcomer only by evicting a packet of the least central queued flow, and
/// only when the newcomer is strictly more central, needs no more link share,
/// and keeps the served set within the link budget.
#[derive(Debug, Clone)]
pub struct PopAwareScheduler {
    cfg: SchedulerConfig,
    slots: BTreeMap<FlowId, FlowSlot>,
    /// Queued packets keyed by global arrival index.
    order: BTreeMap<u64, Packet>,
    next_index: u64,
    mode: Mode,
    /// Best priority first.
    ranking: Vec<FlowId>,
    schedulable: Vec<FlowId>,
    estimator: LoadEstimator,
    last_load: f64,
    window_index: i64,
    decisions: Vec<Decision>,
}

impl PopAwareScheduler {
    pub fn new(cfg: SchedulerConfig) -> Result<Self, SchedulerError> {
        if cfg.capacity == 0 {
            return Err(SchedulerError::InvalidConfig(
                "capacity must be >= 1".into(),
            ));
        }
        if !(cfg.load_window > 0.0) || !(cfg.link_bps > 0.0) {
            return Err(SchedulerError::InvalidConfig(
                "load window and link rate must be positive".into(),
            ));
        }
        Ok(Self {
            estimator: LoadEstimator::new(cfg.load_window),
            cfg,
            slots: BTreeMap::new(),
            order: BTreeMap::new(),
            next_index: 0,
            mode: Mode::Fifo,
            ranking: Vec::new(),
            schedulable: Vec::new(),
            last_load: 0.0,
            window_index: 0,
            decisions: Vec::new(),
        })
    }

    pub fn register_flow(&mut self, flow: Flow) -> Result<(), SchedulerError> {
        if self.slots.contains_key(&flow.id) {
            return Err(SchedulerError::DuplicateFlow(flow.id.0));
        }
        self.slots.insert(
            flow.id,
            FlowSlot {
                flow,
                queued: VecDeque::new(),
                key: None,
            },
        );
        Ok(())
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.cfg
    }

    pub fn flow(&self, id: FlowId) -> Option<&Flow> {
        self.slots.get(&id).map(|s| &s.flow)
    }

    pub fn flows(&self) -> impl Iterator<Item = &Flow> {
        self.slots.values().map(|s| &s.flow)
    }

    pub fn priority_key(&self, id: FlowId) -> Option<PriorityKey> {
        self.slots.get(&id).and_then(|s| s.key)
    }

    /// Flows admitted for priority service, best first.
    pub fn schedulable(&self) -> &[FlowId] {
        &self.schedulable
    }

    pub fn schedulable_utilization(&self) -> f64 {
        self.schedulable
            .iter()
            .map(|id| self.slots[id].flow.utilization())
            .sum()
    }

    /// High when the flow ranks in the better half of the current ranking.
    pub fn priority_class(&self, id: FlowId) -> Option<PriorityClass> {
        let pos = self.ranking.iter().position(|&f| f == id)?;
        Some(if pos * 2 < self.ranking.len() {
            PriorityClass::High
        } else {
            PriorityClass::Low
        })
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn take_decisions(&mut self) -> Vec<Decision> {
        std::mem::take(&mut self.decisions)
    }

    pub fn measure_load(&mut self, now: f64) -> f64 {
        self.estimator.measure_load(now)
    }

    /// Model inputs for `id` under the current relay state. `m` is the node
    /// count the model is evaluated over.
    pub fn analysis_params(&self, id: FlowId, m: usize) -> Option<AnalysisParams> {
        let slot = self.slots.get(&id)?;
        let active = self.slots.values().filter(|s| !s.queued.is_empty()).count();
        let k = self.schedulable.len();
        let snap = FlowSnapshot {
            utilization: slot.flow.utilization(),
            centrality: slot.flow.centrality,
            queued_bytes: slot.flow.queued_bytes,
        };
        Some(params_from_state(
            &snap,
            m,
            self.order.len(),
            self.last_load,
            k,
            active.saturating_sub(k),
            self.cfg.link_bps,
        ))
    }

    /// Queued packets in arrival order.
    pub fn queued_packets(&self) -> impl Iterator<Item = &Packet> {
        self.order.values()
    }

    fn is_full(&self) -> bool {
        self.order.len() >= self.cfg.capacity
    }

    fn log(&mut self, time: f64, kind: DecisionKind, flow: FlowId, seqno: u64) {
        if self.cfg.record_decisions {
            self.decisions.push(Decision {
                time,
                kind,
                flow,
                seqno,
                queue_len: self.order.len(),
            });
        }
    }

    fn roll_window(&mut self, now: f64) {
        let idx = (now / self.cfg.load_window).floor() as i64;
        if idx > self.window_index {
            self.window_index = idx;
            for s in self.slots.values_mut() {
                s.flow.served_in_window = 0;
            }
        }
    }

    /// Re-ranks the active flows and reselects the schedulable set. A flow
    /// about to join is counted with one extra packet.
    fn recompute(&mut self, joining: Option<FlowId>) {
        let members: Vec<Flow> = self
            .slots
            .values()
            .filter(|s| !s.queued.is_empty() || Some(s.flow.id) == joining)
            .map(|s| {
                let mut f = s.flow.clone();
                if Some(f.id) == joining {
                    f.queued_count += 1;
                }
                f
            })
            .collect();
        for s in self.slots.values_mut() {
            s.key = None;
        }
        let Ok(active) = active_services(&members, self.cfg.capacity) else {
            self.ranking.clear();
            self.schedulable.clear();
            return;
        };
        let mut keyed: Vec<(PriorityKey, Flow)> = members
            .into_iter()
            .zip(active)
            .map(|(f, a)| (compute_priority(&f, self.last_load, a), f))
            .collect();
        keyed.sort_by(|a, b| a.0.rank(&b.0).then(a.1.id.cmp(&b.1.id)));
        self.schedulable = select_schedulable(keyed.iter().map(|(_, f)| f));
        self.ranking = keyed.iter().map(|(_, f)| f.id).collect();
        for (key, f) in keyed {
            if let Some(s) = self.slots.get_mut(&f.id) {
                s.flow.priority = key.social_rate;
                s.key = Some(key);
            }
        }
    }

    fn push(&mut self, packet: Packet) {
        let idx = self.next_index;
        self.next_index += 1;
        let slot = self.slots.get_mut(&packet.flow).expect("registered flow");
        slot.queued.push_back(idx);
        slot.flow.queued_count += 1;
        slot.flow.queued_bytes += u64::from(packet.size);
        self.order.insert(idx, packet);
    }

    fn remove(&mut self, idx: u64) -> Packet {
        let packet = self.order.remove(&idx).expect("indexed packet");
        let slot = self.slots.get_mut(&packet.flow).expect("registered flow");
        slot.flow.queued_count -= 1;
        slot.flow.queued_bytes -= u64::from(packet.size);
        packet
    }

    /// Full-queue admission in priority mode.
    pub fn admit_new_packet(&mut self, packet: Packet, now: f64) -> EnqueueOutcome {
        debug_assert!(self.is_full());
        let queued = self
            .slots
            .values()
            .filter(|s| !s.queued.is_empty())
            .map(|s| &s.flow);
        let Ok((victim, c_victim)) = find_lowest_centrality(queued) else {
            return EnqueueOutcome::Dropped(DropReason::TailDrop);
        };
        let newcomer = &self.slots[&packet.flow].flow;
        let victim_flow = &self.slots[&victim].flow;
        let outcome = if !(newcomer.centrality > c_victim) {
            Err(DropReason::LowCentrality)
        } else if !(newcomer.utilization() <= victim_flow.utilization())
            || !self.feasible_after_swap(packet.flow, victim)
        {
            Err(DropReason::Feasibility)
        } else {
            Ok(())
        };
        match outcome {
            Err(reason) => {
                self.log(now, DecisionKind::Drop(reason), packet.flow, packet.seqno);
                EnqueueOutcome::Dropped(reason)
            }
            Ok(()) => {
                let idx = *self.slots[&victim]
                    .queued
                    .back()
                    .expect("victim has packets");
                self.slots
                    .get_mut(&victim)
                    .expect("victim")
                    .queued
                    .pop_back();
                let evicted = self.remove(idx);
                self.log(now, DecisionKind::Evict, evicted.flow, evicted.seqno);
                let (flow, seqno) = (packet.flow, packet.seqno);
                self.push(packet);
                self.log(now, DecisionKind::Enqueue, flow, seqno);
                if self.slots[&victim].queued.is_empty() {
                    self.recompute(None);
                }
                EnqueueOutcome::Enqueued {
                    evicted: Some(evicted),
                }
            }
        }
    }

    /// Link budget check for the schedulable set once `newcomer` joins and
    /// `victim` loses one packet.
    fn feasible_after_swap(&self, newcomer: FlowId, victim: FlowId) -> bool {
        let victim_leaves = self.slots[&victim].queued.len() == 1;
        let mut total = 0.0;
        let mut has_newcomer = false;
        for id in &self.schedulable {
            if *id == victim && victim_leaves {
                continue;
            }
            has_newcomer |= *id == newcomer;
            total += self.slots[id].flow.utilization();
        }
        if !has_newcomer {
            total += self.slots[&newcomer].flow.utilization();
        }
        total <= 1.0
    }

    fn best_flow(&self) -> Option<FlowId> {
        let cmp = |a: &FlowId, b: &FlowId| -> Ordering {
            let sa = &self.slots[a];
            let sb = &self.slots[b];
            match (sa.key, sb.key) {
                (Some(ka), Some(kb)) => ka.rank(&kb),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            }
            .then_with(|| sa.queued.front().cmp(&sb.queued.front()))
            .then(a.cmp(b))
        };
        let in_set = self
            .schedulable
            .iter()
            .filter(|id| !self.slots[*id].queued.is_empty())
            .min_by(|a, b| cmp(a, b))
            .copied();
        if in_set.is_some() || self.cfg.strict_schedulable {
            return in_set;
        }
        self.slots
            .iter()
            .filter(|(_, s)| !s.queued.is_empty())
            .map(|(id, _)| id)
            .min_by(|a, b| cmp(a, b))
            .copied()
    }
}

impl QueueDiscipline for PopAwareScheduler {
    fn enqueue(&mut self, packet: Packet, now: f64) -> Result<EnqueueOutcome, SchedulerError> {
        if !self.slots.contains_key(&packet.flow) {
            return Err(SchedulerError::UnknownFlow(packet.flow.0));
        }
        self.roll_window(now);
        self.estimator.record_arrival(now);
        self.last_load = self.estimator.measure_load(now);

        let mode = if 2 * self.order.len() > self.cfg.capacity {
            Mode::Priority
        } else {
            Mode::Fifo
        };
        let switched = mode != self.mode;
        if switched {
            self.mode = mode;
            self.log(
                now,
                DecisionKind::ModeChange(mode),
                packet.flow,
                packet.seqno,
            );
        }
        let joining = self.slots[&packet.flow].queued.is_empty();

        if mode == Mode::Fifo {
            if self.is_full() {
                self.log(
                    now,
                    DecisionKind::Drop(DropReason::TailDrop),
                    packet.flow,
                    packet.seqno,
                );
                return Ok(EnqueueOutcome::Dropped(DropReason::TailDrop));
            }
            let (flow, seqno) = (packet.flow, packet.seqno);
            self.push(packet);
            self.log(now, DecisionKind::Enqueue, flow, seqno);
            return Ok(EnqueueOutcome::Enqueued { evicted: None });
        }

        if switched || joining {
            self.recompute(joining.then_some(packet.flow));
        }
        if !self.is_full() {
            let (flow, seqno) = (packet.flow, packet.seqno);
            self.push(packet);
            self.log(now, DecisionKind::Enqueue, flow, seqno);
            return Ok(EnqueueOutcome::Enqueued { evicted: None });
        }
        let outcome = self.admit_new_packet(packet, now);
        if joining && !outcome.is_enqueued() {
            // The newcomer never made it in; drop it from the ranking again.
            self.recompute(None);
        }
        Ok(outcome)
    }

    fn dequeue(&mut self, now: f64) -> Option<Packet> {
        self.roll_window(now);
        let idx = match self.mode {
            Mode::Fifo => *self.order.keys().next()?,
            Mode::Priority => {
                let id = self.best_flow()?;
                *self.slots[&id].queued.front().expect("queued flow")
            }
        };
        let flow = self.order[&idx].flow;
        self.slots.get_mut(&flow).expect("flow").queued.pop_front();
        let packet = self.remove(idx);
        let emptied = {
            let slot = self.slots.get_mut(&flow).expect("flow");
            slot.flow.served_count += 1;
            slot.flow.served_in_window += 1;
            slot.queued.is_empty()
        };
        self.estimator.record_departure(now);
        self.log(now, DecisionKind::Dequeue, packet.flow, packet.seqno);
        if emptied && self.mode == Mode::Priority {
            self.recompute(None);
        }
        Some(packet)
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    fn capacity(&self) -> usize {
        self.cfg.capacity
    }

    fn mode(&self) -> Mode {
        self.mode
    }

    fn load(&self) -> f64 {
        self.last_load
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::DropTailQueue;
    use crate::social_graph::NodeId;
    use proptest::prelude::*;

    const SIZE: u32 = 512;

    fn sched(capacity: usize, flows: &[(f64, f64)]) -> PopAwareScheduler {
        let mut cfg = SchedulerConfig::new(capacity, 2e6);
        cfg.record_decisions = true;
        let mut s = PopAwareScheduler::new(cfg).unwrap();
        for (i, &(c, util)) in flows.iter().enumerate() {
            let id = i as u32;
            s.register_flow(Flow::new(FlowId(id), NodeId(id), 1.0, util, c).unwrap())
                .unwrap();
        }
        s
    }

    struct Feeder {
        seq: Vec<u64>,
    }

    impl Feeder {
        fn new(n: usize) -> Self {
            Self { seq: vec![0; n] }
        }

        fn packet(&mut self, flow: u32, now: f64) -> Packet {
            let s = &mut self.seq[flow as usize];
            *s += 1;
            Packet::new(FlowId(flow), SIZE, now, *s)
        }
    }

    // One served packet so the output rate is positive and loads are finite.
    fn warm_up(s: &mut PopAwareScheduler, feed: &mut Feeder, flow: u32) {
        s.enqueue(feed.packet(flow, 0.0), 0.0).unwrap();
        s.dequeue(0.05).unwrap();
    }

    #[test]
    fn rejects_bad_config_and_unknown_flows() {
        assert!(PopAwareScheduler::new(SchedulerConfig::new(0, 2e6)).is_err());
        assert!(PopAwareScheduler::new(SchedulerConfig::new(4, 0.0)).is_err());
        let mut s = sched(4, &[(0.5, 0.1)]);
        let dup = Flow::new(FlowId(0), NodeId(0), 1.0, 0.1, 0.5).unwrap();
        assert_eq!(s.register_flow(dup), Err(SchedulerError::DuplicateFlow(0)));
        let stray = Packet::new(FlowId(9), SIZE, 0.0, 1);
        assert_eq!(s.enqueue(stray, 0.0), Err(SchedulerError::UnknownFlow(9)));
    }

    #[test]
    fn fifo_at_or_below_half() {
        let mut s = sched(10, &[(0.22, 0.1), (0.89, 0.1)]);
        let mut feed = Feeder::new(2);
        let mut sent = Vec::new();
        for k in 0..6 {
            let p = feed.packet(k % 2, 0.1 * f64::from(k));
            sent.push((p.flow, p.seqno));
            assert!(s.enqueue(p, 0.1 * f64::from(k)).unwrap().is_enqueued());
        }
        assert_eq!(s.mode(), Mode::Fifo);
        let got: Vec<_> = std::iter::from_fn(|| s.dequeue(1.0))
            .map(|p| (p.flow, p.seqno))
            .collect();
        assert_eq!(got, sent);
    }

    #[test]
    fn priority_serves_central_flow_first() {
        let mut s = sched(4, &[(0.22, 0.1), (0.89, 0.1)]);
        let mut feed = Feeder::new(2);
        warm_up(&mut s, &mut feed, 0);
        for (k, flow) in [0, 0, 1, 1].into_iter().enumerate() {
            let t = 0.2 + 0.01 * k as f64;
            assert!(s.enqueue(feed.packet(flow, t), t).unwrap().is_enqueued());
        }
        assert_eq!(s.mode(), Mode::Priority);
        assert_eq!(s.priority_class(FlowId(1)), Some(PriorityClass::High));
        assert_eq!(s.priority_class(FlowId(0)), Some(PriorityClass::Low));
        let got: Vec<_> = std::iter::from_fn(|| s.dequeue(0.5))
            .map(|p| (p.flow.0, p.seqno))
            .collect();
        assert_eq!(got, vec![(1, 1), (1, 2), (0, 2), (0, 3)]);
    }

    #[test]
    fn load_condition_is_strictly_above_half() {
        let mut s = sched(4, &[(0.5, 0.1)]);
        let mut feed = Feeder::new(1);
        for k in 0..3 {
            s.enqueue(feed.packet(0, 0.0), 0.0).unwrap();
            assert_eq!(s.mode(), Mode::Fifo, "insert {k}");
        }
        s.enqueue(feed.packet(0, 0.0), 0.0).unwrap();
        assert_eq!(s.mode(), Mode::Priority);
        let changes = s
            .decisions()
            .iter()
            .filter(|d| matches!(d.kind, DecisionKind::ModeChange(_)))
            .count();
        assert_eq!(changes, 1);
    }

    // Fills a 4-slot queue with flow 0 packets in priority mode, then offers
    // one packet of flow 1.
    fn full_then_newcomer(
        victim: (f64, f64),
        newcomer: (f64, f64),
    ) -> (PopAwareScheduler, EnqueueOutcome) {
        let mut s = sched(4, &[victim, newcomer]);
        let mut feed = Feeder::new(2);
        warm_up(&mut s, &mut feed, 0);
        for k in 0..4 {
            let t = 0.2 + 0.01 * f64::from(k);
            assert!(s.enqueue(feed.packet(0, t), t).unwrap().is_enqueued());
        }
        assert_eq!(s.len(), 4);
        let out = s.enqueue(feed.packet(1, 0.3), 0.3).unwrap();
        (s, out)
    }

    #[test]
    fn admit_evicts_newest_packet_of_least_central_flow() {
        let (s, out) = full_then_newcomer((0.22, 0.1), (0.89, 0.1));
        let EnqueueOutcome::Enqueued { evicted: Some(ev) } = out else {
            panic!("expected eviction, got {out:?}");
        };
        assert_eq!((ev.flow, ev.seqno), (FlowId(0), 5));
        assert_eq!(s.len(), 4);
        let queued: Vec<_> = s.queued_packets().map(|p| (p.flow.0, p.seqno)).collect();
        assert_eq!(queued, vec![(0, 2), (0, 3), (0, 4), (1, 1)]);
        assert_eq!(s.flow(FlowId(0)).unwrap().queued_count, 3);
        assert_eq!(s.flow(FlowId(1)).unwrap().queued_bytes, u64::from(SIZE));
    }

    #[test]
    fn admit_drops_less_central_newcomer() {
        let (s, out) = full_then_newcomer((0.22, 0.1), (0.2, 0.1));
        assert_eq!(out, EnqueueOutcome::Dropped(DropReason::LowCentrality));
        assert_eq!(s.len(), 4);
        // The rejected flow must not linger in the ranking.
        assert_eq!(s.priority_key(FlowId(1)), None);
        assert_eq!(s.schedulable(), &[FlowId(0)]);
    }

    #[test]
    fn admit_drops_equal_centrality() {
        let (_, out) = full_then_newcomer((0.22, 0.1), (0.22, 0.1));
        assert_eq!(out, EnqueueOutcome::Dropped(DropReason::LowCentrality));
    }

    #[test]
    fn admit_drops_heavier_newcomer() {
        let (_, out) = full_then_newcomer((0.22, 0.1), (0.89, 0.5));
        assert_eq!(out, EnqueueOutcome::Dropped(DropReason::Feasibility));
    }

    #[test]
    fn admit_drops_when_link_budget_breaks() {
        // Flow 0 (c 0.9, u 0.6) holds two slots, flow 1 (c 0.22, u 0.6) the
        // other two; a c 0.5, u 0.5 newcomer passes both pairwise checks but
        // 0.6 + 0.5 exceeds the link.
        let mut s = sched(4, &[(0.9, 0.6), (0.22, 0.6), (0.5, 0.5)]);
        let mut feed = Feeder::new(3);
        warm_up(&mut s, &mut feed, 0);
        for (k, flow) in [0, 1, 0, 1].into_iter().enumerate() {
            let t = 0.2 + 0.01 * k as f64;
            assert!(s.enqueue(feed.packet(flow, t), t).unwrap().is_enqueued());
        }
        let out = s.enqueue(feed.packet(2, 0.3), 0.3).unwrap();
        assert_eq!(out, EnqueueOutcome::Dropped(DropReason::Feasibility));
        assert!(s.schedulable_utilization() <= 1.0);
    }

    #[test]
    fn strict_mode_keeps_fallback_off() {
        let mut cfg = SchedulerConfig::new(4, 2e6);
        cfg.strict_schedulable = true;
        let mut s = PopAwareScheduler::new(cfg).unwrap();
        s.register_flow(Flow::new(FlowId(0), NodeId(0), 1.0, 0.1, 0.5).unwrap())
            .unwrap();
        let mut feed = Feeder::new(1);
        for _ in 0..4 {
            s.enqueue(feed.packet(0, 0.0), 0.0).unwrap();
        }
        assert_eq!(s.schedulable(), &[FlowId(0)]);
        assert_eq!(std::iter::from_fn(|| s.dequeue(0.1)).count(), 4);
        assert!(s.schedulable().is_empty());
    }

    #[derive(Debug, Clone)]
    enum Op {
        Arrive(u32),
        Serve,
    }

    fn ops(flows: u32) -> impl Strategy<Value = Vec<Op>> {
        proptest::collection::vec(
            prop_oneof![
                3 => (0..flows).prop_map(Op::Arrive),
                2 => Just(Op::Serve),
            ],
            1..200,
        )
    }

    fn flow_params(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0f64..=1.0, 0.01f64..=1.0), n)
    }

    fn replay(s: &mut PopAwareScheduler, trace: &[Op]) -> Vec<(u32, u64)> {
        let mut feed = Feeder::new(8);
        let mut out = Vec::new();
        for (k, op) in trace.iter().enumerate() {
            let t = 0.01 * k as f64;
            match op {
                Op::Arrive(f) => {
                    s.enqueue(feed.packet(*f, t), t).unwrap();
                }
                Op::Serve => {
                    if let Some(p) = s.dequeue(t) {
                        out.push((p.flow.0, p.seqno));
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn invariants_hold_on_random_traces(params in flow_params(5), trace in ops(5), cap in 1usize..12) {
            let mut s = sched(cap, &params);
            let mut feed = Feeder::new(5);
            let (mut admitted, mut served, mut evicted) = (0usize, 0usize, 0usize);
            let mut last_seq = [0u64; 5];
            for (k, op) in trace.iter().enumerate() {
                let t = 0.01 * k as f64;
                match op {
                    Op::Arrive(f) => {
                        let p = feed.packet(*f, t);
                        match s.enqueue(p, t).unwrap() {
                            EnqueueOutcome::Enqueued { evicted: ev } => {
                                admitted += 1;
                                if let Some(ev) = ev {
                                    evicted += 1;
                                    let c_in = params[*f as usize].0;
                                    let c_out = params[ev.flow.0 as usize].0;
                                    prop_assert!(c_out < c_in);
                                    prop_assert!(params[*f as usize].1 <= params[ev.flow.0 as usize].1);
                                }
                            }
                            EnqueueOutcome::Dropped(_) => {}
                        }
                    }
                    Op::Serve => {
                        if let Some(p) = s.dequeue(t) {
                            served += 1;
                            let i = p.flow.0 as usize;
                            prop_assert!(p.seqno > last_seq[i]);
                            last_seq[i] = p.seqno;
                        }
                    }
                }
                prop_assert!(s.len() <= cap);
                prop_assert_eq!(admitted - served - evicted, s.len());
                prop_assert!(s.schedulable_utilization() <= 1.0);
                let by_flow: usize = s.flows().map(|f| f.queued_count).sum();
                prop_assert_eq!(by_flow, s.len());
            }
        }

        #[test]
        fn fifo_equivalent_at_or_below_half(params in flow_params(4), trace in ops(4), cap in 2usize..16) {
            // Keep occupancy before every insert at or below half the capacity.
            let mut filtered = Vec::new();
            let mut len = 0usize;
            for op in trace {
                match op {
                    Op::Arrive(_) if 2 * len <= cap => { len += 1; filtered.push(op); }
                    Op::Arrive(_) => {}
                    Op::Serve => { len = len.saturating_sub(1); filtered.push(op); }
                }
            }
            let mut pop = sched(cap, &params);
            let mut reference = DropTailQueue::new(cap);
            let mut feed = Feeder::new(4);
            let mut expected = Vec::new();
            for (k, op) in filtered.iter().enumerate() {
                let t = 0.01 * k as f64;
                match op {
                    Op::Arrive(f) => {
                        reference.enqueue(feed.packet(*f, t), t).unwrap();
                    }
                    Op::Serve => {
                        if let Some(p) = reference.dequeue(t) {
                            expected.push((p.flow.0, p.seqno));
                        }
                    }
                }
            }
            prop_assert_eq!(replay(&mut pop, &filtered), expected);
            prop_assert_eq!(pop.mode(), Mode::Fifo);
        }

        #[test]
        fn deterministic(params in flow_params(4), trace in ops(4), cap in 1usize..10) {
            let mut a = sched(cap, &params);
            let mut b = sched(cap, &params);
            prop_assert_eq!(replay(&mut a, &trace), replay(&mut b, &trace));
            prop_assert_eq!(a.decisions(), b.decisions());
        }
    }
}
