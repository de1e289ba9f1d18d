//! Discrete-event model of CBR senders feeding one relay.
//!
//! The relay is a non-preemptive single server whose service time is the
//! packet's bits over the link rate. Receivers are plain sinks. Time is kept
//! in integer nanoseconds so runs are reproducible bit for bit.

mod metrics;
mod scenarios;
mod sweep;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use metrics::{spearman, DeliveryRecord, FlowInfo, FlowMetrics, Metrics, TickSample};
pub use scenarios::{
    build_canonical_scenario, build_overload_scenario, GroupSpec, OverloadSpec, CANONICAL_GROUPS,
};
pub use sweep::{derive_seed, sweep, Knob, SweepPoint};

use crate::error::SimError;
use crate::flow_model::{Flow, FlowId};
use crate::scheduler::{
    Decision, DropTailQueue, EnqueueOutcome, Mode, Packet, PopAwareScheduler, QueueDiscipline,
    SchedulerConfig,
};
use crate::social_graph::{NodeId, SocialGraph};

const NANOS: f64 = 1e9;
/// Fixed per-flow phase step, on top of the seeded phase.
const PHASE_STEP_NS: u64 = 1_000;
const TICK_NS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discipline {
    PopAware,
    Fifo,
}

impl Discipline {
    pub fn as_str(self) -> &'static str {
        match self {
            Discipline::PopAware => "pop-aware",
            Discipline::Fifo => "fifo",
        }
    }
}

impl std::str::FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pop-aware" | "pop_aware" | "popaware" => Ok(Discipline::PopAware),
            "fifo" => Ok(Discipline::Fifo),
            other => Err(format!(
                "unknown discipline `{other}` (expected pop-aware or fifo)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub source: NodeId,
    /// Packets per second.
    pub rate: f64,
    pub packet_size: u32,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: SocialGraph,
    pub flows: Vec<FlowSpec>,
    /// Bits per second.
    pub link_rate: f64,
    pub queue_capacity: usize,
    /// Seconds.
    pub duration: f64,
    pub discipline: Discipline,
    pub seed: u64,
    pub replications: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::Invalid(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        if !(self.link_rate > 0.0 && self.link_rate.is_finite()) {
            return Err(SimError::Invalid(format!(
                "link rate must be > 0, got {}",
                self.link_rate
            )));
        }
        if self.queue_capacity < 1 {
            return Err(SimError::Invalid("queue capacity must be >= 1".into()));
        }
        if self.replications < 1 {
            return Err(SimError::Invalid("replications must be >= 1".into()));
        }
        if self.flows.is_empty() {
            return Err(SimError::Invalid("scenario has no flows".into()));
        }
        for (i, f) in self.flows.iter().enumerate() {
            if !self.graph.contains(f.source) {
                return Err(SimError::Invalid(format!("flow {i}: unknown source node")));
            }
            self.graph.degree_centrality(f.source)?;
            if f.packet_size == 0 {
                return Err(SimError::Invalid(format!(
                    "flow {i}: packet size must be > 0"
                )));
            }
            self.make_flow(i)?;
        }
        Ok(())
    }

    /// Scheduler-side record for flow `i`.
    pub fn make_flow(&self, i: usize) -> Result<Flow, SimError> {
        let spec = &self.flows[i];
        let c = self.graph.degree_centrality(spec.source)?;
        Flow::from_cbr(
            FlowId(i as u32),
            spec.source,
            spec.rate,
            spec.packet_size,
            self.link_rate,
            c,
        )
        .map_err(|e| SimError::Invalid(e.to_string()))
    }

    pub fn flow_info(&self, i: usize) -> Result<FlowInfo, SimError> {
        let spec = &self.flows[i];
        let c = self.graph.centrality(spec.source)?;
        let group = self.graph.group_of(spec.source)?;
        Ok(FlowInfo {
            id: FlowId(i as u32),
            source: self.graph.name(spec.source).to_owned(),
            group: self.graph.group_name(group).to_owned(),
            raw_degree: c.raw_degree,
            centrality: c.normalized,
            rate: spec.rate,
            packet_size: spec.packet_size,
        })
    }

    /// Offered load over link capacity.
    pub fn offered_load(&self) -> f64 {
        self.flows
            .iter()
            .map(|f| f.rate * f64::from(f.packet_size) * 8.0)
            .sum::<f64>()
            / self.link_rate
    }
}

enum Relay {
    Fifo(DropTailQueue),
    Pop(Box<PopAwareScheduler>),
}

impl Relay {
    fn inner(&mut self) -> &mut dyn QueueDiscipline {
        match self {
            Relay::Fifo(q) => q,
            Relay::Pop(q) => q.as_mut(),
        }
    }

    fn enqueue(&mut self, p: Packet, now: f64) -> Result<EnqueueOutcome, SimError> {
        Ok(self.inner().enqueue(p, now)?)
    }

    fn dequeue(&mut self, now: f64) -> Option<Packet> {
        self.inner().dequeue(now)
    }

    fn sample(&mut self) -> (usize, Mode, f64) {
        let q = self.inner();
        (q.len(), q.mode(), q.load())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    ServiceComplete,
    PacketArrival,
    MeasurementTick,
}

/// Ordered by time, then kind, then flow, then insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: u64,
    kind: EventKind,
    flow: u32,
    seq: u64,
}

#[derive(Default)]
struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl EventQueue {
    fn push(&mut self, time: u64, kind: EventKind, flow: u32) {
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time,
            kind,
            flow,
            seq: self.seq,
        }));
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }
}

struct Source {
    phase: u64,
    rate: f64,
    size: u32,
    next_k: u64,
}

impl Source {
    fn time_of(&self, k: u64) -> u64 {
        self.phase + (k as f64 * NANOS / self.rate).round() as u64
    }
}

/// Output of [`Simulation::run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub trace: Vec<DeliveryRecord>,
    pub decisions: Vec<Decision>,
}

/// One configured run. [`run`] is the short form.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    trace: bool,
    decisions: bool,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            trace: false,
            decisions: false,
        }
    }

    /// Record every delivered packet.
    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    /// Keep the scheduler decision log (pop-aware only).
    pub fn with_decisions(mut self, on: bool) -> Self {
        self.decisions = on;
        self
    }

    pub fn run(self) -> Result<RunOutput, SimError> {
        let sc = self.scenario;
        sc.validate()?;

        let mut queue = match sc.discipline {
            Discipline::Fifo => Relay::Fifo(DropTailQueue::new(sc.queue_capacity)),
            Discipline::PopAware => {
                let mut cfg = SchedulerConfig::new(sc.queue_capacity, sc.link_rate);
                cfg.record_decisions = self.decisions;
                let mut s = PopAwareScheduler::new(cfg)?;
                for i in 0..sc.flows.len() {
                    s.register_flow(sc.make_flow(i)?)?;
                }
                Relay::Pop(Box::new(s))
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let mut sources: Vec<Source> = sc
            .flows
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let interval = (NANOS / f.rate).round() as u64;
                let jitter = rng.random_range(0..interval.max(1));
                Source {
                    phase: i as u64 * PHASE_STEP_NS + jitter,
                    rate: f.rate,
                    size: f.packet_size,
                    next_k: 0,
                }
            })
            .collect();

        let end = (sc.duration * NANOS).round() as u64;
        let mut events = EventQueue::default();
        for (i, s) in sources.iter().enumerate() {
            let t = s.time_of(0);
            if t < end {
                events.push(t, EventKind::PacketArrival, i as u32);
            }
        }
        events.push(TICK_NS.min(end), EventKind::MeasurementTick, 0);

        let mut stats = vec![FlowMetrics::default(); sc.flows.len()];
        let mut ticks = Vec::new();
        let mut trace = Vec::new();
        let mut in_service: Option<Packet> = None;

        while let Some(ev) = events.pop() {
            if ev.time > end || (ev.time == end && ev.kind != EventKind::MeasurementTick) {
                continue;
            }
            let now = ev.time as f64 / NANOS;
            match ev.kind {
                EventKind::PacketArrival => {
                    let i = ev.flow as usize;
                    let src = &mut sources[i];
                    let packet = Packet::new(FlowId(ev.flow), src.size, now, src.next_k);
                    src.next_k += 1;
                    let next = src.time_of(src.next_k);
                    if next < end {
                        events.push(next, EventKind::PacketArrival, ev.flow);
                    }
                    stats[i].generated += 1;
                    stats[i].bytes_generated += u64::from(src.size);
                    match queue.enqueue(packet, now)? {
                        EnqueueOutcome::Enqueued { evicted } => {
                            stats[i].enqueued += 1;
                            if let Some(p) = evicted {
                                stats[p.flow.0 as usize].evicted += 1;
                            }
                        }
                        EnqueueOutcome::Dropped(reason) => stats[i].record_drop(reason),
                    }
                    if in_service.is_none() {
                        in_service =
                            start_service(&mut queue, now, sc.link_rate, ev.time, &mut events);
                    }
                }
                EventKind::ServiceComplete => {
                    let p = in_service.take().expect("service completes a packet");
                    let delay = now - p.created_at;
                    stats[p.flow.0 as usize].record_delivery(p.size, delay);
                    if self.trace {
                        trace.push(DeliveryRecord {
                            flow: p.flow,
                            seqno: p.seqno,
                            created_at: p.created_at,
                            delivered_at: now,
                        });
                    }
                    in_service = start_service(&mut queue, now, sc.link_rate, ev.time, &mut events);
                }
                EventKind::MeasurementTick => {
                    let (delivered, dropped) = stats
                        .iter()
                        .fold((0, 0), |(d, x), s| (d + s.delivered, x + s.dropped()));
                    let (queue_len, mode, load) = queue.sample();
                    ticks.push(TickSample {
                        time: now,
                        queue_len,
                        mode,
                        load,
                        delivered,
                        dropped,
                    });
                    if ev.time < end {
                        events.push((ev.time + TICK_NS).min(end), EventKind::MeasurementTick, 0);
                    }
                }
            }
        }

        // Whatever is still held counts as residual.
        if let Some(p) = in_service.take() {
            stats[p.flow.0 as usize].residual += 1;
        }
        let finish = end as f64 / NANOS;
        let decisions = match &mut queue {
            Relay::Pop(s) => s.take_decisions(),
            Relay::Fifo(_) => Vec::new(),
        };
        while let Some(p) = queue.dequeue(finish) {
            stats[p.flow.0 as usize].residual += 1;
        }

        let info = (0..sc.flows.len())
            .map(|i| sc.flow_info(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunOutput {
            metrics: Metrics {
                duration: sc.duration,
                link_rate: sc.link_rate,
                info,
                flows: stats,
                ticks,
            },
            trace,
            decisions,
        })
    }
}

fn start_service(
    queue: &mut Relay,
    now: f64,
    link_rate: f64,
    now_ns: u64,
    events: &mut EventQueue,
) -> Option<Packet> {
    let p = queue.dequeue(now)?;
    let service = (f64::from(p.size) * 8.0 / link_rate * NANOS).round() as u64;
    events.push(
        now_ns + service.max(1),
        EventKind::ServiceComplete,
        p.flow.0,
    );
    Some(p)
}

/// Runs `scenario` once and returns its metrics.
pub fn run(scenario: &Scenario) -> Result<Metrics, SimError> {
    Ok(Simulation::new(scenario).run()?.metrics)
}
