//! Fixtures shared by the benchmarks.

use popsched::{Flow, FlowId, NodeId, Packet, PopAwareScheduler, QueueDiscipline, SchedulerConfig};

/// A scheduler with `flows` registered flows of spread-out centrality and
/// utilization, already past half occupancy.
pub fn loaded_scheduler(flows: u32, capacity: usize) -> PopAwareScheduler {
    let mut s = PopAwareScheduler::new(SchedulerConfig::new(capacity, 2e6)).expect("config");
    for i in 0..flows {
        let c = f64::from(i + 1) / f64::from(flows + 1);
        let u = 0.02 + 0.5 * f64::from(i % 7) / 7.0;
        s.register_flow(Flow::new(FlowId(i), NodeId(i), 1.0, u, c).expect("flow"))
            .expect("register");
    }
    let mut seq = 0;
    let mut t = 0.0;
    while 2 * s.len() <= capacity {
        seq += 1;
        t += 1e-4;
        let f = (seq as u32 * 7) % flows;
        s.enqueue(Packet::new(FlowId(f), 512, t, seq), t)
            .expect("enqueue");
    }
    s
}
