use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Discipline, FlowSpec, Scenario};
use crate::social_graph::SocialGraph;

/// Group name, member count, and intra-group edges as 1-based member pairs.
pub type GroupSpec = (&'static str, usize, &'static [(usize, usize)]);

/// The three reference communities.
#[rustfmt::skip]
pub const CANONICAL_GROUPS: [GroupSpec; 3] = [
    (
        "SA",
        10,
        &[
            (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8), (1, 9),
            (10, 7), (10, 9), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 9),
            (9, 8),
        ],
    ),
    (
        "SB",
        7,
        &[
            (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (7, 3), (7, 5), (3, 5),
            (3, 6), (5, 6), (2, 4),
        ],
    ),
    (
        "SC",
        6,
        &[
            (1, 2), (1, 3), (1, 4), (1, 5), (6, 5), (5, 3), (5, 2), (3, 4),
        ],
    ),
];

pub const LINK_BPS: f64 = 2_000_000.0;
pub const PACKET_BYTES: u32 = 512;
pub const QUEUE_PACKETS: usize = 64;

fn canonical_graph() -> SocialGraph {
    let mut g = SocialGraph::new();
    for (name, size, edges) in CANONICAL_GROUPS {
        let grp = g.add_group(name);
        for i in 1..=size {
            g.add_node(&format!("{name}{i}"), grp).expect("fresh node");
        }
        for &(a, b) in edges {
            g.add_edge_by_name(&format!("{name}{a}"), &format!("{name}{b}"))
                .expect("canonical edge");
        }
    }
    g
}

/// Three communities (10, 7 and 6 members) whose first members send CBR
/// traffic through the relay: 512-byte packets at 4 packets/s over a
/// 2 Mb/s link with a 64-packet buffer, for 800 s.
pub fn build_canonical_scenario() -> Scenario {
    let graph = canonical_graph();
    let flows = ["SA1", "SB1", "SC1"]
        .iter()
        .map(|n| FlowSpec {
            source: graph.lookup(n).expect("sender"),
            rate: 4.0,
            packet_size: PACKET_BYTES,
        })
        .collect();
    Scenario {
        graph,
        flows,
        link_rate: LINK_BPS,
        queue_capacity: QUEUE_PACKETS,
        duration: 800.0,
        discipline: Discipline::PopAware,
        seed: 1,
        replications: 5,
    }
}

/// Parameters for [`build_overload_scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverloadSpec {
    pub flows: usize,
    /// Offered load as a multiple of link capacity.
    pub load_factor: f64,
    pub duration: f64,
    pub seed: u64,
}

impl Default for OverloadSpec {
    fn default() -> Self {
        Self {
            flows: 40,
            load_factor: 1.6,
            duration: 200.0,
            seed: 1,
        }
    }
}

/// Every member of the reference communities sends, and seeded random
/// communities of 5 to 9 members are appended until there are `flows`
/// senders. Each sender offers the same CBR rate, chosen so the total is
/// `load_factor` times the link capacity.
pub fn build_overload_scenario(spec: OverloadSpec) -> Scenario {
    let mut graph = canonical_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5e_ed0f_9a4f);
    let mut extra = 0;
    while graph.node_count() < spec.flows {
        extra += 1;
        let name = format!("SX{extra}");
        let grp = graph.add_group(&name);
        let size = rng.random_range(5..=9);
        let ids: Vec<_> = (1..=size)
            .map(|i| {
                graph
                    .add_node(&format!("{name}_{i}"), grp)
                    .expect("fresh node")
            })
            .collect();
        // Random spanning tree keeps the group connected, then sparse extras.
        for i in 1..size {
            let j = rng.random_range(0..i);
            graph.add_edge(ids[i], ids[j]).expect("tree edge");
        }
        for i in 0..size {
            for j in i + 1..size {
                if rng.random_bool(0.3) {
                    graph.add_edge(ids[i], ids[j]).expect("extra edge");
                }
            }
        }
    }
    let link_pps = LINK_BPS / (f64::from(PACKET_BYTES) * 8.0);
    let rate = spec.load_factor * link_pps / spec.flows as f64;
    let flows = graph
        .nodes()
        .take(spec.flows)
        .map(|source| FlowSpec {
            source,
            rate,
            packet_size: PACKET_BYTES,
        })
        .collect();
    Scenario {
        graph,
        flows,
        link_rate: LINK_BPS,
        queue_capacity: QUEUE_PACKETS,
        duration: spec.duration,
        discipline: Discipline::PopAware,
        seed: spec.seed,
        replications: 5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const SA: [usize; 10] = [8, 2, 3, 3, 3, 3, 4, 2, 4, 2];
    const SB: [usize; 7] = [5, 2, 4, 2, 4, 3, 2];
    const SC: [usize; 6] = [4, 2, 3, 2, 4, 1];

    #[test]
    fn canonical_degrees() {
        let sc = build_canonical_scenario();
        let g = &sc.graph;
        for (group, degrees) in [("SA", &SA[..]), ("SB", &SB[..]), ("SC", &SC[..])] {
            for (i, &d) in degrees.iter().enumerate() {
                let id = g.lookup(&format!("{group}{}", i + 1)).unwrap();
                assert_eq!(g.raw_degree(id).unwrap(), d, "{group}{}", i + 1);
            }
        }
    }

    #[test]
    fn handshake_per_group() {
        let g = build_canonical_scenario().graph;
        for grp in g.groups() {
            let members: BTreeSet<_> = g.members(grp).iter().copied().collect();
            let edges = g
                .edges()
                .filter(|(a, b)| members.contains(a) && members.contains(b))
                .count();
            let degree_sum: usize = members.iter().map(|&a| g.raw_degree(a).unwrap()).sum();
            assert_eq!(2 * edges, degree_sum);
        }
    }

    #[test]
    fn groups_are_connected() {
        let sc = build_overload_scenario(OverloadSpec {
            flows: 50,
            ..Default::default()
        });
        let g = &sc.graph;
        for grp in g.groups() {
            let members = g.members(grp);
            let mut seen = BTreeSet::from([members[0]]);
            let mut stack = vec![members[0]];
            while let Some(a) = stack.pop() {
                for &b in members {
                    if g.has_edge(a, b) && seen.insert(b) {
                        stack.push(b);
                    }
                }
            }
            assert_eq!(seen.len(), members.len(), "group {}", g.group_name(grp));
        }
    }

    #[test]
    fn overload_shape() {
        let sc = build_overload_scenario(OverloadSpec::default());
        sc.validate().unwrap();
        assert_eq!(sc.flows.len(), 40);
        assert!((sc.offered_load() - 1.6).abs() < 1e-9);
        let again = build_overload_scenario(OverloadSpec::default());
        assert_eq!(
            sc.graph.edges().collect::<Vec<_>>(),
            again.graph.edges().collect::<Vec<_>>()
        );
    }
}
