//! Social communities and degree centrality.
//!
//! Each node belongs to exactly one group. Only intra-group edges count
//! towards a node's degree, and the centrality denominator is the size of the
//! node's own group minus one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Raw degree and its normalized form for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centrality {
    pub raw_degree: usize,
    pub normalized: f64,
}

#[derive(Debug, Clone)]
struct NodeEntry {
    name: String,
    group: GroupId,
}

/// Undirected simple graph partitioned into social groups.
///
/// The graph is built once and read afterwards; there is no removal API.
#[derive(Debug, Clone, Default)]
pub struct SocialGraph {
    nodes: Vec<NodeEntry>,
    by_name: BTreeMap<String, NodeId>,
    groups: Vec<String>,
    group_by_name: BTreeMap<String, GroupId>,
    members: Vec<Vec<NodeId>>,
    adjacency: Vec<BTreeSet<NodeId>>,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, creating the group if needed.
    pub fn add_group(&mut self, name: &str) -> GroupId {
        if let Some(&g) = self.group_by_name.get(name) {
            return g;
        }
        let g = GroupId(self.groups.len() as u32);
        self.groups.push(name.to_owned());
        self.group_by_name.insert(name.to_owned(), g);
        self.members.push(Vec::new());
        g
    }

    pub fn add_node(&mut self, name: &str, group: GroupId) -> Result<NodeId, GraphError> {
        if self.by_name.contains_key(name) {
            return Err(GraphError::DuplicateNode(name.to_owned()));
        }
        let Some(members) = self.members.get_mut(group.0 as usize) else {
            return Err(GraphError::UnknownGroup(group.0));
        };
        let id = NodeId(self.nodes.len() as u32);
        members.push(id);
        self.nodes.push(NodeEntry {
            name: name.to_owned(),
            group,
        });
        self.by_name.insert(name.to_owned(), id);
        self.adjacency.push(BTreeSet::new());
        Ok(id)
    }

    /// Adds an undirected edge. Re-adding an existing edge is a no-op and
    /// returns `false`.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<bool, GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(self.name(a).to_owned()));
        }
        let fresh = self.adjacency[a.0 as usize].insert(b);
        self.adjacency[b.0 as usize].insert(a);
        Ok(fresh)
    }

    pub fn add_edge_by_name(&mut self, a: &str, b: &str) -> Result<bool, GraphError> {
        let a = self.lookup(a)?;
        let b = self.lookup(b)?;
        self.add_edge(a, b)
    }

    pub fn lookup(&self, name: &str) -> Result<NodeId, GraphError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNodeName(name.to_owned()))
    }

    pub fn contains(&self, a: NodeId) -> bool {
        (a.0 as usize) < self.nodes.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn name(&self, a: NodeId) -> &str {
        &self.nodes[a.0 as usize].name
    }

    pub fn group_of(&self, a: NodeId) -> Result<GroupId, GraphError> {
        self.check(a)?;
        Ok(self.nodes[a.0 as usize].group)
    }

    pub fn group_name(&self, g: GroupId) -> &str {
        &self.groups[g.0 as usize]
    }

    pub fn groups(&self) -> impl Iterator<Item = GroupId> + '_ {
        (0..self.groups.len() as u32).map(GroupId)
    }

    pub fn members(&self, g: GroupId) -> &[NodeId] {
        &self.members[g.0 as usize]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency
            .get(a.0 as usize)
            .is_some_and(|adj| adj.contains(&b))
    }

    /// All edges, each reported once with the smaller id first.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, adj)| {
            let a = NodeId(i as u32);
            adj.iter().filter(move |&&b| a < b).map(move |&b| (a, b))
        })
    }

    /// Number of distinct neighbours of `a` inside its own group.
    pub fn raw_degree(&self, a: NodeId) -> Result<usize, GraphError> {
        let group = self.group_of(a)?;
        Ok(self.adjacency[a.0 as usize]
            .iter()
            .filter(|b| self.nodes[b.0 as usize].group == group)
            .count())
    }

    /// `raw_degree(a) / (m - 1)` where `m` is the size of `a`'s group.
    pub fn degree_centrality(&self, a: NodeId) -> Result<f64, GraphError> {
        let raw = self.raw_degree(a)?;
        let m = self.members(self.nodes[a.0 as usize].group).len();
        if m < 2 {
            return Err(GraphError::DegenerateGroup {
                node: self.name(a).to_owned(),
                size: m,
            });
        }
        Ok(raw as f64 / (m - 1) as f64)
    }

    pub fn centrality(&self, a: NodeId) -> Result<Centrality, GraphError> {
        Ok(Centrality {
            raw_degree: self.raw_degree(a)?,
            normalized: self.degree_centrality(a)?,
        })
    }

    fn check(&self, a: NodeId) -> Result<(), GraphError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(a.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete(n: usize) -> SocialGraph {
        let mut g = SocialGraph::new();
        let grp = g.add_group("K");
        let ids: Vec<_> = (0..n)
            .map(|i| g.add_node(&format!("k{i}"), grp).unwrap())
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(ids[i], ids[j]).unwrap();
            }
        }
        g
    }

    // Brute-force neighbour count straight from the pair relation.
    fn scan_degree(g: &SocialGraph, a: NodeId) -> usize {
        let grp = g.group_of(a).unwrap();
        g.nodes()
            .filter(|&u| u != a && g.group_of(u).unwrap() == grp && g.has_edge(a, u))
            .count()
    }

    #[test]
    fn complete_graph_degree() {
        let g = complete(5);
        for a in g.nodes() {
            assert_eq!(scan_degree(&g, a), 4);
            assert_eq!(g.raw_degree(a).unwrap(), 4);
            assert_eq!(g.degree_centrality(a).unwrap(), 1.0);
        }
    }

    #[test]
    fn isolated_node() {
        let mut g = SocialGraph::new();
        let grp = g.add_group("A");
        let a = g.add_node("a", grp).unwrap();
        let _b = g.add_node("b", grp).unwrap();
        assert_eq!(g.raw_degree(a).unwrap(), 0);
        assert_eq!(g.degree_centrality(a).unwrap(), 0.0);
    }

    #[test]
    fn pair_group() {
        let mut g = SocialGraph::new();
        let grp = g.add_group("A");
        let a = g.add_node("a", grp).unwrap();
        let b = g.add_node("b", grp).unwrap();
        g.add_edge(a, b).unwrap();
        assert_eq!(g.degree_centrality(a).unwrap(), 1.0);
        assert_eq!(g.degree_centrality(b).unwrap(), 1.0);
    }

    #[test]
    fn singleton_group_is_degenerate() {
        let mut g = SocialGraph::new();
        let grp = g.add_group("A");
        let a = g.add_node("a", grp).unwrap();
        assert!(matches!(
            g.degree_centrality(a),
            Err(GraphError::DegenerateGroup { size: 1, .. })
        ));
    }

    #[test]
    fn unknown_node_and_self_loop() {
        let mut g = complete(2);
        assert!(matches!(
            g.raw_degree(NodeId(9)),
            Err(GraphError::UnknownNode(9))
        ));
        assert!(matches!(
            g.add_edge(NodeId(0), NodeId(0)),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(g.lookup("nope").is_err());
        assert!(g.add_node("k0", GroupId(0)).is_err());
    }

    #[test]
    fn inter_group_edges_do_not_count() {
        let mut g = SocialGraph::new();
        let ga = g.add_group("A");
        let gb = g.add_group("B");
        let a1 = g.add_node("a1", ga).unwrap();
        let a2 = g.add_node("a2", ga).unwrap();
        let b1 = g.add_node("b1", gb).unwrap();
        let _b2 = g.add_node("b2", gb).unwrap();
        g.add_edge(a1, a2).unwrap();
        g.add_edge(a1, b1).unwrap();
        assert_eq!(g.raw_degree(a1).unwrap(), 1);
        assert_eq!(g.raw_degree(b1).unwrap(), 0);
    }

    #[test]
    fn edges_are_symmetric_and_reported_once() {
        let mut g = complete(3);
        assert!(!g.add_edge(NodeId(1), NodeId(0)).unwrap());
        assert!(g.has_edge(NodeId(2), NodeId(0)));
        assert_eq!(g.edges().count(), 3);
    }

    fn arb_group() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..12).prop_flat_map(|n| {
            let pairs = proptest::collection::vec((0..n, 0..n), 0..40);
            (Just(n), pairs)
        })
    }

    fn build(n: usize, pairs: &[(usize, usize)], perm: &[usize]) -> SocialGraph {
        let mut g = SocialGraph::new();
        let grp = g.add_group("G");
        for i in 0..n {
            g.add_node(&format!("v{i}"), grp).unwrap();
        }
        for &(a, b) in pairs {
            if a != b {
                g.add_edge(NodeId(perm[a] as u32), NodeId(perm[b] as u32))
                    .unwrap();
            }
        }
        g
    }

    proptest! {
        #[test]
        fn centrality_bounds((n, pairs) in arb_group()) {
            let ident: Vec<usize> = (0..n).collect();
            let g = build(n, &pairs, &ident);
            for a in g.nodes() {
                let c = g.degree_centrality(a).unwrap();
                prop_assert!((0.0..=1.0).contains(&c));
                prop_assert_eq!(g.raw_degree(a).unwrap(), scan_degree(&g, a));
                let full = g.nodes().all(|u| u == a || g.has_edge(a, u));
                prop_assert_eq!(c == 1.0, full);
            }
        }

        #[test]
        fn adding_edge_bumps_exactly_two((n, pairs) in arb_group(), x in 0usize..12, y in 0usize..12) {
            let ident: Vec<usize> = (0..n).collect();
            let mut g = build(n, &pairs, &ident);
            let (x, y) = (NodeId((x % n) as u32), NodeId((y % n) as u32));
            prop_assume!(x != y && !g.has_edge(x, y));
            let before: Vec<usize> = g.nodes().map(|a| g.raw_degree(a).unwrap()).collect();
            g.add_edge(x, y).unwrap();
            for a in g.nodes() {
                let expect = before[a.0 as usize] + usize::from(a == x || a == y);
                prop_assert_eq!(g.raw_degree(a).unwrap(), expect);
            }
        }

        #[test]
        fn relabeling_preserves_centrality((n, pairs) in arb_group(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let ident: Vec<usize> = (0..n).collect();
            let mut perm = ident.clone();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let g = build(n, &pairs, &ident);
            let h = build(n, &pairs, &perm);
            for (i, &p) in perm.iter().enumerate() {
                let a = g.degree_centrality(NodeId(i as u32)).unwrap();
                let b = h.degree_centrality(NodeId(p as u32)).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
