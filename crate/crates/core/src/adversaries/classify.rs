use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InstanceLayout;
use crate::oracle::QueryTranscript;

/// Ground-truth events of a transcript.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventSet {
    /// A leaf of a top-level decoration tree was discovered.
    pub leaf_found: bool,
    /// Discovered edges inside the matched region contain a cycle.
    pub tunnel_cycle_found: bool,
    /// Discovered edges connect the first and the last matched cluster.
    pub tunnel_traversed: bool,
}

impl EventSet {
    pub fn is_empty(&self) -> bool {
        !(self.leaf_found || self.tunnel_cycle_found || self.tunnel_traversed)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Classifies a transcript against the instance layout. The matched region
/// is the set of clusters at terminal distance at least `k`; for a layout
/// without funnels it is the whole path.
pub fn classify(t: &QueryTranscript, layout: &InstanceLayout) -> Result<EventSet> {
    if t.vertex_count() != layout.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "transcript is over {} vertices, layout over {}",
            t.vertex_count(),
            layout.vertex_count()
        )));
    }
    let mut events = EventSet::default();
    if t.is_empty() {
        return Ok(events);
    }
    events.leaf_found = t
        .discovered_vertices()
        .iter()
        .any(|&v| layout.is_top_level_leaf(v));

    let ell = layout.ell();
    if ell == 0 {
        return Ok(events);
    }
    let k = layout.funnel_depth();
    let matched = |v: usize| {
        layout
            .cluster_of(v)
            .is_some_and(|c| layout.terminal_distance(c) >= k)
    };
    let edges = t.discovered_edges();
    let n = layout.vertex_count();
    let mut tunnel = DisjointSets::new(n);
    let mut all = DisjointSets::new(n);
    for &(a, b, mult) in &edges {
        all.union(a, b);
        let terminal_loop =
            a == b && layout.cluster_of(a).is_some_and(|c| layout.terminal_distance(c) == 0);
        if !terminal_loop && matched(a) && matched(b) && (a == b || mult >= 2 || !tunnel.union(a, b)) {
            events.tunnel_cycle_found = true;
        }
    }
    let (first, last) = (k.min(ell - 1), (ell - 1).saturating_sub(k));
    let discovered = t.discovered_vertices();
    let first_roots: HashSet<usize> = discovered
        .iter()
        .filter(|&&v| layout.cluster_of(v) == Some(first))
        .map(|&v| all.find(v))
        .collect();
    events.tunnel_traversed = discovered
        .iter()
        .filter(|&&v| layout.cluster_of(v) == Some(last))
        .any(|&v| first_roots.contains(&all.find(v)));
    Ok(events)
}

/// Largest cluster index among discovered vertices.
pub fn deepest_cluster(t: &QueryTranscript, layout: &InstanceLayout) -> Option<usize> {
    t.discovered_vertices()
        .into_iter()
        .filter_map(|v| layout.cluster_of(v))
        .max()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::{bare_path_instance, MultiGraph};
    use crate::oracle::LabeledOracle;

    #[test]
    fn empty_transcript() {
        let inst = bare_path_instance(3, 1).unwrap();
        let o = LabeledOracle::new(Arc::new(inst.graph), 0, 16, 1).unwrap();
        assert!(classify(o.transcript(), &inst.layout).unwrap().is_empty());
    }

    #[test]
    fn mismatch_rejected() {
        let inst = bare_path_instance(3, 1).unwrap();
        let o = LabeledOracle::new(Arc::new(inst.graph), 0, 16, 1).unwrap();
        let other = bare_path_instance(5, 1).unwrap();
        assert!(matches!(classify(o.transcript(), &other.layout), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn double_edge_is_a_cycle() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(1, 2);
        let layout = InstanceLayout::path(3);
        let mut o = LabeledOracle::new(Arc::new(g), 0, 16, 5).unwrap();
        let v = o.label_of(1);
        for k in 1..=3 {
            o.query(v, k).unwrap();
        }
        let ev = classify(o.transcript(), &layout).unwrap();
        assert!(ev.tunnel_cycle_found);
        assert!(ev.tunnel_traversed);
        assert!(!ev.leaf_found);
    }
}
