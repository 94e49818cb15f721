use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrialOutcome;
use crate::error::Result;
use crate::oracle::{Label, LabeledOracle};

/// Budget-limited view of an oracle shared by the walkers.
struct Session<'a> {
    oracle: &'a mut LabeledOracle,
    budget: u64,
    start: u64,
    entrance: Label,
    found: bool,
}

impl<'a> Session<'a> {
    fn new(oracle: &'a mut LabeledOracle, budget: u64) -> Self {
        let entrance = oracle.entrance_label();
        let start = oracle.queries_used();
        Session {
            oracle,
            budget,
            start,
            entrance,
            found: false,
        }
    }

    fn used(&self) -> u64 {
        self.oracle.queries_used() - self.start
    }

    fn exhausted(&self) -> bool {
        self.used() >= self.budget
    }

    /// One charged query; `Ok(None)` once the budget is spent. A loop
    /// response at a vertex other than the ENTRANCE marks the EXIT.
    fn ask(&mut self, v: Label, k: usize) -> Result<Option<Option<Label>>> {
        if self.exhausted() {
            return Ok(None);
        }
        let r = self.oracle.query(v, k)?;
        if r == Some(v) && v != self.entrance {
            self.found = true;
        }
        Ok(Some(r))
    }

    fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            found_exit: self.found,
            queries: self.used(),
            ..TrialOutcome::default()
        }
    }
}

/// Learns `deg(v)` by probing `k = 1, 2, ...` until ⋆ or the degree bound.
/// Returns `None` if the budget ran out or the EXIT was recognized first.
fn probe_degree(
    s: &mut Session<'_>,
    v: Label,
    cache: &mut HashMap<Label, usize>,
) -> Result<Option<usize>> {
    if let Some(&d) = cache.get(&v) {
        return Ok(Some(d));
    }
    let bound = s.oracle.degree_bound();
    let mut deg = bound;
    for k in 1..=bound {
        match s.ask(v, k)? {
            None => return Ok(None),
            Some(None) => {
                deg = k - 1;
                break;
            }
            Some(Some(_)) if s.found => return Ok(None),
            Some(Some(_)) => {}
        }
    }
    cache.insert(v, deg);
    Ok(Some(deg))
}

/// Simple random walk from the ENTRANCE. Each step queries a uniformly
/// random index of the current vertex and moves to the response; degrees are
/// learned by sequential probing, every probe charged.
pub fn random_walk_trial<R: Rng + ?Sized>(
    oracle: &mut LabeledOracle,
    budget: u64,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let mut s = Session::new(oracle, budget);
    let mut degrees = HashMap::new();
    let mut v = s.entrance;
    while !s.found && !s.exhausted() {
        let Some(deg) = probe_degree(&mut s, v, &mut degrees)? else {
            break;
        };
        if deg == 0 {
            break;
        }
        let k = rng.gen_range(1..=deg);
        match s.ask(v, k)? {
            Some(Some(u)) => v = u,
            _ => break,
        }
    }
    Ok(s.outcome())
}

/// Breadth-first search from the ENTRANCE: every vertex is probed at
/// `k = 1, 2, ...` until ⋆ or the degree bound, one query per probe.
pub fn bfs_trial(oracle: &mut LabeledOracle, budget: u64) -> Result<TrialOutcome> {
    let mut s = Session::new(oracle, budget);
    let bound = s.oracle.degree_bound();
    let mut seen = HashSet::from([s.entrance]);
    let mut queue = VecDeque::from([s.entrance]);
    'outer: while let Some(v) = queue.pop_front() {
        for k in 1..=bound {
            match s.ask(v, k)? {
                None => break 'outer,
                Some(None) => break,
                Some(Some(u)) => {
                    if s.found {
                        break 'outer;
                    }
                    if seen.insert(u) {
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    Ok(s.outcome())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeResult {
    /// A degree-1 vertex was reached (or no non-backtracking move existed).
    LeafHit,
    /// The walk returned to a vertex it had already visited.
    CycleHit,
    Survived,
}

/// Non-backtracking random walk that has just crossed `from -> via` and may
/// make `depth` further moves. Every vertex reached has its neighbor list
/// read through the oracle (charged) before the next move.
pub fn nonbacktracking_probe<R: Rng + ?Sized>(
    oracle: &mut LabeledOracle,
    from: Label,
    via: Label,
    depth: usize,
    rng: &mut R,
) -> Result<ProbeResult> {
    let bound = oracle.degree_bound();
    let mut visited = HashSet::from([from, via]);
    let mut prev = from;
    let mut cur = via;
    let mut moves = 0;
    loop {
        let mut nbrs = Vec::new();
        for k in 1..=bound {
            match oracle.query(cur, k)? {
                Some(u) => nbrs.push(u),
                None => break,
            }
        }
        if nbrs.len() <= 1 {
            return Ok(ProbeResult::LeafHit);
        }
        if moves == depth {
            return Ok(ProbeResult::Survived);
        }
        // drop the one slot that undoes the last move
        if let Some(i) = nbrs.iter().position(|&u| u == prev) {
            nbrs.swap_remove(i);
        }
        let next = nbrs[rng.gen_range(0..nbrs.len())];
        if !visited.insert(next) {
            return Ok(ProbeResult::CycleHit);
        }
        prev = cur;
        cur = next;
        moves += 1;
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::{bare_path_instance, build_complete_tree, TreeSpec};
    use crate::rng::stream_rng;

    fn oracle_for(g: crate::graph::MultiGraph, entrance: usize, seed: u64) -> LabeledOracle {
        LabeledOracle::new(Arc::new(g), entrance, 24, seed).unwrap()
    }

    #[test]
    fn bfs_on_short_path() {
        let inst = bare_path_instance(3, 1).unwrap();
        for seed in 0..20 {
            let mut o = oracle_for(inst.graph.clone(), 0, seed);
            let out = bfs_trial(&mut o, 6).unwrap();
            assert!(out.found_exit, "seed {seed}");
            assert!(out.queries <= 6);
        }
    }

    #[test]
    fn budget_one() {
        let inst = bare_path_instance(5, 1).unwrap();
        let mut o = oracle_for(inst.graph.clone(), 0, 3);
        let out = bfs_trial(&mut o, 1).unwrap();
        assert!(!out.found_exit);
        assert_eq!(out.queries, 1);
        let mut o = oracle_for(inst.graph, 0, 3);
        let out = random_walk_trial(&mut o, 1, &mut stream_rng(1, 1)).unwrap();
        assert!(!out.found_exit);
        assert_eq!(out.queries, 1);
    }

    #[test]
    fn probe_into_tree_hits_leaf() {
        let mut g = build_complete_tree(TreeSpec::new(3, 3)).unwrap();
        let handle = g.add_vertex();
        g.add_edge(handle, 0);
        let mut rng = stream_rng(9, 1);
        for seed in 0..10 {
            let mut o = oracle_for(g.clone(), handle, seed);
            let (a, b) = (o.label_of(handle), o.label_of(0));
            let r = nonbacktracking_probe(&mut o, a, b, 3, &mut rng).unwrap();
            assert_eq!(r, ProbeResult::LeafHit);
        }
    }
}
