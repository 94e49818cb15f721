use std::collections::VecDeque;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Undirected multigraph stored as per-vertex bags of neighbor indices.
///
/// A non-loop edge `{u, v}` appears once in `u`'s bag and once in `v`'s bag.
/// A self-loop at `v` appears exactly once in `v`'s bag, so it contributes
/// `+1` both to the degree and to the diagonal of the adjacency matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiGraph {
    adjacency: Vec<Vec<usize>>,
}

impl MultiGraph {
    pub fn new(vertex_count: usize) -> Self {
        MultiGraph {
            adjacency: vec![Vec::new(); vertex_count],
        }
    }

    pub fn with_capacity(vertex_capacity: usize) -> Self {
        MultiGraph {
            adjacency: Vec::with_capacity(vertex_capacity),
        }
    }

    /// Builds a graph from raw bags, rejecting asymmetric input.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let n = adjacency.len();
        for (v, bag) in adjacency.iter().enumerate() {
            if let Some(&u) = bag.iter().find(|&&u| u >= n) {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} lists neighbor {u} outside 0..{n}"
                )));
            }
        }
        let g = MultiGraph { adjacency };
        if let Some(v) = g.first_asymmetric_vertex() {
            return Err(Error::InvalidInput(format!(
                "adjacency is not symmetric at vertex {v}"
            )));
        }
        Ok(g)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.adjacency.len() - 1
    }

    /// Appends `count` isolated vertices and returns the index of the first.
    pub fn add_vertices(&mut self, count: usize) -> usize {
        let first = self.adjacency.len();
        self.adjacency.resize_with(first + count, Vec::new);
        first
    }

    /// Adds the edge `{u, v}`; `u == v` adds one self-loop.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adjacency[u].push(v);
        if u != v {
            self.adjacency[v].push(u);
        }
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn self_loops(&self, v: usize) -> usize {
        self.adjacency[v].iter().filter(|&&u| u == v).count()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.adjacency[u].iter().filter(|&&w| w == v).count()
    }

    /// Number of edges, self-loops counted once each.
    pub fn edge_count(&self) -> usize {
        let mut entries = 0;
        let mut loops = 0;
        for (v, bag) in self.adjacency.iter().enumerate() {
            entries += bag.len();
            loops += bag.iter().filter(|&&u| u == v).count();
        }
        (entries - loops) / 2 + loops
    }

    /// Every edge once as `(u, v)` with `u <= v`, repeated per multiplicity.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(v, bag)| bag.iter().filter(move |&&u| u >= v).map(move |&u| (v, u)))
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adjacency.iter().all(|bag| bag.len() == d)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetric_vertex().is_none()
    }

    /// First vertex whose bag disagrees with the mirrored multiplicities.
    pub fn first_asymmetric_vertex(&self) -> Option<usize> {
        let sorted: Vec<Vec<usize>> = self
            .adjacency
            .iter()
            .map(|bag| {
                let mut b = bag.clone();
                b.sort_unstable();
                b
            })
            .collect();
        let count = |bag: &[usize], x: usize| {
            let lo = bag.partition_point(|&y| y < x);
            let hi = bag.partition_point(|&y| y <= x);
            hi - lo
        };
        for (v, bag) in sorted.iter().enumerate() {
            let mut i = 0;
            while i < bag.len() {
                let u = bag[i];
                let mut j = i;
                while j < bag.len() && bag[j] == u {
                    j += 1;
                }
                if u != v && count(&sorted[u], v) != j - i {
                    return Some(v);
                }
                i = j;
            }
        }
        None
    }

    /// Copies all edges of `other` into `self`, shifting its indices by `offset`.
    pub fn overlay(&mut self, other: &MultiGraph, offset: usize) {
        assert!(offset + other.vertex_count() <= self.vertex_count());
        for (u, v) in other.edges() {
            self.add_edge(u + offset, v + offset);
        }
    }

    /// Vertices reachable from `start`, in BFS order.
    pub fn component_of(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    order.push(u);
                    queue.push_back(u);
                }
            }
        }
        order
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.component_of(0).len() == self.vertex_count()
    }

    /// Graph distances from `start` (`usize::MAX` when unreachable).
    pub fn distances_from(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Dense adjacency matrix; loops contribute `+1` on the diagonal.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut a = DMatrix::zeros(n, n);
        for (v, bag) in self.adjacency.iter().enumerate() {
            for &u in bag {
                a[(v, u)] += 1.0;
            }
        }
        a
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yv, bag) in y.iter_mut().zip(&self.adjacency) {
            *yv = bag.iter().map(|&u| x[u]).sum();
        }
    }

    /// SHA-256 over the canonical text serialization (seed excluded).
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.vertex_count().to_le_bytes());
        for bag in &self.adjacency {
            h.update(bag.len().to_le_bytes());
            for &u in bag {
                h.update(u.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub(crate) fn bags(&self) -> &[Vec<usize>] {
        &self.adjacency
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_count_once() {
        let mut g = MultiGraph::new(2);
        g.add_edge(0, 0);
        g.add_edge(0, 0);
        g.add_edge(0, 1);
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.self_loops(0), 2);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.to_dense()[(0, 0)], 2.0);
        assert!(g.is_symmetric());
    }

    #[test]
    fn multiedges_are_kept() {
        let mut g = MultiGraph::new(2);
        g.add_edge(0, 1);
        g.add_edge(1, 0);
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.edges().count(), 2);
        assert_eq!(g.to_dense()[(0, 1)], 2.0);
    }

    #[test]
    fn asymmetric_bags_are_rejected() {
        let err = MultiGraph::from_adjacency(vec![vec![1, 1], vec![0]]);
        assert!(err.is_err());
        let err = MultiGraph::from_adjacency(vec![vec![5]]);
        assert!(err.is_err());
        assert!(MultiGraph::from_adjacency(vec![vec![1, 0], vec![0]]).is_ok());
    }

    #[test]
    fn digest_tracks_order() {
        let mut a = MultiGraph::new(3);
        a.add_edge(0, 1);
        a.add_edge(0, 2);
        let mut b = MultiGraph::new(3);
        b.add_edge(0, 2);
        b.add_edge(0, 1);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), a.clone().digest());
    }
}
