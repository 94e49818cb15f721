//! Query-metered adjacency-list oracle over randomly relabeled vertices.
//!
//! Labels come from a keyed Feistel permutation of the `label_bits`-bit
//! space (cycle-walking when the width is odd), so relabeling costs no
//! memory and out-of-graph labels are recognized by inverting the
//! permutation. Each vertex's neighbor list is shuffled lazily on first use
//! with a generator derived from the oracle seed and the vertex index.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::rng::{derive_seed, stream_rng, streams};

pub type Label = u64;

const FEISTEL_ROUNDS: u64 = 6;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Balanced Feistel permutation on `2 * half` bits.
#[derive(Debug, Clone, Copy)]
struct Feistel {
    keys: [u64; FEISTEL_ROUNDS as usize],
    half: u32,
    bits: u32,
}

impl Feistel {
    fn new(seed: u64, bits: u32) -> Self {
        let half = bits.div_ceil(2);
        let mut keys = [0; FEISTEL_ROUNDS as usize];
        for (r, k) in keys.iter_mut().enumerate() {
            *k = derive_seed(seed, streams::LABELS, r as u64);
        }
        Feistel { keys, half, bits }
    }

    fn mask(&self) -> u64 {
        (1u64 << self.half) - 1
    }

    fn round(&self, r: usize, x: u64) -> u64 {
        mix(x ^ self.keys[r]) & self.mask()
    }

    fn forward_once(&self, x: u64) -> u64 {
        let mask = self.mask();
        let (mut l, mut r) = (x >> self.half, x & mask);
        for i in 0..FEISTEL_ROUNDS as usize {
            let nl = r;
            r = l ^ self.round(i, r);
            l = nl;
        }
        (l << self.half) | r
    }

    fn backward_once(&self, y: u64) -> u64 {
        let mask = self.mask();
        let (mut l, mut r) = (y >> self.half, y & mask);
        for i in (0..FEISTEL_ROUNDS as usize).rev() {
            let nr = l;
            l = r ^ self.round(i, l);
            r = nr;
        }
        (l << self.half) | r
    }

    fn in_domain(&self, x: u64) -> bool {
        self.bits == 64 || x >> self.bits == 0
    }

    /// Permutation of `[0, 2^bits)` by cycle walking.
    fn forward(&self, x: u64) -> u64 {
        let mut y = self.forward_once(x);
        while !self.in_domain(y) {
            y = self.forward_once(y);
        }
        y
    }

    fn backward(&self, y: u64) -> u64 {
        let mut x = self.backward_once(y);
        while !self.in_domain(x) {
            x = self.backward_once(x);
        }
        x
    }
}

/// Default label width: at least `4n` labels and 20 spare bits.
pub fn default_label_bits(vertex_count: usize) -> u32 {
    let need = (4 * vertex_count.max(1)) as u64;
    (64 - (need - 1).leading_zeros()).saturating_add(20).min(62)
}

/// One oracle call. The internal indices are ground truth for analysis and
/// are never serialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub t: u64,
    pub v: Label,
    pub k: usize,
    pub resp: Option<Label>,
    #[serde(skip)]
    pub(crate) v_index: Option<usize>,
    #[serde(skip)]
    pub(crate) resp_index: Option<usize>,
}

impl QueryRecord {
    pub fn vertex_index(&self) -> Option<usize> {
        self.v_index
    }
    pub fn response_index(&self) -> Option<usize> {
        self.resp_index
    }
}

/// Ordered log of queries made through one oracle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryTranscript {
    pub records: Vec<QueryRecord>,
    pub(crate) entrance: usize,
    pub(crate) vertex_count: usize,
}

impl QueryTranscript {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn entrance(&self) -> usize {
        self.entrance
    }

    /// The ENTRANCE plus every vertex returned by some query.
    pub fn discovered_vertices(&self) -> Vec<usize> {
        let mut seen = vec![self.entrance];
        seen.extend(self.records.iter().filter_map(|r| r.resp_index));
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// Discovered edges `(a, b, multiplicity)` with `a <= b`. Distinct slots
    /// `(v, k)` pointing to the same neighbor count as distinct parallel
    /// edges; the multiplicity is the larger count seen from either side.
    pub fn discovered_edges(&self) -> Vec<(usize, usize, usize)> {
        let mut slots: HashMap<(usize, usize), usize> = HashMap::new();
        let mut by_side: HashMap<(usize, usize), usize> = HashMap::new();
        for r in &self.records {
            if let (Some(v), Some(u)) = (r.v_index, r.resp_index) {
                if slots.insert((v, r.k), u).is_none() {
                    *by_side.entry((v, u)).or_default() += 1;
                }
            }
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (&(v, u), &c) in &by_side {
            let key = (v.min(u), v.max(u));
            let e = edges.entry(key).or_default();
            *e = (*e).max(c);
        }
        let mut out: Vec<_> = edges.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        out.sort_unstable();
        out
    }

    /// JSON lines, one `{t, v, k, resp}` object per query.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// The adjacency-list oracle `O(v, k)`.
#[derive(Debug, Clone)]
pub struct LabeledOracle {
    graph: Arc<MultiGraph>,
    entrance: usize,
    label_bits: u32,
    seed: u64,
    prp: Feistel,
    degree_bound: usize,
    counter: u64,
    shuffles: HashMap<usize, Box<[u32]>>,
    transcript: QueryTranscript,
    recording: bool,
}

impl LabeledOracle {
    pub fn new(graph: Arc<MultiGraph>, entrance: usize, label_bits: u32, seed: u64) -> Result<Self> {
        let n = graph.vertex_count();
        if n == 0 || entrance >= n {
            return Err(Error::invalid("entrance must be a vertex of a non-empty graph"));
        }
        if !(1..=64).contains(&label_bits) {
            return Err(Error::invalid("label_bits must lie in 1..=64"));
        }
        let space = if label_bits == 64 { u128::MAX } else { 1u128 << label_bits };
        if space < 4 * n as u128 {
            return Err(Error::invalid(format!(
                "label space 2^{label_bits} is smaller than 4 x {n} vertices"
            )));
        }
        let degree_bound = graph.max_degree().max(1);
        Ok(LabeledOracle {
            entrance,
            label_bits,
            seed,
            prp: Feistel::new(seed, label_bits),
            degree_bound,
            counter: 0,
            shuffles: HashMap::new(),
            transcript: QueryTranscript {
                records: Vec::new(),
                entrance,
                vertex_count: n,
            },
            recording: true,
            graph,
        })
    }

    /// Oracle with the seed drawn from `rng`.
    pub fn make<R: Rng + ?Sized>(
        graph: Arc<MultiGraph>,
        entrance: usize,
        label_bits: u32,
        rng: &mut R,
    ) -> Result<Self> {
        Self::new(graph, entrance, label_bits, rng.gen())
    }

    /// Same graph, fresh labeling and shuffles, zeroed counter and transcript.
    pub fn relabeled(&self, seed: u64) -> Self {
        LabeledOracle {
            graph: Arc::clone(&self.graph),
            entrance: self.entrance,
            label_bits: self.label_bits,
            seed,
            prp: Feistel::new(seed, self.label_bits),
            degree_bound: self.degree_bound,
            counter: 0,
            shuffles: HashMap::new(),
            transcript: QueryTranscript {
                records: Vec::new(),
                entrance: self.entrance,
                vertex_count: self.graph.vertex_count(),
            },
            recording: self.recording,
        }
    }

    /// Disables transcript recording (queries are still counted).
    pub fn without_transcript(mut self) -> Self {
        self.recording = false;
        self
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn label_bits(&self) -> u32 {
        self.label_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entrance_label(&self) -> Label {
        self.label_of(self.entrance)
    }

    pub fn queries_used(&self) -> u64 {
        self.counter
    }

    pub fn transcript(&self) -> &QueryTranscript {
        &self.transcript
    }

    pub fn into_transcript(self) -> QueryTranscript {
        self.transcript
    }

    /// Ground truth, for analysis only.
    pub fn label_of(&self, v: usize) -> Label {
        self.prp.forward(v as u64)
    }

    /// Ground truth, for analysis only.
    pub fn index_of(&self, label: Label) -> Option<usize> {
        if !self.prp.in_domain(label) {
            return None;
        }
        let x = self.prp.backward(label);
        (x < self.graph.vertex_count() as u64).then_some(x as usize)
    }

    fn slot(&mut self, v: usize, k: usize) -> Option<usize> {
        let bag = self.graph.neighbors(v);
        if k > bag.len() {
            return None;
        }
        let seed = self.seed;
        let perm = self.shuffles.entry(v).or_insert_with(|| {
            let mut p: Vec<u32> = (0..bag.len() as u32).collect();
            p.shuffle(&mut stream_rng(derive_seed(seed, streams::LABELS, v as u64), v as u64));
            p.into_boxed_slice()
        });
        Some(bag[perm[k - 1] as usize])
    }

    /// The `k`-th (1-based) neighbor of `v`, or `None` (the ⋆ response).
    /// Every call with a valid `k` costs one query.
    pub fn query(&mut self, v: Label, k: usize) -> Result<Option<Label>> {
        if k == 0 || k > self.degree_bound {
            return Err(Error::invalid(format!(
                "neighbor index {k} outside 1..={}",
                self.degree_bound
            )));
        }
        let t = self.counter;
        self.counter += 1;
        let v_index = self.index_of(v);
        let resp_index = v_index.and_then(|i| self.slot(i, k));
        let resp = resp_index.map(|u| self.label_of(u));
        if self.recording {
            self.transcript.records.push(QueryRecord {
                t,
                v,
                k,
                resp,
                v_index,
                resp_index,
            });
        }
        Ok(resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_path;

    #[test]
    fn feistel_is_a_permutation() {
        for bits in [4u32, 5, 9, 12] {
            let f = Feistel::new(99, bits);
            let mut seen = vec![false; 1 << bits];
            for x in 0..(1u64 << bits) {
                let y = f.forward(x);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
                assert_eq!(f.backward(y), x);
            }
        }
    }

    #[test]
    fn single_vertex() {
        let mut o = LabeledOracle::new(Arc::new(MultiGraph::new(1)), 0, 8, 1).unwrap();
        let e = o.entrance_label();
        assert_eq!(o.query(e, 1).unwrap(), None);
        assert_eq!(o.queries_used(), 1);
    }

    #[test]
    fn path_three() {
        let g = Arc::new(build_path(3).unwrap());
        let mut o = LabeledOracle::new(g, 0, 16, 5).unwrap();
        let e = o.entrance_label();
        let u = o.query(e, 1).unwrap().unwrap();
        assert_eq!(o.index_of(u), Some(1));
        assert_eq!(o.query(e, 2).unwrap(), None);
        assert!(o.query(e, 3).is_err());
        assert!(o.query(e, 0).is_err());
        assert_eq!(o.queries_used(), 2);
    }

    #[test]
    fn small_label_space_rejected() {
        let g = Arc::new(build_path(5).unwrap());
        assert!(LabeledOracle::new(g.clone(), 0, 4, 0).is_err());
        assert!(LabeledOracle::new(g, 0, 5, 0).is_ok());
    }

    #[test]
    fn default_bits_cover_four_n() {
        for n in [1usize, 3, 1000, 1 << 20] {
            let b = default_label_bits(n);
            assert!((1u128 << b) >= 4 * n as u128);
        }
    }
}
