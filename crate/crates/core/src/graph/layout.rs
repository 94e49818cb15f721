use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth role of a vertex. Never visible to adversaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Entrance,
    Exit,
    Funnel,
    Tunnel,
    Decoration,
    /// Vertex of a hand-built base graph that is not an obfuscated path.
    Plain,
}

const ROOT: u8 = 1;
const LEAF: u8 = 2;
const TOP_LEVEL_LEAF: u8 = 4;

/// Columnar per-vertex annotations of a built instance.
///
/// Cluster indices are 0-based: cluster 0 holds the ENTRANCE and cluster
/// `ell - 1` the EXIT.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceLayout {
    ell: usize,
    funnel_depth: usize,
    seed: u64,
    entrance: usize,
    exit: Option<usize>,
    top_level: u16,
    cluster_of: Vec<u32>,
    kind: Vec<VertexKind>,
    level: Vec<u16>,
    flags: Vec<u8>,
}

const NO_CLUSTER: u32 = u32::MAX;

/// One vertex of the layout, as stored in the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cluster: Option<usize>,
    pub kind: VertexKind,
    #[serde(skip_serializing_if = "is_zero", default)]
    pub level: u16,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub root: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub leaf: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub top_level_leaf: bool,
}

fn is_zero(x: &u16) -> bool {
    *x == 0
}

impl InstanceLayout {
    /// Layout for the obfuscated path: `clusters[c]` lists the vertices of cluster `c`.
    pub(crate) fn obfuscated(
        ell: usize,
        funnel_depth: usize,
        seed: u64,
        cluster_sizes: &[usize],
    ) -> Self {
        let n: usize = cluster_sizes.iter().sum();
        let mut layout = InstanceLayout {
            ell,
            funnel_depth,
            seed,
            entrance: 0,
            exit: Some(n - 1),
            top_level: 0,
            cluster_of: Vec::with_capacity(n),
            kind: Vec::with_capacity(n),
            level: vec![0; n],
            flags: vec![0; n],
        };
        for (c, &size) in cluster_sizes.iter().enumerate() {
            let dist = c.min(ell - 1 - c);
            let kind = match (c, dist) {
                (0, _) => VertexKind::Entrance,
                (_, 0) => VertexKind::Exit,
                (_, d) if d <= funnel_depth => VertexKind::Funnel,
                _ => VertexKind::Tunnel,
            };
            for _ in 0..size {
                layout.cluster_of.push(c as u32);
                layout.kind.push(kind);
            }
        }
        layout
    }

    /// Layout for an arbitrary base graph: every vertex is `Plain` except the
    /// designated entrance (and optional exit).
    pub fn plain(vertex_count: usize, entrance: usize, exit: Option<usize>) -> Self {
        let mut kind = vec![VertexKind::Plain; vertex_count];
        kind[entrance] = VertexKind::Entrance;
        if let Some(x) = exit {
            kind[x] = VertexKind::Exit;
        }
        InstanceLayout {
            ell: 0,
            funnel_depth: 0,
            seed: 0,
            entrance,
            exit,
            top_level: 0,
            cluster_of: vec![NO_CLUSTER; vertex_count],
            kind,
            level: vec![0; vertex_count],
            flags: vec![0; vertex_count],
        }
    }

    /// Consecutive vertex ranges of the given sizes as clusters `0..len`,
    /// without funnels.
    pub fn from_cluster_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::invalid("cluster sizes must be non-empty and positive"));
        }
        Ok(Self::obfuscated(sizes.len(), 0, 0, sizes))
    }

    /// Layout of a bare path whose vertex `j` forms cluster `j`.
    pub fn path(ell: usize) -> Self {
        let sizes = vec![1; ell];
        let mut layout = Self::obfuscated(ell, 0, 0, &sizes);
        if ell == 1 {
            layout.exit = None;
        }
        layout
    }

    pub(crate) fn push_decoration(&mut self, level: u16, root: bool, leaf: bool, top: bool) {
        self.cluster_of.push(NO_CLUSTER);
        self.kind.push(VertexKind::Decoration);
        self.level.push(level);
        let mut f = 0;
        if root {
            f |= ROOT;
        }
        if leaf {
            f |= LEAF;
        }
        if top {
            f |= TOP_LEVEL_LEAF;
        }
        self.flags.push(f);
    }

    pub(crate) fn set_top_level(&mut self, level: u16) {
        self.top_level = level;
    }

    pub fn vertex_count(&self) -> usize {
        self.kind.len()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn funnel_depth(&self) -> usize {
        self.funnel_depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entrance(&self) -> usize {
        self.entrance
    }

    pub fn exit(&self) -> Option<usize> {
        self.exit
    }

    /// Level of the first (deepest) decoration round; 0 when undecorated.
    pub fn top_level(&self) -> u16 {
        self.top_level
    }

    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        match self.cluster_of[v] {
            NO_CLUSTER => None,
            c => Some(c as usize),
        }
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kind[v]
    }

    pub fn decoration_level(&self, v: usize) -> u16 {
        self.level[v]
    }

    pub fn is_tree_root(&self, v: usize) -> bool {
        self.flags[v] & ROOT != 0
    }

    pub fn is_tree_leaf(&self, v: usize) -> bool {
        self.flags[v] & LEAF != 0
    }

    pub fn is_top_level_leaf(&self, v: usize) -> bool {
        self.flags[v] & TOP_LEVEL_LEAF != 0
    }

    pub fn is_original(&self, v: usize) -> bool {
        self.kind[v] != VertexKind::Decoration
    }

    /// Distance of cluster `c` to the nearest terminal cluster.
    pub fn terminal_distance(&self, c: usize) -> usize {
        c.min(self.ell - 1 - c)
    }

    /// Number of original (non-decoration) vertices.
    pub fn original_count(&self) -> usize {
        self.kind.iter().filter(|&&k| k != VertexKind::Decoration).count()
    }

    /// Vertices of each cluster, in index order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.ell];
        for (v, &c) in self.cluster_of.iter().enumerate() {
            if c != NO_CLUSTER {
                out[c as usize].push(v);
            }
        }
        out
    }

    pub fn record(&self, v: usize) -> VertexRecord {
        VertexRecord {
            cluster: self.cluster_of(v),
            kind: self.kind[v],
            level: self.level[v],
            root: self.is_tree_root(v),
            leaf: self.is_tree_leaf(v),
            top_level_leaf: self.is_top_level_leaf(v),
        }
    }

    pub(crate) fn to_document(&self) -> LayoutDocument {
        LayoutDocument {
            format: "TWG1-layout".to_string(),
            ell: self.ell,
            funnel_depth: self.funnel_depth,
            seed: self.seed,
            entrance: self.entrance,
            exit: self.exit,
            top_level: self.top_level,
            vertices: (0..self.vertex_count()).map(|v| (v, self.record(v))).collect(),
        }
    }

    pub(crate) fn from_document(doc: LayoutDocument) -> Result<Self> {
        let n = doc.vertices.len();
        let mut layout = InstanceLayout {
            ell: doc.ell,
            funnel_depth: doc.funnel_depth,
            seed: doc.seed,
            entrance: doc.entrance,
            exit: doc.exit,
            top_level: doc.top_level,
            cluster_of: Vec::with_capacity(n),
            kind: Vec::with_capacity(n),
            level: Vec::with_capacity(n),
            flags: Vec::with_capacity(n),
        };
        for (expected, (v, rec)) in doc.vertices.into_iter().enumerate() {
            if v != expected {
                return Err(Error::InvalidInput(format!(
                    "layout sidecar is missing vertex {expected}"
                )));
            }
            layout
                .cluster_of
                .push(rec.cluster.map_or(NO_CLUSTER, |c| c as u32));
            layout.kind.push(rec.kind);
            layout.level.push(rec.level);
            let mut f = 0;
            if rec.root {
                f |= ROOT;
            }
            if rec.leaf {
                f |= LEAF;
            }
            if rec.top_level_leaf {
                f |= TOP_LEVEL_LEAF;
            }
            layout.flags.push(f);
        }
        if layout.entrance >= n || layout.exit.is_some_and(|x| x >= n) {
            return Err(Error::InvalidInput("terminal index out of range".into()));
        }
        Ok(layout)
    }
}

/// JSON sidecar keyed by vertex index.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct LayoutDocument {
    format: String,
    ell: usize,
    funnel_depth: usize,
    seed: u64,
    entrance: usize,
    exit: Option<usize>,
    top_level: u16,
    vertices: std::collections::BTreeMap<usize, VertexRecord>,
}
