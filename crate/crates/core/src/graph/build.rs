use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layout::{InstanceLayout, VertexKind};
use super::multigraph::MultiGraph;
use super::params::{BuildParams, DecorationSchedule, TreeSpec};
use crate::error::{Error, Result};
use crate::expanders;
use crate::rng::{stream_rng, streams};

/// A built graph together with its ground-truth annotations.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: MultiGraph,
    pub layout: InstanceLayout,
}

/// Path on `ell` vertices `0 - 1 - ... - (ell-1)`.
pub fn build_path(ell: usize) -> Result<MultiGraph> {
    if ell == 0 {
        return Err(Error::invalid("path length must be at least 1"));
    }
    let mut g = MultiGraph::new(ell);
    for j in 1..ell {
        g.add_edge(j - 1, j);
    }
    Ok(g)
}

/// Path with `loops` self-loops on both endpoints, annotated as a
/// one-vertex-per-cluster instance. The ENTRANCE is vertex 0.
pub fn bare_path_instance(ell: usize, loops: usize) -> Result<Instance> {
    if ell < 2 {
        return Err(Error::invalid("a bare path instance needs ell >= 2"));
    }
    let mut graph = build_path(ell)?;
    for _ in 0..loops {
        graph.add_edge(0, 0);
        graph.add_edge(ell - 1, ell - 1);
    }
    Ok(Instance {
        graph,
        layout: InstanceLayout::path(ell),
    })
}

/// Complete tree in BFS order; the root is vertex 0.
pub fn build_complete_tree(spec: TreeSpec) -> Result<MultiGraph> {
    let n = spec
        .vertex_count()
        .filter(|&n| n <= usize::MAX as u128)
        .ok_or_else(|| Error::invalid("tree too large"))? as usize;
    let mut g = MultiGraph::new(n);
    // BFS order: children of vertex i are b*i + 1 ..= b*i + b.
    for child in 1..n {
        g.add_edge((child - 1) / spec.arity, child);
    }
    Ok(g)
}

/// Replaces the path by clusters joined through funnel trees and random
/// matchings, adds terminal self-loops and a conditioned `2m`-regular expander
/// on every interior cluster.
pub fn obfuscate<R: Rng>(params: &BuildParams, rng: &mut R) -> Result<Instance> {
    params.validate()?;
    let forecast = forecast_counts_for(params, &DecorationSchedule::empty());
    check_cap(&forecast, params.vertex_cap)?;

    let ell = params.ell;
    let m = params.m;
    let sizes: Vec<usize> = (0..ell)
        .map(|c| params.cluster_size(c).unwrap() as usize)
        .collect();
    let mut starts = Vec::with_capacity(ell);
    let mut acc = 0;
    for &s in &sizes {
        starts.push(acc);
        acc += s;
    }
    let n = acc;
    let mut graph = MultiGraph::new(n);
    let dist = |c: usize| c.min(ell - 1 - c);

    for c in 0..ell - 1 {
        let (a, b) = (starts[c], starts[c + 1]);
        let (sa, sb) = (sizes[c], sizes[c + 1]);
        if dist(c) >= params.k && dist(c + 1) >= params.k {
            debug_assert_eq!(sa, sb);
            let mut perm: Vec<usize> = (0..sb).collect();
            for _ in 0..m {
                perm.shuffle(rng);
                for (i, &j) in perm.iter().enumerate() {
                    graph.add_edge(a + i, b + j);
                }
            }
        } else if sb == sa * m * m {
            for child in 0..sb {
                graph.add_edge(a + child / (m * m), b + child);
            }
        } else if sa == sb * m * m {
            for child in 0..sa {
                graph.add_edge(a + child, b + child / (m * m));
            }
        } else {
            unreachable!("cluster sizes {sa} and {sb} are not funnel-compatible");
        }
    }

    let exit = n - 1;
    for _ in 0..2 * m {
        graph.add_edge(0, 0);
        graph.add_edge(exit, exit);
    }

    let threshold = params.threshold();
    for c in 1..ell - 1 {
        let sample = expanders::sample_conditioned(
            sizes[c],
            m,
            threshold,
            params.expander_max_attempts,
            rng,
        )
        .map_err(|e| match e {
            Error::ConditioningFailed { .. } => {
                Error::ConstructionFailed(format!("expander on cluster {c}: {e}"))
            }
            other => other,
        })?;
        graph.overlay(&sample.graph, starts[c]);
    }

    let layout = InstanceLayout::obfuscated(ell, params.k, params.seed, &sizes);
    Ok(Instance { graph, layout })
}

/// Applies level-r, ..., level-1 decoration rounds. Every round hangs
/// `trees` fresh copies of its tree from every vertex present before the
/// round, each through one edge to the tree root.
pub fn decorate(instance: &Instance, schedule: &DecorationSchedule, vertex_cap: u64) -> Result<Instance> {
    schedule.validate()?;
    let forecast = forecast_decoration(
        instance.graph.vertex_count() as u128,
        instance.graph.edge_count() as u128,
        instance.graph.max_degree() as u128,
        schedule,
    );
    if forecast.saturated || forecast.vertices > vertex_cap as u128 {
        return Err(Error::InstanceTooLarge {
            forecast: forecast.vertices,
            cap: vertex_cap,
        });
    }

    let mut graph = MultiGraph::with_capacity(forecast.vertices as usize);
    graph.add_vertices(instance.graph.vertex_count());
    for (u, v) in instance.graph.edges() {
        graph.add_edge(u, v);
    }
    let mut layout = instance.layout.clone();
    let top = schedule.rounds() as u16;
    layout.set_top_level(top.max(instance.layout.top_level()));

    for lvl in schedule.application_order() {
        let tree = lvl.tree;
        let tree_size = tree.vertex_count().unwrap() as usize;
        let bottom_start = tree_size - tree.level_size(tree.depth).unwrap() as usize;
        let level = lvl.level as u16;
        let is_top = level == top;
        let before = graph.vertex_count();
        for v in 0..before {
            for _ in 0..lvl.trees {
                let root = graph.add_vertices(tree_size);
                graph.add_edge(v, root);
                for child in 1..tree_size {
                    graph.add_edge(root + (child - 1) / tree.arity, root + child);
                }
                for i in 0..tree_size {
                    let leaf = i >= bottom_start;
                    layout.push_decoration(level, i == 0, leaf, leaf && is_top);
                }
            }
        }
    }
    debug_assert_eq!(graph.vertex_count() as u128, forecast.vertices);
    Ok(Instance { graph, layout })
}

/// Builds the full instance for `params`, deterministic in `params.seed`.
pub fn build_instance(params: &BuildParams) -> Result<Instance> {
    let schedule = params.schedule()?;
    let forecast = forecast_counts_for(params, &schedule);
    check_cap(&forecast, params.vertex_cap)?;
    let mut rng = stream_rng(params.seed, streams::EXPANDERS);
    let base = obfuscate(params, &mut rng)?;
    if schedule.is_empty() {
        Ok(base)
    } else {
        decorate(&base, &schedule, params.vertex_cap)
    }
}

fn check_cap(forecast: &ForecastCounts, cap: u64) -> Result<()> {
    if forecast.saturated || forecast.vertices > cap as u128 {
        Err(Error::InstanceTooLarge {
            forecast: forecast.vertices,
            cap,
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub entrance: u128,
    pub exit: u128,
    pub funnel: u128,
    pub tunnel: u128,
    pub decoration: u128,
    pub plain: u128,
}

impl KindCounts {
    pub fn of_layout(layout: &InstanceLayout) -> Self {
        let mut k = KindCounts::default();
        for v in 0..layout.vertex_count() {
            *match layout.kind(v) {
                VertexKind::Entrance => &mut k.entrance,
                VertexKind::Exit => &mut k.exit,
                VertexKind::Funnel => &mut k.funnel,
                VertexKind::Tunnel => &mut k.tunnel,
                VertexKind::Decoration => &mut k.decoration,
                VertexKind::Plain => &mut k.plain,
            } += 1;
        }
        k
    }
}

/// Closed-form size forecast. Values saturate at `u128::MAX` on overflow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForecastCounts {
    pub vertices: u128,
    pub edges: u128,
    pub max_degree: u128,
    pub per_kind: KindCounts,
    /// Vertex count after each applied round (level r first).
    pub after_round: Vec<u128>,
    pub saturated: bool,
}

struct Sat {
    saturated: bool,
}

impl Sat {
    fn add(&mut self, a: u128, b: u128) -> u128 {
        a.checked_add(b).unwrap_or_else(|| {
            self.saturated = true;
            u128::MAX
        })
    }
    fn mul(&mut self, a: u128, b: u128) -> u128 {
        a.checked_mul(b).unwrap_or_else(|| {
            self.saturated = true;
            u128::MAX
        })
    }
}

/// Exact counts for `decorate(obfuscate(params))` without building anything.
pub fn forecast_counts(params: &BuildParams) -> Result<ForecastCounts> {
    params.validate()?;
    let schedule = params.schedule()?;
    Ok(forecast_counts_for(params, &schedule))
}

fn forecast_counts_for(params: &BuildParams, schedule: &DecorationSchedule) -> ForecastCounts {
    let mut sat = Sat { saturated: false };
    let ell = params.ell;
    let m = params.m as u128;
    let k = params.k;
    let dist = |c: usize| c.min(ell - 1 - c);
    let size = |c: usize| params.cluster_size(c);

    let mut per_kind = KindCounts {
        entrance: 1,
        exit: 1,
        ..KindCounts::default()
    };
    let mut vertices: u128 = 0;
    let mut edges: u128 = sat.mul(4, m); // 2m loops at each terminal
    let mut max_degree: u128 = 0;
    for c in 0..ell {
        let s = size(c).unwrap_or_else(|| {
            sat.saturated = true;
            u128::MAX
        });
        vertices = sat.add(vertices, s);
        let d = dist(c);
        if d > k {
            per_kind.tunnel = sat.add(per_kind.tunnel, s);
        } else if d > 0 {
            per_kind.funnel = sat.add(per_kind.funnel, s);
        }
        // 2m loops on a terminal, a 2m-regular expander elsewhere
        let mut deg: u128 = 2 * m;
        if d > 0 {
            let e = sat.mul(s, m);
            edges = sat.add(edges, e);
        }
        for nb in [c.checked_sub(1), (c + 1 < ell).then_some(c + 1)].into_iter().flatten() {
            deg += if d >= k && dist(nb) >= k {
                m
            } else if dist(nb) > d {
                m * m
            } else {
                1
            };
        }
        max_degree = max_degree.max(deg);
        if c + 1 < ell {
            let t = size(c + 1).unwrap_or(u128::MAX);
            let e = if d >= k && dist(c + 1) >= k {
                sat.mul(m, s)
            } else {
                s.max(t)
            };
            edges = sat.add(edges, e);
        }
    }
    let mut fc = forecast_decoration_from(vertices, edges, max_degree, schedule, &mut sat);
    fc.per_kind.entrance = per_kind.entrance;
    fc.per_kind.exit = per_kind.exit;
    fc.per_kind.funnel = per_kind.funnel;
    fc.per_kind.tunnel = per_kind.tunnel;
    fc.saturated |= sat.saturated;
    fc
}

/// Forecast of decorating an arbitrary base graph with the given schedule.
pub fn forecast_decoration(
    base_vertices: u128,
    base_edges: u128,
    base_max_degree: u128,
    schedule: &DecorationSchedule,
) -> ForecastCounts {
    let mut sat = Sat { saturated: false };
    let mut fc = forecast_decoration_from(base_vertices, base_edges, base_max_degree, schedule, &mut sat);
    fc.per_kind.plain = base_vertices;
    fc.saturated |= sat.saturated;
    fc
}

fn forecast_decoration_from(
    base_vertices: u128,
    base_edges: u128,
    base_max_degree: u128,
    schedule: &DecorationSchedule,
    sat: &mut Sat,
) -> ForecastCounts {
    let mut n = base_vertices;
    let mut edges = base_edges;
    let mut after_round = Vec::with_capacity(schedule.rounds());
    let mut tree_degree_max: u128 = 0;
    for lvl in schedule.application_order() {
        let t = lvl.tree.vertex_count().unwrap_or_else(|| {
            sat.saturated = true;
            u128::MAX
        });
        let h = lvl.trees as u128;
        let per_vertex = sat.mul(h, t);
        let added = sat.mul(n, per_vertex);
        edges = sat.add(edges, added);
        n = sat.add(n, added);
        after_round.push(n);
        if lvl.trees > 0 {
            // rounds applied after this one: levels below it
            let later: u128 = schedule
                .levels
                .iter()
                .filter(|l| l.level < lvl.level)
                .map(|l| l.trees as u128)
                .sum();
            let b = lvl.tree.arity as u128;
            let own = if lvl.tree.depth == 0 { 1 } else { b + 1 };
            tree_degree_max = tree_degree_max.max(own + later);
        }
    }
    let total_trees: u128 = schedule.levels.iter().map(|l| l.trees as u128).sum();
    ForecastCounts {
        vertices: n,
        edges,
        max_degree: (base_max_degree + total_trees).max(tree_degree_max),
        per_kind: KindCounts {
            decoration: n - base_vertices.min(n),
            ..KindCounts::default()
        },
        after_round,
        saturated: sat.saturated,
    }
}
