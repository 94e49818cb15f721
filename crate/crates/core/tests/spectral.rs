use std::f64::consts::PI;

use nalgebra::DMatrix;
use tunnelbench::graph::*;
use tunnelbench::linalg::{dense_eigen, dense_eigenvalues, to_dense};
use tunnelbench::spectral::*;
use tunnelbench::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn cycle(n: usize) -> MultiGraph {
    let mut g = MultiGraph::new(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n);
    }
    g
}

fn plain(g: MultiGraph) -> Instance {
    let n = g.vertex_count();
    Instance {
        graph: g,
        layout: InstanceLayout::plain(n, 0, None),
    }
}

#[test]
fn f_ell_examples() {
    for p in [0.1, 0.7, 2.0, 3.0] {
        assert!(close(f_ell(p, 1).value().unwrap(), 2.0 * f64::cos(p), 1e-14));
    }
    assert!(close(f_ell(1e-9, 5).value().unwrap(), 1.2, 1e-9));
    assert!(close(f_ell(0.0, 5).value().unwrap(), 1.2, 1e-15));
    assert!(f_ell(PI / 2.0, 5).value().unwrap().abs() < 1e-14);
    assert!(matches!(f_ell(PI / 5.0, 5), FEll::Pole { .. }));
}

#[test]
fn f_ell_decreases_between_poles() {
    for ell in [2usize, 3, 5, 8, 13] {
        for j in 1..=ell {
            let lo = (j - 1) as f64 * PI / ell as f64;
            let w = PI / ell as f64;
            let samples: Vec<f64> = (1..=1000)
                .map(|i| f_ell(lo + w * i as f64 / 1001.0, ell).value().unwrap())
                .collect();
            assert!(samples.windows(2).all(|s| s[1] < s[0]), "ell={ell} interval {j}");
        }
    }
}

#[test]
fn closed_form_roots() {
    let ell = 5;
    let sol = solve_quasimomenta(ell, 0.0).unwrap();
    for (j, p) in sol.trig_roots.iter().enumerate() {
        assert!(close(*p, (j + 1) as f64 * PI / 6.0, 1e-11));
    }
    let sol = solve_quasimomenta(ell, 1.0).unwrap();
    for (j, p) in sol.trig_roots.iter().enumerate() {
        assert!(close(*p, (2 * j + 1) as f64 * PI / 11.0, 1e-11));
    }
    let sol = solve_quasimomenta(ell, -1.0).unwrap();
    for (j, p) in sol.trig_roots.iter().enumerate() {
        assert!(close(*p, 2.0 * (j + 1) as f64 * PI / 11.0, 1e-11));
    }
    assert!(solve_quasimomenta(1, 0.0).is_err());
}

#[test]
fn quasimomenta_match_dense() {
    for ell in [2usize, 3, 7, 20, 64] {
        for alpha in [-3.0, -1.0, 0.0, 0.5, 1.0, (ell + 1) as f64 / ell as f64, 2.5, 6.0] {
            let sol = solve_quasimomenta(ell, alpha).unwrap();
            assert_eq!(sol.eigenvalues.len(), ell);
            assert!(sol.max_residual() <= 1e-9, "ell={ell} alpha={alpha}");
            let dense = dense_eigenvalues(path_operator(ell, alpha).to_dense());
            for (a, b) in sol.eigenvalues.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn root_count_and_edge_case() {
    let ell = 6;
    let edge = 7.0 / 6.0;
    let below = solve_quasimomenta(ell, edge - 1e-3).unwrap();
    assert_eq!((below.trig_roots.len(), below.hyper.is_some()), (6, false));
    let above = solve_quasimomenta(ell, edge + 1e-3).unwrap();
    assert_eq!((above.trig_roots.len(), above.hyper.is_some()), (5, true));
    let at = solve_quasimomenta(ell, edge).unwrap();
    let (top, v) = at.top();
    assert!((top - 2.0).abs() < 1e-12);
    for (j, x) in v.iter().enumerate() {
        assert!(close(x / v[0], (j + 1) as f64, 1e-10));
    }
}

#[test]
fn roots_interlace() {
    for ell in 2..=30 {
        for i in 0..=20 {
            let alpha = -1.0 + i as f64 / 10.0;
            let sol = solve_quasimomenta(ell, alpha).unwrap();
            let w = PI / (2 * ell + 1) as f64;
            for (j, &p) in sol.trig_roots.iter().enumerate() {
                let j = (j + 1) as f64;
                assert!(p >= (2.0 * j - 1.0) * w - 1e-12 && p <= 2.0 * j * w + 1e-12);
                assert!(p > (j - 1.0) * PI / ell as f64 && p < j * PI / ell as f64);
            }
        }
    }
}

#[test]
fn gap_examples() {
    assert_eq!(path_gap(2, 0.0).map(|(l, g)| (close(l, 1.0, 1e-12), close(g, 2.0, 1e-12))).unwrap(), (true, true));
    for ell in [3usize, 10, 50] {
        let (_, gap) = path_gap(ell, 0.0).unwrap();
        let bound = (PI / (2 * ell + 1) as f64).powi(2) / (PI * PI);
        assert!(gap >= bound);
    }
    let sol = solve_quasimomenta(5, 3.0).unwrap();
    assert!(sol.eigenvalues[0] >= 3.0);
    assert!(sol.eigenvalues[1] <= 2.0 - 1.0 / 25.0);
}

#[test]
fn overlap_law() {
    for ell in 2..=200usize {
        let sol = solve_quasimomenta(ell, 0.0).unwrap();
        let min = sol.top().1.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.5 * (ell as f64).powf(-1.5), "ell={ell}");
    }
}

#[test]
fn collapse_two_clusters() {
    let mut g = MultiGraph::new(6);
    for (a, b) in [(0, 2), (0, 3), (1, 4), (1, 5)] {
        g.add_edge(a, b);
    }
    let layout = InstanceLayout::from_cluster_sizes(&[2, 4]).unwrap();
    let path = collapse_clusters(&g, &layout).unwrap();
    assert!(close(path.hop_weights[0], 2f64.sqrt(), 1e-15));
    assert_eq!(path.diagonal_weights, vec![0.0, 0.0]);
    assert!(InstanceLayout::from_cluster_sizes(&[2, 0]).is_err());
}

#[test]
fn collapse_of_obfuscated_instance() {
    for (m, k) in [(2usize, 1usize), (3, 2)] {
        let ell = 2 * k + 3;
        let inst = build_instance(&BuildParams::new(m, k, ell, 6).unconditioned().undecorated()).unwrap();
        let path = collapse_clusters(&inst.graph, &inst.layout).unwrap();
        let want = CollapsedPath::obfuscated(ell, m);
        for (a, b) in path.hop_weights.iter().zip(&want.hop_weights) {
            assert!(close(*a, *b, 1e-12));
        }
        assert_eq!(path.diagonal_weights, want.diagonal_weights);
    }
}

#[test]
fn collapse_detects_long_edges() {
    let mut inst = build_instance(&BuildParams::new(2, 1, 5, 1).unconditioned().undecorated()).unwrap();
    let (a, b) = (inst.layout.entrance(), inst.layout.clusters()[2][0]);
    inst.graph.add_edge(a, b);
    assert!(matches!(
        collapse_clusters(&inst.graph, &inst.layout),
        Err(Error::ConstructionViolation(_))
    ));
}

#[test]
fn top_eigenpair_examples() {
    let p = top_eigenpair(&build_path(5).unwrap(), None, 1e-10).unwrap();
    assert!(close(p.value, 3f64.sqrt(), 1e-12));
    let c = top_eigenpair(&cycle(4), None, 1e-10).unwrap();
    assert!(close(c.value, 2.0, 1e-12));
    assert!(c.vector.iter().all(|x| (x - 0.5).abs() < 1e-10));
}

#[test]
fn conditioned_collapse_matches_full_spectrum() {
    let inst = build_instance(&BuildParams::new(8, 1, 5, 3).undecorated()).unwrap();
    let full = top_eigenpair(&inst.graph, Some(inst.layout.entrance()), 1e-10).unwrap();
    let path = collapse_clusters(&inst.graph, &inst.layout).unwrap();
    let collapsed = top_eigenpair_path(&path).unwrap();
    assert!((full.value - collapsed.value).abs() < 1e-8);
    let spectrum = dense_eigenvalues(inst.graph.to_dense());
    for ev in path.operator().eigenvalues().unwrap() {
        let nearest = spectrum.iter().map(|x| (x - ev).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-6, "{ev}");
    }
}

#[test]
fn larger_instance_uses_sparse_path() {
    let inst = build_instance(&BuildParams::new(4, 2, 13, 5).unconditioned().undecorated()).unwrap();
    assert!(inst.graph.vertex_count() > 2048);
    let full = top_eigenpair(&inst.graph, Some(inst.layout.entrance()), 1e-9).unwrap();
    assert!(full.residual <= 1e-9);
    let collapsed = top_eigenpair_path(&collapse_clusters(&inst.graph, &inst.layout).unwrap()).unwrap();
    // unconditioned expanders may push a non-symmetric mode to the top
    assert!(full.value >= collapsed.value - 1e-8);
}

fn lambda_t_dense(gamma: f64, tree: TreeSpec) -> f64 {
    dense_eigenvalues(level_operator(gamma, tree).to_dense())[0]
}

#[test]
fn fixed_point_examples() {
    let (lg, k) = (3.0, 2usize);
    let fp = decoration_fixed_point(lg, k, TreeSpec::new(4, 0)).unwrap();
    assert!(close(fp.gamma, (lg + (lg * lg + 4.0 * k as f64).sqrt()) / 2.0, 1e-12));

    let tree = TreeSpec::new(3, 4);
    let fp = decoration_fixed_point(5.0, 0, tree).unwrap();
    assert!(close(fp.lambda, 5.0, 1e-10));
    assert!(close(lambda_t_dense(fp.gamma, tree), 5.0, 1e-10));

    // default first-level trees: arity 5m - 1, depth ceil(m^1.5), round(sqrt m) trees
    let regime = |m: usize, lambda_g: f64| {
        let tree = TreeSpec::new(5 * m - 1, (m as f64).powf(1.5).ceil() as usize);
        let h = (m as f64).sqrt().round() as usize;
        let fp = decoration_fixed_point(lambda_g, h, tree).unwrap();
        assert!(close(fp.lambda, lambda_t_dense(fp.gamma, tree), 1e-9));
        assert!(close(lambda_g + h as f64 / fp.gamma, fp.lambda, 1e-9));
        fp.gamma
    };
    for m in [5usize, 6, 8] {
        let lg = 2.0 * m as f64;
        let gamma = regime(m, lg);
        assert!(gamma >= m as f64 && gamma <= lg + 1.0, "m={m}: {gamma}");
    }
    // at m = 4 the tree bulk 2 sqrt(19) cos(pi/10) exceeds 2m, so the bound
    // needs the instance's own top eigenvalue
    let lg = top_eigenpair_path(&CollapsedPath::obfuscated(9, 4)).unwrap().value;
    let gamma = regime(4, lg);
    assert!((4.0..=lg + 1.0).contains(&gamma), "{gamma}");
    assert!(regime(4, 8.0) < 4.0);
}

#[test]
fn fixed_point_both_regimes_against_dense() {
    for (lg, k, b, d) in [(1.0, 1usize, 4usize, 3usize), (6.0, 3, 4, 5), (2.0, 5, 9, 2), (0.5, 2, 2, 6)] {
        let tree = TreeSpec::new(b, d);
        let fp = decoration_fixed_point(lg, k, tree).unwrap();
        let lt = lambda_t_dense(fp.gamma, tree);
        assert!(close(fp.lambda, lt, 1e-9));
        assert!(close(lg + k as f64 / fp.gamma, lt, 1e-9));
        assert_eq!(fp.x.is_some(), fp.lambda > 2.0 * (b as f64).sqrt());
    }
}

#[test]
fn phi_depth_zero() {
    let phi = phi_vector(2.5, TreeSpec::new(3, 0)).unwrap();
    assert_eq!(phi.levels, vec![1.0]);
    assert_eq!((phi.l1, phi.l2), (1.0, 1.0));
}

#[test]
fn phi_l2_geometric_bound() {
    for (b, gamma) in [(4usize, 4.5), (4, 8.0), (9, 7.0), (16, 20.0)] {
        for depth in [1usize, 3, 10, 40] {
            let phi = phi_vector(gamma, TreeSpec::new(b, depth)).unwrap();
            let r = (b as f64).sqrt() / gamma;
            let bound: f64 = (0..=depth).map(|j| r.powi(j as i32)).sum();
            assert!(phi.l2 <= bound + 1e-12, "b={b} gamma={gamma} depth={depth}");
        }
    }
}

/// Explicit tree with `gamma` on the root; returns the ℓ¹ norm of the top
/// eigenvector scaled to root amplitude 1.
fn explicit_l1(gamma: f64, tree: TreeSpec) -> f64 {
    let g = build_complete_tree(tree).unwrap();
    let mut a: DMatrix<f64> = g.to_dense();
    a[(0, 0)] += gamma;
    let (_, vecs) = dense_eigen(a);
    let v = vecs.column(0);
    v.iter().map(|x| x.abs()).sum::<f64>() / v[0].abs()
}

#[test]
fn phi_l1_against_explicit_tree() {
    let (b, gamma) = (6usize, 5.0);
    for depth in [1usize, 2, 3, 4] {
        let tree = TreeSpec::new(b, depth);
        let phi = phi_vector(gamma, tree).unwrap();
        assert!(close(phi.l1, explicit_l1(gamma, tree), 1e-8), "depth {depth}");
    }
    // d / gamma = 1.2 at depth 30
    let phi = phi_vector(gamma, TreeSpec::new(b, 30)).unwrap();
    let r = b as f64 / gamma;
    let series: f64 = (0..=30).map(|j| r.powi(j)).sum();
    assert!(phi.l1 >= (1.0 - 2.0 * b as f64 / (gamma * gamma)) * series, "{} vs {series}", phi.l1);
    assert!(phi.l1 <= series);
}

#[test]
fn prediction_single_vertex_with_pendants() {
    let k = 5;
    let inst = decorate(&plain(MultiGraph::new(1)), &DecorationSchedule::from_levels(&[(k, 1, 0)]), DEFAULT_VERTEX_CAP).unwrap();
    let schedule = DecorationSchedule::from_levels(&[(k, 1, 0)]);
    let pred = predict_decorated_eigenpair(&inst, &schedule, 1e-10).unwrap();
    let dense = dense_eigenvalues(inst.graph.to_dense())[0];
    assert!(close(pred.lambda, dense, 1e-12));
    assert!(close(pred.lambda, (k as f64).sqrt(), 1e-12));
}

#[test]
fn prediction_decorated_six_cycle() {
    let schedule = DecorationSchedule::from_levels(&[(2, 2, 2)]);
    let inst = decorate(&plain(cycle(6)), &schedule, DEFAULT_VERTEX_CAP).unwrap();
    let pred = predict_decorated_eigenpair(&inst, &schedule, 1e-8).unwrap();
    assert!(close(pred.base_lambda, 2.0, 1e-12));
    let dense = dense_eigenvalues(inst.graph.to_dense())[0];
    assert!((pred.lambda - dense).abs() < 1e-8);
}

#[test]
fn prediction_two_rounds() {
    let schedule = DecorationSchedule::from_levels(&[(1, 2, 1), (2, 3, 2)]);
    let inst = decorate(&plain(cycle(5)), &schedule, DEFAULT_VERTEX_CAP).unwrap();
    let pred = predict_decorated_eigenpair(&inst, &schedule, 1e-8).unwrap();
    let dense = dense_eigenvalues(inst.graph.to_dense())[0];
    assert!((pred.lambda - dense).abs() < 1e-8);
    assert_eq!(pred.fixed_points.len(), 2);
}

#[test]
fn prediction_without_rounds_is_base() {
    let inst = plain(cycle(7));
    let pred = predict_decorated_eigenpair(&inst, &DecorationSchedule::empty(), 1e-10).unwrap();
    assert!(close(pred.lambda, 2.0, 1e-12));
    let base = top_eigenpair(&inst.graph, Some(0), 1e-10).unwrap();
    for (a, b) in pred.vector.iter().zip(&base.vector) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn wrong_schedule_is_rejected() {
    let schedule = DecorationSchedule::from_levels(&[(2, 2, 2)]);
    let inst = decorate(&plain(cycle(6)), &schedule, DEFAULT_VERTEX_CAP).unwrap();
    let other = DecorationSchedule::from_levels(&[(1, 2, 2)]);
    assert!(matches!(
        predict_decorated_eigenpair(&inst, &other, 1e-8),
        Err(Error::InvalidInput(_))
    ));
}

fn small_decorated(arity: usize, depth: usize) -> Instance {
    build_instance(
        &BuildParams::new(2, 1, 5, 2)
            .unconditioned()
            .with_rounds(1)
            .with_trees_per_round(1)
            .with_arities(vec![arity])
            .with_depths(vec![depth]),
    )
    .unwrap()
}

#[test]
fn weight_reports() {
    let bare = build_instance(&BuildParams::new(2, 1, 5, 2).unconditioned().undecorated()).unwrap();
    let top = top_eigenpair(&bare.graph, Some(0), 1e-10).unwrap();
    let w = weight_report(&top.vector, &bare.layout).unwrap();
    assert!(close(w.l2_fraction_on_original, 1.0, 1e-12));
    assert!(close(w.l1_fraction_on_original, 1.0, 1e-12));
    assert!(w.levels.is_empty());

    // arity 9 exceeds gamma, so the trees carry most of the ℓ¹ mass
    let m = 2.0;
    let inst = build_instance(
        &BuildParams::new(2, 1, 3, 2)
            .unconditioned()
            .with_rounds(1)
            .with_trees_per_round(2)
            .with_arities(vec![9])
            .with_depths(vec![2]),
    )
    .unwrap();
    assert!(inst.graph.vertex_count() <= 2048);
    let top = top_eigenpair(&inst.graph, Some(0), 1e-10).unwrap();
    let w = weight_report(&top.vector, &inst.layout).unwrap();
    assert!(w.l2_fraction_on_original >= 1.0 - 1.0 / m, "{w:?}");
    assert!(w.l1_fraction_on_original < 0.5, "{w:?}");
    let total: f64 = w.l2_fraction_on_original + w.levels.iter().map(|l| l.l2_fraction).sum::<f64>();
    assert!(close(total, 1.0, 1e-12));

    let fractions: Vec<f64> = (1..=4)
        .map(|d| {
            let inst = small_decorated(3, d);
            let top = top_eigenpair(&inst.graph, Some(0), 1e-10).unwrap();
            weight_report(&top.vector, &inst.layout).unwrap().l1_fraction_on_original
        })
        .collect();
    assert!(fractions.windows(2).all(|f| f[1] < f[0]), "{fractions:?}");
}

#[test]
fn adiabatic_endpoints() {
    let inst = build_instance(&BuildParams::new(2, 1, 5, 4).unconditioned().undecorated()).unwrap();
    let (e, x) = (inst.layout.entrance(), inst.layout.exit().unwrap());
    let op = |s: f64| AdiabaticOperator::Graph {
        graph: &inst.graph,
        entrance: e,
        exit: x,
        s,
        weight: 2.0,
    };
    let p = adiabatic_spectrum(&op(-1.0)).unwrap();
    assert!(close(p.lambda1, 2.0, 1e-12) && p.lambda2.abs() < 1e-12);
    let p = adiabatic_spectrum(&op(0.0)).unwrap();
    let full = dense_eigenvalues(inst.graph.to_dense());
    assert!(close(p.lambda1, full[0], 1e-12) && close(p.lambda2, full[1], 1e-12));
    assert!(adiabatic_spectrum(&op(1.5)).is_err());
    // the dense form agrees with the operator
    let d = to_dense(&op(0.3));
    assert!(close(d[(e, e)], 0.7 * inst.graph.self_loops(e) as f64, 1e-12));
    assert!(close(d[(x, x)], 0.7 * inst.graph.self_loops(x) as f64 + 0.6, 1e-12));
}

#[test]
fn collapsed_gap_scales_with_m() {
    let (m, ell) = (16usize, 5usize);
    let path = CollapsedPath::obfuscated(ell, m);
    let sweep = adiabatic_sweep(&s_grid(201), |s| AdiabaticOperator::Path {
        path: &path,
        s,
        weight: m as f64,
    })
    .unwrap();
    let min = sweep.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
    assert!(min >= 0.1 * m as f64 / (ell * ell) as f64, "{min}");
}

#[test]
fn decoration_norm_is_bounded() {
    for (m, arity, depth) in [(2usize, 9usize, 2usize), (2, 5, 3), (3, 14, 1), (3, 4, 2)] {
        let inst = build_instance(
            &BuildParams::new(m, 1, 5, 1)
                .unconditioned()
                .with_rounds(1)
                .with_trees_per_round(2)
                .with_arities(vec![arity])
                .with_depths(vec![depth]),
        )
        .unwrap();
        let norm = decoration_norm(&inst).unwrap();
        assert!(norm > 0.0 && norm <= 2.0 * (5.0 * m as f64).sqrt(), "m={m}: {norm}");
    }
    let bare = build_instance(&BuildParams::new(2, 1, 5, 1).unconditioned().undecorated()).unwrap();
    assert_eq!(decoration_norm(&bare).unwrap(), 0.0);
}

#[test]
fn perturbation_rule_holds_on_sweep() {
    let m = 2usize;
    let base = BuildParams::new(m, 1, 5, 8).unconditioned();
    let bare = build_instance(&base.clone().undecorated()).unwrap();
    let deco = build_instance(
        &base
            .with_rounds(1)
            .with_trees_per_round(1)
            .with_arities(vec![2])
            .with_depths(vec![1]),
    )
    .unwrap();
    let w = m as f64;
    let grid = s_grid(41);
    let sweep = |inst: &Instance| {
        adiabatic_sweep(&grid, |s| AdiabaticOperator::Graph {
            graph: &inst.graph,
            entrance: inst.layout.entrance(),
            exit: inst.layout.exit().unwrap(),
            s,
            weight: w,
        })
        .unwrap()
    };
    let (undecorated, decorated) = (sweep(&bare), sweep(&deco));
    let norm = decoration_norm(&deco).unwrap();
    assert!(close(norm, 3f64.sqrt(), 1e-9));
    let certs = certify_decorated_gaps(&undecorated, norm);
    let mut certified = 0;
    for (c, d) in certs.iter().zip(&decorated) {
        if let Some(g) = c.certified_gap {
            assert!(d.gap >= g - 1e-9, "s={}: {} < {g}", c.s, d.gap);
            certified += 1;
        }
    }
    assert!(certified >= 2);
}
