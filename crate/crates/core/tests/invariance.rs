use kdv_core::driver::simulate;
use kdv_core::schemes::compute_invariants;
use kdv_core::{
    BoundaryKind, GroupElement, KdvSolution, MeshAnchor, MeshLayer, MeshStrategy, MonitorKind,
    SchemeConfig, SchemeKind,
};
use proptest::prelude::*;
use std::f64::consts::PI;

const PERIOD: f64 = 4.0;

fn periodic_layer(n: usize) -> MeshLayer {
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let s = PERIOD * i as f64 / n as f64;
            s + 0.03 * (2.0 * PI * s / PERIOD).sin()
        })
        .collect();
    MeshLayer::from_fn(0.4, nodes, |x| 1.0 + 0.6 * (2.0 * PI * x / PERIOD).sin() + 0.2 * (4.0 * PI * x / PERIOD).cos())
        .unwrap()
}

fn dirichlet_problem(n: usize) -> (MeshLayer, KdvSolution) {
    let sol = KdvSolution::soliton(4.0).unwrap();
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let s = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
            s + 0.05 * (PI * s / 3.0).sin()
        })
        .collect();
    (MeshLayer::from_solution(&sol, 0.1, nodes).unwrap(), sol)
}

/// Strategies whose node motion commutes with the whole group.
fn strategies() -> Vec<MeshStrategy> {
    vec![
        MeshStrategy::Lagrangian,
        MeshStrategy::Adaptive(MonitorKind::ArcLengthInvariant { alpha: 50.0 }),
    ]
}

fn invariant_kinds() -> impl Iterator<Item = SchemeKind> {
    SchemeKind::ALL.into_iter().filter(|k| k.is_invariant())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

/// Largest relative mismatch between `g(step(layer))` and `step(g(layer))`.
fn commutation_defect(layer: &MeshLayer, cfg: &SchemeConfig, g: &GroupElement, steps: usize) -> f64 {
    let then_map = simulate(layer, cfg, steps, |_, _| {}).unwrap().transformed(g);
    let map_then = simulate(&layer.transformed(g), &cfg.transformed(g), steps, |_, _| {}).unwrap();
    assert!((then_map.time - map_then.time).abs() <= 1e-12 * (1.0 + then_map.time.abs()));
    let xs = max_abs(&then_map.nodes);
    let us = max_abs(&then_map.values);
    let dx = then_map.nodes.iter().zip(&map_then.nodes).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let du = then_map.values.iter().zip(&map_then.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (dx / xs).max(du / us)
}

fn group_element() -> impl Strategy<Value = GroupElement> {
    (-2.0f64..2.0, -0.3f64..0.3, -1.0f64..1.0, -2.0f64..2.0).prop_map(|(v, d, t0, x0)| GroupElement {
        d,
        v,
        t0,
        x0,
        reflect: false,
    })
}

fn configs_with(boundary: &BoundaryKind, dt: f64, strategies: &[MeshStrategy]) -> Vec<SchemeConfig> {
    let mut out = Vec::new();
    for kind in invariant_kinds() {
        for &strategy in strategies {
            out.push(
                SchemeConfig::new(kind, dt, boundary.clone(), strategy).with_anchor(MeshAnchor::Lagrangian),
            );
        }
    }
    out
}

fn configs(boundary: &BoundaryKind, dt: f64) -> Vec<SchemeConfig> {
    configs_with(boundary, dt, &strategies())
}

fn projection_configs(boundary: &BoundaryKind, dt: f64) -> Vec<SchemeConfig> {
    configs_with(boundary, dt, &[MeshStrategy::evolution_projection()])
}

#[test]
fn invariant_schemes_commute_with_each_generator() {
    let layer = periodic_layer(24);
    let boundary = BoundaryKind::Periodic { period: PERIOD };
    let generators = [
        GroupElement::boost(1.7),
        GroupElement::boost(-0.9),
        GroupElement::shift(0.8, -1.3),
        GroupElement::dilation(0.25),
        GroupElement::dilation(-0.4),
    ];
    for cfg in configs(&boundary, 2e-4) {
        for g in &generators {
            let defect = commutation_defect(&layer, &cfg, g, 3);
            assert!(defect <= 1e-12, "{:?} {:?} {g:?}: {defect:e}", cfg.kind, cfg.mesh_strategy);
        }
    }
}

#[test]
fn invariant_schemes_commute_on_dirichlet_domains() {
    let (layer, sol) = dirichlet_problem(30);
    let boundary = BoundaryKind::DirichletFromExact(sol);
    let g = GroupElement::boost(1.1).compose(&GroupElement::dilation(0.2)).compose(&GroupElement::shift(0.3, 0.7));
    for cfg in configs(&boundary, 1e-4) {
        let defect = commutation_defect(&layer, &cfg, &g, 3);
        assert!(defect <= 1e-12, "{:?} {:?}: {defect:e}", cfg.kind, cfg.mesh_strategy);
    }
}

#[test]
fn evolution_projection_commutes_with_shift_and_dilation_only() {
    let layer = periodic_layer(24);
    let boundary = BoundaryKind::Periodic { period: PERIOD };
    for cfg in projection_configs(&boundary, 2e-4) {
        for g in [GroupElement::shift(0.8, -1.3), GroupElement::dilation(0.25)] {
            let defect = commutation_defect(&layer, &cfg, &g, 3);
            assert!(defect <= 1e-12, "{:?} {g:?}: {defect:e}", cfg.kind);
        }
        // Projecting onto nodes that stay put in one frame is not the same as in
        // another, so a boost leaves an interpolation-sized mismatch.
        let defect = commutation_defect(&layer, &cfg, &GroupElement::boost(1.5), 3);
        assert!(defect > 1e-10 && defect < 1e-2, "{:?}: {defect:e}", cfg.kind);
    }
}

#[test]
fn standard_schemes_respect_shift_and_dilation_but_not_boosts() {
    let n = 32;
    let nodes: Vec<f64> = (0..n).map(|i| PERIOD * i as f64 / n as f64).collect();
    let layer = MeshLayer::from_fn(0.0, nodes, |x| 1.0 + (2.0 * PI * x / PERIOD).sin()).unwrap();
    let boundary = BoundaryKind::Periodic { period: PERIOD };
    for kind in [SchemeKind::StandardFTCS, SchemeKind::StandardTrapezoidalTen] {
        let cfg = SchemeConfig::new(kind, 1e-5, boundary.clone(), MeshStrategy::Fixed);
        for g in [GroupElement::shift(0.5, 1.0), GroupElement::dilation(0.3)] {
            assert!(commutation_defect(&layer, &cfg, &g, 2) <= 1e-12, "{kind:?} {g:?}");
        }
        // The frame speed moves the fixed mesh by exactly one cell over the run,
        // so the mapped-back nodes coincide with the rest-frame nodes.
        let (steps, h) = (10, PERIOD / n as f64);
        let c = h / (steps as f64 * cfg.dt);
        let discrepancy = boost_discrepancy(&layer, &cfg, steps, c);
        assert!(discrepancy > 1e-6, "{kind:?} unexpectedly boost invariant: {discrepancy:e}");
    }
}

/// Max mismatch between the rest run and the boosted run mapped back, on a fixed
/// mesh that the boost carries by exactly one cell.
fn boost_discrepancy(layer: &MeshLayer, cfg: &SchemeConfig, steps: usize, c: f64) -> f64 {
    let rest = simulate(layer, cfg, steps, |_, _| {}).unwrap();
    let g = GroupElement::boost(c);
    let boosted = simulate(&layer.transformed(&g), &cfg.transformed(&g), steps, |_, _| {}).unwrap();
    let back = boosted.transformed(&GroupElement::boost(-c));
    let n = layer.len();
    (0..n)
        .map(|i| (back.values[(i + 1) % n] - rest.values[i]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn momentum_conserving_scheme_conserves_momentum_over_a_thousand_steps() {
    use kdv_core::diagnostics::discrete_momentum;
    let layer = periodic_layer(32);
    let boundary = BoundaryKind::Periodic { period: PERIOD };
    for strategy in [MeshStrategy::Fixed, MeshStrategy::Lagrangian] {
        let cfg = SchemeConfig::new(SchemeKind::MomentumConservingInvariant, 1e-4, boundary.clone(), strategy)
            .with_dispersion(0.01);
        let m0 = discrete_momentum(&layer, &boundary);
        let end = simulate(&layer, &cfg, 1000, |_, _| {}).unwrap();
        let drift = (discrete_momentum(&end, &boundary) - m0).abs();
        assert!(drift <= 1e-12, "{strategy:?}: {drift:e}");
    }
    let cfg = SchemeConfig::new(SchemeKind::InvariantTrapezoidalTen, 1e-4, boundary.clone(), MeshStrategy::Lagrangian)
        .with_dispersion(0.01);
    let m0 = discrete_momentum(&layer, &boundary);
    let end = simulate(&layer, &cfg, 1000, |_, _| {}).unwrap();
    assert!((discrete_momentum(&end, &boundary) - m0).abs() > 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_group_elements_commute_with_invariant_steps(g in group_element()) {
        let layer = periodic_layer(20);
        let boundary = BoundaryKind::Periodic { period: PERIOD };
        for cfg in configs(&boundary, 2e-4) {
            let defect = commutation_defect(&layer, &cfg, &g, 2);
            prop_assert!(defect <= 1e-12, "{:?} {:?}: {:e}", cfg.kind, cfg.mesh_strategy, defect);
        }
    }

    #[test]
    fn difference_invariants_are_unchanged(g in group_element(), i in 0usize..20) {
        let boundary = BoundaryKind::Periodic { period: PERIOD };
        let prev = periodic_layer(20);
        let nodes: Vec<f64> = prev.nodes.iter().map(|x| x + 0.02 + 0.01 * (3.0 * x).cos()).collect();
        let next = MeshLayer::from_fn(prev.time + 0.05, nodes, |x| 0.8 + 0.5 * (2.0 * PI * x / PERIOD).cos()).unwrap();
        let before = compute_invariants(&prev, &next, i, &boundary).unwrap();
        let tb = boundary.transformed(&g);
        let after = compute_invariants(&prev.transformed(&g), &next.transformed(&g), i, &tb).unwrap();
        for k in 1..=18 {
            let (a, b) = (before.get(k), after.get(k));
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0), "I{}: {} vs {}", k, a, b);
        }
    }
}
