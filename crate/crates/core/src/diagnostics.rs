//! Error norms, discrete momentum, convergence orders and Galilean discrepancy.

use crate::driver::simulate;
use crate::error::{KdvError, Result};
use crate::mesh::{spacings, BoundaryKind, MeshLayer};
use crate::projection::{interpolate_within, ProjectionStencil};
use crate::schemes::SchemeConfig;
use crate::solutions::{GroupElement, KdvSolution};

/// Error summary of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub rmse: f64,
    pub linf: f64,
    pub momentum_drift: f64,
    pub n: usize,
    pub dt: f64,
    pub wall_time: f64,
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(KdvError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KdvError::InvalidLayer("empty vectors".into()));
    }
    Ok(())
}

pub fn rmse(numerical: &[f64], reference: &[f64]) -> Result<f64> {
    check_lengths(numerical, reference)?;
    let sum: f64 = numerical.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((sum / numerical.len() as f64).sqrt())
}

pub fn linf_error(numerical: &[f64], reference: &[f64]) -> Result<f64> {
    check_lengths(numerical, reference)?;
    Ok(numerical.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `M = Σ u_i (h_i + h_{i-1}) / 2`, wrapping on periodic domains and with
/// half cells at the ends of finite domains.
pub fn discrete_momentum(layer: &MeshLayer, boundary: &BoundaryKind) -> f64 {
    let h = spacings(&layer.nodes, boundary);
    let n = layer.len();
    let cell = |k: isize| -> f64 {
        if boundary.is_periodic() {
            h[k.rem_euclid(n as isize) as usize]
        } else if k < 0 || k as usize >= h.len() {
            0.0
        } else {
            h[k as usize]
        }
    };
    layer
        .values
        .iter()
        .enumerate()
        .map(|(i, u)| 0.5 * u * (cell(i as isize) + cell(i as isize - 1)))
        .sum()
}

/// `(rmse, linf)` against an exact solution evaluated at the layer's nodes.
pub fn errors_against(layer: &MeshLayer, sol: &KdvSolution) -> Result<(f64, f64)> {
    let exact = layer
        .nodes
        .iter()
        .map(|&x| sol.evaluate(layer.time, x))
        .collect::<Result<Vec<_>>>()?;
    Ok((rmse(&layer.values, &exact)?, linf_error(&layer.values, &exact)?))
}

/// Least-squares slope of `ln(error)` against `ln(N)`.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(KdvError::Degenerate("need at least two points".into()));
    }
    if let Some((n, e)) = points.iter().find(|(n, e)| !(*n > 0.0 && *e > 0.0)) {
        return Err(KdvError::Degenerate(format!("non-positive entry ({n}, {e})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, e)| (n.ln(), e.ln())).collect();
    let m = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(KdvError::Degenerate("all N equal".into()));
    }
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// RMSE between a rest-frame layer and a layer computed in a frame boosted by `c`,
/// after mapping the latter back. The mapped-back layer is interpolated
/// quadratically at the rest-frame nodes inside its node range.
pub fn frame_discrepancy(rest: &MeshLayer, boosted: &MeshLayer, c: f64, boundary: &BoundaryKind) -> Result<f64> {
    let mut back = boosted.transformed(&GroupElement::boost(-c));
    if let BoundaryKind::Periodic { period } = *boundary {
        let shift = ((rest.nodes[0] - back.nodes[0]) / period).round() * period;
        back.nodes.iter_mut().for_each(|x| *x += shift);
    }
    let sampled = interpolate_within(&back.nodes, &back.values, &rest.nodes, 2, ProjectionStencil::Contiguous)?;
    let (num, reference): (Vec<f64>, Vec<f64>) = sampled
        .iter()
        .zip(&rest.values)
        .filter_map(|(s, r)| s.map(|v| (v, *r)))
        .unzip();
    if num.is_empty() {
        return Err(KdvError::Degenerate("boosted run does not overlap the rest frame".into()));
    }
    rmse(&num, &reference)
}

/// Runs the same experiment in the rest frame and in a frame boosted by `c`
/// and returns their [`frame_discrepancy`].
pub fn galilean_discrepancy(
    cfg: &SchemeConfig,
    solution: &KdvSolution,
    nodes: &[f64],
    t0: f64,
    steps: usize,
    c: f64,
) -> Result<f64> {
    let boundary_for = |sol: &KdvSolution| match cfg.boundary {
        BoundaryKind::Periodic { period } => BoundaryKind::Periodic { period },
        BoundaryKind::DirichletFromExact(_) => BoundaryKind::DirichletFromExact(sol.clone()),
    };
    let rest_cfg = SchemeConfig { boundary: boundary_for(solution), ..cfg.clone() };
    let rest_initial = MeshLayer::from_solution(solution, t0, nodes.to_vec())?;
    let rest = simulate(&rest_initial, &rest_cfg, steps, |_, _| {})?;
    if c == 0.0 {
        return Ok(0.0);
    }
    let boost = GroupElement::boost(c);
    let boosted_cfg = SchemeConfig { boundary: boundary_for(&solution.transform(boost)), ..cfg.clone() };
    let boosted = simulate(&rest_initial.transformed(&boost), &boosted_cfg, steps, |_, _| {})?;
    frame_discrepancy(&rest, &boosted, c, &cfg.boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norm_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.5, 2.5, 0.5], &[1.0, 2.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((rmse(&[0.0, 3.0, 4.0], &[0.0; 3]).unwrap() - 5.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(linf_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(linf_error(&[1.25, 2.25], &[1.0, 2.0]).unwrap(), 0.25);
        assert_eq!(linf_error(&[0.0, 7.0, 0.0], &[0.0; 3]).unwrap(), 7.0);
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(KdvError::LengthMismatch(1, 2))));
        assert!(linf_error(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn momentum_examples() {
        let period = 3.0;
        let boundary = BoundaryKind::Periodic { period };
        let nodes: Vec<f64> = vec![0.0, 0.2, 0.9, 1.4, 2.0, 2.7];
        let layer = MeshLayer::new(0.0, nodes, vec![1.5; 6]).unwrap();
        assert!((discrete_momentum(&layer, &boundary) - 4.5).abs() < 1e-13);

        let dirichlet = BoundaryKind::DirichletFromExact(KdvSolution::Constant { value: 0.0 });
        let nodes: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let odd = MeshLayer::from_fn(0.0, nodes, |x| x * x * x - x).unwrap();
        assert!(discrete_momentum(&odd, &dirichlet).abs() < 1e-13);
    }

    #[test]
    fn momentum_matches_trapezoid_rule() {
        let dirichlet = BoundaryKind::DirichletFromExact(KdvSolution::Constant { value: 0.0 });
        let nodes = vec![0.0, 0.3, 0.35, 0.9, 1.6, 2.0];
        let layer = MeshLayer::from_fn(0.0, nodes.clone(), |x| (3.0 * x).sin() + x).unwrap();
        let trapezoid: f64 = nodes
            .windows(2)
            .zip(layer.values.windows(2))
            .map(|(x, u)| 0.5 * (x[1] - x[0]) * (u[0] + u[1]))
            .sum();
        assert!((discrete_momentum(&layer, &dirichlet) - trapezoid).abs() < 1e-12);
    }

    #[test]
    fn convergence_examples() {
        let quad: Vec<(f64, f64)> = [16.0, 24.0, 32.0, 48.0].iter().map(|&n: &f64| (n, 3.0 / (n * n))).collect();
        assert!((convergence_order(&quad).unwrap() + 2.0).abs() < 1e-12);
        let lin: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&n: &f64| (n, 0.5 / n)).collect();
        assert!((convergence_order(&lin).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(convergence_order(&[(8.0, 1.0), (8.0, 2.0)]), Err(KdvError::Degenerate(_))));
        assert!(convergence_order(&[(8.0, 1.0)]).is_err());
    }

    #[test]
    fn lagrangian_runs_have_no_frame_discrepancy() {
        use crate::schemes::{MeshStrategy, SchemeKind};
        let sol = KdvSolution::soliton(4.0).unwrap();
        let boundary = BoundaryKind::DirichletFromExact(sol.clone());
        let nodes: Vec<f64> = (0..40).map(|i| -4.0 + 0.2 * i as f64).collect();
        let invariant = SchemeConfig::new(SchemeKind::InvariantTrapezoidalTen, 1e-4, boundary.clone(), MeshStrategy::Lagrangian);
        let d = galilean_discrepancy(&invariant, &sol, &nodes, 0.0, 20, 2.0).unwrap();
        assert!(d < 1e-12, "{d:e}");
        let standard = SchemeConfig::new(SchemeKind::StandardTrapezoidalTen, 1e-4, boundary, MeshStrategy::Fixed);
        let d = galilean_discrepancy(&standard, &sol, &nodes, 0.0, 20, 2.0).unwrap();
        assert!(d > 1e-8, "{d:e}");
    }

    proptest! {
        #[test]
        fn norms_are_norms(
            a in proptest::collection::vec(-10.0f64..10.0, 6),
            b in proptest::collection::vec(-10.0f64..10.0, 6),
            c in proptest::collection::vec(-10.0f64..10.0, 6),
            s in -5.0f64..5.0,
        ) {
            for norm in [rmse, linf_error] {
                let ab = norm(&a, &b).unwrap();
                let bc = norm(&b, &c).unwrap();
                let ac = norm(&a, &c).unwrap();
                prop_assert!(ac <= ab + bc + 1e-12);
                let sa: Vec<f64> = a.iter().map(|v| s * v).collect();
                let sb: Vec<f64> = b.iter().map(|v| s * v).collect();
                prop_assert!((norm(&sa, &sb).unwrap() - s.abs() * ab).abs() <= 1e-12 * (1.0 + ab));
            }
            prop_assert!(rmse(&a, &b).unwrap() <= linf_error(&a, &b).unwrap() + 1e-15);
        }

        #[test]
        fn momentum_is_boost_covariant(
            values in proptest::collection::vec(-3.0f64..3.0, 8),
            eps in -2.0f64..2.0,
            t in 0.0f64..2.0,
        ) {
            let period = 4.0;
            let boundary = BoundaryKind::Periodic { period };
            let nodes: Vec<f64> = (0..8).map(|i| 0.5 * i as f64 + 0.1 * ((i * 7) % 3) as f64).collect();
            let layer = MeshLayer::new(t, nodes, values).unwrap();
            let boosted = layer.transformed(&GroupElement::boost(eps));
            let diff = discrete_momentum(&boosted, &boundary) - discrete_momentum(&layer, &boundary);
            prop_assert!((diff - eps * period).abs() < 1e-12);
        }
    }
}
