//! Polynomial interpolation back onto a previous mesh.

use crate::error::{KdvError, Result};
use crate::mesh::{extend_nodes, extend_values, BoundaryKind, MeshLayer};

/// Which advanced nodes form the interpolation stencil around the nearest node `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionStencil {
    /// Consecutive nodes centred on `c`, e.g. `{c-1, c, c+1}` for quadratics.
    #[default]
    Contiguous,
    /// Every other node, e.g. `{c-2, c, c+2}`; falls back to contiguous near the ends.
    Alternating,
}

/// `Σ L_i(x) u_i` over the stencil `(xs, us)`.
pub fn lagrange_interpolate(xs: &[f64], us: &[f64], x: f64) -> Result<f64> {
    if xs.len() != us.len() {
        return Err(KdvError::LengthMismatch(xs.len(), us.len()));
    }
    if xs.is_empty() {
        return Err(KdvError::InvalidLayer("empty interpolation stencil".into()));
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(x >= lo && x <= hi) {
        return Err(KdvError::Extrapolation { x, lo, hi });
    }
    let mut total = 0.0;
    for (i, (&xi, &ui)) in xs.iter().zip(us).enumerate() {
        let mut basis = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                if xi == xj {
                    return Err(KdvError::DuplicateNodes(xi));
                }
                basis *= (x - xj) / (xi - xj);
            }
        }
        total += basis * ui;
    }
    Ok(total)
}

/// Advanced nodes and values with enough neighbours to interpolate anywhere in the domain.
fn covering_arrays(advanced: &MeshLayer, boundary: &BoundaryKind) -> Result<(Vec<f64>, Vec<f64>)> {
    match *boundary {
        BoundaryKind::Periodic { period } => {
            let n = advanced.len();
            let mut xs = Vec::with_capacity(3 * n);
            let mut us = Vec::with_capacity(3 * n);
            for shift in [-period, 0.0, period] {
                xs.extend(advanced.nodes.iter().map(|x| x + shift));
                us.extend_from_slice(&advanced.values);
            }
            Ok((xs, us))
        }
        BoundaryKind::DirichletFromExact(_) => {
            let xs = extend_nodes(&advanced.nodes, boundary);
            let us = extend_values(&xs, &advanced.values, advanced.time, boundary)?;
            Ok((xs, us))
        }
    }
}

/// Indices of the stencil of `order + 1` nodes around the node nearest to `x`.
fn stencil_indices(xs: &[f64], x: f64, order: usize, stencil: ProjectionStencil) -> Vec<usize> {
    let len = xs.len();
    let upper = xs.partition_point(|&v| v < x).min(len - 1);
    let nearest = if upper > 0 && (x - xs[upper - 1]) <= (xs[upper] - x) {
        upper - 1
    } else {
        upper
    };
    let contiguous = || {
        // Odd orders lean towards the side containing x.
        let left = if order % 2 == 1 && x < xs[nearest] { order / 2 + 1 } else { order / 2 };
        let start = nearest.saturating_sub(left).min(len.saturating_sub(order + 1));
        (start..start + order + 1).collect::<Vec<_>>()
    };
    match stencil {
        ProjectionStencil::Contiguous => contiguous(),
        ProjectionStencil::Alternating => {
            let left = 2 * (order / 2);
            let right = 2 * order - left;
            if nearest >= left && nearest + right < len {
                (0..=order).map(|k| nearest - left + 2 * k).collect()
            } else {
                contiguous()
            }
        }
    }
}

fn interpolate_at(xs: &[f64], us: &[f64], x: f64, order: usize, stencil: ProjectionStencil) -> Result<f64> {
    let idx = stencil_indices(xs, x, order, stencil);
    let sx: Vec<f64> = idx.iter().map(|&k| xs[k]).collect();
    let su: Vec<f64> = idx.iter().map(|&k| us[k]).collect();
    lagrange_interpolate(&sx, &su, x)
}

/// Interpolates `(xs, us)` at each target inside `[xs[0], xs[last]]`; targets outside give `None`.
pub fn interpolate_within(
    xs: &[f64],
    us: &[f64],
    targets: &[f64],
    order: usize,
    stencil: ProjectionStencil,
) -> Result<Vec<Option<f64>>> {
    if xs.len() != us.len() {
        return Err(KdvError::LengthMismatch(xs.len(), us.len()));
    }
    if order == 0 || order + 1 > xs.len() {
        return Err(KdvError::InvalidConfig(format!("cannot interpolate with order {order} on {} nodes", xs.len())));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    targets
        .iter()
        .map(|&x| {
            if x >= lo && x <= hi {
                interpolate_at(xs, us, x, order, stencil).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Interpolates the advanced layer onto `target` nodes (same time as `advanced`).
pub fn project_layer(
    advanced: &MeshLayer,
    target: &[f64],
    order: usize,
    stencil: ProjectionStencil,
    boundary: &BoundaryKind,
) -> Result<MeshLayer> {
    if order == 0 {
        return Err(KdvError::InvalidConfig("projection order must be at least 1".into()));
    }
    let (xs, us) = covering_arrays(advanced, boundary)?;
    if order + 1 > xs.len() {
        return Err(KdvError::InvalidConfig(format!("order {order} exceeds the available nodes")));
    }
    let values = target
        .iter()
        .map(|&x| interpolate_at(&xs, &us, x, order, stencil))
        .collect::<Result<Vec<_>>>()?;
    MeshLayer::new(advanced.time, target.to_vec(), values)
}
