//! Mesh layers, boundary handling and node motion.
//!
//! Stencils reach two nodes to each side, so every layer can be widened into
//! an "extended" array with two ghost entries per side: periodic domains wrap
//! the nodes shifted by the period, finite domains mirror the edge spacings and
//! take ghost values from the reference solution.

use crate::banded::solve_tridiagonal;
use crate::error::{KdvError, Result};
use crate::solutions::{GroupElement, KdvSolution};

/// Smallest stencil the schemes can work on.
pub const MIN_NODES: usize = 5;
/// Ghost nodes appended on each side of an extended layer.
pub const GHOSTS: usize = 2;
/// Spacings at or below this fraction of the mean spacing count as tangled.
pub const TANGLING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    Periodic { period: f64 },
    DirichletFromExact(KdvSolution),
}

impl BoundaryKind {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Self::Periodic { .. })
    }

    pub fn validate(&self, nodes: &[f64]) -> Result<()> {
        if let Self::Periodic { period } = *self {
            let span = nodes[nodes.len() - 1] - nodes[0];
            if !(period > 0.0) || span >= period {
                return Err(KdvError::InvalidLayer(format!(
                    "periodic span {span} must be positive and below the period {period}"
                )));
            }
        }
        Ok(())
    }

    /// The boundary seen after applying a group element to the whole problem.
    pub fn transformed(&self, element: &GroupElement) -> Self {
        match self {
            Self::Periodic { period } => Self::Periodic {
                period: period * element.space_scale(),
            },
            Self::DirichletFromExact(sol) => Self::DirichletFromExact(sol.transform(*element)),
        }
    }
}

/// Mesh density function used for equidistribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonitorKind {
    /// `ρ = sqrt(1 + α (Δτ Du)²)`, built from difference invariants.
    ArcLengthInvariant { alpha: f64 },
    /// `ρ = sqrt(1 + α (Δτ u_xx)²)`, not scale invariant.
    CurvatureNonInvariant { alpha: f64 },
}

impl MonitorKind {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::ArcLengthInvariant { alpha } | Self::CurvatureNonInvariant { alpha } => alpha,
        }
    }
}

/// How the mesh is positioned when equidistribution alone leaves it free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeshAnchor {
    /// End nodes (node 0 on periodic domains) stay where they are.
    #[default]
    Pinned,
    /// End nodes (node 0 on periodic domains) move with the fluid velocity.
    Lagrangian,
}

/// One time level: node positions and nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshLayer {
    pub time: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl MeshLayer {
    pub fn new(time: f64, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(KdvError::LengthMismatch(nodes.len(), values.len()));
        }
        if nodes.len() < MIN_NODES {
            return Err(KdvError::InvalidLayer(format!(
                "need at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(i) = values.iter().position(|u| !u.is_finite()) {
            return Err(KdvError::Overflow { index: i });
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(KdvError::InvalidLayer("non-finite node position".into()));
        }
        check_ordering(&nodes, None)?;
        Ok(Self { time, nodes, values })
    }

    /// Samples an exact solution on the given nodes.
    pub fn from_solution(sol: &KdvSolution, time: f64, nodes: Vec<f64>) -> Result<Self> {
        let values = nodes
            .iter()
            .map(|&x| sol.evaluate(time, x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(time, nodes, values)
    }

    pub fn from_fn(time: f64, nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(time, nodes, values)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies a group element to every point `(t, x_i, u_i)` of the layer.
    pub fn transformed(&self, element: &GroupElement) -> Self {
        let mut nodes = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        let mut time = self.time;
        for (&x, &u) in self.nodes.iter().zip(&self.values) {
            let (t, xt, ut) = element.apply_point(self.time, x, u);
            time = t;
            nodes.push(xt);
            values.push(ut);
        }
        if element.reflect {
            nodes.reverse();
            values.reverse();
        }
        Self { time, nodes, values }
    }

    pub fn min_spacing(&self, boundary: &BoundaryKind) -> f64 {
        spacings(&self.nodes, boundary).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Cell widths `h_i = x_{i+1} - x_i`; periodic domains include the wrapped cell.
pub fn spacings(nodes: &[f64], boundary: &BoundaryKind) -> Vec<f64> {
    let mut h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    if let BoundaryKind::Periodic { period } = *boundary {
        h.push(nodes[0] + period - nodes[nodes.len() - 1]);
    }
    h
}

fn check_ordering(nodes: &[f64], period: Option<f64>) -> Result<()> {
    let n = nodes.len();
    let span = match period {
        Some(p) => p,
        None => nodes[n - 1] - nodes[0],
    };
    let cells = if period.is_some() { n } else { n - 1 };
    let tol = TANGLING_TOLERANCE * span.abs() / cells as f64;
    for i in 0..cells {
        let next = if i + 1 < n { nodes[i + 1] } else { nodes[0] + span };
        let h = next - nodes[i];
        if !(h > tol) {
            return Err(KdvError::Tangling { index: i, spacing: h });
        }
    }
    Ok(())
}

/// Rejects node sets that are not strictly increasing (including the periodic seam).
pub fn check_mesh(nodes: &[f64], boundary: &BoundaryKind) -> Result<()> {
    match *boundary {
        BoundaryKind::Periodic { period } => check_ordering(nodes, Some(period)),
        BoundaryKind::DirichletFromExact(_) => check_ordering(nodes, None),
    }
}

/// Node positions with two ghosts per side.
pub fn extend_nodes(nodes: &[f64], boundary: &BoundaryKind) -> Vec<f64> {
    let n = nodes.len();
    let mut ext = Vec::with_capacity(n + 2 * GHOSTS);
    match *boundary {
        BoundaryKind::Periodic { period } => {
            for j in 0..n + 2 * GHOSTS {
                let idx = j as isize - GHOSTS as isize;
                let wraps = idx.div_euclid(n as isize);
                let local = idx.rem_euclid(n as isize) as usize;
                ext.push(nodes[local] + wraps as f64 * period);
            }
        }
        BoundaryKind::DirichletFromExact(_) => {
            let (h0, h1) = (nodes[1] - nodes[0], nodes[2] - nodes[1]);
            let (hl, hl1) = (nodes[n - 1] - nodes[n - 2], nodes[n - 2] - nodes[n - 3]);
            ext.push(nodes[0] - h0 - h1);
            ext.push(nodes[0] - h0);
            ext.extend_from_slice(nodes);
            ext.push(nodes[n - 1] + hl);
            ext.push(nodes[n - 1] + hl + hl1);
        }
    }
    ext
}

/// Ghost values at the extended positions `ext_nodes` for time `time`.
///
/// Returns `[u_{-2}, u_{-1}, u_N, u_{N+1}]`; periodic domains return the
/// wrapped interior values.
pub fn ghost_values(
    ext_nodes: &[f64],
    values: &[f64],
    time: f64,
    boundary: &BoundaryKind,
) -> Result<[f64; 4]> {
    let n = values.len();
    match boundary {
        BoundaryKind::Periodic { .. } => Ok([values[n - 2], values[n - 1], values[0], values[1]]),
        BoundaryKind::DirichletFromExact(sol) => {
            let m = ext_nodes.len();
            Ok([
                sol.evaluate(time, ext_nodes[0])?,
                sol.evaluate(time, ext_nodes[1])?,
                sol.evaluate(time, ext_nodes[m - 2])?,
                sol.evaluate(time, ext_nodes[m - 1])?,
            ])
        }
    }
}

/// Values on the extended index range, ghosts included.
pub fn extend_values(
    ext_nodes: &[f64],
    values: &[f64],
    time: f64,
    boundary: &BoundaryKind,
) -> Result<Vec<f64>> {
    let g = ghost_values(ext_nodes, values, time, boundary)?;
    let mut ext = Vec::with_capacity(values.len() + 2 * GHOSTS);
    ext.extend_from_slice(&g[..2]);
    ext.extend_from_slice(values);
    ext.extend_from_slice(&g[2..]);
    Ok(ext)
}

/// Moves every node with the local fluid velocity: `x_i + Δτ u_i`.
pub fn lagrangian_advance(layer: &MeshLayer, dt: f64, boundary: &BoundaryKind) -> Result<Vec<f64>> {
    let next: Vec<f64> = layer
        .nodes
        .iter()
        .zip(&layer.values)
        .map(|(x, u)| x + dt * u)
        .collect();
    check_mesh(&next, boundary)?;
    Ok(next)
}

/// Monitor values `ρ_i`, one per node. `ρ_i` belongs to the cell right of node `i`
/// for the arc-length monitor; finite domains repeat the last interior value.
pub fn monitor_values(
    layer: &MeshLayer,
    dt: f64,
    kind: MonitorKind,
    boundary: &BoundaryKind,
) -> Vec<f64> {
    let n = layer.len();
    let (x, u) = (&layer.nodes, &layer.values);
    let periodic = match *boundary {
        BoundaryKind::Periodic { period } => Some(period),
        BoundaryKind::DirichletFromExact(_) => None,
    };
    // Periodic lookup with the period added to positions past the seam.
    let at = |i: isize| -> (f64, f64) {
        let p = periodic.unwrap_or(0.0);
        let wraps = i.div_euclid(n as isize) as f64;
        let local = i.rem_euclid(n as isize) as usize;
        (x[local] + wraps * p, u[local])
    };
    match kind {
        MonitorKind::ArcLengthInvariant { alpha } => (0..n)
            .map(|i| {
                let i = match periodic {
                    Some(_) => i as isize,
                    None => i.min(n - 2) as isize,
                };
                let ((x0, u0), (x1, u1)) = (at(i), at(i + 1));
                let slope = dt * (u1 - u0) / (x1 - x0);
                (1.0 + alpha * slope * slope).sqrt()
            })
            .collect(),
        MonitorKind::CurvatureNonInvariant { alpha } => (0..n)
            .map(|i| {
                let i = match periodic {
                    Some(_) => i as isize,
                    None => i.clamp(2, n - 3) as isize,
                };
                let (xm2, _) = at(i - 2);
                let (xm1, um1) = at(i - 1);
                let (x0, u0) = at(i);
                let (xp1, up1) = at(i + 1);
                let (xp2, up2) = at(i + 2);
                let forward = 2.0 * (up2 - u0) / (xp2 - x0);
                let centered = 2.0 * (up1 - um1) / (xp1 - xm1);
                let curvature = dt * (forward - centered) / (xp2 - x0 + xp1 - xm2);
                (1.0 + alpha * curvature * curvature).sqrt()
            })
            .collect(),
    }
}

/// Solves the discrete equidistribution principle
/// `w_i (x_{i+1} - x_i) - w_{i-1} (x_i - x_{i-1}) = 0`, `w_i = (ρ_i + ρ_{i+1}) / 2`.
///
/// Finite domains fix both end nodes and solve the tridiagonal system for the
/// interior. Periodic domains fix node 0 and the total span `L`, for which the
/// cyclic system reduces to `w_i h_i = const`.
pub fn equidistribute(
    layer: &MeshLayer,
    rho: &[f64],
    boundary: &BoundaryKind,
    anchor: MeshAnchor,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = layer.len();
    if rho.len() != n {
        return Err(KdvError::LengthMismatch(rho.len(), n));
    }
    if let Some(i) = rho.iter().position(|r| !(*r > 0.0)) {
        return Err(KdvError::InvalidLayer(format!("monitor value at {i} is not positive")));
    }
    let anchored = |i: usize| match anchor {
        MeshAnchor::Pinned => layer.nodes[i],
        MeshAnchor::Lagrangian => layer.nodes[i] + dt * layer.values[i],
    };
    let nodes = match *boundary {
        BoundaryKind::Periodic { period } => {
            let inverse: Vec<f64> = (0..n).map(|i| 2.0 / (rho[i] + rho[(i + 1) % n])).collect();
            let total: f64 = inverse.iter().sum();
            let mut nodes = Vec::with_capacity(n);
            let mut x = anchored(0);
            nodes.push(x);
            for w in &inverse[..n - 1] {
                x += period * w / total;
                nodes.push(x);
            }
            nodes
        }
        BoundaryKind::DirichletFromExact(_) => {
            let weight: Vec<f64> = (0..n - 1).map(|i| 0.5 * (rho[i] + rho[i + 1])).collect();
            let (first, last) = (anchored(0), anchored(n - 1));
            let m = n - 2;
            let mut lower = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for r in 0..m {
                let i = r + 1;
                lower[r] = -weight[i - 1];
                diag[r] = weight[i - 1] + weight[i];
                upper[r] = -weight[i];
            }
            rhs[0] += weight[0] * first;
            rhs[m - 1] += weight[n - 2] * last;
            let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let mut nodes = Vec::with_capacity(n);
            nodes.push(first);
            nodes.extend(interior);
            nodes.push(last);
            nodes
        }
    };
    check_mesh(&nodes, boundary)?;
    Ok(nodes)
}

/// Equidistribution residuals `w_i h_i - w_{i-1} h_{i-1}` at interior nodes.
pub fn equidistribution_residuals(nodes: &[f64], rho: &[f64], boundary: &BoundaryKind) -> Vec<f64> {
    let n = nodes.len();
    let h = spacings(nodes, boundary);
    let cells = h.len();
    let weight = |i: usize| 0.5 * (rho[i] + rho[(i + 1) % n]);
    let range = if boundary.is_periodic() { 0..n } else { 1..n - 1 };
    range
        .map(|i| {
            let prev = (i + cells - 1) % cells;
            weight(i) * h[i] - weight(prev) * h[prev]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn dirichlet() -> BoundaryKind {
        BoundaryKind::DirichletFromExact(KdvSolution::Constant { value: 0.0 })
    }

    #[test]
    fn layer_validation() {
        assert!(matches!(
            MeshLayer::new(0.0, vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4]),
            Err(KdvError::InvalidLayer(_))
        ));
        assert!(matches!(
            MeshLayer::new(0.0, vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0; 6]),
            Err(KdvError::LengthMismatch(5, 6))
        ));
        assert!(matches!(
            MeshLayer::new(0.0, vec![0.0, 1.0, 1.0, 3.0, 4.0], vec![0.0; 5]),
            Err(KdvError::Tangling { index: 1, .. })
        ));
    }

    #[test]
    fn lagrangian_motion() {
        let nodes = uniform(6, 1.0, 6.0);
        let still = MeshLayer::new(0.0, nodes.clone(), vec![0.0; 6]).unwrap();
        assert_eq!(lagrangian_advance(&still, 0.5, &dirichlet()).unwrap(), nodes);

        let t = 2.0;
        let ramp = MeshLayer::from_fn(t, nodes.clone(), |x| x / t).unwrap();
        let moved = lagrangian_advance(&ramp, 0.1, &dirichlet()).unwrap();
        for (new, old) in moved.iter().zip(&nodes) {
            assert!((new - old * (1.0 + 0.1 / t)).abs() < 1e-14);
        }

        let nodes = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let crossing = MeshLayer::from_fn(0.0, nodes, |x| -x).unwrap();
        assert!(matches!(
            lagrangian_advance(&crossing, 2.0, &dirichlet()),
            Err(KdvError::Tangling { index: 0, .. })
        ));
    }

    #[test]
    fn monitors_on_simple_data() {
        let nodes = uniform(9, 0.0, 1.0);
        let boundaries = [dirichlet(), BoundaryKind::Periodic { period: 1.125 }];
        let flat = MeshLayer::new(0.0, nodes.clone(), vec![2.5; 9]).unwrap();
        for boundary in &boundaries {
            for kind in [
                MonitorKind::ArcLengthInvariant { alpha: 10.0 },
                MonitorKind::CurvatureNonInvariant { alpha: 10.0 },
            ] {
                assert!(monitor_values(&flat, 0.1, kind, boundary).iter().all(|&r| r == 1.0));
            }
        }
        let linear = MeshLayer::from_fn(0.0, nodes, |x| x).unwrap();
        let arc = monitor_values(&linear, 0.1, MonitorKind::ArcLengthInvariant { alpha: 1.0 }, &dirichlet());
        assert!(arc.iter().all(|r| (r - 1.01f64.sqrt()).abs() < 1e-14));
        let curv = monitor_values(&linear, 0.1, MonitorKind::CurvatureNonInvariant { alpha: 1e6 }, &dirichlet());
        assert!(curv.iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_monitor_gives_uniform_mesh() {
        let nodes = vec![0.0, 0.1, 0.5, 0.55, 0.7, 1.0];
        let layer = MeshLayer::new(0.0, nodes, vec![0.0; 6]).unwrap();
        let out = equidistribute(&layer, &[3.0; 6], &dirichlet(), MeshAnchor::Pinned, 0.1).unwrap();
        for (i, x) in out.iter().enumerate() {
            assert!((x - i as f64 / 5.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equidistribution_matches_dense_solve() {
        let layer = MeshLayer::new(0.0, uniform(5, 0.0, 1.0), vec![0.0; 5]).unwrap();
        let rho = [1.0, 1.0, 3.0, 1.0, 1.0];
        let out = equidistribute(&layer, &rho, &dirichlet(), MeshAnchor::Pinned, 0.1).unwrap();

        let w: Vec<f64> = (0..4).map(|i| 0.5 * (rho[i] + rho[i + 1])).collect();
        let mut a = nalgebra::DMatrix::<f64>::zeros(5, 5);
        let mut b = nalgebra::DVector::<f64>::zeros(5);
        a[(0, 0)] = 1.0;
        a[(4, 4)] = 1.0;
        b[4] = 1.0;
        for i in 1..4 {
            a[(i, i - 1)] = -w[i - 1];
            a[(i, i)] = w[i - 1] + w[i];
            a[(i, i + 1)] = -w[i];
        }
        let dense = a.lu().solve(&b).unwrap();
        for i in 0..5 {
            assert!((out[i] - dense[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn ramp_data_equidistributes_uniformly() {
        let t = 1.5;
        let layer = MeshLayer::from_fn(t, uniform(35, 0.0, 20.0), |x| x / t).unwrap();
        for kind in [
            MonitorKind::ArcLengthInvariant { alpha: 5e6 },
            MonitorKind::CurvatureNonInvariant { alpha: 1e6 },
        ] {
            let rho = monitor_values(&layer, 1e-3, kind, &dirichlet());
            let out = equidistribute(&layer, &rho, &dirichlet(), MeshAnchor::Pinned, 1e-3).unwrap();
            let h: Vec<f64> = out.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(h.iter().all(|hi| (hi - h[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn periodic_equidistribution_residual() {
        let n = 24;
        let period = 3.0;
        let nodes: Vec<f64> = (0..n).map(|i| 0.2 + period * i as f64 / n as f64).collect();
        let layer = MeshLayer::from_fn(0.0, nodes, |x| (2.0 * std::f64::consts::PI * x / period).sin() * 4.0).unwrap();
        let boundary = BoundaryKind::Periodic { period };
        let rho = monitor_values(&layer, 0.05, MonitorKind::ArcLengthInvariant { alpha: 50.0 }, &boundary);
        let out = equidistribute(&layer, &rho, &boundary, MeshAnchor::Pinned, 0.05).unwrap();
        assert_eq!(out[0], 0.2);
        for r in equidistribution_residuals(&out, &rho, &boundary) {
            assert!(r.abs() <= 1e-10 * period);
        }
    }

    #[test]
    fn extended_nodes_wrap_and_mirror() {
        let nodes = vec![0.0, 1.0, 2.0, 3.5, 4.0];
        let ext = extend_nodes(&nodes, &BoundaryKind::Periodic { period: 5.0 });
        assert_eq!(ext, vec![-1.5, -1.0, 0.0, 1.0, 2.0, 3.5, 4.0, 5.0, 6.0]);
        let ext = extend_nodes(&nodes, &dirichlet());
        assert_eq!(ext, vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.5, 4.0, 4.5, 6.0]);
    }
}
