//! Time steppers on moving meshes.
//!
//! Notation: `h_i = x_{i+1} - x_i`, `Du_i = (u_{i+1} - u_i) / h_i` and
//! `S_i = 2 (Du_i - Du_{i-1}) / (h_i + h_{i-1})`, a second difference.
//! The invariant dispersive operator at node `i` is
//! `(S_{i+1} - S_i) / (2 h_i) + (S_i - S_{i-1}) / (2 h_{i-1})`.
//!
//! All steppers take the current layer and the node positions of the next
//! layer (chosen by the mesh strategy) and return the next nodal values.

use crate::banded::PentaMatrix;
use crate::error::{KdvError, Result};
use crate::mesh::{
    check_mesh, extend_nodes, extend_values, ghost_values, BoundaryKind, MeshAnchor, MeshLayer,
    MonitorKind, GHOSTS,
};
use crate::projection::ProjectionStencil;
use crate::solutions::GroupElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Forward Euler, centered differences, uniform fixed mesh.
    StandardFTCS,
    /// Ten-point trapezoidal scheme on a uniform fixed mesh with the advective
    /// factor frozen at level `n`. Not Galilean invariant.
    StandardTrapezoidalTen,
    /// Explicit scheme on five points with a one-sided dispersive difference.
    InvariantExplicitFive,
    InvariantExplicitSix,
    InvariantImplicitSix,
    InvariantTrapezoidalTen,
    MomentumConservingInvariant,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        Self::StandardFTCS,
        Self::StandardTrapezoidalTen,
        Self::InvariantExplicitFive,
        Self::InvariantExplicitSix,
        Self::InvariantImplicitSix,
        Self::InvariantTrapezoidalTen,
        Self::MomentumConservingInvariant,
    ];

    /// Standard kinds only make sense on a fixed uniform mesh.
    pub fn requires_fixed_mesh(self) -> bool {
        matches!(self, Self::StandardFTCS | Self::StandardTrapezoidalTen)
    }

    /// Whether the scheme commutes with the full symmetry group (given an invariant mesh strategy).
    pub fn is_invariant(self) -> bool {
        !self.requires_fixed_mesh()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::StandardFTCS => "standard_ftcs",
            Self::StandardTrapezoidalTen => "standard_trapezoidal_ten",
            Self::InvariantExplicitFive => "invariant_explicit_five",
            Self::InvariantExplicitSix => "invariant_explicit_six",
            Self::InvariantImplicitSix => "invariant_implicit_six",
            Self::InvariantTrapezoidalTen => "invariant_trapezoidal_ten",
            Self::MomentumConservingInvariant => "momentum_conserving",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// How the next layer's nodes are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshStrategy {
    Fixed,
    Lagrangian,
    /// Lagrangian step followed by interpolation back onto the old nodes.
    EvolutionProjection { order: usize, stencil: ProjectionStencil },
    Adaptive(MonitorKind),
}

impl MeshStrategy {
    pub fn evolution_projection() -> Self {
        Self::EvolutionProjection { order: 2, stencil: ProjectionStencil::Contiguous }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Constant time step `Δτ`.
    pub dt: f64,
    /// Coefficient `δ²` of the dispersive term.
    pub dispersion: f64,
    pub boundary: BoundaryKind,
    pub mesh_strategy: MeshStrategy,
    /// End-node motion for adaptive meshes.
    pub anchor: MeshAnchor,
    /// Implicitness of the dispersive flux in the momentum-conserving scheme:
    /// 0 evaluates it at the old level only, 0.5 averages both levels.
    pub theta: f64,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, dt: f64, boundary: BoundaryKind, mesh_strategy: MeshStrategy) -> Self {
        Self {
            kind,
            dt,
            dispersion: 1.0,
            boundary,
            mesh_strategy,
            anchor: MeshAnchor::Pinned,
            theta: 0.5,
        }
    }

    pub fn with_dispersion(mut self, dispersion: f64) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn with_anchor(mut self, anchor: MeshAnchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KdvError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return bad(format!("dispersion must be positive, got {}", self.dispersion));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        if self.kind.requires_fixed_mesh() && self.mesh_strategy != MeshStrategy::Fixed {
            return bad(format!("{} requires a fixed mesh", self.kind.name()));
        }
        if let MeshStrategy::EvolutionProjection { order, .. } = self.mesh_strategy {
            if order == 0 {
                return bad("projection order must be at least 1".into());
            }
        }
        if let MeshStrategy::Adaptive(monitor) = self.mesh_strategy {
            if !(monitor.alpha() >= 0.0) {
                return bad(format!("monitor alpha must be non-negative, got {}", monitor.alpha()));
            }
        }
        if let BoundaryKind::Periodic { period } = self.boundary {
            if !(period > 0.0) {
                return bad(format!("period must be positive, got {period}"));
            }
        }
        Ok(())
    }

    /// The configuration seen after applying a group element: `Δτ` scales by `e^{3d}`.
    pub fn transformed(&self, element: &GroupElement) -> Self {
        Self {
            dt: self.dt * element.time_scale(),
            boundary: self.boundary.transformed(element),
            ..self.clone()
        }
    }
}

/// The eighteen difference invariants on the ten-point stencil around node `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceInvariants(pub [f64; 18]);

impl DifferenceInvariants {
    /// Invariant `I_k`, 1-based as in the usual numbering.
    pub fn get(&self, k: usize) -> f64 {
        self.0[k - 1]
    }
}

/// Evaluates `I_1 … I_18` between two consecutive layers at node `i`.
pub fn compute_invariants(
    prev: &MeshLayer,
    next: &MeshLayer,
    i: usize,
    boundary: &BoundaryKind,
) -> Result<DifferenceInvariants> {
    let n = prev.len();
    if next.len() != n {
        return Err(KdvError::LengthMismatch(next.len(), n));
    }
    if i >= n {
        return Err(KdvError::InvalidLayer(format!("index {i} out of range")));
    }
    let dt = next.time - prev.time;
    let xa = extend_nodes(&prev.nodes, boundary);
    let ua = extend_values(&xa, &prev.values, prev.time, boundary)?;
    let xb = extend_nodes(&next.nodes, boundary);
    let ub = extend_values(&xb, &next.values, next.time, boundary)?;
    let j = i + GHOSTS;
    let h = |x: &[f64], k: usize| x[k + 1] - x[k];
    for k in j - 2..j + 2 {
        for x in [&xa, &xb] {
            let spacing = h(x, k);
            if !(spacing > 0.0) {
                return Err(KdvError::Tangling { index: k.saturating_sub(GHOSTS), spacing });
            }
        }
    }
    let du = |x: &[f64], u: &[f64], k: usize| (u[k + 1] - u[k]) / h(x, k);
    let hi = h(&xa, j);
    Ok(DifferenceInvariants([
        h(&xa, j - 1) / hi,
        h(&xa, j + 1) / hi,
        h(&xa, j - 2) / hi,
        h(&xb, j) / hi,
        h(&xb, j - 1) / hi,
        h(&xb, j + 1) / hi,
        h(&xb, j - 2) / hi,
        hi.powi(3) / dt,
        (xb[j] - xa[j] - dt * ua[j]) / hi,
        (ub[j] - ua[j]) * hi * hi,
        dt * du(&xa, &ua, j),
        dt * du(&xa, &ua, j + 1),
        dt * du(&xa, &ua, j - 1),
        dt * du(&xa, &ua, j - 2),
        dt * du(&xb, &ub, j),
        dt * du(&xb, &ub, j + 1),
        dt * du(&xb, &ub, j - 1),
        dt * du(&xb, &ub, j - 2),
    ]))
}

/// Adds `w · S_k` to a five-entry row centred at extended index `j`.
fn add_second_difference(row: &mut [f64; 5], x: &[f64], j: usize, k: usize, w: f64) {
    let (hm, hp) = (x[k] - x[k - 1], x[k + 1] - x[k]);
    let scale = 2.0 * w / (hp + hm);
    let (a, b) = (scale / hp, scale / hm);
    let base = k + 1 - j; // row slot of u_{k-1}
    row[base] += b;
    row[base + 1] -= a + b;
    row[base + 2] += a;
}

/// Coefficients of the invariant dispersive operator at extended index `j`.
pub fn dispersion_row(x: &[f64], j: usize) -> [f64; 5] {
    let p = 0.5 / (x[j + 1] - x[j]);
    let q = 0.5 / (x[j] - x[j - 1]);
    let mut row = [0.0; 5];
    add_second_difference(&mut row, x, j, j + 1, p);
    add_second_difference(&mut row, x, j, j, q - p);
    add_second_difference(&mut row, x, j, j - 1, -q);
    row
}

/// One-sided dispersive operator `(S_{i+1} - S_i) / h_i` on nodes `i-1 … i+2`.
pub fn dispersion_row_five(x: &[f64], j: usize) -> [f64; 5] {
    let p = 1.0 / (x[j + 1] - x[j]);
    let mut row = [0.0; 5];
    add_second_difference(&mut row, x, j, j + 1, p);
    add_second_difference(&mut row, x, j, j, -p);
    row
}

/// Coefficients of `(Du_i + Du_{i-1}) / 2`.
pub fn advection_row(x: &[f64], j: usize) -> [f64; 5] {
    let (hm, hp) = (x[j] - x[j - 1], x[j + 1] - x[j]);
    [0.0, -0.5 / hm, 0.5 / hm - 0.5 / hp, 0.5 / hp, 0.0]
}

/// Coefficients of the conservative dispersive flux difference `S_{i+1} - S_{i-1}`.
pub fn flux_difference_row(x: &[f64], j: usize) -> [f64; 5] {
    let mut row = [0.0; 5];
    add_second_difference(&mut row, x, j, j + 1, 1.0);
    add_second_difference(&mut row, x, j, j - 1, -1.0);
    row
}

fn apply_row(row: &[f64; 5], u: &[f64], j: usize) -> f64 {
    row.iter().zip(&u[j - 2..=j + 2]).map(|(c, v)| c * v).sum()
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(KdvError::Overflow { index }),
        None => Ok(()),
    }
}

fn check_x_next(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<()> {
    if x_next.len() != layer.len() {
        return Err(KdvError::LengthMismatch(x_next.len(), layer.len()));
    }
    check_mesh(x_next, &cfg.boundary)
}

fn require_fixed(layer: &MeshLayer, x_next: &[f64]) -> Result<()> {
    if layer.nodes.as_slice() != x_next {
        return Err(KdvError::InvalidConfig("standard schemes need a stationary mesh".into()));
    }
    Ok(())
}

/// Both levels of a step in extended (ghosted) form.
struct StepData {
    xa: Vec<f64>,
    ua: Vec<f64>,
    xb: Vec<f64>,
    /// Ghost values `[u_{-2}, u_{-1}, u_N, u_{N+1}]` at the new level (Dirichlet only).
    ghosts_next: Option<[f64; 4]>,
    n: usize,
}

impl StepData {
    fn new(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig, implicit: bool) -> Result<Self> {
        let xa = extend_nodes(&layer.nodes, &cfg.boundary);
        let ua = extend_values(&xa, &layer.values, layer.time, &cfg.boundary)?;
        let xb = extend_nodes(x_next, &cfg.boundary);
        let ghosts_next = match (&cfg.boundary, implicit) {
            (BoundaryKind::DirichletFromExact(_), true) => Some(ghost_values(
                &xb,
                &layer.values,
                layer.time + cfg.dt,
                &cfg.boundary,
            )?),
            _ => None,
        };
        Ok(Self { xa, ua, xb, ghosts_next, n: layer.len() })
    }

    /// Grid velocity at extended index `j`.
    fn grid_velocity(&self, j: usize, dt: f64) -> f64 {
        (self.xb[j] - self.xa[j]) / dt
    }

    /// Solves `Σ_k rows[i][k] u_{i+k-2} = rhs_i`, moving known Dirichlet ghosts to the right.
    /// `refine` adds one refinement step, needed where the row sums carry a conservation law.
    fn solve(&self, rows: Vec<[f64; 5]>, mut rhs: Vec<f64>, periodic: bool, refine: bool) -> Result<Vec<f64>> {
        let n = self.n;
        let mut rows = rows;
        if let Some(g) = self.ghosts_next {
            let ghost_at = |e: usize| if e < GHOSTS { g[e] } else { g[e - n] };
            for (i, row) in rows.iter_mut().enumerate() {
                for (k, c) in row.iter_mut().enumerate() {
                    let e = i + k; // extended index of the referenced value
                    if e < GHOSTS || e >= n + GHOSTS {
                        rhs[i] -= *c * ghost_at(e);
                        *c = 0.0;
                    }
                }
            }
        }
        let matrix = PentaMatrix::new(rows, periodic);
        if refine {
            matrix.solve_refined(&rhs)
        } else {
            matrix.solve(&rhs)
        }
    }
}

/// The family `u' + θΔτ(f G' + δ² D') = u - (1-θ)Δτ(f G + δ² D)` with `f_i = u^n_i - ẋ_i`
/// (or a supplied factor), `G` the averaged first difference and `D` the dispersive operator.
fn theta_step(
    layer: &MeshLayer,
    x_next: &[f64],
    cfg: &SchemeConfig,
    theta: f64,
    five_point: bool,
    factor: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_x_next(layer, x_next, cfg)?;
    let data = StepData::new(layer, x_next, cfg, theta > 0.0)?;
    let (n, dt, delta2) = (layer.len(), cfg.dt, cfg.dispersion);
    let disp = if five_point { dispersion_row_five } else { dispersion_row };
    let mut rows = Vec::with_capacity(if theta > 0.0 { n } else { 0 });
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let j = i + GHOSTS;
        let f = match factor {
            Some(f) => f[i],
            None => data.ua[j] - data.grid_velocity(j, dt),
        };
        let explicit = f * apply_row(&advection_row(&data.xa, j), &data.ua, j)
            + delta2 * apply_row(&disp(&data.xa, j), &data.ua, j);
        rhs.push(data.ua[j] - (1.0 - theta) * dt * explicit);
        if theta > 0.0 {
            let adv = advection_row(&data.xb, j);
            let dis = disp(&data.xb, j);
            let mut row = [0.0; 5];
            for k in 0..5 {
                row[k] = theta * dt * (f * adv[k] + delta2 * dis[k]);
            }
            row[2] += 1.0;
            rows.push(row);
        }
    }
    let values = if theta > 0.0 {
        data.solve(rows, rhs, cfg.boundary.is_periodic(), false)?
    } else {
        rhs
    };
    check_finite(&values)?;
    Ok(values)
}

/// Explicit six-point invariant scheme (forward Euler in computational time).
pub fn step_explicit_six(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    theta_step(layer, x_next, cfg, 0.0, false, None)
}

/// Explicit five-point invariant scheme with the forward-biased dispersive difference.
pub fn step_explicit_five(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    theta_step(layer, x_next, cfg, 0.0, true, None)
}

/// Implicit six-point invariant scheme (backward Euler analogue).
pub fn step_implicit_six(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    theta_step(layer, x_next, cfg, 1.0, false, None)
}

/// Ten-point invariant scheme: trapezoidal average of both levels.
pub fn step_trapezoidal_ten(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    theta_step(layer, x_next, cfg, 0.5, false, None)
}

fn uniform_spacing(layer: &MeshLayer, cfg: &SchemeConfig) -> Result<f64> {
    let x = extend_nodes(&layer.nodes, &cfg.boundary);
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    for w in x.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(KdvError::InvalidConfig("standard schemes need a uniform mesh".into()));
        }
    }
    Ok(h)
}

/// Forward in time, centered in space, on a uniform stationary mesh.
pub fn step_standard_ftcs(layer: &MeshLayer, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    let h = uniform_spacing(layer, cfg)?;
    let x = extend_nodes(&layer.nodes, &cfg.boundary);
    let u = extend_values(&x, &layer.values, layer.time, &cfg.boundary)?;
    let (dt, delta2) = (cfg.dt, cfg.dispersion);
    let values: Vec<f64> = (GHOSTS..layer.len() + GHOSTS)
        .map(|j| {
            let adv = u[j] * (u[j + 1] - u[j - 1]) / (2.0 * h);
            let disp = (u[j + 2] - 2.0 * u[j + 1] + 2.0 * u[j - 1] - u[j - 2]) / (2.0 * h * h * h);
            u[j] - dt * (adv + delta2 * disp)
        })
        .collect();
    check_finite(&values)?;
    Ok(values)
}

/// Standard ten-point scheme on a uniform stationary mesh.
///
/// Differences are averaged over both levels; the advective factor is `u^n`,
/// which keeps each step a single linear solve.
pub fn step_standard_trapezoidal(layer: &MeshLayer, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    uniform_spacing(layer, cfg)?;
    let nodes = layer.nodes.clone();
    theta_step(layer, &nodes, cfg, 0.5, false, Some(&layer.values))
}

/// Momentum-conserving invariant scheme in flux form:
/// `(h'_i + h'_{i-1}) u'_i = (h_i + h_{i-1}) u_i + Δτ [ẋ_{i+1} u_{i+1} - ẋ_{i-1} u_{i-1}
///  - ½(u_{i+1}² - u_{i-1}²) - δ² ((1-θ)(S_{i+1} - S_{i-1}) + θ(S'_{i+1} - S'_{i-1}))]`.
pub fn step_momentum_conserving(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    check_x_next(layer, x_next, cfg)?;
    let theta = cfg.theta;
    let data = StepData::new(layer, x_next, cfg, theta > 0.0)?;
    let (n, dt, delta2) = (layer.len(), cfg.dt, cfg.dispersion);
    let (xa, ua, xb) = (&data.xa, &data.ua, &data.xb);
    let mut rows = Vec::with_capacity(if theta > 0.0 { n } else { 0 });
    let mut rhs = Vec::with_capacity(n);
    let mut measure_next = Vec::with_capacity(n);
    for i in 0..n {
        let j = i + GHOSTS;
        let measure = xa[j + 1] - xa[j - 1];
        let mesh_flux = data.grid_velocity(j + 1, dt) * ua[j + 1] - data.grid_velocity(j - 1, dt) * ua[j - 1];
        let nonlinear = 0.5 * (ua[j + 1] * ua[j + 1] - ua[j - 1] * ua[j - 1]);
        let dispersive = apply_row(&flux_difference_row(xa, j), ua, j);
        rhs.push(measure * ua[j] + dt * (mesh_flux - nonlinear - (1.0 - theta) * delta2 * dispersive));
        let next_measure = xb[j + 1] - xb[j - 1];
        measure_next.push(next_measure);
        if theta > 0.0 {
            let flux = flux_difference_row(xb, j);
            let mut row = [0.0; 5];
            for k in 0..5 {
                row[k] = theta * dt * delta2 * flux[k];
            }
            row[2] += next_measure;
            rows.push(row);
        }
    }
    let values = if theta > 0.0 {
        data.solve(rows, rhs, cfg.boundary.is_periodic(), true)?
    } else {
        rhs.iter().zip(&measure_next).map(|(r, m)| r / m).collect()
    };
    check_finite(&values)?;
    Ok(values)
}

/// Dispatches to the stepper selected by `cfg.kind`.
pub fn step_values(layer: &MeshLayer, x_next: &[f64], cfg: &SchemeConfig) -> Result<Vec<f64>> {
    match cfg.kind {
        SchemeKind::StandardFTCS => {
            require_fixed(layer, x_next)?;
            step_standard_ftcs(layer, cfg)
        }
        SchemeKind::StandardTrapezoidalTen => {
            require_fixed(layer, x_next)?;
            step_standard_trapezoidal(layer, cfg)
        }
        SchemeKind::InvariantExplicitFive => step_explicit_five(layer, x_next, cfg),
        SchemeKind::InvariantExplicitSix => step_explicit_six(layer, x_next, cfg),
        SchemeKind::InvariantImplicitSix => step_implicit_six(layer, x_next, cfg),
        SchemeKind::InvariantTrapezoidalTen => step_trapezoidal_ten(layer, x_next, cfg),
        SchemeKind::MomentumConservingInvariant => step_momentum_conserving(layer, x_next, cfg),
    }
}
