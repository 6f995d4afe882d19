//! A single deterministic experiment: initial data, mesh, scheme, reference and reporting.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use kdv_core::diagnostics::{discrete_momentum, linf_error, rmse};
use kdv_core::driver::{simulate, step_count};
use kdv_core::projection::{project_layer, ProjectionStencil};
use kdv_core::{BoundaryKind, KdvError, KdvSolution, MeshLayer, MeshStrategy, SchemeConfig, SchemeKind};

use crate::error::HarnessError;
use crate::solitons::{soliton_count, soliton_count_periodic};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Exact(KdvSolution),
    /// `amplitude · cos(wavenumber · x)`.
    Cosine { amplitude: f64, wavenumber: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Nodes `start + i L / N`, `i = 0..N`.
    Periodic { start: f64, period: f64 },
    /// Nodes `a + i (b - a) / (N - 1)`, both ends included.
    Interval { a: f64, b: f64 },
}

impl Domain {
    pub fn nodes(&self, n: usize) -> Vec<f64> {
        match *self {
            Domain::Periodic { start, period } => (0..n).map(|i| start + period * i as f64 / n as f64).collect(),
            Domain::Interval { a, b } => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    /// Initial uniform spacing.
    pub fn spacing(&self, n: usize) -> f64 {
        match *self {
            Domain::Periodic { period, .. } => period / n as f64,
            Domain::Interval { a, b } => (b - a) / (n - 1) as f64,
        }
    }
}

/// What the numerical solution is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// The exact solution used for the initial data.
    Exact,
    /// A fine fixed-mesh run of the standard ten-point scheme, interpolated onto the run's nodes.
    HighResolution { n: usize, dt: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub initial: InitialData,
    pub domain: Domain,
    pub n: usize,
    pub t0: f64,
    pub t_final: f64,
    /// Scheme, time step, dispersion and mesh strategy. The boundary is derived from
    /// `domain` and `initial` when the experiment is built.
    pub scheme: SchemeConfig,
    pub reference: Reference,
    pub report_every: usize,
    pub soliton_threshold: f64,
}

/// Builder defaults shared by the presets and the config loader.
impl Experiment {
    pub fn new(
        name: impl Into<String>,
        initial: InitialData,
        domain: Domain,
        n: usize,
        (t0, t_final, dt): (f64, f64, f64),
        kind: SchemeKind,
        strategy: MeshStrategy,
    ) -> Result<Self, HarnessError> {
        let boundary = boundary_for(&domain, &initial)?;
        let reference = match initial {
            InitialData::Exact(_) => Reference::Exact,
            InitialData::Cosine { .. } => Reference::None,
        };
        Ok(Self {
            name: name.into(),
            initial,
            domain,
            n,
            t0,
            t_final,
            scheme: SchemeConfig::new(kind, dt, boundary, strategy),
            reference,
            report_every: 100,
            soliton_threshold: 0.3,
        })
    }

    pub fn validate(&self) -> Result<usize, HarnessError> {
        if self.n < kdv_core::mesh::MIN_NODES {
            return Err(HarnessError::config(format!("n must be at least {}, got {}", kdv_core::mesh::MIN_NODES, self.n)));
        }
        if self.report_every == 0 {
            return Err(HarnessError::config("report_every must be positive"));
        }
        self.scheme.validate().map_err(HarnessError::from_core_config)?;
        if let Reference::HighResolution { n, dt } = self.reference {
            if n < kdv_core::mesh::MIN_NODES || !(dt > 0.0) {
                return Err(HarnessError::config("reference needs n >= 5 and dt > 0"));
            }
            if !matches!(self.domain, Domain::Periodic { .. }) {
                return Err(HarnessError::config("high-resolution references need a periodic domain"));
            }
        }
        if self.reference == Reference::Exact && !matches!(self.initial, InitialData::Exact(_)) {
            return Err(HarnessError::config("an exact reference needs an exact initial solution"));
        }
        step_count(self.t0, self.t_final, self.scheme.dt).map_err(HarnessError::from_core_config)
    }

    pub fn initial_layer(&self) -> Result<MeshLayer, HarnessError> {
        let nodes = self.domain.nodes(self.n);
        let layer = match &self.initial {
            InitialData::Exact(sol) => MeshLayer::from_solution(sol, self.t0, nodes),
            InitialData::Cosine { amplitude, wavenumber } => {
                MeshLayer::from_fn(self.t0, nodes, |x| amplitude * (wavenumber * x).cos())
            }
        };
        layer.map_err(HarnessError::from_core_config)
    }
}

/// Boundary condition implied by a domain and the initial data.
pub fn boundary_for(domain: &Domain, initial: &InitialData) -> Result<BoundaryKind, HarnessError> {
    match (domain, initial) {
        (Domain::Periodic { period, .. }, _) => Ok(BoundaryKind::Periodic { period: *period }),
        (Domain::Interval { .. }, InitialData::Exact(sol)) => Ok(BoundaryKind::DirichletFromExact(sol.clone())),
        (Domain::Interval { .. }, _) => Err(HarnessError::config("interval domains need an exact solution for boundary data")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub step: usize,
    pub time: f64,
    pub rmse: f64,
    pub linf: f64,
    pub momentum: f64,
    pub min_spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abort {
    pub step: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub scheme: SchemeKind,
    pub strategy: MeshStrategy,
    pub n: usize,
    pub dt: f64,
    pub rows: Vec<ReportRow>,
    /// Last layer reached (the final one, or the one before an abort).
    pub final_layer: MeshLayer,
    pub abort: Option<Abort>,
    /// Final-time errors (NaN without a reference or after an abort).
    pub rmse: f64,
    pub linf: f64,
    /// `|M(T) - M(t0)|`.
    pub momentum_drift: f64,
    pub solitons: usize,
}

impl ExperimentReport {
    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }
}

/// Numerical or exact reference values at the layer's nodes.
fn reference_values(exp: &Experiment, layer: &MeshLayer) -> Result<Option<Vec<f64>>, HarnessError> {
    match (exp.reference, &exp.initial) {
        (Reference::Exact, InitialData::Exact(sol)) => layer
            .nodes
            .iter()
            .map(|&x| sol.evaluate(layer.time, x))
            .collect::<kdv_core::Result<Vec<_>>>()
            .map(Some)
            .map_err(HarnessError::Numerical),
        (Reference::HighResolution { n, dt }, _) => {
            let fine = high_resolution_reference(exp, n, dt)?;
            let projected = project_layer(&fine, &layer.nodes, 3, ProjectionStencil::Contiguous, &exp.scheme.boundary)
                .map_err(HarnessError::Numerical)?;
            Ok(Some(projected.values))
        }
        _ => Ok(None),
    }
}

type ReferenceCache = Mutex<HashMap<String, Arc<OnceLock<Result<MeshLayer, HarnessError>>>>>;

/// Final layer of the fine standard run, computed once per process for identical parameters.
fn high_resolution_reference(exp: &Experiment, n: usize, dt: f64) -> Result<MeshLayer, HarnessError> {
    static CACHE: OnceLock<ReferenceCache> = OnceLock::new();
    let key = format!(
        "{:?}|{:?}|{n}|{dt}|{}|{}|{}",
        exp.initial, exp.domain, exp.t0, exp.t_final, exp.scheme.dispersion
    );
    let slot = {
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(map.entry(key).or_default())
    };
    slot.get_or_init(|| {
        let mut fine = exp.clone();
        fine.name = format!("{}_reference", exp.name);
        fine.n = n;
        fine.scheme = SchemeConfig {
            kind: SchemeKind::StandardTrapezoidalTen,
            dt,
            mesh_strategy: MeshStrategy::Fixed,
            ..exp.scheme.clone()
        };
        fine.reference = Reference::None;
        let steps = fine.validate()?;
        let initial = fine.initial_layer()?;
        simulate(&initial, &fine.scheme, steps, |_, _| {}).map_err(HarnessError::Numerical)
    })
    .clone()
}

fn row(step: usize, layer: &MeshLayer, exact: Option<&[f64]>, boundary: &BoundaryKind) -> Result<ReportRow, HarnessError> {
    let (r, l) = match exact {
        Some(e) => (
            rmse(&layer.values, e).map_err(HarnessError::Numerical)?,
            linf_error(&layer.values, e).map_err(HarnessError::Numerical)?,
        ),
        None => (f64::NAN, f64::NAN),
    };
    Ok(ReportRow {
        step,
        time: layer.time,
        rmse: r,
        linf: l,
        momentum: discrete_momentum(layer, boundary),
        min_spacing: layer.min_spacing(boundary),
    })
}

/// Runs an experiment. Numerical aborts are part of the report; configuration
/// problems are errors.
pub fn run(exp: &Experiment) -> Result<ExperimentReport, HarnessError> {
    let steps = exp.validate()?;
    let initial = exp.initial_layer()?;
    let boundary = &exp.scheme.boundary;
    // Exact references are cheap at every reported step; numerical ones only at the end.
    let per_step_exact = exp.reference == Reference::Exact;
    let mut rows = Vec::new();
    let mut last = initial.clone();
    let mut observer_error = None;
    let outcome = simulate(&initial, &exp.scheme, steps, |k, layer| {
        if k % exp.report_every == 0 || k == steps {
            let exact = if per_step_exact { reference_values(exp, layer) } else { Ok(None) };
            match exact.and_then(|e| row(k, layer, e.as_deref(), boundary)) {
                Ok(r) => rows.push(r),
                Err(e) => {
                    observer_error.get_or_insert(e);
                }
            }
        }
        last = layer.clone();
    });
    if let Some(e) = observer_error {
        return Err(e);
    }
    let momentum0 = discrete_momentum(&initial, boundary);
    let abort = match outcome {
        Ok(_) => None,
        Err(KdvError::Aborted { step, source }) => Some(Abort { step, message: source.to_string() }),
        Err(e) => return Err(HarnessError::from_core_config(e)),
    };
    let (rmse_final, linf_final) = if abort.is_none() {
        match reference_values(exp, &last)? {
            Some(e) => (
                rmse(&last.values, &e).map_err(HarnessError::Numerical)?,
                linf_error(&last.values, &e).map_err(HarnessError::Numerical)?,
            ),
            None => (f64::NAN, f64::NAN),
        }
    } else {
        (f64::NAN, f64::NAN)
    };
    if let Some(r) = rows.last_mut() {
        if r.step == steps && abort.is_none() {
            r.rmse = rmse_final;
            r.linf = linf_final;
        }
    }
    Ok(ExperimentReport {
        name: exp.name.clone(),
        scheme: exp.scheme.kind,
        strategy: exp.scheme.mesh_strategy,
        n: exp.n,
        dt: exp.scheme.dt,
        rows,
        momentum_drift: (discrete_momentum(&last, boundary) - momentum0).abs(),
        solitons: if boundary.is_periodic() {
            soliton_count_periodic(&last, exp.soliton_threshold)
        } else {
            soliton_count(&last, exp.soliton_threshold)
        },
        final_layer: last,
        abort,
        rmse: rmse_final,
        linf: linf_final,
    })
}
