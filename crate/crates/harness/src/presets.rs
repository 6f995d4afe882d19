//! Named experiments: the benchmark runs and the derived quantities computed from them.

use rayon::prelude::*;

use kdv_core::diagnostics::{convergence_order, frame_discrepancy};
use kdv_core::elliptic::complete_k;
use kdv_core::{GroupElement, KdvSolution, MeshAnchor, MeshStrategy, MonitorKind, SchemeKind};

use crate::error::HarnessError;
use crate::experiment::{run, Domain, Experiment, ExperimentReport, InitialData, Reference};

/// A scheme together with its mesh strategy, as one row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variant {
    pub label: &'static str,
    pub kind: SchemeKind,
    pub strategy: MeshStrategy,
    pub anchor: MeshAnchor,
}

impl Variant {
    pub const fn new(label: &'static str, kind: SchemeKind, strategy: MeshStrategy) -> Self {
        Self { label, kind, strategy, anchor: MeshAnchor::Pinned }
    }

    pub const fn anchored(mut self, anchor: MeshAnchor) -> Self {
        self.anchor = anchor;
        self
    }
}

use SchemeKind::{
    InvariantExplicitFive, InvariantExplicitSix, InvariantTrapezoidalTen as Trapezoidal,
    MomentumConservingInvariant as MomentumConserving, StandardFTCS, StandardTrapezoidalTen,
};

const fn projection() -> MeshStrategy {
    MeshStrategy::EvolutionProjection { order: 2, stencil: kdv_core::projection::ProjectionStencil::Contiguous }
}

const fn arc_length(alpha: f64) -> MeshStrategy {
    MeshStrategy::Adaptive(MonitorKind::ArcLengthInvariant { alpha })
}

const fn curvature(alpha: f64) -> MeshStrategy {
    MeshStrategy::Adaptive(MonitorKind::CurvatureNonInvariant { alpha })
}

pub const STANDARD: Variant = Variant::new("standard", StandardTrapezoidalTen, MeshStrategy::Fixed);
pub const STANDARD_MCONS: Variant = Variant::new("standard_mcons", MomentumConserving, MeshStrategy::Fixed);
pub const STANDARD_FTCS: Variant = Variant::new("standard_ftcs", StandardFTCS, MeshStrategy::Fixed);
pub const EXPLICIT_FIVE: Variant = Variant::new("explicit_five_lagrangian", InvariantExplicitFive, MeshStrategy::Lagrangian);
pub const EXPLICIT_SIX: Variant = Variant::new("explicit_six_lagrangian", InvariantExplicitSix, MeshStrategy::Lagrangian);
pub const LAGRANGIAN: Variant = Variant::new("lagrangian", Trapezoidal, MeshStrategy::Lagrangian);
pub const LAGRANGIAN_MCONS: Variant = Variant::new("lagrangian_mcons", MomentumConserving, MeshStrategy::Lagrangian);
pub const PROJECTION: Variant = Variant::new("evolution_projection", Trapezoidal, projection());
pub const PROJECTION_MCONS: Variant = Variant::new("evolution_projection_mcons", MomentumConserving, projection());

/// Ten-point variants of the convergence table; adaptive rows use `α = 5e6` (arc length) and `1e6` (curvature).
pub fn convergence_variants() -> Vec<Variant> {
    vec![
        STANDARD,
        STANDARD_MCONS,
        LAGRANGIAN,
        LAGRANGIAN_MCONS,
        PROJECTION,
        PROJECTION_MCONS,
        Variant::new("adaptive_arclength", Trapezoidal, arc_length(5e6)),
        Variant::new("adaptive_arclength_mcons", MomentumConserving, arc_length(5e6)),
        Variant::new("adaptive_curvature", Trapezoidal, curvature(1e6)),
        Variant::new("adaptive_curvature_mcons", MomentumConserving, curvature(1e6)),
    ]
}

/// Cnoidal-wave rows of the error table.
pub fn cnoidal_rmse_variants() -> Vec<Variant> {
    let mut v = convergence_variants();
    v.insert(2, EXPLICIT_FIVE);
    v
}

/// Soliton rows of the error table; adaptive rows use `α = 1e4`.
pub fn soliton_rmse_variants() -> Vec<Variant> {
    vec![
        STANDARD,
        STANDARD_MCONS,
        EXPLICIT_FIVE,
        LAGRANGIAN,
        LAGRANGIAN_MCONS,
        PROJECTION,
        PROJECTION_MCONS,
        Variant::new("adaptive_curvature", Trapezoidal, curvature(1e4)),
        Variant::new("adaptive_curvature_mcons", MomentumConserving, curvature(1e4)),
        Variant::new("adaptive_arclength", Trapezoidal, arc_length(1e4)),
        Variant::new("adaptive_arclength_mcons", MomentumConserving, arc_length(1e4)),
    ]
}

pub fn zabusky_kruskal_variants() -> Vec<Variant> {
    vec![
        STANDARD,
        STANDARD_MCONS,
        PROJECTION,
        PROJECTION_MCONS,
        Variant::new("adaptive_arclength", Trapezoidal, arc_length(1e4)),
        Variant::new("adaptive_arclength_mcons", MomentumConserving, arc_length(1e4)),
        Variant::new("adaptive_curvature", Trapezoidal, curvature(1e2)),
        Variant::new("adaptive_curvature_mcons", MomentumConserving, curvature(1e2)),
    ]
}

/// Schemes compared in the moving-frame sweep.
pub fn boost_variants() -> Vec<Variant> {
    vec![
        STANDARD_MCONS,
        Variant::new("adaptive_arclength_mcons", MomentumConserving, arc_length(1e4)).anchored(MeshAnchor::Lagrangian),
    ]
}

/// Frame speeds of the sweep in units of the initial spacing.
pub const BOOST_SPEEDS: [f64; 7] = [-10.0, -1.0, 0.0, 1.0, 5.0, 10.0, 30.0];
pub const CONVERGENCE_SIZES: [usize; 4] = [16, 24, 32, 48];

/// Cnoidal wave of the numerical section: amplitude 4.116, speed 0.784, `k² = 0.7`, `ω = 0.7`.
pub fn cnoidal_wave() -> KdvSolution {
    KdvSolution::CnoidalBoosted { a: 3.332, v: 0.784 }
}

/// One spatial period `2K(k)/ω` of [`cnoidal_wave`].
pub fn cnoidal_period() -> f64 {
    let KdvSolution::CnoidalBoosted { a, v } = cnoidal_wave() else { unreachable!() };
    let (k, omega) = KdvSolution::cnoidal_parameters(a, v);
    2.0 * complete_k(k).expect("modulus below one") / omega
}

pub fn double_soliton() -> KdvSolution {
    KdvSolution::DoubleSoliton { alpha1: 2.0, alpha2: 1.0, b1: 1e4, b2: 1.0, frame_speed: 0.0 }
}

/// `Δt` of the Zabusky-Kruskal runs and the final time `3.6/π` rounded to whole steps.
pub const ZK_DT: f64 = 5e-6;
pub fn zk_final_time() -> f64 {
    (3.6 / std::f64::consts::PI / ZK_DT).round() * ZK_DT
}

/// Builds one run of a variant.
pub fn experiment(
    name: String,
    variant: &Variant,
    initial: InitialData,
    domain: Domain,
    n: usize,
    times: (f64, f64, f64),
) -> Result<Experiment, HarnessError> {
    let mut exp = Experiment::new(name, initial, domain, n, times, variant.kind, variant.strategy)?;
    exp.scheme.anchor = variant.anchor;
    Ok(exp)
}

pub fn exact_ramp_runs() -> Result<Vec<Experiment>, HarnessError> {
    let ramp = InitialData::Exact(KdvSolution::GalileanRamp { t0: 0.0, x0: 0.0 });
    [STANDARD, STANDARD_MCONS, STANDARD_FTCS, LAGRANGIAN, PROJECTION, LAGRANGIAN_MCONS, PROJECTION_MCONS]
        .iter()
        .map(|v| experiment(v.label.into(), v, ramp.clone(), Domain::Interval { a: 0.0, b: 20.0 }, 35, (1.0, 2.0, 1e-3)))
        .collect()
}

pub fn cnoidal_convergence_runs() -> Result<Vec<Experiment>, HarnessError> {
    let period = cnoidal_period();
    let mut runs = Vec::new();
    for v in convergence_variants() {
        for n in CONVERGENCE_SIZES {
            let domain = Domain::Periodic { start: 0.0, period };
            runs.push(experiment(format!("{}_n{n}", v.label), &v, InitialData::Exact(cnoidal_wave()), domain, n, (0.0, 0.2, 1e-4))?);
        }
    }
    Ok(runs)
}

pub fn cnoidal_soliton_runs() -> Result<Vec<Experiment>, HarnessError> {
    let mut runs = Vec::new();
    let domain = Domain::Periodic { start: 0.0, period: cnoidal_period() };
    for v in cnoidal_rmse_variants() {
        runs.push(experiment(format!("cnoidal_{}", v.label), &v, InitialData::Exact(cnoidal_wave()), domain, 48, (0.0, 0.2, 1e-4))?);
    }
    let soliton = InitialData::Exact(KdvSolution::SolitonBoosted { v: 7.0 });
    for v in soliton_rmse_variants() {
        let domain = Domain::Interval { a: -4.0, b: 4.0 };
        runs.push(experiment(format!("soliton_{}", v.label), &v, soliton.clone(), domain, 48, (0.0, 0.05, 1e-4))?);
    }
    Ok(runs)
}

pub fn zabusky_kruskal_runs(variants: &[Variant]) -> Result<Vec<Experiment>, HarnessError> {
    let initial = InitialData::Cosine { amplitude: 1.0, wavenumber: std::f64::consts::PI };
    let domain = Domain::Periodic { start: 0.0, period: 2.0 };
    variants
        .iter()
        .map(|v| {
            let mut exp = experiment(v.label.into(), v, initial.clone(), domain, 512, (0.0, zk_final_time(), ZK_DT))?;
            exp.scheme.dispersion = 0.022 * 0.022;
            exp.reference = Reference::HighResolution { n: 2048, dt: 3.125e-7 };
            exp.report_every = 5000;
            Ok(exp)
        })
        .collect()
}

pub fn boost_runs() -> Result<Vec<(Variant, f64, Experiment)>, HarnessError> {
    let domain = Domain::Interval { a: -20.0, b: 20.0 };
    let n = 128;
    let dx = domain.spacing(n);
    let mut runs = Vec::new();
    for v in boost_variants() {
        for ratio in BOOST_SPEEDS {
            let c = ratio * dx;
            let sol = double_soliton().transform(GroupElement::boost(c));
            let name = format!("{}_c{ratio}", v.label);
            let mut exp = experiment(name, &v, InitialData::Exact(sol), domain, n, (0.0, 1.0, 1e-3))?;
            exp.report_every = 50;
            runs.push((v, c, exp));
        }
    }
    Ok(runs)
}

/// A named derived quantity, e.g. a fitted order or a frame discrepancy.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub label: String,
    pub quantity: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOutcome {
    pub name: &'static str,
    pub reports: Vec<ExperimentReport>,
    pub derived: Vec<Derived>,
}

impl PresetOutcome {
    pub fn report(&self, name: &str) -> Option<&ExperimentReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn derived(&self, label: &str, quantity: &str) -> Option<f64> {
        self.derived.iter().find(|d| d.label == label && d.quantity == quantity).map(|d| d.value)
    }
}

pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Aborted runs are part of the result rather than a failure.
    pub expects_aborts: bool,
}

pub const PRESETS: [PresetInfo; 6] = [
    PresetInfo { name: "exact_ramp", description: "Galilean ramp u = x/t on [0, 20], N = 35, t from 1 to 2", expects_aborts: false },
    PresetInfo { name: "cnoidal_convergence", description: "l-infinity convergence order on the cnoidal wave, N in {16, 24, 32, 48}", expects_aborts: false },
    PresetInfo { name: "cnoidal_soliton_rmse", description: "RMSE and momentum drift on the cnoidal wave and the v = 7 soliton, N = 48", expects_aborts: false },
    PresetInfo { name: "double_soliton_boost", description: "double soliton in moving frames, discrepancy to the rest frame", expects_aborts: false },
    PresetInfo { name: "zabusky_kruskal", description: "cos(pi x) decaying into eight solitons, N = 512 against an N = 2048 reference", expects_aborts: false },
    PresetInfo { name: "zabusky_kruskal_lagrangian", description: "purely Lagrangian schemes on the Zabusky-Kruskal problem (expected to tangle)", expects_aborts: true },
];

fn with_report_every(mut runs: Vec<Experiment>, report_every: Option<usize>) -> Vec<Experiment> {
    if let Some(k) = report_every {
        runs.iter_mut().for_each(|e| e.report_every = k);
    }
    runs
}

/// Runs every experiment concurrently; results keep the input order.
pub fn run_all(runs: &[Experiment]) -> Result<Vec<ExperimentReport>, HarnessError> {
    runs.par_iter().map(run).collect()
}

/// Runs a named preset.
pub fn run_preset(name: &str, report_every: Option<usize>) -> Result<PresetOutcome, HarnessError> {
    let info = PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| HarnessError::config(format!("unknown preset '{name}'")))?;
    let mut derived = Vec::new();
    let reports = match name {
        "exact_ramp" => run_all(&with_report_every(exact_ramp_runs()?, report_every))?,
        "cnoidal_convergence" => {
            let reports = run_all(&with_report_every(cnoidal_convergence_runs()?, report_every))?;
            for v in convergence_variants() {
                let points: Vec<(f64, f64)> = CONVERGENCE_SIZES
                    .iter()
                    .filter_map(|n| reports.iter().find(|r| r.name == format!("{}_n{n}", v.label)))
                    .map(|r| (r.n as f64, r.linf))
                    .collect();
                let order = convergence_order(&points).unwrap_or(f64::NAN);
                derived.push(Derived { label: v.label.into(), quantity: "order", value: order });
            }
            reports
        }
        "cnoidal_soliton_rmse" => run_all(&with_report_every(cnoidal_soliton_runs()?, report_every))?,
        "double_soliton_boost" => {
            let runs = boost_runs()?;
            let experiments: Vec<Experiment> = runs.iter().map(|(_, _, e)| e.clone()).collect();
            let reports = run_all(&with_report_every(experiments, report_every))?;
            for v in boost_variants() {
                let rest = runs
                    .iter()
                    .zip(&reports)
                    .find(|((rv, c, _), _)| rv.label == v.label && *c == 0.0)
                    .map(|(_, r)| r)
                    .expect("sweep includes the rest frame");
                for ((rv, c, exp), report) in runs.iter().zip(&reports) {
                    if rv.label != v.label {
                        continue;
                    }
                    let value = if report.completed() && rest.completed() {
                        frame_discrepancy(&rest.final_layer, &report.final_layer, *c, &exp.scheme.boundary)?
                    } else {
                        f64::NAN
                    };
                    derived.push(Derived { label: exp.name.clone(), quantity: "discrepancy", value });
                }
            }
            reports
        }
        "zabusky_kruskal" => run_all(&with_report_every(zabusky_kruskal_runs(&zabusky_kruskal_variants())?, report_every))?,
        "zabusky_kruskal_lagrangian" => {
            let runs = zabusky_kruskal_runs(&[LAGRANGIAN, EXPLICIT_SIX, LAGRANGIAN_MCONS])?;
            run_all(&with_report_every(runs, report_every))?
        }
        _ => unreachable!("listed preset without a runner"),
    };
    Ok(PresetOutcome { name: info.name, reports, derived })
}
