//! Experiment files.
//!
//! An experiment file is TOML with five sections. Only `[solution]`,
//! `[domain]` and `[scheme]` are required:
//!
//! ```toml
//! [solution]
//! kind = "cnoidal"        # constant | ramp | rational | cnoidal | soliton
//! a = 3.332               # | stationary_soliton | double_soliton | cosine
//! v = 0.784
//! boost = 0.0             # optional frame speed applied to exact solutions
//!
//! [domain]
//! kind = "periodic"       # periodic (start, period) | interval (a, b)
//! start = 0.0             # period may be omitted for cnoidal waves
//! n = 48
//!
//! [scheme]
//! kind = "momentum_conserving"
//! dt = 1e-4
//! t0 = 0.0
//! t_final = 0.2
//! dispersion = 1.0
//! theta = 0.5
//!
//! [mesh]
//! strategy = "adaptive"   # fixed | lagrangian | evolution_projection | adaptive
//! monitor = "arc_length"  # arc_length | curvature
//! alpha = 5e6
//! anchor = "pinned"       # pinned | lagrangian
//! order = 2               # evolution_projection only
//! stencil = "contiguous"  # contiguous | alternating
//!
//! [output]
//! name = "cnoidal"
//! report_every = 100
//! soliton_threshold = 0.3
//! reference = "exact"     # exact | none | high_resolution (reference_n, reference_dt)
//! ```
//!
//! Scheme names are those of [`SchemeKind::name`]. Every error carries the line
//! of the offending key when it can be found.

use std::path::Path;

use serde::Deserialize;

use kdv_core::elliptic::complete_k;
use kdv_core::projection::ProjectionStencil;
use kdv_core::solutions::RationalOrder;
use kdv_core::{GroupElement, KdvSolution, MeshAnchor, MeshStrategy, MonitorKind, SchemeKind};

use crate::error::HarnessError;
use crate::experiment::{Domain, Experiment, InitialData, Reference};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    solution: RawSolution,
    domain: RawDomain,
    scheme: RawScheme,
    #[serde(default)]
    mesh: RawMesh,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolution {
    kind: String,
    value: Option<f64>,
    t0: Option<f64>,
    x0: Option<f64>,
    order: Option<i32>,
    a: Option<f64>,
    v: Option<f64>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    b1: Option<f64>,
    b2: Option<f64>,
    amplitude: Option<f64>,
    wavenumber: Option<f64>,
    boost: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: String,
    start: Option<f64>,
    period: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    kind: String,
    dt: f64,
    #[serde(default)]
    t0: f64,
    t_final: f64,
    dispersion: Option<f64>,
    theta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    strategy: Option<String>,
    monitor: Option<String>,
    alpha: Option<f64>,
    anchor: Option<String>,
    order: Option<usize>,
    stencil: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    name: Option<String>,
    report_every: Option<usize>,
    soliton_threshold: Option<f64>,
    reference: Option<String>,
    reference_n: Option<usize>,
    reference_dt: Option<f64>,
}

/// A parsed experiment file. Keeps the source so later errors can point at lines.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    raw: Raw,
    source: String,
}

/// Keys accepted by [`ConfigFile::with_param`].
pub const SWEEP_KEYS: [&str; 4] = ["n", "dt", "t_final", "alpha"];

impl ConfigFile {
    pub fn parse(source: &str) -> Result<Self, HarnessError> {
        let raw: Raw = toml::from_str(source).map_err(|e| {
            let line = e.span().map(|s| line_of(source, s.start));
            HarnessError::at_line(e.message().trim().to_string(), line)
        })?;
        Ok(Self { raw, source: source.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source)
    }

    /// Copy with one numeric field overridden; `key` is case-insensitive.
    pub fn with_param(&self, key: &str, value: &str) -> Result<Self, HarnessError> {
        let mut out = self.clone();
        let bad = |what: &str| HarnessError::config(format!("--param {key}: '{value}' is not {what}"));
        match key.to_ascii_lowercase().as_str() {
            "n" => out.raw.domain.n = value.parse().map_err(|_| bad("a node count"))?,
            "dt" => out.raw.scheme.dt = value.parse().map_err(|_| bad("a number"))?,
            "t_final" => out.raw.scheme.t_final = value.parse().map_err(|_| bad("a number"))?,
            "alpha" => out.raw.mesh.alpha = Some(value.parse().map_err(|_| bad("a number"))?),
            other => {
                return Err(HarnessError::config(format!(
                    "cannot sweep '{other}'; expected one of {}",
                    SWEEP_KEYS.join(", ")
                )))
            }
        }
        Ok(out)
    }

    pub fn name(&self) -> &str {
        self.raw.output.name.as_deref().unwrap_or("run")
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> HarnessError {
        HarnessError::at_line(message, locate(&self.source, section, key))
    }

    fn required(&self, section: &str, key: &str, value: Option<f64>) -> Result<f64, HarnessError> {
        value.ok_or_else(|| {
            HarnessError::at_line(format!("[{section}] needs '{key}'"), locate_section(&self.source, section))
        })
    }

    fn solution(&self) -> Result<InitialData, HarnessError> {
        let s = &self.raw.solution;
        let need = |key: &str, v: Option<f64>| self.required("solution", key, v);
        let exact = match s.kind.as_str() {
            "cosine" => {
                if s.boost.is_some() {
                    return Err(self.err("solution", "boost", "boost applies to exact solutions only"));
                }
                return Ok(InitialData::Cosine {
                    amplitude: need("amplitude", s.amplitude)?,
                    wavenumber: need("wavenumber", s.wavenumber)?,
                });
            }
            "constant" => KdvSolution::Constant { value: need("value", s.value)? },
            "ramp" => KdvSolution::GalileanRamp { t0: s.t0.unwrap_or(0.0), x0: s.x0.unwrap_or(0.0) },
            "rational" => {
                let order = s.order.ok_or_else(|| self.err("solution", "kind", "rational solutions need 'order'"))?;
                let order = RationalOrder::try_from(order).map_err(|e| self.err("solution", "order", e.to_string()))?;
                KdvSolution::Rational { order }
            }
            "cnoidal" => KdvSolution::CnoidalBoosted { a: need("a", s.a)?, v: need("v", s.v)? },
            "soliton" => KdvSolution::SolitonBoosted { v: need("v", s.v)? },
            "stationary_soliton" => KdvSolution::StationarySoliton { a: need("a", s.a)? },
            "double_soliton" => KdvSolution::DoubleSoliton {
                alpha1: need("alpha1", s.alpha1)?,
                alpha2: need("alpha2", s.alpha2)?,
                b1: s.b1.unwrap_or(1.0),
                b2: s.b2.unwrap_or(1.0),
                frame_speed: 0.0,
            },
            other => return Err(self.err("solution", "kind", format!("unknown solution kind '{other}'"))),
        };
        exact.validate().map_err(|e| self.err("solution", "kind", e.to_string()))?;
        Ok(InitialData::Exact(match s.boost {
            Some(c) if c != 0.0 => exact.transform(GroupElement::boost(c)),
            _ => exact,
        }))
    }

    fn domain(&self, initial: &InitialData) -> Result<Domain, HarnessError> {
        let d = &self.raw.domain;
        match d.kind.as_str() {
            "periodic" => {
                let period = match (d.period, initial) {
                    (Some(p), _) => p,
                    (None, InitialData::Exact(KdvSolution::CnoidalBoosted { a, v })) => {
                        let (k, omega) = KdvSolution::cnoidal_parameters(*a, *v);
                        2.0 * complete_k(k).map_err(|e| self.err("solution", "a", e.to_string()))? / omega
                    }
                    (None, _) => return Err(self.err("domain", "kind", "periodic domains need 'period'")),
                };
                if !(period > 0.0) {
                    return Err(self.err("domain", "period", "period must be positive"));
                }
                Ok(Domain::Periodic { start: d.start.unwrap_or(0.0), period })
            }
            "interval" => {
                let a = self.required("domain", "a", d.a)?;
                let b = self.required("domain", "b", d.b)?;
                if !(b > a) {
                    return Err(self.err("domain", "b", "interval needs b > a"));
                }
                Ok(Domain::Interval { a, b })
            }
            other => Err(self.err("domain", "kind", format!("unknown domain kind '{other}'"))),
        }
    }

    fn strategy(&self) -> Result<MeshStrategy, HarnessError> {
        let m = &self.raw.mesh;
        match m.strategy.as_deref().unwrap_or("fixed") {
            "fixed" => Ok(MeshStrategy::Fixed),
            "lagrangian" => Ok(MeshStrategy::Lagrangian),
            "evolution_projection" => {
                let stencil = match m.stencil.as_deref().unwrap_or("contiguous") {
                    "contiguous" => ProjectionStencil::Contiguous,
                    "alternating" => ProjectionStencil::Alternating,
                    other => return Err(self.err("mesh", "stencil", format!("unknown stencil '{other}'"))),
                };
                Ok(MeshStrategy::EvolutionProjection { order: m.order.unwrap_or(2), stencil })
            }
            "adaptive" => {
                let alpha = self.required("mesh", "alpha", m.alpha)?;
                match m.monitor.as_deref().unwrap_or("arc_length") {
                    "arc_length" => Ok(MeshStrategy::Adaptive(MonitorKind::ArcLengthInvariant { alpha })),
                    "curvature" => Ok(MeshStrategy::Adaptive(MonitorKind::CurvatureNonInvariant { alpha })),
                    other => Err(self.err("mesh", "monitor", format!("unknown monitor '{other}'"))),
                }
            }
            other => Err(self.err("mesh", "strategy", format!("unknown mesh strategy '{other}'"))),
        }
    }

    /// Builds and validates the experiment.
    pub fn experiment(&self) -> Result<Experiment, HarnessError> {
        let s = &self.raw.scheme;
        let kind = SchemeKind::from_name(&s.kind).ok_or_else(|| {
            let names: Vec<&str> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
            self.err("scheme", "kind", format!("unknown scheme '{}'; expected one of {}", s.kind, names.join(", ")))
        })?;
        if !(s.dt > 0.0) || !s.dt.is_finite() {
            return Err(self.err("scheme", "dt", format!("dt must be positive, got {}", s.dt)));
        }
        if !(s.t_final > s.t0) {
            return Err(self.err("scheme", "t_final", "t_final must exceed t0"));
        }
        if self.raw.domain.n < kdv_core::mesh::MIN_NODES {
            return Err(self.err("domain", "n", format!("n must be at least {}", kdv_core::mesh::MIN_NODES)));
        }
        let initial = self.solution()?;
        let domain = self.domain(&initial)?;
        let strategy = self.strategy()?;
        if kind.requires_fixed_mesh() && strategy != MeshStrategy::Fixed {
            return Err(self.err("mesh", "strategy", format!("{} needs strategy = \"fixed\"", kind.name())));
        }
        let mut exp = Experiment::new(self.name(), initial, domain, self.raw.domain.n, (s.t0, s.t_final, s.dt), kind, strategy)
            .map_err(|e| self.relocate(e, "domain", "kind"))?;
        if let Some(d) = s.dispersion {
            if !(d > 0.0) {
                return Err(self.err("scheme", "dispersion", "dispersion must be positive"));
            }
            exp.scheme.dispersion = d;
        }
        if let Some(theta) = s.theta {
            exp.scheme.theta = theta;
        }
        exp.scheme.anchor = match self.raw.mesh.anchor.as_deref().unwrap_or("pinned") {
            "pinned" => MeshAnchor::Pinned,
            "lagrangian" => MeshAnchor::Lagrangian,
            other => return Err(self.err("mesh", "anchor", format!("unknown anchor '{other}'"))),
        };
        let o = &self.raw.output;
        if let Some(k) = o.report_every {
            if k == 0 {
                return Err(self.err("output", "report_every", "report_every must be positive"));
            }
            exp.report_every = k;
        }
        if let Some(t) = o.soliton_threshold {
            exp.soliton_threshold = t;
        }
        match o.reference.as_deref() {
            None => {}
            Some("exact") => exp.reference = Reference::Exact,
            Some("none") => exp.reference = Reference::None,
            Some("high_resolution") => {
                let n = o.reference_n.unwrap_or(4 * exp.n);
                let dt = o.reference_dt.unwrap_or(exp.scheme.dt / 16.0);
                exp.reference = Reference::HighResolution { n, dt };
            }
            Some(other) => return Err(self.err("output", "reference", format!("unknown reference '{other}'"))),
        }
        exp.validate().map_err(|e| self.relocate(e, "scheme", "kind"))?;
        Ok(exp)
    }

    /// Attaches a line to a validation error that does not carry one.
    fn relocate(&self, e: HarnessError, section: &str, key: &str) -> HarnessError {
        match e {
            HarnessError::Config { message, line: None } => self.err(section, key, message),
            other => other,
        }
    }
}

/// 1-based line containing byte `offset`.
fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn section_header(line: &str) -> Option<&str> {
    let t = line.trim();
    t.strip_prefix('[')?.strip_suffix(']').map(str::trim)
}

fn locate_section(source: &str, section: &str) -> Option<usize> {
    source.lines().position(|l| section_header(l) == Some(section)).map(|i| i + 1)
}

/// Line of `key = ...` inside `[section]`, falling back to the section header.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = None;
    for (i, line) in source.lines().enumerate() {
        if let Some(name) = section_header(line) {
            current = Some(name);
            continue;
        }
        if current == Some(section) {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    locate_section(source, section)
}
