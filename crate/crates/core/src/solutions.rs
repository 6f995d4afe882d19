//! Exact KdV solutions and the action of the symmetry group on them.
//!
//! Every variant solves `u_t + u u_x + u_xxx = 0`. They serve as initial data,
//! as boundary data for finite domains, and as error references.

use crate::elliptic::{jacobi_sn_cn_dn, EllipticModulus};
use crate::error::{KdvError, Result};

/// Denominators smaller than this are treated as singular.
pub const SINGULARITY_GUARD: f64 = 1e-8;

/// An element of the point-symmetry group of KdV.
///
/// Acting on a point it applies, in order: the reflection `(t, x) -> (-t, -x)`
/// when `reflect` is set, the dilation `(t, x, u) -> (e^{3d} t, e^d x, e^{-2d} u)`,
/// the boost `(t, x, u) -> (t, x + v t, u + v)` and the shift `(t, x) -> (t + t0, x + x0)`.
/// A solution `u` is therefore mapped to
/// `ũ(t, x) = e^{-2d} u(e^{-3d}(t - t0), e^{-d}(x - x0 - v (t - t0))) + v`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupElement {
    pub d: f64,
    pub v: f64,
    pub t0: f64,
    pub x0: f64,
    pub reflect: bool,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn boost(v: f64) -> Self {
        Self { v, ..Self::default() }
    }

    pub fn shift(t0: f64, x0: f64) -> Self {
        Self { t0, x0, ..Self::default() }
    }

    pub fn dilation(d: f64) -> Self {
        Self { d, ..Self::default() }
    }

    pub fn reflection() -> Self {
        Self { reflect: true, ..Self::default() }
    }

    /// Factor applied to time intervals (and hence to the time step).
    pub fn time_scale(&self) -> f64 {
        (3.0 * self.d).exp()
    }

    /// Factor applied to spatial intervals.
    pub fn space_scale(&self) -> f64 {
        self.d.exp()
    }

    pub fn apply_time(&self, t: f64) -> f64 {
        let t = if self.reflect { -t } else { t };
        self.time_scale() * t + self.t0
    }

    pub fn apply_point(&self, t: f64, x: f64, u: f64) -> (f64, f64, f64) {
        let (t, x) = if self.reflect { (-t, -x) } else { (t, x) };
        let ts = self.time_scale() * t;
        let xs = self.space_scale() * x;
        let us = (-2.0 * self.d).exp() * u;
        (ts + self.t0, xs + self.v * ts + self.x0, us + self.v)
    }

    /// Coordinates `(t, x)` whose image under this element is `(t, x)`.
    pub fn preimage(&self, t: f64, x: f64) -> (f64, f64) {
        let dt = t - self.t0;
        let ts = dt / self.time_scale();
        let xs = (x - self.x0 - self.v * dt) / self.space_scale();
        if self.reflect {
            (-ts, -xs)
        } else {
            (ts, xs)
        }
    }

    /// Maps a solution value at the preimage point to the transformed value.
    pub fn apply_value(&self, u: f64) -> f64 {
        (-2.0 * self.d).exp() * u + self.v
    }

    /// The element `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &GroupElement) -> GroupElement {
        // Pull our reflection through first's shift; it commutes with boost and dilation.
        let sign = if self.reflect { -1.0 } else { 1.0 };
        let (t01, x01) = (sign * first.t0, sign * first.x0);
        let e3 = self.time_scale();
        let t0 = e3 * t01 + self.t0;
        GroupElement {
            d: self.d + first.d,
            v: (-2.0 * self.d).exp() * first.v + self.v,
            t0,
            x0: self.space_scale() * x01 + self.v * (e3 * t01) + self.x0,
            reflect: self.reflect ^ first.reflect,
        }
    }
}

/// Order of the dilation-invariant rational solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalOrder {
    Zero,
    MinusOne,
    MinusTwo,
    MinusThree,
}

impl TryFrom<i32> for RationalOrder {
    type Error = KdvError;

    fn try_from(order: i32) -> Result<Self> {
        match order {
            0 => Ok(Self::Zero),
            -1 => Ok(Self::MinusOne),
            -2 => Ok(Self::MinusTwo),
            -3 => Ok(Self::MinusThree),
            _ => Err(KdvError::InvalidSolution(format!(
                "rational order must be 0, -1, -2 or -3, got {order}"
            ))),
        }
    }
}

/// Catalog of closed-form KdV solutions.
#[derive(Debug, Clone, PartialEq)]
pub enum KdvSolution {
    Constant { value: f64 },
    /// `u = (x - x0) / (t - t0)`.
    GalileanRamp { t0: f64, x0: f64 },
    Rational { order: RationalOrder },
    /// `u = (a + v) cn²(ω (x - v t), k)`.
    CnoidalBoosted { a: f64, v: f64 },
    /// `u = 3v sech²(√v (x - v t) / 2)`.
    SolitonBoosted { v: f64 },
    /// Soliton at rest on the background `-a/2`.
    StationarySoliton { a: f64 },
    SingularSnoidal { a: f64, c: f64 },
    SingularSoliton { a: f64 },
    SingularTrig { a: f64 },
    /// `u = -12 / (x - v t)² + v`.
    AlgebraicSolitonBoosted { v: f64 },
    /// Periodic singular wave for a cubic with roots `a` and `-a/2 ± i q`.
    ComplexRootWave { a: f64, q: f64 },
    /// Two-soliton solution `12 ∂²ₓ ln τ + c` seen from a frame moving at `frame_speed`.
    DoubleSoliton {
        alpha1: f64,
        alpha2: f64,
        b1: f64,
        b2: f64,
        frame_speed: f64,
    },
    Transformed {
        base: Box<KdvSolution>,
        element: GroupElement,
    },
}

fn invalid(msg: impl Into<String>) -> KdvError {
    KdvError::InvalidSolution(msg.into())
}

fn sech2(z: f64) -> f64 {
    let s = 1.0 / z.cosh();
    s * s
}

impl KdvSolution {
    pub fn cnoidal(a: f64, v: f64) -> Result<Self> {
        let sol = Self::CnoidalBoosted { a, v };
        sol.validate()?;
        Ok(sol)
    }

    pub fn soliton(v: f64) -> Result<Self> {
        let sol = Self::SolitonBoosted { v };
        sol.validate()?;
        Ok(sol)
    }

    pub fn complex_root(a: f64, q: f64) -> Result<Self> {
        let sol = Self::ComplexRootWave { a, q };
        sol.validate()?;
        Ok(sol)
    }

    /// Applies a group element, returning the transformed solution.
    pub fn transform(&self, element: GroupElement) -> KdvSolution {
        match self {
            Self::Transformed { base, element: inner } => Self::Transformed {
                base: base.clone(),
                element: element.compose(inner),
            },
            other => Self::Transformed {
                base: Box::new(other.clone()),
                element,
            },
        }
    }

    /// Cnoidal modulus and wavenumber `(k, ω)` for the boosted cnoidal wave.
    pub fn cnoidal_parameters(a: f64, v: f64) -> (f64, f64) {
        let span = 2.0 * a - v;
        (((a + v) / span).sqrt(), 0.5 * (span / 3.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::CnoidalBoosted { a, v } => {
                if !(2.0 * a - v > 0.0) {
                    return Err(invalid(format!("cnoidal wave needs 2a - v > 0, got a={a}, v={v}")));
                }
                let (k, _) = Self::cnoidal_parameters(a, v);
                if !(0.0..=1.0).contains(&k) {
                    return Err(invalid(format!("cnoidal modulus {k} outside [0, 1]")));
                }
            }
            Self::SolitonBoosted { v } if !(v > 0.0) => {
                return Err(invalid(format!("soliton speed must be positive, got {v}")));
            }
            Self::StationarySoliton { a } | Self::SingularSoliton { a } | Self::SingularTrig { a }
                if !(a > 0.0) =>
            {
                return Err(invalid(format!("amplitude parameter must be positive, got {a}")));
            }
            Self::SingularSnoidal { a, c } => {
                if !(a > 0.0 && c >= -2.0 * a && c <= -0.5 * a) {
                    return Err(invalid(format!(
                        "snoidal roots need a > 0 and -2a <= c <= -a/2, got a={a}, c={c}"
                    )));
                }
            }
            Self::ComplexRootWave { q, .. } if !(q > 0.0) => {
                return Err(invalid(format!("complex root wave needs q > 0, got {q}")));
            }
            Self::DoubleSoliton { alpha1, alpha2, .. } => {
                if alpha1 + alpha2 == 0.0 {
                    return Err(invalid("double soliton needs alpha1 + alpha2 != 0"));
                }
            }
            Self::Transformed { ref base, .. } => base.validate()?,
            _ => {}
        }
        Ok(())
    }

    /// Exact value `u(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> Result<f64> {
        let singular = || KdvError::Singularity { t, x };
        let guard = |den: f64| {
            if den.abs() < SINGULARITY_GUARD {
                Err(KdvError::Singularity { t, x })
            } else {
                Ok(den)
            }
        };
        match *self {
            Self::Constant { value } => Ok(value),
            Self::GalileanRamp { t0, x0 } => Ok((x - x0) / guard(t - t0)?),
            Self::Rational { order } => match order {
                RationalOrder::Zero => Ok(0.0),
                RationalOrder::MinusOne => Ok(-12.0 / guard(x * x)?),
                RationalOrder::MinusTwo => {
                    let x3 = x * x * x;
                    let den = guard(x3 + 12.0 * t)?;
                    Ok(-36.0 * x * (x3 - 24.0 * t) / (den * den))
                }
                RationalOrder::MinusThree => {
                    let x3 = x * x * x;
                    let x6 = x3 * x3;
                    let den = guard(720.0 * t * t - 60.0 * x3 * t - x6)?;
                    let num = x6 * x3 + 5400.0 * x3 * t * t + 43200.0 * t * t * t;
                    Ok(-72.0 * num * x / (den * den))
                }
            },
            Self::CnoidalBoosted { a, v } => {
                self.validate()?;
                let (k, omega) = Self::cnoidal_parameters(a, v);
                let cn = jacobi_sn_cn_dn(omega * (x - v * t), EllipticModulus::new(k)?).1;
                Ok((a + v) * cn * cn)
            }
            Self::SolitonBoosted { v } => {
                self.validate()?;
                Ok(3.0 * v * sech2(0.5 * v.sqrt() * (x - v * t)))
            }
            Self::StationarySoliton { a } => {
                self.validate()?;
                Ok(-0.5 * a + 1.5 * a * sech2(0.5 * (0.5 * a).sqrt() * x))
            }
            Self::SingularSnoidal { a, c } => {
                self.validate()?;
                let omega = 0.5 * ((a - c) / 3.0).sqrt();
                let k = ((2.0 * a + c) / (a - c)).sqrt();
                let sn = jacobi_sn_cn_dn(omega * x, EllipticModulus::new(k.min(1.0))?).0;
                Ok(a - (a - c) / guard(sn * sn)?)
            }
            Self::SingularSoliton { a } => {
                self.validate()?;
                let s = (0.5 * (0.5 * a).sqrt() * x).sinh();
                Ok(-0.5 * a * (1.0 + 3.0 / guard(s * s)?))
            }
            Self::SingularTrig { a } => {
                self.validate()?;
                let s = (0.5 * a.sqrt() * x).sin();
                Ok(a - 3.0 * a / guard(s * s)?)
            }
            Self::AlgebraicSolitonBoosted { v } => {
                let z = x - v * t;
                Ok(-12.0 / guard(z * z)? + v)
            }
            Self::ComplexRootWave { a, q } => {
                self.validate()?;
                let amp = (2.25 * a * a + q * q).sqrt();
                let omega = (amp / 3.0).sqrt();
                let k2 = ((amp + 1.5 * a).powi(2) + q * q) / (4.0 * amp * amp);
                let cn = jacobi_sn_cn_dn(omega * x, EllipticModulus::new(k2.sqrt().min(1.0))?).1;
                Ok(a - amp * (1.0 + cn) / guard(1.0 - cn)?)
            }
            Self::DoubleSoliton {
                alpha1,
                alpha2,
                b1,
                b2,
                frame_speed,
            } => {
                self.validate()?;
                let value = double_soliton(alpha1, alpha2, b1, b2, t, x - frame_speed * t)
                    .ok_or_else(singular)?;
                Ok(value + frame_speed)
            }
            Self::Transformed { ref base, element } => {
                let (tb, xb) = element.preimage(t, x);
                match base.evaluate(tb, xb) {
                    Ok(u) => Ok(element.apply_value(u)),
                    Err(KdvError::Singularity { .. }) => Err(singular()),
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Centered finite-difference residual of `u_t + u u_x + u_xxx`.
    pub fn residual(&self, t: f64, x: f64, h_t: f64, h_x: f64) -> Result<f64> {
        let u = |tt: f64, xx: f64| self.evaluate(tt, xx);
        let u0 = u(t, x)?;
        let u_t = (u(t + h_t, x)? - u(t - h_t, x)?) / (2.0 * h_t);
        let (um2, um1) = (u(t, x - 2.0 * h_x)?, u(t, x - h_x)?);
        let (up1, up2) = (u(t, x + h_x)?, u(t, x + 2.0 * h_x)?);
        let u_x = (up1 - um1) / (2.0 * h_x);
        let u_xxx = (up2 - 2.0 * up1 + 2.0 * um1 - um2) / (2.0 * h_x * h_x * h_x);
        Ok(u_t + u0 * u_x + u_xxx)
    }
}

/// `12 ∂²ₓ ln τ` for the two-soliton tau function in real exponential form.
///
/// With `E_j = exp(-α_j x + α_j³ t)` the tau function is
/// `τ = 1 + B1 E1 + B2 E2 + A B1 B2 E1 E2`, `A = ((α1 - α2)/(α1 + α2))²`.
/// Writing `τ = Σ T_k` with `∂ₓ T_k = p_k T_k`, the numerator
/// `τ τ_xx - τ_x² = Σ_{k<l} T_k T_l (p_k - p_l)²` has no cancellation, and all
/// terms are rescaled by the largest exponent before exponentiating.
fn double_soliton(alpha1: f64, alpha2: f64, b1: f64, b2: f64, t: f64, x: f64) -> Option<f64> {
    let coupling = ((alpha1 - alpha2) / (alpha1 + alpha2)).powi(2);
    let theta1 = -alpha1 * x + alpha1.powi(3) * t;
    let theta2 = -alpha2 * x + alpha2.powi(3) * t;
    let weights = [1.0, b1, b2, coupling * b1 * b2];
    let exponents = [0.0, theta1, theta2, theta1 + theta2];
    let slopes = [0.0, -alpha1, -alpha2, -(alpha1 + alpha2)];

    let scale = weights
        .iter()
        .zip(exponents.iter())
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, e)| w.abs().ln() + e)
        .fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = weights
        .iter()
        .zip(exponents.iter())
        .map(|(w, e)| {
            if *w == 0.0 {
                0.0
            } else {
                w.signum() * (w.abs().ln() + e - scale).exp()
            }
        })
        .collect();
    let tau: f64 = terms.iter().sum();
    if tau.abs() < SINGULARITY_GUARD {
        return None;
    }
    let mut numerator = 0.0;
    for k in 0..4 {
        for l in (k + 1)..4 {
            numerator += terms[k] * terms[l] * (slopes[k] - slopes[l]).powi(2);
        }
    }
    Some(12.0 * numerator / (tau * tau))
}
