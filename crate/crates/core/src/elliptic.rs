//! Jacobi elliptic functions sn, cn, dn and the complete integral K(k).
//!
//! Evaluation uses the descending Landen (AGM) scheme after reducing the
//! argument modulo the real period 4K. Moduli within `DEGENERATE_GAP` of one
//! fall back to the hyperbolic limits, where the AGM chain loses precision.

use std::f64::consts::FRAC_PI_2;

use crate::error::{KdvError, Result};

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;
const DEGENERATE_GAP: f64 = 1e-12;

/// Elliptic modulus `k`, restricted to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&k) {
            Ok(Self(k))
        } else {
            Err(KdvError::ModulusOutOfRange(k))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k^2)`, computed without cancellation.
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// Arithmetic-geometric mean of `a` and `b`.
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `K(k) = pi / (2 AGM(1, k'))`.
pub fn complete_k(k: f64) -> Result<f64> {
    let modulus = EllipticModulus::new(k)?;
    if k >= 1.0 {
        return Err(KdvError::CompleteIntegralDiverges(k));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let kp = modulus.complement();
    Ok(FRAC_PI_2 / agm(1.0, kp))
}

/// Returns `(sn, cn, dn)` at argument `u` for modulus `k`.
pub fn jacobi_sn_cn_dn(u: f64, k: EllipticModulus) -> (f64, f64, f64) {
    let k = k.value();
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if 1.0 - k < DEGENERATE_GAP {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }

    // Reduce into [-2K, 2K] so the Landen recursion starts from a moderate phase.
    let quarter = complete_k(k).expect("k checked to lie in [0, 1)");
    let period = 4.0 * quarter;
    let reduced = u - period * (u / period).round();

    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut a = [0.0; AGM_MAX_ITER + 1];
    let mut c = [0.0; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kp;
    let mut n = 0;
    while c[n].abs() > AGM_TOL && n < AGM_MAX_ITER {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        c[n + 1] = 0.5 * (an - bn);
        b = (an * bn).sqrt();
        n += 1;
    }

    let mut phi = 2f64.powi(n as i32) * a[n] * reduced;
    let mut phi_prev = phi;
    for j in (1..=n).rev() {
        phi_prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 {
        (1.0 - k * k * sn * sn).sqrt()
    } else {
        cn / (phi_prev - phi).cos()
    };
    (sn, cn, dn)
}

pub fn jacobi_cn(u: f64, k: EllipticModulus) -> f64 {
    jacobi_sn_cn_dn(u, k).1
}

pub fn jacobi_sn(u: f64, k: EllipticModulus) -> f64 {
    jacobi_sn_cn_dn(u, k).0
}

pub fn jacobi_dn(u: f64, k: EllipticModulus) -> f64 {
    jacobi_sn_cn_dn(u, k).2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn m(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    /// Composite 16-point Gauss-Legendre rule, independent of the AGM path.
    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        const NODES: [f64; 8] = [
            0.0950125098376374,
            0.2816035507792589,
            0.4580167776572274,
            0.6178762444026438,
            0.755404408355003,
            0.8656312023878318,
            0.9445750230732326,
            0.9894009349916499,
        ];
        const WEIGHTS: [f64; 8] = [
            0.1894506104550685,
            0.1826034150449236,
            0.1691565193950025,
            0.1495959888165767,
            0.1246289712555339,
            0.0951585116824928,
            0.0622535239386479,
            0.0271524594117541,
        ];
        let width = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            let half = 0.5 * width;
            for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
                total += w * half * (f(mid + half * x) + f(mid - half * x));
            }
        }
        total
    }

    fn incomplete_f(phi: f64, k: f64) -> f64 {
        gauss_legendre(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 0.0, phi, 64)
    }

    /// cn(u, k) by Newton inversion of the incomplete integral F(phi, k) = u.
    fn cn_by_inversion(u: f64, k: f64) -> f64 {
        let mut phi = u;
        for _ in 0..50 {
            let residual = incomplete_f(phi, k) - u;
            let slope = 1.0 / (1.0 - k * k * phi.sin().powi(2)).sqrt();
            phi -= residual / slope;
            if residual.abs() < 1e-15 {
                break;
            }
        }
        phi.cos()
    }

    #[test]
    fn identity_and_degenerate_moduli() {
        for k in [0.0, 0.3, 0.7f64.sqrt(), 0.99, 1.0] {
            assert_eq!(jacobi_cn(0.0, m(k)), 1.0);
            assert_eq!(jacobi_sn(0.0, m(k)), 0.0);
        }
        assert!((jacobi_cn(1.0, m(0.0)) - 1.0f64.cos()).abs() < 1e-15);
        assert!((jacobi_cn(2.0, m(1.0)) - 1.0 / 2.0f64.cosh()).abs() < 1e-15);
        assert!((jacobi_sn(0.3, m(0.0)) - 0.3f64.sin()).abs() < 1e-15);
        assert!((jacobi_sn(1.5, m(1.0)) - 1.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn cn_matches_integral_inversion() {
        let k = 0.7f64.sqrt();
        let oracle = cn_by_inversion(0.5, k);
        assert!((jacobi_cn(0.5, m(k)) - oracle).abs() < 1e-12, "oracle {oracle}");
        for u in [-1.7, 0.1, 1.2, 1.9] {
            let oracle = cn_by_inversion(u, k);
            assert!((jacobi_cn(u, m(k)) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_integral_values() {
        assert_eq!(complete_k(0.0).unwrap(), PI / 2.0);
        assert!(complete_k(1.0 - 1e-12).unwrap() > 10.0);
        assert!(matches!(complete_k(1.0), Err(KdvError::CompleteIntegralDiverges(_))));
        assert!(matches!(complete_k(1.5), Err(KdvError::ModulusOutOfRange(_))));

        let k = 0.5f64.sqrt();
        let quadrature = gauss_legendre(
            |t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(),
            0.0,
            PI / 2.0,
            32,
        );
        assert!((complete_k(k).unwrap() - quadrature).abs() < 1e-13);
        // K(1/sqrt(2)) = Gamma(1/4)^2 / (4 sqrt(pi))
        assert!((complete_k(k).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn modulus_domain() {
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::new(1.0 + 1e-9).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
    }

    #[test]
    fn pythagorean_identity_and_period() {
        for k in [0.0, 0.3, 0.7f64.sqrt(), 0.99] {
            let mut u = -20.0;
            while u <= 20.0 {
                let (sn, cn, dn) = jacobi_sn_cn_dn(u, m(k));
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
                assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12);
                u += 0.173;
            }
            let period = 4.0 * complete_k(k).unwrap();
            for u in [-3.3, -0.4, 0.25, 1.7, 6.1] {
                assert!((jacobi_cn(u + period, m(k)) - jacobi_cn(u, m(k))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_closed_forms_on_interval() {
        let mut u = -10.0;
        while u <= 10.0 {
            assert!((jacobi_cn(u, m(0.0)) - u.cos()).abs() < 1e-12);
            assert!((jacobi_sn(u, m(0.0)) - u.sin()).abs() < 1e-12);
            assert!((jacobi_cn(u, m(1.0)) - 1.0 / u.cosh()).abs() < 1e-12);
            assert!((jacobi_sn(u, m(1.0)) - u.tanh()).abs() < 1e-12);
            u += 0.25;
        }
    }
}
