//! Direct solvers for tridiagonal and (cyclic) pentadiagonal systems.
//!
//! A pentadiagonal matrix is stored row-wise as `[a_{i,i-2}, a_{i,i-1}, a_{i,i},
//! a_{i,i+1}, a_{i,i+2}]`. In the cyclic case column indices wrap modulo `n`.
//! Elimination runs without pivoting; the systems assembled by the schemes
//! are close to the identity for the step sizes in use.

use crate::error::{KdvError, Result};

/// Relative pivot threshold below which a system is reported as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Solves a tridiagonal system. `lower[0]` and `upper[n - 1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    for len in [lower.len(), upper.len(), rhs.len()] {
        if len != n {
            return Err(KdvError::LengthMismatch(len, n));
        }
    }
    let scale = (0..n)
        .map(|i| lower[i].abs().max(diag[i].abs()).max(upper[i].abs()))
        .fold(0.0, f64::max);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let sub = if i > 0 { lower[i] } else { 0.0 };
        let pivot = diag[i] - sub * prev_c;
        if !(pivot.abs() > PIVOT_TOLERANCE * scale) {
            return Err(KdvError::SingularSystem { row: i, pivot });
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - sub * prev_d) / pivot;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// A square matrix with two bands on each side of the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PentaMatrix {
    pub rows: Vec<[f64; 5]>,
    pub cyclic: bool,
}

impl PentaMatrix {
    pub fn new(rows: Vec<[f64; 5]>, cyclic: bool) -> Self {
        Self { rows, cyclic }
    }

    pub fn identity(n: usize, cyclic: bool) -> Self {
        Self::new(vec![[0.0, 0.0, 1.0, 0.0, 0.0]; n], cyclic)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column index of band entry `k` (offset `k - 2`) in row `i`, if inside the matrix.
    pub fn column(&self, i: usize, k: usize) -> Option<usize> {
        let n = self.len() as isize;
        let j = i as isize + k as isize - 2;
        if self.cyclic {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                (0..5)
                    .filter_map(|k| self.column(i, k).map(|j| self.rows[i][k] * x[j]))
                    .sum()
            })
            .collect()
    }

    fn scale(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(KdvError::LengthMismatch(rhs.len(), n));
        }
        if n < 5 {
            return Err(KdvError::InvalidLayer(format!("banded solve needs n >= 5, got {n}")));
        }
        if self.cyclic {
            self.solve_cyclic(rhs)
        } else {
            let lu = BandLu::factor(&self.rows, self.scale())?;
            let mut x = rhs.to_vec();
            lu.solve_in_place(&mut x);
            Ok(x)
        }
    }

    /// `solve` followed by one step of iterative refinement, which brings the
    /// residual down to rounding level even without pivoting.
    pub fn solve_refined(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.solve(rhs)?;
        let residual: Vec<f64> = rhs.iter().zip(self.mul_vec(&x)).map(|(b, ax)| b - ax).collect();
        let correction = self.solve(&residual)?;
        for (xi, ci) in x.iter_mut().zip(correction) {
            *xi += ci;
        }
        Ok(x)
    }

    /// Bordered elimination: the last two unknowns couple through the wrap-around entries.
    fn solve_cyclic(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let m = n - 2;
        let scale = self.scale();

        // Interior block B (plain pentadiagonal) and coupling columns C.
        let mut inner = Vec::with_capacity(m);
        let mut c0 = vec![0.0; m];
        let mut c1 = vec![0.0; m];
        for i in 0..m {
            let mut row = [0.0; 5];
            // With n >= 5 and i < n - 2, raw columns stay below n and only
            // negative ones wrap, always onto the last two unknowns.
            for (k, slot) in row.iter_mut().enumerate() {
                let a = self.rows[i][k];
                match self.column(i, k).expect("cyclic column") {
                    j if j == m => c0[i] += a,
                    j if j == m + 1 => c1[i] += a,
                    _ => *slot = a,
                }
            }
            inner.push(row);
        }
        let lu = BandLu::factor(&inner, scale)?;
        let mut w = rhs[..m].to_vec();
        lu.solve_in_place(&mut w);
        lu.solve_in_place(&mut c0);
        lu.solve_in_place(&mut c1);

        // Schur complement on the last two unknowns.
        let mut schur = [[0.0; 2]; 2];
        let mut reduced = [rhs[m], rhs[m + 1]];
        for (r, row_index) in [m, m + 1].into_iter().enumerate() {
            for k in 0..5 {
                let j = self.column(row_index, k).expect("cyclic column");
                let a = self.rows[row_index][k];
                if j == m {
                    schur[r][0] += a;
                } else if j == m + 1 {
                    schur[r][1] += a;
                } else {
                    schur[r][0] -= a * c0[j];
                    schur[r][1] -= a * c1[j];
                    reduced[r] -= a * w[j];
                }
            }
        }
        let det = schur[0][0] * schur[1][1] - schur[0][1] * schur[1][0];
        let schur_scale = schur.iter().flatten().fold(0.0, |s: f64, v| s.max(v.abs()));
        if !(det.abs() > PIVOT_TOLERANCE * schur_scale * schur_scale) {
            return Err(KdvError::SingularSystem { row: m, pivot: det });
        }
        let z0 = (reduced[0] * schur[1][1] - reduced[1] * schur[0][1]) / det;
        let z1 = (schur[0][0] * reduced[1] - schur[1][0] * reduced[0]) / det;

        let mut x = Vec::with_capacity(n);
        x.extend((0..m).map(|i| w[i] - c0[i] * z0 - c1[i] * z1));
        x.push(z0);
        x.push(z1);
        Ok(x)
    }
}

/// LU factors of a non-cyclic pentadiagonal matrix (no pivoting).
struct BandLu {
    /// Upper factor: diagonal and two super-diagonals.
    upper: Vec<[f64; 3]>,
    /// Lower multipliers for rows `i + 1` and `i + 2` eliminated by pivot `i`.
    lower: Vec<[f64; 2]>,
}

impl BandLu {
    fn factor(rows: &[[f64; 5]], scale: f64) -> Result<Self> {
        let n = rows.len();
        let mut a: Vec<[f64; 5]> = rows.to_vec();
        let mut upper = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        for k in 0..n {
            let pivot = a[k][2];
            if !(pivot.abs() > PIVOT_TOLERANCE * scale) {
                return Err(KdvError::SingularSystem { row: k, pivot });
            }
            let (u1, u2) = (a[k][3], a[k][4]);
            let mut l = [0.0; 2];
            if k + 1 < n {
                // Row k+1 holds column k at band slot 1.
                let f = a[k + 1][1] / pivot;
                a[k + 1][2] -= f * u1;
                a[k + 1][3] -= f * u2;
                l[0] = f;
            }
            if k + 2 < n {
                // Row k+2 holds column k at band slot 0.
                let f = a[k + 2][0] / pivot;
                a[k + 2][1] -= f * u1;
                a[k + 2][2] -= f * u2;
                l[1] = f;
            }
            upper.push([pivot, u1, u2]);
            lower.push(l);
        }
        Ok(Self { upper, lower })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for k in 0..n {
            let xk = x[k];
            if k + 1 < n {
                x[k + 1] -= self.lower[k][0] * xk;
            }
            if k + 2 < n {
                x[k + 2] -= self.lower[k][1] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            if k + 1 < n {
                s -= self.upper[k][1] * x[k + 1];
            }
            if k + 2 < n {
                s -= self.upper[k][2] * x[k + 2];
            }
            x[k] = s / self.upper[k][0];
        }
    }
}
