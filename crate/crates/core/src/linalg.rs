//! Small dense solvers: Householder QR for least squares and a pivoted
//! Gauss-Jordan inverse for Gram matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor_ops::{ComplexMatrix, ONE, ZERO};

/// Below this reciprocal condition estimate a system is treated as singular.
pub const RCOND_MIN: f64 = 1e-10;

/// Householder QR of a tall matrix, kept in factored form so that repeated
/// right-hand sides cost `O(rows · cols)` each.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    rows: usize,
    cols: usize,
    // upper triangle holds R; reflectors are stored separately
    r: ComplexMatrix,
    reflectors: Vec<Vec<Complex64>>,
    rcond: f64,
}

impl QrFactorization {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let (rows, cols) = (a.rows(), a.cols());
        if rows < cols {
            return Err(Error::SingularDesign(format!(
                "{rows}x{cols} system is underdetermined"
            )));
        }
        let mut r = a.clone();
        let mut reflectors = Vec::with_capacity(cols);
        for k in 0..cols {
            let x = &r.column(k)[k..];
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut v = x.to_vec();
            if norm == 0.0 {
                reflectors.push(v.iter().map(|_| ZERO).collect());
                continue;
            }
            let phase = if v[0].norm() == 0.0 { ONE } else { v[0] / v[0].norm() };
            let alpha = -phase * norm;
            v[0] -= alpha;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut v {
                *z /= vnorm;
            }
            for j in k..cols {
                let col = &mut r.column_mut(j)[k..];
                let dot: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= vi * dot * 2.0;
                }
            }
            reflectors.push(v);
        }
        let diag: Vec<f64> = (0..cols).map(|k| r[(k, k)].norm()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let rcond = if dmax == 0.0 { 0.0 } else { dmin / dmax };
        if rcond < RCOND_MIN {
            return Err(Error::SingularDesign(format!(
                "reciprocal condition estimate {rcond:.3e} below {RCOND_MIN:.0e}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            r,
            reflectors,
            rcond,
        })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Minimizes `‖A·x − b‖₂`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.rows {
            return Err(Error::dims(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut y = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            let seg = &mut y[k..];
            let dot: Complex64 = v.iter().zip(seg.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
            for (yi, vi) in seg.iter_mut().zip(v) {
                *yi -= vi * dot * 2.0;
            }
        }
        let n = self.cols;
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.r[(i, j)] * x[j];
            }
            x[i] = acc / self.r[(i, i)];
        }
        Ok(x)
    }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::dims(format!(
            "cannot invert non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::SingularDesign("zero matrix".into()));
    }
    let mut work = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| work[(i, col)].norm().total_cmp(&work[(j, col)].norm()))
            .expect("non-empty range");
        let pivot = work[(pivot_row, col)];
        if pivot.norm() <= RCOND_MIN * scale {
            return Err(Error::SingularDesign(format!(
                "pivot {:.3e} in column {col} is negligible",
                pivot.norm()
            )));
        }
        if pivot_row != col {
            for c in 0..n {
                let (a1, a2) = (work[(col, c)], work[(pivot_row, c)]);
                work[(col, c)] = a2;
                work[(pivot_row, c)] = a1;
                let (b1, b2) = (inv[(col, c)], inv[(pivot_row, c)]);
                inv[(col, c)] = b2;
                inv[(pivot_row, c)] = b1;
            }
        }
        let p_inv = pivot.inv();
        for c in 0..n {
            work[(col, c)] *= p_inv;
            inv[(col, c)] *= p_inv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[(r, col)];
            if f == ZERO {
                continue;
            }
            for c in 0..n {
                let w = work[(col, c)];
                let i = inv[(col, c)];
                work[(r, c)] -= f * w;
                inv[(r, c)] -= f * i;
            }
        }
    }
    Ok(inv)
}
