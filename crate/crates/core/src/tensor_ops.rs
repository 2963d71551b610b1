//! Dense complex matrices and the reshaping/product helpers the signal model
//! is written in: `vec`/`mat`, `diag`, Kronecker and Hadamard products, DFT
//! columns and permutation matrices.
//!
//! Storage is column-major, so `vec(X)` is a copy of the backing buffer.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self::from_fn(n_rows, n_cols, |r, c| rows[r][c])
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let owned: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&owned)
    }

    /// Wraps a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dims("matrix must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "buffer of length {} cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_col_major(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn row(&self, r: usize) -> Vec<Complex64> {
        (0..self.cols).map(|c| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == ZERO {
                    continue;
                }
                for (o, &a) in out_col.iter_mut().zip(self.column(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for (c, &xc) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(c)) {
                *o += a * xc;
            }
        }
        Ok(out)
    }

    /// `AᴴA` without materializing the adjoint.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v: Complex64 = self
                    .column(i)
                    .iter()
                    .zip(self.column(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    pub fn hadamard(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::dims(format!(
                "hadamard of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - rhs`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Keeps the first `ncols` columns.
    pub fn leading_columns(&self, ncols: usize) -> Result<ComplexMatrix> {
        if ncols == 0 || ncols > self.cols {
            return Err(Error::dims(format!(
                "cannot take {ncols} leading columns of a {}-column matrix",
                self.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: ncols,
            data: self.data[..ncols * self.rows].to_vec(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("non-conformable matrix product")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Columnwise stacking.
pub fn vec(x: &ComplexMatrix) -> Vec<Complex64> {
    x.data.clone()
}

/// Inverse of [`vec`].
pub fn mat(x: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_col_major(rows, cols, x.to_vec())
}

pub fn diag_build(x: &[Complex64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(x.len(), x.len());
    for (i, &v) in x.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

pub fn diag_extract(x: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !x.is_square() {
        return Err(Error::dims(format!(
            "diagonal of non-square {}x{} matrix",
            x.rows, x.cols
        )));
    }
    Ok((0..x.rows).map(|i| x[(i, i)]).collect())
}

/// `exp(-j2π·i/n)`, reducing the angle to `[0, 2π)` first.
#[inline]
pub fn unit_root(i: usize, n: usize) -> Complex64 {
    let angle = -2.0 * PI * ((i % n) as f64) / n as f64;
    Complex64::from_polar(1.0, angle)
}

/// The `ncols` leading columns of the `t × t` DFT matrix,
/// `[F]_{t,k} = exp(-j2π t k / T)` with zero-based `t, k`.
pub fn dft_columns(t: usize, ncols: usize) -> Result<ComplexMatrix> {
    if t == 0 || ncols == 0 {
        return Err(Error::dims("DFT size and column count must be positive"));
    }
    if ncols > t {
        return Err(Error::dims(format!(
            "{ncols} columns requested from a {t}-point DFT"
        )));
    }
    Ok(ComplexMatrix::from_fn(t, ncols, |r, c| unit_root(r * c, t)))
}

/// A permutation stored as its index mapping. The materialized matrix has a
/// one at `(i, mapping[i])` for every row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMatrix {
    mapping: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `P · x`
    Left,
    /// `x · P`
    Right,
}

impl PermutationMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        if n == 0 {
            return Err(Error::param("empty permutation"));
        }
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(Error::param(format!("{mapping:?} is not a bijection on 0..{n}")));
            }
        }
        Ok(Self { mapping })
    }

    /// Transposition of two zero-based indices.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::param(format!("swap ({a}, {b}) out of range for size {n}")));
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(a, b);
        Ok(Self { mapping })
    }

    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Self { mapping: inv }
    }

    pub fn fixes(&self, i: usize) -> bool {
        self.mapping.get(i) == Some(&i)
    }

    pub fn materialize(&self) -> ComplexMatrix {
        let n = self.size();
        let mut p = ComplexMatrix::zeros(n, n);
        for (i, &m) in self.mapping.iter().enumerate() {
            p[(i, m)] = ONE;
        }
        p
    }
}

pub fn permute(p: &PermutationMatrix, x: &ComplexMatrix, side: Side) -> Result<ComplexMatrix> {
    match side {
        Side::Left => {
            if p.size() != x.rows {
                return Err(Error::dims(format!(
                    "left permutation of size {} on {} rows",
                    p.size(),
                    x.rows
                )));
            }
            Ok(ComplexMatrix::from_fn(x.rows, x.cols, |r, c| x[(p.mapping[r], c)]))
        }
        Side::Right => {
            if p.size() != x.cols {
                return Err(Error::dims(format!(
                    "right permutation of size {} on {} columns",
                    p.size(),
                    x.cols
                )));
            }
            // (xP)[:, j] = x[:, i] where mapping[i] = j
            let inv = p.inverse();
            Ok(ComplexMatrix::from_fn(x.rows, x.cols, |r, c| x[(r, inv.mapping[c])]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
            let data = v.into_iter().map(|(a, b)| c(a, b)).collect();
            ComplexMatrix::from_col_major(rows, cols, data).unwrap()
        })
    }

    #[test]
    fn kron_examples() {
        let two = ComplexMatrix::from_real_rows(&[&[2.0]]);
        assert_eq!(
            kron(&two, &ComplexMatrix::identity(2)),
            ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 2.0]])
        );

        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let expected = ComplexMatrix::from_real_rows(&[
            &[1.0, 2.0, 0.0, 0.0],
            &[3.0, 4.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 2.0],
            &[0.0, 0.0, 3.0, 4.0],
        ]);
        assert_eq!(kron(&ComplexMatrix::identity(2), &b), expected);

        let ones = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]]);
        let five = ComplexMatrix::from_real_rows(&[&[5.0]]);
        assert_eq!(kron(&ones, &five), ComplexMatrix::from_real_rows(&[&[5.0], &[5.0]]));
    }

    #[test]
    fn vec_and_mat_are_columnwise() {
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 3.0], &[2.0, 4.0]]);
        let v = vec(&x);
        assert_eq!(v, [1.0, 2.0, 3.0, 4.0].map(|r| c(r, 0.0)));
        assert_eq!(mat(&v, 2, 2).unwrap(), x);
        assert!(matches!(mat(&v, 3, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn diag_round_trip() {
        let d = diag_build(&[ONE, c(0.0, 1.0)]);
        assert_eq!(d, ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, c(0.0, 1.0)]]));
        assert_eq!(diag_extract(&ComplexMatrix::identity(3)).unwrap(), vec![ONE; 3]);
        assert!(diag_extract(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn dft_columns_examples() {
        let f2 = dft_columns(2, 2).unwrap();
        assert!(f2.max_abs_diff(&ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])) < 1e-15);

        let f4 = dft_columns(4, 2).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)];
        for (got, want) in f4.column(1).iter().zip(expected) {
            assert!((got - want).norm() < 1e-15);
        }
        assert!(f4.column(0).iter().all(|&z| z == ONE));

        let f = dft_columns(8, 6).unwrap();
        let g = f.gram();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(6).scale(c(8.0, 0.0))) < 1e-12);

        assert!(dft_columns(3, 4).is_err());
    }

    #[test]
    fn dft_full_square_is_scaled_unitary() {
        for t in [1, 2, 3, 7, 16, 51, 64] {
            let f = dft_columns(t, t).unwrap();
            let target = ComplexMatrix::identity(t).scale(c(t as f64, 0.0));
            assert!(f.gram().max_abs_diff(&target) < 1e-12 * t as f64, "T={t}");
        }
    }

    #[test]
    fn permutation_examples() {
        let x = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0)], vec![c(3.0, -1.0)]]);
        let id = PermutationMatrix::identity(2);
        assert_eq!(permute(&id, &x, Side::Left).unwrap(), x);

        let sw = PermutationMatrix::swap(2, 0, 1).unwrap();
        let swapped = permute(&sw, &x, Side::Left).unwrap();
        assert_eq!(swapped, ComplexMatrix::from_rows(&[vec![c(3.0, -1.0)], vec![c(1.0, 2.0)]]));

        assert!(PermutationMatrix::from_mapping(vec![0, 0, 1]).is_err());
        assert!(permute(&sw, &ComplexMatrix::zeros(3, 1), Side::Left).is_err());
    }

    #[test]
    fn permute_matches_materialized_product() {
        let p = PermutationMatrix::from_mapping(vec![2, 0, 3, 1]).unwrap();
        let x = ComplexMatrix::from_fn(4, 4, |r, c_| c((r * 4 + c_) as f64, r as f64 - c_ as f64));
        let pm = p.materialize();
        assert_eq!(permute(&p, &x, Side::Left).unwrap(), &pm * &x);
        assert_eq!(permute(&p, &x, Side::Right).unwrap(), &x * &pm);
        assert_eq!(pm.transpose().matmul(&pm).unwrap(), ComplexMatrix::identity(4));
    }

    proptest! {
        #[test]
        fn mat_vec_round_trip(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let x = ComplexMatrix::from_fn(rows, cols, |r, c_| {
                c((seed.wrapping_mul(r as u64 + 3) % 97) as f64, c_ as f64)
            });
            prop_assert_eq!(mat(&vec(&x), rows, cols).unwrap(), x);
        }

        #[test]
        fn kron_mixed_product(
            a in arb_matrix(2, 3), b in arb_matrix(2, 2),
            cm in arb_matrix(3, 2), d in arb_matrix(2, 3),
        ) {
            let lhs = &kron(&a, &b) * &kron(&cm, &d);
            let rhs = kron(&(&a * &cm), &(&b * &d));
            let scale = rhs.max_abs().max(1.0);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
        }

        #[test]
        fn permutation_inverse_round_trip(perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
                                          x in arb_matrix(6, 3)) {
            let p = PermutationMatrix::from_mapping(perm).unwrap();
            let there = permute(&p, &x, Side::Left).unwrap();
            prop_assert_eq!(permute(&p.inverse(), &there, Side::Left).unwrap(), x.clone());
            let pm = p.materialize();
            prop_assert_eq!(pm.transpose().matmul(&pm).unwrap(), ComplexMatrix::identity(6));
        }
    }
}
