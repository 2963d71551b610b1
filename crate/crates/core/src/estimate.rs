//! Least-squares channel estimators and their exact covariance.
//!
//! Three solvers share one contract, `θ̂ = (HᴴH)⁻¹Hᴴs`:
//!
//! * [`ls_estimate`] / [`LsSolver`]: Householder QR on the full system
//!   matrix. Works for any full-rank design and serves as the reference.
//! * [`onoff_estimate_fast`]: the on/off pattern has a sparse inverse, so
//!   `ĥ_d = x₁*s₁` and `v̂_k = x_{k+1}*s_{k+1} − x₁*s₁`, in `O(TM)`.
//! * [`DftSolver`]: for (row/column permuted) DFT designs `ΦᴴΦ = T·I`, so
//!   `θ̂ = Φᴴ Xᴴ s / T`, which is one length-`T` inverse FFT per antenna.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::channel::{build_system_matrix, SystemDims};
use crate::design::{certify, default_gram_tol, Scheme, TrainingDesign};
use crate::error::{Error, Result};
use crate::linalg::{invert, QrFactorization};
use crate::tensor_ops::{kron, ComplexMatrix, ZERO};

/// Largest `(K+1)M` for which the full covariance is materialized.
pub const MAX_DENSE_COVARIANCE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    NormalEquations,
    OnOffFast,
    Fft,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::NormalEquations => "normal-equations",
            SolverKind::OnOffFast => "onoff-fast",
            SolverKind::Fft => "fft",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub theta_hat: Vec<Complex64>,
    pub m: usize,
    pub solver: SolverKind,
}

impl Estimate {
    pub fn h_d_hat(&self) -> &[Complex64] {
        &self.theta_hat[..self.m]
    }

    /// Cascaded-channel estimate as an `M × K` matrix.
    pub fn v_hat(&self) -> ComplexMatrix {
        let k = self.theta_hat.len() / self.m - 1;
        ComplexMatrix::from_col_major(self.m, k, self.theta_hat[self.m..].to_vec())
            .expect("estimate length is (K+1)·M")
    }
}

/// Reference least-squares solve of `s ≈ Hθ` for `M` receive antennas.
pub fn ls_estimate(h: &ComplexMatrix, s: &[Complex64], m: usize) -> Result<Estimate> {
    if m == 0 || !h.cols().is_multiple_of(m) {
        return Err(Error::dims(format!("{} unknowns is not a multiple of M={m}", h.cols())));
    }
    let theta_hat = QrFactorization::new(h)?.solve(s)?;
    Ok(Estimate {
        theta_hat,
        m,
        solver: SolverKind::NormalEquations,
    })
}

/// QR-based solver with the factorization of `H` computed once.
#[derive(Debug, Clone)]
pub struct LsSolver {
    qr: QrFactorization,
    m: usize,
}

impl LsSolver {
    pub fn new(design: &TrainingDesign, m: usize) -> Result<Self> {
        Self::from_system_matrix(&build_system_matrix(design, m), m)
    }

    pub fn from_system_matrix(h: &ComplexMatrix, m: usize) -> Result<Self> {
        if m == 0 || !h.cols().is_multiple_of(m) {
            return Err(Error::dims(format!("{} unknowns is not a multiple of M={m}", h.cols())));
        }
        Ok(Self {
            qr: QrFactorization::new(h)?,
            m,
        })
    }

    pub fn solve(&self, s: &[Complex64]) -> Result<Estimate> {
        Ok(Estimate {
            theta_hat: self.qr.solve(s)?,
            m: self.m,
            solver: SolverKind::NormalEquations,
        })
    }
}

fn check_obs(s: &[Complex64], pilots: &[Complex64], dims: &SystemDims) -> Result<()> {
    if pilots.len() != dims.t {
        return Err(Error::dims(format!("{} pilots for T={}", pilots.len(), dims.t)));
    }
    if s.len() != dims.t * dims.m {
        return Err(Error::dims(format!(
            "observation of length {} for T·M={}",
            s.len(),
            dims.t * dims.m
        )));
    }
    Ok(())
}

/// Closed-form inverse of the on/off design.
pub fn onoff_estimate_fast(s: &[Complex64], pilots: &[Complex64], dims: &SystemDims) -> Result<Estimate> {
    check_obs(s, pilots, dims)?;
    let k = dims.estimated_k();
    if dims.t != k + 1 {
        return Err(Error::dims(format!("on/off estimation needs T=K+1, got T={} K={k}", dims.t)));
    }
    let m = dims.m;
    let mut theta_hat = Vec::with_capacity(dims.t * m);
    let x1 = pilots[0].conj();
    theta_hat.extend(s[..m].iter().map(|z| z * x1));
    for t in 1..dims.t {
        let xt = pilots[t].conj();
        for i in 0..m {
            let base = theta_hat[i];
            theta_hat.push(s[t * m + i] * xt - base);
        }
    }
    Ok(Estimate {
        theta_hat,
        m,
        solver: SolverKind::OnOffFast,
    })
}

/// FFT path for DFT and permuted-DFT designs.
#[derive(Clone)]
pub struct DftSolver {
    fft: Arc<dyn Fft<f64>>,
    dims: SystemDims,
    pilots: Vec<Complex64>,
    // buffer slot u receives training period row_source[u]
    row_source: Option<Vec<usize>>,
    // design column j reads inverse-DFT bin col_bins[j]
    col_bins: Vec<usize>,
}

impl fmt::Debug for DftSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftSolver")
            .field("dims", &self.dims)
            .field("row_source", &self.row_source)
            .field("col_bins", &self.col_bins)
            .finish()
    }
}

impl DftSolver {
    /// Plans the inverse transform for `design`, which must be a DFT or
    /// permuted-DFT design.
    pub fn new(design: &TrainingDesign, m: usize) -> Result<Self> {
        let (t, k) = (design.t(), design.k());
        let dims = SystemDims::new(m, k, t)?;
        let (row_source, col_bins) = match design.scheme() {
            Scheme::Dft => (None, (0..=k).collect()),
            Scheme::PermutedDft { rows, cols } => {
                // Φ[t, j] = F[rows[t], cols⁻¹[j]]
                let inv_cols = cols.inverse();
                (
                    Some(rows.inverse().mapping().to_vec()),
                    inv_cols.mapping()[..=k].to_vec(),
                )
            }
            other => {
                return Err(Error::param(format!(
                    "FFT estimation needs a DFT design, got {}",
                    other.label()
                )))
            }
        };
        Ok(Self::build(dims, design.pilots().to_vec(), row_source, col_bins))
    }

    fn build(dims: SystemDims, pilots: Vec<Complex64>, row_source: Option<Vec<usize>>, col_bins: Vec<usize>) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(dims.t);
        Self {
            fft,
            dims,
            pilots,
            row_source,
            col_bins,
        }
    }

    pub fn estimate(&self, s: &[Complex64]) -> Result<Estimate> {
        let SystemDims { m, t, .. } = self.dims;
        check_obs(s, &self.pilots, &self.dims)?;
        // one length-T row per antenna: mat(diag(X*)⊙s) transposed into rows
        let mut buf = vec![ZERO; m * t];
        for u in 0..t {
            let src = self.row_source.as_ref().map_or(u, |r| r[u]);
            let xc = self.pilots[src].conj();
            for a in 0..m {
                buf[a * t + u] = s[src * m + a] * xc;
            }
        }
        let mut scratch = vec![ZERO; self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        let scale = 1.0 / t as f64;
        let mut theta_hat = Vec::with_capacity(self.col_bins.len() * m);
        for &bin in &self.col_bins {
            theta_hat.extend((0..m).map(|a| buf[a * t + bin] * scale));
        }
        Ok(Estimate {
            theta_hat,
            m,
            solver: SolverKind::Fft,
        })
    }
}

/// One-shot FFT estimate for the plain DFT design.
pub fn dft_estimate_fft(s: &[Complex64], pilots: &[Complex64], dims: &SystemDims) -> Result<Estimate> {
    check_obs(s, pilots, dims)?;
    let k = dims.estimated_k();
    if dims.t < k + 1 {
        return Err(Error::InvalidDims(format!("T={} < K+1={}", dims.t, k + 1)));
    }
    let dims = SystemDims { kbar: None, k, ..*dims };
    DftSolver::build(dims, pilots.to_vec(), None, (0..=k).collect()).estimate(s)
}

/// The fastest applicable solver for a design.
#[derive(Debug, Clone)]
pub enum Estimator {
    OnOff { dims: SystemDims, pilots: Vec<Complex64> },
    Fft(DftSolver),
    Ls(LsSolver),
}

impl Estimator {
    pub fn for_design(design: &TrainingDesign, m: usize) -> Result<Self> {
        match design.scheme() {
            Scheme::OnOff => Ok(Estimator::OnOff {
                dims: SystemDims::new(m, design.k(), design.t())?,
                pilots: design.pilots().to_vec(),
            }),
            Scheme::Dft | Scheme::PermutedDft { .. } => Ok(Estimator::Fft(DftSolver::new(design, m)?)),
            Scheme::Custom => Ok(Estimator::Ls(LsSolver::new(design, m)?)),
        }
    }

    /// Always the QR reference, regardless of scheme.
    pub fn reference(design: &TrainingDesign, m: usize) -> Result<Self> {
        Ok(Estimator::Ls(LsSolver::new(design, m)?))
    }

    pub fn estimate(&self, s: &[Complex64]) -> Result<Estimate> {
        match self {
            Estimator::OnOff { dims, pilots } => onoff_estimate_fast(s, pilots, dims),
            Estimator::Fft(solver) => solver.estimate(s),
            Estimator::Ls(solver) => solver.solve(s),
        }
    }

    pub fn kind(&self) -> SolverKind {
        match self {
            Estimator::OnOff { .. } => SolverKind::OnOffFast,
            Estimator::Fft(_) => SolverKind::Fft,
            Estimator::Ls(_) => SolverKind::NormalEquations,
        }
    }
}

/// Estimator covariance `σ²(ΦᴴΦ)⁻¹ ⊗ I_M`, kept in Kronecker-factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct CrlbReport {
    /// `ΦᴴΦ`.
    pub gram: ComplexMatrix,
    /// `σ²(ΦᴴΦ)⁻¹`.
    pub factor: ComplexMatrix,
    pub sigma2: f64,
    pub m: usize,
}

impl CrlbReport {
    pub fn len(&self) -> usize {
        self.factor.rows() * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variance of `θ̂[i]`, with `i = k·M + m`.
    pub fn variance_at(&self, i: usize) -> f64 {
        let k = i / self.m;
        self.factor[(k, k)].re
    }

    pub fn per_element_variance(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.variance_at(i)).collect()
    }

    /// Diagonal of the Fisher information `σ⁻²(ΦᴴΦ ⊗ I_M)`.
    pub fn fisher_diag(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let k = i / self.m;
                self.gram[(k, k)].re / self.sigma2
            })
            .collect()
    }

    /// Total variance, `tr(C)`.
    pub fn trace(&self) -> f64 {
        (0..self.factor.rows()).map(|k| self.factor[(k, k)].re).sum::<f64>() * self.m as f64
    }

    pub fn covariance_matrix(&self) -> Result<ComplexMatrix> {
        if self.len() > MAX_DENSE_COVARIANCE {
            return Err(Error::TooLarge(format!(
                "{}-square covariance exceeds {MAX_DENSE_COVARIANCE}",
                self.len()
            )));
        }
        Ok(kron(&self.factor, &ComplexMatrix::identity(self.m)))
    }
}

/// Exact estimator covariance for `design`. The on/off and DFT designs use
/// their closed-form Gram inverses; other designs are inverted numerically.
pub fn covariance(design: &TrainingDesign, sigma2: f64, m: usize) -> Result<CrlbReport> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::param(format!("noise variance {sigma2} must be positive")));
    }
    if m == 0 {
        return Err(Error::InvalidDims("M must be positive".into()));
    }
    let n = design.k() + 1;
    let t = design.t() as f64;
    let real = |x: f64| Complex64::new(x, 0.0);
    let (gram, factor) = match design.scheme() {
        Scheme::OnOff => {
            let gram = design.phi().gram();
            // [[1, −1ᵀ], [−1, E_K + I_K]]
            let factor = ComplexMatrix::from_fn(n, n, |i, j| {
                let v = match (i, j) {
                    (0, 0) => 1.0,
                    (0, _) | (_, 0) => -1.0,
                    _ if i == j => 2.0,
                    _ => 1.0,
                };
                real(sigma2 * v)
            });
            (gram, factor)
        }
        Scheme::Dft | Scheme::PermutedDft { .. } => {
            let gram = ComplexMatrix::identity(n).scale(real(t));
            let factor = ComplexMatrix::identity(n).scale(real(sigma2 / t));
            (gram, factor)
        }
        Scheme::Custom => {
            let gram = design.phi().gram();
            let factor = invert(&gram)?.scale(real(sigma2));
            (gram, factor)
        }
    };
    Ok(CrlbReport { gram, factor, sigma2, m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagBound {
    /// `1 / [𝓘]_{ii}` per element.
    pub bound: Vec<f64>,
    /// True when the Fisher information is diagonal, so the bound is tight.
    pub attained: bool,
}

/// Per-element lower bound `1/[𝓘(θ)]_{ii}` on the estimator variance.
pub fn crlb_diag_bound(design: &TrainingDesign, sigma2: f64, m: usize) -> DiagBound {
    let gram = match design.scheme() {
        Scheme::Dft | Scheme::PermutedDft { .. } => {
            ComplexMatrix::identity(design.k() + 1).scale(Complex64::new(design.t() as f64, 0.0))
        }
        _ => design.phi().gram(),
    };
    let n = gram.rows();
    let bound = (0..n * m)
        .map(|i| {
            let k = i / m;
            sigma2 / gram[(k, k)].re
        })
        .collect();
    let tol = default_gram_tol(design.t());
    let offdiag = certify(design, tol).gram_offdiag_max;
    DiagBound {
        bound,
        attained: offdiag < tol,
    }
}
