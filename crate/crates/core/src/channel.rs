//! Ground-truth channels, noise and the stacked observation model
//! `s = X(Φ ⊗ I_M)θ + n`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::design::TrainingDesign;
use crate::error::{Error, Result};
use crate::tensor_ops::{diag_build, kron, ComplexMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// Receive antennas at the access point.
    pub m: usize,
    /// IRS elements.
    pub k: usize,
    /// Training periods.
    pub t: usize,
    /// Number of element blocks when elements are grouped.
    pub kbar: Option<usize>,
}

impl SystemDims {
    pub fn new(m: usize, k: usize, t: usize) -> Result<Self> {
        let dims = Self { m, k, t, kbar: None };
        dims.validate()?;
        Ok(dims)
    }

    /// Groups the `k` elements into `kbar` equal blocks; training then only
    /// needs `T ≥ kbar + 1`.
    pub fn with_blocks(m: usize, k: usize, t: usize, kbar: usize) -> Result<Self> {
        let dims = Self {
            m,
            k,
            t,
            kbar: Some(kbar),
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::InvalidDims(format!("M={} and K={} must be positive", self.m, self.k)));
        }
        if let Some(kbar) = self.kbar {
            if kbar == 0 || kbar > self.k || !self.k.is_multiple_of(kbar) {
                return Err(Error::InvalidDims(format!(
                    "{kbar} blocks do not tile K={} evenly",
                    self.k
                )));
            }
        }
        let needed = self.estimated_k() + 1;
        if self.t < needed {
            return Err(Error::InvalidDims(format!("T={} < K+1={needed}", self.t)));
        }
        Ok(())
    }

    /// Columns of the cascaded channel being estimated (`K̄` when blocked).
    pub fn estimated_k(&self) -> usize {
        self.kbar.unwrap_or(self.k)
    }

    /// Length of `θ`.
    pub fn theta_len(&self) -> usize {
        (self.estimated_k() + 1) * self.m
    }

    pub fn obs_len(&self) -> usize {
        self.t * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModelKind {
    IidRayleigh,
    /// Antenna correlation `[R]_{ij} = r^{|i−j|}`.
    CorrelatedRayleigh { r: f64 },
}

impl ChannelModelKind {
    pub fn correlated(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::param(format!("correlation {r} outside [0, 1)")));
        }
        Ok(Self::CorrelatedRayleigh { r })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::IidRayleigh => "iid",
            Self::CorrelatedRayleigh { .. } => "corr",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFactors {
    /// Access point to IRS, `K × M`.
    pub g: ComplexMatrix,
    /// IRS to user, length `K`.
    pub h: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h_d: Vec<Complex64>,
    /// Cascaded channel `Gᴴdiag(h)`, `M × K`.
    pub v: ComplexMatrix,
    pub physical: Option<PhysicalFactors>,
}

impl ChannelState {
    pub fn new(h_d: Vec<Complex64>, v: ComplexMatrix) -> Result<Self> {
        if h_d.len() != v.rows() {
            return Err(Error::dims(format!(
                "direct channel of length {} with {} cascaded rows",
                h_d.len(),
                v.rows()
            )));
        }
        Ok(Self { h_d, v, physical: None })
    }

    /// Splits a stacked `[h_d; v₁; …; v_K]` vector.
    pub fn from_theta(theta: &[Complex64], m: usize) -> Result<Self> {
        if m == 0 || !theta.len().is_multiple_of(m) || theta.len() < 2 * m {
            return Err(Error::dims(format!(
                "theta of length {} is not (K+1)·M for M={m}",
                theta.len()
            )));
        }
        let k = theta.len() / m - 1;
        let v = ComplexMatrix::from_col_major(m, k, theta[m..].to_vec())?;
        Self::new(theta[..m].to_vec(), v)
    }

    pub fn m(&self) -> usize {
        self.h_d.len()
    }

    pub fn k(&self) -> usize {
        self.v.cols()
    }

    /// `θ = [h_d; v₁; …; v_K]`.
    pub fn theta_vector(&self) -> Vec<Complex64> {
        let mut theta = Vec::with_capacity(self.m() * (self.k() + 1));
        theta.extend_from_slice(&self.h_d);
        theta.extend_from_slice(self.v.as_col_major());
        theta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch {
    /// `[s₁; …; s_T]`, each `s_t` of length `M`.
    pub s: Vec<Complex64>,
    pub sigma2: f64,
    pub dims: SystemDims,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Awgn,
    /// Diagnostic: skip the noise draw entirely.
    Suppressed,
}

/// One `CN(0, σ²)` draw.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma2: f64) -> Complex64 {
    let scale = (0.5 * sigma2).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Draws length-`M` channel vectors, coloring them with the Cholesky factor
/// of the antenna correlation matrix when one is configured.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    m: usize,
    // lower-triangular, row-major
    chol: Option<Vec<f64>>,
}

impl ChannelSampler {
    pub fn new(m: usize, model: ChannelModelKind) -> Result<Self> {
        let chol = match model {
            ChannelModelKind::IidRayleigh => None,
            ChannelModelKind::CorrelatedRayleigh { r } => {
                if !(0.0..1.0).contains(&r) {
                    return Err(Error::param(format!("correlation {r} outside [0, 1)")));
                }
                Some(cholesky(&correlation_matrix(m, r), m)?)
            }
        };
        Ok(Self { m, chol })
    }

    pub fn sample_vector<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.m);
        for z in out.iter_mut() {
            *z = complex_gaussian(rng, 1.0);
        }
        if let Some(l) = &self.chol {
            // in-place L·w, bottom row first so inputs are still unread
            for i in (0..self.m).rev() {
                let row = &l[i * self.m..i * self.m + i + 1];
                let acc: Complex64 = row.iter().zip(&out[..=i]).map(|(a, w)| w * *a).sum();
                out[i] = acc;
            }
        }
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> ChannelState {
        let mut h_d = vec![ZERO; self.m];
        self.sample_vector(rng, &mut h_d);
        let mut v = ComplexMatrix::zeros(self.m, k);
        for c in 0..k {
            self.sample_vector(rng, v.column_mut(c));
        }
        ChannelState { h_d, v, physical: None }
    }
}

/// `[R]_{ij} = r^{|i−j|}`, row-major.
pub fn correlation_matrix(m: usize, r: f64) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = r.powi((i as i32 - j as i32).abs());
        }
    }
    out
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|p| l[i * n + p] * l[j * n + p]).sum();
            if i == j {
                let d = a[i * n + i] - dot;
                if d <= 0.0 {
                    return Err(Error::param("correlation matrix is not positive definite"));
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - dot) / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Draws `h_d` and the columns of `V` directly as (possibly antenna
/// correlated) unit-variance circular Gaussians.
pub fn gen_channel<R: Rng + ?Sized>(
    dims: &SystemDims,
    model: ChannelModelKind,
    rng: &mut R,
) -> Result<ChannelState> {
    dims.validate()?;
    Ok(ChannelSampler::new(dims.m, model)?.sample_state(dims.k, rng))
}

/// Draws `G` and `h` and forms `V = Gᴴdiag(h)`.
pub fn gen_physical_channel<R: Rng + ?Sized>(
    dims: &SystemDims,
    model: ChannelModelKind,
    rng: &mut R,
) -> Result<ChannelState> {
    dims.validate()?;
    let sampler = ChannelSampler::new(dims.m, model)?;
    let mut h_d = vec![ZERO; dims.m];
    sampler.sample_vector(rng, &mut h_d);
    // each row of G is an antenna-domain vector
    let mut gt = ComplexMatrix::zeros(dims.m, dims.k);
    for k in 0..dims.k {
        sampler.sample_vector(rng, gt.column_mut(k));
    }
    let g = gt.transpose();
    let h: Vec<Complex64> = (0..dims.k).map(|_| complex_gaussian(rng, 1.0)).collect();
    cascade(h_d, g, h)
}

/// Builds a state from explicit physical factors.
pub fn cascade(h_d: Vec<Complex64>, g: ComplexMatrix, h: Vec<Complex64>) -> Result<ChannelState> {
    if g.rows() != h.len() || g.cols() != h_d.len() {
        return Err(Error::dims(format!(
            "G is {}x{}, h has {} entries, h_d has {}",
            g.rows(),
            g.cols(),
            h.len(),
            h_d.len()
        )));
    }
    let v = g.adjoint().matmul(&diag_build(&h))?;
    Ok(ChannelState {
        h_d,
        v,
        physical: Some(PhysicalFactors { g, h }),
    })
}

fn check_compatible(theta: &ChannelState, design: &TrainingDesign) -> Result<()> {
    if theta.k() != design.k() {
        return Err(Error::dims(format!(
            "channel has K={} but design has K={}",
            theta.k(),
            design.k()
        )));
    }
    Ok(())
}

/// Noiseless `Hθ`, evaluated blockwise as `x_t Σ_c Φ_{t,c} θ_c`.
pub fn noiseless_observation(theta: &ChannelState, design: &TrainingDesign) -> Result<Vec<Complex64>> {
    check_compatible(theta, design)?;
    let (m, t_len) = (theta.m(), design.t());
    let phi = design.phi();
    let mut s = vec![ZERO; t_len * m];
    for t in 0..t_len {
        let block = &mut s[t * m..(t + 1) * m];
        let x = design.pilots()[t];
        for c in 0..=design.k() {
            let w = phi[(t, c)] * x;
            if w == ZERO {
                continue;
            }
            let col = if c == 0 { &theta.h_d[..] } else { theta.v.column(c - 1) };
            for (o, &a) in block.iter_mut().zip(col) {
                *o += a * w;
            }
        }
    }
    Ok(s)
}

/// Noiseless observation through the physical path
/// `(h_d + Gᴴdiag(φ_t)h)x_t`; requires physical factors.
pub fn physical_observation(theta: &ChannelState, design: &TrainingDesign) -> Result<Vec<Complex64>> {
    check_compatible(theta, design)?;
    let PhysicalFactors { g, h } = theta
        .physical
        .as_ref()
        .ok_or_else(|| Error::param("channel state has no physical factors"))?;
    let gh = g.adjoint();
    let m = theta.m();
    let mut s = Vec::with_capacity(design.t() * m);
    for t in 0..design.t() {
        let phi_t: Vec<Complex64> = (1..=design.k()).map(|c| design.phi()[(t, c)]).collect();
        let weighted: Vec<Complex64> = phi_t.iter().zip(h).map(|(p, hk)| p * hk).collect();
        let reflected = gh.matvec(&weighted)?;
        let x = design.pilots()[t];
        s.extend(theta.h_d.iter().zip(reflected).map(|(d, r)| (d + r) * x));
    }
    Ok(s)
}

/// `s = Hθ + n` with `n ~ CN(0, σ²I)`.
pub fn synthesize<R: Rng + ?Sized>(
    theta: &ChannelState,
    design: &TrainingDesign,
    sigma2: f64,
    noise: NoiseMode,
    rng: &mut R,
) -> Result<ObservationBatch> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::param(format!("noise variance {sigma2} must be positive")));
    }
    let mut s = noiseless_observation(theta, design)?;
    if noise == NoiseMode::Awgn {
        for z in &mut s {
            *z += complex_gaussian(rng, sigma2);
        }
    }
    Ok(ObservationBatch {
        s,
        sigma2,
        dims: SystemDims {
            m: theta.m(),
            k: theta.k(),
            t: design.t(),
            kbar: None,
        },
    })
}

/// `H = X(Φ ⊗ I_M)` with `X = diag([x₁1_M; …; x_T1_M])`.
pub fn build_system_matrix(design: &TrainingDesign, m: usize) -> ComplexMatrix {
    let psi = kron(design.phi(), &ComplexMatrix::identity(m));
    let x: Vec<Complex64> = design
        .pilots()
        .iter()
        .flat_map(|&x| std::iter::repeat_n(x, m))
        .collect();
    let mut h = psi;
    for c in 0..h.cols() {
        for (z, &xr) in h.column_mut(c).iter_mut().zip(&x) {
            *z *= xr;
        }
    }
    h
}

/// Sums each run of `K/K̄` consecutive cascaded columns into one block column.
pub fn group_blocks(theta: &ChannelState, kbar: usize) -> Result<ChannelState> {
    let k = theta.k();
    if kbar == 0 || kbar > k || !k.is_multiple_of(kbar) {
        return Err(Error::InvalidDims(format!("{kbar} blocks do not tile K={k} evenly")));
    }
    let width = k / kbar;
    let mut v = ComplexMatrix::zeros(theta.m(), kbar);
    for b in 0..kbar {
        let out = v.column_mut(b);
        for c in b * width..(b + 1) * width {
            for (o, &a) in out.iter_mut().zip(theta.v.column(c)) {
                *o += a;
            }
        }
    }
    Ok(ChannelState {
        h_d: theta.h_d.clone(),
        v,
        physical: None,
    })
}

/// Expands a block-level design (`K̄+1` columns) to the full `K+1` element
/// columns by repeating each block setting across its elements.
pub fn expand_block_design(block: &TrainingDesign, k: usize) -> Result<TrainingDesign> {
    let kbar = block.k();
    if kbar == 0 || kbar > k || !k.is_multiple_of(kbar) {
        return Err(Error::InvalidDims(format!("{kbar} blocks do not tile K={k} evenly")));
    }
    let width = k / kbar;
    let phi = ComplexMatrix::from_fn(block.t(), k + 1, |t, c| {
        if c == 0 {
            block.phi()[(t, 0)]
        } else {
            block.phi()[(t, (c - 1) / width + 1)]
        }
    });
    TrainingDesign::custom(phi, block.pilots().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{dft_design, onoff_design, random_pilots, unit_pilots};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn dims_validation() {
        assert!(SystemDims::new(10, 50, 51).is_ok());
        assert!(SystemDims::new(10, 50, 40).is_err());
        assert!(SystemDims::new(0, 5, 6).is_err());
        assert!(SystemDims::with_blocks(2, 12, 5, 4).is_ok());
        assert!(SystemDims::with_blocks(2, 12, 5, 5).is_err());
        assert!(SystemDims::with_blocks(2, 12, 3, 4).is_err());
    }

    #[test]
    fn unit_variance_draws() {
        let sampler = ChannelSampler::new(2, ChannelModelKind::IidRayleigh).unwrap();
        let mut r = rng(1);
        let n = 100_000;
        let mut buf = [ZERO; 2];
        let (mut p, mut cross) = (0.0, ZERO);
        for _ in 0..n {
            sampler.sample_vector(&mut r, &mut buf);
            p += buf[0].norm_sqr();
            cross += buf[0] * buf[1].conj();
        }
        assert!((p / n as f64 - 1.0).abs() < 0.02);
        assert!((cross / n as f64).norm() < 0.02);
    }

    #[test]
    fn correlated_draws_have_adjacent_correlation() {
        let sampler = ChannelSampler::new(3, ChannelModelKind::correlated(0.95).unwrap()).unwrap();
        let mut r = rng(2);
        let n = 100_000;
        let mut buf = [ZERO; 3];
        let (mut p0, mut p1, mut cross) = (0.0, 0.0, ZERO);
        for _ in 0..n {
            sampler.sample_vector(&mut r, &mut buf);
            p0 += buf[0].norm_sqr();
            p1 += buf[1].norm_sqr();
            cross += buf[1] * buf[0].conj();
        }
        let rho = cross.norm() / (p0 * p1).sqrt();
        assert!((rho - 0.95).abs() < 0.02, "rho={rho}");

        let zero_r = ChannelSampler::new(2, ChannelModelKind::correlated(0.0).unwrap()).unwrap();
        let mut cross = ZERO;
        for _ in 0..n {
            zero_r.sample_vector(&mut r, &mut buf[..2]);
            cross += buf[0] * buf[1].conj();
        }
        assert!((cross / n as f64).norm() < 0.02);
        assert!(ChannelModelKind::correlated(1.0).is_err());
    }

    #[test]
    fn same_seed_same_channel() {
        let dims = SystemDims::new(4, 6, 7).unwrap();
        let model = ChannelModelKind::correlated(0.5).unwrap();
        let a = gen_channel(&dims, model, &mut rng(9)).unwrap();
        let b = gen_channel(&dims, model, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.theta_vector().len(), dims.theta_len());
        assert_eq!(ChannelState::from_theta(&a.theta_vector(), 4).unwrap().v, a.v);
    }

    #[test]
    fn physical_cascade() {
        let g = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0)]]);
        let st = cascade(vec![ZERO], g, vec![c(0.5, -1.0)]).unwrap();
        assert_eq!(st.v[(0, 0)], c(1.0, -2.0) * c(0.5, -1.0));

        let g = ComplexMatrix::from_fn(3, 2, |r, k| c(r as f64, k as f64));
        let st = cascade(vec![ZERO; 2], g, vec![ZERO; 3]).unwrap();
        assert_eq!(st.v.max_abs(), 0.0);

        let dims = SystemDims::new(3, 5, 8).unwrap();
        let st = gen_physical_channel(&dims, ChannelModelKind::IidRayleigh, &mut rng(4)).unwrap();
        let pf = st.physical.as_ref().unwrap();
        let expected = pf.g.adjoint().matmul(&diag_build(&pf.h)).unwrap();
        assert!(st.v.max_abs_diff(&expected) < 1e-12);

        let design = dft_design(8, 5, random_pilots(8, &mut rng(5))).unwrap();
        let via_phys = physical_observation(&st, &design).unwrap();
        let via_cascade = noiseless_observation(&st, &design).unwrap();
        let diff = via_phys.iter().zip(&via_cascade).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn two_by_two_hand_evaluation() {
        let design = dft_design(2, 1, unit_pilots(2)).unwrap();
        let (hd, v1) = (c(0.3, 1.0), c(-2.0, 0.5));
        let st = ChannelState::new(vec![hd], ComplexMatrix::from_rows(&[vec![v1]])).unwrap();
        let obs = synthesize(&st, &design, 1.0, NoiseMode::Suppressed, &mut rng(0)).unwrap();
        assert!((obs.s[0] - (hd + v1)).norm() < 1e-15);
        assert!((obs.s[1] - (hd - v1)).norm() < 1e-15);
        assert!(synthesize(&st, &design, 0.0, NoiseMode::Suppressed, &mut rng(0)).is_err());
    }

    #[test]
    fn synthesize_matches_system_matrix() {
        let dims = SystemDims::new(3, 4, 6).unwrap();
        let st = gen_channel(&dims, ChannelModelKind::IidRayleigh, &mut rng(3)).unwrap();
        let design = dft_design(6, 4, random_pilots(6, &mut rng(8))).unwrap();
        let h = build_system_matrix(&design, 3);
        assert_eq!((h.rows(), h.cols()), (18, 15));
        let direct = h.matvec(&st.theta_vector()).unwrap();
        let fast = noiseless_observation(&st, &design).unwrap();
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(noiseless_observation(&st, &dft_design(6, 3, unit_pilots(6)).unwrap()).is_err());
    }

    #[test]
    fn system_matrix_structure() {
        let design = onoff_design(3, unit_pilots(4)).unwrap();
        let h = build_system_matrix(&design, 2);
        assert_eq!(h, kron(design.phi(), &ComplexMatrix::identity(2)));

        let design = dft_design(5, 3, random_pilots(5, &mut rng(1))).unwrap();
        let h = build_system_matrix(&design, 1);
        let expected = diag_build(design.pilots()).matmul(design.phi()).unwrap();
        assert!(h.max_abs_diff(&expected) < 1e-15);

        let m = 3;
        let h = build_system_matrix(&design, m);
        for t in 0..5 {
            for mm in 0..m {
                let row = h.row(t * m + mm);
                let nz: Vec<usize> = (0..row.len()).filter(|&i| row[i] != ZERO).collect();
                let expected: Vec<usize> = (0..4).map(|k| k * m + mm).collect();
                assert_eq!(nz, expected);
                for k in 0..4 {
                    let want = design.pilots()[t] * design.phi()[(t, k)];
                    assert!((row[k * m + mm] - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn noise_moments() {
        let st = ChannelState::new(vec![ZERO; 2], ComplexMatrix::zeros(2, 1)).unwrap();
        let design = dft_design(2, 1, unit_pilots(2)).unwrap();
        let sigma2 = 0.3;
        let mut r = rng(11);
        let n = 50_000;
        let mut cov = [[ZERO; 4]; 4];
        for _ in 0..n {
            let obs = synthesize(&st, &design, sigma2, NoiseMode::Awgn, &mut r).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    cov[i][j] += obs.s[i] * obs.s[j].conj();
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                let v = cov[i][j] / n as f64;
                if i == j {
                    assert!((v.re / sigma2 - 1.0).abs() < 0.05);
                } else {
                    assert!(v.norm() < 0.05 * sigma2);
                }
            }
        }
    }

    #[test]
    fn block_grouping() {
        let dims = SystemDims::new(2, 6, 7).unwrap();
        let st = gen_channel(&dims, ChannelModelKind::IidRayleigh, &mut rng(6)).unwrap();
        assert_eq!(group_blocks(&st, 6).unwrap().v, st.v);

        let one = group_blocks(&st, 1).unwrap();
        for m in 0..2 {
            let sum: Complex64 = (0..6).map(|k| st.v[(m, k)]).sum();
            assert!((one.v[(m, 0)] - sum).norm() < 1e-14);
        }
        assert!(group_blocks(&st, 4).is_err());

        let reduced = group_blocks(&st, 3).unwrap();
        let block_design = dft_design(4, 3, random_pilots(4, &mut rng(7))).unwrap();
        let full_design = expand_block_design(&block_design, 6).unwrap();
        let full = noiseless_observation(&st, &full_design).unwrap();
        let small = noiseless_observation(&reduced, &block_design).unwrap();
        for (a, b) in full.iter().zip(&small) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
