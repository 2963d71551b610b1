//! Training designs `Φ ∈ C^{T×(K+1)}`: construction, feasibility against a
//! phase/attenuation constraint, orthogonality certification and an
//! exhaustive search used as an optimality oracle on tiny instances.
//!
//! Column 0 of `Φ` multiplies the direct channel and is fixed to ones;
//! column `k` (1-based) carries the setting of IRS element `k`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::invert;
use crate::tensor_ops::{dft_columns, permute, ComplexMatrix, PermutationMatrix, Side, ONE, ZERO};

/// Tolerance on unit modulus for pilots and on `|φ| ≤ 1`.
pub const MODULUS_TOL: f64 = 1e-12;
/// Default radian tolerance when matching a phase to a quantization level.
pub const DEFAULT_PHASE_TOL: f64 = 1e-9;
/// Default Gram orthogonality tolerance per unit of `T`.
pub const DEFAULT_GRAM_TOL_PER_T: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    OnOff,
    Dft,
    PermutedDft {
        rows: PermutationMatrix,
        cols: PermutationMatrix,
    },
    Custom,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::OnOff => "onoff",
            Scheme::Dft => "dft",
            Scheme::PermutedDft { .. } => "permuted-dft",
            Scheme::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDesign {
    phi: ComplexMatrix,
    pilots: Vec<Complex64>,
    scheme: Scheme,
}

impl TrainingDesign {
    /// Validates an arbitrary `Φ` and pilot sequence.
    pub fn custom(phi: ComplexMatrix, pilots: Vec<Complex64>) -> Result<Self> {
        Self::with_scheme(phi, pilots, Scheme::Custom)
    }

    fn with_scheme(phi: ComplexMatrix, pilots: Vec<Complex64>, scheme: Scheme) -> Result<Self> {
        if phi.cols() < 2 {
            return Err(Error::InvalidDims("design needs at least one IRS column".into()));
        }
        if pilots.len() != phi.rows() {
            return Err(Error::dims(format!(
                "{} pilots for {} training periods",
                pilots.len(),
                phi.rows()
            )));
        }
        validate_pilots(&pilots)?;
        for t in 0..phi.rows() {
            if (phi[(t, 0)] - ONE).norm() > MODULUS_TOL {
                return Err(Error::param(format!(
                    "first column must be all ones, row {} holds {}",
                    t + 1,
                    phi[(t, 0)]
                )));
            }
            for k in 1..phi.cols() {
                if phi[(t, k)].norm() > 1.0 + MODULUS_TOL {
                    return Err(Error::param(format!(
                        "entry ({}, {}) has modulus {} > 1",
                        t + 1,
                        k + 1,
                        phi[(t, k)].norm()
                    )));
                }
            }
        }
        Ok(Self { phi, pilots, scheme })
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    pub fn pilots(&self) -> &[Complex64] {
        &self.pilots
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// Training periods `T`.
    pub fn t(&self) -> usize {
        self.phi.rows()
    }

    /// IRS elements (or blocks) `K`.
    pub fn k(&self) -> usize {
        self.phi.cols() - 1
    }

    pub fn with_pilots(mut self, pilots: Vec<Complex64>) -> Result<Self> {
        if pilots.len() != self.t() {
            return Err(Error::dims(format!("{} pilots for T={}", pilots.len(), self.t())));
        }
        validate_pilots(&pilots)?;
        self.pilots = pilots;
        Ok(self)
    }

    /// Serializes as the plain-text design format: a `T K` header followed by
    /// `T` lines of `K+1` entries written as `re+imj`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.t(), self.k());
        for t in 0..self.t() {
            let line: Vec<String> = self.phi.row(t).iter().map(|z| format_complex(*z)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text design format. Pilots default to ones.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty design file".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_count = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: hline,
                msg: format!("bad count {s:?}: {e}"),
            })
        };
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `T K`".into(),
            });
        }
        let (t, k) = (parse_count(dims[0])?, parse_count(dims[1])?);
        if t == 0 || k == 0 {
            return Err(Error::Parse {
                line: hline,
                msg: "T and K must be positive".into(),
            });
        }
        let mut phi = ComplexMatrix::zeros(t, k + 1);
        for row in 0..t {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: hline + row + 1,
                msg: format!("expected {t} rows, found {row}"),
            })?;
            let entries: Vec<&str> = line.split_whitespace().collect();
            if entries.len() != k + 1 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {} entries, found {}", k + 1, entries.len()),
                });
            }
            for (col, e) in entries.iter().enumerate() {
                phi[(row, col)] = parse_complex(e).map_err(|msg| Error::Parse { line: ln, msg })?;
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                msg: "trailing content after design rows".into(),
            });
        }
        Self::custom(phi, vec![ONE; t])
    }
}

fn validate_pilots(pilots: &[Complex64]) -> Result<()> {
    for (t, x) in pilots.iter().enumerate() {
        if (x.norm() - 1.0).abs() > MODULUS_TOL {
            return Err(Error::param(format!(
                "pilot {} has modulus {}, expected 1",
                t + 1,
                x.norm()
            )));
        }
    }
    Ok(())
}

fn format_complex(z: Complex64) -> String {
    // normalize -0.0 so the output is stable
    let re = z.re + 0.0;
    let im = z.im + 0.0;
    if im.is_sign_negative() {
        format!("{re}-{}j", -im)
    } else {
        format!("{re}+{im}j")
    }
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let err = |e: std::num::ParseFloatError| format!("bad complex entry {s:?}: {e}");
    let Some(body) = s.strip_suffix('j').or_else(|| s.strip_suffix('i')) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(err);
    };
    // split at the last sign that is not a leading sign or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(err)?;
            let im = body[i..].parse::<f64>().map_err(err)?;
            Ok(Complex64::new(re, im))
        }
        None => body.parse::<f64>().map(|im| Complex64::new(0.0, im)).map_err(err),
    }
}

pub fn unit_pilots(t: usize) -> Vec<Complex64> {
    vec![ONE; t]
}

/// Pilots with independent uniform phases.
pub fn random_pilots<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Vec<Complex64> {
    (0..t)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU)))
        .collect()
}

/// On/off training with `T = K + 1`: period 1 has every element off, period
/// `k + 1` switches on element `k` alone.
pub fn onoff_design(k: usize, pilots: Vec<Complex64>) -> Result<TrainingDesign> {
    if k == 0 {
        return Err(Error::InvalidDims("K must be at least 1".into()));
    }
    if pilots.len() != k + 1 {
        return Err(Error::InvalidDims(format!(
            "on/off training requires T = K+1 = {}, got {} pilots",
            k + 1,
            pilots.len()
        )));
    }
    let phi = ComplexMatrix::from_fn(k + 1, k + 1, |t, c| {
        if c == 0 || (t >= 1 && c == t) {
            ONE
        } else {
            ZERO
        }
    });
    TrainingDesign::with_scheme(phi, pilots, Scheme::OnOff)
}

/// The leading `K+1` columns of the `T`-point DFT.
pub fn dft_design(t: usize, k: usize, pilots: Vec<Complex64>) -> Result<TrainingDesign> {
    check_overdetermined(t, k)?;
    let phi = dft_columns(t, k + 1)?;
    TrainingDesign::with_scheme(phi, pilots, Scheme::Dft)
}

/// `P₁ F P₂` truncated to its leading `K+1` columns. `p2` permutes all `T`
/// DFT columns and must keep column 0 in place.
pub fn permuted_dft_design(
    t: usize,
    k: usize,
    p1: PermutationMatrix,
    p2: PermutationMatrix,
    pilots: Vec<Complex64>,
) -> Result<TrainingDesign> {
    check_overdetermined(t, k)?;
    if p1.size() != t || p2.size() != t {
        return Err(Error::dims(format!(
            "permutations of size {} and {} for T={t}",
            p1.size(),
            p2.size()
        )));
    }
    if !p2.fixes(0) {
        return Err(Error::param(
            "column permutation must fix the first column so it stays all ones",
        ));
    }
    let full = dft_columns(t, t)?;
    let permuted = permute(&p2, &permute(&p1, &full, Side::Left)?, Side::Right)?;
    let phi = permuted.leading_columns(k + 1)?;
    TrainingDesign::with_scheme(phi, pilots, Scheme::PermutedDft { rows: p1, cols: p2 })
}

fn check_overdetermined(t: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidDims("K must be at least 1".into()));
    }
    if t < k + 1 {
        return Err(Error::InvalidDims(format!("T={t} < K+1={}", k + 1)));
    }
    Ok(())
}

/// Quantized phase levels plus an attenuation interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConstraint {
    levels: Vec<f64>,
    beta_min: f64,
    beta_max: f64,
    tol: f64,
}

impl PhaseConstraint {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::param("phase level set is empty"));
        }
        let mut norm: Vec<f64> = levels.iter().map(|p| p.rem_euclid(TAU)).collect();
        if norm.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("phase levels must be finite"));
        }
        norm.sort_by(f64::total_cmp);
        for w in norm.windows(2) {
            if circular_distance(w[0], w[1]) < DEFAULT_PHASE_TOL {
                return Err(Error::param(format!("duplicate phase level {}", w[0])));
            }
        }
        if norm.len() > 1 && circular_distance(norm[0], norm[norm.len() - 1]) < DEFAULT_PHASE_TOL {
            return Err(Error::param("phase levels 0 and 2π coincide"));
        }
        Ok(Self {
            levels: norm,
            beta_min: 0.0,
            beta_max: 1.0,
            tol: DEFAULT_PHASE_TOL,
        })
    }

    /// `{2πi/n : i = 0..n}`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("need at least one phase level"));
        }
        Self::new((0..n).map(|i| TAU * i as f64 / n as f64).collect())
    }

    pub fn with_attenuation(mut self, beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta_min) || !(0.0..=1.0).contains(&beta_max) || beta_min > beta_max {
            return Err(Error::param(format!(
                "attenuation range [{beta_min}, {beta_max}] not within [0, 1]"
            )));
        }
        self.beta_min = beta_min;
        self.beta_max = beta_max;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::param("phase tolerance must be positive"));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn beta_range(&self) -> (f64, f64) {
        (self.beta_min, self.beta_max)
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn contains_phase(&self, p: f64) -> bool {
        let p = p.rem_euclid(TAU);
        self.levels.iter().any(|&l| circular_distance(l, p) <= self.tol)
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    /// Direct-path column entry differs from one.
    DirectColumn,
    Attenuation { beta: f64 },
    Phase { phase: f64 },
}

/// A constraint violation at zero-based `(t, k)` of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: usize,
    pub k: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (t, k) = (self.t + 1, self.k + 1);
        match self.kind {
            ViolationKind::DirectColumn => write!(f, "({t},{k}): direct column entry is not 1"),
            ViolationKind::Attenuation { beta } => write!(f, "({t},{k}): attenuation {beta} out of range"),
            ViolationKind::Phase { phase } => write!(f, "({t},{k}): phase {phase} not a quantization level"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks every IRS entry decomposes as `β·exp(jp)` with `β` in range and
/// `p` on a quantization level. Zero entries carry no phase.
pub fn check_feasibility(design: &TrainingDesign, constraint: &PhaseConstraint) -> Feasibility {
    check_phi_feasibility(design.phi(), constraint)
}

fn check_phi_feasibility(phi: &ComplexMatrix, constraint: &PhaseConstraint) -> Feasibility {
    let mut violations = Vec::new();
    for t in 0..phi.rows() {
        if (phi[(t, 0)] - ONE).norm() > MODULUS_TOL {
            violations.push(Violation {
                t,
                k: 0,
                kind: ViolationKind::DirectColumn,
            });
        }
        for k in 1..phi.cols() {
            let z = phi[(t, k)];
            let beta = z.norm();
            if beta < constraint.beta_min - MODULUS_TOL || beta > constraint.beta_max + MODULUS_TOL {
                violations.push(Violation {
                    t,
                    k,
                    kind: ViolationKind::Attenuation { beta },
                });
            }
            if beta > MODULUS_TOL && !constraint.contains_phase(z.arg()) {
                violations.push(Violation {
                    t,
                    k,
                    kind: ViolationKind::Phase {
                        phase: z.arg().rem_euclid(TAU),
                    },
                });
            }
        }
    }
    Feasibility {
        feasible: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    /// Mean diagonal of `ΦᴴΦ`; the common scale when the Gram is `αI`.
    pub alpha: f64,
    pub is_orthogonal: bool,
    pub gram_offdiag_max: f64,
    pub gram_diag_spread: f64,
    /// `T`, the trace bound on `α` for `|φ| ≤ 1`.
    pub upper_bound: f64,
    pub gap: f64,
    pub feasibility: Option<Feasibility>,
}

impl OptimalityReport {
    pub fn feasible(&self) -> Option<bool> {
        self.feasibility.as_ref().map(|f| f.feasible)
    }
}

impl fmt::Display for OptimalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "alpha={} orthogonal={} gap={}",
            tidy(self.alpha),
            self.is_orthogonal,
            tidy(self.gap)
        )?;
        if let Some(feas) = &self.feasibility {
            write!(f, " feasible={} violations={}", feas.feasible, feas.violations.len())?;
        }
        Ok(())
    }
}

/// Rounds to 9 decimals and clears negative zero for display.
fn tidy(x: f64) -> f64 {
    ((x * 1e9).round() / 1e9) + 0.0
}

pub fn default_gram_tol(t: usize) -> f64 {
    DEFAULT_GRAM_TOL_PER_T * t as f64
}

/// Computes `ΦᴴΦ` and reports how close it is to `αI` with `α = T`.
pub fn certify(design: &TrainingDesign, tol: f64) -> OptimalityReport {
    certify_phi(design.phi(), tol)
}

pub fn certify_with_constraint(
    design: &TrainingDesign,
    constraint: &PhaseConstraint,
    tol: f64,
) -> OptimalityReport {
    let mut report = certify(design, tol);
    report.feasibility = Some(check_feasibility(design, constraint));
    report
}

fn certify_phi(phi: &ComplexMatrix, tol: f64) -> OptimalityReport {
    let g = phi.gram();
    let n = g.rows();
    let diag: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
    let mut offdiag: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                offdiag = offdiag.max(g[(i, j)].norm());
            }
        }
    }
    let dmax = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let alpha = diag.iter().sum::<f64>() / n as f64;
    let upper_bound = phi.rows() as f64;
    OptimalityReport {
        alpha,
        is_orthogonal: offdiag < tol && dmax - dmin < tol,
        gram_offdiag_max: offdiag,
        gram_diag_spread: dmax - dmin,
        upper_bound,
        gap: upper_bound - alpha,
        feasibility: None,
    }
}

/// Largest instance `brute_force_optimum` will enumerate.
pub const MAX_BRUTE_FORCE_CANDIDATES: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Best `α` among orthogonal designs, or when none exists the best
    /// worst-case precision `1 / max_i [(ΦᴴΦ)⁻¹]_ii`.
    pub alpha: f64,
    /// Whether any enumerated design had `ΦᴴΦ = αI`.
    pub orthogonal: bool,
    pub best: TrainingDesign,
    pub report: OptimalityReport,
    pub candidates: u64,
    /// Largest trace-average `α` over every enumerated design.
    pub max_alpha_seen: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    index: u64,
    orthogonal: bool,
    score: f64,
    trace_alpha: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        const EPS: f64 = 1e-12;
        match (self.orthogonal, other.orthogonal) {
            (true, false) => true,
            (false, true) => false,
            _ if self.score > other.score + EPS => true,
            _ if other.score > self.score + EPS => false,
            _ => self.index < other.index,
        }
    }
}

/// Exhaustively enumerates every feasible `Φ` over the alphabet
/// `{β·exp(jp) : β ∈ beta_grid, p ∈ L}` and returns the best design.
///
/// Ties go to the lowest enumeration index, so the result does not depend on
/// how the enumeration is split across workers.
pub fn brute_force_optimum(
    t: usize,
    k: usize,
    constraint: &PhaseConstraint,
    beta_grid: &[f64],
    exec: Execution,
) -> Result<BruteForceResult> {
    if t == 0 || k == 0 {
        return Err(Error::InvalidDims("T and K must be positive".into()));
    }
    let alphabet = build_alphabet(constraint, beta_grid)?;
    let cells = (t * k) as u32;
    let candidates = (alphabet.len() as u64)
        .checked_pow(cells)
        .filter(|&n| n <= MAX_BRUTE_FORCE_CANDIDATES)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "{}^{} candidates exceed the limit of {}",
                alphabet.len(),
                cells,
                MAX_BRUTE_FORCE_CANDIDATES
            ))
        })?;
    let tol = default_gram_tol(t);

    const CHUNK: u64 = 4096;
    let n_chunks = candidates.div_ceil(CHUNK) as usize;
    let chunk_best = map_indexed(n_chunks, exec, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(candidates);
        let mut phi = ComplexMatrix::zeros(t, k + 1);
        let mut best: Option<Candidate> = None;
        let mut max_trace: f64 = 0.0;
        for index in start..end {
            fill_candidate(&mut phi, index, &alphabet);
            let cand = score(&phi, index, tol);
            max_trace = max_trace.max(cand.trace_alpha);
            if best.is_none_or(|b| cand.beats(&b)) {
                best = Some(cand);
            }
        }
        (best, max_trace)
    });

    let mut best: Option<Candidate> = None;
    let mut max_alpha_seen: f64 = 0.0;
    for (cand, trace) in chunk_best {
        max_alpha_seen = max_alpha_seen.max(trace);
        if let Some(c) = cand {
            if best.is_none_or(|b| c.beats(&b)) {
                best = Some(c);
            }
        }
    }
    let best = best.expect("at least one candidate");
    let mut phi = ComplexMatrix::zeros(t, k + 1);
    fill_candidate(&mut phi, best.index, &alphabet);
    let design = TrainingDesign::custom(phi, unit_pilots(t))?;
    let report = certify_with_constraint(&design, constraint, tol);
    Ok(BruteForceResult {
        alpha: best.score,
        orthogonal: best.orthogonal,
        best: design,
        report,
        candidates,
        max_alpha_seen,
    })
}

fn build_alphabet(constraint: &PhaseConstraint, beta_grid: &[f64]) -> Result<Vec<Complex64>> {
    if beta_grid.is_empty() {
        return Err(Error::param("attenuation grid is empty"));
    }
    let (lo, hi) = constraint.beta_range();
    let mut alphabet = Vec::new();
    let mut have_zero = false;
    for &beta in beta_grid {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::param(format!("attenuation {beta} outside [0, 1]")));
        }
        if beta < lo || beta > hi {
            continue;
        }
        if beta == 0.0 {
            // a switched-off element has no phase, so it appears once
            if !have_zero {
                alphabet.push(ZERO);
                have_zero = true;
            }
            continue;
        }
        for &p in constraint.levels() {
            alphabet.push(Complex64::from_polar(beta, p));
        }
    }
    if alphabet.is_empty() {
        return Err(Error::param("no attenuation in the grid satisfies the constraint"));
    }
    Ok(alphabet)
}

/// Decodes `index` in base `|alphabet|`, most significant digit first over
/// row-major `(t, k)` cells.
fn fill_candidate(phi: &mut ComplexMatrix, mut index: u64, alphabet: &[Complex64]) {
    let (t, k) = (phi.rows(), phi.cols() - 1);
    let base = alphabet.len() as u64;
    for cell in (0..t * k).rev() {
        let (r, c) = (cell / k, cell % k + 1);
        phi[(r, c)] = alphabet[(index % base) as usize];
        index /= base;
    }
    for r in 0..t {
        phi[(r, 0)] = ONE;
    }
}

fn score(phi: &ComplexMatrix, index: u64, tol: f64) -> Candidate {
    let report = certify_phi(phi, tol);
    let score = if report.is_orthogonal {
        report.alpha
    } else {
        match invert(&phi.gram()) {
            Ok(inv) => {
                let worst = (0..inv.rows()).map(|i| inv[(i, i)].re).fold(0.0, f64::max);
                if worst > 0.0 {
                    1.0 / worst
                } else {
                    0.0
                }
            }
            Err(_) => 0.0,
        }
    };
    Candidate {
        index,
        orthogonal: report.is_orthogonal,
        score,
        trace_alpha: report.alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows)
    }

    #[test]
    fn onoff_k2_matches_closed_form() {
        let d = onoff_design(2, unit_pilots(3)).unwrap();
        assert_eq!(d.phi(), &real(&[&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]]));
        let g = d.phi().gram();
        assert_eq!(g, real(&[&[3.0, 1.0, 1.0], &[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]]));
        let inv = invert(&g).unwrap();
        assert!(inv.max_abs_diff(&real(&[&[1.0, -1.0, -1.0], &[-1.0, 2.0, 1.0], &[-1.0, 1.0, 2.0]])) < 1e-12);
        assert!(onoff_design(2, unit_pilots(4)).is_err());
    }

    #[test]
    fn onoff_gram_inverse_closed_form() {
        for k in [1, 2, 5, 10] {
            let d = onoff_design(k, unit_pilots(k + 1)).unwrap();
            let inv = invert(&d.phi().gram()).unwrap();
            let expected = ComplexMatrix::from_fn(k + 1, k + 1, |i, j| {
                let v = match (i, j) {
                    (0, 0) => 1.0,
                    (0, _) | (_, 0) => -1.0,
                    (i, j) if i == j => 2.0,
                    _ => 1.0,
                };
                Complex64::new(v, 0.0)
            });
            assert!(inv.max_abs_diff(&expected) < 1e-10, "K={k}");
        }
    }

    #[test]
    fn dft_designs() {
        let d = dft_design(2, 1, unit_pilots(2)).unwrap();
        assert!(d.phi().max_abs_diff(&real(&[&[1.0, 1.0], &[1.0, -1.0]])) < 1e-15);

        let d = dft_design(8, 5, unit_pilots(8)).unwrap();
        let target = ComplexMatrix::identity(6).scale(Complex64::new(8.0, 0.0));
        assert!(d.phi().gram().max_abs_diff(&target) < 1e-10 * 8.0);

        let d = dft_design(51, 50, unit_pilots(51)).unwrap();
        for t in 0..51 {
            for k in 0..51 {
                assert!((d.phi()[(t, k)].norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(dft_design(4, 4, unit_pilots(4)), Err(Error::InvalidDims(_))));
    }

    #[test]
    fn permuted_dft() {
        let id = PermutationMatrix::identity(4);
        let plain = dft_design(4, 2, unit_pilots(4)).unwrap();
        let p = permuted_dft_design(4, 2, id.clone(), id.clone(), unit_pilots(4)).unwrap();
        assert_eq!(p.phi(), plain.phi());

        let swap = PermutationMatrix::swap(4, 1, 2).unwrap();
        let p = permuted_dft_design(4, 2, swap.clone(), id.clone(), unit_pilots(4)).unwrap();
        let target = ComplexMatrix::identity(3).scale(Complex64::new(4.0, 0.0));
        assert!(p.phi().gram().max_abs_diff(&target) < 1e-12);
        assert!(p.phi().column(0).iter().all(|&z| z == ONE));

        let bad = PermutationMatrix::swap(4, 0, 1).unwrap();
        assert!(permuted_dft_design(4, 2, id, bad, unit_pilots(4)).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let d = dft_design(7, 4, unit_pilots(7)).unwrap();
        assert!(check_feasibility(&d, &PhaseConstraint::uniform(7).unwrap()).feasible);

        let d = dft_design(4, 2, unit_pilots(4)).unwrap();
        let binary = PhaseConstraint::new(vec![0.0, PI]).unwrap();
        let feas = check_feasibility(&d, &binary);
        assert!(!feas.feasible);
        // column 2 of the 4-point DFT is [1, -j, -1, j]
        let cells: Vec<(usize, usize)> = feas.violations.iter().map(|v| (v.t, v.k)).collect();
        assert_eq!(cells, vec![(1, 1), (3, 1)]);
        for v in &feas.violations {
            let ViolationKind::Phase { phase } = v.kind else { panic!() };
            assert!((circular_distance(phase, PI / 2.0)).min(circular_distance(phase, 3.0 * PI / 2.0)) < 1e-12);
        }

        let onoff = onoff_design(5, unit_pilots(6)).unwrap();
        assert!(check_feasibility(&onoff, &PhaseConstraint::new(vec![0.0]).unwrap()).feasible);
        let no_off = PhaseConstraint::new(vec![0.0]).unwrap().with_attenuation(0.5, 1.0).unwrap();
        assert!(!check_feasibility(&onoff, &no_off).feasible);
    }

    #[test]
    fn certify_examples() {
        let d = dft_design(51, 50, unit_pilots(51)).unwrap();
        let r = certify(&d, default_gram_tol(51));
        assert!(r.is_orthogonal);
        assert!((r.alpha - 51.0).abs() < 1e-9 && r.gap.abs() < 1e-9);

        let r = certify(&onoff_design(50, unit_pilots(51)).unwrap(), default_gram_tol(51));
        assert!(!r.is_orthogonal);
        assert_eq!(r.gram_offdiag_max, 1.0);

        let mut phi = dft_design(8, 5, unit_pilots(8)).unwrap().phi().clone();
        for k in 1..6 {
            for z in phi.column_mut(k) {
                *z *= 0.5;
            }
        }
        let r = certify(&TrainingDesign::custom(phi, unit_pilots(8)).unwrap(), default_gram_tol(8));
        assert!(r.alpha < 8.0 && r.gap > 0.0);
    }

    #[test]
    fn custom_design_invariants() {
        let bad_first = real(&[&[1.0, 1.0], &[0.5, -1.0]]);
        assert!(TrainingDesign::custom(bad_first, unit_pilots(2)).is_err());
        let too_big = real(&[&[1.0, 1.5], &[1.0, -1.0]]);
        assert!(TrainingDesign::custom(too_big, unit_pilots(2)).is_err());
        let ok = real(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let half = vec![Complex64::new(0.5, 0.0); 2];
        assert!(TrainingDesign::custom(ok, half).is_err());
    }

    #[test]
    fn brute_force_small_instances() {
        let r = brute_force_optimum(2, 1, &PhaseConstraint::new(vec![0.0, PI]).unwrap(), &[1.0], Execution::Sequential)
            .unwrap();
        assert_eq!(r.candidates, 4);
        assert!(r.orthogonal && (r.alpha - 2.0).abs() < 1e-12);
        assert!(r.best.phi().max_abs_diff(&real(&[&[1.0, 1.0], &[1.0, -1.0]])) < 1e-12);

        let r = brute_force_optimum(3, 1, &PhaseConstraint::uniform(3).unwrap(), &[1.0], Execution::Sequential).unwrap();
        // all three rows of the IRS column are free
        assert_eq!(r.candidates, 27);
        assert!(r.orthogonal && (r.alpha - 3.0).abs() < 1e-12);
        let f = dft_columns(3, 3).unwrap();
        let col = r.best.phi().column(1);
        assert!((1..3).any(|c| f.column(c).iter().zip(col).all(|(a, b)| (a - b).norm() < 1e-12)));

        let r = brute_force_optimum(2, 1, &PhaseConstraint::new(vec![0.0]).unwrap(), &[0.0, 1.0], Execution::Sequential)
            .unwrap();
        assert_eq!(r.candidates, 4);
        assert!(!r.orthogonal && r.alpha < 2.0);
        assert!((r.alpha - 0.5).abs() < 1e-12);
        assert!(r.max_alpha_seen <= 2.0 + 1e-9);
    }

    #[test]
    fn brute_force_size_guard() {
        let big = PhaseConstraint::uniform(16).unwrap();
        assert!(matches!(
            brute_force_optimum(4, 4, &big, &[1.0], Execution::Sequential),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn brute_force_is_deterministic_across_execution() {
        let l = PhaseConstraint::uniform(4).unwrap();
        let a = brute_force_optimum(4, 2, &l, &[0.0, 1.0], Execution::Sequential).unwrap();
        let b = brute_force_optimum(4, 2, &l, &[0.0, 1.0], Execution::Threads(4)).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.alpha, b.alpha);
        assert!((a.alpha - 4.0).abs() < 1e-12);
    }

    #[test]
    fn text_format_round_trip() {
        let d = dft_design(8, 5, unit_pilots(8)).unwrap();
        let parsed = TrainingDesign::from_text(&d.to_text()).unwrap();
        assert_eq!(parsed.phi(), d.phi());

        let parsed = TrainingDesign::from_text("2 1\n1+0j 1e0-0j\n1 -1+0j\n").unwrap();
        assert!(parsed.phi().max_abs_diff(&real(&[&[1.0, 1.0], &[1.0, -1.0]])) < 1e-15);

        assert!(matches!(TrainingDesign::from_text("2 1\n1 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(TrainingDesign::from_text("2 1\n1 1 1\n1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(TrainingDesign::from_text("2 1\n1 1\n1 x\n").is_err());
    }

    #[test]
    fn parse_complex_forms() {
        let cases = [
            ("1+2j", Complex64::new(1.0, 2.0)),
            ("-1.5-2.5j", Complex64::new(-1.5, -2.5)),
            ("1e-3+2E+2j", Complex64::new(1e-3, 200.0)),
            ("-3j", Complex64::new(0.0, -3.0)),
            ("4", Complex64::new(4.0, 0.0)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
    }
}
