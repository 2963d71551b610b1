//! Seeded Monte Carlo engine: per-trial channel and noise draws, estimation
//! and per-element MSE aggregation over a sweep of `σ²` or `K`.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(master seed, sweep point)` and selected by `(trial, substream)`, so a
//! trial's draws depend on nothing but its coordinates. Channel and noise
//! substreams ignore the scheme, which gives common random numbers when two
//! schemes are compared. Trials run through [`map_indexed`] and are summed in
//! trial order, making reports bit-identical for any worker count.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{synthesize, ChannelModelKind, ChannelSampler, NoiseMode, SystemDims};
use crate::design::{dft_design, onoff_design, permuted_dft_design, random_pilots, unit_pilots, TrainingDesign};
use crate::error::{Error, Result};
use crate::estimate::{covariance, CrlbReport, Estimator};
use crate::exec::{map_indexed, Execution};
use crate::tensor_ops::PermutationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    OnOff,
    Dft,
    PermutedDft,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::OnOff => "onoff",
            SchemeKind::Dft => "dft",
            SchemeKind::PermutedDft => "permuted-dft",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotKind {
    #[default]
    Ones,
    /// Uniform random phases, drawn once per sweep point.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Sigma2 { k: usize, t: usize, values: Vec<f64> },
    /// `T = K + 1 + t_extra` at each point.
    K { values: Vec<usize>, sigma2: f64, t_extra: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Sigma2,
    K,
}

impl SweepVar {
    pub fn label(self) -> &'static str {
        match self {
            SweepVar::Sigma2 => "sigma2",
            SweepVar::K => "K",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub scheme: SchemeKind,
    pub channel: ChannelModelKind,
    pub sweep: Sweep,
    pub reps: usize,
    pub seed: u64,
    /// Zero-based indices into `θ`.
    pub tracked: Vec<usize>,
    pub pilots: PilotKind,
    pub noise: NoiseMode,
    /// Also run the QR reference solver on every trial.
    pub verify: bool,
    pub exec: Execution,
}

impl ExperimentConfig {
    /// Defaults: unit pilots, AWGN, tracked `[h_d]₁` and `[v₁]₁`.
    pub fn new(m: usize, scheme: SchemeKind, channel: ChannelModelKind, sweep: Sweep, reps: usize, seed: u64) -> Self {
        Self {
            m,
            scheme,
            channel,
            sweep,
            reps,
            seed,
            tracked: vec![0, m],
            pilots: PilotKind::Ones,
            noise: NoiseMode::Awgn,
            verify: false,
            exec: Execution::default(),
        }
    }

    pub fn sweep_var(&self) -> SweepVar {
        match self.sweep {
            Sweep::Sigma2 { .. } => SweepVar::Sigma2,
            Sweep::K { .. } => SweepVar::K,
        }
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        match &self.sweep {
            Sweep::Sigma2 { k, t, values } => values
                .iter()
                .enumerate()
                .map(|(index, &sigma2)| SweepPoint {
                    index,
                    value: sigma2,
                    dims: SystemDims {
                        m: self.m,
                        k: *k,
                        t: *t,
                        kbar: None,
                    },
                    sigma2,
                })
                .collect(),
            Sweep::K { values, sigma2, t_extra } => values
                .iter()
                .enumerate()
                .map(|(index, &k)| SweepPoint {
                    index,
                    value: k as f64,
                    dims: SystemDims {
                        m: self.m,
                        k,
                        t: k + 1 + t_extra,
                        kbar: None,
                    },
                    sigma2: *sigma2,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::param("at least one repetition is required"));
        }
        if self.m == 0 {
            return Err(Error::InvalidDims("M must be positive".into()));
        }
        if let ChannelModelKind::CorrelatedRayleigh { r } = self.channel {
            ChannelModelKind::correlated(r)?;
        }
        let points = self.points();
        if points.is_empty() {
            return Err(Error::param("sweep has no points"));
        }
        for p in &points {
            p.dims.validate()?;
            if !(p.sigma2 > 0.0) || !p.sigma2.is_finite() {
                return Err(Error::param(format!("noise variance {} must be positive", p.sigma2)));
            }
            if self.scheme == SchemeKind::OnOff && p.dims.t != p.dims.k + 1 {
                return Err(Error::InvalidDims(format!(
                    "on/off training requires T=K+1, got T={} K={}",
                    p.dims.t, p.dims.k
                )));
            }
            if let Some(&bad) = self.tracked.iter().find(|&&i| i >= p.dims.theta_len()) {
                return Err(Error::param(format!(
                    "tracked index {bad} out of range for theta of length {}",
                    p.dims.theta_len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub dims: SystemDims,
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Substream {
    Channel = 0,
    Noise = 1,
}

const SUBSTREAMS: u64 = 2;

fn point_key(seed: u64, point: usize, domain: u8) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(point as u64).to_le_bytes());
    key[16] = domain;
    key
}

fn trial_stream(seed: u64, point: usize, trial: usize, sub: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(point_key(seed, point, 0));
    rng.set_stream(trial as u64 * SUBSTREAMS + sub as u64);
    rng
}

fn point_stream(seed: u64, point: usize) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(point_key(seed, point, 1))
}

/// Everything a sweep point needs, prepared once and shared by its trials.
#[derive(Debug, Clone)]
pub struct PointContext {
    pub point: SweepPoint,
    pub design: TrainingDesign,
    pub crlb: CrlbReport,
    seed: u64,
    noise: NoiseMode,
    sampler: ChannelSampler,
    estimator: Estimator,
    reference: Option<Estimator>,
}

/// Output of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub theta: Vec<Complex64>,
    /// `θ − θ̂` from the scheme's fast solver.
    pub error: Vec<Complex64>,
    /// `θ − θ̂` from the reference solver when verification is on.
    pub reference_error: Option<Vec<Complex64>>,
}

impl PointContext {
    pub fn new(config: &ExperimentConfig, point: SweepPoint) -> Result<Self> {
        point.dims.validate()?;
        let SystemDims { m, k, t, .. } = point.dims;
        let mut prng = point_stream(config.seed, point.index);
        let pilots = match config.pilots {
            PilotKind::Ones => unit_pilots(t),
            PilotKind::Random => random_pilots(t, &mut prng),
        };
        let design = match config.scheme {
            SchemeKind::OnOff => onoff_design(k, pilots)?,
            SchemeKind::Dft => dft_design(t, k, pilots)?,
            SchemeKind::PermutedDft => {
                let mut rows: Vec<usize> = (0..t).collect();
                rows.shuffle(&mut prng);
                let mut cols: Vec<usize> = (1..t).collect();
                cols.shuffle(&mut prng);
                cols.insert(0, 0);
                permuted_dft_design(
                    t,
                    k,
                    PermutationMatrix::from_mapping(rows)?,
                    PermutationMatrix::from_mapping(cols)?,
                    pilots,
                )?
            }
        };
        let crlb = covariance(&design, point.sigma2, m)?;
        let estimator = Estimator::for_design(&design, m)?;
        let reference = if config.verify {
            Some(Estimator::reference(&design, m)?)
        } else {
            None
        };
        Ok(Self {
            point,
            design,
            crlb,
            seed: config.seed,
            noise: config.noise,
            sampler: ChannelSampler::new(m, config.channel)?,
            estimator,
            reference,
        })
    }

    pub fn run_trial(&self, trial: usize) -> Result<TrialOutcome> {
        let mut chan_rng = trial_stream(self.seed, self.point.index, trial, Substream::Channel);
        let mut noise_rng = trial_stream(self.seed, self.point.index, trial, Substream::Noise);
        let state = self.sampler.sample_state(self.point.dims.k, &mut chan_rng);
        let obs = synthesize(&state, &self.design, self.point.sigma2, self.noise, &mut noise_rng)?;
        let theta = state.theta_vector();
        let diff = |hat: &[Complex64]| -> Vec<Complex64> { theta.iter().zip(hat).map(|(a, b)| a - b).collect() };
        let est = self.estimator.estimate(&obs.s)?;
        let error = diff(&est.theta_hat);
        let reference_error = match &self.reference {
            Some(r) => Some(diff(&r.estimate(&obs.s)?.theta_hat)),
            None => None,
        };
        Ok(TrialOutcome {
            theta,
            error,
            reference_error,
        })
    }
}

/// Runs trial `trial` at sweep point `point` of `config`.
pub fn run_trial(config: &ExperimentConfig, point: usize, trial: usize) -> Result<TrialOutcome> {
    config.validate()?;
    let p = *config
        .points()
        .get(point)
        .ok_or_else(|| Error::param(format!("sweep point {point} out of range")))?;
    PointContext::new(config, p)?.run_trial(trial)
}

/// Label of `θ[i]` with 1-based antenna and element numbers: `hd[m]` or
/// `v{k}[m]`.
pub fn element_label(i: usize, m: usize) -> String {
    let (k, a) = (i / m, i % m + 1);
    if k == 0 {
        format!("hd[{a}]")
    } else {
        format!("v{k}[{a}]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementStat {
    pub index: usize,
    pub label: String,
    pub mse: f64,
    pub var_analytic: f64,
    pub mean_error: Complex64,
    /// MSE of the reference solver, when verified.
    pub reference_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub point: SweepPoint,
    pub elements: Vec<ElementStat>,
    /// `Σ_i |e_i|²` averaged over trials.
    pub total_mse: f64,
    /// `tr(C)`.
    pub total_var: f64,
    /// Largest `|θ̂_fast − θ̂_ref|` seen, when verified.
    pub max_solver_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseReport {
    pub sweep_var: SweepVar,
    pub scheme: SchemeKind,
    pub channel: ChannelModelKind,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<MseRow>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct TrialStats {
    sq: Vec<f64>,
    err: Vec<Complex64>,
    ref_sq: Option<Vec<f64>>,
    total: f64,
    deviation: f64,
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<MseReport> {
    config.validate()?;
    let mut rows = Vec::new();
    for point in config.points() {
        let ctx = PointContext::new(config, point)?;
        let tracked = &config.tracked;
        let stats = map_indexed(config.reps, config.exec, |trial| -> Result<TrialStats> {
            let out = ctx.run_trial(trial)?;
            let deviation = out.reference_error.as_ref().map_or(0.0, |r| {
                r.iter().zip(&out.error).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
            });
            Ok(TrialStats {
                sq: tracked.iter().map(|&i| out.error[i].norm_sqr()).collect(),
                err: tracked.iter().map(|&i| out.error[i]).collect(),
                ref_sq: out
                    .reference_error
                    .as_ref()
                    .map(|r| tracked.iter().map(|&i| r[i].norm_sqr()).collect()),
                total: out.error.iter().map(|e| e.norm_sqr()).sum(),
                deviation,
            })
        });
        let stats: Vec<TrialStats> = stats
            .into_iter()
            .enumerate()
            .map(|(trial, s)| {
                s.map_err(|e| match e {
                    Error::SingularDesign(msg) => Error::SingularDesign(format!(
                        "sweep point {} trial {trial}: {msg}",
                        point.index
                    )),
                    other => other,
                })
            })
            .collect::<Result<_>>()?;

        let reps = config.reps as f64;
        let elements = tracked
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let mut sq = KahanSum::default();
                let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
                let mut ref_sq = KahanSum::default();
                for s in &stats {
                    sq.add(s.sq[j]);
                    re.add(s.err[j].re);
                    im.add(s.err[j].im);
                    if let Some(r) = &s.ref_sq {
                        ref_sq.add(r[j]);
                    }
                }
                ElementStat {
                    index: i,
                    label: element_label(i, point.dims.m),
                    mse: sq.value() / reps,
                    var_analytic: ctx.crlb.variance_at(i),
                    mean_error: Complex64::new(re.value() / reps, im.value() / reps),
                    reference_mse: config.verify.then(|| ref_sq.value() / reps),
                }
            })
            .collect();
        let mut total = KahanSum::default();
        for s in &stats {
            total.add(s.total);
        }
        rows.push(MseRow {
            point,
            elements,
            total_mse: total.value() / reps,
            total_var: ctx.crlb.trace(),
            max_solver_deviation: config
                .verify
                .then(|| stats.iter().map(|s| s.deviation).fold(0.0, f64::max)),
        });
    }
    Ok(MseReport {
        sweep_var: config.sweep_var(),
        scheme: config.scheme,
        channel: config.channel,
        reps: config.reps,
        seed: config.seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeComparison {
    pub baseline: MseReport,
    pub candidate: MseReport,
    /// `baseline.mse / candidate.mse` per row and tracked element.
    pub ratios: Vec<Vec<f64>>,
}

/// Runs `config` under two schemes on identical channel and noise draws.
pub fn compare_schemes(config: &ExperimentConfig, baseline: SchemeKind, candidate: SchemeKind) -> Result<SchemeComparison> {
    let run = |scheme| {
        let mut c = config.clone();
        c.scheme = scheme;
        run_sweep(&c)
    };
    let baseline = run(baseline)?;
    let candidate = run(candidate)?;
    let ratios = baseline
        .rows
        .iter()
        .zip(&candidate.rows)
        .map(|(a, b)| a.elements.iter().zip(&b.elements).map(|(x, y)| x.mse / y.mse).collect())
        .collect();
    Ok(SchemeComparison {
        baseline,
        candidate,
        ratios,
    })
}
