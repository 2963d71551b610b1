use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use irs_chanest::channel::{ChannelModelKind, NoiseMode};
use irs_chanest::design::{
    brute_force_optimum, certify_with_constraint, default_gram_tol, dft_design, onoff_design, unit_pilots,
    PhaseConstraint, TrainingDesign,
};
use irs_chanest::report::{write_csv, CsvOptions};
use irs_chanest::simulate::{
    element_label, run_sweep, ExperimentConfig, MseReport, PilotKind, PointContext, SchemeKind, Sweep,
};
use irs_chanest::{Error, Execution};

mod range;

#[derive(Debug, Parser)]
#[command(name = "irschan", version, about = "IRS channel-estimation training design and Monte Carlo sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the noise variance at fixed dimensions.
    SweepSigma(SweepSigmaArgs),
    /// Sweep the IRS element count at fixed noise variance.
    SweepK(SweepKArgs),
    /// Check a design file for orthogonality and phase feasibility.
    CertifyDesign(CertifyArgs),
    /// Exhaustively search small instances for the best design.
    BruteForce(BruteForceArgs),
    /// Dump θ and the estimation error of a single trial.
    TrialDump(TrialDumpArgs),
    /// Write a generated design in the text design format.
    ExportDesign(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Onoff,
    Dft,
    PermutedDft,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Onoff => SchemeKind::OnOff,
            SchemeArg::Dft => SchemeKind::Dft,
            SchemeArg::PermutedDft => SchemeKind::PermutedDft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    Iid,
    Corr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PilotArg {
    Ones,
    Random,
}

#[derive(Debug, Args)]
struct CommonSim {
    /// Training schemes, comma separated; all share channel and noise draws.
    #[arg(long, value_delimiter = ',', default_value = "dft")]
    scheme: Vec<SchemeArg>,
    /// Receive antennas.
    #[arg(long = "M", default_value_t = 10)]
    m: usize,
    /// Monte Carlo repetitions per sweep point.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Channel models, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "iid")]
    channel: Vec<ChannelArg>,
    /// Antenna correlation coefficient for the correlated model.
    #[arg(long, default_value_t = 0.95)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "ones")]
    pilots: PilotArg,
    /// Zero-based θ indices to track, comma separated (default: [h_d]₁ and [v₁]₁).
    #[arg(long, value_delimiter = ',')]
    tracked: Option<Vec<usize>>,
    /// Also run the QR reference solver and emit `<scheme>/ls` rows.
    #[arg(long)]
    verify: bool,
    /// Emit a `total` row with the summed MSE over all elements.
    #[arg(long)]
    total: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepSigmaArgs {
    #[command(flatten)]
    common: CommonSim,
    /// IRS elements.
    #[arg(long = "K", default_value_t = 50)]
    k: usize,
    /// Training periods (default: K+1).
    #[arg(long = "T")]
    t: Option<usize>,
    /// Noise variances: value, list, `a:b:step` or `a:b:lin|log:n`.
    #[arg(long, default_value = "1e-4:1e0:log:9")]
    sigma2: String,
}

#[derive(Debug, Args)]
struct SweepKArgs {
    #[command(flatten)]
    common: CommonSim,
    /// IRS element counts: value, list, `a:b:step` or `a:b:lin:n`.
    #[arg(long = "K", default_value = "10,20,40,80")]
    k: String,
    #[arg(long, default_value_t = 1e-2)]
    sigma2: f64,
    /// Training periods beyond K+1.
    #[arg(long = "T-extra", default_value_t = 0)]
    t_extra: usize,
}

#[derive(Debug, Args)]
struct LevelArgs {
    /// Uniform quantization with this many phase levels.
    #[arg(long, conflicts_with = "phases")]
    levels: Option<usize>,
    /// Explicit phase levels in radians, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phases: Option<Vec<f64>>,
}

impl LevelArgs {
    fn constraint(&self) -> Result<PhaseConstraint, CliError> {
        let c = match (&self.levels, &self.phases) {
            (Some(n), None) => PhaseConstraint::uniform(*n),
            (None, Some(p)) => PhaseConstraint::new(p.clone()),
            _ => return Err(CliError::Usage("one of --levels or --phases is required".into())),
        };
        c.map_err(CliError::from)
    }
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[arg(long)]
    design_file: PathBuf,
    #[command(flatten)]
    levels: LevelArgs,
    #[arg(long, default_value_t = 0.0)]
    beta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_max: f64,
    /// Gram orthogonality tolerance (default: 1e-8·T).
    #[arg(long)]
    tol: Option<f64>,
    /// Phase membership tolerance in radians.
    #[arg(long, default_value_t = 1e-9)]
    phase_tol: f64,
}

#[derive(Debug, Args)]
struct BruteForceArgs {
    #[arg(long = "T")]
    t: usize,
    #[arg(long = "K")]
    k: usize,
    #[command(flatten)]
    levels: LevelArgs,
    /// Attenuation grid, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    beta: Vec<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct TrialDumpArgs {
    #[arg(long, value_enum, default_value = "dft")]
    scheme: SchemeArg,
    #[arg(long = "M", default_value_t = 10)]
    m: usize,
    #[arg(long = "K", default_value_t = 50)]
    k: usize,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    sigma2: f64,
    #[arg(long, value_enum, default_value = "iid")]
    channel: ChannelArg,
    #[arg(long, default_value_t = 0.95)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "ones")]
    pilots: PilotArg,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Skip the noise draw (diagnostic).
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDims(_) | Error::InvalidParameter(_) | Error::TooLarge(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn usage(e: anyhow::Error) -> CliError {
    CliError::Usage(format!("{e:#}"))
}

fn channel_model(arg: ChannelArg, r: f64) -> Result<ChannelModelKind, CliError> {
    match arg {
        ChannelArg::Iid => Ok(ChannelModelKind::IidRayleigh),
        ChannelArg::Corr => Ok(ChannelModelKind::correlated(r)?),
    }
}

fn pilot_kind(arg: PilotArg) -> PilotKind {
    match arg {
        PilotArg::Ones => PilotKind::Ones,
        PilotArg::Random => PilotKind::Random,
    }
}

fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        None => Ok(Execution::Parallel),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => Ok(Execution::Threads(n)),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build_configs(common: &CommonSim, sweep: Sweep) -> Result<Vec<ExperimentConfig>, CliError> {
    let exec = execution(common.threads)?;
    let mut configs = Vec::new();
    for &ch in &common.channel {
        let model = channel_model(ch, common.r)?;
        for &scheme in &common.scheme {
            let mut cfg = ExperimentConfig::new(common.m, scheme.into(), model, sweep.clone(), common.reps, common.seed);
            if let Some(t) = &common.tracked {
                cfg.tracked = t.clone();
            }
            cfg.pilots = pilot_kind(common.pilots);
            cfg.verify = common.verify;
            cfg.exec = exec;
            cfg.validate()?;
            configs.push(cfg);
        }
    }
    Ok(configs)
}

/// Writes the reports as CSV to `path`, or stdout when `None`.
fn write_reports(reports: &[MseReport], opts: CsvOptions, path: &Option<PathBuf>) -> Result<(), CliError> {
    let out = open_output(path)?;
    write_csv(reports, opts, out).context("failed to write CSV")?;
    Ok(())
}

fn run_configs(configs: Vec<ExperimentConfig>, common: &CommonSim) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for cfg in &configs {
        let report = run_sweep(cfg)?;
        if cfg.verify {
            for row in &report.rows {
                eprintln!(
                    "{} {}={}: max |fast - reference| = {:.3e}",
                    cfg.scheme.label(),
                    report.sweep_var.label(),
                    row.point.value,
                    row.max_solver_deviation.unwrap_or(0.0)
                );
            }
        }
        reports.push(report);
    }
    write_reports(&reports, CsvOptions { include_total: common.total }, &common.out)
}

fn sweep_sigma(args: SweepSigmaArgs) -> Result<(), CliError> {
    let values = range::parse_f64_values(&args.sigma2).map_err(usage)?;
    let sweep = Sweep::Sigma2 {
        k: args.k,
        t: args.t.unwrap_or(args.k + 1),
        values,
    };
    let configs = build_configs(&args.common, sweep)?;
    run_configs(configs, &args.common)
}

fn sweep_k(args: SweepKArgs) -> Result<(), CliError> {
    let values = range::parse_usize_values(&args.k).map_err(usage)?;
    let sweep = Sweep::K {
        values,
        sigma2: args.sigma2,
        t_extra: args.t_extra,
    };
    let configs = build_configs(&args.common, sweep)?;
    run_configs(configs, &args.common)
}

fn certify_design(args: CertifyArgs) -> Result<(), CliError> {
    let constraint = args
        .levels
        .constraint()?
        .with_attenuation(args.beta_min, args.beta_max)?
        .with_tolerance(args.phase_tol)?;
    let text = read_file(&args.design_file)?;
    let design = TrainingDesign::from_text(&text).map_err(|e| CliError::Runtime(anyhow!("{}: {e}", args.design_file.display())))?;
    let tol = args.tol.unwrap_or_else(|| default_gram_tol(design.t()));
    let report = certify_with_constraint(&design, &constraint, tol);
    let mut out = io::stdout().lock();
    writeln!(out, "{report}")?;
    if let Some(f) = &report.feasibility {
        for v in &f.violations {
            writeln!(out, "violation {v}")?;
        }
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    Ok(std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn brute_force(args: BruteForceArgs) -> Result<(), CliError> {
    let constraint = args.levels.constraint()?;
    let exec = execution(args.threads)?;
    let result = brute_force_optimum(args.t, args.k, &constraint, &args.beta, exec)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "alpha={} orthogonal={} candidates={} max_trace_alpha={} upper_bound={}",
        result.alpha, result.orthogonal, result.candidates, result.max_alpha_seen, result.report.upper_bound
    )?;
    write!(out, "{}", result.best.to_text())?;
    Ok(())
}

fn trial_dump(args: TrialDumpArgs) -> Result<(), CliError> {
    let sweep = Sweep::Sigma2 {
        k: args.k,
        t: args.t.unwrap_or(args.k + 1),
        values: vec![args.sigma2],
    };
    let mut cfg = ExperimentConfig::new(
        args.m,
        args.scheme.into(),
        channel_model(args.channel, args.r)?,
        sweep,
        1,
        args.seed,
    );
    cfg.pilots = pilot_kind(args.pilots);
    if args.noiseless {
        cfg.noise = NoiseMode::Suppressed;
    }
    cfg.validate()?;
    let ctx = PointContext::new(&cfg, cfg.points()[0])?;
    let outcome = ctx.run_trial(args.trial)?;
    let mut out = open_output(&args.out)?;
    writeln!(out, "index,element,theta_re,theta_im,error_re,error_im,var_analytic")?;
    for (i, (th, e)) in outcome.theta.iter().zip(&outcome.error).enumerate() {
        writeln!(
            out,
            "{i},{},{:e},{:e},{:e},{:e},{:e}",
            element_label(i, args.m),
            th.re,
            th.im,
            e.re,
            e.im,
            ctx.crlb.variance_at(i)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn export_design(args: ExportArgs) -> Result<(), CliError> {
    let t = args.t.unwrap_or(args.k + 1);
    let design = match args.scheme {
        SchemeArg::Onoff => onoff_design(args.k, unit_pilots(t))?,
        SchemeArg::Dft => dft_design(t, args.k, unit_pilots(t))?,
        SchemeArg::PermutedDft => {
            return Err(CliError::Usage("export supports onoff and dft".into()));
        }
    };
    let mut out = open_output(&args.out)?;
    out.write_all(design.to_text().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SweepSigma(a) => sweep_sigma(a),
        Command::SweepK(a) => sweep_k(a),
        Command::CertifyDesign(a) => certify_design(a),
        Command::BruteForce(a) => brute_force(a),
        Command::TrialDump(a) => trial_dump(a),
        Command::ExportDesign(a) => export_design(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
