//! Command-line front end.
//!
//! Settings resolve in the order: command-line flag, `--config` file,
//! `SPECSENSE_SEED` (seed only), built-in default. Exit codes are 0 on
//! success, 1 on runtime failure and 2 on usage or validation errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::detector::{decide, dynamic_threshold, static_threshold, EnergyStatistic, ThresholdMode};
use crate::error::SenseError;
use crate::harness::{
    linear_grid, simulate_observation, sweep_pfa, sweep_snr, sweep_threshold_factor, write_results, Curve,
    EstimateOutcome, NoiseMismatch, TrialPlan, DEFAULT_FACTORS,
};
use crate::noise::{estimate_noise, NoiseEstimate};
use crate::plot::write_pd_chart;
use crate::signal::{db_to_linear, frame, Hypothesis, ScenarioSpec};

pub const SEED_ENV: &str = "SPECSENSE_SEED";
pub const QUICK_TRIALS: usize = 1_000;

/// Target Pfa values of the ROC sweep.
pub const PFA_GRID: [f64; 14] = [
    0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99,
];

#[derive(Debug, Parser)]
#[command(
    name = "specsense",
    version,
    about = "Energy-detection spectrum sensing with blind noise estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one frame through the detector and print the decision.
    Sense(Flags),
    /// Pd versus SNR for static and dynamic thresholds.
    SweepSnr(Flags),
    /// Pd versus target Pfa at a fixed SNR for both threshold modes.
    SweepPfa(Flags),
    /// Static-threshold Pd versus SNR for several threshold factors.
    SweepFactor(Flags),
    /// Estimate the noise variance of one frame and print diagnostics.
    EstimateNoise(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Sense,
    SweepSnr,
    SweepPfa,
    SweepFactor,
    EstimateNoise,
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// Samples per detection window and snapshot columns per frame.
    #[arg(long)]
    n: Option<usize>,
    /// Smoothing factor (frame rows).
    #[arg(long)]
    l: Option<usize>,
    /// Target probability of false alarm.
    #[arg(long)]
    pfa: Option<f64>,
    /// SNR in dB (sense / estimate-noise: omit for noise only).
    #[arg(long, allow_negative_numbers = true)]
    snr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    snr_max: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Threshold factor(s), comma separated for sweep-factor.
    #[arg(long, value_delimiter = ',')]
    factor: Option<Vec<f64>>,
    /// Half-width of the uniform per-trial noise offset, in dB.
    #[arg(long)]
    mismatch_db: Option<f64>,
    /// Candidate count of the noise-variance grid.
    #[arg(long)]
    m_grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; sweeps append `_<curve>` before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG chart next to the CSV files.
    #[arg(long)]
    plot: bool,
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use 1000 trials per point unless trials are set explicitly.
    #[arg(long)]
    quick: bool,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub n: usize,
    pub l: usize,
    pub pfa: f64,
    pub snr: Option<f64>,
    pub snr_min: f64,
    pub snr_max: f64,
    pub snr_step: f64,
    pub trials: usize,
    pub mode: ModeArg,
    pub factors: Vec<f64>,
    pub mismatch_db: f64,
    pub m_grid: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub plot: bool,
    pub quick: bool,
}

impl ExperimentConfig {
    fn defaults(command: CommandKind) -> Self {
        Self {
            command,
            n: 128,
            l: 8,
            pfa: 0.1,
            snr: None,
            snr_min: -20.0,
            snr_max: 20.0,
            snr_step: 1.0,
            trials: 10_000,
            mode: ModeArg::Dynamic,
            factors: DEFAULT_FACTORS.to_vec(),
            mismatch_db: 3.0,
            m_grid: 100,
            seed: 42,
            out: PathBuf::from("results.csv"),
            plot: false,
            quick: false,
        }
    }

    /// Harness plan for these settings (signal off).
    pub fn plan(&self) -> TrialPlan {
        let factor = self.factors.first().copied().unwrap_or(1.0);
        TrialPlan {
            n_trials: self.trials,
            n: self.n,
            l: self.l,
            target_pfa: self.pfa,
            mode: match self.mode {
                ModeArg::Static => ThresholdMode::Static { factor },
                ModeArg::Dynamic => ThresholdMode::Dynamic,
            },
            master_seed: self.seed,
            m_grid: self.m_grid,
            mismatch: if self.mismatch_db > 0.0 {
                NoiseMismatch::Uniform { db: self.mismatch_db }
            } else {
                NoiseMismatch::None
            },
            samples_per_symbol: self.l,
            ..TrialPlan::default()
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |name: &str, value: String, expected: &str| {
            Err(CliError::usage(format!(
                "invalid value for `{name}`: {value} ({expected})"
            )))
        };
        if self.l < 2 {
            return bad("l", self.l.to_string(), "must be >= 2");
        }
        if self.n <= self.l {
            return bad("n", self.n.to_string(), "must be greater than l");
        }
        if !self.n.is_multiple_of(2) {
            return bad("n", self.n.to_string(), "must be even");
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return bad("pfa", self.pfa.to_string(), "valid range is (0, 1), exclusive");
        }
        if let Some(s) = self.snr {
            if !s.is_finite() {
                return bad("snr", s.to_string(), "must be finite");
            }
        }
        if !(self.snr_min.is_finite() && self.snr_max.is_finite() && self.snr_max >= self.snr_min) {
            return bad(
                "snr-max",
                self.snr_max.to_string(),
                "snr-min and snr-max must be finite with snr-max >= snr-min",
            );
        }
        if !(self.snr_step > 0.0 && self.snr_step.is_finite()) {
            return bad("snr-step", self.snr_step.to_string(), "must be finite and > 0");
        }
        if self.trials == 0 {
            return bad("trials", "0".into(), "must be > 0");
        }
        if self.factors.is_empty() {
            return bad("factor", "(empty)".into(), "at least one factor is required");
        }
        if let Some(f) = self.factors.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return bad("factor", f.to_string(), "must be finite and > 0");
        }
        if !(self.mismatch_db >= 0.0 && self.mismatch_db.is_finite()) {
            return bad("mismatch-db", self.mismatch_db.to_string(), "must be finite and >= 0");
        }
        if self.m_grid < 2 {
            return bad("m-grid", self.m_grid.to_string(), "must be >= 2");
        }
        Ok(())
    }
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(err: SenseError) -> Self {
        Self {
            code: 1,
            message: err.to_string(),
        }
    }
}

/// Outcome of argument parsing: either a config or text to print and exit
/// with (for `--help` and `--version`).
#[derive(Debug)]
pub enum Parsed {
    Run(Box<ExperimentConfig>),
    Exit { code: u8, text: String },
}

/// Parse `argv` (including the program name) and resolve every setting.
/// `seed_env` is the value of `SPECSENSE_SEED`, if set.
pub fn parse_config<I, T>(argv: I, seed_env: Option<&str>) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let text = e.render().to_string();
            return if code == 0 {
                Ok(Parsed::Exit { code, text })
            } else {
                Err(CliError::usage(text.trim_end().to_string()))
            };
        }
    };
    let (kind, flags) = match cli.command {
        Command::Sense(f) => (CommandKind::Sense, f),
        Command::SweepSnr(f) => (CommandKind::SweepSnr, f),
        Command::SweepPfa(f) => (CommandKind::SweepPfa, f),
        Command::SweepFactor(f) => (CommandKind::SweepFactor, f),
        Command::EstimateNoise(f) => (CommandKind::EstimateNoise, f),
    };

    let mut cfg = ExperimentConfig::defaults(kind);
    if kind == CommandKind::SweepPfa {
        cfg.snr = Some(-2.0);
    }
    if let Some(raw) = seed_env {
        cfg.seed = raw.trim().parse().map_err(|_| {
            CliError::usage(format!(
                "invalid value for `{SEED_ENV}`: {raw:?} (expected an unsigned integer)"
            ))
        })?;
    }
    let mut trials_set = false;
    if let Some(path) = &flags.config {
        trials_set |= apply_config_file(&mut cfg, path)?;
    }
    trials_set |= apply_flags(&mut cfg, flags);
    if cfg.quick && !trials_set {
        cfg.trials = QUICK_TRIALS;
    }
    cfg.validate()?;
    Ok(Parsed::Run(Box::new(cfg)))
}

fn apply_flags(cfg: &mut ExperimentConfig, f: Flags) -> bool {
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { cfg.$field = v; } )* };
    }
    set!(
        n,
        l,
        pfa,
        snr_min,
        snr_max,
        snr_step,
        mode,
        mismatch_db,
        m_grid,
        seed,
        out
    );
    if f.snr.is_some() {
        cfg.snr = f.snr;
    }
    if let Some(v) = f.factor {
        cfg.factors = v;
    }
    cfg.plot |= f.plot;
    cfg.quick |= f.quick;
    let trials_set = f.trials.is_some();
    if let Some(t) = f.trials {
        cfg.trials = t;
    }
    trials_set
}

/// Returns whether the file set `trials`.
fn apply_config_file(cfg: &mut ExperimentConfig, path: &Path) -> Result<bool, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut trials_set = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("{}: expected `key = value`", at())))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |what: &str| CliError::usage(format!("{}: invalid value for `{key}`: {value:?} ({what})", at()));
        macro_rules! parse {
            ($what:expr) => {
                value.parse().map_err(|_| bad($what))?
            };
        }
        match key.as_str() {
            "n" => cfg.n = parse!("expected an integer"),
            "l" => cfg.l = parse!("expected an integer"),
            "pfa" => cfg.pfa = parse!("expected a number"),
            "snr" => cfg.snr = Some(parse!("expected a number")),
            "snr_min" => cfg.snr_min = parse!("expected a number"),
            "snr_max" => cfg.snr_max = parse!("expected a number"),
            "snr_step" => cfg.snr_step = parse!("expected a number"),
            "trials" => {
                cfg.trials = parse!("expected an integer");
                trials_set = true;
            }
            "mode" => {
                cfg.mode = ModeArg::from_str(value, true).map_err(|_| bad("expected static or dynamic"))?;
            }
            "factor" => {
                cfg.factors = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("expected comma-separated numbers"))?;
            }
            "mismatch_db" => cfg.mismatch_db = parse!("expected a number"),
            "m_grid" => cfg.m_grid = parse!("expected an integer"),
            "seed" => cfg.seed = parse!("expected an unsigned integer"),
            "out" => cfg.out = PathBuf::from(value),
            "plot" => cfg.plot = parse!("expected true or false"),
            "quick" => cfg.quick = parse!("expected true or false"),
            _ => return Err(CliError::usage(format!("{}: unknown key `{key}`", at()))),
        }
    }
    Ok(trials_set)
}

/// Execute a resolved configuration, writing the report to `out`.
pub fn run<W: Write>(cfg: &ExperimentConfig, out: &mut W) -> Result<(), CliError> {
    let report = match cfg.command {
        CommandKind::Sense => run_sense(cfg),
        CommandKind::EstimateNoise => run_estimate(cfg),
        CommandKind::SweepSnr => run_sweep_snr(cfg),
        CommandKind::SweepPfa => run_sweep_pfa(cfg),
        CommandKind::SweepFactor => run_sweep_factor(cfg),
    }
    .map_err(CliError::runtime)?;
    out.write_all(report.as_bytes())
        .map_err(|e| CliError::runtime(SenseError::io("<stdout>", e)))
}

/// Parse, run and map the outcome to an exit code.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let seed_env = std::env::var(SEED_ENV).ok();
    let result = parse_config(argv, seed_env.as_deref()).and_then(|parsed| match parsed {
        Parsed::Exit { code, text } => {
            print!("{text}");
            Ok(code)
        }
        Parsed::Run(cfg) => run(&cfg, &mut std::io::stdout().lock()).map(|_| 0),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message.trim_start_matches("error: "));
            ExitCode::from(e.code)
        }
    }
}

fn run_sense(cfg: &ExperimentConfig) -> Result<String, SenseError> {
    let mut plan = cfg.plan();
    if let Some(snr) = cfg.snr {
        plan = plan.at_snr_db(snr);
    }
    let present = cfg.snr.is_some();
    let dynamic = cfg.mode == ModeArg::Dynamic;
    let obs = simulate_observation(&plan, 0, present, dynamic)?;
    let stat = EnergyStatistic {
        value: obs.energy,
        n: cfg.n,
    };
    let (threshold, sigma_hat2) = match (plan.mode, obs.estimate) {
        (ThresholdMode::Static { factor }, _) => {
            (static_threshold(factor * plan.sigma_nominal2, cfg.pfa, cfg.n)?, None)
        }
        (ThresholdMode::Dynamic, EstimateOutcome::Value(s)) => (dynamic_threshold(s, cfg.pfa, cfg.n)?, Some(s)),
        (ThresholdMode::Dynamic, _) => {
            return Err(SenseError::NoNoiseEigenvalues {
                k_hat: cfg.l - 1,
                l: cfg.l,
            })
        }
    };
    let decision = decide(stat, threshold);
    let mut line = format!(
        "mode={} hypothesis={} snr_db={} statistic={} threshold={}",
        plan.mode.name(),
        if present { "H1" } else { "H0" },
        cfg.snr.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        stat.value,
        threshold
    );
    if let Some(s) = sigma_hat2 {
        let _ = write!(line, " sigma_hat2={s}");
    }
    let _ = writeln!(
        line,
        " true_sigma_w2={} verdict={}",
        obs.true_sigma_w2,
        decision.verdict.as_str()
    );
    Ok(line)
}

fn run_estimate(cfg: &ExperimentConfig) -> Result<String, SenseError> {
    let sigma_w2 = 1.0;
    let (hypothesis, sigma_s2) = match cfg.snr {
        Some(snr) => (Hypothesis::H1, sigma_w2 * db_to_linear(snr)),
        None => (Hypothesis::H0, 0.0),
    };
    let scenario = ScenarioSpec {
        sigma_s2,
        sigma_w2,
        hypothesis,
        seed: cfg.seed,
        n_samples: cfg.l * cfg.n,
        samples_per_symbol: cfg.l,
    };
    let stream = scenario.synthesize()?;
    let est = estimate_noise(&frame(&stream, cfg.l, cfg.n)?, cfg.m_grid)?;
    Ok(format_estimate(&est, sigma_w2))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn format_estimate(est: &NoiseEstimate, true_sigma_w2: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "sigma_hat2={}", est.sigma_hat2);
    let _ = writeln!(s, "true_sigma_w2={true_sigma_w2}");
    let _ = writeln!(s, "k_hat={}", est.k_hat);
    let _ = writeln!(s, "beta_hat={}", est.beta_hat);
    let _ = writeln!(s, "sigma_lo2={}", est.sigma_lo2);
    let _ = writeln!(s, "sigma_hi2={}", est.sigma_hi2);
    let _ = writeln!(s, "p_ratio={}", est.p_ratio);
    let _ = writeln!(s, "p_eff={}", est.p_eff);
    let _ = writeln!(s, "degenerate_grid={}", est.degenerate_grid);
    let _ = writeln!(s, "grid_size={}", est.grid.len());
    let _ = writeln!(s, "eigenvalues={}", join(&est.eigenvalues));
    let _ = writeln!(s, "fit_scores={}", join(&est.fit_scores));
    s
}

/// `results.csv` + `dynamic` → `results_dynamic.csv`.
pub fn curve_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{label}.{ext}"))
}

fn write_curves(cfg: &ExperimentConfig, curves: &[Curve], title: &str, x_label: &str) -> Result<String, SenseError> {
    let mut report = String::new();
    for curve in curves {
        let path = curve_path(&cfg.out, &curve.label);
        write_results(&curve.result, &path)?;
        let _ = writeln!(
            report,
            "curve={} rows={} wrote={}",
            curve.label,
            curve.result.rows.len(),
            path.display()
        );
    }
    if cfg.plot {
        let svg = cfg.out.with_extension("svg");
        write_pd_chart(&svg, title, x_label, curves)?;
        let _ = writeln!(report, "plot={}", svg.display());
    }
    Ok(report)
}

fn snr_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>, SenseError> {
    linear_grid(cfg.snr_min, cfg.snr_max, cfg.snr_step)
}

const BOTH_MODES: [ThresholdMode; 2] = [ThresholdMode::Static { factor: 1.0 }, ThresholdMode::Dynamic];

fn run_sweep_snr(cfg: &ExperimentConfig) -> Result<String, SenseError> {
    let curves = sweep_snr(&cfg.plan(), &snr_grid(cfg)?, &BOTH_MODES)?;
    let title = format!("Pd vs SNR, Pfa = {}, N = {}", cfg.pfa, cfg.n);
    write_curves(cfg, &curves, &title, "SNR (dB)")
}

fn run_sweep_pfa(cfg: &ExperimentConfig) -> Result<String, SenseError> {
    let snr = cfg.snr.unwrap_or(-2.0);
    let curves = sweep_pfa(&cfg.plan(), &PFA_GRID, snr, &BOTH_MODES)?;
    let title = format!("Pd vs target Pfa, SNR = {snr} dB, N = {}", cfg.n);
    write_curves(cfg, &curves, &title, "target Pfa")
}

fn run_sweep_factor(cfg: &ExperimentConfig) -> Result<String, SenseError> {
    let plan = TrialPlan {
        mismatch: NoiseMismatch::None,
        ..cfg.plan()
    };
    let curves = sweep_threshold_factor(&plan, &cfg.factors, &snr_grid(cfg)?)?;
    let title = format!("Static threshold factors, Pfa = {}, N = {}", cfg.pfa, cfg.n);
    write_curves(cfg, &curves, &title, "SNR (dB)")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig, CliError> {
        let argv = std::iter::once("specsense").chain(args.iter().copied());
        match parse_config(argv, None)? {
            Parsed::Run(cfg) => Ok(*cfg),
            Parsed::Exit { .. } => panic!("unexpected exit"),
        }
    }

    #[test]
    fn flags_override_defaults() {
        let cfg = parse(&["sweep-snr", "--pfa", "0.1", "--n", "128", "--trials", "1000"]).unwrap();
        assert_eq!(cfg.command, CommandKind::SweepSnr);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.l, 8);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.m_grid, 100);
        assert_eq!(cfg.mismatch_db, 3.0);
    }

    #[test]
    fn out_of_range_pfa_names_the_flag() {
        let e = parse(&["sense", "--pfa", "1.5"]).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("`pfa`"), "{}", e.message);
        assert!(e.message.contains("(0, 1)"));
    }

    #[test]
    fn flag_beats_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(&path, "# trial budget\ntrials = 500\nsnr-min = -4\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = parse(&["sweep-snr", "--config", p, "--trials", "2000"]).unwrap();
        assert_eq!(cfg.trials, 2000);
        assert_eq!(cfg.snr_min, -4.0);
        let cfg = parse(&["sweep-snr", "--config", p, "--quick"]).unwrap();
        assert_eq!(cfg.trials, 500);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(&path, "trials = 5\nbogus = 1\n").unwrap();
        let e = parse(&["sense", "--config", path.to_str().unwrap()]).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("bogus") && e.message.contains(":2"));
    }

    #[test]
    fn seed_precedence() {
        let argv = ["specsense", "sense"];
        let Parsed::Run(cfg) = parse_config(argv, Some("7")).unwrap() else {
            panic!()
        };
        assert_eq!(cfg.seed, 7);
        let argv = ["specsense", "sense", "--seed", "9"];
        let Parsed::Run(cfg) = parse_config(argv, Some("7")).unwrap() else {
            panic!()
        };
        assert_eq!(cfg.seed, 9);
        assert!(parse_config(["specsense", "sense"], Some("x")).is_err());
    }

    #[test]
    fn quick_mode_trials() {
        assert_eq!(parse(&["sweep-pfa", "--quick"]).unwrap().trials, QUICK_TRIALS);
        assert_eq!(parse(&["sweep-pfa", "--quick", "--trials", "50"]).unwrap().trials, 50);
        assert_eq!(parse(&["sweep-pfa"]).unwrap().snr, Some(-2.0));
    }

    #[test]
    fn help_exits_successfully() {
        match parse_config(["specsense", "--help"], None).unwrap() {
            Parsed::Exit { code, text } => {
                assert_eq!(code, 0);
                assert!(text.contains("sweep-snr"));
            }
            Parsed::Run(_) => panic!("help should not run"),
        }
    }

    #[test]
    fn validation_errors() {
        for args in [
            &["sense", "--n", "127"][..],
            &["sense", "--l", "1"],
            &["sense", "--factor", "0"],
            &["sense", "--m-grid", "1"],
            &["sense", "--trials", "0"],
            &["sense", "--snr-step", "0"],
            &["sense", "--mismatch-db", "-1"],
            &["sense", "--mode", "sideways"],
            &["launch"],
        ] {
            assert_eq!(parse(args).unwrap_err().code, 2, "{args:?}");
        }
    }

    #[test]
    fn curve_paths() {
        assert_eq!(
            curve_path(Path::new("out/r.csv"), "static"),
            PathBuf::from("out/r_static.csv")
        );
        assert_eq!(
            curve_path(Path::new("r"), "factor1.5"),
            PathBuf::from("r_factor1.5.csv")
        );
    }

    #[test]
    fn sense_is_deterministic() {
        let cfg = parse(&["sense", "--mode", "dynamic", "--snr", "-2", "--seed", "1"]).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(&cfg, &mut a).unwrap();
        run(&cfg, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("sigma_hat2=") && text.contains("verdict="));
    }

    #[test]
    fn estimate_noise_prints_diagnostics() {
        let cfg = parse(&["estimate-noise", "--n", "512"]).unwrap();
        let mut out = Vec::new();
        run(&cfg, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        for key in [
            "sigma_hat2=",
            "k_hat=",
            "sigma_lo2=",
            "sigma_hi2=",
            "fit_scores=",
            "eigenvalues=",
        ] {
            assert!(text.contains(key), "{key}");
        }
    }
}
