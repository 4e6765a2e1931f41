//! Seeded Monte Carlo estimation of detection and false-alarm rates.
//!
//! Trial `t` of a plan always sees the same random draws: its noise offset,
//! QPSK symbols and noise samples come from substreams of the master seed
//! keyed by `t`. Sweeps therefore use common random numbers across sweep
//! points, and results are independent of how trials are spread over
//! threads.
//!
//! Each trial draws `L·N` complex samples per hypothesis. The full `L × N`
//! frame feeds the noise estimator; the energy statistic covers the first
//! `N/2` complex samples counted as `N` real I/Q observations (see
//! [`iq_energy_statistic`]).

mod csv;

pub use self::csv::{read_results, read_results_from, write_results, write_results_to, CSV_HEADER};

use rand::Rng;
use rayon::prelude::*;

use crate::detector::{dynamic_threshold, iq_energy_statistic, static_threshold, ThresholdMode};
use crate::error::{SenseError, SenseResult};
use crate::noise::{EcdfConvention, NoiseEstimator, DEFAULT_GRID_SIZE};
use crate::signal::{add_awgn_with, db_to_linear, frame, qpsk_with, substream_rng, ComplexSample};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.576;

/// Largest tolerated fraction of trials whose noise estimation failed.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Threshold factors of the static-threshold study.
pub const DEFAULT_FACTORS: [f64; 4] = [1.0, 1.5, 2.0, 2.5];

/// Per-trial deviation of the true noise variance from `sigma_w2_true`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMismatch {
    None,
    /// Offset drawn uniformly from `[-db, +db]` dB for each trial.
    Uniform {
        db: f64,
    },
    /// The same offset of `db` dB in every trial.
    Fixed {
        db: f64,
    },
}

impl NoiseMismatch {
    fn offset_db<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseMismatch::None => 0.0,
            NoiseMismatch::Uniform { db } if db > 0.0 => rng.random_range(-db..=db),
            NoiseMismatch::Uniform { .. } => 0.0,
            NoiseMismatch::Fixed { db } => db,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub n_trials: usize,
    /// Snapshot columns per frame, and the number of real observations in
    /// the energy statistic. Must be even.
    pub n: usize,
    /// Smoothing factor (frame rows).
    pub l: usize,
    pub target_pfa: f64,
    /// `Static { factor }` uses `F = factor · sigma_nominal2`.
    pub mode: ThresholdMode,
    /// Noise variance of a trial with zero mismatch offset.
    pub sigma_w2_true: f64,
    /// Noise variance the static threshold assumes.
    pub sigma_nominal2: f64,
    /// Signal power at zero mismatch offset. The offset scales signal and
    /// noise together, so every trial is received at
    /// `sigma_s2 / sigma_w2_true`.
    pub sigma_s2: f64,
    pub master_seed: u64,
    pub m_grid: usize,
    pub mismatch: NoiseMismatch,
    /// QPSK pulse length in samples. `l` puts one symbol in each snapshot
    /// column, giving a rank-one signal subspace.
    pub samples_per_symbol: usize,
    pub ecdf: EcdfConvention,
}

impl Default for TrialPlan {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            n: 128,
            l: 8,
            target_pfa: 0.1,
            mode: ThresholdMode::Static { factor: 1.0 },
            sigma_w2_true: 1.0,
            sigma_nominal2: 1.0,
            sigma_s2: 0.0,
            master_seed: 42,
            m_grid: DEFAULT_GRID_SIZE,
            mismatch: NoiseMismatch::None,
            samples_per_symbol: 8,
            ecdf: EcdfConvention::default(),
        }
    }
}

impl TrialPlan {
    pub fn validate(&self) -> SenseResult<()> {
        if self.n_trials == 0 {
            return Err(SenseError::invalid("trials", 0, "must be > 0"));
        }
        if self.l < 2 {
            return Err(SenseError::invalid("l", self.l, "must be >= 2"));
        }
        if self.n <= self.l {
            return Err(SenseError::invalid("n", self.n, "must be > l"));
        }
        if !self.n.is_multiple_of(2) {
            return Err(SenseError::invalid("n", self.n, "must be even (I/Q observations)"));
        }
        if !(self.target_pfa > 0.0 && self.target_pfa < 1.0) {
            return Err(SenseError::invalid(
                "pfa",
                self.target_pfa,
                "probability must be in (0, 1)",
            ));
        }
        if let ThresholdMode::Static { factor } = self.mode {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(SenseError::invalid("factor", factor, "must be finite and > 0"));
            }
        }
        if !(self.sigma_w2_true > 0.0 && self.sigma_w2_true.is_finite()) {
            return Err(SenseError::invalid(
                "sigma_w2_true",
                self.sigma_w2_true,
                "must be finite and > 0",
            ));
        }
        if !(self.sigma_nominal2 > 0.0 && self.sigma_nominal2.is_finite()) {
            return Err(SenseError::invalid(
                "sigma_nominal2",
                self.sigma_nominal2,
                "must be finite and > 0",
            ));
        }
        if !(self.sigma_s2 >= 0.0 && self.sigma_s2.is_finite()) {
            return Err(SenseError::invalid(
                "sigma_s2",
                self.sigma_s2,
                "must be finite and >= 0",
            ));
        }
        if self.m_grid < 2 {
            return Err(SenseError::invalid("m_grid", self.m_grid, "must be >= 2"));
        }
        if self.samples_per_symbol == 0 {
            return Err(SenseError::invalid("samples_per_symbol", 0, "must be > 0"));
        }
        match self.mismatch {
            NoiseMismatch::Uniform { db } | NoiseMismatch::Fixed { db } if !db.is_finite() => {
                Err(SenseError::invalid("mismatch_db", db, "must be finite"))
            }
            NoiseMismatch::Uniform { db } if db < 0.0 => Err(SenseError::invalid("mismatch_db", db, "must be >= 0")),
            _ => Ok(()),
        }
    }

    /// Copy with the signal set to `snr_db` relative to `sigma_w2_true`.
    pub fn at_snr_db(&self, snr_db: f64) -> Self {
        Self {
            sigma_s2: self.sigma_w2_true * db_to_linear(snr_db),
            ..self.clone()
        }
    }

    fn estimator(&self) -> NoiseEstimator {
        NoiseEstimator {
            grid_size: self.m_grid,
            ecdf: self.ecdf,
        }
    }

    fn noise_offset(&self, trial: u64) -> f64 {
        let mut rng = substream_rng(self.master_seed, stream_id(trial, Role::Mismatch));
        db_to_linear(self.mismatch.offset_db(&mut rng))
    }
}

#[derive(Clone, Copy)]
enum Role {
    Mismatch = 0,
    Signal = 1,
    NoiseH1 = 2,
    NoiseH0 = 3,
}

fn stream_id(trial: u64, role: Role) -> u64 {
    trial * 4 + role as u64
}

/// Noise estimate attached to a simulated observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateOutcome {
    NotRun,
    Failed,
    Value(f64),
}

/// One synthesised observation reduced to what the detector needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub energy: f64,
    pub true_sigma_w2: f64,
    pub estimate: EstimateOutcome,
}

/// Synthesize trial `trial` under H0 or H1 and reduce it to an
/// [`Observation`]. `estimate` controls whether the noise estimator runs.
pub fn simulate_observation(plan: &TrialPlan, trial: u64, present: bool, estimate: bool) -> SenseResult<Observation> {
    let total = plan.l * plan.n;
    let offset = plan.noise_offset(trial);
    let sigma_w2 = plan.sigma_w2_true * offset;
    let sigma_s2 = plan.sigma_s2 * offset;

    let mut stream = if present && sigma_s2 > 0.0 {
        let mut rng = substream_rng(plan.master_seed, stream_id(trial, Role::Signal));
        qpsk_with(total, sigma_s2, plan.samples_per_symbol, &mut rng)?
    } else {
        vec![ComplexSample::new(0.0, 0.0); total]
    };
    let role = if present { Role::NoiseH1 } else { Role::NoiseH0 };
    let mut rng = substream_rng(plan.master_seed, stream_id(trial, role));
    add_awgn_with(&mut stream, sigma_w2, &mut rng)?;

    let energy = iq_energy_statistic(&stream[..plan.n / 2])?.value;
    let estimate = if estimate {
        let f = frame(&stream, plan.l, plan.n)?;
        match plan.estimator().estimate(&f) {
            Ok(est) => EstimateOutcome::Value(est.sigma_hat2),
            Err(SenseError::NoNoiseEigenvalues { .. }) => EstimateOutcome::Failed,
            Err(e) => return Err(e),
        }
    } else {
        EstimateOutcome::NotRun
    };
    Ok(Observation {
        energy,
        true_sigma_w2: sigma_w2,
        estimate,
    })
}

/// Observations for trials `0..n_trials`, in trial order.
pub fn simulate_batch(plan: &TrialPlan, present: bool, estimate: bool) -> SenseResult<Vec<Observation>> {
    (0..plan.n_trials as u64)
        .into_par_iter()
        .map(|t| simulate_observation(plan, t, present, estimate))
        .collect()
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub pd: f64,
    pub pfa: f64,
    pub pd_ci: f64,
    pub pfa_ci: f64,
    pub mean_sigma_hat2: Option<f64>,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// A labelled curve, e.g. one threshold mode or one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub result: SweepResult,
}

/// Output of [`run_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub pd: f64,
    pub pfa: f64,
    pub pd_ci: f64,
    pub pfa_ci: f64,
    /// Trials that contributed to `pd` and `pfa` respectively.
    pub h1_trials: usize,
    pub h0_trials: usize,
    pub failed_trials: usize,
    pub mean_sigma_hat2: Option<f64>,
}

impl PointResult {
    pub fn into_row(self, sweep_value: f64) -> SweepRow {
        SweepRow {
            sweep_value,
            pd: self.pd,
            pfa: self.pfa,
            pd_ci: self.pd_ci,
            pfa_ci: self.pfa_ci,
            mean_sigma_hat2: self.mean_sigma_hat2,
            failed_trials: self.failed_trials,
        }
    }
}

/// `Z_99 · √(p(1−p)/n)`.
pub fn ci_halfwidth(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    Z_99 * (p * (1.0 - p) / n as f64).sqrt()
}

struct Rate {
    hits: usize,
    used: usize,
    failed: usize,
    sigma_sum: f64,
}

fn count(
    obs: &[Observation],
    mode: ThresholdMode,
    target_pfa: f64,
    n: usize,
    sigma_nominal2: f64,
) -> SenseResult<Rate> {
    let mut rate = Rate {
        hits: 0,
        used: 0,
        failed: 0,
        sigma_sum: 0.0,
    };
    match mode {
        ThresholdMode::Static { factor } => {
            let lambda = static_threshold(factor * sigma_nominal2, target_pfa, n)?;
            rate.used = obs.len();
            rate.hits = obs.iter().filter(|o| o.energy > lambda).count();
        }
        ThresholdMode::Dynamic => {
            for o in obs {
                match o.estimate {
                    EstimateOutcome::Value(s) => {
                        let lambda = dynamic_threshold(s, target_pfa, n)?;
                        rate.used += 1;
                        rate.sigma_sum += s;
                        if o.energy > lambda {
                            rate.hits += 1;
                        }
                    }
                    EstimateOutcome::Failed => rate.failed += 1,
                    EstimateOutcome::NotRun => {
                        return Err(SenseError::invalid(
                            "mode",
                            "dynamic",
                            "observations were simulated without noise estimation",
                        ))
                    }
                }
            }
        }
    }
    Ok(rate)
}

/// Pd and Pfa from pre-simulated observations.
pub fn tally(
    h1: &[Observation],
    h0: &[Observation],
    mode: ThresholdMode,
    target_pfa: f64,
    n: usize,
    sigma_nominal2: f64,
) -> SenseResult<PointResult> {
    let d = count(h1, mode, target_pfa, n, sigma_nominal2)?;
    let f = count(h0, mode, target_pfa, n, sigma_nominal2)?;
    let trials = h1.len().max(h0.len());
    let failed = d.failed + f.failed;
    if failed as f64 > MAX_FAILURE_RATE * trials as f64 {
        return Err(SenseError::TooManyFailures { failed, trials });
    }
    let frac = |r: &Rate| {
        if r.used == 0 {
            0.0
        } else {
            r.hits as f64 / r.used as f64
        }
    };
    let pd = frac(&d);
    let pfa = frac(&f);
    let mean_sigma_hat2 = match mode {
        ThresholdMode::Dynamic if d.used + f.used > 0 => Some((d.sigma_sum + f.sigma_sum) / (d.used + f.used) as f64),
        _ => None,
    };
    Ok(PointResult {
        pd,
        pfa,
        pd_ci: ci_halfwidth(pd, d.used),
        pfa_ci: ci_halfwidth(pfa, f.used),
        h1_trials: d.used,
        h0_trials: f.used,
        failed_trials: failed,
        mean_sigma_hat2,
    })
}

fn needs_estimate(modes: &[ThresholdMode]) -> bool {
    modes.iter().any(|m| matches!(m, ThresholdMode::Dynamic))
}

/// Empirical Pd and Pfa for one plan.
pub fn run_point(plan: &TrialPlan) -> SenseResult<PointResult> {
    plan.validate()?;
    let est = needs_estimate(&[plan.mode]);
    let h1 = simulate_batch(plan, true, est)?;
    let h0 = simulate_batch(plan, false, est)?;
    tally(&h1, &h0, plan.mode, plan.target_pfa, plan.n, plan.sigma_nominal2)
}

/// Static-threshold Pd versus SNR for each factor. The threshold for factor
/// `f` is `f · sigma_nominal2 · (Q⁻¹(Pfa)·√(2N) + N)`.
pub fn sweep_threshold_factor(base: &TrialPlan, factors: &[f64], snr_grid_db: &[f64]) -> SenseResult<Vec<Curve>> {
    base.validate()?;
    if let Some(&bad) = factors.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(SenseError::invalid("factor", bad, "must be finite and > 0"));
    }
    let h0 = simulate_batch(base, false, false)?;
    let mut curves: Vec<Curve> = factors
        .iter()
        .map(|f| Curve {
            label: format!("factor{f}"),
            result: SweepResult::default(),
        })
        .collect();
    for &snr in snr_grid_db {
        let plan = base.at_snr_db(snr);
        let h1 = simulate_batch(&plan, true, false)?;
        for (curve, &factor) in curves.iter_mut().zip(factors) {
            let mode = ThresholdMode::Static { factor };
            let point = tally(&h1, &h0, mode, plan.target_pfa, plan.n, plan.sigma_nominal2)?;
            curve.result.rows.push(point.into_row(snr));
        }
    }
    Ok(curves)
}

/// Pd versus SNR for each threshold mode at the plan's target Pfa.
pub fn sweep_snr(base: &TrialPlan, snr_grid_db: &[f64], modes: &[ThresholdMode]) -> SenseResult<Vec<Curve>> {
    sweep_snr_multi_pfa(base, snr_grid_db, modes, &[base.target_pfa]).map(|mut per_pfa| per_pfa.remove(0))
}

/// [`sweep_snr`] for several target Pfa values sharing one set of trials.
/// The outer vector follows `pfa_values`.
pub fn sweep_snr_multi_pfa(
    base: &TrialPlan,
    snr_grid_db: &[f64],
    modes: &[ThresholdMode],
    pfa_values: &[f64],
) -> SenseResult<Vec<Vec<Curve>>> {
    base.validate()?;
    if snr_grid_db.is_empty() {
        return Err(SenseError::EmptyInput("SNR grid"));
    }
    check_pfa_grid(pfa_values)?;
    let est = needs_estimate(modes);
    let h0 = simulate_batch(base, false, est)?;
    let mut out: Vec<Vec<Curve>> = pfa_values
        .iter()
        .map(|_| modes.iter().map(|m| empty_curve(m.name())).collect())
        .collect();
    for &snr in snr_grid_db {
        let plan = base.at_snr_db(snr);
        let h1 = simulate_batch(&plan, true, est)?;
        for (curves, &pfa) in out.iter_mut().zip(pfa_values) {
            for (curve, &mode) in curves.iter_mut().zip(modes) {
                let point = tally(&h1, &h0, mode, pfa, plan.n, plan.sigma_nominal2)?;
                curve.result.rows.push(point.into_row(snr));
            }
        }
    }
    Ok(out)
}

/// Pd versus target Pfa at one SNR for each threshold mode.
pub fn sweep_pfa(base: &TrialPlan, pfa_grid: &[f64], snr_db: f64, modes: &[ThresholdMode]) -> SenseResult<Vec<Curve>> {
    base.validate()?;
    if pfa_grid.is_empty() {
        return Err(SenseError::EmptyInput("Pfa grid"));
    }
    check_pfa_grid(pfa_grid)?;
    let plan = base.at_snr_db(snr_db);
    let est = needs_estimate(modes);
    let h0 = simulate_batch(&plan, false, est)?;
    let h1 = simulate_batch(&plan, true, est)?;
    let mut curves: Vec<Curve> = modes.iter().map(|m| empty_curve(m.name())).collect();
    for &pfa in pfa_grid {
        for (curve, &mode) in curves.iter_mut().zip(modes) {
            let point = tally(&h1, &h0, mode, pfa, plan.n, plan.sigma_nominal2)?;
            curve.result.rows.push(point.into_row(pfa));
        }
    }
    Ok(curves)
}

fn check_pfa_grid(pfa: &[f64]) -> SenseResult<()> {
    match pfa.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(&bad) => Err(SenseError::invalid("pfa", bad, "probability must be in (0, 1)")),
        None => Ok(()),
    }
}

fn empty_curve(label: &str) -> Curve {
    Curve {
        label: label.to_string(),
        result: SweepResult::default(),
    }
}

/// `start, start + step, …` up to and including `stop` (within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> SenseResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SenseError::invalid("snr_step", step, "must be finite and > 0"));
    }
    if !(stop >= start) {
        return Err(SenseError::invalid("snr_max", stop, "must be >= snr_min"));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::closed_form_pfa;

    fn quick(n_trials: usize) -> TrialPlan {
        TrialPlan {
            n_trials,
            ..TrialPlan::default()
        }
    }

    #[test]
    fn static_h0_false_alarm_rate() {
        let plan = quick(10_000);
        let r = run_point(&plan).unwrap();
        assert!((r.pfa - 0.1).abs() <= 0.012, "{}", r.pfa);
        assert_eq!(r.mean_sigma_hat2, None);
        assert_eq!(r.failed_trials, 0);
    }

    #[test]
    fn high_snr_detects_everything() {
        for mode in [ThresholdMode::Static { factor: 1.0 }, ThresholdMode::Dynamic] {
            let plan = TrialPlan {
                mode,
                ..quick(200).at_snr_db(20.0)
            };
            assert_eq!(run_point(&plan).unwrap().pd, 1.0);
        }
    }

    #[test]
    fn zero_signal_h1_is_h0_in_distribution() {
        let plan = quick(4000);
        let r = run_point(&plan).unwrap();
        let tol = r.pd_ci + r.pfa_ci;
        assert!((r.pd - r.pfa).abs() <= tol, "{} {}", r.pd, r.pfa);
    }

    #[test]
    fn underestimated_noise_inflates_static_pfa() {
        let plan = TrialPlan {
            mismatch: NoiseMismatch::Fixed { db: 3.0 },
            ..quick(2000)
        };
        let r = run_point(&plan).unwrap();
        let lambda = static_threshold(1.0, 0.1, 128).unwrap();
        let predicted = closed_form_pfa(lambda, 128, db_to_linear(3.0)).unwrap();
        assert!(r.pfa > 0.1 + r.pfa_ci);
        assert!((r.pfa - predicted).abs() < 0.05, "{} vs {predicted}", r.pfa);
    }

    #[test]
    fn observations_are_reproducible() {
        let plan = TrialPlan {
            mismatch: NoiseMismatch::Uniform { db: 3.0 },
            ..quick(3)
        }
        .at_snr_db(-3.0);
        let a = simulate_observation(&plan, 2, true, true).unwrap();
        let b = simulate_observation(&plan, 2, true, true).unwrap();
        assert_eq!(a, b);
        let c = simulate_observation(&plan, 1, true, true).unwrap();
        assert_ne!(a.energy, c.energy);
    }

    #[test]
    fn dynamic_tally_requires_estimates() {
        let plan = quick(5);
        let h = simulate_batch(&plan, true, false).unwrap();
        assert!(tally(&h, &h, ThresholdMode::Dynamic, 0.1, 128, 1.0).is_err());
    }

    #[test]
    fn failures_are_excluded_and_limited() {
        let ok = Observation {
            energy: 200.0,
            true_sigma_w2: 1.0,
            estimate: EstimateOutcome::Value(1.0),
        };
        let bad = Observation {
            estimate: EstimateOutcome::Failed,
            ..ok
        };
        let mut h1 = vec![ok; 199];
        h1.push(bad);
        let h0 = vec![ok; 200];
        let r = tally(&h1, &h0, ThresholdMode::Dynamic, 0.1, 128, 1.0).unwrap();
        assert_eq!(r.h1_trials, 199);
        assert_eq!(r.failed_trials, 1);
        assert_eq!(r.pd, 1.0);

        h1[0] = bad;
        h1[1] = bad;
        assert!(matches!(
            tally(&h1, &h0, ThresholdMode::Dynamic, 0.1, 128, 1.0),
            Err(SenseError::TooManyFailures { failed: 3, trials: 200 })
        ));
    }

    #[test]
    fn plan_validation() {
        assert!(TrialPlan {
            n: 127,
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan {
            n: 8,
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan {
            target_pfa: 1.0,
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan {
            n_trials: 0,
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan {
            m_grid: 1,
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan {
            mismatch: NoiseMismatch::Uniform { db: -1.0 },
            ..TrialPlan::default()
        }
        .validate()
        .is_err());
        assert!(TrialPlan::default().validate().is_ok());
    }

    #[test]
    fn grid_helper() {
        assert_eq!(linear_grid(-2.0, 2.0, 1.0).unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(linear_grid(0.0, 0.0, 1.0).unwrap(), vec![0.0]);
        assert!(linear_grid(1.0, 0.0, 1.0).is_err());
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ci_formula() {
        assert!((ci_halfwidth(0.5, 10_000) - 0.01288).abs() < 1e-5);
        assert_eq!(ci_halfwidth(1.0, 100), 0.0);
        assert_eq!(ci_halfwidth(0.3, 0), 0.0);
    }
}
