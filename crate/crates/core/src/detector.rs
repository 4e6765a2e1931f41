//! Energy detector: test statistic, Q-function, thresholds and decisions.
//!
//! All probabilities use the Gaussian approximation of the energy statistic:
//!
//! ```text
//! Pfa = Q((λ − N·σw²) / (σw²·√(2N)))
//! Pd  = Q((λ − N·(σw² + σs²)) / ((σw² + σs²)·√(2N)))
//! λ   = σ²·(Q⁻¹(Pfa)·√(2N) + N)
//! ```
//!
//! The `√(2N)` spread is that of `N` real-valued observations. For complex
//! samples use [`iq_energy_statistic`], which counts I and Q separately.

use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

use crate::error::{SenseError, SenseResult};
use crate::signal::ComplexSample;

/// Energy `Σ |y[n]|²` over `n` observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyStatistic {
    pub value: f64,
    pub n: usize,
}

/// `Σ |y[n]|²` over the complex samples, with `n` = sample count.
pub fn energy_statistic(samples: &[ComplexSample]) -> SenseResult<EnergyStatistic> {
    if samples.is_empty() {
        return Err(SenseError::EmptyInput("energy statistic needs at least one sample"));
    }
    Ok(EnergyStatistic {
        value: samples.iter().map(|s| s.norm_sqr()).sum(),
        n: samples.len(),
    })
}

/// Energy over the `2·len` real components of complex samples.
///
/// Each component is scaled by `√2` so that under circular noise of total
/// variance `σw²` it has variance `σw²` itself. The statistic is then a sum
/// of `n = 2·len` real terms with mean `n·σw²` and variance `2n·σw⁴`, which
/// is the model the closed-form probabilities and thresholds assume.
pub fn iq_energy_statistic(samples: &[ComplexSample]) -> SenseResult<EnergyStatistic> {
    let stat = energy_statistic(samples)?;
    Ok(EnergyStatistic {
        value: 2.0 * stat.value,
        n: 2 * stat.n,
    })
}

/// Standard Gaussian tail probability `Q(x) = ½·erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of [`q_function`] by bisection on `[-40, 40]`.
pub fn q_inverse(p: f64) -> SenseResult<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SenseError::invalid("pfa", p, "probability must be in (0, 1)"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Q is decreasing: Q(lo) > p > Q(hi).
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_pfa(target_pfa: f64) -> SenseResult<()> {
    if target_pfa > 0.0 && target_pfa < 1.0 {
        Ok(())
    } else {
        Err(SenseError::invalid("pfa", target_pfa, "probability must be in (0, 1)"))
    }
}

fn check_n(n: usize) -> SenseResult<()> {
    if n == 0 {
        Err(SenseError::invalid("n", 0, "must be >= 1"))
    } else {
        Ok(())
    }
}

/// `Q⁻¹(Pfa)·√(2N) + N`: the threshold for unit noise variance.
fn unit_threshold(target_pfa: f64, n: usize) -> SenseResult<f64> {
    check_pfa(target_pfa)?;
    check_n(n)?;
    let n = n as f64;
    Ok(q_inverse(target_pfa)? * (2.0 * n).sqrt() + n)
}

/// Fixed threshold `F·(Q⁻¹(Pfa)·√(2N) + N)`. `F` is the noise variance the
/// static detector assumes.
pub fn static_threshold(factor: f64, target_pfa: f64, n: usize) -> SenseResult<f64> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(SenseError::invalid("factor", factor, "must be finite and > 0"));
    }
    Ok(factor * unit_threshold(target_pfa, n)?)
}

/// Noise-adaptive threshold `σ̂²·(Q⁻¹(Pfa)·√(2N) + N)`.
pub fn dynamic_threshold(sigma_hat2: f64, target_pfa: f64, n: usize) -> SenseResult<f64> {
    if !(sigma_hat2 > 0.0 && sigma_hat2.is_finite()) {
        return Err(SenseError::invalid("sigma_hat2", sigma_hat2, "must be finite and > 0"));
    }
    Ok(sigma_hat2 * unit_threshold(target_pfa, n)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Threshold scaled by a fixed assumed noise variance.
    Static { factor: f64 },
    /// Threshold scaled by the per-frame noise estimate.
    Dynamic,
}

impl ThresholdMode {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMode::Static { .. } => "static",
            ThresholdMode::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub mode: ThresholdMode,
    pub target_pfa: f64,
    pub n: usize,
}

impl ThresholdSpec {
    pub fn new(mode: ThresholdMode, target_pfa: f64, n: usize) -> SenseResult<Self> {
        check_pfa(target_pfa)?;
        check_n(n)?;
        if let ThresholdMode::Static { factor } = mode {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(SenseError::invalid("factor", factor, "must be finite and > 0"));
            }
        }
        Ok(Self { mode, target_pfa, n })
    }

    /// Resolve the threshold. Dynamic mode needs the noise estimate.
    pub fn threshold(&self, sigma_hat2: Option<f64>) -> SenseResult<f64> {
        match self.mode {
            ThresholdMode::Static { factor } => static_threshold(factor, self.target_pfa, self.n),
            ThresholdMode::Dynamic => {
                let s = sigma_hat2.ok_or_else(|| {
                    SenseError::invalid("sigma_hat2", "missing", "dynamic mode needs a noise estimate")
                })?;
                dynamic_threshold(s, self.target_pfa, self.n)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PresentH1,
    AbsentH0,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PresentH1 => "present",
            Verdict::AbsentH0 => "absent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingDecision {
    pub statistic: EnergyStatistic,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Strict comparison: a statistic equal to the threshold decides H0.
pub fn decide(stat: EnergyStatistic, threshold: f64) -> SensingDecision {
    let verdict = if stat.value > threshold {
        Verdict::PresentH1
    } else {
        Verdict::AbsentH0
    };
    SensingDecision {
        statistic: stat,
        threshold,
        verdict,
    }
}

/// Predicted detection probability at threshold `lambda`.
pub fn closed_form_pd(lambda: f64, n: usize, sigma_w2: f64, sigma_s2: f64) -> SenseResult<f64> {
    if !(sigma_w2 > 0.0) {
        return Err(SenseError::invalid("sigma_w2", sigma_w2, "must be > 0"));
    }
    if !(sigma_s2 >= 0.0) {
        return Err(SenseError::invalid("sigma_s2", sigma_s2, "must be >= 0"));
    }
    check_n(n)?;
    let total = sigma_w2 + sigma_s2;
    let n = n as f64;
    Ok(q_function((lambda - n * total) / (total * (2.0 * n).sqrt())))
}

/// Predicted false-alarm probability at threshold `lambda`.
pub fn closed_form_pfa(lambda: f64, n: usize, sigma_w2: f64) -> SenseResult<f64> {
    if !(sigma_w2 > 0.0) {
        return Err(SenseError::invalid("sigma_w2", sigma_w2, "must be > 0"));
    }
    check_n(n)?;
    let n = n as f64;
    Ok(q_function((lambda - n * sigma_w2) / (sigma_w2 * (2.0 * n).sqrt())))
}
