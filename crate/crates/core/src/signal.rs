//! Seeded primary-user waveforms, AWGN, and snapshot framing.
//!
//! Every generator takes either an explicit 64-bit seed or a caller-owned
//! RNG. Seeded entry points build a [`ChaCha8Rng`]; Monte Carlo code derives
//! independent substreams from one master seed with [`substream_rng`] so
//! results do not depend on which worker thread runs a trial.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{SenseError, SenseResult};

/// One complex baseband sample.
pub type ComplexSample = Complex64;

/// RNG for a plain 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for `(master_seed, stream)`.
///
/// ChaCha's 64-bit stream id splits one key into non-overlapping
/// keystreams, so substreams never share output regardless of how many
/// values each one draws.
pub fn substream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Which side of the sensing problem a synthetic observation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Primary user absent: `y = w`.
    H0,
    /// Primary user present: `y = x + w`.
    H1,
}

/// Parameters of one synthetic observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub sigma_s2: f64,
    pub sigma_w2: f64,
    pub hypothesis: Hypothesis,
    pub seed: u64,
    pub n_samples: usize,
    /// Samples per QPSK symbol (rectangular pulses).
    pub samples_per_symbol: usize,
}

impl ScenarioSpec {
    pub fn validate(&self) -> SenseResult<()> {
        if !(self.sigma_s2 >= 0.0 && self.sigma_s2.is_finite()) {
            return Err(SenseError::invalid(
                "sigma_s2",
                self.sigma_s2,
                "must be finite and >= 0",
            ));
        }
        if !(self.sigma_w2 > 0.0 && self.sigma_w2.is_finite()) {
            return Err(SenseError::invalid("sigma_w2", self.sigma_w2, "must be finite and > 0"));
        }
        if self.n_samples == 0 {
            return Err(SenseError::invalid("n_samples", 0, "must be > 0"));
        }
        if self.samples_per_symbol == 0 {
            return Err(SenseError::invalid("samples_per_symbol", 0, "must be > 0"));
        }
        Ok(())
    }

    /// SNR in dB; only meaningful under H1 with a non-zero signal.
    pub fn snr_db(&self) -> SenseResult<f64> {
        snr_db(self.sigma_s2, self.sigma_w2)
    }

    /// Synthesise the received stream. Signal and noise use separate
    /// substreams of `seed`.
    pub fn synthesize(&self) -> SenseResult<Vec<ComplexSample>> {
        self.validate()?;
        let mut stream = match self.hypothesis {
            Hypothesis::H1 if self.sigma_s2 > 0.0 => {
                let mut rng = substream_rng(self.seed, 0);
                qpsk_with(self.n_samples, self.sigma_s2, self.samples_per_symbol, &mut rng)?
            }
            _ => vec![ComplexSample::new(0.0, 0.0); self.n_samples],
        };
        let mut rng = substream_rng(self.seed, 1);
        add_awgn_with(&mut stream, self.sigma_w2, &mut rng)?;
        Ok(stream)
    }
}

/// Unfiltered QPSK at one sample per symbol.
///
/// Every sample is one of `(±a, ±a)` with `a = sqrt(sigma_s2 / 2)`, so each
/// sample has power `sigma_s2`.
pub fn generate_qpsk(n_samples: usize, sigma_s2: f64, seed: u64) -> SenseResult<Vec<ComplexSample>> {
    qpsk_with(n_samples, sigma_s2, 1, &mut seeded_rng(seed))
}

/// QPSK with rectangular pulses of `samples_per_symbol` samples.
pub fn generate_qpsk_oversampled(
    n_samples: usize,
    sigma_s2: f64,
    samples_per_symbol: usize,
    seed: u64,
) -> SenseResult<Vec<ComplexSample>> {
    qpsk_with(n_samples, sigma_s2, samples_per_symbol, &mut seeded_rng(seed))
}

pub fn qpsk_with<R: Rng + ?Sized>(
    n_samples: usize,
    sigma_s2: f64,
    samples_per_symbol: usize,
    rng: &mut R,
) -> SenseResult<Vec<ComplexSample>> {
    if n_samples == 0 {
        return Err(SenseError::invalid("n_samples", 0, "must be > 0"));
    }
    if !(sigma_s2 > 0.0 && sigma_s2.is_finite()) {
        return Err(SenseError::invalid("sigma_s2", sigma_s2, "must be finite and > 0"));
    }
    if samples_per_symbol == 0 {
        return Err(SenseError::invalid("samples_per_symbol", 0, "must be > 0"));
    }
    let a = (sigma_s2 / 2.0).sqrt();
    let mut out = Vec::with_capacity(n_samples);
    while out.len() < n_samples {
        let bits: u8 = rng.random_range(0..4);
        let re = if bits & 1 == 0 { a } else { -a };
        let im = if bits & 2 == 0 { a } else { -a };
        let take = samples_per_symbol.min(n_samples - out.len());
        out.extend(std::iter::repeat_n(ComplexSample::new(re, im), take));
    }
    Ok(out)
}

/// Add circularly symmetric complex Gaussian noise of total variance
/// `sigma_w2` (`sigma_w2 / 2` per component).
pub fn add_awgn(stream: &[ComplexSample], sigma_w2: f64, seed: u64) -> SenseResult<Vec<ComplexSample>> {
    let mut out = stream.to_vec();
    add_awgn_with(&mut out, sigma_w2, &mut seeded_rng(seed))?;
    Ok(out)
}

pub fn add_awgn_with<R: Rng + ?Sized>(stream: &mut [ComplexSample], sigma_w2: f64, rng: &mut R) -> SenseResult<()> {
    if !(sigma_w2 > 0.0 && sigma_w2.is_finite()) {
        return Err(SenseError::invalid("sigma_w2", sigma_w2, "must be finite and > 0"));
    }
    let scale = (sigma_w2 / 2.0).sqrt();
    for s in stream.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += ComplexSample::new(scale * re, scale * im);
    }
    Ok(())
}

/// `10·log10(sigma_s2 / sigma_w2)`.
pub fn snr_db(sigma_s2: f64, sigma_w2: f64) -> SenseResult<f64> {
    if !(sigma_s2 > 0.0) {
        return Err(SenseError::invalid("sigma_s2", sigma_s2, "must be > 0"));
    }
    if !(sigma_w2 > 0.0) {
        return Err(SenseError::invalid("sigma_w2", sigma_w2, "must be > 0"));
    }
    Ok(10.0 * (sigma_s2 / sigma_w2).log10())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// An `L × N` matrix of snapshots: column `j` holds `L` consecutive samples.
///
/// Storage is column-major, so [`SampleFrame::column`] is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    data: Vec<ComplexSample>,
    rows: usize,
    cols: usize,
}

impl SampleFrame {
    /// Build from column-major data. Requires `L >= 2`, `N >= L` and exactly
    /// `L·N` finite samples.
    pub fn from_column_major(data: Vec<ComplexSample>, rows: usize, cols: usize) -> SenseResult<Self> {
        if rows < 2 {
            return Err(SenseError::invalid("L", rows, "smoothing factor must be >= 2"));
        }
        if cols < rows {
            return Err(SenseError::invalid("N", cols, "must be >= L"));
        }
        if data.len() != rows * cols {
            return Err(SenseError::StreamTooShort {
                needed: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(SenseError::invalid(
                "frame",
                "non-finite sample",
                "all samples must be finite",
            ));
        }
        Ok(Self { data, rows, cols })
    }

    /// Smoothing factor `L`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Snapshot count `N`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `L / N`.
    pub fn ratio(&self) -> f64 {
        self.rows as f64 / self.cols as f64
    }

    pub fn get(&self, row: usize, col: usize) -> ComplexSample {
        self.data[col * self.rows + row]
    }

    pub fn column(&self, col: usize) -> &[ComplexSample] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// The frame flattened column-major, i.e. the original stream order.
    pub fn as_column_major(&self) -> &[ComplexSample] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.iter().map(|s| s * c).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

/// Arrange the first `L·N` samples of `stream` as consecutive length-`L`
/// snapshot columns.
pub fn frame(stream: &[ComplexSample], l: usize, n: usize) -> SenseResult<SampleFrame> {
    let needed = l
        .checked_mul(n)
        .ok_or_else(|| SenseError::invalid("L*N", "overflow", "must fit in usize"))?;
    if stream.len() < needed {
        return Err(SenseError::StreamTooShort {
            needed,
            got: stream.len(),
        });
    }
    SampleFrame::from_column_major(stream[..needed].to_vec(), l, n)
}
