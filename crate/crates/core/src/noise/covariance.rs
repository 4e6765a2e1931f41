use num_complex::Complex64;

use crate::error::{SenseError, SenseResult};
use crate::signal::SampleFrame;

/// Dense Hermitian `L × L` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: Vec<Complex64>,
    dim: usize,
}

impl CovarianceMatrix {
    /// Wrap row-major entries after checking squareness and Hermitian
    /// symmetry (to 1e-12, relative to the largest entry when that exceeds 1).
    pub fn from_row_major(entries: Vec<Complex64>, dim: usize) -> SenseResult<Self> {
        if dim == 0 {
            return Err(SenseError::EmptyInput("covariance matrix must be at least 1x1"));
        }
        if entries.len() != dim * dim {
            return Err(SenseError::invalid(
                "entries",
                entries.len(),
                "must hold dim*dim values",
            ));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = max_asymmetry(&entries, dim);
        if !(asym <= 1e-12 * scale) {
            return Err(SenseError::NotHermitian(asym));
        }
        Ok(Self { entries, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn as_row_major(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub(crate) fn max_asymmetry(entries: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// `(1/N)·y·yᴴ` for the `L × N` frame `y`.
///
/// Only the upper triangle is accumulated; the lower triangle is its
/// conjugate mirror and the diagonal is real, so the result is exactly
/// Hermitian.
pub fn sample_covariance(frame: &SampleFrame) -> CovarianceMatrix {
    let l = frame.rows();
    let n = frame.cols();
    let mut acc = vec![Complex64::new(0.0, 0.0); l * l];
    for j in 0..n {
        let col = frame.column(j);
        for r in 0..l {
            let yr = col[r];
            for c in r..l {
                acc[r * l + c] += yr * col[c].conj();
            }
        }
    }
    let inv_n = 1.0 / n as f64;
    for r in 0..l {
        acc[r * l + r] = Complex64::new(acc[r * l + r].re * inv_n, 0.0);
        for c in r + 1..l {
            let v = acc[r * l + c] * inv_n;
            acc[r * l + c] = v;
            acc[c * l + r] = v.conj();
        }
    }
    CovarianceMatrix { entries: acc, dim: l }
}
