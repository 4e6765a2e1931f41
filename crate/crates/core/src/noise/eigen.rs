//! Cyclic Jacobi eigenvalues for small dense Hermitian matrices.

use num_complex::Complex64;

use super::covariance::{max_asymmetry, CovarianceMatrix};
use crate::error::{SenseError, SenseResult};

pub const MAX_SWEEPS: usize = 100;
pub const CONVERGENCE_TOL: f64 = 1e-12;

/// Eigenvalues sorted in descending order, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    /// Sorts descending and clamps negatives to zero.
    pub fn new(mut values: Vec<f64>) -> SenseResult<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SenseError::invalid("eigenvalues", "non-finite", "must be finite"));
        }
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// PSD spectrum of a covariance matrix.
pub fn eigenvalues_hermitian(m: &CovarianceMatrix) -> SenseResult<EigenSpectrum> {
    EigenSpectrum::new(jacobi_eigenvalues(m.as_row_major(), m.dim())?)
}

/// All real eigenvalues of a row-major Hermitian matrix, descending and
/// unclamped.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the real symmetric Jacobi rotation, so the composite transform is unitary.
/// Sweeps stop once the off-diagonal Frobenius norm is below
/// `1e-12·‖m‖_F`.
pub fn jacobi_eigenvalues(entries: &[Complex64], dim: usize) -> SenseResult<Vec<f64>> {
    if entries.len() != dim * dim {
        return Err(SenseError::invalid(
            "entries",
            entries.len(),
            "must hold dim*dim values",
        ));
    }
    let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let asym = max_asymmetry(entries, dim);
    if !(asym <= 1e-10 * scale) {
        return Err(SenseError::NotHermitian(asym));
    }

    let mut a = entries.to_vec();
    for i in 0..dim {
        a[i * dim + i].im = 0.0;
    }
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = CONVERGENCE_TOL * norm;

    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    s += a[i * dim + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(SenseError::EigenNoConvergence { sweeps, off_norm: off });
        }
        for p in 0..dim {
            for q in p + 1..dim {
                rotate(&mut a, dim, p, q);
            }
        }
        off = off_norm(&a);
        sweeps += 1;
    }

    let mut values: Vec<f64> = (0..dim).map(|i| a[i * dim + i].re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

fn rotate(a: &mut [Complex64], dim: usize, p: usize, q: usize) {
    let apq = a[p * dim + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * dim + p].re;
    let aqq = a[q * dim + q].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
    let phase = (apq / mag).conj();
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase * s;
    let g_qq = phase * c;

    // A ← A·G
    for k in 0..dim {
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        a[k * dim + p] = akp * g_pp + akq * g_qp;
        a[k * dim + q] = akp * g_pq + akq * g_qq;
    }
    // A ← Gᴴ·A
    for k in 0..dim {
        let apk = a[p * dim + k];
        let aqk = a[q * dim + k];
        a[p * dim + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[q * dim + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[p * dim + q] = Complex64::new(0.0, 0.0);
    a[q * dim + p] = Complex64::new(0.0, 0.0);
    a[p * dim + p].im = 0.0;
    a[q * dim + q].im = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scaled_identity() {
        let s2 = 2.5;
        let dim = 5;
        let mut e = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            e[i * dim + i] = c(s2, 0.0);
        }
        let m = CovarianceMatrix::from_row_major(e, dim).unwrap();
        let spec = eigenvalues_hermitian(&m).unwrap();
        assert!(spec.values().iter().all(|&v| (v - s2).abs() < 1e-14));
    }

    #[test]
    fn rank_one() {
        let v = [c(1.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(0.5, 0.5)];
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm2 - 4.5).abs() < 1e-15);
        // Rescale so that ‖c‖² = 5.
        let k = (5.0 / norm2).sqrt();
        let v: Vec<_> = v.iter().map(|z| z * k).collect();
        let mut e = vec![c(0.0, 0.0); 16];
        for i in 0..4 {
            for j in 0..4 {
                e[i * 4 + j] = v[i] * v[j].conj();
            }
        }
        let m = CovarianceMatrix::from_row_major(e, 4).unwrap();
        let spec = eigenvalues_hermitian(&m).unwrap();
        let expected = [5.0, 0.0, 0.0, 0.0];
        for (got, want) in spec.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{:?}", spec.values());
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2, 1-i], [1+i, 3]] has eigenvalues (5 ± √(1 + 8)) / 2 = 4, 1.
        let e = vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)];
        let vals = jacobi_eigenvalues(&e, 2).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let vals = jacobi_eigenvalues(&[c(0.0, 0.0); 9], 3).unwrap();
        assert_eq!(vals, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_values_survive_raw_solver_but_clamp_in_spectrum() {
        let e = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)];
        assert_eq!(jacobi_eigenvalues(&e, 2).unwrap(), vec![1.0, -2.0]);
        assert_eq!(EigenSpectrum::new(vec![-2.0, 1.0]).unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let e = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(jacobi_eigenvalues(&e, 2).is_err());
    }
}
