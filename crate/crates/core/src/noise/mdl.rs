//! Minimum Description Length choice of the signal-subspace dimension.

use crate::error::{SenseError, SenseResult};

/// Floor applied to eigenvalues inside logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// MDL cost of declaring the `k` largest eigenvalues signal:
///
/// ```text
/// −(L−K)·N·log(φ(K)/θ(K)) + ½·K·(2L−K)·log N
/// ```
///
/// where `φ` and `θ` are the geometric and arithmetic means of the remaining
/// `L−K` eigenvalues. `values` must be sorted descending and `k < L`.
pub fn mdl_criterion(values: &[f64], n: usize, k: usize) -> f64 {
    let l = values.len();
    let tail = &values[k..];
    let m = (l - k) as f64;
    let mean_log = tail.iter().map(|v| v.max(LOG_FLOOR).ln()).sum::<f64>() / m;
    let arith = (tail.iter().sum::<f64>() / m).max(LOG_FLOOR);
    let log_ratio = mean_log - arith.ln();
    let n = n as f64;
    let k = k as f64;
    let l = l as f64;
    -(l - k) * n * log_ratio + 0.5 * k * (2.0 * l - k) * n.ln()
}

/// `K̂ = argmin_K mdl_criterion` over `0 ≤ K ≤ L−1`; ties go to the
/// smaller `K`.
pub fn mdl_signal_count(values: &[f64], n: usize) -> SenseResult<usize> {
    if values.len() < 2 {
        return Err(SenseError::invalid(
            "spectrum",
            values.len(),
            "needs at least 2 eigenvalues",
        ));
    }
    if n == 0 {
        return Err(SenseError::invalid("n", 0, "must be >= 1"));
    }
    let mut best = (f64::INFINITY, 0);
    for k in 0..values.len() {
        let cost = mdl_criterion(values, n, k);
        if cost < best.0 {
            best = (cost, k);
        }
    }
    Ok(best.1)
}
