//! Marcenko-Pastur law for noise-only sample covariance eigenvalues.

use std::f64::consts::PI;

use crate::error::{SenseError, SenseResult};

/// Absolute error target of [`mp_cdf`].
pub const CDF_TOLERANCE: f64 = 1e-8;

fn check(p: f64, sigma2: f64) -> SenseResult<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SenseError::invalid("p", p, "ratio must be in (0, 1)"));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(SenseError::invalid("sigma2", sigma2, "must be finite and > 0"));
    }
    Ok(())
}

/// Support `[σ²(1−√p)², σ²(1+√p)²]`.
pub fn mp_support(p: f64, sigma2: f64) -> (f64, f64) {
    let r = p.sqrt();
    (sigma2 * (1.0 - r).powi(2), sigma2 * (1.0 + r).powi(2))
}

/// Density `√((z−a)(b−z)) / (2π·σ²·z·p)` on the support, zero elsewhere.
pub fn mp_density(z: f64, p: f64, sigma2: f64) -> SenseResult<f64> {
    check(p, sigma2)?;
    let (a, b) = mp_support(p, sigma2);
    if z <= a || z >= b {
        return Ok(0.0);
    }
    Ok(((z - a) * (b - z)).sqrt() / (2.0 * PI * sigma2 * z * p))
}

/// Distribution function of the Marcenko-Pastur law.
pub fn mp_cdf(z: f64, p: f64, sigma2: f64) -> SenseResult<f64> {
    check(p, sigma2)?;
    Ok(Law::new(p, sigma2).cdf(z, CDF_TOLERANCE))
}

/// [`mp_cdf`] at each of `points`, which must be sorted ascending.
///
/// Integrates once along the support, so the cost is that of a single CDF
/// evaluation rather than one per point.
pub fn mp_cdf_sorted(points: &[f64], p: f64, sigma2: f64) -> SenseResult<Vec<f64>> {
    check(p, sigma2)?;
    let law = Law::new(p, sigma2);
    let tol = CDF_TOLERANCE / points.len().max(1) as f64;
    let mut out = Vec::with_capacity(points.len());
    let mut theta = 0.0;
    let mut acc = 0.0;
    for &z in points {
        let next = law.angle(z);
        if next > theta {
            acc += law.integrate(theta, next, tol);
            theta = next;
        }
        out.push(if z <= law.a {
            0.0
        } else if z >= law.b {
            1.0
        } else {
            acc.min(1.0)
        });
    }
    Ok(out)
}

/// Integration happens in the angle `θ` with `z = c − r·cos θ`, where `c`
/// and `r` are the centre and half-width of the support. The substitution
/// absorbs the square-root edges: `dF = r²·sin²θ / (2π·σ²·p·z(θ)) dθ` is
/// smooth on `[0, π]`.
struct Law {
    a: f64,
    b: f64,
    centre: f64,
    radius: f64,
    norm: f64,
}

impl Law {
    fn new(p: f64, sigma2: f64) -> Self {
        let (a, b) = mp_support(p, sigma2);
        Self {
            a,
            b,
            centre: 0.5 * (a + b),
            radius: 0.5 * (b - a),
            norm: 1.0 / (2.0 * PI * sigma2 * p),
        }
    }

    fn angle(&self, z: f64) -> f64 {
        if z <= self.a {
            0.0
        } else if z >= self.b {
            PI
        } else {
            ((self.centre - z) / self.radius).clamp(-1.0, 1.0).acos()
        }
    }

    fn integrand(&self, theta: f64) -> f64 {
        let s = theta.sin();
        let z = self.centre - self.radius * theta.cos();
        self.norm * self.radius * self.radius * s * s / z
    }

    fn cdf(&self, z: f64, tol: f64) -> f64 {
        if z <= self.a {
            return 0.0;
        }
        if z >= self.b {
            return 1.0;
        }
        self.integrate(0.0, self.angle(z), tol).clamp(0.0, 1.0)
    }

    fn integrate(&self, lo: f64, hi: f64, tol: f64) -> f64 {
        let f = |t: f64| self.integrand(t);
        adaptive_simpson(&f, lo, hi, tol, 48)
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule directly in `z`, no substitution.
    fn cdf_by_midpoint(z: f64, p: f64, s2: f64) -> f64 {
        let (a, b) = mp_support(p, s2);
        let hi = z.min(b);
        if hi <= a {
            return 0.0;
        }
        let steps = 400_000;
        let h = (hi - a) / steps as f64;
        (0..steps)
            .map(|i| mp_density(a + (i as f64 + 0.5) * h, p, s2).unwrap())
            .sum::<f64>()
            * h
    }

    #[test]
    fn support_edges() {
        for (p, s2) in [(0.25, 1.0), (0.1, 2.0)] {
            let (a, b) = mp_support(p, s2);
            assert_eq!(mp_cdf(a, p, s2).unwrap(), 0.0);
            assert_eq!(mp_cdf(b, p, s2).unwrap(), 1.0);
            assert_eq!(mp_cdf(a - 1.0, p, s2).unwrap(), 0.0);
            assert_eq!(mp_cdf(b + 1.0, p, s2).unwrap(), 1.0);
        }
    }

    #[test]
    fn total_mass_just_inside_upper_edge() {
        for p in [0.1, 0.25, 0.5] {
            for s2 in [0.5, 1.0, 2.0] {
                let (_, b) = mp_support(p, s2);
                let z = b * (1.0 - 1e-12);
                assert!((mp_cdf(z, p, s2).unwrap() - 1.0).abs() < 1e-6);
                assert!((cdf_by_midpoint(b, p, s2) - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn matches_midpoint_oracle_inside_support() {
        let (p, s2) = (0.25, 1.3);
        let (a, b) = mp_support(p, s2);
        for i in 1..10 {
            let z = a + (b - a) * i as f64 / 10.0;
            let got = mp_cdf(z, p, s2).unwrap();
            let want = cdf_by_midpoint(z, p, s2);
            assert!((got - want).abs() < 1e-6, "z={z} {got} {want}");
        }
    }

    #[test]
    fn scaling_identity() {
        let (p, s2) = (0.2, 0.8);
        for z in [0.4, 0.7, 1.0, 1.3] {
            for c in [0.1, 3.0, 17.0] {
                let lhs = mp_cdf(c * z, p, c * s2).unwrap();
                let rhs = mp_cdf(z, p, s2).unwrap();
                assert!((lhs - rhs).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sorted_matches_pointwise() {
        let (p, s2) = (1.0 / 16.0, 1.1);
        let pts = [0.2, 0.7, 0.9, 1.0, 1.0, 1.2, 1.5, 3.0];
        let batch = mp_cdf_sorted(&pts, p, s2).unwrap();
        for (z, got) in pts.iter().zip(batch) {
            assert!((got - mp_cdf(*z, p, s2).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn density_integrates_in_theta_without_edge_trouble() {
        let law = Law::new(0.5, 1.0);
        assert!((law.integrate(0.0, PI, 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(mp_cdf(1.0, 0.0, 1.0).is_err());
        assert!(mp_cdf(1.0, 1.0, 1.0).is_err());
        assert!(mp_cdf(1.0, 0.5, 0.0).is_err());
        assert!(mp_density(1.0, 1.5, 1.0).is_err());
    }
}
