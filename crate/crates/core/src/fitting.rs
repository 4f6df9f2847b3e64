//! Log-log least-squares fits of growth and decay exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Slope of `log y` against `log x`. For decay fits, the decay rate `p`
    /// in `y ~ x^{-p}`.
    pub exponent: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    /// RMS deviation of the fit in log space.
    pub residual: f64,
    pub n_points: usize,
}

/// Fits `log y = α log x + c` over the points with `x` inside `window`
/// (inclusive; `None` uses all points).
pub fn fit_power_law(xs: &[f64], ys: &[f64], window: Option<[f64; 2]>) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("abscissae must be strictly increasing".into()));
    }
    let [lo, hi] = window.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    let mut pts = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x < lo || x > hi {
            continue;
        }
        if !(x > 0.0) || !(y > 0.0) || !y.is_finite() {
            return Err(Error::Fit(format!("nonpositive or non-finite point ({x}, {y})")));
        }
        pts.push((x.ln(), y.ln()));
    }
    if pts.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points in the window, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let used_lo = pts.first().map(|p| p.0.exp()).unwrap_or(lo);
    let used_hi = pts.last().map(|p| p.0.exp()).unwrap_or(hi);
    Ok(FitReport {
        exponent: slope,
        intercept,
        window: [used_lo, used_hi],
        residual: (rss / n).sqrt(),
        n_points: pts.len(),
    })
}

/// Effective decay rate of `E^{1/2}` after removing the factor
/// `(log t)^{k/2+1}`: fits `E^{1/2} (log t)^{-(k/2+1)} ~ t^{-p}` and reports
/// `p` as the exponent.
pub fn fit_decay_with_log(ts: &[f64], es: &[f64], k: u32, window: Option<[f64; 2]>) -> Result<FitReport> {
    if ts.len() != es.len() {
        return Err(Error::SizeMismatch { expected: ts.len(), got: es.len() });
    }
    if ts.iter().any(|&t| t < 2.0) {
        return Err(Error::Fit("decay fits need t ≥ 2".into()));
    }
    let power = k as f64 / 2.0 + 1.0;
    let ys: Vec<f64> = ts.iter().zip(es).map(|(&t, &e)| e.sqrt() / t.ln().powf(power)).collect();
    let mut fit = fit_power_law(ts, &ys, window)?;
    fit.exponent = -fit.exponent;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Vec<f64> {
        (0..20).map(|i| 2.0 * 1.2f64.powi(i)).collect()
    }

    #[test]
    fn exact_quadratic() {
        let xs = grid();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x * x).collect();
        let f = fit_power_law(&xs, &ys, None).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        assert_eq!(f.n_points, 20);
    }

    #[test]
    fn constant_has_zero_exponent() {
        let xs = grid();
        let f = fit_power_law(&xs, &vec![3.0; xs.len()], None).unwrap();
        assert!(f.exponent.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        let xs = grid();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(1.5) * (1.0 + 0.01 * rng.random_range(-1.0..1.0))).collect();
        let f = fit_power_law(&xs, &ys, None).unwrap();
        assert!((1.45..=1.55).contains(&f.exponent), "{}", f.exponent);
    }

    #[test]
    fn window_restricts_points() {
        let xs = grid();
        let ys: Vec<f64> = xs.iter().map(|x| if *x < 10.0 { 1.0 } else { x * x }).collect();
        let f = fit_power_law(&xs, &ys, Some([10.0, 1e9])).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!(f.window[0] >= 10.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0], None).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0], None).is_err());
        assert!(fit_power_law(&[1.0, 3.0, 2.0], &[1.0, 1.0, 1.0], None).is_err());
        assert!(fit_decay_with_log(&[1.0, 3.0, 4.0], &[1.0; 3], 1, None).is_err());
    }

    #[test]
    fn saturated_log_bound() {
        let ts = grid();
        let es: Vec<f64> = ts.iter().map(|t| (t.ln().powi(2) / t).powi(2)).collect();
        let f = fit_decay_with_log(&ts, &es, 2, None).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-10);
    }

    #[test]
    fn log_removal_only_speeds_decay() {
        let ts = grid();
        let es: Vec<f64> = ts.iter().map(|t| t.powf(-1.6)).collect();
        let f = fit_decay_with_log(&ts, &es, 2, None).unwrap();
        assert!(f.exponent >= 0.8);
    }

    #[test]
    fn constant_energy_leaves_only_log_factor() {
        // y = (log t)^{-(k/2+1)}; its log-log slope is -(k/2+1)/log t, so the
        // fitted rate is positive but bounded by (k/2+1)/log t_min
        let ts = grid();
        let f = fit_decay_with_log(&ts, &vec![1.0; ts.len()], 2, None).unwrap();
        assert!(f.exponent > 0.0 && f.exponent <= 2.0 / 2f64.ln(), "{}", f.exponent);
    }

    proptest! {
        #[test]
        fn scale_invariance(c in 1e-3f64..1e3, alpha in -3.0f64..3.0) {
            let xs = grid();
            let ys: Vec<f64> = xs.iter().map(|x| x.powf(alpha) * (1.0 + 0.1 * x.sin())).collect();
            let scaled: Vec<f64> = ys.iter().map(|y| c * y).collect();
            let a = fit_power_law(&xs, &ys, None).unwrap();
            let b = fit_power_law(&xs, &scaled, None).unwrap();
            prop_assert!((a.exponent - b.exponent).abs() < 1e-10);
            prop_assert!((b.intercept - a.intercept - c.ln()).abs() < 1e-9);
        }

        #[test]
        fn doubling_abscissae_shifts_intercept(alpha in -3.0f64..3.0) {
            let xs = grid();
            let ys: Vec<f64> = xs.iter().map(|x| x.powf(alpha)).collect();
            let xs2: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
            let a = fit_power_law(&xs, &ys, None).unwrap();
            let b = fit_power_law(&xs2, &ys, None).unwrap();
            prop_assert!((a.exponent - b.exponent).abs() < 1e-10);
        }
    }
}
