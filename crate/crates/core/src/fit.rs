//! Small least-squares helpers shared by the growth, roughness and
//! contractibility fits.

use serde::{Deserialize, Serialize};

/// Ordinary least squares for `y = slope * x + intercept`; returns
/// `(slope, intercept, rms_residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// A fitted control `S(R) ≤ C · R^N`, with `C` tightened so the bound holds
/// at every measured point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub residual: f64,
}

impl PowerFit {
    /// Fit `log S` against `log R` over the points with `S > 0`, then raise
    /// the coefficient until `S(R) ≤ C R^N` holds on all data.
    pub fn fit(profile: &[(f64, f64)]) -> PowerFit {
        let positive: Vec<(f64, f64)> =
            profile.iter().copied().filter(|&(r, s)| r > 0.0 && s > 0.0).collect();
        if positive.is_empty() {
            return PowerFit { coefficient: 0.0, exponent: 0.0, residual: 0.0 };
        }
        let xs: Vec<f64> = positive.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = positive.iter().map(|p| p.1.ln()).collect();
        let (slope, intercept, residual) = if positive.len() == 1 {
            (1.0, ys[0] - xs[0], 0.0)
        } else {
            linear_fit(&xs, &ys)
        };
        let mut coefficient = intercept.exp();
        for &(r, s) in &positive {
            coefficient = coefficient.max(s / r.powf(slope));
        }
        PowerFit { coefficient, exponent: slope, residual }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.coefficient * r.powf(self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [3.0, 5.0, 7.0];
        let (s, i, r) = linear_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn power_fit_is_tightened() {
        let data: Vec<(f64, f64)> = (1..=10).map(|r| (r as f64, 2.0 * r as f64 + 1.0)).collect();
        let fit = PowerFit::fit(&data);
        for &(r, s) in &data {
            assert!(s <= fit.eval(r) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn identity_profile() {
        let data: Vec<(f64, f64)> = (1..=8).map(|r| (r as f64, r as f64)).collect();
        let fit = PowerFit::fit(&data);
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert!((fit.coefficient - 1.0).abs() < 1e-12);
    }
}
