//! Household preferences: CRRA consumption utility plus a piecewise-linear
//! gain-loss term over news, and the distribution-weighting functions the
//! pricing formulas are written in.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Preference parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceParams {
    /// Subjective discount factor, in (0, 1).
    pub beta: f64,
    /// Relative risk aversion, > 0. `theta = 1` means log utility.
    pub theta: f64,
    /// Weight on contemporaneous gain-loss utility, >= 0.
    pub b: f64,
    /// Loss aversion, >= 1.
    pub lambda: f64,
    /// Weight on prospective (future-news) gain-loss utility, >= 0.
    pub gamma: f64,
}

impl PreferenceParams {
    pub fn new(beta: f64, theta: f64, b: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Argument(format!("beta must be in (0,1), got {beta}")));
        }
        if !(theta > 0.0) {
            return Err(Error::Argument(format!("theta must be > 0, got {theta}")));
        }
        if !(b >= 0.0) {
            return Err(Error::Argument(format!("b must be >= 0, got {b}")));
        }
        if !(lambda >= 1.0) {
            return Err(Error::Argument(format!("lambda must be >= 1, got {lambda}")));
        }
        if !(gamma >= 0.0) {
            return Err(Error::Argument(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self { beta, theta, b, lambda, gamma })
    }

    /// Baseline parameter set used for the numerical tables.
    pub fn baseline() -> Self {
        Self { beta: 0.98, theta: 4.0, b: 1.0, lambda: 2.0, gamma: 0.1 }
    }

    /// Consumption utility `m(x) = x^(1-theta) / (1-theta)`, `log x` at
    /// `theta = 1`.
    pub fn m(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("m requires x > 0, got {x}")));
        }
        if (self.theta - 1.0).abs() < 1e-12 {
            Ok(x.ln())
        } else {
            Ok(x.powf(1.0 - self.theta) / (1.0 - self.theta))
        }
    }

    /// Gain-loss value `mu(x) = x` for gains, `lambda * x` for losses.
    pub fn mu(&self, x: f64) -> f64 {
        if x >= 0.0 {
            x
        } else {
            self.lambda * x
        }
    }

    /// Contemporaneous weighting `Lambda(F) = 1 + b F + b lambda (1 - F)` for
    /// a CDF level `F` in [0, 1].
    pub fn weight_contemp(&self, f: f64) -> Result<f64> {
        check_cdf_level(f)?;
        Ok(1.0 + self.b * f + self.b * self.lambda * (1.0 - f))
    }

    /// Prospective weighting `Gamma(F) = F + lambda (1 - F)`.
    pub fn weight_prosp(&self, f: f64) -> Result<f64> {
        check_cdf_level(f)?;
        Ok(f + self.lambda * (1.0 - f))
    }
}

fn check_cdf_level(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("CDF level must lie in [0,1], got {f}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn baseline() -> PreferenceParams {
        PreferenceParams::baseline()
    }

    #[test]
    fn validation() {
        assert!(PreferenceParams::new(0.98, 4.0, 1.0, 2.0, 0.1).is_ok());
        assert!(PreferenceParams::new(1.0, 4.0, 1.0, 2.0, 0.1).is_err());
        assert!(PreferenceParams::new(0.98, 0.0, 1.0, 2.0, 0.1).is_err());
        assert!(PreferenceParams::new(0.98, 4.0, -0.1, 2.0, 0.1).is_err());
        assert!(PreferenceParams::new(0.98, 4.0, 1.0, 0.9, 0.1).is_err());
        assert!(PreferenceParams::new(0.98, 4.0, 1.0, 2.0, -0.1).is_err());
    }

    #[test]
    fn m_power_and_log_branches() {
        let p = baseline();
        // theta = 4: m(x) = x^-3 / -3
        assert_abs_diff_eq!(p.m(1.0).unwrap(), -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.m(2.0).unwrap(), -1.0 / 24.0, epsilon = 1e-15);
        let logp = PreferenceParams { theta: 1.0, ..p };
        assert_abs_diff_eq!(logp.m(std::f64::consts::E).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(logp.m(1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert!(p.m(0.0).is_err());
        assert!(p.m(-1.0).is_err());
    }

    #[test]
    fn m_log_limit_is_continuous() {
        // power branch at theta -> 1 approaches ln x plus the 1/(theta-1) pole;
        // differences of m remove the pole, so compare increments
        let near = PreferenceParams { theta: 1.0 + 1e-7, ..baseline() };
        let exact = PreferenceParams { theta: 1.0, ..baseline() };
        let d_near = near.m(2.0).unwrap() - near.m(1.5).unwrap();
        let d_exact = exact.m(2.0).unwrap() - exact.m(1.5).unwrap();
        assert_abs_diff_eq!(d_near, d_exact, epsilon = 1e-6);
    }

    #[test]
    fn mu_kink() {
        let p = baseline();
        assert_eq!(p.mu(3.0), 3.0);
        assert_eq!(p.mu(-3.0), -6.0);
        assert_eq!(p.mu(0.0), 0.0);
    }

    #[test]
    fn weights_at_reference_points() {
        let p = baseline();
        // b = 1, lambda = 2: Lambda(0) = 3, Lambda(1) = 2, Lambda(1/2) = 5/2
        assert_abs_diff_eq!(p.weight_contemp(0.0).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.weight_contemp(1.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.weight_contemp(0.5).unwrap(), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.weight_prosp(0.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.weight_prosp(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(p.weight_contemp(-0.1).is_err());
        assert!(p.weight_prosp(1.1).is_err());
    }

    #[test]
    fn weights_collapse_without_gain_loss() {
        let p = PreferenceParams { b: 0.0, lambda: 1.0, ..baseline() };
        for &f in &[0.0, 0.3, 1.0] {
            assert_eq!(p.weight_contemp(f).unwrap(), 1.0);
            assert_eq!(p.weight_prosp(f).unwrap(), 1.0);
        }
    }

    proptest! {
        #[test]
        fn contemp_is_affine_in_prosp(
            b in 0.0..5.0_f64,
            lambda in 1.0..5.0_f64,
            f in 0.0..=1.0_f64,
        ) {
            let p = PreferenceParams { b, lambda, ..baseline() };
            let lam = p.weight_contemp(f).unwrap();
            let gam = p.weight_prosp(f).unwrap();
            prop_assert!((lam - (1.0 + b * gam)).abs() < 1e-12);
        }

        #[test]
        fn weights_decrease_in_f(
            b in 0.0..5.0_f64,
            lambda in 1.0..5.0_f64,
            f1 in 0.0..=1.0_f64,
            f2 in 0.0..=1.0_f64,
        ) {
            let p = PreferenceParams { b, lambda, ..baseline() };
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(p.weight_contemp(lo).unwrap() >= p.weight_contemp(hi).unwrap() - 1e-12);
            prop_assert!(p.weight_prosp(lo).unwrap() >= p.weight_prosp(hi).unwrap() - 1e-12);
        }

        #[test]
        fn mu_is_min_of_linear_pieces(x in -10.0..10.0_f64, lambda in 1.0..5.0_f64) {
            // Gains are weighted one-for-one and losses by lambda >= 1, so
            // the kinked utility equals the lower envelope of the two lines.
            let p = PreferenceParams { lambda, ..baseline() };
            prop_assert!((p.mu(x) - (x).min(lambda * x)).abs() <= 1e-12);
        }
    }
}
