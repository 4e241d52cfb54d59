//! Simulated panels of states and equilibrium prices: unconditional moment
//! tables, parameter sweeps, and conditional series for plotting.
//!
//! Paths are embarrassingly parallel. Each path draws from its own RNG stream
//! derived from `(seed, path index)`, and aggregation reduces per-path sums in
//! fixed path order, so results are bit-identical regardless of how the work
//! is scheduled across threads.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::model1::{HSolution, Model1};
use crate::model2::Model2;
use crate::preferences::PreferenceParams;
use crate::processes::{
    path_rng, stationary_log_y, step_log_y, MarketState, ProcessParams,
};
use crate::{Error, Result};

/// Which pricing model a simulation reads prices from.
pub enum ModelRef<'a> {
    /// General model with a solved grid function.
    One(&'a Model1, &'a HSolution),
    /// Closed-form special case.
    Two(&'a Model2),
}

impl ModelRef<'_> {
    fn rf_pd(&self, state: &MarketState) -> Result<(f64, f64)> {
        match self {
            ModelRef::One(m, sol) => {
                Ok((m.risk_free(sol, state)?, m.pd_ratio(sol, state)?))
            }
            ModelRef::Two(m) => Ok((m.risk_free(state.eps_c)?, m.pd_ratio(state)?)),
        }
    }

    fn params(&self) -> &ProcessParams {
        match self {
            ModelRef::One(m, _) => &m.params,
            ModelRef::Two(m) => &m.params,
        }
    }

    /// Full conditional price bundle at a state.
    pub fn price(&self, state: &MarketState) -> Result<crate::model2::EquilibriumPrices> {
        match self {
            ModelRef::One(m, sol) => m.price(sol, state),
            ModelRef::Two(m) => m.price(state),
        }
    }
}

/// Simulation panel design.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Pair each odd path with the sign-flipped shocks of the preceding even
    /// path (variance reduction; off by default).
    pub antithetic: bool,
    /// Hold `log Y` constant at this value instead of simulating the AR(1).
    /// Useful for parameterizations whose growth condition only holds near
    /// the center of the stationary law; dividend growth then equals
    /// consumption growth.
    pub freeze_log_y: Option<f64>,
    /// Evaluate prices at this fixed `log Y` while the ratio still follows
    /// the AR(1) for dividend growth. Matches table designs where valuation
    /// ratios are quoted at the long-run ratio but returns keep the full
    /// dividend dynamics.
    pub freeze_price_log_y: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 200,
            horizon: 600,
            burn_in: 100,
            seed: 0,
            antithetic: false,
            freeze_log_y: None,
            freeze_price_log_y: None,
        }
    }
}

/// Unconditional moments of simulated returns and valuation ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub rf_mean: f64,
    pub rf_sd: f64,
    pub pd_mean: f64,
    pub pd_sd: f64,
    pub erp_mean: f64,
    pub erp_sd: f64,
    pub n_paths: usize,
    pub horizon: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Per-path accumulator: sums and sums of squares for (rf, pd, erp).
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: u64,
    s: [f64; 3],
    s2: [f64; 3],
}

impl Sums {
    fn add(&mut self, v: [f64; 3]) {
        self.n += 1;
        for k in 0..3 {
            self.s[k] += v[k];
            self.s2[k] += v[k] * v[k];
        }
    }

    fn merge(mut self, o: Sums) -> Sums {
        self.n += o.n;
        for k in 0..3 {
            self.s[k] += o.s[k];
            self.s2[k] += o.s2[k];
        }
        self
    }
}

fn validate(cfg: &SimConfig) -> Result<()> {
    if cfg.horizon <= cfg.burn_in + 1 {
        return Err(Error::Argument(format!(
            "horizon {} must exceed burn-in {} by at least 2",
            cfg.horizon, cfg.burn_in
        )));
    }
    if cfg.n_paths == 0 {
        return Err(Error::Argument("need at least one path".into()));
    }
    let retained = cfg.n_paths * (cfg.horizon - cfg.burn_in);
    if retained < 10_000 {
        return Err(Error::Argument(format!(
            "panel retains only {retained} path-dates; at least 10000 required for reported tables"
        )));
    }
    if cfg.freeze_log_y.is_some() && cfg.freeze_price_log_y.is_some() {
        return Err(Error::Argument(
            "freeze_log_y and freeze_price_log_y are mutually exclusive".into(),
        ));
    }
    Ok(())
}

/// One path's shock sequence: `(z_eps, z_y)` per period plus the initial
/// stationary draw for `log Y`.
fn path_shocks(params: &ProcessParams, cfg: &SimConfig, path: usize) -> Result<(f64, Vec<(f64, f64)>)> {
    // antithetic pairs share a stream and flip signs on the odd member
    let (stream, sign) = if cfg.antithetic { ((path / 2) as u64, if path % 2 == 0 { 1.0 } else { -1.0 }) } else { (path as u64, 1.0) };
    let mut rng = path_rng(cfg.seed, stream);
    let stat = stationary_log_y(params)?;
    let z0: f64 = rng.sample(StandardNormal);
    let log_y0 = match cfg.freeze_log_y {
        Some(ly) => ly,
        None => stat.mean + stat.variance.sqrt() * sign * z0,
    };
    let shocks = (0..cfg.horizon)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (sign * a, sign * b)
        })
        .collect();
    Ok((log_y0, shocks))
}

fn simulate_path(model: &ModelRef, cfg: &SimConfig, path: usize) -> Result<Sums> {
    let params = model.params();
    let (log_y0, shocks) = path_shocks(params, cfg, path)?;
    let mut sums = Sums::default();
    let mut log_y = log_y0;
    // prices at the current date; realized return needs this date and the next
    let mut prev: Option<(f64, f64, f64, f64)> = None; // (rf, pd, eps_c, log_y)
    for (t, &(z_eps, z_y)) in shocks.iter().enumerate() {
        let eps_c = (params.mu_c + params.sigma_c * z_eps).exp();
        let log_y_next = match cfg.freeze_log_y {
            Some(ly) => ly,
            None => step_log_y(params, log_y, z_y),
        };
        let price_log_y = cfg.freeze_price_log_y.unwrap_or(log_y);
        let state = MarketState::clamped(eps_c, price_log_y.exp())?;
        let (rf, pd) = model.rf_pd(&state)?;
        if let Some((rf_prev, pd_prev, _, log_y_prev)) = prev {
            if t > cfg.burn_in {
                // realized gross stock return from consecutive pd ratios and
                // the realized dividend growth factor
                let eps_d = eps_c * (log_y_prev - log_y).exp();
                let rs = eps_d * (pd + 1.0) / pd_prev;
                sums.add([rf_prev, pd_prev, rs - rf_prev]);
            }
        }
        prev = Some((rf, pd, eps_c, log_y));
        log_y = log_y_next;
    }
    Ok(sums)
}

/// Unconditional means and standard deviations of `R_f`, the price-dividend
/// ratio, and the realized equity premium over a simulated panel.
pub fn simulate_moments(model: &ModelRef, cfg: &SimConfig) -> Result<MomentReport> {
    validate(cfg)?;
    let per_path: Vec<Result<Sums>> =
        (0..cfg.n_paths).into_par_iter().map(|p| simulate_path(model, cfg, p)).collect();
    let mut total = Sums::default();
    for s in per_path {
        total = total.merge(s?);
    }
    let n = total.n as f64;
    let stat = |k: usize| {
        let mean = total.s[k] / n;
        let var = (total.s2[k] / n - mean * mean).max(0.0);
        (mean, var.sqrt())
    };
    let (rf_mean, rf_sd) = stat(0);
    let (pd_mean, pd_sd) = stat(1);
    let (erp_mean, erp_sd) = stat(2);
    Ok(MomentReport {
        rf_mean,
        rf_sd,
        pd_mean,
        pd_sd,
        erp_mean,
        erp_sd,
        n_paths: cfg.n_paths,
        horizon: cfg.horizon,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
    })
}

/// Preference parameter swept by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    B,
    Gamma,
    Theta,
    Beta,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(Self::Lambda),
            "b" => Ok(Self::B),
            "gamma" => Ok(Self::Gamma),
            "theta" => Ok(Self::Theta),
            "beta" => Ok(Self::Beta),
            other => Err(Error::Argument(format!(
                "unknown sweep parameter '{other}' (expected lambda, b, gamma, theta, or beta)"
            ))),
        }
    }
}

impl SweepAxis {
    pub fn apply(self, base: &PreferenceParams, v: f64) -> Result<PreferenceParams> {
        let p = match self {
            Self::Lambda => PreferenceParams { lambda: v, ..base.clone() },
            Self::B => PreferenceParams { b: v, ..base.clone() },
            Self::Gamma => PreferenceParams { gamma: v, ..base.clone() },
            Self::Theta => PreferenceParams { theta: v, ..base.clone() },
            Self::Beta => PreferenceParams { beta: v, ..base.clone() },
        };
        // revalidate the combination
        PreferenceParams::new(p.beta, p.theta, p.b, p.lambda, p.gamma)
    }
}

/// Which model a sweep builds per parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    One,
    Two,
}

/// One [`simulate_moments`] run per parameter value, sharing the seed so
/// columns are variance-matched. Model 1 re-solves its grid per value.
pub fn sweep(
    prefs_base: &PreferenceParams,
    params: &ProcessParams,
    model: ModelChoice,
    axis: SweepAxis,
    values: &[f64],
    quad_order: usize,
    grid: (usize, usize),
    cfg: &SimConfig,
) -> Result<Vec<(f64, MomentReport)>> {
    if values.is_empty() {
        return Err(Error::Argument("sweep needs at least one value".into()));
    }
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let prefs = axis.apply(prefs_base, v)?;
        let report = match model {
            ModelChoice::Two => {
                let m = Model2::new(prefs, *params, quad_order)?;
                simulate_moments(&ModelRef::Two(&m), cfg)?
            }
            ModelChoice::One => {
                let m = Model1::new(prefs, *params, quad_order)?;
                let sol = m.solve_h(grid.0, grid.1, crate::numerics::FIXED_POINT_TOL, 10_000)?;
                simulate_moments(&ModelRef::One(&m, &sol), cfg)?
            }
        };
        out.push((v, report));
    }
    Ok(out)
}

/// State variable swept by [`conditional_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateAxis {
    /// Sweep the consumption growth rate at a fixed consumption-dividend ratio.
    EpsC,
    /// Sweep the consumption-dividend ratio at a fixed growth rate.
    Y,
}

/// One plotted point of a conditional price series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub x: f64,
    pub rf: f64,
    pub pd: f64,
    pub erp: f64,
}

/// Conditional prices along a sweep of one state variable with the other held
/// fixed; rows are `(x, r_f, pd, erp)` ready for plotting. No smoothing.
pub fn conditional_series(
    model: &ModelRef,
    axis: StateAxis,
    values: &[f64],
    fixed: f64,
) -> Result<Vec<SeriesRow>> {
    if values.is_empty() {
        return Err(Error::Argument("series needs at least one point".into()));
    }
    values
        .iter()
        .map(|&x| {
            let state = match axis {
                StateAxis::EpsC => MarketState::new(x, fixed)?,
                StateAxis::Y => MarketState::new(fixed, x)?,
            };
            let p = model.price(&state)?;
            Ok(SeriesRow { x, rf: p.r_f, pd: p.pd, erp: p.erp })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_cfg() -> SimConfig {
        SimConfig { n_paths: 40, horizon: 400, burn_in: 100, seed: 7, ..SimConfig::default() }
    }

    fn model2_baseline() -> Model2 {
        Model2::new(PreferenceParams::baseline(), ProcessParams::calibrated(), 21).unwrap()
    }

    #[test]
    fn seed_determinism_bit_identical() {
        let m = model2_baseline();
        let cfg = small_cfg();
        let a = simulate_moments(&ModelRef::Two(&m), &cfg).unwrap();
        let b = simulate_moments(&ModelRef::Two(&m), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let m = model2_baseline();
        let a = simulate_moments(&ModelRef::Two(&m), &small_cfg()).unwrap();
        let b =
            simulate_moments(&ModelRef::Two(&m), &SimConfig { seed: 8, ..small_cfg() }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn default_panel_matches_reference_moments() {
        let m = model2_baseline();
        let cfg = SimConfig::default();
        let r = simulate_moments(&ModelRef::Two(&m), &cfg).unwrap();
        assert_relative_eq!(r.rf_mean, 1.229, max_relative = 0.02);
        assert_relative_eq!(r.pd_mean, 5.375, max_relative = 0.02);
        assert_relative_eq!(r.erp_mean, 0.058, max_relative = 0.02);
        assert_relative_eq!(r.erp_sd, 0.223, max_relative = 0.10);
    }

    #[test]
    fn constant_weight_gives_constant_risk_free_rate() {
        let prefs = PreferenceParams { lambda: 1.0, ..PreferenceParams::baseline() };
        let m = Model2::new(prefs, ProcessParams::calibrated(), 21).unwrap();
        let r = simulate_moments(&ModelRef::Two(&m), &small_cfg()).unwrap();
        assert_relative_eq!(r.rf_mean, 1.258, max_relative = 1e-3);
        assert!(r.rf_sd < 1e-10, "rf_sd = {}", r.rf_sd);
    }

    #[test]
    fn panel_size_enforced() {
        let m = model2_baseline();
        let cfg = SimConfig { n_paths: 5, horizon: 120, burn_in: 100, seed: 1, ..SimConfig::default() };
        assert!(matches!(
            simulate_moments(&ModelRef::Two(&m), &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn erp_mean_increases_with_loss_aversion() {
        let swept = sweep(
            &PreferenceParams::baseline(),
            &ProcessParams::calibrated(),
            ModelChoice::Two,
            SweepAxis::Lambda,
            &[1.0, 2.0, 3.0],
            21,
            (41, 41),
            &small_cfg(),
        )
        .unwrap();
        assert!(swept[0].1.erp_mean < swept[1].1.erp_mean);
        assert!(swept[1].1.erp_mean < swept[2].1.erp_mean);
    }

    #[test]
    fn antithetic_shrinks_rf_dispersion_or_close() {
        let m = model2_baseline();
        let plain = simulate_moments(&ModelRef::Two(&m), &small_cfg()).unwrap();
        let anti = simulate_moments(
            &ModelRef::Two(&m),
            &SimConfig { antithetic: true, ..small_cfg() },
        )
        .unwrap();
        // both estimates agree on the mean within a few s.e.
        let se = plain.rf_sd / ((plain.n_paths * (plain.horizon - plain.burn_in)) as f64).sqrt();
        assert!((plain.rf_mean - anti.rf_mean).abs() < 10.0 * se);
    }

    #[test]
    fn series_single_point_equals_price_op() {
        let m = model2_baseline();
        let mr = ModelRef::Two(&m);
        let rows = conditional_series(&mr, StateAxis::EpsC, &[1.05], 21.07).unwrap();
        let p = m.price(&MarketState::new(1.05, 21.07).unwrap()).unwrap();
        assert_eq!(rows[0].rf, p.r_f);
        assert_eq!(rows[0].pd, p.pd);
        assert_eq!(rows[0].erp, p.erp);
    }

    #[test]
    fn bad_sweep_axis_rejected() {
        assert!("volatility".parse::<SweepAxis>().is_err());
        assert!("lambda".parse::<SweepAxis>().is_ok());
    }

    #[test]
    fn standard_error_scaling_with_paths() {
        // across-path dispersion of rf_mean shrinks roughly as 1/sqrt(paths)
        let m = model2_baseline();
        let spread = |n_paths: usize, seeds: std::ops::Range<u64>| {
            let means: Vec<f64> = seeds
                .map(|s| {
                    let cfg = SimConfig { n_paths, horizon: 400, burn_in: 100, seed: s, ..SimConfig::default() };
                    simulate_moments(&ModelRef::Two(&m), &cfg).unwrap().rf_mean
                })
                .collect();
            let mu = means.iter().sum::<f64>() / means.len() as f64;
            (means.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / means.len() as f64).sqrt()
        };
        let s40 = spread(40, 0..12);
        let s160 = spread(160, 100..112);
        let ratio = s160 / s40; // expect ~0.5
        assert!(ratio < 0.8, "dispersion ratio {ratio}");
    }
}
