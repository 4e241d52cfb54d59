//! Exogenous state dynamics: i.i.d. lognormal consumption growth, a lognormal
//! AR(1) consumption-dividend ratio, the dividend-growth identity that links
//! them, path simulation and maximum-likelihood calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Parameters of the two exogenous state processes.
///
/// `log(eps_c)` is i.i.d. `N(mu_c, sigma_c^2)`; `log(Y)` follows the AR(1)
/// recursion `log(Y') = (1 - phi) * kappa + phi * log(Y) + sigma_y * shock`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    /// Mean of log consumption growth, per period.
    pub mu_c: f64,
    /// Standard deviation of log consumption growth.
    pub sigma_c: f64,
    /// AR(1) persistence of `log(Y)`.
    pub phi: f64,
    /// Long-run mean of `log(Y)`.
    pub kappa: f64,
    /// AR(1) innovation standard deviation.
    pub sigma_y: f64,
}

impl ProcessParams {
    pub fn new(mu_c: f64, sigma_c: f64, phi: f64, kappa: f64, sigma_y: f64) -> Result<Self> {
        if !(sigma_c > 0.0) {
            return Err(Error::Argument(format!("sigma_c must be > 0, got {sigma_c}")));
        }
        if !(sigma_y > 0.0) {
            return Err(Error::Argument(format!("sigma_y must be > 0, got {sigma_y}")));
        }
        if phi.abs() >= 1.0 {
            return Err(Error::Stationarity(phi.abs()));
        }
        Ok(Self { mu_c, sigma_c, phi, kappa, sigma_y })
    }

    /// The annual-data calibration used throughout the numerical section.
    pub fn calibrated() -> Self {
        Self { mu_c: 0.058, sigma_c: 0.053, phi: 0.961, kappa: 2.816, sigma_y: 0.099 }
    }
}

/// One observation of the state pair `(eps_c, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub eps_c: f64,
    pub y: f64,
}

impl MarketState {
    /// Strict constructor: rejects `Y < 1` (the fixed-point argument for the
    /// general model needs `Y >= 1`).
    pub fn new(eps_c: f64, y: f64) -> Result<Self> {
        if !(eps_c > 0.0) {
            return Err(Error::Domain(format!("eps_c must be > 0, got {eps_c}")));
        }
        if !(y >= 1.0) {
            return Err(Error::Domain(format!("consumption-dividend ratio must be >= 1, got {y}")));
        }
        Ok(Self { eps_c, y })
    }

    /// Lenient constructor: clamps `Y` up to 1 instead of rejecting.
    pub fn clamped(eps_c: f64, y: f64) -> Result<Self> {
        if !(eps_c > 0.0) {
            return Err(Error::Domain(format!("eps_c must be > 0, got {eps_c}")));
        }
        Ok(Self { eps_c, y: y.max(1.0) })
    }

    pub fn log_y(&self) -> f64 {
        self.y.ln()
    }
}

/// A simulated joint path of the two state processes.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub eps_c_series: Vec<f64>,
    pub log_y_series: Vec<f64>,
    pub seed: u64,
}

/// `E[eps_c^a] = exp(a mu_c + a^2 sigma_c^2 / 2)`.
pub fn lognormal_moment(params: &ProcessParams, a: f64) -> f64 {
    (a * params.mu_c + a * a * params.sigma_c * params.sigma_c / 2.0).exp()
}

/// Standard normal CDF, accurate to ~1e-15.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// CDF of the consumption growth rate, `F(x) = Phi((log x - mu_c) / sigma_c)`.
pub fn cdf_eps(params: &ProcessParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("cdf_eps requires x > 0, got {x}")));
    }
    Ok(std_normal_cdf((x.ln() - params.mu_c) / params.sigma_c))
}

/// One AR(1) step for `log(Y)` given a standard-normal shock.
pub fn step_log_y(params: &ProcessParams, log_y: f64, shock: f64) -> f64 {
    (1.0 - params.phi) * params.kappa + params.phi * log_y + params.sigma_y * shock
}

/// Dividend growth identity `eps_d = eps_c * Y_t / Y_{t+1}`.
pub fn dividend_growth(eps_c: f64, y_now: f64, y_next: f64) -> Result<f64> {
    if !(eps_c > 0.0 && y_now > 0.0 && y_next > 0.0) {
        return Err(Error::Domain(format!(
            "dividend_growth requires positive inputs, got ({eps_c}, {y_now}, {y_next})"
        )));
    }
    Ok(eps_c * y_now / y_next)
}

/// Stationary law of `log(Y)` and the implied lognormal moments of `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryLogY {
    /// Mean of `log(Y)` (equals `kappa`).
    pub mean: f64,
    /// Variance of `log(Y)`: `sigma_y^2 / (1 - phi^2)`.
    pub variance: f64,
    /// `E[Y] = exp(mean + variance / 2)`.
    pub y_mean: f64,
    /// Standard deviation of `Y`.
    pub y_sd: f64,
}

pub fn stationary_log_y(params: &ProcessParams) -> Result<StationaryLogY> {
    if params.phi.abs() >= 1.0 {
        return Err(Error::Stationarity(params.phi.abs()));
    }
    let variance = params.sigma_y * params.sigma_y / (1.0 - params.phi * params.phi);
    let y_mean = (params.kappa + variance / 2.0).exp();
    let y_sd = y_mean * (variance.exp() - 1.0).sqrt();
    Ok(StationaryLogY { mean: params.kappa, variance, y_mean, y_sd })
}

/// Conditional and unconditional laws of `log(Y_{t+1} / Y_t)`.
///
/// Returns `(cond_mean, cond_var, uncond_var)` where the conditional law given
/// the previous log-ratio is `N(phi * ratio_prev, 2 sigma_y^2)` and the
/// unconditional law is `N(0, 2 (1 - phi) sigma_y^2 / (1 - phi^2))`.
pub fn log_y_ratio_dists(params: &ProcessParams, log_y_ratio_prev: f64) -> Result<(f64, f64, f64)> {
    if params.phi.abs() >= 1.0 {
        return Err(Error::Stationarity(params.phi.abs()));
    }
    let s2 = params.sigma_y * params.sigma_y;
    Ok((
        params.phi * log_y_ratio_prev,
        2.0 * s2,
        2.0 * (1.0 - params.phi) * s2 / (1.0 - params.phi * params.phi),
    ))
}

/// RNG for path `path_index` of a panel seeded with `seed`.
///
/// ChaCha streams make paths independent and individually reproducible
/// regardless of generation order.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Draws an `n`-period joint path. `log(Y_0)` is drawn from the stationary law
/// unless `init_log_y` is given. Bit-identical across runs for a given seed.
pub fn sample_path(
    params: &ProcessParams,
    n: usize,
    seed: u64,
    init_log_y: Option<f64>,
) -> Result<SamplePath> {
    sample_path_with_rng(params, n, seed, init_log_y, &mut path_rng(seed, 0))
}

pub(crate) fn sample_path_with_rng(
    params: &ProcessParams,
    n: usize,
    seed: u64,
    init_log_y: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<SamplePath> {
    if n == 0 {
        return Err(Error::Argument("sample_path requires n >= 1".into()));
    }
    let mut eps_c_series = Vec::with_capacity(n);
    let mut log_y_series = Vec::with_capacity(n);
    let mut log_y = match init_log_y {
        Some(v) => v,
        None => {
            let stat = stationary_log_y(params)?;
            let z: f64 = rng.sample(StandardNormal);
            stat.mean + stat.variance.sqrt() * z
        }
    };
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        eps_c_series.push((params.mu_c + params.sigma_c * z).exp());
        let shock: f64 = rng.sample(StandardNormal);
        log_y = step_log_y(params, log_y, shock);
        log_y_series.push(log_y);
    }
    Ok(SamplePath { eps_c_series, log_y_series, seed })
}

/// Standard errors of the MLE parameter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSe {
    pub mu_c: f64,
    pub sigma_c: f64,
    pub phi: f64,
    pub kappa: f64,
    pub sigma_y: f64,
}

/// Output of [`mle_calibrate`]: point estimates, standard errors and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub params: ProcessParams,
    pub se: CalibrationSe,
    pub n_obs: usize,
    /// Set when `|phi_hat| >= 1`; the estimates are still returned.
    pub nonstationary_flag: bool,
}

/// Maximum-likelihood calibration from consumption and dividend level series.
///
/// Builds `eps_c[t] = C[t] / C[t-1]` and `Y[t] = C[t] / D[t]`; `mu_c` and
/// `sigma_c` are the sample mean and MLE (divisor `n`) standard deviation of
/// `log eps_c`; `(phi, kappa, sigma_y)` maximize the Gaussian AR(1)
/// likelihood of `log Y` conditional on the first observation, which is least
/// squares for the slope and intercept with `kappa = intercept / (1 - phi)`.
pub fn mle_calibrate(consumption: &[f64], dividends: &[f64]) -> Result<Calibration> {
    if consumption.len() != dividends.len() {
        return Err(Error::Data(format!(
            "series lengths differ: {} consumption vs {} dividends",
            consumption.len(),
            dividends.len()
        )));
    }
    let n = consumption.len();
    if n < 3 {
        return Err(Error::Data(format!("need at least 3 observations, got {n}")));
    }
    for (t, (&c, &d)) in consumption.iter().zip(dividends).enumerate() {
        if !(c > 0.0) || !(d > 0.0) {
            return Err(Error::Data(format!("non-positive entry at index {t}: C={c}, D={d}")));
        }
    }

    let log_eps: Vec<f64> = (1..n).map(|t| (consumption[t] / consumption[t - 1]).ln()).collect();
    let log_y: Vec<f64> = (0..n).map(|t| (consumption[t] / dividends[t]).ln()).collect();
    mle_from_logs(&log_eps, &log_y)
}

/// Maximum-likelihood calibration from growth rates and ratio levels rather
/// than raw level series: `eps_c[t] = C[t+1] / C[t]` and `y[t] = C[t] / D[t]`.
/// Useful for long synthetic samples where cumulative consumption levels
/// overflow floating point.
pub fn mle_calibrate_series(eps_c: &[f64], y: &[f64]) -> Result<Calibration> {
    if eps_c.len() < 2 || y.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 2 growth and 3 ratio observations, got {} and {}",
            eps_c.len(),
            y.len()
        )));
    }
    for (t, &e) in eps_c.iter().enumerate() {
        if !(e > 0.0) {
            return Err(Error::Data(format!("non-positive growth rate at index {t}: {e}")));
        }
    }
    for (t, &v) in y.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::Data(format!("non-positive ratio at index {t}: {v}")));
        }
    }
    let log_eps: Vec<f64> = eps_c.iter().map(|e| e.ln()).collect();
    let log_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    mle_from_logs(&log_eps, &log_y)
}

fn mle_from_logs(log_eps: &[f64], log_y: &[f64]) -> Result<Calibration> {
    let n = log_y.len();
    let m = log_eps.len() as f64;
    let mu_c = log_eps.iter().sum::<f64>() / m;
    let sigma_c = (log_eps.iter().map(|x| (x - mu_c).powi(2)).sum::<f64>() / m).sqrt();

    let (x, y): (Vec<f64>, Vec<f64>) =
        (1..n).map(|t| (log_y[t - 1], log_y[t])).unzip();
    let k = x.len() as f64;
    let x_bar = x.iter().sum::<f64>() / k;
    let y_bar = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - x_bar).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - x_bar) * (b - y_bar)).sum();

    // Treat the regressor as constant when its variation is at floating-point
    // noise level relative to its magnitude.
    let degenerate = sxx <= 1e-12 * k * x_bar.powi(2).max(1.0);
    let (phi, intercept, sigma_y, se_phi, se_intercept, cov_ci);
    if degenerate {
        // Deterministic log Y: the slope is unidentified. Report phi = 0 with
        // kappa equal to the constant level so the caller still gets a usable
        // long-run mean, and flag the fit.
        phi = 0.0;
        intercept = y_bar;
        sigma_y = 0.0;
        se_phi = f64::INFINITY;
        se_intercept = f64::INFINITY;
        cov_ci = 0.0;
    } else {
        phi = sxy / sxx;
        intercept = y_bar - phi * x_bar;
        let ssr: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - intercept - phi * a).powi(2))
            .sum();
        sigma_y = (ssr / k).sqrt();
        let s2 = ssr / (k - 2.0).max(1.0);
        se_phi = (s2 / sxx).sqrt();
        se_intercept = (s2 * (1.0 / k + x_bar * x_bar / sxx)).sqrt();
        cov_ci = -s2 * x_bar / sxx;
    }

    let nonstationary_flag = phi.abs() >= 1.0 || degenerate;
    let kappa = if (1.0 - phi).abs() > f64::EPSILON {
        intercept / (1.0 - phi)
    } else {
        f64::NAN
    };

    // Delta method for kappa = intercept / (1 - phi).
    let dk_dc = 1.0 / (1.0 - phi);
    let dk_dphi = intercept / (1.0 - phi).powi(2);
    let se_kappa = (dk_dc * dk_dc * se_intercept * se_intercept
        + dk_dphi * dk_dphi * se_phi * se_phi
        + 2.0 * dk_dc * dk_dphi * cov_ci)
        .max(0.0)
        .sqrt();

    Ok(Calibration {
        params: ProcessParams { mu_c, sigma_c, phi, kappa, sigma_y },
        se: CalibrationSe {
            mu_c: sigma_c / m.sqrt(),
            sigma_c: sigma_c / (2.0 * m).sqrt(),
            phi: se_phi,
            kappa: se_kappa,
            sigma_y: sigma_y / (2.0 * k).sqrt(),
        },
        n_obs: n,
        nonstationary_flag,
    })
}

/// One row of the calibration input CSV.
#[derive(Debug, Clone, Deserialize)]
pub struct AnnualRow {
    pub year: i64,
    pub consumption: f64,
    pub dividends: f64,
}

/// Parses `year,consumption,dividends` CSV. Years must be strictly
/// consecutive ascending; duplicates and gaps are rejected with the year named.
pub fn read_annual_csv<R: std::io::Read>(reader: R) -> Result<Vec<AnnualRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows: Vec<AnnualRow> = Vec::new();
    for (i, rec) in rdr.deserialize::<AnnualRow>().enumerate() {
        let row = rec.map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))?;
        if let Some(prev) = rows.last() {
            if row.year == prev.year {
                return Err(Error::Data(format!("duplicate year {}", row.year)));
            }
            if row.year != prev.year + 1 {
                return Err(Error::Data(format!(
                    "gap or disorder between years {} and {}",
                    prev.year, row.year
                )));
            }
        }
        if !(row.consumption > 0.0) {
            return Err(Error::Data(format!("non-positive consumption in year {}", row.year)));
        }
        if !(row.dividends > 0.0) {
            return Err(Error::Data(format!("non-positive dividends in year {}", row.year)));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("empty input".into()));
    }
    Ok(rows)
}
