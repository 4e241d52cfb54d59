//! Numerical toolkit: Gauss-Hermite quadrature against the standard normal,
//! a rectangular state grid with bilinear interpolation, a damped-free
//! fixed-point iterator with residual tracking, and a bisection root finder.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::processes::{stationary_log_y, ProcessParams};
use crate::{Error, Result};

/// Quadrature rule normalized against the standard normal law:
/// `sum_i weights[i] * g(nodes[i]) ~ E[g(Z)]`, `Z ~ N(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Default quadrature order; exact for polynomials up to degree 41 and
/// accurate to ~1e-12 for the smooth integrands used here.
pub const DEFAULT_QUAD_ORDER: usize = 21;

/// Builds the order-`n` rule by Newton iteration on the Hermite recurrence
/// (the classical `gauher` construction), then rescales nodes by `sqrt(2)`
/// and weights by `1/sqrt(pi)` so the rule integrates against `N(0,1)`.
pub fn gauss_hermite(n: usize) -> Result<GaussHermite> {
    if n == 0 || n > 200 {
        return Err(Error::Argument(format!("quadrature order must be in 1..=200, got {n}")));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0_f64; n];
    let mut w = vec![0.0_f64; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0_f64;
    // First zeros of the Airy function Ai(-x); the k-th largest Hermite node
    // is approximately sqrt(2n+1) - 2^(-1/3) (2n+1)^(-1/6) a_k, accurate
    // enough at every order to stay inside the Newton basin.
    const AIRY: [f64; 4] = [2.338_107_410_459_767, 4.087_949_444_130_970, 5.520_559_828_095_551, 6.786_708_090_071_759];
    let edge = (2.0 * nf + 1.0).sqrt();
    let spread = 0.793_700_525_984_1 * (2.0 * nf + 1.0).powf(-1.0 / 6.0);
    for i in 0..m {
        // The classical edge-node guesses lose the Newton basin above order
        // ~150; the Airy approximation is poor below ~20 nodes. Use each in
        // its reliable range.
        z = if i < 4 && n >= 100 {
            edge - spread * AIRY[i]
        } else {
            match i {
                0 => edge - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            }
        };
        let mut pp = 0.0;
        let mut scale = 1.0;
        for _ in 0..200 {
            // Recurrence on Hermite *functions* (polynomials times
            // exp(-z^2/2)): these stay O(1) for any order, where the raw
            // polynomials overflow relative precision near order ~160.
            scale = (-0.5 * z * z).exp();
            let mut p1 = pim4 * scale;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        // Undo the exp(-z^2/2) scaling baked into pp.
        w[i] = 2.0 * scale * scale / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // physicists' convention integrates against exp(-x^2); rescale to N(0,1)
    let nodes: Vec<f64> = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
    let weights: Vec<f64> = w.iter().rev().map(|v| v / std::f64::consts::PI.sqrt()).collect();
    Ok(GaussHermite { nodes, weights })
}

impl GaussHermite {
    /// `E[g(Z)]` for `Z ~ N(0,1)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    /// `E[g(X)]` for `log X ~ N(mu, sigma^2)`.
    pub fn expect_lognormal<F: Fn(f64) -> f64>(&self, mu: f64, sigma: f64, g: F) -> f64 {
        self.expect(|z| g((mu + sigma * z).exp()))
    }
}

/// Function values on a rectangular `(eps, log Y)` grid, row-major in `eps`.
#[derive(Debug)]
pub struct GridFunction {
    pub eps_axis: Vec<f64>,
    pub logy_axis: Vec<f64>,
    /// `values[i * logy_axis.len() + j]` is the value at `(eps_axis[i], logy_axis[j])`.
    pub values: Vec<f64>,
    clamps: AtomicU64,
}

impl Clone for GridFunction {
    fn clone(&self) -> Self {
        Self {
            eps_axis: self.eps_axis.clone(),
            logy_axis: self.logy_axis.clone(),
            values: self.values.clone(),
            clamps: AtomicU64::new(self.clamps.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.eps_axis == other.eps_axis
            && self.logy_axis == other.logy_axis
            && self.values == other.values
    }
}

/// Sidecar metadata stored alongside a solved grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub eps_axis: Vec<f64>,
    pub logy_axis: Vec<f64>,
    pub tolerance: f64,
    pub iterations: usize,
    pub residual: f64,
    pub clamp_count: u64,
}

/// Default number of points along each axis.
pub const DEFAULT_GRID: (usize, usize) = (41, 41);

/// Builds the default state grid: `eps` log-uniform over +/- 4 growth sigmas,
/// `log Y` uniform over +/- 4 stationary sigmas floored at 0 (the ratio of
/// consumption to dividends stays at or above one).
pub fn default_grid(params: &ProcessParams, n_eps: usize, n_logy: usize) -> Result<GridFunction> {
    if n_eps < 2 || n_logy < 2 {
        return Err(Error::Argument(format!(
            "grid needs at least 2 points per axis, got {n_eps}x{n_logy}"
        )));
    }
    let stat = stationary_log_y(params)?;
    // Keep a tiny span on each axis when a volatility is zero so the grid
    // axes stay strictly increasing and interpolation remains well defined.
    let half_eps = (4.0 * params.sigma_c).max(1e-6);
    let half_y = (4.0 * stat.variance.sqrt()).max(1e-6);
    let eps_axis = linspace(params.mu_c - half_eps, params.mu_c + half_eps, n_eps)
        .into_iter()
        .map(f64::exp)
        .collect();
    let logy_axis = linspace((params.kappa - half_y).max(0.0), params.kappa + half_y, n_logy);
    Ok(GridFunction::zeros(eps_axis, logy_axis))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

impl GridFunction {
    pub fn zeros(eps_axis: Vec<f64>, logy_axis: Vec<f64>) -> Self {
        let n = eps_axis.len() * logy_axis.len();
        Self { eps_axis, logy_axis, values: vec![0.0; n], clamps: AtomicU64::new(0) }
    }

    pub fn with_values(eps_axis: Vec<f64>, logy_axis: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != eps_axis.len() * logy_axis.len() {
            return Err(Error::Argument(format!(
                "value count {} does not match {}x{} grid",
                values.len(),
                eps_axis.len(),
                logy_axis.len()
            )));
        }
        for axis in [&eps_axis, &logy_axis] {
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Argument("grid axes must be strictly increasing".into()));
            }
        }
        Ok(Self { eps_axis, logy_axis, values, clamps: AtomicU64::new(0) })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.logy_axis.len() + j]
    }

    /// Number of interpolation queries that fell outside the grid and were
    /// clamped to the boundary.
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    pub fn reset_clamp_count(&self) {
        self.clamps.store(0, Ordering::Relaxed);
    }

    /// Bilinear interpolation; queries outside the grid are clamped to the
    /// boundary and counted.
    pub fn interp(&self, eps: f64, logy: f64) -> f64 {
        let (eps, logy) = self.clamp_query(eps, logy);
        let (i, tx) = bracket(&self.eps_axis, eps);
        let (j, ty) = bracket(&self.logy_axis, logy);
        let ny = self.logy_axis.len();
        let v00 = self.values[i * ny + j];
        let v01 = self.values[i * ny + j + 1];
        let v10 = self.values[(i + 1) * ny + j];
        let v11 = self.values[(i + 1) * ny + j + 1];
        (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) + tx * ((1.0 - ty) * v10 + ty * v11)
    }

    fn clamp_query(&self, eps: f64, logy: f64) -> (f64, f64) {
        let eps_c = eps.clamp(self.eps_axis[0], *self.eps_axis.last().unwrap());
        let logy_c = logy.clamp(self.logy_axis[0], *self.logy_axis.last().unwrap());
        if eps_c != eps || logy_c != logy {
            self.clamps.fetch_add(1, Ordering::Relaxed);
        }
        (eps_c, logy_c)
    }

    /// Writes `<base>.csv` (`eps,logy,value` rows) and `<base>.json` (axes and
    /// solve metadata).
    pub fn save(&self, base: &Path, meta: &GridMeta) -> Result<()> {
        let mut csv_file = std::io::BufWriter::new(std::fs::File::create(base.with_extension("csv"))?);
        writeln!(csv_file, "eps,logy,value")?;
        let ny = self.logy_axis.len();
        for (i, &e) in self.eps_axis.iter().enumerate() {
            for (j, &ly) in self.logy_axis.iter().enumerate() {
                writeln!(csv_file, "{e},{ly},{}", self.values[i * ny + j])?;
            }
        }
        csv_file.flush()?;
        let json = serde_json::to_string_pretty(meta)
            .map_err(|e| Error::Parse(format!("metadata serialization: {e}")))?;
        std::fs::write(base.with_extension("json"), json)?;
        Ok(())
    }

    /// Reloads a grid written by [`GridFunction::save`], checking the CSV
    /// against the sidecar axes.
    pub fn load(base: &Path) -> Result<(Self, GridMeta)> {
        let json = std::fs::read_to_string(base.with_extension("json"))?;
        let meta: GridMeta = serde_json::from_str(&json)
            .map_err(|e| Error::Parse(format!("metadata parse: {e}")))?;
        let mut rdr = csv::Reader::from_path(base.with_extension("csv"))?;
        let ny = meta.logy_axis.len();
        let mut values = vec![f64::NAN; meta.eps_axis.len() * ny];
        let mut count = 0usize;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("grid csv: {e}")))?;
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse(format!("grid csv field '{s}': {e}")))
            };
            let eps = parse(&rec[0])?;
            let logy = parse(&rec[1])?;
            let v = parse(&rec[2])?;
            let i = nearest_index(&meta.eps_axis, eps)
                .ok_or_else(|| Error::Parse(format!("eps {eps} not on the stored axis")))?;
            let j = nearest_index(&meta.logy_axis, logy)
                .ok_or_else(|| Error::Parse(format!("logy {logy} not on the stored axis")))?;
            values[i * ny + j] = v;
            count += 1;
        }
        if count != values.len() || values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse(format!(
                "grid csv has {count} rows, expected {}",
                values.len()
            )));
        }
        let gf = Self::with_values(meta.eps_axis.clone(), meta.logy_axis.clone(), values)?;
        Ok((gf, meta))
    }
}

fn nearest_index(axis: &[f64], v: f64) -> Option<usize> {
    axis.iter().position(|&a| {
        let scale = a.abs().max(1.0);
        (a - v).abs() <= 1e-12 * scale
    })
}

/// Index of the left bracket and the interpolation fraction within it.
fn bracket(axis: &[f64], v: f64) -> (usize, f64) {
    let i = match axis.partition_point(|&a| a <= v) {
        0 => 0,
        p if p >= axis.len() => axis.len() - 2,
        p => p - 1,
    };
    let t = (v - axis[i]) / (axis[i + 1] - axis[i]);
    (i, t.clamp(0.0, 1.0))
}

/// Outcome of a successful fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm residual after each iteration; useful for checking the
    /// contraction rate.
    pub history: Vec<f64>,
}

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITER: usize = 10_000;

/// Iterates `x <- step(x)` until the sup-norm update falls below `tol`.
///
/// Returns [`Error::NonConvergence`] with the residual history if the budget
/// is exhausted, and [`Error::NonFinite`] if any iterate goes non-finite.
pub fn fixed_point<F>(init: Vec<f64>, mut step: F, tol: f64, max_iter: usize) -> Result<FixedPoint>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = init;
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let next = step(&x);
        debug_assert_eq!(next.len(), x.len());
        let mut residual = 0.0_f64;
        for (a, b) in next.iter().zip(&x) {
            if !a.is_finite() {
                return Err(Error::NonFinite { eps: f64::NAN, logy: f64::NAN });
            }
            residual = residual.max((a - b).abs());
        }
        history.push(residual);
        x = next;
        if residual < tol {
            return Ok(FixedPoint { values: x, iterations: it, residual, history });
        }
    }
    let residual = history.last().copied().unwrap_or(f64::INFINITY);
    Err(Error::NonConvergence { residual, iterations: max_iter, history })
}

/// Bisection root finder for a continuous function with a sign change on
/// `[lo, hi]`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing { lo, hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() < tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn quadrature_moments_of_standard_normal() {
        let gh = gauss_hermite(21).unwrap();
        assert_abs_diff_eq!(gh.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(gh.expect(|z| z), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(gh.expect(|z| z * z), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gh.expect(|z| z.powi(4)), 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(gh.expect(|z| z.powi(6)), 15.0, epsilon = 1e-10);
        // degree-41 polynomial is still integrated exactly; cancellation is
        // only meaningful relative to the size of the summed terms
        let odd = gh.expect(|z| z.powi(41));
        let scale = gh.expect(|z| z.powi(41).abs());
        assert!(odd.abs() <= 1e-13 * scale, "odd moment {odd} vs scale {scale}");
    }

    #[test]
    fn quadrature_matches_lognormal_closed_form() {
        let gh = gauss_hermite(21).unwrap();
        let (mu, sigma): (f64, f64) = (0.058, 0.053);
        for &a in &[1.0, -4.0, -3.0, 2.0] {
            let exact = (a * mu + a * a * sigma * sigma / 2.0).exp();
            let quad = gh.expect_lognormal(mu, sigma, |x| x.powf(a));
            assert_relative_eq!(quad, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadrature_order_edge_cases() {
        let gh1 = gauss_hermite(1).unwrap();
        assert_eq!(gh1.nodes.len(), 1);
        assert_abs_diff_eq!(gh1.nodes[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gh1.weights[0], 1.0, epsilon = 1e-14);

        let gh2 = gauss_hermite(2).unwrap();
        assert_abs_diff_eq!(gh2.nodes[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(gh2.nodes[1], 1.0, epsilon = 1e-13);

        let gh200 = gauss_hermite(200).unwrap();
        assert_abs_diff_eq!(gh200.expect(|z| z * z), 1.0, epsilon = 1e-10);

        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(201).is_err());
    }

    #[test]
    fn quadrature_nodes_sorted_and_symmetric() {
        for n in [5usize, 8, 21, 64] {
            let gh = gauss_hermite(n).unwrap();
            assert!(gh.nodes.windows(2).all(|w| w[0] < w[1]));
            for i in 0..n {
                assert_abs_diff_eq!(gh.nodes[i], -gh.nodes[n - 1 - i], epsilon = 1e-12);
                assert_abs_diff_eq!(gh.weights[i], gh.weights[n - 1 - i], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn default_grid_shape() {
        let p = ProcessParams::calibrated();
        let g = default_grid(&p, 41, 41).unwrap();
        assert_eq!(g.values.len(), 41 * 41);
        assert_relative_eq!(g.eps_axis[0], (0.058 - 4.0 * 0.053_f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(
            *g.eps_axis.last().unwrap(),
            (0.058 + 4.0 * 0.053_f64).exp(),
            epsilon = 1e-12
        );
        assert!(g.logy_axis[0] >= 0.0);
        // middle of the eps axis is the median growth rate (log-uniform spacing)
        assert_relative_eq!(g.eps_axis[20], (0.058_f64).exp(), epsilon = 1e-12);
        assert!(default_grid(&p, 1, 41).is_err());
    }

    #[test]
    fn bilinear_exact_on_affine_functions() {
        let f = |e: f64, ly: f64| 2.0 + 3.0 * e - 0.5 * ly;
        let eps: Vec<f64> = vec![0.8, 0.9, 1.0, 1.1, 1.3];
        let logy: Vec<f64> = vec![0.0, 1.0, 2.5, 3.0];
        let mut vals = Vec::new();
        for &e in &eps {
            for &ly in &logy {
                vals.push(f(e, ly));
            }
        }
        let g = GridFunction::with_values(eps, logy, vals).unwrap();
        assert_abs_diff_eq!(g.interp(0.85, 0.4), f(0.85, 0.4), epsilon = 1e-13);
        assert_abs_diff_eq!(g.interp(1.05, 2.7), f(1.05, 2.7), epsilon = 1e-13);
        // exact at the nodes
        assert_abs_diff_eq!(g.interp(1.1, 2.5), f(1.1, 2.5), epsilon = 1e-14);
        assert_eq!(g.clamp_count(), 0);
    }

    #[test]
    fn interp_clamps_and_counts() {
        let g = GridFunction::with_values(
            vec![1.0, 2.0],
            vec![0.0, 1.0],
            vec![10.0, 11.0, 20.0, 21.0],
        )
        .unwrap();
        assert_abs_diff_eq!(g.interp(0.5, 0.5), 10.5, epsilon = 1e-14);
        assert_abs_diff_eq!(g.interp(3.0, 2.0), 21.0, epsilon = 1e-14);
        assert_eq!(g.clamp_count(), 2);
        g.reset_clamp_count();
        assert_eq!(g.clamp_count(), 0);
    }

    #[test]
    fn grid_roundtrip_through_files() {
        let p = ProcessParams::calibrated();
        let mut g = default_grid(&p, 7, 5).unwrap();
        for (k, v) in g.values.iter_mut().enumerate() {
            *v = (k as f64).sin();
        }
        let meta = GridMeta {
            eps_axis: g.eps_axis.clone(),
            logy_axis: g.logy_axis.clone(),
            tolerance: 1e-10,
            iterations: 123,
            residual: 4.2e-11,
            clamp_count: 7,
        };
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("h_grid");
        g.save(&base, &meta).unwrap();
        let (g2, meta2) = GridFunction::load(&base).unwrap();
        assert_eq!(meta2, meta);
        assert_eq!(g2.eps_axis, g.eps_axis);
        assert_eq!(g2.logy_axis, g.logy_axis);
        for (a, b) in g2.values.iter().zip(&g.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn fixed_point_linear_contraction() {
        // x <- 0.5 x + 1 has fixed point 2, contraction factor 0.5
        let res = fixed_point(vec![0.0], |x| vec![0.5 * x[0] + 1.0], 1e-10, 10_000).unwrap();
        assert_abs_diff_eq!(res.values[0], 2.0, epsilon = 1e-9);
        // residual ratios should approach the contraction factor
        let h = &res.history;
        let ratio = h[h.len() - 1] / h[h.len() - 2];
        assert_relative_eq!(ratio, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn fixed_point_failure_modes() {
        let err = fixed_point(vec![1.0], |x| vec![2.0 * x[0]], 1e-10, 50).unwrap_err();
        match err {
            Error::NonConvergence { iterations, history, .. } => {
                assert_eq!(iterations, 50);
                assert_eq!(history.len(), 50);
            }
            other => panic!("unexpected error {other}"),
        }
        let err = fixed_point(vec![1.0], |x| vec![x[0] / 0.0 - x[0] / 0.0], 1e-10, 5).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn bisect_finds_roots() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-11);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 200).is_err());
        // endpoint root
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-12, 200).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn interp_bounded_by_corner_values(
            e in 0.5..1.5_f64,
            ly in -1.0..4.0_f64,
            vals in proptest::collection::vec(-10.0..10.0_f64, 9),
        ) {
            let g = GridFunction::with_values(
                vec![0.8, 1.0, 1.2],
                vec![0.0, 1.5, 3.0],
                vals.clone(),
            ).unwrap();
            let v = g.interp(e, ly);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }

        #[test]
        fn quadrature_within_function_range(n in 1usize..60) {
            // E[g(Z)] of a bounded function must stay within its bounds
            let gh = gauss_hermite(n).unwrap();
            let v = gh.expect(|z| z.tanh());
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }
}
