//! Pricing with both contemporaneous and prospective gain-loss utility. The
//! price-dividend ratio is `h / (Lambda * K)` where `h` solves a fixed-point
//! integral equation on the `(eps, log Y)` grid and `K = 1 - beta E[eps^{1-theta}]`.

use rayon::prelude::*;

use crate::model2::EquilibriumPrices;
use crate::numerics::{
    bisect, default_grid, fixed_point, gauss_hermite, GaussHermite, GridFunction,
    DEFAULT_GRID, DEFAULT_QUAD_ORDER, FIXED_POINT_MAX_ITER, FIXED_POINT_TOL,
};
use crate::preferences::PreferenceParams;
use crate::processes::{
    cdf_eps, lognormal_moment, stationary_log_y, step_log_y, MarketState, ProcessParams,
};
use crate::{Error, Result};

/// Converged solution of the integral equation, with solver diagnostics.
#[derive(Debug, Clone)]
pub struct HSolution {
    pub h: GridFunction,
    pub iterations: usize,
    pub final_residual: f64,
    /// Ratio of successive sup-norm residuals near convergence; < 1 for a
    /// contraction.
    pub contraction_ratio: f64,
    /// Interpolation queries that stepped past the log Y axis and were
    /// clamped, over the whole solve.
    pub clamp_count: u64,
    pub tolerance: f64,
}

/// Pricing engine; quadrature tables are precomputed at construction.
#[derive(Debug, Clone)]
pub struct Model1 {
    pub prefs: PreferenceParams,
    pub params: ProcessParams,
    gh: GaussHermite,
    /// `E[eps^{1-theta}]`.
    k1: f64,
    /// `K = 1 - beta E[eps^{1-theta}]`.
    cap_k: f64,
    /// `E[eps^{-theta} Lambda(F(eps))]`.
    c_m: f64,
    // per-node tables over the consumption-growth quadrature
    eps_q: Vec<f64>,
    pow0_q: Vec<f64>,
    pow1_q: Vec<f64>,
    lam_q: Vec<f64>,
}

impl Model1 {
    pub fn new(prefs: PreferenceParams, params: ProcessParams, quad_order: usize) -> Result<Self> {
        let gh = gauss_hermite(quad_order)?;
        let k1 = lognormal_moment(&params, 1.0 - prefs.theta);
        if prefs.beta * k1 >= 1.0 {
            return Err(Error::Pricing(format!(
                "growth condition fails: beta * E[eps^(1-theta)] = {} >= 1",
                prefs.beta * k1
            )));
        }
        let n = gh.nodes.len();
        let mut eps_q = Vec::with_capacity(n);
        let mut pow0_q = Vec::with_capacity(n);
        let mut pow1_q = Vec::with_capacity(n);
        let mut lam_q = Vec::with_capacity(n);
        for &z in &gh.nodes {
            let eps = (params.mu_c + params.sigma_c * z).exp();
            eps_q.push(eps);
            pow0_q.push(eps.powf(-prefs.theta));
            pow1_q.push(eps.powf(1.0 - prefs.theta));
            lam_q.push(prefs.weight_contemp(cdf_eps(&params, eps)?)?);
        }
        let c_m = gh.weights.iter().zip(&pow0_q).zip(&lam_q).map(|((&w, &p), &l)| w * p * l).sum();
        Ok(Self { prefs, params, gh, k1, cap_k: 1.0 - prefs.beta * k1, c_m, eps_q, pow0_q, pow1_q, lam_q })
    }

    pub fn with_defaults(prefs: PreferenceParams, params: ProcessParams) -> Result<Self> {
        Self::new(prefs, params, DEFAULT_QUAD_ORDER)
    }

    pub fn growth_condition(&self) -> f64 {
        self.prefs.beta * self.k1
    }

    fn weight_contemp_at(&self, eps: f64) -> Result<f64> {
        self.prefs.weight_contemp(cdf_eps(&self.params, eps)?)
    }

    fn weight_prosp_at(&self, eps: f64) -> Result<f64> {
        self.prefs.weight_prosp(cdf_eps(&self.params, eps)?)
    }

    /// The two conditional expectations of the integral operator at one
    /// `log Y` node: the prospective fraction term (without its `gamma Gamma`
    /// prefactor) and the linear term. Neither depends on the current `eps`.
    fn operator_terms(&self, h: &GridFunction, logy: f64) -> (f64, f64) {
        let y = logy.exp();
        let eps_lo = h.eps_axis[0];
        let eps_hi = *h.eps_axis.last().unwrap();
        let beta = self.prefs.beta;
        let mut a = 0.0;
        let mut b = 0.0;
        for (l, &zy) in self.gh.nodes.iter().enumerate() {
            let wy = self.gh.weights[l];
            let logy_next = step_log_y(&self.params, logy, zy);
            let y_next = logy_next.exp();
            for (k, &wk) in self.gh.weights.iter().enumerate() {
                // growth nodes in the far tail sit just outside the eps axis;
                // clamp them here so only log Y excursions hit the counter
                let eps = self.eps_q[k].clamp(eps_lo, eps_hi);
                let h_next = h.interp(eps, logy_next);
                let lam_k = self.lam_q[k] * self.cap_k;
                let w = wy * wk * self.pow1_q[k];
                a += w * y * (lam_k + h_next) / (y_next * lam_k + h_next);
                b += w * (y / y_next) * (h_next + lam_k);
            }
        }
        (beta * a, beta * b)
    }

    /// One application of the integral operator on the grid.
    pub fn t_operator(&self, h: &GridFunction) -> Result<GridFunction> {
        let terms: Vec<(f64, f64)> = h
            .logy_axis
            .par_iter()
            .map(|&logy| self.operator_terms(h, logy))
            .collect();
        let mut out = GridFunction::zeros(h.eps_axis.clone(), h.logy_axis.clone());
        let ny = h.logy_axis.len();
        for (i, &eps) in h.eps_axis.iter().enumerate() {
            let prosp = self.prefs.gamma * self.weight_prosp_at(eps)?;
            for (j, &(a, b)) in terms.iter().enumerate() {
                out.values[i * ny + j] = prosp * a + b;
            }
        }
        Ok(out)
    }

    /// Solves the integral equation from the zero function. If more than 0.1%
    /// of interpolation queries clamp at the log Y boundary, the axis span is
    /// widened by one stationary standard deviation and the solve restarts
    /// (at most twice).
    pub fn solve_h(
        &self,
        n_eps: usize,
        n_logy: usize,
        tol: f64,
        max_iter: usize,
    ) -> Result<HSolution> {
        let stat = stationary_log_y(&self.params)?;
        let sd = stat.variance.sqrt();
        let mut widen = 0.0;
        let mut last_err = None;
        for _attempt in 0..3 {
            let mut grid = default_grid(&self.params, n_eps, n_logy)?;
            if widen > 0.0 {
                let lo = (self.params.kappa - 4.0 * sd - widen).max(0.0);
                let hi = self.params.kappa + 4.0 * sd + widen;
                let step = (hi - lo) / (n_logy - 1) as f64;
                grid = GridFunction::zeros(
                    grid.eps_axis.clone(),
                    (0..n_logy).map(|j| lo + step * j as f64).collect(),
                );
            }
            let template = grid.clone();
            let queries_per_iter =
                (n_logy * self.gh.nodes.len() * self.gh.nodes.len()) as u64;
            let mut clamp_total = 0u64;
            let result = fixed_point(
                vec![0.0; n_eps * n_logy],
                |vals| {
                    let cur = GridFunction::with_values(
                        template.eps_axis.clone(),
                        template.logy_axis.clone(),
                        vals.to_vec(),
                    )
                    .expect("axes fixed during solve");
                    let next = self.t_operator(&cur).expect("operator evaluation");
                    clamp_total += cur.clamp_count();
                    next.values
                },
                tol,
                max_iter,
            );
            let fp = match result {
                Ok(fp) => fp,
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            };
            let clamp_count = clamp_total;
            let total_queries = queries_per_iter * fp.iterations as u64;
            let h = GridFunction::with_values(
                template.eps_axis.clone(),
                template.logy_axis.clone(),
                fp.values,
            )?;
            let contraction_ratio = match fp.history.len() {
                0 | 1 => 0.0,
                n => fp.history[n - 1] / fp.history[n - 2],
            };
            if clamp_count * 1000 < total_queries || widen >= 2.0 * sd {
                return Ok(HSolution {
                    h,
                    iterations: fp.iterations,
                    final_residual: fp.residual,
                    contraction_ratio,
                    clamp_count,
                    tolerance: tol,
                });
            }
            widen += sd;
        }
        Err(last_err.unwrap_or_else(|| Error::Pricing("solver retries exhausted".into())))
    }

    pub fn solve_default(&self) -> Result<HSolution> {
        self.solve_h(DEFAULT_GRID.0, DEFAULT_GRID.1, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)
    }

    fn check_solution(&self, sol: &HSolution) -> Result<()> {
        if sol.final_residual > sol.tolerance {
            return Err(Error::Pricing(format!(
                "solution residual {} exceeds tolerance {}",
                sol.final_residual, sol.tolerance
            )));
        }
        Ok(())
    }

    pub fn pd_ratio(&self, sol: &HSolution, state: &MarketState) -> Result<f64> {
        self.check_solution(sol)?;
        let lam = self.weight_contemp_at(state.eps_c)?;
        Ok(sol.h.interp(state.eps_c, state.log_y()) / (lam * self.cap_k))
    }

    pub fn risk_free(&self, sol: &HSolution, state: &MarketState) -> Result<f64> {
        self.check_solution(sol)?;
        let lam = self.weight_contemp_at(state.eps_c)?;
        let gam = self.weight_prosp_at(state.eps_c)?;
        let q = self.prosp_bond_term(sol, state.log_y());
        Ok(lam / (self.prefs.gamma * gam * self.prefs.beta * q + self.prefs.beta * self.c_m))
    }

    /// `E_t[eps'^{-theta} Y' Lambda' / (Y' Lambda' K + h')]`.
    fn prosp_bond_term(&self, sol: &HSolution, logy: f64) -> f64 {
        let mut q = 0.0;
        for (l, &zy) in self.gh.nodes.iter().enumerate() {
            let wy = self.gh.weights[l];
            let logy_next = step_log_y(&self.params, logy, zy);
            let y_next = logy_next.exp();
            for (k, &wk) in self.gh.weights.iter().enumerate() {
                let h_next = sol.h.interp(self.eps_q[k], logy_next);
                let yl = y_next * self.lam_q[k];
                q += wy * wk * self.pow0_q[k] * yl / (yl * self.cap_k + h_next);
            }
        }
        q
    }

    /// Realized gross stock return for a next-period draw.
    pub fn stock_return(
        &self,
        sol: &HSolution,
        state: &MarketState,
        eps_next: f64,
        logy_next: f64,
    ) -> Result<f64> {
        self.check_solution(sol)?;
        let lam_t = self.weight_contemp_at(state.eps_c)?;
        let h_t = sol.h.interp(state.eps_c, state.log_y());
        let lam_next = self.weight_contemp_at(eps_next)?;
        let h_next = sol.h.interp(eps_next, logy_next);
        Ok(eps_next
            * (state.log_y() - logy_next).exp()
            * (lam_t / h_t)
            * (h_next / lam_next + self.cap_k))
    }

    pub fn expected_stock_return(&self, sol: &HSolution, state: &MarketState) -> Result<f64> {
        self.check_solution(sol)?;
        let lam_t = self.weight_contemp_at(state.eps_c)?;
        let h_t = sol.h.interp(state.eps_c, state.log_y());
        let logy = state.log_y();
        let mut acc = 0.0;
        for (l, &zy) in self.gh.nodes.iter().enumerate() {
            let wy = self.gh.weights[l];
            let logy_next = step_log_y(&self.params, logy, zy);
            let ratio = (logy - logy_next).exp();
            for (k, &wk) in self.gh.weights.iter().enumerate() {
                let h_next = sol.h.interp(self.eps_q[k], logy_next);
                acc += wy
                    * wk
                    * self.eps_q[k]
                    * ratio
                    * (lam_t / h_t)
                    * (h_next / self.lam_q[k] + self.cap_k);
            }
        }
        Ok(acc)
    }

    pub fn price(&self, sol: &HSolution, state: &MarketState) -> Result<EquilibriumPrices> {
        let r_f = self.risk_free(sol, state)?;
        let pd = self.pd_ratio(sol, state)?;
        let e_rs = self.expected_stock_return(sol, state)?;
        Ok(EquilibriumPrices { r_f, pd, e_rs, erp: e_rs - r_f })
    }

    /// One-period stochastic discount factor for a next-period draw.
    ///
    /// The prospective term carries a single discount factor; the doubled
    /// one that sometimes appears in restatements fails the bond Euler
    /// plug-back, so the version consistent with the Euler system is used.
    pub fn sdf(
        &self,
        sol: &HSolution,
        eps_now: f64,
        eps_next: f64,
        logy_next: f64,
    ) -> Result<f64> {
        self.check_solution(sol)?;
        if !(eps_next > 0.0) {
            return Err(Error::Domain(format!("eps_next must be > 0, got {eps_next}")));
        }
        let lam_t = self.weight_contemp_at(eps_now)?;
        let gam_t = self.weight_prosp_at(eps_now)?;
        let lam_next = self.weight_contemp_at(eps_next)?;
        let h_next = sol.h.interp(eps_next, logy_next);
        let y_next = logy_next.exp();
        let pow0 = eps_next.powf(-self.prefs.theta);
        let prosp = self.prefs.gamma * pow0 * y_next * gam_t * lam_next
            / (y_next * lam_next * self.cap_k + h_next);
        Ok(self.prefs.beta / lam_t * (pow0 * lam_next + prosp))
    }

    /// Absolute residuals of the stock and bond Euler equations.
    pub fn euler_residuals(&self, sol: &HSolution, state: &MarketState) -> Result<(f64, f64)> {
        self.check_solution(sol)?;
        let lam_t = self.weight_contemp_at(state.eps_c)?;
        let gam_t = self.weight_prosp_at(state.eps_c)?;
        let r_f = self.risk_free(sol, state)?;
        let logy = state.log_y();
        let beta = self.prefs.beta;
        let (mut std_stock, mut prosp_stock, mut std_bond, mut prosp_bond) = (0.0, 0.0, 0.0, 0.0);
        for (l, &zy) in self.gh.nodes.iter().enumerate() {
            let wy = self.gh.weights[l];
            let logy_next = step_log_y(&self.params, logy, zy);
            let y_next = logy_next.exp();
            for (k, &wk) in self.gh.weights.iter().enumerate() {
                let w = wy * wk;
                let eps = self.eps_q[k];
                let h_next = sol.h.interp(eps, logy_next);
                let pd_next = h_next / (self.lam_q[k] * self.cap_k);
                let rs = self.stock_return(sol, state, eps, logy_next)?;
                let frac = y_next / (pd_next + y_next);
                std_stock += w * self.pow0_q[k] * self.lam_q[k] * rs;
                prosp_stock += w * self.pow0_q[k] * frac * rs;
                std_bond += w * self.pow0_q[k] * self.lam_q[k];
                prosp_bond += w * self.pow0_q[k] * frac;
            }
        }
        let prosp_coef = self.prefs.gamma * beta / self.cap_k * gam_t / lam_t;
        let res_stock = (beta * std_stock / lam_t + prosp_coef * prosp_stock - 1.0).abs();
        let res_bond = ((beta * std_bond / lam_t + prosp_coef * prosp_bond) * r_f - 1.0).abs();
        Ok((res_stock, res_bond))
    }

    /// The lower bound on admissible functions from the contraction argument,
    /// found by bisection on its defining expectation. Degenerate when
    /// `gamma = 0` (the equation no longer involves the bound).
    pub fn h_lower_bound(&self, state: &MarketState) -> Result<f64> {
        if self.prefs.gamma == 0.0 {
            return Err(Error::Argument(
                "lower bound is degenerate when gamma = 0: the defining equation does not involve it"
                    .into(),
            ));
        }
        let logy = state.log_y();
        let expectation = |hb: f64| -> f64 {
            let mut acc = 0.0;
            for (l, &zy) in self.gh.nodes.iter().enumerate() {
                let wy = self.gh.weights[l];
                let logy_next = step_log_y(&self.params, logy, zy);
                let ratio = (logy - logy_next).exp();
                for (k, &wk) in self.gh.weights.iter().enumerate() {
                    let lam_k = self.lam_q[k] * self.cap_k;
                    let frac =
                        self.prefs.gamma * self.prefs.lambda * lam_k / (lam_k + hb).powi(2);
                    let term = self.prefs.beta * self.pow1_q[k] * ratio * (frac + 1.0);
                    acc += wy * wk * term * term;
                }
            }
            acc
        };
        bisect(|hb| expectation(hb) - 1.0, 0.0, 1e6, 1e-10, 400)
    }

    /// Consumption-wealth ratio. The second term discounts the value of the
    /// stock position through `h` at the next period; the period-after-next
    /// variant that appears in one restatement disagrees with the
    /// no-gain-loss reduction, so the next-period form is used (see
    /// [`Model1::cw_ratio_shifted`] for the variant, kept for comparison).
    pub fn cw_ratio(&self, sol: &HSolution, state: &MarketState) -> Result<f64> {
        self.check_solution(sol)?;
        let lam_t = self.weight_contemp_at(state.eps_c)?;
        let logy = state.log_y();
        let mut acc = 0.0;
        for (l, &zy) in self.gh.nodes.iter().enumerate() {
            let wy = self.gh.weights[l];
            let logy_next = step_log_y(&self.params, logy, zy);
            let y_next = logy_next.exp();
            for (k, &wk) in self.gh.weights.iter().enumerate() {
                let h_next = sol.h.interp(self.eps_q[k], logy_next);
                acc += wy
                    * wk
                    * self.pow1_q[k]
                    * (self.lam_q[k] + h_next / (y_next * self.cap_k));
            }
        }
        Ok(1.0 / (1.0 + self.prefs.beta * acc / lam_t))
    }

    /// Literal transcription of the two-period variant: `h` drawn at the
    /// period after next and the inner constant using the `-theta` moment.
    /// Diagnostic only; see [`Model1::cw_ratio`].
    pub fn cw_ratio_shifted(&self, sol: &HSolution, state: &MarketState) -> Result<f64> {
        self.check_solution(sol)?;
        let lam_t = self.weight_contemp_at(state.eps_c)?;
        let k0 = 1.0 - self.prefs.beta * lognormal_moment(&self.params, -self.prefs.theta);
        let logy = state.log_y();
        let mut acc = 0.0;
        for (l1, &zy1) in self.gh.nodes.iter().enumerate() {
            let wy1 = self.gh.weights[l1];
            let logy_1 = step_log_y(&self.params, logy, zy1);
            let y_1 = logy_1.exp();
            // inner expectation over the period-after-next shocks
            let mut h_2 = 0.0;
            for (l2, &zy2) in self.gh.nodes.iter().enumerate() {
                let wy2 = self.gh.weights[l2];
                let logy_2 = step_log_y(&self.params, logy_1, zy2);
                for (k2, &wk2) in self.gh.weights.iter().enumerate() {
                    h_2 += wy2 * wk2 * sol.h.interp(self.eps_q[k2], logy_2);
                }
            }
            for (k1, &wk1) in self.gh.weights.iter().enumerate() {
                acc += wy1
                    * wk1
                    * self.pow1_q[k1]
                    * (self.lam_q[k1] / lam_t + h_2 / (y_1 * lam_t * k0));
            }
        }
        Ok(1.0 / (1.0 + self.prefs.beta * acc))
    }

    /// Closed-form `h` when `gamma = 0` (a function of `log Y` alone).
    pub fn h_gamma0_closed(&self, logy: f64) -> Result<f64> {
        let ey = crate::model2::expected_y_ratio(&self.params, logy);
        let c_e_lam: f64 = self
            .gh
            .weights
            .iter()
            .zip(&self.pow1_q)
            .zip(&self.lam_q)
            .map(|((&w, &p), &l)| w * p * l)
            .sum();
        let g = self.prefs.beta * self.k1 * ey;
        if g >= 1.0 {
            return Err(Error::Pricing(format!(
                "growth condition fails at log Y = {logy}: {g} >= 1"
            )));
        }
        Ok(self.prefs.beta * c_e_lam * ey * self.cap_k / (1.0 - g))
    }
}
