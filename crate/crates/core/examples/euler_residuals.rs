//! Euler-equation residuals: both pricing models satisfy the stock and bond
//! first-order conditions to solver precision across the state space.

use refprice::model1::Model1;
use refprice::model2::Model2;
use refprice::numerics::gauss_hermite;
use refprice::preferences::PreferenceParams;
use refprice::processes::{step_log_y, MarketState, ProcessParams};

fn main() -> Result<(), refprice::Error> {
    let params = ProcessParams::calibrated();

    // model 1: residuals from the solved grid function
    let m1 = Model1::with_defaults(PreferenceParams::baseline(), params)?;
    let sol = m1.solve_default()?;
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..5 {
        for j in 0..5 {
            let eps = sol.h.eps_axis[5 + i * 7];
            let y = sol.h.logy_axis[5 + j * 7].exp();
            let (rs, rb) = m1.euler_residuals(&sol, &MarketState::new(eps, y)?)?;
            worst = (worst.0.max(rs), worst.1.max(rb));
        }
    }
    println!("model 1 worst residuals over 25 states: stock {:.3e}, bond {:.3e}", worst.0, worst.1);

    // model 2: residuals assembled from the closed forms by quadrature
    let prefs = PreferenceParams::new(0.98, 4.0, 1.0, 2.0, 0.0)?;
    let m2 = Model2::with_defaults(prefs, params)?;
    let gh = gauss_hermite(64)?;
    let state = MarketState::new(1.05, 21.07)?;
    let prices = m2.price(&state)?;
    let (mut e_m_rs, mut e_m) = (0.0, 0.0);
    for (&ze, &we) in gh.nodes.iter().zip(&gh.weights) {
        let eps_next = (params.mu_c + params.sigma_c * ze).exp();
        let m = m2.sdf(state.eps_c, eps_next)?;
        for (&zy, &wy) in gh.nodes.iter().zip(&gh.weights) {
            let logy_next = step_log_y(&params, state.log_y(), zy);
            let rs = m2.stock_return(&state, eps_next, logy_next)?;
            e_m_rs += we * wy * m * rs;
        }
        e_m += we * m;
    }
    println!(
        "model 2 residuals at (1.05, 21.07): stock {:.3e}, bond {:.3e}",
        (e_m_rs - 1.0).abs(),
        (e_m * prices.r_f - 1.0).abs()
    );
    Ok(())
}
