//! Closed-form conditional prices (model 2): risk-free rate, price-dividend
//! ratio and equity premium across good, average and bad growth states.

use refprice::model2::Model2;
use refprice::preferences::PreferenceParams;
use refprice::processes::{MarketState, ProcessParams};

fn main() -> Result<(), refprice::Error> {
    let prefs = PreferenceParams::new(0.98, 4.0, 1.0, 2.0, 0.0)?;
    let model = Model2::with_defaults(prefs, ProcessParams::calibrated())?;

    println!("eps_c    r_f      pd       E[R_S]   premium");
    for eps in [0.93, 1.05, 1.17] {
        let state = MarketState::new(eps, 21.07)?;
        let p = model.price(&state)?;
        println!("{eps:<7}  {:.4}  {:.4}  {:.4}  {:.4}", p.r_f, p.pd, p.e_rs, p.erp);
    }

    // the stochastic discount factor prices one-period claims directly
    let m_good_to_bad = model.sdf(1.05, 0.93)?;
    let m_good_to_good = model.sdf(1.05, 1.17)?;
    println!("\nSDF from an average state: to a bad state {m_good_to_bad:.4}, to a good state {m_good_to_good:.4}");
    println!("consumption-wealth ratio at the average state: {:.5}", model.cw_ratio(&MarketState::new(1.05, 21.07)?)?);
    Ok(())
}
