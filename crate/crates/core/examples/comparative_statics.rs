//! Comparative statics of the closed-form model: the risk-free rate falls
//! and the price-dividend ratio rises in the growth state, and the signs of
//! the loss-aversion derivatives flip at interior CDF thresholds.

use refprice::model2::Model2;
use refprice::preferences::PreferenceParams;
use refprice::processes::{cdf_eps, MarketState, ProcessParams};

fn main() -> Result<(), refprice::Error> {
    let params = ProcessParams::calibrated();
    let prefs = PreferenceParams::new(0.98, 4.0, 1.0, 2.0, 0.0)?;
    let model = Model2::with_defaults(prefs, params)?;

    // monotonicity in the growth state
    let mut last: Option<(f64, f64)> = None;
    let mut monotone = true;
    for i in 0..100 {
        let eps = 0.90 + 0.30 * i as f64 / 99.0;
        let p = model.price(&MarketState::new(eps, 21.07)?)?;
        if let Some((rf_prev, pd_prev)) = last {
            monotone &= p.r_f < rf_prev && p.pd > pd_prev;
        }
        last = Some((p.r_f, p.pd));
    }
    println!("r_f strictly decreasing and pd strictly increasing over 100 growth states: {monotone}");

    // sign flips of d r_f / d lambda and d pd / d lambda at the thresholds
    let (rf_th, pd_th) = model.statics_thresholds(21.07f64.ln())?;
    println!("thresholds on F(eps): risk-free {rf_th:.4}, price-dividend {pd_th:.4}");
    let d = 1e-5;
    let hi = PreferenceParams::new(0.98, 4.0, 1.0, 2.0 + d, 0.0)?;
    let model_hi = Model2::with_defaults(hi, params)?;
    for f_target in [rf_th - 0.05, rf_th + 0.05] {
        // invert the CDF by bisection to land on the requested level
        let (mut lo, mut up) = (0.5f64, 2.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + up);
            if cdf_eps(&params, mid)? < f_target { lo = mid } else { up = mid }
        }
        let eps = 0.5 * (lo + up);
        let drf = (model_hi.risk_free(eps)? - model.risk_free(eps)?) / d;
        println!("at F(eps) = {f_target:.3}: d r_f / d lambda = {drf:+.4}");
    }
    Ok(())
}
