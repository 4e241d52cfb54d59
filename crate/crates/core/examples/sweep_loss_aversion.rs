//! Comparative statics by simulation: sweep the loss-aversion coefficient
//! and watch the risk-free rate fall and the equity premium rise.

use refprice::montecarlo::{sweep, ModelChoice, SimConfig, SweepAxis};
use refprice::numerics::DEFAULT_GRID;
use refprice::preferences::PreferenceParams;
use refprice::processes::ProcessParams;

fn main() -> Result<(), refprice::Error> {
    let prefs = PreferenceParams::new(0.98, 4.0, 1.0, 2.0, 0.0)?;
    let rows = sweep(
        &prefs,
        &ProcessParams::calibrated(),
        ModelChoice::Two,
        SweepAxis::Lambda,
        &[1.0, 1.5, 2.0, 2.5, 3.0],
        21,
        DEFAULT_GRID,
        &SimConfig::default(),
    )?;

    println!("lambda   rf_mean  pd_mean  erp_mean");
    for (lambda, m) in &rows {
        println!("{lambda:<7}  {:.4}   {:.4}   {:.4}", m.rf_mean, m.pd_mean, m.erp_mean);
    }
    Ok(())
}
