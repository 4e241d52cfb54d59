//! Conditional price curves for plotting: prices against the growth state at
//! a fixed consumption-dividend ratio, and against the ratio at fixed growth.

use refprice::model1::Model1;
use refprice::montecarlo::{conditional_series, ModelRef, StateAxis};
use refprice::preferences::PreferenceParams;
use refprice::processes::ProcessParams;

fn main() -> Result<(), refprice::Error> {
    let params = ProcessParams::calibrated();
    let model = Model1::with_defaults(PreferenceParams::baseline(), params)?;
    let sol = model.solve_default()?;
    let mref = ModelRef::One(&model, &sol);

    println!("growth-state sweep at Y = 21.07:");
    println!("eps_c   r_f      pd       premium");
    let eps: Vec<f64> = (0..7).map(|i| 0.9 + 0.05 * i as f64).collect();
    for row in conditional_series(&mref, StateAxis::EpsC, &eps, 21.07)? {
        println!("{:<5}   {:.4}   {:.3}   {:.4}", row.x, row.rf, row.pd, row.erp);
    }

    println!("\nratio sweep at eps_c = 1.05 (risk-free rate stays nearly flat):");
    println!("Y       r_f      pd       premium");
    let ys: Vec<f64> = (0..7).map(|i| 12.0 + 3.0 * i as f64).collect();
    for row in conditional_series(&mref, StateAxis::Y, &ys, 1.05)? {
        println!("{:<5}   {:.4}   {:.3}   {:.4}", row.x, row.rf, row.pd, row.erp);
    }
    Ok(())
}
