//! Grid solve of the general model (model 1): integral-equation fixed point,
//! solver diagnostics, cache round trip, and pricing from the solution.

use refprice::model1::Model1;
use refprice::numerics::{GridFunction, GridMeta};
use refprice::preferences::PreferenceParams;
use refprice::processes::{MarketState, ProcessParams};

fn main() -> Result<(), refprice::Error> {
    let prefs = PreferenceParams::baseline();
    let model = Model1::with_defaults(prefs, ProcessParams::calibrated())?;
    let sol = model.solve_default()?;
    println!(
        "solved in {} iterations, residual {:.3e}, contraction ratio {:.4}",
        sol.iterations, sol.final_residual, sol.contraction_ratio
    );

    let state = MarketState::new(1.05, 21.07)?;
    let prices = model.price(&sol, &state)?;
    println!("prices at (1.05, 21.07): r_f {:.4}, pd {:.4}, premium {:.4}", prices.r_f, prices.pd, prices.erp);

    // save the grid and reload it; prices from the cache are identical
    let dir = std::env::temp_dir().join("refprice_example_cache");
    std::fs::create_dir_all(&dir)?;
    let base = dir.join("h");
    let meta = GridMeta {
        eps_axis: sol.h.eps_axis.clone(),
        logy_axis: sol.h.logy_axis.clone(),
        tolerance: sol.tolerance,
        iterations: sol.iterations,
        residual: sol.final_residual,
        clamp_count: sol.clamp_count,
    };
    sol.h.save(&base, &meta)?;
    let (h, _) = GridFunction::load(&base)?;
    let reloaded = refprice::model1::HSolution { h, ..sol.clone() };
    let again = model.price(&reloaded, &state)?;
    assert_eq!(prices.pd, again.pd);
    println!("cache round trip reproduces prices bit-exactly ({})", base.display());
    Ok(())
}
