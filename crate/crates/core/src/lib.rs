//! Equilibrium asset pricing in an endowment economy where the representative
//! agent has expectations-based reference-dependent preferences and the
//! consumption-dividend ratio is stochastic.
//!
//! The crate solves two nested models:
//!
//! * **Model II** ([`model2`]) — contemporaneous gain-loss utility only.
//!   Risk-free rate, price-dividend ratio, stock return and equity risk
//!   premium are available in closed form (up to one-dimensional Gaussian
//!   expectations evaluated by quadrature).
//! * **Model I** ([`model1`]) — contemporaneous *and* prospective gain-loss
//!   utility. Prices depend on an auxiliary surface `h(eps_c, Y)` that solves
//!   an integral fixed-point equation; the solver iterates a contraction
//!   operator on a 2-D grid.
//!
//! Supporting modules: [`processes`] (state dynamics and calibration),
//! [`preferences`] (the utility kernel), [`numerics`] (quadrature, grids,
//! fixed-point and root-finding drivers), [`montecarlo`] (simulated panels
//! and moment tables) and [`cli`] (configuration and command dispatch).

pub mod cli;
pub mod model1;
pub mod model2;
pub mod montecarlo;
pub mod numerics;
pub mod preferences;
pub mod processes;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
