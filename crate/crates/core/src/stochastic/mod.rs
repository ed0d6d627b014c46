//! Brownian sampling, Monte Carlo averages of random translates, the
//! pathwise Ito formula for `tau_{X_t} phi`, and the monotonicity constant.
//!
//! Every stochastic result is a function of its inputs and a master seed:
//! sample or path `i` draws from ChaCha stream `i`, and reductions run over
//! fixed chunks in index order.

mod ito;
mod mc;
mod monotonicity;
mod path;
mod rng;

pub use ito::{
    ito_convergence, ito_residual, martingale_check, sde_solution_check, stochastic_integral, time_averaged_energy,
    Covariation, EnergyEstimate, ItoConvergenceReport, ItoRefinementRow, ItoResidualReport, ItoScanConfig,
    MartingaleReport, SdeReport, ENERGY_TOLERANCE, ISOMETRY_TOLERANCE, ITO_ORDER_RANGE, MONOTONE_SLACK,
};
pub use mc::{mc_expectation, MCEstimate, MC_CHUNK};
pub use monotonicity::{
    monotonicity_ratio, monotonicity_scan, monotonicity_supremum, MonotonicityReport, MONOTONICITY_DRAWS,
};
pub use path::{brownian_ensemble, realized_covariation, sample_brownian, sample_brownian_stream, BrownianPath};
pub use rng::{gaussian_vector, stream_rng};
