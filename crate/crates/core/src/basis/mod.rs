//! The tensor Hermite basis: index enumeration, stable evaluation of the
//! Hermite functions, Gauss-Hermite grids, and projection / synthesis.

mod eval;
mod index;
mod projection;
mod quadrature;

pub use eval::{hermite_eval_1d, hermite_eval_nd, hermite_functions, hermite_functions_into, H0_AT_ZERO};
pub use index::{binomial, enumerate_indices, IndexSet, MultiIndex};
pub use projection::{project_function, project_grid_values, synthesize, synthesize_on_grid};
pub use quadrature::{build_quad_grid, projection_nodes, QuadGrid, MAX_QUAD_NODES};

pub(crate) use eval::axis_tables;
pub(crate) use projection::{analysis_matrix, eval_matrix};
