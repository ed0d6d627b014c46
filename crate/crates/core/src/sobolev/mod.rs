//! Coefficient-space calculus on the Hermite-Sobolev scale `S_p`.
//!
//! The ladder operators follow `A_j^+ h_k = sqrt(2(k_j + 1)) h_{k+e_j}` and
//! `A_j h_k = sqrt(2 k_j) h_{k-e_j}`. With those weights the commutator is
//! `[A_j, A_j^+] = 2 I`; the unit-commutator convention corresponds to the
//! rescaled pair `A_j / sqrt 2`, `A_j^+ / sqrt 2`.
//!
//! The Fourier transform is the unitary one, `F h_k = (-i)^{|k|} h_k`, which
//! carries the `(2 pi)^{-d/2}` normalization.

mod coeffs;
mod ensemble;
mod equivalence;
mod io;
mod operators;

pub use coeffs::{HermiteCoeffs, REAL_TOLERANCE};
pub use ensemble::{margin_ensemble, random_coeffs};
pub use equivalence::{norm_equivalence_check, NormEquivalence};
pub use io::{CoeffFile, ORDERING};
pub use operators::{
    apply_complex_power, apply_derivative, apply_hp, apply_laplacian, apply_lower, apply_position, apply_raise,
    apply_second_derivative, delta_coeffs, fourier, sobolev_inner, sobolev_norm, Direction, SobolevOrder,
};
