//! Translation operators on the truncated Hermite space and the empirical
//! polynomial-growth scan for their `S_p` norms.

mod expm;
mod generator;
mod quadrature;
mod scan;

pub use expm::{accuracy_envelope, shell_leakage, translate_expm, Translation, Translator, ENVELOPE_FACTOR};
pub use generator::{expm_pade, DerivativeStencil};
pub use quadrature::translate_quadrature;
pub use scan::{norm_bound_scan, spread_directions, ScanEcho, TranslationReport, DEGREE_SLACK, SCAN_DIRECTIONS};
