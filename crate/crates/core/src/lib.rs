//! Optimal post-processing of homodyne records for joint σx/σz measurement
//! of a decaying two-level atom.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: 2×2 matrices, the decay generator and its semigroup.
//! * [`special`]: `erf`, the integrals `I(ε)`, `J(ε)` and adaptive quadrature.
//! * [`density`]: law of the normalized weighted-path endpoint `Y_t`.
//! * [`pointers`]: pointer families and their unbiasedness constraints.
//! * [`quality`]: the worst-case added variance `σ²` of a pointer.
//! * [`optimizer`]: minimax search over the pointer families.
//! * [`pointer_density`]: Frobenius–Perron densities of the optimal pointers.
//! * [`simulate`]: Monte Carlo sampling and homodyne filtering.
//! * [`verify`]: oracle suites checking every closed form independently.

pub mod algebra;
pub mod csv_format;
pub mod density;
pub mod error;
pub mod optimizer;
pub mod pointer_density;
pub mod pointers;
pub mod presets;
pub mod quality;
pub mod reproduce;
pub mod simulate;
pub mod special;
pub mod verify;

pub use algebra::{BlochVector, Hermitian2, Mat2};
pub use density::TimeHorizon;
pub use error::{Error, Result};
pub use optimizer::OptimizationResult;
pub use pointer_density::DensityGrid;
pub use pointers::{ConstraintSolution, PointerFunction};
pub use quality::QualityReport;
pub use simulate::{EndpointSample, SimConfig, SimMethod};

/// Version string written into every output file header.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
