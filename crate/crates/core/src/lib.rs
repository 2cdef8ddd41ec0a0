//! Truncated spectral triples for the circle and the 2-sphere, higher
//! Heisenberg defects, thermal annealing over Hermitian operators and Weyl
//! estimators.

pub mod analytic;
pub mod anneal;
pub mod error;
pub mod heisenberg;
pub mod io;
pub mod linalg;
pub mod spectral;
pub mod triples;

pub use error::{Error, Result};
pub use heisenberg::{DefectReport, DEFAULT_KAPPA};
pub use linalg::{ComplexMatrix, SchattenNorms, Spectrum};
pub use spectral::EstimateReport;
pub use triples::{build_circle, build_sphere, CircleTriple, HalfInt, Model, SphereTriple};
