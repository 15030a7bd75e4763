//! Compatible n-triads, the multi-Cauchy–Riemann operator and
//! `(n+1)`-energy minimization for maps from periodic boxes into flat tori.
//!
//! Every numerical type is generic over the scalar (`f32` or `f64`, see
//! [`Real`]); the `*64` and `*32` aliases below fix it.

pub mod cli;
pub mod error;
pub mod exterior;
pub mod gridmap;
pub mod linalg;
pub mod octonion;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod triad;

pub use error::{Error, Result};
pub use exterior::{ext_power, hodge_star, hs_norm, wedge, LinearMap, MultiVector};
pub use gridmap::{energy_report, DiagnosticsReport, GridMap};
pub use octonion::{associator, cross7, oct_mul, triple_cross, ImOctonion, Octonion};
pub use scalar::Real;
pub use solver::{energy_gradient, minimize_energy, verify_solution, FlowHistory, SolverConfig};
pub use triad::{apply_j, apply_k, check_compatibility, make_triad, Family, Triad};

pub type MultiVector64 = MultiVector<f64>;
pub type MultiVector32 = MultiVector<f32>;
pub type LinearMap64 = LinearMap<f64>;
pub type LinearMap32 = LinearMap<f32>;
pub type Octonion64 = Octonion<f64>;
pub type Octonion32 = Octonion<f32>;
pub type Triad64 = Triad<f64>;
pub type Triad32 = Triad<f32>;
pub type GridMap64 = GridMap<f64>;
pub type GridMap32 = GridMap<f32>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
