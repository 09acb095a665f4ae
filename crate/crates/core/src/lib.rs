//! Standing waves of the nonlinear Schrödinger equation on a star graph
//! with a δ interaction at the vertex.
//!
//! Profiles, slope conditions, linearized spectra, stability verdicts and
//! time evolution, all generic over the scalar type ([`Real`] is implemented
//! for `f32` and `f64`). The `*F64` and `*F32` aliases fix the scalar.
//!
//! ```
//! use nls_star::{verdict::classify_analytic, ProfileSpecF64, Verdict};
//!
//! let spec = ProfileSpecF64::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
//! assert_eq!(classify_analytic(&spec).unwrap().verdict, Verdict::UnstableInE);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod graph;
pub mod profiles;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod slope;
pub mod spectral;
pub mod star_matrix;
pub mod sweep;
pub mod verdict;

pub use dynamics::{EvolutionConfig, OrbitTrace, PerturbationMode};
pub use error::{Error, Result};
pub use graph::{GraphFunction, GridSpec, Sector, StarGraph};
pub use profiles::{Nonlinearity, ProfileFamily, ProfileSpec};
pub use scalar::Real;
pub use slope::{POmega, SlopeResult};
pub use spectral::{OperatorKind, SpectrumSummary};
pub use sweep::SweepSpec;
pub use verdict::{StabilityReport, Verdict};

pub type GraphFunctionF64 = GraphFunction<f64>;
pub type GraphFunctionF32 = GraphFunction<f32>;
pub type GridSpecF64 = GridSpec<f64>;
pub type GridSpecF32 = GridSpec<f32>;
pub type StarGraphF64 = StarGraph<f64>;
pub type StarGraphF32 = StarGraph<f32>;
pub type ProfileSpecF64 = ProfileSpec<f64>;
pub type ProfileSpecF32 = ProfileSpec<f32>;
pub type SlopeResultF64 = SlopeResult<f64>;
pub type SlopeResultF32 = SlopeResult<f32>;
pub type StabilityReportF64 = StabilityReport<f64>;
pub type StabilityReportF32 = StabilityReport<f32>;
pub type EvolutionConfigF64 = EvolutionConfig<f64>;
pub type EvolutionConfigF32 = EvolutionConfig<f32>;
pub type OrbitTraceF64 = OrbitTrace<f64>;
pub type OrbitTraceF32 = OrbitTrace<f32>;
pub type SweepSpecF64 = SweepSpec<f64>;
pub type SweepSpecF32 = SweepSpec<f32>;
