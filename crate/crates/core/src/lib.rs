//! Anisotropic two-photon quantum Rabi model.
//!
//! `H = -Δ/2 σx + a†a + g(1+r)/2 σz(a² + a†²) + g(1-r)/2 iσy(a² - a†²)`, with ω = 1.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `f64`
//! aliases at the crate root cover the common case.

pub mod aa;
pub mod analysis;
pub mod collapse1d;
pub mod ed;
pub mod error;
pub mod linalg;
pub mod model;
pub mod quench;
pub mod scan;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{critical_params, geometry, Bargmann, Parity, SectorSpec};
pub use scalar::Real;

pub type ModelParams = model::ModelParams<f64>;
pub type CriticalGeometry = model::CriticalGeometry<f64>;
pub type EdOptions = ed::EdOptions<f64>;
pub type SpectrumResult = ed::SpectrumResult<f64>;
pub type GroundStateObservables = ed::GroundStateObservables<f64>;
pub type QfiResult = ed::QfiResult<f64>;
pub type WignerGrid = ed::WignerGrid<f64>;
pub type AALevel = aa::AALevel<f64>;
pub type AAMatrixElement = aa::AAMatrixElement<f64>;
pub type FitResult = analysis::FitResult<f64>;
pub type SampleGrid = analysis::SampleGrid<f64>;
pub type QuenchProtocol = quench::QuenchProtocol<f64>;
pub type QuenchResult = quench::QuenchResult<f64>;
pub type KZPrediction = quench::KZPrediction<f64>;
pub type BoundStateLadder = collapse1d::BoundStateLadder<f64>;
pub type Collapse1DProblem = collapse1d::Collapse1DProblem<f64>;
