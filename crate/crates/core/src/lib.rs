//! Finite-volume simulation of the parabolic–elliptic chemotaxis–consumption system
//!
//! ```text
//! n_t = Δn − χ ∇·(n ∇c),   0 = Δc − n c        in Ω
//! ∂ν n = χ n ∂ν c,         ∂ν c = (γ − c) g    on ∂Ω
//! ```
//!
//! on intervals and rectangles, together with its stationary states and the energy
//! diagnostics used to check convergence towards them.
//!
//! The numerical modules are generic over the scalar type ([`Real`]); the aliases
//! below fix it to `f64`, which is what the configuration layer and the command line
//! use.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod scalar;
pub mod signal;
pub mod steady;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = grid::Mesh<f64>;
pub type CellField = grid::CellField<f64>;
pub type BoundaryData = grid::BoundaryData<f64>;
pub type SignalSolution = signal::SignalSolution<f64>;
pub type TransportState = transport::TransportState<f64>;
pub type StepReport = transport::StepReport<f64>;
pub type Problem = transport::Problem<f64>;
pub type Record = transport::Record<f64>;
pub type RunOutput = transport::RunOutput<f64>;
pub type StationaryState = steady::StationaryState<f64>;
pub type SteadySettings = steady::SteadySettings<f64>;
pub type EnergyReport = analysis::EnergyReport<f64>;
pub type KInputs = analysis::KInputs<f64>;
pub type TraceSettings = analysis::TraceSettings<f64>;

pub type Mesh32 = grid::Mesh<f32>;
pub type CellField32 = grid::CellField<f32>;
pub type BoundaryData32 = grid::BoundaryData<f32>;
