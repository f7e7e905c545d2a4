//! Quantum graphs, quantum-to-classical graph homomorphism games and
//! synchronous correlations, with every structural claim exposed as a
//! numerical residual check.

pub mod algebra;
pub mod coloring;
pub mod correlation;
pub mod error;
pub mod exec;
pub mod game;
pub mod graph;
pub mod matrix;
pub mod report;
pub mod sample;
pub mod strategy;

pub use algebra::{Block, Space, VnAlgebra};
pub use coloring::{Bound, BoundsReport, ColoringReport, Model};
pub use correlation::{ClassicalCorrelation, Correlation};
pub use error::{Error, Result};
pub use exec::Exec;
pub use game::{ChannelRep, CompleteGraphRep, GameInstance};
pub use graph::{ClassicalGraph, EdgeBasis, QuantumGraph};
pub use matrix::{CMatrix, Tolerance, C64};
pub use report::{Check, Report, Witness};
pub use strategy::{BlockStrategy, TensorStrategy, TracialAncilla};
