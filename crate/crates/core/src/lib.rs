//! Seamless blending of pre-aligned, overlapping images by osmosis
//! filtering.
//!
//! An osmosis filter is a linear drift-diffusion evolution
//! `du/dt = Laplace(u) - div(d u)` whose steady state is shaped entirely by
//! the drift field `d`. Composing the canonical drift fields of the input
//! images along a seam and running the evolution to its steady state yields
//! a mosaic without visible seams; the filter's invariance under
//! multiplicative brightness changes makes it robust where exposures
//! differ. A gradient-domain (Poisson) baseline using the same seams and
//! solver machinery is included for comparison.
//!
//! The crate is generic over the scalar type via [`scalar::Scalar`]
//! (`f32`/`f64`); the aliases below fix `f64`, which all published
//! tolerances assume.
//!
//! Pipeline entry points: [`pipeline::blend`] for in-memory use,
//! [`pipeline::run_pipeline`] for manifest-to-file runs (what the
//! `osmoblend` binary wraps).

pub mod bicgstab;
pub mod canvas;
pub mod error;
pub mod field;
pub mod manifest;
pub mod metrics;
pub mod operator;
pub mod pipeline;
pub mod pnm;
pub mod poisson;
pub mod scalar;
pub mod seam;
pub mod solver;
pub mod synth;

pub use error::{BlendError, Result};
pub use scalar::Scalar;

/// Default-precision aliases; the CLI and the acceptance suite use these.
pub type Canvas64 = canvas::Canvas<f64>;
pub type AlignedInput64 = canvas::AlignedInput<f64>;
pub type StaggeredField64 = field::StaggeredField<f64>;
pub type Seam64 = seam::Seam<f64>;
pub type SparseOperator64 = operator::SparseOperator<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type PipelineConfig64 = pipeline::PipelineConfig<f64>;
pub type BlendReport64 = pipeline::BlendReport<f64>;
