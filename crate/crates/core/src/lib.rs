//! Between-group gap decomposition for binary outcomes.
//!
//! The crate fits survey-weighted probit models and splits a difference in
//! outcome rates between two groups into a part explained by covariate
//! distributions and an unexplained remainder, using either the linear
//! Oaxaca-Blinder identity or the Fairlie non-linear decomposition with
//! per-covariate contributions and bootstrap inference.
//!
//! * [`dataio`] loads CSV microdata, encodes design matrices and computes
//!   weighted descriptive statistics.
//! * [`probit`] estimates the probit model and its marginal effects.
//! * [`decomp`] holds the decomposition engine.
//! * [`synth`] generates synthetic data from known processes and provides
//!   brute-force reference decompositions.
//! * [`cli`] is the configuration and reporting layer behind the binary.

pub mod cli;
pub mod dataio;
pub mod decomp;
pub mod error;
pub mod model;
pub mod normal;
pub mod probit;
pub mod rng;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use model::{Covariate, CovariateKind, MissingPolicy, ModelSpec, RowFilter};
