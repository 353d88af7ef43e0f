//! Functional-data classification lab.
//!
//! Observations are random functions on `[0, 1]` stored as basis
//! coefficients ([`basis`]). The [`datagen`] module simulates the two
//! benchmark laws (a Gaussian law with decaying mean differences, and a
//! uniform location law with bounded support), [`conditions`] evaluates the
//! Delaigle–Hall and hard-margin diagnostics, [`rkhs`] is the Gaussian-kernel
//! logistic classifier, and [`baselines`] holds five comparison methods.
//! [`modelsel`] tunes hyperparameters on a grid and [`experiment`] runs
//! seeded Monte-Carlo error-rate studies and exports CSV/SVG.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod basis;
pub mod classifier;
pub mod cli;
pub mod conditions;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod modelsel;
pub mod rkhs;
pub mod rng;

pub use error::{Error, Result};
