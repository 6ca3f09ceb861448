//! Taguchi design-of-experiments toolkit for hyperparameter search over a
//! small sequential CNN binary classifier.
//!
//! The crate is organised around the experiment lifecycle:
//!
//! - [`doe`] constructs and validates orthogonal arrays and turns factor
//!   catalogs into concrete experiment plans.
//! - [`analysis`] computes interval summaries, main effects, S/N ratios and
//!   the predicted-optimal configuration from a response table.
//! - [`nn`] is a from-scratch sequential CNN: tensors, convolution, pooling,
//!   dense head, hinge losses, SGD/Adam and a deterministic training loop.
//! - [`synthdata`] procedurally generates a balanced two-class dataset of
//!   nut-face images with synthetic surface defects.
//! - [`harness`] orchestrates studies end to end and backs the `doetune` CLI.

pub mod analysis;
pub mod doe;
pub mod harness;
pub mod nn;
pub mod synthdata;
