//! Shallow-water moment models in one space dimension: the shallow water
//! equations, the moment equations of arbitrary order, their reduced
//! Chapman-Enskog closure and its hyperbolic regularisation, together with a
//! path-conservative finite-volume solver.

pub mod basis;
pub mod cli;
pub mod closure;
pub mod error;
mod exact;
pub mod models;
pub mod scenarios;
pub mod solver;

pub use basis::{build_basis, build_tensors, MomentTensors, ScaledLegendreBasis};
pub use closure::{compute_constants, constants_for_order, lemma_b1_check, reconstruct_moments, ClosureConstants};
pub use error::{Error, Result};
pub use models::{Model, ModelFamily, ModelSpec, PhysicalParams, State};
