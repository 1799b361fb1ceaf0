//! Axisymmetric finite-element solver for weakly coupled magneto-thermal
//! simulation of devices with homogenized foil windings.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod coupling;
pub mod error;
pub mod fem;
pub mod foil_winding;
pub mod materials;
pub mod mesh;
pub mod mqs;
pub mod post;
pub mod run;
pub mod sparse;
pub mod thermal;

pub use error::{Error, Result};
