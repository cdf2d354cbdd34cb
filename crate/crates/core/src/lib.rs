//! Numerical checks of spectral scalar curvature rigidity on rotationally
//! symmetric warped bands `dt² + ρ(t)² g_{S^{n−1}}` with weights `u(t)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod cone;
pub mod convergence;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod model;
pub mod profile;
pub mod quadrature;
pub mod sphere;
pub mod stability;
pub mod variation;

pub use error::{Error, Result};
pub use geometry::{SliceGeometry, SymmetricBand};
pub use model::{ModelMetric, ModelSign, ModelSpec};
pub use profile::{Jet, Prescription, Shape, WarpingProfile};
