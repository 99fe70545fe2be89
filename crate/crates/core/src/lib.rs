//! Computation with Sp(2)Sp(1)- and Spin(7)-structures on 8-manifolds described
//! by orthonormal coframes.
//!
//! The crate is layered bottom-up:
//!
//! - [`scalar`] and [`jet`]: the coefficient fields (exact rationals, doubles,
//!   complex numbers, second-order jets).
//! - [`exterior`]: forms on an oriented 8-dimensional inner-product space.
//! - [`linalg`]: exact rational matrices, minimal polynomials, projectors.
//! - [`structures`]: the model 4-forms, their module projectors, the diamond
//!   operator, triple contraction and metric extraction.
//! - [`expr`]: a small expression language for coordinate-dependent
//!   structure functions.
//! - [`geometry`]: moving frames, Levi-Civita connection, curvature, intrinsic
//!   torsion, divergence, Lie and exterior derivatives.
//! - [`scenarios`]: ready-made geometries and the scenario file format.
//! - [`flow`]: the harmonic flow on symmetry ansatze, solitons and the
//!   Euclidean Theta functional.
//! - [`verify`] and [`cli`]: the verification battery and the command line.

pub mod cli;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod flow;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod scalar;
pub mod scenarios;
pub mod structures;
pub mod verify;

pub use error::{Error, Result};
pub use exterior::{Form, Metric, Vector};
pub use jet::Jet;
pub use scalar::{CRational, Rational, Scalar, C64};
pub use structures::{StructureForm, StructureKind};
