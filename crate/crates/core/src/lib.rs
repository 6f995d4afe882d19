//! Finite-difference schemes for the Korteweg-de Vries equation
//! `u_t + u u_x + δ² u_xxx = 0` that preserve its Lie point symmetries
//! (shifts, dilation and Galilean boosts) on moving meshes, together with
//! the exact solutions and diagnostics needed to test them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod diagnostics;
pub mod driver;
pub mod elliptic;
pub mod error;
pub mod mesh;
pub mod projection;
pub mod schemes;
pub mod solutions;

pub use error::{KdvError, Result};
pub use mesh::{BoundaryKind, MeshAnchor, MeshLayer, MonitorKind};
pub use schemes::{MeshStrategy, SchemeConfig, SchemeKind};

pub use solutions::{GroupElement, KdvSolution};
