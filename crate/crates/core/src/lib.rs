//! Boundary vortex and fluid charge methods for two-dimensional ideal flow
//! outside a smooth obstacle.
//!
//! The crate covers the obstacle geometry, boundary meshes, the dense kernel
//! matrices, the two discrete boundary solvers, velocity evaluators, an exact
//! exterior-disk oracle and a vortex blob time stepper.

pub mod charge_method;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod fit;
pub mod geometry;
pub mod kernel_ops;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod oracle;
pub mod quad;
pub mod vec2;
pub mod vortex_method;

pub use error::{Error, Result};
pub use geometry::{BoundaryCurve, CurvePoint, CurveSpec};
pub use mesh::{BoundaryMesh, MeshFlavor};
pub use vec2::Vec2;
