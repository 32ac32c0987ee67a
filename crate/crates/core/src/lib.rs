//! Spherical harmonics on S^2 and the geometry of their nodal sets.
//!
//! - [`legendre`]: Legendre polynomials, roots, Gauss nodes, and the
//!   smallest-zonal-circle angle with its Bessel-zero bound.
//! - [`harmonics`]: the pinned orthonormal real basis, zonal reproducing
//!   kernel, quadrature, gradients, and uniform sampling.
//! - [`prescribed_zeros`]: determinant construction of harmonics vanishing
//!   on prescribed point sets, and kernel interpolation.
//! - [`nullcone`]: restriction to the complex null cone, pole extraction,
//!   the structured determinant identity, and reconstruction from poles.
//! - [`nodal_geometry`]: nodal-curve tracing on an icosphere, length by
//!   mesh and by Crofton sampling, inner radius, common zeros with the
//!   Bezout bound, and critical points.
//! - [`mean_measure`]: closed-form mean Hausdorff measures of intersected
//!   nodal sets on S^m and their Monte Carlo verification on S^2.

pub mod error;
pub mod harmonics;
pub mod legendre;
pub mod mean_measure;
pub mod mesh;
pub mod nodal_geometry;
pub mod nullcone;
pub mod poly;
pub mod prescribed_zeros;
mod polyroots;
pub mod rng;
pub mod sphere;

pub use error::{Error, Result};
pub use harmonics::{HarmonicField, RealHarmonic, ZonalKernel};
pub use mesh::SphereMesh;
pub use sphere::SpherePoint;
