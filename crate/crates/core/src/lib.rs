//! Numerical toolkit for the sub-Riemannian geometry of hypersurfaces in the
//! Heisenberg group H^n: the group itself, Carnot-Carathéodory geodesics, the
//! unit isoperimetric profile with its closed-form curvature identities,
//! generic T-graphs, weighted quadrature, variational functionals, and the
//! singular radial eigenproblem.

pub use nalgebra;

pub mod error;
pub mod geodesics;
pub mod heisenberg;
pub mod profile;
pub mod quadrature;
pub mod spectral;
pub mod tgraph;
pub mod variational;

pub use error::{GeomError, QuadError, SpectralError, VariationalError};
pub use heisenberg::{GroupContext, HVector, Point};
pub use quadrature::Hemisphere;
