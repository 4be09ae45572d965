//! Generalized Taylor-Hood `Q_k`-`Q_{k-1}` pairs on quadrilateral and
//! parallelepiped meshes: assembly of the mixed divergence form, the
//! element-wise pressure-to-velocity map behind T-coercivity, and numerically
//! measured inf-sup constants, all at verification ("desk") scale.
//!
//! The crate is generic over the floating-point scalar (see [`Real`]);
//! concrete `f64` aliases for the main types live at the crate root.

pub mod assembly;
pub mod condition;
pub mod eig;
pub mod error;
pub mod geometry;
pub mod index;
pub mod infsup;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod real;
pub mod toperator;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` aliases for the main toolkit types.
pub type QuadratureRule1D64 = quadrature::QuadratureRule1D<f64>;
pub type TensorRule64 = quadrature::TensorRule<f64>;
pub type LagrangeBasis1D64 = poly::LagrangeBasis1D<f64>;
pub type TensorPolynomial64 = poly::TensorPolynomial<f64>;
pub type GeometryMap64 = geometry::GeometryMap<f64>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type NodeTable64 = mesh::NodeTable<f64>;
pub type FemSystem64 = assembly::FemSystem<f64>;
pub type TOperator64 = toperator::TOperator<f64>;
pub type EigenSolution64 = eig::EigenSolution<f64>;

/// `f32` aliases, mainly for quick smoke checks.
pub type QuadratureRule1D32 = quadrature::QuadratureRule1D<f32>;
pub type GeometryMap32 = geometry::GeometryMap<f32>;
pub type Mesh32 = mesh::Mesh<f32>;
