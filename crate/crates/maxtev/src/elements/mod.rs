//! Reference elements: quadrature, Lagrange and edge bases, and the
//! covariant element transform.

pub mod edge;
pub mod lagrange;
pub mod poly;
pub mod quadrature;
pub mod transform;

pub use edge::{dof_transform, ref_dofs, EdgeBasis, REF_VERTS};
pub use lagrange::LagrangeBasis;
pub use quadrature::{segment_quadrature, tet_quadrature, triangle_quadrature, QuadRule};
pub use transform::AffineMap;
