//! Finite element computation of Maxwell transmission eigenvalues in
//! anisotropic media.
//!
//! The eigenproblem couples two curl-conforming fields that share a
//! tangential trace on the boundary. Discretization uses first-family
//! edge elements (orders 0 and 1) for the field pair and continuous
//! Lagrange elements one degree higher for a pair of scalar multipliers
//! that enforce the divergence-free constraint. The resulting saddle-point
//! pencil
//!
//! ```text
//! K = [A  B ]        M = [C  0]
//!     [Bᴴ 0 ]            [0  0]
//! ```
//!
//! is solved by shift-invert Arnoldi for the eigenvalues λ = k² nearest a
//! target, with a dense generalized eigendecomposition as an independent
//! oracle on coarse meshes.

pub mod assembly;
pub mod coefficients;
pub mod eigensolver;
pub mod elements;
pub mod error;
pub mod harness;
pub mod io;
pub mod mesh;
pub mod spaces;
pub mod sparse;
pub mod verification;

pub use error::{Error, Result};
pub use mesh::TetMesh;

/// Complex scalar used throughout assembly and eigensolves.
pub type Complex = num_complex::Complex<f64>;

/// Cap the linear-algebra backend's parallelism; 1 forces sequential
/// execution.
pub fn set_threads(threads: usize) {
    let par = if threads <= 1 {
        faer::Par::Seq
    } else {
        faer::Par::rayon(threads)
    };
    faer::set_global_parallelism(par);
}
