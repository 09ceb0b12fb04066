//! Gaussian quadrature on the reference segment, triangle, and tetrahedron.
//!
//! Simplex rules are conical products: the Duffy map collapses the simplex
//! onto a box and the collapse Jacobian `(1-η)(1-ζ)²` is absorbed into
//! Gauss-Jacobi weights, so a rule with `p` points per direction integrates
//! polynomials of total degree `2p - 1` exactly. Nodes and weights come from
//! Golub-Welsch on the Jacobi recurrence.

use faer::linalg::solvers::SelfAdjointEigen;
use faer::{Mat, Side};

/// Quadrature rule on the reference tetrahedron
/// `{x ≥ 0, y ≥ 0, z ≥ 0, x + y + z ≤ 1}`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Gauss-Jacobi nodes and weights for `∫₀¹ f(t) (1-t)^α dt`.
///
/// `alpha = 0` is Gauss-Legendre. Exact for `deg f ≤ 2n - 1`.
pub fn gauss_jacobi_01(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let a = alpha as f64;
    // Symmetric tridiagonal Jacobi matrix for the (α, 0) recurrence on [-1, 1].
    let mut j = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        j[(k, k)] = if k == 0 {
            -a / (a + 2.0)
        } else {
            -a * a / ((2.0 * kf + a) * (2.0 * kf + a + 2.0))
        };
        if k >= 1 {
            let b = 2.0 * kf * (kf + a)
                / ((2.0 * kf + a) * ((2.0 * kf + a + 1.0) * (2.0 * kf + a - 1.0)).sqrt());
            j[(k, k - 1)] = b;
            j[(k - 1, k)] = b;
        }
    }
    let evd = SelfAdjointEigen::new(j.as_ref(), Side::Lower).expect("tridiagonal EVD");
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);
    let scale = 2f64.powf(-a - 1.0);
    let mut nw: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = evd.S().column_vector()[i];
            let q = evd.U()[(0, i)];
            // Map [-1, 1] with weight (1-x)^α to [0, 1] with weight (1-t)^α.
            ((1.0 + x) / 2.0, scale * mu0 * q * q)
        })
        .collect();
    nw.sort_by(|p, q| p.0.total_cmp(&q.0));
    nw.into_iter().unzip()
}

/// Gauss-Legendre rule for `∫₀¹ f(t) dt`, exact for `deg f ≤ degree`.
pub fn segment_quadrature(degree: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_01(degree / 2 + 1, 0)
}

/// Rule on the reference triangle `{x ≥ 0, y ≥ 0, x + y ≤ 1}`, exact for
/// total degree ≤ `degree`.
pub fn triangle_quadrature(degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let p = degree / 2 + 1;
    let (xi, wxi) = gauss_jacobi_01(p, 0);
    let (eta, weta) = gauss_jacobi_01(p, 1);
    let mut points = Vec::with_capacity(p * p);
    let mut weights = Vec::with_capacity(p * p);
    for (&e, &we) in eta.iter().zip(&weta) {
        for (&x, &wx) in xi.iter().zip(&wxi) {
            points.push([x * (1.0 - e), e]);
            weights.push(wx * we);
        }
    }
    (points, weights)
}

/// Rule on the reference tetrahedron, exact for total degree ≤ `degree`.
pub fn tet_quadrature(degree: usize) -> QuadRule {
    let p = degree / 2 + 1;
    let (xi, wxi) = gauss_jacobi_01(p, 0);
    let (eta, weta) = gauss_jacobi_01(p, 1);
    let (zeta, wzeta) = gauss_jacobi_01(p, 2);
    let mut points = Vec::with_capacity(p * p * p);
    let mut weights = Vec::with_capacity(p * p * p);
    for (&z, &wz) in zeta.iter().zip(&wzeta) {
        for (&e, &we) in eta.iter().zip(&weta) {
            for (&x, &wx) in xi.iter().zip(&wxi) {
                points.push([x * (1.0 - e) * (1.0 - z), e * (1.0 - z), z]);
                weights.push(wx * we * wz);
            }
        }
    }
    QuadRule { points, weights }
}
