//! Affine element maps and the covariant (curl-conforming) Piola
//! transform.
//!
//! For x = v₀ + J x̂ and u = J⁻ᵀ û, tangential traces are preserved,
//! curl u = (1/det J) J curl̂ û, and scalar gradients transform like u.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub v0: [f64; 3],
    /// Columns are v_i - v_0.
    pub j: [[f64; 3]; 3],
    pub det: f64,
    pub jinv: [[f64; 3]; 3],
}

impl AffineMap {
    pub fn new(verts: &[[f64; 3]; 4]) -> Result<Self> {
        let v0 = verts[0];
        let mut j = [[0.0; 3]; 3];
        for c in 0..3 {
            for r in 0..3 {
                j[r][c] = verts[c + 1][r] - v0[r];
            }
        }
        let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        if det.abs() < 1e-300 {
            return Err(Error::DegenerateTet(det.abs()));
        }
        let cof = |r: usize, c: usize| {
            let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
            let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
            j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]
        };
        let mut jinv = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                // adj(J)ᵀ / det: inverse entry (r, c) is cofactor (c, r) / det.
                jinv[r][c] = cof(c, r) / det;
            }
        }
        Ok(Self { v0, j, det, jinv })
    }

    pub fn map(&self, p: [f64; 3]) -> [f64; 3] {
        let mut x = self.v0;
        for r in 0..3 {
            for c in 0..3 {
                x[r] += self.j[r][c] * p[c];
            }
        }
        x
    }

    /// Covariant push-forward J⁻ᵀ v̂ of a reference field value (also the
    /// transform of a scalar gradient).
    pub fn push_vector(&self, v: [f64; 3]) -> [f64; 3] {
        let mut w = [0.0; 3];
        for r in 0..3 {
            for c in 0..3 {
                w[r] += self.jinv[c][r] * v[c];
            }
        }
        w
    }

    /// Push-forward (1/det J) J ĉ of a reference curl value.
    pub fn push_curl(&self, c: [f64; 3]) -> [f64; 3] {
        let mut w = [0.0; 3];
        for r in 0..3 {
            for k in 0..3 {
                w[r] += self.j[r][k] * c[k];
            }
            w[r] /= self.det;
        }
        w
    }
}
