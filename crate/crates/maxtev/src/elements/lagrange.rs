//! Continuous Lagrange elements on the reference tetrahedron, degrees 1
//! and 2. Degree-2 edge DOFs are midpoint-based and therefore
//! orientation-free, so no per-element transformation is needed.

use crate::error::{Error, Result};
use crate::mesh::TET_EDGES;

/// Scalar nodal basis: 4 vertex functions for degree 1; 4 vertex plus 6
/// edge-midpoint functions (ordered as [`TET_EDGES`]) for degree 2.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub degree: usize,
    pub n_dofs: usize,
}

fn bary(p: [f64; 3]) -> [f64; 4] {
    [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]]
}

const BARY_GRADS: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        match degree {
            1 => Ok(Self { degree, n_dofs: 4 }),
            2 => Ok(Self { degree, n_dofs: 10 }),
            d => Err(Error::UnsupportedDegree(d)),
        }
    }

    pub fn eval(&self, p: [f64; 3]) -> Vec<f64> {
        let l = bary(p);
        match self.degree {
            1 => l.to_vec(),
            _ => {
                let mut v = Vec::with_capacity(10);
                for li in l {
                    v.push(li * (2.0 * li - 1.0));
                }
                for [a, b] in TET_EDGES {
                    v.push(4.0 * l[a] * l[b]);
                }
                v
            }
        }
    }

    pub fn grad(&self, p: [f64; 3]) -> Vec<[f64; 3]> {
        let l = bary(p);
        match self.degree {
            1 => BARY_GRADS.to_vec(),
            _ => {
                let mut g = Vec::with_capacity(10);
                for i in 0..4 {
                    let s = 4.0 * l[i] - 1.0;
                    g.push([
                        s * BARY_GRADS[i][0],
                        s * BARY_GRADS[i][1],
                        s * BARY_GRADS[i][2],
                    ]);
                }
                for [a, b] in TET_EDGES {
                    g.push([
                        4.0 * (l[a] * BARY_GRADS[b][0] + l[b] * BARY_GRADS[a][0]),
                        4.0 * (l[a] * BARY_GRADS[b][1] + l[b] * BARY_GRADS[a][1]),
                        4.0 * (l[a] * BARY_GRADS[b][2] + l[b] * BARY_GRADS[a][2]),
                    ]);
                }
                g
            }
        }
    }

    /// Nodes on the reference element, in DOF order.
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        let verts: [[f64; 3]; 4] = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut n = verts.to_vec();
        if self.degree == 2 {
            for [a, b] in TET_EDGES {
                n.push([
                    0.5 * (verts[a][0] + verts[b][0]),
                    0.5 * (verts[a][1] + verts[b][1]),
                    0.5 * (verts[a][2] + verts[b][2]),
                ]);
            }
        }
        n
    }
}
