//! First-family edge elements of orders 0 and 1 on the reference
//! tetrahedron.
//!
//! Both orders are built the same way: span a set of polynomial generators
//! of the Nédélec space and invert the DOF matrix to obtain the shape
//! functions dual to the reference degrees of freedom.
//!
//! Reference DOFs (edge e = (a, b) local, t = v_b - v_a the chord vector,
//! s ∈ [0, 1] the edge parameter from a to b):
//!   order 0: one moment  ∫ u·t ds  per edge (6 total);
//!   order 1: two moments ∫ u·t q ds, q ∈ {1, 2s-1}, per edge, plus two
//!            moments 2 ∫_tri u·d_i dξ dη per face with d_1 = v_b - v_a,
//!            d_2 = v_c - v_a of the sorted local face (a, b, c) (20 total).
//!
//! Chord-vector moments are invariant under the covariant transform, so the
//! only element-to-element mismatch is vertex ordering; [`dof_transform`]
//! produces the per-element change of basis from mesh orientation data.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use super::poly::{
    curl, position_cross, unit, vec_add, vec_eval, vec_mul_coord, vec_scale, vec_zero, VecPoly3,
};
use super::quadrature::{segment_quadrature, triangle_quadrature};
use crate::error::{Error, Result};
use crate::mesh::{PERMS3, TET_EDGES, TET_FACES};

pub const REF_VERTS: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

#[derive(Debug, Clone)]
pub struct EdgeBasis {
    pub order: usize,
    pub n_dofs: usize,
    /// Shape functions dual to the reference DOFs.
    pub basis: Vec<VecPoly3>,
    pub curls: Vec<VecPoly3>,
}

fn generators(order: usize) -> Vec<VecPoly3> {
    let mut gens = Vec::new();
    for i in 0..3 {
        gens.push(unit(i));
    }
    if order == 1 {
        for g in 0..3 {
            for i in 0..3 {
                gens.push(vec_mul_coord(&unit(i), g));
            }
        }
    }
    // Homogeneous tangential part: x × (g e_i). For order 1 the nine such
    // fields satisfy x × (x e1) + x × (y e2) + x × (z e3) = 0, so one is
    // dropped.
    for g in 0..3 {
        for i in 0..3 {
            if order == 0 {
                if g == 0 {
                    gens.push(position_cross(&unit(i)));
                }
            } else if !(g == 0 && i == 0) {
                gens.push(position_cross(&vec_mul_coord(&unit(i), g)));
            }
        }
    }
    gens
}

/// Apply the reference DOF functionals to an arbitrary field. Exact for
/// polynomial components of degree ≤ 2.
pub fn ref_dofs(order: usize, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
    let n_moments = order + 1;
    let (s_pts, s_wts) = segment_quadrature(3);
    let mut dofs = Vec::new();
    for [a, b] in TET_EDGES {
        let (va, vb) = (REF_VERTS[a], REF_VERTS[b]);
        let t = [vb[0] - va[0], vb[1] - va[1], vb[2] - va[2]];
        let mut m = [0.0; 2];
        for (&s, &w) in s_pts.iter().zip(&s_wts) {
            let x = [
                va[0] + s * t[0],
                va[1] + s * t[1],
                va[2] + s * t[2],
            ];
            let u = f(x);
            let ut = u[0] * t[0] + u[1] * t[1] + u[2] * t[2];
            m[0] += w * ut;
            m[1] += w * ut * (2.0 * s - 1.0);
        }
        dofs.extend_from_slice(&m[..n_moments]);
    }
    if order == 1 {
        let (t_pts, t_wts) = triangle_quadrature(2);
        for [a, b, c] in TET_FACES {
            let va = REF_VERTS[a];
            let d = [
                [
                    REF_VERTS[b][0] - va[0],
                    REF_VERTS[b][1] - va[1],
                    REF_VERTS[b][2] - va[2],
                ],
                [
                    REF_VERTS[c][0] - va[0],
                    REF_VERTS[c][1] - va[1],
                    REF_VERTS[c][2] - va[2],
                ],
            ];
            let mut m = [0.0; 2];
            for (p, &w) in t_pts.iter().zip(&t_wts) {
                let x = [
                    va[0] + p[0] * d[0][0] + p[1] * d[1][0],
                    va[1] + p[0] * d[0][1] + p[1] * d[1][1],
                    va[2] + p[0] * d[0][2] + p[1] * d[1][2],
                ];
                let u = f(x);
                for i in 0..2 {
                    m[i] += 2.0 * w * (u[0] * d[i][0] + u[1] * d[i][1] + u[2] * d[i][2]);
                }
            }
            dofs.extend_from_slice(&m);
        }
    }
    dofs
}

impl EdgeBasis {
    pub fn new(order: usize) -> Result<Self> {
        if order > 1 {
            return Err(Error::UnsupportedOrder(order));
        }
        let gens = generators(order);
        let n = gens.len();
        let mut d = Mat::<f64>::zeros(n, n);
        for (j, g) in gens.iter().enumerate() {
            for (i, v) in ref_dofs(order, |p| vec_eval(g, p)).into_iter().enumerate() {
                d[(i, j)] = v;
            }
        }
        let lu = PartialPivLu::new(d.as_ref());
        let c = lu.solve(Mat::<f64>::identity(n, n));
        let mut basis = Vec::with_capacity(n);
        for k in 0..n {
            let mut b = vec_zero();
            for (j, g) in gens.iter().enumerate() {
                b = vec_add(&b, &vec_scale(g, c[(j, k)]));
            }
            basis.push(b);
        }
        let curls = basis.iter().map(curl).collect();
        Ok(Self {
            order,
            n_dofs: n,
            basis,
            curls,
        })
    }

    /// Values and curls of all shape functions at the given reference
    /// points, indexed `[dof][point]`.
    pub fn tabulate(&self, points: &[[f64; 3]]) -> (Vec<Vec<[f64; 3]>>, Vec<Vec<[f64; 3]>>) {
        let vals = self
            .basis
            .iter()
            .map(|b| points.iter().map(|&p| vec_eval(b, p)).collect())
            .collect();
        let curls = self
            .curls
            .iter()
            .map(|c| points.iter().map(|&p| vec_eval(c, p)).collect())
            .collect();
        (vals, curls)
    }
}

/// Change of basis from reference DOFs to globally oriented DOFs, as a
/// dense row-major n×n matrix `T`.
///
/// If `g` are the coefficients of a finite element function in global DOFs,
/// the reference-DOF coefficients on this element are `l = T g`, and an
/// element matrix `A` assembled on the reference shape functions maps to
/// global numbering as `Tᵀ A T`.
///
/// `edge_signs` is +1 where the local edge direction agrees with the global
/// low-to-high vertex convention; `face_perms` are the orientation codes
/// stored in [`crate::mesh::TetMesh::tet_faces`].
pub fn dof_transform(order: usize, edge_signs: &[i8; 6], face_perms: &[u8; 4]) -> Vec<f64> {
    transform_impl(order, edge_signs, face_perms, true)
}

/// The inverse of [`dof_transform`]: maps reference-DOF functional values
/// of a field to its globally oriented DOF values, `g = R l` with
/// `R = T⁻¹`. Used when populating interpolation-type matrices whose
/// entries are global DOF values.
pub fn dof_transform_from_ref(
    order: usize,
    edge_signs: &[i8; 6],
    face_perms: &[u8; 4],
) -> Vec<f64> {
    transform_impl(order, edge_signs, face_perms, false)
}

fn transform_impl(
    order: usize,
    edge_signs: &[i8; 6],
    face_perms: &[u8; 4],
    invert_faces: bool,
) -> Vec<f64> {
    let n = if order == 0 { 6 } else { 20 };
    let mut t = vec![0.0; n * n];
    for (e, &s) in edge_signs.iter().enumerate() {
        if order == 0 {
            t[e * n + e] = s as f64;
        } else {
            // Global moments are (s, 1) times the local ones: reversing the
            // edge flips the tangent and maps s to 1-s, so the constant
            // moment flips while the odd moment flips twice. The block is
            // its own inverse.
            t[(2 * e) * n + 2 * e] = s as f64;
            t[(2 * e + 1) * n + 2 * e + 1] = 1.0;
        }
    }
    if order == 1 {
        // Face DOFs use the edge vectors of the globally sorted vertex
        // triple. In the barycentric parameter plane the three face
        // vertices sit at r_0, r_1, r_2; permuting them maps the global
        // chord vectors to integer combinations of the local ones.
        const R: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for (f, &code) in face_perms.iter().enumerate() {
            let p = PERMS3[code as usize];
            let m = [
                [
                    R[p[1]][0] - R[p[0]][0],
                    R[p[1]][1] - R[p[0]][1],
                ],
                [
                    R[p[2]][0] - R[p[0]][0],
                    R[p[2]][1] - R[p[0]][1],
                ],
            ];
            let block = if invert_faces {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                [
                    [m[1][1] / det, -m[0][1] / det],
                    [-m[1][0] / det, m[0][0] / det],
                ]
            } else {
                m
            };
            let base = 12 + 2 * f;
            for i in 0..2 {
                for j in 0..2 {
                    t[(base + i) * n + base + j] = block[i][j];
                }
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::PERMS3;

    #[test]
    fn duality_both_orders() {
        for order in [0, 1] {
            let eb = EdgeBasis::new(order).unwrap();
            assert_eq!(eb.n_dofs, if order == 0 { 6 } else { 20 });
            for (i, b) in eb.basis.iter().enumerate() {
                let dofs = ref_dofs(order, |p| vec_eval(b, p));
                for (j, &d) in dofs.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-12, "order {order}: dof_{j}(b_{i})");
                }
            }
        }
    }

    #[test]
    fn order0_is_whitney() {
        // lambda_a grad lambda_b - lambda_b grad lambda_a for edge (a, b).
        let eb = EdgeBasis::new(0).unwrap();
        let grads = [
            [-1.0, -1.0, -1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let pts = [[0.1, 0.2, 0.3], [0.25, 0.25, 0.25], [0.0, 0.4, 0.1]];
        for (e, [a, b]) in TET_EDGES.iter().enumerate() {
            for p in pts {
                let l = [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]];
                let expect: Vec<f64> = (0..3)
                    .map(|c| l[*a] * grads[*b][c] - l[*b] * grads[*a][c])
                    .collect();
                let got = vec_eval(&eb.basis[e], p);
                for c in 0..3 {
                    assert!((got[c] - expect[c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_space() {
        // DOF interpolation is a projection: fields already in the space
        // are reproduced exactly.
        for order in [0, 1] {
            let eb = EdgeBasis::new(order).unwrap();
            let gens = generators(order);
            // A fixed "random" combination of the generators.
            let mut u = vec_zero();
            for (j, g) in gens.iter().enumerate() {
                u = vec_add(&u, &vec_scale(g, ((j * 7 + 3) % 11) as f64 - 5.0));
            }
            let dofs = ref_dofs(order, |p| vec_eval(&u, p));
            for p in [[0.3, 0.1, 0.2], [0.05, 0.6, 0.3], [0.2, 0.2, 0.2]] {
                let mut v = [0.0; 3];
                for (c, b) in dofs.iter().zip(&eb.basis) {
                    let bv = vec_eval(b, p);
                    for k in 0..3 {
                        v[k] += c * bv[k];
                    }
                }
                let uv = vec_eval(&u, p);
                for k in 0..3 {
                    assert!((v[k] - uv[k]).abs() < 1e-10, "order {order}");
                }
            }
        }
    }

    #[test]
    fn lagrange_gradients_lie_in_edge_space() {
        use super::super::lagrange::LagrangeBasis;
        // grad P_{k+1} ⊂ edge space of order k; checked by interpolation.
        for (order, degree) in [(0usize, 1usize), (1, 2)] {
            let eb = EdgeBasis::new(order).unwrap();
            let lb = LagrangeBasis::new(degree).unwrap();
            for j in 0..lb.n_dofs {
                let g = |p: [f64; 3]| lb.grad(p)[j];
                let dofs = ref_dofs(order, g);
                for p in [[0.15, 0.35, 0.1], [0.4, 0.1, 0.4]] {
                    let mut v = [0.0; 3];
                    for (c, b) in dofs.iter().zip(&eb.basis) {
                        let bv = vec_eval(b, p);
                        for k in 0..3 {
                            v[k] += c * bv[k];
                        }
                    }
                    let gv = g(p);
                    for k in 0..3 {
                        assert!((v[k] - gv[k]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn transform_blocks_are_unimodular() {
        for code in 0..6u8 {
            let t = dof_transform(1, &[1; 6], &[code, 0, 0, 0]);
            let n = 20;
            let base = 12;
            let det = t[base * n + base] * t[(base + 1) * n + base + 1]
                - t[base * n + base + 1] * t[(base + 1) * n + base];
            assert!((det.abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn transform_and_inverse_compose_to_identity() {
        let signs = [1, -1, 1, -1, -1, 1];
        let perms = [0u8, 3, 5, 2];
        for order in [0usize, 1] {
            let n = if order == 0 { 6 } else { 20 };
            let t = dof_transform(order, &signs, &perms);
            let r = dof_transform_from_ref(order, &signs, &perms);
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += t[i * n + k] * r[k * n + j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-14, "order {order} ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn identity_permutation_gives_identity_transform() {
        let id_code = PERMS3.iter().position(|p| *p == [0, 1, 2]).unwrap() as u8;
        let t = dof_transform(1, &[1; 6], &[id_code; 4]);
        let n = 20;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((t[i * n + j] - expect).abs() < 1e-14);
            }
        }
    }
}
