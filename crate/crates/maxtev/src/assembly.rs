//! Assembly of the sesquilinear forms over the coupled spaces and the
//! saddle-point pencil.
//!
//! Forms (test functions occupy the conjugated slot):
//!   a((ω,υ),(ω′,υ′)) = (A curl ω, curl ω′) − (curl υ, curl υ′)
//!   c((ω,υ),(ω′,υ′)) = (N ω, ω′) − (υ, υ′)
//!   b((p,q),(ω′,υ′)) = (N ∇p, ω′) − (∇q, υ′)
//! and the pencil K = [A B; Bᴴ 0], M = [C 0; 0 0] for the generalized
//! problem K x = λ M x with λ = k².

use crate::coefficients::CoefficientField;
use crate::elements::transform::AffineMap;
use crate::elements::{tet_quadrature, EdgeBasis, LagrangeBasis};
use crate::error::{Error, Result};
use crate::spaces::{CoupledFieldSpace, MultiplierSpace};
use crate::sparse::SparseMat;
use crate::Complex;

/// Exact for the polynomial presets (integrands of degree ≤ 6) and far
/// below table precision for the exponential one.
pub const DEFAULT_QUAD_DEGREE: usize = 8;

fn apply_coef(m: &[[Complex; 3]; 3], v: [Complex; 3]) -> [Complex; 3] {
    let mut out = [Complex::ZERO; 3];
    for i in 0..3 {
        for (j, vj) in v.iter().enumerate() {
            out[i] += m[i][j] * vj;
        }
    }
    out
}

fn dot(a: [Complex; 3], b: [Complex; 3]) -> Complex {
    // second slot conjugated; basis functions are real so this only
    // matters for complex coefficients upstream of them
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

/// Congruence transform Tᵀ L T of a local matrix (row-major, n×n).
fn congruence(l: &[Complex], t: &[f64], n: usize) -> Vec<Complex> {
    let mut lt = vec![Complex::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex::ZERO;
            for k in 0..n {
                s += l[i * n + k] * t[k * n + j];
            }
            lt[i * n + j] = s;
        }
    }
    let mut out = vec![Complex::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex::ZERO;
            for k in 0..n {
                s += t[k * n + i] * lt[k * n + j];
            }
            out[i * n + j] = s;
        }
    }
    out
}

enum FieldForm {
    /// Curl-curl: (A curl ·, curl ·)
    Curl,
    /// Mass: (N ·, ·)
    Value,
}

/// Shared driver for the A and C blocks: both are a coefficient-weighted
/// w-field form minus the identity-weighted v-field form.
fn assemble_field_form(
    h: &CoupledFieldSpace,
    coef: &CoefficientField,
    quad_degree: usize,
    form: FieldForm,
    v_sign: f64,
) -> SparseMat {
    let mesh = &h.mesh;
    let basis = EdgeBasis::new(h.order).expect("space order validated");
    let rule = tet_quadrature(quad_degree);
    let (vals, curls) = basis.tabulate(&rule.points);
    let ne = h.n_el_dofs();
    let tab = match form {
        FieldForm::Curl => &curls,
        FieldForm::Value => &vals,
    };
    let mut triplets = Vec::with_capacity(mesh.n_tets() * ne * ne * 2);
    for t in 0..mesh.n_tets() {
        let map = AffineMap::new(&mesh.tet_vertices(t)).expect("mesh is valid");
        let adet = map.det.abs();
        // physical values of the reference-DOF shape functions at each
        // quadrature point, [dof][point]
        let phys: Vec<Vec<[f64; 3]>> = tab
            .iter()
            .map(|per_dof| {
                per_dof
                    .iter()
                    .map(|&v| match form {
                        FieldForm::Curl => map.push_curl(v),
                        FieldForm::Value => map.push_vector(v),
                    })
                    .collect()
            })
            .collect();
        let mut loc_w = vec![Complex::ZERO; ne * ne];
        let mut loc_v = vec![Complex::ZERO; ne * ne];
        for (qi, (&p, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = map.map(p);
            let m = coef.eval(x);
            let scale = w * adet;
            for j in 0..ne {
                let vj = [
                    Complex::new(phys[j][qi][0], 0.0),
                    Complex::new(phys[j][qi][1], 0.0),
                    Complex::new(phys[j][qi][2], 0.0),
                ];
                let mvj = apply_coef(&m, vj);
                for i in 0..ne {
                    let vi = [
                        Complex::new(phys[i][qi][0], 0.0),
                        Complex::new(phys[i][qi][1], 0.0),
                        Complex::new(phys[i][qi][2], 0.0),
                    ];
                    loc_w[i * ne + j] += scale * dot(mvj, vi);
                    loc_v[i * ne + j] += v_sign * scale * dot(vj, vi);
                }
            }
        }
        let tr = h.element_transform(t);
        let gw = congruence(&loc_w, &tr, ne);
        let gv = congruence(&loc_v, &tr, ne);
        let ed = h.element_single_dofs(t);
        for i in 0..ne {
            for j in 0..ne {
                triplets.push((h.w_map[ed[i]], h.w_map[ed[j]], gw[i * ne + j]));
                triplets.push((h.v_map[ed[i]], h.v_map[ed[j]], gv[i * ne + j]));
            }
        }
    }
    SparseMat::from_triplets(h.dim, h.dim, &triplets)
}

/// The curl-curl block: entry (i, j) = a(φ_j, φ_i).
pub fn assemble_a(
    h: &CoupledFieldSpace,
    coef_a: &CoefficientField,
    quad_degree: usize,
) -> SparseMat {
    assemble_field_form(h, coef_a, quad_degree, FieldForm::Curl, -1.0)
}

/// Positive curl Gram over both fields: ‖curl ω‖² + ‖curl υ‖² as a
/// quadratic form (the curl-energy seminorm of the coupled space).
pub fn assemble_curl_gram(h: &CoupledFieldSpace, quad_degree: usize) -> SparseMat {
    let one = CoefficientField::constant_scalar(1.0, "I");
    assemble_field_form(h, &one, quad_degree, FieldForm::Curl, 1.0)
}

/// Positive L² Gram over both fields: ‖ω‖² + ‖υ‖².
pub fn assemble_mass_gram(h: &CoupledFieldSpace, quad_degree: usize) -> SparseMat {
    let one = CoefficientField::constant_scalar(1.0, "I");
    assemble_field_form(h, &one, quad_degree, FieldForm::Value, 1.0)
}

/// The mass block: entry (i, j) = c(φ_j, φ_i).
pub fn assemble_c(
    h: &CoupledFieldSpace,
    coef_n: &CoefficientField,
    quad_degree: usize,
) -> SparseMat {
    assemble_field_form(h, coef_n, quad_degree, FieldForm::Value, -1.0)
}

/// The constraint block: n_field × n_mult, entry (i, j) = b(ψ_j, φ_i).
pub fn assemble_b(
    q: &MultiplierSpace,
    h: &CoupledFieldSpace,
    coef_n: &CoefficientField,
    quad_degree: usize,
) -> Result<SparseMat> {
    if q.degree != h.order + 1 {
        return Err(Error::SpaceMismatch(format!(
            "multiplier degree {} does not match edge order {} + 1",
            q.degree, h.order
        )));
    }
    if !std::sync::Arc::ptr_eq(&q.mesh, &h.mesh) {
        return Err(Error::SpaceMismatch(
            "spaces are built on different meshes".into(),
        ));
    }
    let mesh = &h.mesh;
    let basis = EdgeBasis::new(h.order)?;
    let lb = LagrangeBasis::new(q.degree)?;
    let rule = tet_quadrature(quad_degree);
    let (vals, _) = basis.tabulate(&rule.points);
    let sgrads: Vec<Vec<[f64; 3]>> = rule.points.iter().map(|&p| lb.grad(p)).collect();
    let ne = h.n_el_dofs();
    let ns = q.n_el_dofs();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_tets() {
        let map = AffineMap::new(&mesh.tet_vertices(t)).expect("mesh is valid");
        let adet = map.det.abs();
        // local blocks in reference-DOF test basis: rows edge, cols scalar
        let mut loc_p = vec![Complex::ZERO; ne * ns];
        let mut loc_q = vec![Complex::ZERO; ne * ns];
        for (qi, (&p, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = map.map(p);
            let m = coef_n.eval(x);
            let scale = w * adet;
            for j in 0..ns {
                let g = map.push_vector(sgrads[qi][j]);
                let gc = [
                    Complex::new(g[0], 0.0),
                    Complex::new(g[1], 0.0),
                    Complex::new(g[2], 0.0),
                ];
                let ng = apply_coef(&m, gc);
                for i in 0..ne {
                    let phi = map.push_vector(vals[i][qi]);
                    let phic = [
                        Complex::new(phi[0], 0.0),
                        Complex::new(phi[1], 0.0),
                        Complex::new(phi[2], 0.0),
                    ];
                    loc_p[i * ns + j] += scale * dot(ng, phic);
                    loc_q[i * ns + j] -= scale * dot(gc, phic);
                }
            }
        }
        // transform the test side only: rows pick up Tᵀ
        let tr = h.element_transform(t);
        let apply_tt = |loc: &[Complex]| -> Vec<Complex> {
            let mut out = vec![Complex::ZERO; ne * ns];
            for i in 0..ne {
                for j in 0..ns {
                    let mut s = Complex::ZERO;
                    for k in 0..ne {
                        s += tr[k * ne + i] * loc[k * ns + j];
                    }
                    out[i * ns + j] = s;
                }
            }
            out
        };
        let gp = apply_tt(&loc_p);
        let gq = apply_tt(&loc_q);
        let ed = h.element_single_dofs(t);
        let sd = q.element_single_dofs(t);
        for j in 0..ns {
            for i in 0..ne {
                if let Some(col) = q.p_map[sd[j]] {
                    triplets.push((h.w_map[ed[i]], col, gp[i * ns + j]));
                }
                if let Some(col) = q.q_map[sd[j]] {
                    triplets.push((h.v_map[ed[i]], col, gq[i * ns + j]));
                }
            }
        }
    }
    Ok(SparseMat::from_triplets(h.dim, q.dim, &triplets))
}

#[derive(Debug, Clone)]
pub struct Pencil {
    pub a: SparseMat,
    pub b: SparseMat,
    pub c: SparseMat,
    pub n_field: usize,
    pub n_mult: usize,
}

pub fn build_pencil(a: SparseMat, b: SparseMat, c: SparseMat) -> Result<Pencil> {
    let n_field = a.nrows;
    let n_mult = b.ncols;
    if a.ncols != n_field || b.nrows != n_field || c.nrows != n_field || c.ncols != n_field {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}, C is {}x{}",
            a.nrows, a.ncols, b.nrows, b.ncols, c.nrows, c.ncols
        )));
    }
    Ok(Pencil {
        a,
        b,
        c,
        n_field,
        n_mult,
    })
}

impl Pencil {
    pub fn dim(&self) -> usize {
        self.n_field + self.n_mult
    }

    /// K = [A B; Bᴴ 0]
    pub fn k(&self) -> SparseMat {
        let bh = self.b.adjoint();
        SparseMat::block2x2(
            [[Some(&self.a), Some(&self.b)], [Some(&bh), None]],
            [self.n_field, self.n_mult],
            [self.n_field, self.n_mult],
        )
    }

    /// M = [C 0; 0 0]
    pub fn m(&self) -> SparseMat {
        SparseMat::block2x2(
            [[Some(&self.c), None], [None, None]],
            [self.n_field, self.n_mult],
            [self.n_field, self.n_mult],
        )
    }

    /// K − σ M
    pub fn shifted(&self, sigma: Complex) -> SparseMat {
        let bh = self.b.adjoint();
        let mut a_shift = self.a.clone();
        // A and C share assembly structure but not sparsity order; combine
        // via triplets.
        let mut trips = a_shift.to_triplets();
        for (r, c, v) in self.c.to_triplets() {
            trips.push((r, c, -sigma * v));
        }
        let ashift = SparseMat::from_triplets(self.n_field, self.n_field, &trips);
        a_shift = ashift;
        SparseMat::block2x2(
            [[Some(&a_shift), Some(&self.b)], [Some(&bh), None]],
            [self.n_field, self.n_mult],
            [self.n_field, self.n_mult],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_preset, CoefficientField};
    use crate::mesh::{build_topology, Domain, TET_EDGES};
    use crate::spaces::{
        build_coupled_field_space, build_gradient_matrix, build_multiplier_space,
    };
    use std::sync::Arc;

    fn single_tet() -> Arc<crate::TetMesh> {
        let verts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        Arc::new(build_topology(verts, vec![[0, 1, 2, 3]], 1.0).unwrap())
    }

    const GRADS: [[f64; 3]; 4] = [
        [-1.0, -1.0, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    fn d3(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn whitney_curl_energy_on_reference_tet() {
        // curl w_e = 2 grad λ_a × grad λ_b is constant; the w-block
        // diagonal of A with A = I is |curl w_e|² / 6 on the unit tet.
        let mesh = single_tet();
        let h = build_coupled_field_space(mesh, 0).unwrap();
        // On a single tet every DOF is a boundary DOF: the w and v
        // contributions superpose on the shared index, and the v-block
        // carries −I, so with A = I the diagonal cancels exactly. With
        // A = 2I it reads (2 − 1)·energy.
        let one = CoefficientField::constant_scalar(1.0, "I");
        let a = assemble_a(&h, &one, DEFAULT_QUAD_DEGREE).to_dense();
        for i in 0..h.dim {
            assert!(a[(i, i)].norm() < 1e-13);
        }
        let two = CoefficientField::constant_scalar(2.0, "2I");
        let a2 = assemble_a(&h, &two, DEFAULT_QUAD_DEGREE).to_dense();
        for (e, [va, vb]) in TET_EDGES.iter().enumerate() {
            let c = cross(GRADS[*va], GRADS[*vb]);
            let expect = 4.0 * d3(c, c) / 6.0;
            let i = h.w_map[e];
            assert!(
                (a2[(i, i)].re - expect).abs() < 1e-12,
                "edge {e}: {} vs {expect}",
                a2[(i, i)].re
            );
        }
    }

    #[test]
    fn whitney_mass_matches_symbolic() {
        // w_e·w_f integrated with ∫ λ_i λ_j = (1 + δ_ij)/120 on the unit
        // tet. With N = 2I the w-block is 2×mass and the v-block −mass,
        // so the shared-DOF matrix is (2−1)×mass.
        let mesh = single_tet();
        let h = build_coupled_field_space(mesh, 0).unwrap();
        let two = CoefficientField::constant_scalar(2.0, "2I");
        let c = assemble_c(&h, &two, DEFAULT_QUAD_DEGREE).to_dense();
        let lam_int = |i: usize, j: usize| if i == j { 1.0 / 60.0 } else { 1.0 / 120.0 };
        for (e, [a, b]) in TET_EDGES.iter().enumerate() {
            for (f, [cc, d]) in TET_EDGES.iter().enumerate() {
                let (a, b, cc, d) = (*a, *b, *cc, *d);
                let expect = lam_int(a, cc) * d3(GRADS[b], GRADS[d])
                    - lam_int(a, d) * d3(GRADS[b], GRADS[cc])
                    - lam_int(b, cc) * d3(GRADS[a], GRADS[d])
                    + lam_int(b, d) * d3(GRADS[a], GRADS[cc]);
                let got = c[(h.w_map[e], h.w_map[f])].re;
                assert!(
                    (got - expect).abs() < 1e-13,
                    "({e},{f}): {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn blocks_hermitian() {
        let mesh = Arc::new(Domain::Cube.build_mesh(2).unwrap());
        for order in [0usize, 1] {
            let h = build_coupled_field_space(mesh.clone(), order).unwrap();
            for name in ["two_I", "F1", "F3"] {
                let coef = make_preset(name).unwrap();
                let a = assemble_a(&h, &coef, DEFAULT_QUAD_DEGREE);
                let c = assemble_c(&h, &coef, DEFAULT_QUAD_DEGREE);
                assert!(a.hermitian_error() <= 1e-12 * a.max_abs(), "{name} A");
                assert!(c.hermitian_error() <= 1e-12 * c.max_abs(), "{name} C");
            }
        }
    }

    #[test]
    fn b_equals_c_times_g() {
        for (order, domain, n) in [(0usize, Domain::Cube, 2usize), (1, Domain::ThickL, 1)] {
            let mesh = Arc::new(domain.build_mesh(n).unwrap());
            let h = build_coupled_field_space(mesh.clone(), order).unwrap();
            let q = build_multiplier_space(mesh, order + 1).unwrap();
            let coef = make_preset("F3").unwrap();
            let c = assemble_c(&h, &coef, DEFAULT_QUAD_DEGREE);
            let b = assemble_b(&q, &h, &coef, DEFAULT_QUAD_DEGREE).unwrap();
            let g = build_gradient_matrix(&q, &h).unwrap();
            let scale = b.max_abs();
            for j in 0..q.dim {
                let mut gcol = vec![Complex::ZERO; h.dim];
                for (r, v) in g.col(j) {
                    gcol[r] = v;
                }
                let cg = c.matvec(&gcol);
                let mut bcol = vec![Complex::ZERO; h.dim];
                for (r, v) in b.col(j) {
                    bcol[r] = v;
                }
                for i in 0..h.dim {
                    assert!(
                        (cg[i] - bcol[i]).norm() <= 1e-11 * scale,
                        "order {order}, ({i},{j}): {} vs {}",
                        cg[i],
                        bcol[i]
                    );
                }
            }
        }
    }

    #[test]
    fn a_annihilates_gradients() {
        for (order, domain, n) in [(0usize, Domain::ThickL, 1usize), (1, Domain::Cube, 1)] {
            let mesh = Arc::new(domain.build_mesh(n).unwrap());
            let h = build_coupled_field_space(mesh.clone(), order).unwrap();
            let q = build_multiplier_space(mesh, order + 1).unwrap();
            let coef = make_preset("F1").unwrap();
            let a = assemble_a(&h, &coef, DEFAULT_QUAD_DEGREE);
            let g = build_gradient_matrix(&q, &h).unwrap();
            let bound = 1e-12 * a.max_abs();
            for j in 0..q.dim {
                let mut gcol = vec![Complex::ZERO; h.dim];
                for (r, v) in g.col(j) {
                    gcol[r] = v;
                }
                let ag = a.matvec(&gcol);
                for (i, v) in ag.iter().enumerate() {
                    assert!(v.norm() <= bound, "order {order}, ({i},{j}): {v}");
                }
            }
        }
    }

    #[test]
    fn quadrature_refinement_invariance() {
        let mesh = Arc::new(Domain::Cube.build_mesh(2).unwrap());
        let h = build_coupled_field_space(mesh, 1).unwrap();
        for (name, tol) in [("two_I", 1e-13), ("F3", 1e-13), ("F4", 1e-13), ("F1", 1e-10)] {
            let coef = make_preset(name).unwrap();
            let a8 = assemble_a(&h, &coef, 8).to_dense();
            let a10 = assemble_a(&h, &coef, 10).to_dense();
            let mut scale: f64 = 0.0;
            for i in 0..h.dim {
                for j in 0..h.dim {
                    scale = scale.max(a8[(i, j)].norm());
                }
            }
            for i in 0..h.dim {
                for j in 0..h.dim {
                    assert!(
                        (a8[(i, j)] - a10[(i, j)]).norm() <= tol * scale,
                        "{name} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn pencil_structure() {
        let mesh = Arc::new(Domain::Cube.build_mesh(2).unwrap());
        let h = build_coupled_field_space(mesh.clone(), 0).unwrap();
        let q = build_multiplier_space(mesh, 1).unwrap();
        let a_coef = make_preset("two_I").unwrap();
        let n_coef = make_preset("sixteen_I").unwrap();
        let a = assemble_a(&h, &a_coef, DEFAULT_QUAD_DEGREE);
        let c = assemble_c(&h, &n_coef, DEFAULT_QUAD_DEGREE);
        let b = assemble_b(&q, &h, &n_coef, DEFAULT_QUAD_DEGREE).unwrap();
        let pencil = build_pencil(a, b, c).unwrap();
        assert_eq!(pencil.n_field, h.dim);
        assert_eq!(pencil.n_mult, q.dim);
        let k = pencil.k();
        let m = pencil.m();
        assert!(k.hermitian_error() <= 1e-12 * k.max_abs());
        assert!(m.hermitian_error() <= 1e-12 * m.max_abs());
        // K nonsingular: smallest singular value bounded away from zero.
        let svd = faer::linalg::solvers::Svd::new(k.to_dense().as_ref()).unwrap();
        let smin = svd.S().column_vector()[pencil.dim() - 1].norm();
        assert!(smin > 1e-8, "sigma_min(K) = {smin:e}");
        // shifted(σ) equals K − σM entrywise.
        let sigma = Complex::new(1.69, 0.0);
        let sh = pencil.shifted(sigma).to_dense();
        let kd = k.to_dense();
        let md = m.to_dense();
        for i in 0..pencil.dim() {
            for j in 0..pencil.dim() {
                assert!((sh[(i, j)] - (kd[(i, j)] - sigma * md[(i, j)])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mesh = Arc::new(Domain::Cube.build_mesh(1).unwrap());
        let h = build_coupled_field_space(mesh.clone(), 0).unwrap();
        let q = build_multiplier_space(mesh, 1).unwrap();
        let coef = make_preset("two_I").unwrap();
        let a = assemble_a(&h, &coef, DEFAULT_QUAD_DEGREE);
        let c = assemble_c(&h, &coef, DEFAULT_QUAD_DEGREE);
        let b = assemble_b(&q, &h, &coef, DEFAULT_QUAD_DEGREE).unwrap();
        let b_t = b.adjoint();
        assert!(matches!(
            build_pencil(a, b_t, c),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
