//! Global DOF layouts: the trace-coupled edge-element pair space, the
//! pinned multiplier pair space, and the gradient inclusion matrix between
//! them.
//!
//! Both pair spaces share boundary DOFs between their two components: a
//! boundary entity carries one unknown used by both fields, which encodes
//! w − v ∈ H₀(curl) (resp. p − q ∈ H¹₀). The multiplier space additionally
//! pins one boundary vertex DOF to zero, removing the constant pair from
//! the space; only gradients of multipliers enter the forms, so this
//! changes nothing but the kernel.

use std::collections::HashMap;
use std::sync::Arc;

use crate::elements::edge::{dof_transform, dof_transform_from_ref, ref_dofs};
use crate::elements::{EdgeBasis, LagrangeBasis};
use crate::error::{Error, Result};
use crate::mesh::TetMesh;
use crate::sparse::SparseMat;
use crate::Complex;

/// Layout: [interior w-DOFs | interior v-DOFs | shared boundary DOFs].
#[derive(Debug, Clone)]
pub struct CoupledFieldSpace {
    pub mesh: Arc<TetMesh>,
    pub order: usize,
    /// DOFs of one edge-element field.
    pub n_single: usize,
    pub n_interior: usize,
    pub n_shared: usize,
    pub dim: usize,
    pub w_map: Vec<usize>,
    pub v_map: Vec<usize>,
    pub single_boundary: Vec<bool>,
}

/// Layout: [interior p-DOFs | interior q-DOFs | shared boundary DOFs],
/// with the pinned boundary vertex DOF removed.
#[derive(Debug, Clone)]
pub struct MultiplierSpace {
    pub mesh: Arc<TetMesh>,
    pub degree: usize,
    pub n_single: usize,
    pub n_interior: usize,
    pub n_shared: usize,
    pub dim: usize,
    pub p_map: Vec<Option<usize>>,
    pub q_map: Vec<Option<usize>>,
    pub single_boundary: Vec<bool>,
    /// Single-DOF index of the pinned boundary vertex.
    pub pinned: usize,
}

pub fn build_coupled_field_space(mesh: Arc<TetMesh>, order: usize) -> Result<CoupledFieldSpace> {
    if order > 1 {
        return Err(Error::UnsupportedOrder(order));
    }
    let (n_single, single_boundary) = if order == 0 {
        (mesh.n_edges(), mesh.edge_boundary.clone())
    } else {
        let mut b = Vec::with_capacity(2 * mesh.n_edges() + 2 * mesh.n_faces());
        for &eb in &mesh.edge_boundary {
            b.push(eb);
            b.push(eb);
        }
        for &fb in &mesh.face_boundary {
            b.push(fb);
            b.push(fb);
        }
        (b.len(), b)
    };
    let n_shared = single_boundary.iter().filter(|b| **b).count();
    let n_interior = n_single - n_shared;
    let mut w_map = vec![0usize; n_single];
    let mut v_map = vec![0usize; n_single];
    let mut next_int = 0;
    let mut next_shared = 2 * n_interior;
    for (d, &b) in single_boundary.iter().enumerate() {
        if b {
            w_map[d] = next_shared;
            v_map[d] = next_shared;
            next_shared += 1;
        } else {
            w_map[d] = next_int;
            v_map[d] = n_interior + next_int;
            next_int += 1;
        }
    }
    Ok(CoupledFieldSpace {
        mesh,
        order,
        n_single,
        n_interior,
        n_shared,
        dim: 2 * n_interior + n_shared,
        w_map,
        v_map,
        single_boundary,
    })
}

impl CoupledFieldSpace {
    pub fn n_el_dofs(&self) -> usize {
        if self.order == 0 {
            6
        } else {
            20
        }
    }

    /// Single-field DOF indices of element `t`, in reference DOF order.
    pub fn element_single_dofs(&self, t: usize) -> Vec<usize> {
        let mesh = &self.mesh;
        let mut dofs = Vec::with_capacity(self.n_el_dofs());
        for &(e, _) in &mesh.tet_edges[t] {
            if self.order == 0 {
                dofs.push(e);
            } else {
                dofs.push(2 * e);
                dofs.push(2 * e + 1);
            }
        }
        if self.order == 1 {
            for &(f, _) in &mesh.tet_faces[t] {
                dofs.push(2 * mesh.n_edges() + 2 * f);
                dofs.push(2 * mesh.n_edges() + 2 * f + 1);
            }
        }
        dofs
    }

    fn orientation(&self, t: usize) -> ([i8; 6], [u8; 4]) {
        let mut signs = [0i8; 6];
        for (i, &(_, s)) in self.mesh.tet_edges[t].iter().enumerate() {
            signs[i] = s;
        }
        let mut perms = [0u8; 4];
        for (i, &(_, p)) in self.mesh.tet_faces[t].iter().enumerate() {
            perms[i] = p;
        }
        (signs, perms)
    }

    /// Row-major matrix T with `l = T g`: global coefficients to
    /// reference-DOF coefficients on element `t`.
    pub fn element_transform(&self, t: usize) -> Vec<f64> {
        let (signs, perms) = self.orientation(t);
        dof_transform(self.order, &signs, &perms)
    }

    /// Row-major matrix R = T⁻¹ mapping reference-DOF functional values to
    /// global DOF values on element `t`.
    pub fn element_transform_from_ref(&self, t: usize) -> Vec<f64> {
        let (signs, perms) = self.orientation(t);
        dof_transform_from_ref(self.order, &signs, &perms)
    }
}

pub fn build_multiplier_space(mesh: Arc<TetMesh>, degree: usize) -> Result<MultiplierSpace> {
    build_multiplier_space_pinned(mesh, degree, None)
}

/// As [`build_multiplier_space`] but with an explicit pinned boundary
/// vertex; `None` picks the boundary vertex with the smallest index. The
/// eigenvalues of the final pencil are invariant under this choice.
pub fn build_multiplier_space_pinned(
    mesh: Arc<TetMesh>,
    degree: usize,
    pinned_vertex: Option<usize>,
) -> Result<MultiplierSpace> {
    if degree != 1 && degree != 2 {
        return Err(Error::UnsupportedDegree(degree));
    }
    let (n_single, single_boundary) = if degree == 1 {
        (mesh.n_vertices(), mesh.vertex_boundary.clone())
    } else {
        let mut b = mesh.vertex_boundary.clone();
        b.extend_from_slice(&mesh.edge_boundary);
        (b.len(), b)
    };
    let pinned = match pinned_vertex {
        Some(v) => {
            assert!(mesh.vertex_boundary[v], "pinned vertex must lie on the boundary");
            v
        }
        None => mesh
            .vertex_boundary
            .iter()
            .position(|&b| b)
            .expect("mesh has a boundary"),
    };
    let n_shared = single_boundary.iter().filter(|b| **b).count() - 1;
    let n_interior = n_single - n_shared - 1;
    let mut p_map = vec![None; n_single];
    let mut q_map = vec![None; n_single];
    let mut next_int = 0;
    let mut next_shared = 2 * n_interior;
    for (d, &b) in single_boundary.iter().enumerate() {
        if d == pinned {
            continue;
        }
        if b {
            p_map[d] = Some(next_shared);
            q_map[d] = Some(next_shared);
            next_shared += 1;
        } else {
            p_map[d] = Some(next_int);
            q_map[d] = Some(n_interior + next_int);
            next_int += 1;
        }
    }
    Ok(MultiplierSpace {
        mesh,
        degree,
        n_single,
        n_interior,
        n_shared,
        dim: 2 * n_interior + n_shared,
        p_map,
        q_map,
        single_boundary,
        pinned,
    })
}

impl MultiplierSpace {
    pub fn n_el_dofs(&self) -> usize {
        if self.degree == 1 {
            4
        } else {
            10
        }
    }

    /// Single scalar DOF indices of element `t`, matching the Lagrange
    /// basis ordering (vertices, then edges for degree 2).
    pub fn element_single_dofs(&self, t: usize) -> Vec<usize> {
        let mesh = &self.mesh;
        let mut dofs: Vec<usize> = mesh.tets[t].to_vec();
        if self.degree == 2 {
            for &(e, _) in &mesh.tet_edges[t] {
                dofs.push(mesh.n_vertices() + e);
            }
        }
        dofs
    }
}

/// Sparse matrix G with `(∇p, ∇q) = field(G y)` for multiplier
/// coefficients y: the discrete de Rham inclusion grad 𝓠_h ⊂ 𝓗_h.
pub fn build_gradient_matrix(
    q: &MultiplierSpace,
    h: &CoupledFieldSpace,
) -> Result<SparseMat> {
    if q.degree != h.order + 1 {
        return Err(Error::SpaceMismatch(format!(
            "multiplier degree {} does not match edge order {} + 1",
            q.degree, h.order
        )));
    }
    if !Arc::ptr_eq(&q.mesh, &h.mesh) {
        return Err(Error::SpaceMismatch(
            "spaces are built on different meshes".into(),
        ));
    }
    let mesh = &h.mesh;
    let lb = LagrangeBasis::new(q.degree)?;
    // Reference-DOF values of the gradients of the scalar shape functions;
    // constant across elements because both transforms are covariant.
    let ne = h.n_el_dofs();
    let ns = q.n_el_dofs();
    let mut ghat = vec![0.0; ne * ns];
    for j in 0..ns {
        let dofs = ref_dofs(h.order, |p| lb.grad(p)[j]);
        for (i, v) in dofs.into_iter().enumerate() {
            ghat[i * ns + j] = v;
        }
    }
    // Entries are global DOF values of globally defined functions, so
    // every element writes the same value: set-semantics with a
    // consistency check.
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    let mut set = |r: usize, c: usize, v: f64| {
        if let Some(old) = entries.insert((r, c), v) {
            debug_assert!(
                (old - v).abs() < 1e-11,
                "inconsistent gradient entry at ({r}, {c}): {old} vs {v}"
            );
        }
    };
    for t in 0..mesh.n_tets() {
        let r = h.element_transform_from_ref(t);
        let ed = h.element_single_dofs(t);
        let sd = q.element_single_dofs(t);
        for j in 0..ns {
            for i in 0..ne {
                let mut val = 0.0;
                for k in 0..ne {
                    val += r[i * ne + k] * ghat[k * ns + j];
                }
                if val.abs() < 1e-14 {
                    continue;
                }
                if let Some(col) = q.p_map[sd[j]] {
                    set(h.w_map[ed[i]], col, val);
                }
                if let Some(col) = q.q_map[sd[j]] {
                    set(h.v_map[ed[i]], col, val);
                }
            }
        }
    }
    let triplets: Vec<(usize, usize, Complex)> = entries
        .into_iter()
        .map(|((r, c), v)| (r, c, Complex::new(v, 0.0)))
        .collect();
    Ok(SparseMat::from_triplets(h.dim, q.dim, &triplets))
}

/// Evaluate a coupled field at reference points of one element; returns
/// (w, v) reference values (push through J⁻ᵀ for physical values).
pub fn eval_coupled_on_element(
    h: &CoupledFieldSpace,
    basis: &EdgeBasis,
    x: &[Complex],
    t: usize,
    ref_pts: &[[f64; 3]],
) -> (Vec<[Complex; 3]>, Vec<[Complex; 3]>) {
    let ne = h.n_el_dofs();
    let tr = h.element_transform(t);
    let ed = h.element_single_dofs(t);
    let eval_field = |map: &[usize]| -> Vec<[Complex; 3]> {
        let g: Vec<Complex> = ed.iter().map(|&d| x[map[d]]).collect();
        let mut l = vec![Complex::ZERO; ne];
        for i in 0..ne {
            for k in 0..ne {
                l[i] += tr[i * ne + k] * g[k];
            }
        }
        ref_pts
            .iter()
            .map(|&p| {
                let mut val = [Complex::ZERO; 3];
                for (li, b) in l.iter().zip(&basis.basis) {
                    let bv = crate::elements::poly::vec_eval(b, p);
                    for c in 0..3 {
                        val[c] += li * bv[c];
                    }
                }
                val
            })
            .collect()
    };
    let w = eval_field(&h.w_map);
    let v = eval_field(&h.v_map);
    (w, v)
}
