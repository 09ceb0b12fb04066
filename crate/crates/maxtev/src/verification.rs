//! Numerical checks of the lemma-level properties: T-coercivity of the
//! a- and c-forms, the discrete Poincaré inequality on the constrained
//! space, and consistency of the discrete source problem.

use faer::linalg::solvers::{GeneralizedEigen, PartialPivLu, Solve, Svd};
use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    assemble_a, assemble_b, assemble_c, assemble_curl_gram, assemble_mass_gram, build_pencil,
    DEFAULT_QUAD_DEGREE,
};
use crate::coefficients::{hermitian_part_extremes, CoefficientField};
use crate::eigensolver::{ShiftedSolver, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::mesh::TetMesh;
use crate::spaces::{build_gradient_matrix, CoupledFieldSpace, MultiplierSpace};
use crate::sparse::SparseMat;
use crate::Complex;

/// Outcome of one property check: what was measured and whether it clears
/// the recorded threshold.
#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub property: String,
    /// Mesh resolutions (n = 1/h) the observations came from.
    pub meshes: Vec<usize>,
    pub observed: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
}

/// Which sesquilinear form a T-coercivity check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// a((ω,υ),(ω′,υ′)) with curl-energy seminorm; bounds taken from A.
    CurlForm,
    /// c((ω,υ),(ω′,υ′)) with L² norm; bounds taken from N.
    MassForm,
}

enum TVariant {
    /// (ω, 2ω − υ), for coefficient lower bound > 1.
    Lower,
    /// (ω − 2υ, −υ), for coefficient upper bound < 1.
    Upper,
}

fn cdot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Extreme eigenvalues of the Hermitian part of the coefficient over mesh
/// vertices and tet barycenters.
fn coefficient_extremes(mesh: &TetMesh, coef: &CoefficientField) -> (f64, f64) {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    let mut take = |x: [f64; 3]| {
        let (l, h) = hermitian_part_extremes(&coef.eval(x));
        lo = lo.min(l);
        hi = hi.max(h);
    };
    for &v in &mesh.vertices {
        take(v);
    }
    for t in 0..mesh.n_tets() {
        let vs = mesh.tet_vertices(t);
        let mut c = [0.0; 3];
        for v in &vs {
            for d in 0..3 {
                c[d] += v[d] / 4.0;
            }
        }
        take(c);
    }
    (lo, hi)
}

/// The isomorphism 𝕋 at DOF level. Both variants preserve (up to sign) the
/// shared tangential trace, so they act within the coupled space.
fn apply_t(h: &CoupledFieldSpace, variant: &TVariant, x: &[Complex]) -> Vec<Complex> {
    let mut y = vec![Complex::ZERO; h.dim];
    for d in 0..h.n_single {
        let (wi, vi) = (h.w_map[d], h.v_map[d]);
        if h.single_boundary[d] {
            y[wi] = match variant {
                TVariant::Lower => x[wi],
                TVariant::Upper => -x[wi],
            };
        } else {
            match variant {
                TVariant::Lower => {
                    y[wi] = x[wi];
                    y[vi] = 2.0 * x[wi] - x[vi];
                }
                TVariant::Upper => {
                    y[wi] = x[wi] - 2.0 * x[vi];
                    y[vi] = -x[vi];
                }
            }
        }
    }
    y
}

/// Measure the T-coercivity ratio |⟨x, X·Tx⟩| / ‖x‖²_form over random
/// coefficient vectors; the reported minimum is the observed coercivity
/// constant.
pub fn check_t_coercivity(
    form: FormKind,
    h: &CoupledFieldSpace,
    coef: &CoefficientField,
    trials: usize,
) -> Result<PropertyReport> {
    let (lo, hi) = coefficient_extremes(&h.mesh, coef);
    let variant = if lo > 1.0 {
        TVariant::Lower
    } else if hi < 1.0 {
        TVariant::Upper
    } else {
        return Err(Error::NoCaseMatch);
    };
    let (x_mat, gram, name) = match form {
        FormKind::CurlForm => (
            assemble_a(h, coef, DEFAULT_QUAD_DEGREE),
            assemble_curl_gram(h, DEFAULT_QUAD_DEGREE),
            "a",
        ),
        FormKind::MassForm => (
            assemble_c(h, coef, DEFAULT_QUAD_DEGREE),
            assemble_mass_gram(h, DEFAULT_QUAD_DEGREE),
            "c",
        ),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x7c0e);
    let mut min_ratio = f64::MAX;
    for _ in 0..trials {
        let x: Vec<Complex> = (0..h.dim)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let denom = cdot(&x, &gram.matvec(&x)).re;
        if denom <= 0.0 {
            continue;
        }
        let tx = apply_t(h, &variant, &x);
        let num = cdot(&x, &x_mat.matvec(&tx)).norm();
        min_ratio = min_ratio.min(num / denom);
    }
    let n = (1.0 / h.mesh.h).round() as usize;
    let threshold = 1e-8;
    Ok(PropertyReport {
        property: format!("T-coercivity of the {name}-form with {}", coef.label),
        meshes: vec![n],
        observed: vec![min_ratio],
        threshold,
        pass: min_ratio > threshold,
    })
}

fn to_dense_projected(z: &Mat<Complex>, m: &SparseMat) -> Mat<Complex> {
    // Zᴴ M Z without forming dense M
    let (nf, nz) = (z.nrows(), z.ncols());
    let mut mz = Mat::<Complex>::zeros(nf, nz);
    for j in 0..nz {
        let col: Vec<Complex> = (0..nf).map(|i| z[(i, j)]).collect();
        let y = m.matvec(&col);
        for i in 0..nf {
            mz[(i, j)] = y[i];
        }
    }
    z.adjoint() * mz
}

/// Smallest Rayleigh quotient of the curl energy against the L² norm on
/// the discrete constrained space null(Bᴴ) — the observed square of the
/// discrete Poincaré constant.
pub fn check_discrete_poincare(h: &CoupledFieldSpace, b: &SparseMat) -> Result<PropertyReport> {
    if h.dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge(h.dim, DENSE_LIMIT));
    }
    let e = assemble_curl_gram(h, DEFAULT_QUAD_DEGREE);
    let m = assemble_mass_gram(h, DEFAULT_QUAD_DEGREE);
    // Orthonormal basis of null(Bᴴ) = range(B)^⊥ from the full SVD of B.
    let svd = Svd::new(b.to_dense().as_ref()).map_err(|_| Error::FactorizationFailed)?;
    let smax = if b.ncols > 0 {
        svd.S().column_vector()[0].norm()
    } else {
        0.0
    };
    let rank = (0..b.ncols.min(b.nrows))
        .take_while(|&i| svd.S().column_vector()[i].norm() > 1e-10 * smax)
        .count();
    let u = svd.U();
    let nz = h.dim - rank;
    let mut z = Mat::<Complex>::zeros(h.dim, nz);
    for j in 0..nz {
        for i in 0..h.dim {
            z[(i, j)] = u[(i, rank + j)];
        }
    }
    let ep = to_dense_projected(&z, &e);
    let mp = to_dense_projected(&z, &m);
    let qz = GeneralizedEigen::new(ep.as_ref(), mp.as_ref())
        .map_err(|_| Error::FactorizationFailed)?;
    let mut min_q = f64::MAX;
    for i in 0..nz {
        let alpha: Complex = qz.S_a().column_vector()[i];
        let beta: Complex = qz.S_b().column_vector()[i];
        if beta.norm() > 1e-12 {
            min_q = min_q.min((alpha / beta).re);
        }
    }
    let n = (1.0 / h.mesh.h).round() as usize;
    let threshold = 1e-6;
    Ok(PropertyReport {
        property: "discrete Poincaré constant on null(Bᴴ)".into(),
        meshes: vec![n],
        observed: vec![min_q],
        threshold,
        pass: min_q > threshold,
    })
}

/// Solve the discrete source problem for a random load projected onto the
/// constrained component, and check that the multiplier vanishes, that
/// sparse and dense solves agree, and that the solve is linear.
pub fn check_source_consistency(
    h: &CoupledFieldSpace,
    q: &MultiplierSpace,
    coef_a: &CoefficientField,
    coef_n: &CoefficientField,
    seed: u64,
) -> Result<PropertyReport> {
    if h.dim + q.dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge(h.dim + q.dim, DENSE_LIMIT));
    }
    let a = assemble_a(h, coef_a, DEFAULT_QUAD_DEGREE);
    let c = assemble_c(h, coef_n, DEFAULT_QUAD_DEGREE);
    let b = assemble_b(q, h, coef_n, DEFAULT_QUAD_DEGREE)?;
    let g = build_gradient_matrix(q, h)?;
    let pencil = build_pencil(a, b, c)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<Complex> = (0..h.dim)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    // Project out the gradient load component: f ← f − G (GᴴCG)⁻¹ GᴴC f,
    // after which the multiplier of the saddle solve must vanish.
    let cf = pencil.c.matvec(&f);
    let gtcf = g.adjoint_matvec(&cf);
    let mut gcg = Mat::<Complex>::zeros(q.dim, q.dim);
    for j in 0..q.dim {
        let mut gj = vec![Complex::ZERO; h.dim];
        for (r, v) in g.col(j) {
            gj[r] = v;
        }
        let cgj = pencil.c.matvec(&gj);
        let col = g.adjoint_matvec(&cgj);
        for i in 0..q.dim {
            gcg[(i, j)] = col[i];
        }
    }
    let lu_gcg = PartialPivLu::new(gcg.as_ref());
    let mut y = Mat::<Complex>::zeros(q.dim, 1);
    for i in 0..q.dim {
        y[(i, 0)] = gtcf[i];
    }
    lu_gcg.solve_in_place(y.as_mut());
    let yv: Vec<Complex> = (0..q.dim).map(|i| y[(i, 0)]).collect();
    let gy = g.matvec(&yv);
    let f_proj: Vec<Complex> = f.iter().zip(&gy).map(|(a, b)| a - b).collect();

    let mut rhs = pencil.c.matvec(&f_proj);
    rhs.resize(pencil.dim(), Complex::ZERO);

    let k = pencil.k();
    let sparse = ShiftedSolver::new(&k).map_err(|_| Error::SingularSystem)?;
    let z_sparse = sparse.solve(&rhs).map_err(|_| Error::SingularSystem)?;

    let lu_dense = PartialPivLu::new(k.to_dense().as_ref());
    let mut zd = Mat::<Complex>::zeros(pencil.dim(), 1);
    for (i, v) in rhs.iter().enumerate() {
        zd[(i, 0)] = *v;
    }
    lu_dense.solve_in_place(zd.as_mut());
    let z_dense: Vec<Complex> = (0..pencil.dim()).map(|i| zd[(i, 0)]).collect();

    let scale = norm2(&z_dense);
    let agree = z_sparse
        .iter()
        .zip(&z_dense)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / scale;
    let mult_ratio = norm2(&z_sparse[pencil.n_field..]) / norm2(&z_sparse[..pencil.n_field]);

    // linearity: doubling the load doubles the solution
    let rhs2: Vec<Complex> = rhs.iter().map(|v| 2.0 * v).collect();
    let z2 = sparse.solve(&rhs2).map_err(|_| Error::SingularSystem)?;
    let lin_err = z2
        .iter()
        .zip(&z_sparse)
        .map(|(a, b)| (a - 2.0 * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / (2.0 * scale);

    let n = (1.0 / h.mesh.h).round() as usize;
    let pass = agree <= 1e-9 && mult_ratio <= 1e-9 && lin_err <= 1e-12;
    Ok(PropertyReport {
        property: format!(
            "source-problem consistency with A = {}, N = {}",
            coef_a.label, coef_n.label
        ),
        meshes: vec![n],
        observed: vec![agree, mult_ratio, lin_err],
        threshold: 1e-9,
        pass,
    })
}
