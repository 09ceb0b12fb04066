//! Shift-invert Arnoldi for the saddle-point pencil, plus a dense QZ
//! oracle for coarse meshes.
//!
//! The operator is y = (K − σM)⁻¹ M x. Because M annihilates the
//! multiplier block, Krylov vectors automatically satisfy the discrete
//! divergence constraint after the first application, and the singular
//! part of the pencil shows up as Ritz values θ ≈ 0, which are discarded.
//! Finite eigenvalues map back as λ = σ + 1/θ, and k = √λ on the
//! principal branch (Re k ≥ 0).

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::{Eigen, GeneralizedEigen, Solve};
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky,
    SymmetricOrdering,
};
use faer::sparse::linalg::solvers::{Lu as SparseLu, SymbolicLu};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Side};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assembly::Pencil;
use crate::error::{Error, Result};
use crate::Complex;

/// Ritz values below this magnitude on the shift-inverted operator are
/// images of the pencil's infinite eigenvalues.
const THETA_CUTOFF: f64 = 1e-10;

/// Dense-oracle size limit.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: Complex,
    /// √λ on the principal branch: Re k ≥ 0, and Im k ≥ 0 when Re k = 0.
    pub k: Complex,
    /// Eigenvector over [field | multiplier] blocks, unit 2-norm.
    pub vec: Vec<Complex>,
    /// ‖Kx − λMx‖ / (‖Kx‖ + |λ|‖Mx‖)
    pub residual: f64,
    /// ‖Bᴴ x_field‖ / ‖x_field‖
    pub constraint: f64,
    /// ‖x_mult‖ / ‖x_field‖
    pub multiplier_ratio: f64,
    /// λ has a complex-conjugate partner (reported once, Im k ≥ 0).
    pub conjugate_pair: bool,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub pairs: Vec<EigenPair>,
    pub shift: Complex,
    pub krylov_dim: usize,
    pub requested: usize,
}

enum Factor {
    /// Symmetric intranodal Bunch–Kaufman (LBLᵀ) with AMD ordering:
    /// roughly half the fill of unsymmetric LU on the saddle matrix.
    RealSym(Box<SymFactor>),
    Real(SparseLu<usize, f64>),
    Cplx(SparseLu<usize, Complex>),
}

struct SymFactor {
    symbolic: SymbolicCholesky<usize>,
    l_values: Vec<f64>,
    subdiag: Vec<f64>,
    perm_fwd: Vec<usize>,
    perm_inv: Vec<usize>,
    /// Original matrix, kept for one iterative-refinement pass (the
    /// intranodal pivoting alone is weaker than full partial pivoting).
    mat: crate::sparse::SparseMat,
}

impl SymFactor {
    fn new(mat: &crate::sparse::SparseMat) -> Result<Self> {
        let n = mat.nrows;
        let trips: Vec<Triplet<usize, usize, f64>> = mat
            .to_triplets()
            .into_iter()
            .map(|(r, c, v)| Triplet::new(r, c, v.re))
            .collect();
        let sp = SparseColMat::try_new_from_triplets(n, n, &trips)
            .map_err(|_| Error::FactorizationFailed)?;
        let symbolic = factorize_symbolic_cholesky(
            sp.symbolic(),
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams {
                // the simplicial fallback has no pivoting, which the
                // indefinite saddle matrix cannot tolerate
                supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
                ..Default::default()
            },
        )
        .map_err(|_| Error::FactorizationFailed)?;
        let mut l_values = vec![0.0f64; symbolic.len_val()];
        let mut subdiag = vec![0.0f64; n];
        let mut perm_fwd = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        let par = faer::get_global_parallelism();
        let mut mem = MemBuffer::try_new(
            symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(par, Default::default()),
        )
        .map_err(|_| Error::FactorizationFailed)?;
        symbolic.factorize_numeric_intranode_lblt::<f64>(
            &mut l_values,
            &mut subdiag,
            &mut perm_fwd,
            &mut perm_inv,
            sp.as_ref(),
            Side::Lower,
            par,
            MemStack::new(&mut mem),
            Default::default(),
        );
        if l_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::FactorizationFailed);
        }
        Ok(Self {
            symbolic,
            l_values,
            subdiag,
            perm_fwd,
            perm_inv,
            mat: mat.clone(),
        })
    }

    /// The intranodal pivoting can break down on small saddle matrices
    /// (no 2×2 pivots across supernode boundaries); detect that with a
    /// test solve so the caller can fall back to LU.
    fn healthy(&self) -> bool {
        let n = self.symbolic.nrows();
        let b = vec![Complex::ONE; n];
        match self.solve(&b) {
            Ok(x) => {
                let ax = self.mat.matvec(&x);
                let err: f64 = ax
                    .iter()
                    .zip(&b)
                    .map(|(a, bi)| (a - bi).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                err <= 1e-8 * (n as f64).sqrt()
            }
            Err(_) => false,
        }
    }

    fn raw_solve(&self, rhs: &mut Mat<f64>) -> Result<()> {
        let par = faer::get_global_parallelism();
        let perm = PermRef::new_checked(&self.perm_fwd, &self.perm_inv, self.symbolic.nrows());
        let lblt = IntranodeLbltRef::new(&self.symbolic, &self.l_values, &self.subdiag, perm);
        let mut mem = MemBuffer::try_new(
            self.symbolic
                .solve_in_place_scratch::<f64>(rhs.ncols(), par),
        )
        .map_err(|_| Error::FactorizationFailed)?;
        lblt.solve_in_place_with_conj(Conj::No, rhs.as_mut(), par, MemStack::new(&mut mem));
        Ok(())
    }

    fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        let n = self.symbolic.nrows();
        let has_im = b.iter().any(|z| z.im != 0.0);
        let ncols = if has_im { 2 } else { 1 };
        let pack = |v: &[Complex]| {
            let mut rhs = Mat::<f64>::zeros(n, ncols);
            for (i, z) in v.iter().enumerate() {
                rhs[(i, 0)] = z.re;
                if has_im {
                    rhs[(i, 1)] = z.im;
                }
            }
            rhs
        };
        let unpack = |rhs: &Mat<f64>| {
            (0..n)
                .map(|i| Complex::new(rhs[(i, 0)], if has_im { rhs[(i, 1)] } else { 0.0 }))
                .collect::<Vec<Complex>>()
        };
        let mut rhs = pack(b);
        self.raw_solve(&mut rhs)?;
        let mut x = unpack(&rhs);
        // one refinement pass against the exact matrix
        let ax = self.mat.matvec(&x);
        let r: Vec<Complex> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut rr = pack(&r);
        self.raw_solve(&mut rr)?;
        for (xi, di) in x.iter_mut().zip(unpack(&rr)) {
            *xi += di;
        }
        Ok(x)
    }
}

/// LU factorization of K − σM, staying in real arithmetic when the
/// shifted matrix is real.
pub(crate) struct ShiftedSolver {
    n: usize,
    factor: Factor,
}

impl ShiftedSolver {
    pub(crate) fn new(mat: &crate::sparse::SparseMat) -> Result<Self> {
        let n = mat.nrows;
        let sym_factor = if mat.is_real && mat.hermitian_error() <= 1e-12 * mat.max_abs() {
            SymFactor::new(mat).ok().filter(SymFactor::healthy)
        } else {
            None
        };
        let factor = if let Some(f) = sym_factor {
            Factor::RealSym(Box::new(f))
        } else if mat.is_real {
            let trips: Vec<Triplet<usize, usize, f64>> = mat
                .to_triplets()
                .into_iter()
                .map(|(r, c, v)| Triplet::new(r, c, v.re))
                .collect();
            let sp = SparseColMat::try_new_from_triplets(n, mat.ncols, &trips)
                .map_err(|_| Error::FactorizationFailed)?;
            let sym = SymbolicLu::try_new(sp.symbolic())
                .map_err(|_| Error::FactorizationFailed)?;
            let lu = SparseLu::try_new_with_symbolic(sym, sp.as_ref())
                .map_err(|_| Error::FactorizationFailed)?;
            Factor::Real(lu)
        } else {
            let trips: Vec<Triplet<usize, usize, Complex>> = mat
                .to_triplets()
                .into_iter()
                .map(|(r, c, v)| Triplet::new(r, c, v))
                .collect();
            let sp = SparseColMat::try_new_from_triplets(n, mat.ncols, &trips)
                .map_err(|_| Error::FactorizationFailed)?;
            let sym = SymbolicLu::try_new(sp.symbolic())
                .map_err(|_| Error::FactorizationFailed)?;
            let lu = SparseLu::try_new_with_symbolic(sym, sp.as_ref())
                .map_err(|_| Error::FactorizationFailed)?;
            Factor::Cplx(lu)
        };
        Ok(Self { n, factor })
    }

    pub(crate) fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        let n = self.n;
        let out = match &self.factor {
            Factor::RealSym(f) => f.solve(b)?,
            Factor::Real(lu) => {
                let has_im = b.iter().any(|z| z.im != 0.0);
                let ncols = if has_im { 2 } else { 1 };
                let mut rhs = Mat::<f64>::zeros(n, ncols);
                for (i, z) in b.iter().enumerate() {
                    rhs[(i, 0)] = z.re;
                    if has_im {
                        rhs[(i, 1)] = z.im;
                    }
                }
                lu.solve_in_place(rhs.as_mut());
                (0..n)
                    .map(|i| Complex::new(rhs[(i, 0)], if has_im { rhs[(i, 1)] } else { 0.0 }))
                    .collect::<Vec<_>>()
            }
            Factor::Cplx(lu) => {
                let mut rhs = Mat::<Complex>::zeros(n, 1);
                for (i, z) in b.iter().enumerate() {
                    rhs[(i, 0)] = *z;
                }
                lu.solve_in_place(rhs.as_mut());
                (0..n).map(|i| rhs[(i, 0)]).collect::<Vec<_>>()
            }
        };
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::FactorizationFailed);
        }
        Ok(out)
    }
}

fn cdot(a: &[Complex], b: &[Complex]) -> Complex {
    // aᴴ b
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Restart-free Arnoldi with one reorthogonalization pass. Returns the
/// orthonormal basis (m_eff + 1 vectors unless the space was exhausted)
/// and the (m_eff + 1) × m_eff Hessenberg matrix, row-major.
fn arnoldi(
    op: impl Fn(&[Complex]) -> Result<Vec<Complex>>,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(Vec<Vec<Complex>>, Vec<Complex>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0: Vec<Complex> = (0..n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    let nv = norm2(&v0);
    for z in v0.iter_mut() {
        *z /= nv;
    }
    let mut basis = vec![v0];
    let mut h = vec![Complex::ZERO; (m + 1) * m];
    let mut m_eff = m;
    for j in 0..m {
        let mut w = op(&basis[j])?;
        for (i, vi) in basis.iter().enumerate() {
            let hij = cdot(vi, &w);
            for (wk, vk) in w.iter_mut().zip(vi) {
                *wk -= hij * vk;
            }
            h[i * m + j] = hij;
        }
        for (i, vi) in basis.iter().enumerate() {
            let c = cdot(vi, &w);
            for (wk, vk) in w.iter_mut().zip(vi) {
                *wk -= c * vk;
            }
            h[i * m + j] += c;
        }
        let hnext = norm2(&w);
        h[(j + 1) * m + j] = Complex::new(hnext, 0.0);
        if hnext < 1e-14 {
            m_eff = j + 1;
            break;
        }
        for z in w.iter_mut() {
            *z /= hnext;
        }
        basis.push(w);
    }
    Ok((basis, h, m_eff))
}

/// Solve K x = λ M x for the eigenvalues nearest σ.
///
/// Returns every converged finite pair (at least `nev` requested; the
/// Krylov size is 4·nev + 20). Conjugate pairs are merged into a single
/// entry with Im k ≥ 0.
pub fn shift_invert_solve(
    pencil: &Pencil,
    sigma: Complex,
    nev: usize,
    tol: f64,
) -> Result<EigenResult> {
    assert!(nev >= 1);
    let dim = pencil.dim();
    let m = (4 * nev + 20).min(dim);
    let k_mat = pencil.k();
    let m_mat = pencil.m();
    let solver = ShiftedSolver::new(&pencil.shifted(sigma))?;
    let op = |x: &[Complex]| solver.solve(&m_mat.matvec(x));
    let (basis, h, m_eff) = arnoldi(op, dim, m, 0x0a41)?;

    // Ritz pairs of the Hessenberg block.
    let mut hsq = Mat::<Complex>::zeros(m_eff, m_eff);
    for i in 0..m_eff {
        for j in 0..m_eff {
            hsq[(i, j)] = h[i * m + j];
        }
    }
    let evd = Eigen::new(hsq.as_ref()).map_err(|_| Error::FactorizationFailed)?;
    let h_last = if m_eff < m || basis.len() > m_eff {
        h[m_eff * m + m_eff - 1].norm()
    } else {
        0.0
    };

    struct Candidate {
        lambda: Complex,
        vec: Vec<Complex>,
        residual: f64,
    }
    let mut cands: Vec<Candidate> = Vec::new();
    for r in 0..m_eff {
        let theta: Complex = evd.S().column_vector()[r];
        if theta.norm() < THETA_CUTOFF {
            continue;
        }
        // cheap Arnoldi residual estimate on the shift-inverted operator
        let y_last = evd.U()[(m_eff - 1, r)];
        let est = h_last * y_last.norm();
        if est > tol * theta.norm().max(1e-3) {
            continue;
        }
        let lambda = sigma + theta.inv();
        let mut x = vec![Complex::ZERO; dim];
        for j in 0..m_eff {
            let yj = evd.U()[(j, r)];
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
        let nx = norm2(&x);
        if nx == 0.0 {
            continue;
        }
        for z in x.iter_mut() {
            *z /= nx;
        }
        let kx = k_mat.matvec(&x);
        let mx = m_mat.matvec(&x);
        let num: f64 = kx
            .iter()
            .zip(&mx)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = norm2(&kx) + lambda.norm() * norm2(&mx);
        let residual = num / den;
        if residual <= tol {
            cands.push(Candidate {
                lambda,
                vec: x,
                residual,
            });
        }
    }

    // Deduplicate copies of the same eigenvalue (keep the best residual).
    cands.sort_by(|a, b| {
        (a.lambda.re, a.lambda.im)
            .partial_cmp(&(b.lambda.re, b.lambda.im))
            .unwrap()
    });
    let mut dedup: Vec<Candidate> = Vec::new();
    for c in cands {
        if let Some(last) = dedup.last_mut() {
            if (last.lambda - c.lambda).norm() <= 1e-10 * last.lambda.norm().max(1.0) {
                if c.residual < last.residual {
                    *last = c;
                }
                continue;
            }
        }
        dedup.push(c);
    }

    // Merge conjugate pairs: keep the Im λ ≥ 0 representative.
    let lam_tol = |l: Complex| 1e-8 * (1.0 + l.norm());
    let mut used = vec![false; dedup.len()];
    let mut merged: Vec<(Candidate, bool)> = Vec::new();
    for i in 0..dedup.len() {
        if used[i] {
            continue;
        }
        let li = dedup[i].lambda;
        if li.im.abs() <= lam_tol(li) {
            used[i] = true;
            let c = std::mem::replace(
                &mut dedup[i],
                Candidate {
                    lambda: Complex::ZERO,
                    vec: Vec::new(),
                    residual: 0.0,
                },
            );
            merged.push((c, false));
            continue;
        }
        let partner = (0..dedup.len()).find(|&j| {
            j != i && !used[j] && (dedup[j].lambda - li.conj()).norm() <= lam_tol(li)
        });
        used[i] = true;
        let mut keep = i;
        if let Some(j) = partner {
            used[j] = true;
            if dedup[j].lambda.im > dedup[keep].lambda.im {
                keep = j;
            }
        }
        let c = std::mem::replace(
            &mut dedup[keep],
            Candidate {
                lambda: Complex::ZERO,
                vec: Vec::new(),
                residual: 0.0,
            },
        );
        merged.push((c, partner.is_some()));
    }

    let mut pairs: Vec<EigenPair> = merged
        .into_iter()
        .map(|(c, conj_pair)| {
            let k = principal_sqrt(c.lambda);
            let x_field = &c.vec[..pencil.n_field];
            let x_mult = &c.vec[pencil.n_field..];
            let nf = norm2(x_field);
            let bhx = pencil.b.adjoint_matvec(x_field);
            EigenPair {
                lambda: c.lambda,
                k,
                residual: c.residual,
                constraint: norm2(&bhx) / nf,
                multiplier_ratio: norm2(x_mult) / nf,
                conjugate_pair: conj_pair,
                vec: c.vec,
            }
        })
        .collect();
    pairs.sort_by(|a, b| (a.k.re, a.k.im).partial_cmp(&(b.k.re, b.k.im)).unwrap());

    if pairs.is_empty() {
        return Err(Error::NoConvergence {
            converged: 0,
            requested: nev,
        });
    }
    Ok(EigenResult {
        pairs,
        shift: sigma,
        krylov_dim: m_eff,
        requested: nev,
    })
}

/// Principal square root with Re k ≥ 0, and Im k ≥ 0 on the cut.
pub fn principal_sqrt(lambda: Complex) -> Complex {
    let k = lambda.sqrt();
    if k.re < 0.0 || (k.re == 0.0 && k.im < 0.0) {
        -k
    } else {
        k
    }
}

/// All finite generalized eigenvalues of the pencil by dense QZ;
/// infinite eigenvalues (|β| < 1e-12) are excluded.
pub fn dense_qz(pencil: &Pencil) -> Result<Vec<Complex>> {
    let dim = pencil.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge(dim, DENSE_LIMIT));
    }
    let k = pencil.k().to_dense();
    let m = pencil.m().to_dense();
    let qz =
        GeneralizedEigen::new(k.as_ref(), m.as_ref()).map_err(|_| Error::FactorizationFailed)?;
    let alpha = qz.S_a();
    let beta = qz.S_b();
    let mut out = Vec::new();
    for i in 0..dim {
        let a: Complex = alpha.column_vector()[i];
        let b: Complex = beta.column_vector()[i];
        if b.norm() > 1e-12 {
            out.push(a / b);
        }
    }
    Ok(out)
}

/// The `count` eigenvalues with smallest Re k (ties by Im k); conjugate
/// pairs already count once.
pub fn select_lowest(result: &EigenResult, count: usize) -> Result<Vec<EigenPair>> {
    if result.pairs.is_empty() {
        return Err(Error::NoEigenvaluesInWindow);
    }
    Ok(result.pairs.iter().take(count).cloned().collect())
}
