//! Dense trivariate polynomials of total degree ≤ 2.
//!
//! Just enough symbolic algebra to construct edge-element shape functions
//! and their exact curls; everything downstream works with tabulated point
//! values.

/// Exponents (a, b, c) of the 10 monomials x^a y^b z^c, degree ≤ 2.
pub const MONOMIALS: [[usize; 3]; 10] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
    [0, 2, 0],
    [0, 1, 1],
    [0, 0, 2],
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly3 {
    pub coeffs: [f64; 10],
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.coeffs[0] = c;
        p
    }

    /// The coordinate polynomial x_axis.
    pub fn coord(axis: usize) -> Self {
        let mut p = Self::zero();
        p.coeffs[1 + axis] = 1.0;
        p
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let mut v = 0.0;
        for (c, m) in self.coeffs.iter().zip(MONOMIALS) {
            if *c != 0.0 {
                v += c * p[0].powi(m[0] as i32) * p[1].powi(m[1] as i32) * p[2].powi(m[2] as i32);
            }
        }
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = *self;
        for (a, b) in r.coeffs.iter_mut().zip(other.coeffs) {
            *a += b;
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        for a in r.coeffs.iter_mut() {
            *a *= s;
        }
        r
    }

    /// Multiply by the coordinate x_axis; panics if the result would exceed
    /// degree 2.
    pub fn mul_coord(&self, axis: usize) -> Self {
        let mut r = Self::zero();
        for (c, m) in self.coeffs.iter().zip(MONOMIALS) {
            if *c == 0.0 {
                continue;
            }
            let mut e = m;
            e[axis] += 1;
            let idx = MONOMIALS
                .iter()
                .position(|mm| *mm == e)
                .expect("product exceeds degree 2");
            r.coeffs[idx] += c;
        }
        r
    }

    pub fn diff(&self, axis: usize) -> Self {
        let mut r = Self::zero();
        for (c, m) in self.coeffs.iter().zip(MONOMIALS) {
            if *c == 0.0 || m[axis] == 0 {
                continue;
            }
            let mut e = m;
            e[axis] -= 1;
            let idx = MONOMIALS.iter().position(|mm| *mm == e).unwrap();
            r.coeffs[idx] += c * m[axis] as f64;
        }
        r
    }
}

/// A polynomial vector field.
pub type VecPoly3 = [Poly3; 3];

pub fn vec_zero() -> VecPoly3 {
    [Poly3::zero(), Poly3::zero(), Poly3::zero()]
}

/// Constant unit vector e_i as a polynomial field.
pub fn unit(i: usize) -> VecPoly3 {
    let mut v = vec_zero();
    v[i] = Poly3::constant(1.0);
    v
}

pub fn vec_add(a: &VecPoly3, b: &VecPoly3) -> VecPoly3 {
    [a[0].add(&b[0]), a[1].add(&b[1]), a[2].add(&b[2])]
}

pub fn vec_scale(a: &VecPoly3, s: f64) -> VecPoly3 {
    [a[0].scale(s), a[1].scale(s), a[2].scale(s)]
}

/// Multiply every component by the coordinate x_axis.
pub fn vec_mul_coord(a: &VecPoly3, axis: usize) -> VecPoly3 {
    [
        a[0].mul_coord(axis),
        a[1].mul_coord(axis),
        a[2].mul_coord(axis),
    ]
}

/// x × v with x = (x, y, z) the position field.
pub fn position_cross(v: &VecPoly3) -> VecPoly3 {
    [
        v[2].mul_coord(1).add(&v[1].mul_coord(2).scale(-1.0)),
        v[0].mul_coord(2).add(&v[2].mul_coord(0).scale(-1.0)),
        v[1].mul_coord(0).add(&v[0].mul_coord(1).scale(-1.0)),
    ]
}

pub fn curl(v: &VecPoly3) -> VecPoly3 {
    [
        v[2].diff(1).add(&v[1].diff(2).scale(-1.0)),
        v[0].diff(2).add(&v[2].diff(0).scale(-1.0)),
        v[1].diff(0).add(&v[0].diff(1).scale(-1.0)),
    ]
}

pub fn vec_eval(v: &VecPoly3, p: [f64; 3]) -> [f64; 3] {
    [v[0].eval(p), v[1].eval(p), v[2].eval(p)]
}
