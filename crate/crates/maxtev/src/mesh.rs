//! Structured tetrahedral meshes of the unit cube and the thick L-shaped
//! prism, plus edge/face incidence used by the conforming spaces.
//!
//! Both domains are partitioned into axis-aligned cubes of side `h = 1/n`;
//! each cube gains a body-center vertex and contributes 12 tetrahedra.
//! Across each interior square face the four tetrahedra span the two
//! adjacent body centers and one face edge each (the Delaunay tetrahedra
//! of the grid-plus-centers point set); each boundary square face is split
//! into two triangles joined to its body center, with the diagonal picked
//! by a deterministic hash so that no exact mesh symmetry survives.

use crate::error::{Error, Result};

/// Local edges of the reference tetrahedron, low vertex first.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local faces of the reference tetrahedron, sorted triples.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// The six permutations of three items, used as face orientation codes.
/// `PERMS3[code][i]` is the local slot holding the i-th smallest global
/// vertex of the face.
pub const PERMS3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Cube,
    ThickL,
}

impl Domain {
    pub fn build_mesh(self, n: usize) -> Result<TetMesh> {
        match self {
            Domain::Cube => build_cube_mesh(n),
            Domain::ThickL => build_thick_l_mesh(n),
        }
    }

    /// Axis-aligned bounding box as (lower corner, upper corner).
    pub fn bounding_box(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Domain::Cube => ([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
            Domain::ThickL => ([-1.0, -1.0, 0.0], [1.0, 1.0, 1.0]),
        }
    }

    pub fn contains(self, p: [f64; 3]) -> bool {
        let (lo, hi) = self.bounding_box();
        let in_box = (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i]);
        match self {
            Domain::Cube => in_box,
            Domain::ThickL => in_box && !(p[0] <= 0.0 && p[1] <= 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TetMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Vertex indices per tet, positively oriented.
    pub tets: Vec<[usize; 4]>,
    /// Deduplicated edges, low vertex first, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// Deduplicated faces, vertices ascending, sorted lexicographically.
    pub faces: Vec<[usize; 3]>,
    /// Per tet: global edge index and sign for each local edge. The sign is
    /// +1 when the local low-to-high direction agrees with the global
    /// low-to-high convention.
    pub tet_edges: Vec<[(usize, i8); 6]>,
    /// Per tet: global face index and permutation code (index into
    /// [`PERMS3`]) for each local face.
    pub tet_faces: Vec<[(usize, u8); 4]>,
    pub vertex_boundary: Vec<bool>,
    pub edge_boundary: Vec<bool>,
    pub face_boundary: Vec<bool>,
    /// Mesh size h = 1/n.
    pub h: f64,
}

impl TetMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edge_boundary.iter().filter(|b| **b).count()
    }
    pub fn n_boundary_faces(&self) -> usize {
        self.face_boundary.iter().filter(|b| **b).count()
    }

    /// V - E + F - T, equal to 1 for contractible domains.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
            - self.n_tets() as i64
    }

    pub fn tet_vertices(&self, t: usize) -> [[f64; 3]; 4] {
        let tv = self.tets[t];
        [
            self.vertices[tv[0]],
            self.vertices[tv[1]],
            self.vertices[tv[2]],
            self.vertices[tv[3]],
        ]
    }
}

fn signed_volume(v: &[[f64; 3]; 4]) -> f64 {
    let a = sub(v[1], v[0]);
    let b = sub(v[2], v[0]);
    let c = sub(v[3], v[0]);
    det3(a, b, c) / 6.0
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Structured mesh of the unit cube (0,1)^3 with n^3 cubes, 12 tets each.
pub fn build_cube_mesh(n: usize) -> Result<TetMesh> {
    assert!(n >= 1);
    build_block_mesh(n, [0.0, 0.0, 0.0], n, n, n, |_, _, _| true)
}

/// Structured mesh of the thick L-shaped prism
/// ((-1,1)^2 \ (-1,0]^2) x (0,1) with 3n^3 cubes.
pub fn build_thick_l_mesh(n: usize) -> Result<TetMesh> {
    assert!(n >= 1);
    // Cube (i,j,k) spans [-1+ih, -1+(i+1)h] x [-1+jh, ...] x [kh, ...];
    // the excluded quadrant is i < n and j < n.
    build_block_mesh(n, [-1.0, -1.0, 0.0], 2 * n, 2 * n, n, move |i, j, _| i >= n || j >= n)
}

fn build_block_mesh(
    n: usize,
    origin: [f64; 3],
    nx: usize,
    ny: usize,
    nz: usize,
    cube_included: impl Fn(usize, usize, usize) -> bool,
) -> Result<TetMesh> {
    let h = 1.0 / n as f64;

    // A grid vertex belongs to the closure of the domain iff it touches an
    // included cube.
    let grid_id = |i: usize, j: usize, k: usize| (i * (ny + 1) + j) * (nz + 1) + k;
    let mut grid_used = vec![false; (nx + 1) * (ny + 1) * (nz + 1)];
    let mut cubes = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                if cube_included(i, j, k) {
                    cubes.push([i, j, k]);
                    for di in 0..2 {
                        for dj in 0..2 {
                            for dk in 0..2 {
                                grid_used[grid_id(i + di, j + dj, k + dk)] = true;
                            }
                        }
                    }
                }
            }
        }
    }

    // Grid vertices first in lexicographic (x1, x2, x3) order, then cube
    // centers in cube-lexicographic order.
    let mut vertices = Vec::new();
    let mut grid_vertex = vec![usize::MAX; grid_used.len()];
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..=nz {
                let g = grid_id(i, j, k);
                if grid_used[g] {
                    grid_vertex[g] = vertices.len();
                    vertices.push([
                        origin[0] + i as f64 * h,
                        origin[1] + j as f64 * h,
                        origin[2] + k as f64 * h,
                    ]);
                }
            }
        }
    }
    let cube_id = |i: usize, j: usize, k: usize| (i * ny + j) * nz + k;
    let mut center_of = vec![usize::MAX; nx * ny * nz];
    for &[ci, cj, ck] in &cubes {
        center_of[cube_id(ci, cj, ck)] = vertices.len();
        vertices.push([
            origin[0] + (ci as f64 + 0.5) * h,
            origin[1] + (cj as f64 + 0.5) * h,
            origin[2] + (ck as f64 + 0.5) * h,
        ]);
    }
    let mut tets = Vec::new();
    let mut push_tet = |tet: [usize; 4], vertices: &[[f64; 3]]| {
        let mut tet = tet;
        let vs = [
            vertices[tet[0]],
            vertices[tet[1]],
            vertices[tet[2]],
            vertices[tet[3]],
        ];
        if signed_volume(&vs) < 0.0 {
            tet.swap(1, 2);
        }
        tets.push(tet);
    };
    for &[ci, cj, ck] in &cubes {
        let center = center_of[cube_id(ci, cj, ck)];
        let corner = |di: usize, dj: usize, dk: usize| {
            grid_vertex[grid_id(ci + di, cj + dj, ck + dk)]
        };
        // Six cube faces: fixed axis d at side s, spanned by axes d1, d2.
        for d in 0..3 {
            for s in 0..2 {
                let at = |a: usize, b: usize| {
                    let mut off = [0usize; 3];
                    off[d] = s;
                    off[(d + 1) % 3] = a;
                    off[(d + 2) % 3] = b;
                    corner(off[0], off[1], off[2])
                };
                let (p00, p10, p01, p11) = (at(0, 0), at(1, 0), at(0, 1), at(1, 1));
                // neighbor cube across this face, if included
                let mut nb = [ci as isize, cj as isize, ck as isize];
                nb[d] += if s == 1 { 1 } else { -1 };
                let neighbor = if nb[0] >= 0
                    && nb[1] >= 0
                    && nb[2] >= 0
                    && (nb[0] as usize) < nx
                    && (nb[1] as usize) < ny
                    && (nb[2] as usize) < nz
                {
                    let c2 = center_of[cube_id(nb[0] as usize, nb[1] as usize, nb[2] as usize)];
                    if c2 == usize::MAX {
                        None
                    } else {
                        Some(c2)
                    }
                } else {
                    None
                };
                match neighbor {
                    Some(c2) if s == 1 => {
                        for (u, v) in [(p00, p10), (p10, p11), (p11, p01), (p01, p00)] {
                            push_tet([center, c2, u, v], &vertices);
                        }
                    }
                    Some(_) => {}
                    None => {
                        // Boundary face: split by a diagonal chosen from a
                        // deterministic hash of the face identity. The
                        // scrambled pattern leaves no exact mesh symmetry,
                        // so eigenvalue clusters split into simple discrete
                        // eigenvalues instead of exact multiples.
                        let mut x = (ci.wrapping_mul(73_856_093)
                            ^ cj.wrapping_mul(19_349_663)
                            ^ ck.wrapping_mul(83_492_791)
                            ^ (d * 2 + s).wrapping_mul(2_654_435_761))
                            as u64;
                        x ^= x >> 33;
                        x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
                        x ^= x >> 33;
                        let tris = if x & 1 == 0 {
                            [[p00, p10, p11], [p00, p11, p01]]
                        } else {
                            [[p10, p01, p00], [p10, p11, p01]]
                        };
                        for tri in tris {
                            push_tet([tri[0], tri[1], tri[2], center], &vertices);
                        }
                    }
                }
            }
        }
    }

    build_topology(vertices, tets, h)
}

/// Complete a mesh given vertices and positively oriented tets: deduplicate
/// edges and faces, fill incidence with orientation data, and set boundary
/// flags from face multiplicity.
pub fn build_topology(vertices: Vec<[f64; 3]>, tets: Vec<[usize; 4]>, h: f64) -> Result<TetMesh> {
    for (t, tet) in tets.iter().enumerate() {
        let vs = [
            vertices[tet[0]],
            vertices[tet[1]],
            vertices[tet[2]],
            vertices[tet[3]],
        ];
        if signed_volume(&vs) <= 0.0 {
            return Err(Error::InvertedTet(t));
        }
    }

    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(tets.len() * 6);
    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(tets.len() * 4);
    for tet in &tets {
        for [a, b] in TET_EDGES {
            let (x, y) = (tet[a], tet[b]);
            edges.push(if x < y { [x, y] } else { [y, x] });
        }
        for [a, b, c] in TET_FACES {
            let mut f = [tet[a], tet[b], tet[c]];
            f.sort_unstable();
            faces.push(f);
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut face_mult: Vec<([usize; 3], u8)> = Vec::with_capacity(faces.len());
    faces.sort_unstable();
    for f in faces {
        match face_mult.last_mut() {
            Some((g, m)) if *g == f => {
                *m += 1;
                if *m > 2 {
                    return Err(Error::NonManifoldFace(f[0], f[1], f[2]));
                }
            }
            _ => face_mult.push((f, 1)),
        }
    }
    let faces: Vec<[usize; 3]> = face_mult.iter().map(|(f, _)| *f).collect();
    let face_boundary: Vec<bool> = face_mult.iter().map(|(_, m)| *m == 1).collect();

    let edge_index = |e: [usize; 2]| edges.binary_search(&e).expect("edge present");
    let face_index = |f: [usize; 3]| faces.binary_search(&f).expect("face present");

    let mut tet_edges = Vec::with_capacity(tets.len());
    let mut tet_faces = Vec::with_capacity(tets.len());
    for tet in &tets {
        let mut te = [(0usize, 0i8); 6];
        for (le, [a, b]) in TET_EDGES.iter().enumerate() {
            let (x, y) = (tet[*a], tet[*b]);
            let (key, sign) = if x < y { ([x, y], 1) } else { ([y, x], -1) };
            te[le] = (edge_index(key), sign);
        }
        let mut tf = [(0usize, 0u8); 4];
        for (lf, [a, b, c]) in TET_FACES.iter().enumerate() {
            let g = [tet[*a], tet[*b], tet[*c]];
            let mut sorted = g;
            sorted.sort_unstable();
            let perm = PERMS3
                .iter()
                .position(|p| [g[p[0]], g[p[1]], g[p[2]]] == sorted)
                .expect("permutation of three distinct values");
            tf[lf] = (face_index(sorted), perm as u8);
        }
        tet_edges.push(te);
        tet_faces.push(tf);
    }

    let mut vertex_boundary = vec![false; vertices.len()];
    let mut edge_boundary = vec![false; edges.len()];
    for (fi, f) in faces.iter().enumerate() {
        if face_boundary[fi] {
            for &v in f {
                vertex_boundary[v] = true;
            }
            for e in [[f[0], f[1]], [f[0], f[2]], [f[1], f[2]]] {
                edge_boundary[edge_index(e)] = true;
            }
        }
    }

    Ok(TetMesh {
        vertices,
        tets,
        edges,
        faces,
        tet_edges,
        tet_faces,
        vertex_boundary,
        edge_boundary,
        face_boundary,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_counts(n: usize) -> (usize, usize, usize) {
        let v = (n + 1).pow(3) + n.pow(3);
        let e = 3 * n * (n + 1).pow(2) + 3 * (n + 1) * n.pow(2) + 8 * n.pow(3);
        let t = 12 * n.pow(3);
        (v, e, t)
    }

    #[test]
    fn cube_n1_counts() {
        let m = build_cube_mesh(1).unwrap();
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_tets(), 12);
        assert_eq!(m.n_edges(), 26);
        assert_eq!(m.n_faces(), 30);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.n_boundary_faces(), 12);
        assert_eq!(m.n_boundary_edges(), 18);
    }

    #[test]
    fn cube_n6_counts() {
        let m = build_cube_mesh(6).unwrap();
        assert_eq!(m.n_vertices(), 559);
        assert_eq!(m.n_edges(), 3366);
        assert_eq!(m.n_tets(), 2592);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn thick_l_n1_counts() {
        let m = build_thick_l_mesh(1).unwrap();
        assert_eq!(m.n_vertices(), 19);
        assert_eq!(m.n_tets(), 36);
        assert_eq!(m.n_edges(), 68);
        assert_eq!(m.n_faces(), 86);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.n_boundary_faces(), 28);
        assert_eq!(m.n_boundary_edges(), 42);
    }

    #[test]
    fn thick_l_n4_tet_count() {
        let m = build_thick_l_mesh(4).unwrap();
        assert_eq!(m.n_tets(), 36 * 64);
    }

    #[test]
    fn single_tet_topology() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let m = build_topology(vertices, vec![[0, 1, 2, 3]], 1.0).unwrap();
        assert_eq!(m.n_edges(), 6);
        assert_eq!(m.n_faces(), 4);
        assert!(m.face_boundary.iter().all(|&b| b));
        assert!(m.edge_boundary.iter().all(|&b| b));
    }

    #[test]
    fn inverted_tet_rejected() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let err = build_topology(vertices, vec![[0, 2, 1, 3]], 1.0).unwrap_err();
        assert!(matches!(err, Error::InvertedTet(0)));
    }

    #[test]
    fn invariants_over_refinements() {
        for n in 1..=8 {
            for domain in [Domain::Cube, Domain::ThickL] {
                let m = domain.build_mesh(n).unwrap();
                assert_eq!(m.euler_characteristic(), 1, "{domain:?} n={n}");
                for t in 0..m.n_tets() {
                    assert!(signed_volume(&m.tet_vertices(t)) > 0.0);
                }
                if domain == Domain::Cube {
                    let (v, e, t) = cube_counts(n);
                    assert_eq!(m.n_vertices(), v);
                    assert_eq!(m.n_edges(), e);
                    assert_eq!(m.n_tets(), t);
                    assert_eq!(m.n_boundary_faces(), 12 * n * n);
                    assert_eq!(
                        m.n_boundary_edges(),
                        6 * 2 * n * (n + 1) - 12 * n + 6 * n * n
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_face_iff_boundary_subentities() {
        for domain in [Domain::Cube, Domain::ThickL] {
            let m = domain.build_mesh(2).unwrap();
            let eidx = |e: [usize; 2]| m.edges.binary_search(&e).unwrap();
            for (fi, f) in m.faces.iter().enumerate() {
                let sub_all_boundary = f.iter().all(|&v| m.vertex_boundary[v])
                    && [[f[0], f[1]], [f[0], f[2]], [f[1], f[2]]]
                        .into_iter()
                        .all(|e| m.edge_boundary[eidx(e)]);
                assert_eq!(m.face_boundary[fi], sub_all_boundary);
            }
        }
    }

    #[test]
    fn cube_mesh_is_conforming() {
        // every face belongs to one or two tets; counted during topology
        // construction, so reaching here means no NonManifoldFace. Check the
        // interior/boundary split adds up instead.
        let m = build_cube_mesh(3).unwrap();
        let incidences = 4 * m.n_tets();
        let nb = m.n_boundary_faces();
        assert_eq!(incidences, nb + 2 * (m.n_faces() - nb));
    }
}
