//! Artifact emission: legacy-ASCII VTK meshes and eigenfields,
//! MatrixMarket dumps, and atomic file writes.
//!
//! Eigenfields are written as per-cell data: the selected field is
//! evaluated at each tetrahedron barycenter, pushed to physical space,
//! and the real parts of its three components are stored as one cell
//! vector, scaled so the largest component magnitude is 1.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::elements::{AffineMap, EdgeBasis};
use crate::error::{Error, Result};
use crate::mesh::TetMesh;
use crate::spaces::{eval_coupled_on_element, CoupledFieldSpace};
use crate::sparse::SparseMat;
use crate::Complex;

/// Which coupled-field combination to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSelect {
    /// The second field υ.
    V,
    /// The difference ω − υ (vanishing tangential trace).
    WMinusV,
}

impl FromStr for FieldSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(FieldSelect::V),
            "w-minus-v" => Ok(FieldSelect::WMinusV),
            other => Err(Error::SpaceMismatch(format!(
                "unknown field selection `{other}`, expected `v` or `w-minus-v`"
            ))),
        }
    }
}

impl FieldSelect {
    fn name(self) -> &'static str {
        match self {
            FieldSelect::V => "v",
            FieldSelect::WMinusV => "w_minus_v",
        }
    }
}

/// Physical-space value of the selected field at reference points of one
/// element.
pub(crate) fn eval_selected(
    h: &CoupledFieldSpace,
    basis: &EdgeBasis,
    field: &[Complex],
    t: usize,
    ref_pts: &[[f64; 3]],
    which: FieldSelect,
) -> Vec<[Complex; 3]> {
    let (w, v) = eval_coupled_on_element(h, basis, field, t, ref_pts);
    let map = AffineMap::new(&h.mesh.tet_vertices(t)).expect("mesh is valid");
    w.iter()
        .zip(&v)
        .map(|(wv, vv)| {
            let raw = match which {
                FieldSelect::V => *vv,
                FieldSelect::WMinusV => [wv[0] - vv[0], wv[1] - vv[1], wv[2] - vv[2]],
            };
            let re = map.push_vector([raw[0].re, raw[1].re, raw[2].re]);
            let im = map.push_vector([raw[0].im, raw[1].im, raw[2].im]);
            [
                Complex::new(re[0], im[0]),
                Complex::new(re[1], im[1]),
                Complex::new(re[2], im[2]),
            ]
        })
        .collect()
}

/// Legacy-ASCII VTK of an eigenfield: the mesh plus one cell-data vector
/// holding the real parts of the selected field at each tet barycenter,
/// scaled so the largest component magnitude is 1 (zero fields stay zero).
///
/// `field` must be the field block of an eigenvector, length `h.dim`.
pub fn export_fields(
    h: &CoupledFieldSpace,
    field: &[Complex],
    which: FieldSelect,
) -> Result<String> {
    if field.len() != h.dim {
        return Err(Error::SpaceMismatch(format!(
            "eigenvector field block has length {}, space dimension is {}",
            field.len(),
            h.dim
        )));
    }
    let mesh = &h.mesh;
    let basis = EdgeBasis::new(h.order)?;
    let bary = [[0.25, 0.25, 0.25]];
    let mut cells: Vec<[f64; 3]> = Vec::with_capacity(mesh.n_tets());
    for t in 0..mesh.n_tets() {
        let val = eval_selected(h, &basis, field, t, &bary, which)[0];
        cells.push([val[0].re, val[1].re, val[2].re]);
    }
    let peak = cells
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if peak > 0.0 {
        for c in &mut cells {
            for x in c.iter_mut() {
                *x /= peak;
            }
        }
    }
    let mut s = vtk_mesh_header(mesh, "eigenfield");
    let _ = write!(s, "CELL_DATA {}\n", mesh.n_tets());
    let _ = write!(s, "VECTORS {} double\n", which.name());
    for c in &cells {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    Ok(s)
}

/// Legacy-ASCII VTK of a mesh without attached data.
pub fn mesh_vtk(mesh: &TetMesh) -> String {
    vtk_mesh_header(mesh, "mesh")
}

fn vtk_mesh_header(mesh: &TetMesh, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.n_tets(), 5 * mesh.n_tets());
    for t in &mesh.tets {
        let _ = writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_tets());
    for _ in 0..mesh.n_tets() {
        let _ = writeln!(s, "10");
    }
    s
}

/// MatrixMarket coordinate dump (1-based, general symmetry; real when
/// every entry is real, complex otherwise).
pub fn matrix_market(mat: &SparseMat) -> String {
    let mut s = String::new();
    let kind = if mat.is_real { "real" } else { "complex" };
    let _ = writeln!(s, "%%MatrixMarket matrix coordinate {kind} general");
    let trips = mat.to_triplets();
    let _ = writeln!(s, "{} {} {}", mat.nrows, mat.ncols, trips.len());
    for (r, c, v) in trips {
        if mat.is_real {
            let _ = writeln!(s, "{} {} {}", r + 1, c + 1, v.re);
        } else {
            let _ = writeln!(s, "{} {} {} {}", r + 1, c + 1, v.re, v.im);
        }
    }
    s
}

/// Write `contents` to `path` atomically: a sibling temp file is written
/// in full, then renamed over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::SpaceMismatch(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_a, assemble_b, assemble_c, build_pencil, DEFAULT_QUAD_DEGREE};
    use crate::coefficients::make_preset;
    use crate::eigensolver::shift_invert_solve;
    use crate::mesh::{Domain, TET_FACES};
    use crate::spaces::{build_coupled_field_space, build_multiplier_space};
    use std::sync::Arc;

    fn cube_space(n: usize, order: usize) -> CoupledFieldSpace {
        let mesh = Arc::new(Domain::Cube.build_mesh(n).unwrap());
        build_coupled_field_space(mesh, order).unwrap()
    }

    fn first_eigenvector(h: &CoupledFieldSpace) -> Vec<Complex> {
        let q = build_multiplier_space(h.mesh.clone(), h.order + 1).unwrap();
        let coef_a = make_preset("two_I").unwrap();
        let coef_n = make_preset("sixteen_I").unwrap();
        let a = assemble_a(h, &coef_a, DEFAULT_QUAD_DEGREE);
        let c = assemble_c(h, &coef_n, DEFAULT_QUAD_DEGREE);
        let b = assemble_b(&q, h, &coef_n, DEFAULT_QUAD_DEGREE).unwrap();
        let pencil = build_pencil(a, b, c).unwrap();
        let result = shift_invert_solve(&pencil, Complex::new(1.69, 0.0), 4, 1e-10).unwrap();
        result.pairs[0].vec[..h.dim].to_vec()
    }

    #[test]
    fn zero_vector_exports_zero_fields() {
        let h = cube_space(2, 0);
        let field = vec![Complex::ZERO; h.dim];
        let vtk = export_fields(&h, &field, FieldSelect::V).unwrap();
        let data = vtk.split("VECTORS v double\n").nth(1).unwrap();
        for tok in data.split_whitespace() {
            assert_eq!(tok.parse::<f64>().unwrap(), 0.0);
        }
    }

    #[test]
    fn vtk_round_trip_recovers_cell_counts() {
        let h = cube_space(2, 0);
        let field = vec![Complex::ZERO; h.dim];
        let vtk = export_fields(&h, &field, FieldSelect::WMinusV).unwrap();
        let mesh = &h.mesh;
        let mut lines = vtk.lines();
        let points = lines
            .find(|l| l.starts_with("POINTS"))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap()
            .parse::<usize>()
            .unwrap();
        assert_eq!(points, mesh.n_vertices());
        let cells_line = vtk.lines().find(|l| l.starts_with("CELLS")).unwrap();
        let cells: usize = cells_line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(cells, mesh.n_tets());
        let types = vtk
            .split("CELL_TYPES")
            .nth(1)
            .unwrap()
            .lines()
            .skip(1)
            .take_while(|l| *l == "10")
            .count();
        assert_eq!(types, mesh.n_tets());
        let vectors: usize = vtk
            .split("CELL_DATA ")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(vectors, mesh.n_tets());
    }

    #[test]
    fn wrong_length_is_space_mismatch() {
        let h = cube_space(1, 0);
        let field = vec![Complex::ZERO; h.dim + 3];
        let err = export_fields(&h, &field, FieldSelect::V).unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch(_)));
    }

    #[test]
    fn exported_field_is_normalized() {
        let h = cube_space(2, 0);
        let field = first_eigenvector(&h);
        let vtk = export_fields(&h, &field, FieldSelect::V).unwrap();
        let data = vtk.split("VECTORS v double\n").nth(1).unwrap();
        let peak = data
            .split_whitespace()
            .map(|t| t.parse::<f64>().unwrap().abs())
            .fold(0.0f64, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_minus_v_has_vanishing_boundary_tangential_trace() {
        let h = cube_space(2, 0);
        let field = first_eigenvector(&h);
        let mesh = h.mesh.clone();
        let basis = EdgeBasis::new(h.order).unwrap();
        let ref_verts = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mut boundary_tangential = 0.0f64;
        let mut interior_peak = 0.0f64;
        for t in 0..mesh.n_tets() {
            let bary = eval_selected(
                &h,
                &basis,
                &field,
                t,
                &[[0.25, 0.25, 0.25]],
                FieldSelect::WMinusV,
            )[0];
            let mag: f64 = bary.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            interior_peak = interior_peak.max(mag);
            for (k, &(f, _)) in mesh.tet_faces[t].iter().enumerate() {
                if !mesh.face_boundary[f] {
                    continue;
                }
                let lv = TET_FACES[k];
                let mut centroid = [0.0; 3];
                for &l in &lv {
                    for c in 0..3 {
                        centroid[c] += ref_verts[l][c] / 3.0;
                    }
                }
                let val = eval_selected(&h, &basis, &field, t, &[centroid], FieldSelect::WMinusV)
                    [0];
                let fv = mesh.faces[f];
                let (a, b, c) = (
                    mesh.vertices[fv[0]],
                    mesh.vertices[fv[1]],
                    mesh.vertices[fv[2]],
                );
                let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let mut n = [
                    e1[1] * e2[2] - e1[2] * e2[1],
                    e1[2] * e2[0] - e1[0] * e2[2],
                    e1[0] * e2[1] - e1[1] * e2[0],
                ];
                let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                for x in &mut n {
                    *x /= nn;
                }
                let un: Complex = (0..3).map(|i| val[i] * n[i]).sum();
                let tang: f64 = (0..3)
                    .map(|i| (val[i] - un * n[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                boundary_tangential = boundary_tangential.max(tang);
            }
        }
        assert!(interior_peak > 1e-3);
        assert!(
            boundary_tangential <= 1e-8 * interior_peak,
            "tangential {boundary_tangential:e} vs interior {interior_peak:e}"
        );
    }

    #[test]
    fn matrix_market_round_trip() {
        let trips = vec![
            (0, 0, Complex::new(1.5, 0.0)),
            (2, 1, Complex::new(-2.0, 0.5)),
        ];
        let mat = SparseMat::from_triplets(3, 2, &trips);
        let s = matrix_market(&mat);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "%%MatrixMarket matrix coordinate complex general"
        );
        assert_eq!(lines.next().unwrap(), "3 2 2");
        let entries: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
        assert!(entries.contains(&vec!["1", "1", "1.5", "0"]));
        assert!(entries.contains(&vec!["3", "2", "-2", "0.5"]));

        let real = SparseMat::from_triplets(2, 2, &[(1, 0, Complex::new(3.0, 0.0))]);
        let s = matrix_market(&real);
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general"));
        assert!(s.lines().any(|l| l == "2 1 3"));
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = std::env::temp_dir().join("maxtev-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert!(!dir.join(".out.csv.tmp").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
