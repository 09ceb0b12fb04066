//! Shared helpers for the pipeline benchmarks.

use std::sync::Arc;

use maxtev::assembly::{assemble_a, assemble_b, assemble_c, build_pencil, Pencil, DEFAULT_QUAD_DEGREE};
use maxtev::coefficients::make_preset;
use maxtev::mesh::Domain;
use maxtev::spaces::{build_coupled_field_space, build_multiplier_space};

/// Assemble the full saddle pencil for the constant-coefficient cube.
pub fn cube_pencil(n: usize, order: usize) -> Pencil {
    let mesh = Arc::new(Domain::Cube.build_mesh(n).unwrap());
    let h = build_coupled_field_space(mesh.clone(), order).unwrap();
    let q = build_multiplier_space(mesh, order + 1).unwrap();
    let coef_a = make_preset("two_I").unwrap();
    let coef_n = make_preset("sixteen_I").unwrap();
    let a = assemble_a(&h, &coef_a, DEFAULT_QUAD_DEGREE);
    let c = assemble_c(&h, &coef_n, DEFAULT_QUAD_DEGREE);
    let b = assemble_b(&q, &h, &coef_n, DEFAULT_QUAD_DEGREE).unwrap();
    build_pencil(a, b, c).unwrap()
}
