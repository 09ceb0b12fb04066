//! Command implementations shared by the binary and its integration
//! tests. Each command returns the text it would print; file artifacts
//! are written atomically as a side effect.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use maxtev::assembly::{
    assemble_a, assemble_b, assemble_c, build_pencil, Pencil, DEFAULT_QUAD_DEGREE,
};
use maxtev::coefficients::CoefficientField;
use maxtev::eigensolver::{dense_qz, shift_invert_solve, EigenPair};
use maxtev::harness::{run_convergence, K_COLUMNS};
use maxtev::io::{export_fields, matrix_market, mesh_vtk, write_atomic, FieldSelect};
use maxtev::mesh::Domain;
use maxtev::spaces::{build_coupled_field_space, build_multiplier_space, CoupledFieldSpace};
use maxtev::verification::{check_discrete_poincare, check_t_coercivity, FormKind};
use maxtev::Complex;

use crate::config::Settings;

fn build_problem(
    domain: Domain,
    n: usize,
    order: usize,
    coef_a: &CoefficientField,
    coef_n: &CoefficientField,
) -> Result<(CoupledFieldSpace, Pencil)> {
    let mesh = Arc::new(domain.build_mesh(n)?);
    let h = build_coupled_field_space(mesh.clone(), order)?;
    let q = build_multiplier_space(mesh, order + 1)?;
    let a = assemble_a(&h, coef_a, DEFAULT_QUAD_DEGREE);
    let c = assemble_c(&h, coef_n, DEFAULT_QUAD_DEGREE);
    let b = assemble_b(&q, &h, coef_n, DEFAULT_QUAD_DEGREE)?;
    let pencil = build_pencil(a, b, c)?;
    Ok((h, pencil))
}

/// Shift selection: explicit value, else (window midpoint)², else the mean
/// of the four lowest eigenvalues of a coarse lowest-order dense solve.
fn choose_shift(
    s: &Settings,
    domain: Domain,
    coef_a: &CoefficientField,
    coef_n: &CoefficientField,
) -> Result<Complex> {
    if let Some(shift) = s.shift {
        return Ok(Complex::new(shift, 0.0));
    }
    if let Ok((lo, hi)) = s.window() {
        return Ok(Complex::new((0.5 * (lo + hi)).powi(2), 0.0));
    }
    let (_, pencil) = build_problem(domain, 1, 0, coef_a, coef_n)?;
    let mut lambdas: Vec<f64> = dense_qz(&pencil)?
        .into_iter()
        .filter(|l| l.norm() > 0.1 && l.re > 0.0)
        .map(|l| l.re)
        .collect();
    lambdas.sort_by(f64::total_cmp);
    if lambdas.is_empty() {
        bail!("no finite eigenvalues found while estimating a shift; pass --shift");
    }
    lambdas.truncate(K_COLUMNS);
    let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    Ok(Complex::new(mean, 0.0))
}

pub fn cmd_mesh(s: &Settings) -> Result<String> {
    let domain = s.domain()?;
    let n = s.n()?;
    let mesh = domain.build_mesh(n)?;
    let mut out = String::new();
    let _ = writeln!(out, "domain = {domain:?}, n = {n}, h = {}", mesh.h);
    let _ = writeln!(
        out,
        "vertices = {}, edges = {}, faces = {}, tets = {}",
        mesh.n_vertices(),
        mesh.n_edges(),
        mesh.n_faces(),
        mesh.n_tets()
    );
    let _ = writeln!(
        out,
        "boundary edges = {}, boundary faces = {}, euler characteristic = {}",
        mesh.n_boundary_edges(),
        mesh.n_boundary_faces(),
        mesh.euler_characteristic()
    );
    if let Some(path) = &s.out {
        match s.format.as_deref().unwrap_or("vtk") {
            "vtk" => write_atomic(path, &mesh_vtk(&mesh))?,
            other => bail!("format `{other}` is not supported for mesh output, use vtk"),
        }
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}

fn solve_pairs(s: &Settings) -> Result<(CoupledFieldSpace, Vec<EigenPair>, Complex)> {
    let domain = s.domain()?;
    let n = s.n()?;
    let (coef_a, coef_n) = s.coefficients()?;
    let (h, pencil) = build_problem(domain, n, s.order(), &coef_a, &coef_n)?;
    let sigma = choose_shift(s, domain, &coef_a, &coef_n)?;
    let result = shift_invert_solve(&pencil, sigma, s.nev(), s.tol())?;
    let pairs: Vec<EigenPair> = match s.k_window {
        Some([lo, hi]) => result
            .pairs
            .into_iter()
            .filter(|p| p.k.re >= lo && p.k.re <= hi)
            .take(K_COLUMNS)
            .collect(),
        None => result.pairs.into_iter().take(K_COLUMNS).collect(),
    };
    if pairs.is_empty() {
        bail!("no eigenvalues found in the requested window");
    }
    Ok((h, pairs, sigma))
}

pub fn cmd_solve(s: &Settings) -> Result<String> {
    let (coef_a, coef_n) = s.coefficients()?;
    let (h, pairs, sigma) = solve_pairs(s)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "domain = {:?}, n = {}, order = {}, A = {}, N = {}",
        s.domain()?,
        s.n()?,
        s.order(),
        coef_a.label,
        coef_n.label
    );
    let _ = writeln!(out, "dofs = {}, shift = {:.6}", h.dim, sigma.re);
    for (j, p) in pairs.iter().enumerate() {
        let _ = write!(
            out,
            "k{} = {:.6} {} {:.6}i",
            j + 1,
            p.k.re,
            if p.k.im < 0.0 { "-" } else { "+" },
            p.k.im.abs()
        );
        if p.conjugate_pair {
            let _ = write!(out, "  (conjugate pair)");
        }
        let _ = writeln!(out, "  residual = {:.1e}", p.residual);
    }
    if let Some(path) = &s.out {
        match s.format.as_deref() {
            None | Some("csv") => write_atomic(path, &out)?,
            Some("mm") => {
                let domain = s.domain()?;
                let (h2, pencil) = build_problem(domain, s.n()?, s.order(), &coef_a, &coef_n)?;
                debug_assert_eq!(h2.dim, h.dim);
                write_atomic(&path.with_extension("k.mm"), &matrix_market(&pencil.k()))?;
                write_atomic(&path.with_extension("m.mm"), &matrix_market(&pencil.m()))?;
            }
            Some(other) => bail!("format `{other}` is not supported for solve output"),
        }
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(out)
}

pub fn cmd_converge(s: &Settings) -> Result<String> {
    let config = s.experiment()?;
    let table = run_convergence(&config)?;
    if let Some(fmt) = s.format.as_deref() {
        if fmt != "csv" {
            bail!("format `{fmt}` is not supported for converge output, use csv");
        }
    }
    let csv = table.to_csv();
    match &s.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            Ok(format!("# {}\nwrote {}\n", table.descriptor, path.display()))
        }
        None => Ok(format!("# {}\n{csv}", table.descriptor)),
    }
}

/// Lemma-level checks on coarse meshes: T-coercivity of both forms and
/// the discrete Poincaré constant, for every coefficient setting.
pub fn cmd_verify(s: &Settings, max_n: usize) -> Result<String> {
    let domain = match s.domain {
        Some(_) => s.domain()?,
        None => Domain::Cube,
    };
    let order = s.order();
    let settings = [("two_I", "sixteen_I"), ("F1", "F2"), ("F4", "F3")];
    let mut out = String::new();
    let mut all_pass = true;
    for (a_name, n_name) in settings {
        let coef_a = maxtev::coefficients::make_preset(a_name)?;
        let coef_n = maxtev::coefficients::make_preset(n_name)?;
        for n in 1..=max_n {
            let mesh = Arc::new(domain.build_mesh(n)?);
            let h = build_coupled_field_space(mesh.clone(), order)?;
            let mut reports = vec![
                check_t_coercivity(FormKind::CurlForm, &h, &coef_a, 10)?,
                check_t_coercivity(FormKind::MassForm, &h, &coef_n, 10)?,
            ];
            let q = build_multiplier_space(mesh, order + 1)?;
            let b = assemble_b(&q, &h, &coef_n, DEFAULT_QUAD_DEGREE)?;
            match check_discrete_poincare(&h, &b) {
                Ok(r) => reports.push(r),
                Err(maxtev::Error::DimensionTooLarge(..)) => {}
                Err(e) => return Err(e.into()),
            }
            for r in reports {
                all_pass &= r.pass;
                let _ = writeln!(
                    out,
                    "{} {} (A={}, N={}, n={}): observed {:?}, threshold {:e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.property,
                    a_name,
                    n_name,
                    n,
                    r.observed,
                    r.threshold
                );
            }
        }
    }
    if !all_pass {
        bail!("verification failed:\n{out}");
    }
    Ok(out)
}

pub fn cmd_export(s: &Settings) -> Result<String> {
    let which = FieldSelect::from_str(
        s.which
            .as_deref()
            .ok_or_else(|| anyhow!("missing config key `which`"))?,
    )?;
    let path = s
        .out
        .clone()
        .ok_or_else(|| anyhow!("missing config key `out`"))?;
    if let Some(fmt) = s.format.as_deref() {
        if fmt != "vtk" {
            bail!("format `{fmt}` is not supported for export output, use vtk");
        }
    }
    let (h, pairs, _) = solve_pairs(s)?;
    let field = &pairs[0].vec[..h.dim];
    let vtk = export_fields(&h, field, which)
        .context("exporting the first eigenfunction")?;
    write_atomic(&path, &vtk)?;
    Ok(format!(
        "wrote {} (k1 = {:.6} + {:.6}i)\n",
        path.display(),
        pairs[0].k.re,
        pairs[0].k.im
    ))
}
