//! Convergence studies: h-sweeps over a mesh family, extrapolated
//! reference eigenvalues, observed convergence rates, and CSV emission.
//!
//! A sweep solves the transmission eigenproblem on a sequence of meshes
//! with decreasing h, records the four lowest eigenvalues k inside a
//! window on Re k, extrapolates a reference value per column from the
//! model k_h = k + C hᵖ (p = 2 for lowest-order elements, 4 for
//! quadratic), and reports the observed rate
//!
//! ```text
//! r_i = [log|k − k_{h_i}| − log|k − k_{h_{i−1}}|] / [log h_i − log h_{i−1}]
//! ```
//!
//! per consecutive mesh pair.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::assembly::{assemble_a, assemble_b, assemble_c, build_pencil, DEFAULT_QUAD_DEGREE};
use crate::coefficients::CoefficientField;
use crate::eigensolver::shift_invert_solve;
use crate::error::{Error, Result};
use crate::mesh::Domain;
use crate::spaces::{build_coupled_field_space, build_multiplier_space};
use crate::Complex;

/// Number of eigenvalue columns tracked per table.
pub const K_COLUMNS: usize = 4;

/// One h-sweep over a mesh family with fixed coefficients.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub order: usize,
    pub coef_a: CoefficientField,
    pub coef_n: CoefficientField,
    /// Mesh resolutions, coarse to fine; h = 1/n.
    pub n_list: Vec<usize>,
    /// Window on Re k selecting the reported eigenvalues.
    pub k_window: (f64, f64),
    /// Shift σ for the eigensolver; defaults to (window midpoint)².
    pub shift: Option<f64>,
    pub nev: usize,
    pub tol: f64,
}

impl ExperimentConfig {
    pub fn sigma(&self) -> Complex {
        let s = self
            .shift
            .unwrap_or_else(|| (0.5 * (self.k_window.0 + self.k_window.1)).powi(2));
        Complex::new(s, 0.0)
    }

    /// Convergence order of the eigenvalue error for this element order.
    fn error_exponent(&self) -> f64 {
        if self.order == 0 {
            2.0
        } else {
            4.0
        }
    }
}

/// One mesh resolution in a convergence table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    /// The K_COLUMNS lowest eigenvalues k inside the window, sorted by Re k.
    pub k: Vec<Complex>,
}

/// A completed h-sweep: rows, per-column extrapolated references, and
/// per-column observed rates (None where undefined).
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub descriptor: String,
    pub rows: Vec<TableRow>,
    /// references[j]: extrapolated k_j, present when ≥ 3 rows carry column j.
    pub references: Vec<Option<Complex>>,
    /// rates[i][j]: rate for column j between rows i−1 and i; rates[0] is
    /// all None (no predecessor).
    pub rates: Vec<Vec<Option<f64>>>,
}

/// Run one eigensolve per mesh resolution and assemble the table.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceTable> {
    let sigma = config.sigma();
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let row = solve_one(config, n, sigma)
            .map_err(|e| Error::Convergence { n, source: Box::new(e) })?;
        rows.push(row);
    }
    for pair in rows.windows(2) {
        if pair[1].h >= pair[0].h {
            return Err(Error::DimensionMismatch(
                "mesh sizes must be strictly decreasing".into(),
            ));
        }
    }
    let references = column_references(&rows, config.error_exponent());
    let rates = table_rates(&rows, &references);
    let descriptor = format!(
        "{:?} order {} A={} N={} window [{}, {}]",
        config.domain,
        config.order,
        config.coef_a.label,
        config.coef_n.label,
        config.k_window.0,
        config.k_window.1
    );
    Ok(ConvergenceTable {
        descriptor,
        rows,
        references,
        rates,
    })
}

fn solve_one(config: &ExperimentConfig, n: usize, sigma: Complex) -> Result<TableRow> {
    let mesh = Arc::new(config.domain.build_mesh(n)?);
    let h_space = build_coupled_field_space(mesh.clone(), config.order)?;
    let q_space = build_multiplier_space(mesh.clone(), config.order + 1)?;
    let a = assemble_a(&h_space, &config.coef_a, DEFAULT_QUAD_DEGREE);
    let c = assemble_c(&h_space, &config.coef_n, DEFAULT_QUAD_DEGREE);
    let b = assemble_b(&q_space, &h_space, &config.coef_n, DEFAULT_QUAD_DEGREE)?;
    let dofs = h_space.dim;
    let pencil = build_pencil(a, b, c)?;
    let result = shift_invert_solve(&pencil, sigma, config.nev, config.tol)?;
    let (lo, hi) = config.k_window;
    let k: Vec<Complex> = result
        .pairs
        .iter()
        .filter(|p| p.k.re >= lo && p.k.re <= hi)
        .take(K_COLUMNS)
        .map(|p| p.k)
        .collect();
    if k.is_empty() {
        return Err(Error::NoEigenvaluesInWindow);
    }
    Ok(TableRow {
        n,
        h: mesh.h,
        dofs,
        k,
    })
}

fn column_references(rows: &[TableRow], exponent: f64) -> Vec<Option<Complex>> {
    (0..K_COLUMNS)
        .map(|j| {
            let (values, sizes): (Vec<Complex>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.k.get(j).map(|&k| (k, r.h)))
                .unzip();
            extrapolate_reference_with(&values, &sizes, exponent).ok()
        })
        .collect()
}

fn table_rates(rows: &[TableRow], references: &[Option<Complex>]) -> Vec<Vec<Option<f64>>> {
    let mut rates = vec![vec![None; K_COLUMNS]; rows.len()];
    for j in 0..K_COLUMNS {
        let Some(k_ref) = references[j] else { continue };
        let (values, sizes): (Vec<Complex>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| r.k.get(j).map(|&k| (k, r.h)))
            .unzip();
        if let Ok(col) = compute_rates(&values, &sizes, k_ref) {
            let mut it = col.into_iter();
            for (i, row) in rows.iter().enumerate() {
                if row.k.get(j).is_some() {
                    rates[i][j] = it.next().flatten();
                }
            }
        }
    }
    rates
}

/// Extrapolate a reference eigenvalue from the model k_h = k + C h⁴
/// (quadratic elements): the pairwise constants
/// C_i = (k_{h_i} − k_{h_{i+1}}) / (h_i⁴ − h_{i+1}⁴) are averaged and the
/// finest value is corrected by mean(C)·h_end⁴.
pub fn extrapolate_reference(values: &[Complex], sizes: &[f64]) -> Result<Complex> {
    extrapolate_reference_with(values, sizes, 4.0)
}

/// As [`extrapolate_reference`] with the model k_h = k + C hᵖ.
pub fn extrapolate_reference_with(
    values: &[Complex],
    sizes: &[f64],
    exponent: f64,
) -> Result<Complex> {
    if values.len() < 3 {
        return Err(Error::InsufficientData(values.len()));
    }
    if values.len() != sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values, {} mesh sizes",
            values.len(),
            sizes.len()
        )));
    }
    if sizes.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::DimensionMismatch(
            "mesh sizes must be strictly decreasing".into(),
        ));
    }
    let mut mean_c = Complex::ZERO;
    for i in 0..values.len() - 1 {
        let dh = sizes[i].powf(exponent) - sizes[i + 1].powf(exponent);
        mean_c += (values[i] - values[i + 1]) / dh;
    }
    mean_c /= (values.len() - 1) as f64;
    Ok(values[values.len() - 1] - mean_c * sizes[sizes.len() - 1].powf(exponent))
}

/// Observed rate per consecutive mesh pair against a reference value,
/// using the complex modulus of the error. The first entry has no
/// predecessor and is None (printed as "--").
pub fn compute_rates(
    values: &[Complex],
    sizes: &[f64],
    reference: Complex,
) -> Result<Vec<Option<f64>>> {
    if values.len() != sizes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values, {} mesh sizes",
            values.len(),
            sizes.len()
        )));
    }
    let mut out = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        if i == 0 {
            out.push(None);
            continue;
        }
        let e_prev = (reference - values[i - 1]).norm();
        let e_cur = (reference - values[i]).norm();
        if e_prev == 0.0 || e_cur == 0.0 {
            return Err(Error::DegenerateError);
        }
        let r = (e_cur.ln() - e_prev.ln()) / (sizes[i].ln() - sizes[i - 1].ln());
        out.push(Some(r));
    }
    Ok(out)
}

impl ConvergenceTable {
    /// Deterministic CSV: header, then one row per mesh with n, h, dofs,
    /// Re/Im of k₁..k₄, and the four rates. Missing entries print as "--".
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h,dofs");
        for j in 1..=K_COLUMNS {
            let _ = write!(s, ",re_k{j},im_k{j}");
        }
        for j in 1..=K_COLUMNS {
            let _ = write!(s, ",rate_k{j}");
        }
        s.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{},{},{}", row.n, row.h, row.dofs);
            for j in 0..K_COLUMNS {
                match row.k.get(j) {
                    Some(k) => {
                        let _ = write!(s, ",{},{}", k.re, k.im);
                    }
                    None => s.push_str(",--,--"),
                }
            }
            for j in 0..K_COLUMNS {
                match self.rates[i][j] {
                    Some(r) => {
                        let _ = write!(s, ",{r:.2}");
                    }
                    None => s.push_str(",--"),
                }
            }
            s.push('\n');
        }
        s
    }
}
