//! Run configuration: JSON config files, built-in presets, and flag
//! overrides. Precedence is preset < config file < command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use maxtev::coefficients::{make_preset, CoefficientField};
use maxtev::harness::ExperimentConfig;
use maxtev::mesh::Domain;

/// A coefficient given either by preset name or as an inline constant
/// 3×3 matrix (row-major, validated Hermitian).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefSpec {
    Name(String),
    Matrix([[f64; 3]; 3]),
}

impl CoefSpec {
    pub fn resolve(&self, key: &str) -> Result<CoefficientField> {
        match self {
            CoefSpec::Name(name) => {
                make_preset(name).with_context(|| format!("config key `{key}`"))
            }
            CoefSpec::Matrix(rows) => {
                let mut flat = [0.0; 9];
                for (i, row) in rows.iter().enumerate() {
                    flat[3 * i..3 * i + 3].copy_from_slice(row);
                }
                CoefficientField::constant_matrix(flat, format!("inline {key}"))
                    .with_context(|| format!("config key `{key}`"))
            }
        }
    }

    /// Parse a flag value: inline JSON matrix if it starts with `[`,
    /// preset name otherwise.
    pub fn from_flag(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('[') {
            let rows: [[f64; 3]; 3] =
                serde_json::from_str(s).context("inline coefficient matrix")?;
            Ok(CoefSpec::Matrix(rows))
        } else {
            Ok(CoefSpec::Name(s.to_string()))
        }
    }
}

/// Partial settings from one source (preset, file, or flags). Unknown JSON
/// keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub preset: Option<String>,
    pub domain: Option<String>,
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub order: Option<usize>,
    #[serde(rename = "A")]
    pub coef_a: Option<CoefSpec>,
    #[serde(rename = "N")]
    pub coef_n: Option<CoefSpec>,
    pub k_window: Option<[f64; 2]>,
    pub shift: Option<f64>,
    pub nev: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub which: Option<String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Overlay `other` on top of `self`: set fields win.
    pub fn overlay(mut self, other: Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(preset, domain, n, n_list, order, coef_a, coef_n, k_window, shift, nev, tol, out, format, which);
        self
    }
}

/// The experiments behind the published tables, one per table block.
pub fn preset(name: &str) -> Result<Settings> {
    let (table, case) = name
        .split_once("-case")
        .ok_or_else(|| anyhow!("unknown preset `{name}`; expected tableT-caseC"))?;
    let (domain, order, n_list) = match table {
        "table1" => ("cube", 0, (6..=11).collect::<Vec<_>>()),
        "table2" => ("thickL", 0, (4..=9).collect()),
        "table3" => ("cube", 1, (3..=8).collect()),
        "table4" => ("thickL", 1, (1..=6).collect()),
        other => bail!("unknown preset table `{other}`"),
    };
    let cube = domain == "cube";
    let (a, n, window) = match case {
        "1" => ("two_I", "sixteen_I", if cube { [1.0, 1.6] } else { [0.7, 1.2] }),
        "2" => ("F1", "F2", if cube { [4.2, 5.0] } else { [2.9, 3.5] }),
        "3" => ("F4", "F3", if cube { [3.6, 4.6] } else { [2.5, 3.5] }),
        other => bail!("unknown preset case `{other}`"),
    };
    Ok(Settings {
        domain: Some(domain.to_string()),
        order: Some(order),
        n_list: Some(n_list),
        coef_a: Some(CoefSpec::Name(a.to_string())),
        coef_n: Some(CoefSpec::Name(n.to_string())),
        k_window: Some(window),
        ..Settings::default()
    })
}

/// Merge preset, config file, and flags in increasing precedence. The
/// preset may be named in either the file or the flags.
pub fn merge(file: Option<Settings>, flags: Settings) -> Result<Settings> {
    let preset_name = flags
        .preset
        .clone()
        .or_else(|| file.as_ref().and_then(|f| f.preset.clone()));
    let mut merged = match preset_name {
        Some(name) => preset(&name)?,
        None => Settings::default(),
    };
    if let Some(f) = file {
        merged = merged.overlay(f);
    }
    Ok(merged.overlay(flags))
}

fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing config key `{key}`"))
}

pub fn parse_domain(s: &str) -> Result<Domain> {
    match s {
        "cube" => Ok(Domain::Cube),
        "thickL" => Ok(Domain::ThickL),
        other => bail!("unknown domain `{other}`, expected `cube` or `thickL`"),
    }
}

impl Settings {
    pub fn domain(&self) -> Result<Domain> {
        parse_domain(&require(self.domain.clone(), "domain")?)
    }

    pub fn n(&self) -> Result<usize> {
        require(self.n, "n")
    }

    /// The resolution list for sweeps; a single `n` is a one-entry sweep.
    pub fn n_list(&self) -> Result<Vec<usize>> {
        if let Some(list) = &self.n_list {
            if list.is_empty() {
                bail!("config key `n-list` must not be empty");
            }
            return Ok(list.clone());
        }
        Ok(vec![require(self.n, "n-list")?])
    }

    pub fn order(&self) -> usize {
        self.order.unwrap_or(0)
    }

    pub fn coefficients(&self) -> Result<(CoefficientField, CoefficientField)> {
        let a = require(self.coef_a.as_ref(), "A")?.resolve("A")?;
        let n = require(self.coef_n.as_ref(), "N")?.resolve("N")?;
        Ok((a, n))
    }

    pub fn nev(&self) -> usize {
        self.nev.unwrap_or(8)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-10)
    }

    pub fn window(&self) -> Result<(f64, f64)> {
        let w = require(self.k_window, "k-window")?;
        if !(w[0] < w[1]) {
            bail!("config key `k-window` must be an increasing pair");
        }
        Ok((w[0], w[1]))
    }

    /// Experiment for `converge`: window required, shift defaults inside
    /// the harness.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let (coef_a, coef_n) = self.coefficients()?;
        Ok(ExperimentConfig {
            domain: self.domain()?,
            order: self.order(),
            coef_a,
            coef_n,
            n_list: self.n_list()?,
            k_window: self.window()?,
            shift: self.shift,
            nev: self.nev(),
            tol: self.tol(),
        })
    }
}
