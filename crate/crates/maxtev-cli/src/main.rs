//! The `maxtev` binary: mesh generation, eigensolves, convergence
//! sweeps, property verification, and eigenfield export.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use maxtev_cli::commands;
use maxtev_cli::config::{merge, CoefSpec, Settings};

#[derive(Parser)]
#[command(name = "maxtev", version, about = "Maxwell transmission eigenvalues with coupled edge elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a mesh and report its counts; optionally write it as VTK.
    Mesh(CommonOpts),
    /// Solve one eigenproblem and print the lowest eigenvalues.
    Solve(CommonOpts),
    /// Run an h-sweep and emit the convergence table as CSV.
    Converge(CommonOpts),
    /// Check T-coercivity and discrete Poincaré properties on coarse meshes.
    Verify(VerifyOpts),
    /// Solve and export an eigenfield as legacy-ASCII VTK cell data.
    Export(CommonOpts),
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named experiment, e.g. table1-case1 .. table4-case3.
    #[arg(long)]
    preset: Option<String>,
    /// cube | thickL
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated mesh resolutions for sweeps.
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Edge element order: 0 (linear) or 1 (quadratic).
    #[arg(long)]
    order: Option<usize>,
    /// Coefficient A: preset name or inline row-major 3x3 JSON matrix.
    #[arg(long = "A")]
    coef_a: Option<String>,
    /// Coefficient N: preset name or inline row-major 3x3 JSON matrix.
    #[arg(long = "N")]
    coef_n: Option<String>,
    /// Window lo,hi on Re k selecting the reported eigenvalues.
    #[arg(long = "k-window", value_delimiter = ',')]
    k_window: Option<Vec<f64>>,
    /// Spectral shift σ; defaults to (window midpoint)².
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long)]
    nev: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | vtk | mm
    #[arg(long)]
    format: Option<String>,
    /// Field to export: v | w-minus-v.
    #[arg(long)]
    which: Option<String>,
}

#[derive(Args, Clone)]
struct VerifyOpts {
    #[command(flatten)]
    common: CommonOpts,
    /// Run every property check.
    #[arg(long)]
    all: bool,
    /// Largest mesh resolution to check.
    #[arg(long, default_value_t = 3)]
    max_n: usize,
}

impl CommonOpts {
    fn settings(&self) -> Result<Settings> {
        let flags = Settings {
            preset: self.preset.clone(),
            domain: self.domain.clone(),
            n: self.n,
            n_list: self.n_list.clone(),
            order: self.order,
            coef_a: self.coef_a.as_deref().map(CoefSpec::from_flag).transpose()?,
            coef_n: self.coef_n.as_deref().map(CoefSpec::from_flag).transpose()?,
            k_window: self
                .k_window
                .as_ref()
                .map(|w| match w.as_slice() {
                    [lo, hi] => Ok([*lo, *hi]),
                    _ => Err(anyhow::anyhow!("--k-window expects exactly two values lo,hi")),
                })
                .transpose()?,
            shift: self.shift,
            nev: self.nev,
            tol: self.tol,
            out: self.out.clone(),
            format: self.format.clone(),
            which: self.which.clone(),
        };
        let file = self
            .config
            .as_deref()
            .map(Settings::from_file)
            .transpose()?;
        merge(file, flags)
    }
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Mesh(opts) => commands::cmd_mesh(&opts.settings()?),
        Command::Solve(opts) => commands::cmd_solve(&opts.settings()?),
        Command::Converge(opts) => commands::cmd_converge(&opts.settings()?),
        Command::Verify(opts) => commands::cmd_verify(&opts.common.settings()?, opts.max_n),
        Command::Export(opts) => commands::cmd_export(&opts.settings()?),
    }
}

fn main() {
    if let Ok(threads) = std::env::var("MAXTEV_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) => maxtev::set_threads(t),
            Err(_) => {
                eprintln!("error: MAXTEV_THREADS must be a positive integer");
                std::process::exit(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
