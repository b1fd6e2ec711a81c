//! `grushinlab` command-line front end: argument parsing, run configuration,
//! output formats and the eigensolve cache.

pub mod cache;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use grushinlab_core::{Assumption, Boundary, EigenRequest};

use crate::config::{AuditKind, CommandName, PlacementKind, PotentialConfig, RunConfig, SetKind};

#[derive(Debug, Parser)]
#[command(name = "grushinlab", version, about = "Observability and controllability constants for Schrödinger and Grushin heat equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (standard output by default).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Recorded in the output; kernels are single-threaded.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Relative slack allowed by audit comparisons.
    #[arg(long, global = true, value_name = "X")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explicit constants, exponent tables and C_obs.
    Constants(Overrides),
    /// Eigenpairs of -Δ + V on the configured grid.
    Eigs(Overrides),
    /// Build a (γ,σ)-distributed control set and audit its thickness.
    Sets(Overrides),
    /// Run verification audits; exit 2 if any fails.
    Audit(Overrides),
    /// Mode-decomposed Grushin observability, optionally against the dense oracle.
    Grushin(Overrides),
    /// HUM null-control synthesis.
    Control(Overrides),
    /// C_emp of -Δ + rV over a list of r.
    ScanR(Overrides),
    /// Critical power s against β.
    PhaseDiagram(Overrides),
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Potential: power:BETA[:C], table:PATH or zero.
    #[arg(long = "V", value_name = "SPEC")]
    pub potential: Option<String>,
    /// Additive unscaled potential, same syntax as --V.
    #[arg(long = "Vtilde", value_name = "SPEC")]
    pub additive: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Box halfwidth.
    #[arg(long = "L")]
    pub halfwidth: Option<f64>,
    /// Grid points per dimension.
    #[arg(long = "N")]
    pub points: Option<usize>,
    #[arg(long)]
    pub periodic: bool,
    /// Number of eigenpairs.
    #[arg(long, conflicts_with = "cutoff")]
    pub count: Option<usize>,
    /// All eigenpairs up to this level.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// full, empty, equidistributed or distributed.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// cell-center or seeded-random.
    #[arg(long)]
    pub placement: Option<String>,
    /// Halfwidth of the populated lattice box.
    #[arg(long = "box")]
    pub box_halfwidth: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
    #[arg(long = "r", value_delimiter = ',')]
    pub r_values: Option<Vec<f64>>,
    /// Fourier cutoff of the Grushin mode box.
    #[arg(long = "M")]
    pub max_mode: Option<i64>,
    #[arg(long)]
    pub y_dim: Option<usize>,
    #[arg(long)]
    pub y_points: Option<usize>,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub oracle_points: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub u0_modes: Option<Vec<usize>>,
    #[arg(long)]
    pub time_samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub audits: Option<Vec<String>>,
    /// Mass fraction for the localization audit.
    #[arg(long)]
    pub mass_fraction: Option<f64>,
    #[arg(long)]
    pub thickness_scale: Option<f64>,
    /// A1 or A2.
    #[arg(long)]
    pub assumption: Option<String>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Free constant override NAME=VALUE (C_hat, kappa_n, C, C0..C5, kappa1..kappa3).
    #[arg(long = "free", value_name = "NAME=VALUE")]
    pub free: Vec<String>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Eigenvector CSV (eigs) or set-node CSV (sets).
    #[arg(long = "aux-out", visible_aliases = ["vectors", "mask"], value_name = "PATH")]
    pub aux_out: Option<PathBuf>,
}

fn parse_assumption(s: &str) -> anyhow::Result<Assumption> {
    match s {
        "A1" | "a1" => Ok(Assumption::A1),
        "A2" | "a2" => Ok(Assumption::A2),
        _ => bail!("assumption must be A1 or A2, got `{s}`"),
    }
}

impl Cli {
    pub fn command_name(&self) -> CommandName {
        match self.command {
            Command::Constants(_) => CommandName::Constants,
            Command::Eigs(_) => CommandName::Eigs,
            Command::Sets(_) => CommandName::Sets,
            Command::Audit(_) => CommandName::Audit,
            Command::Grushin(_) => CommandName::Grushin,
            Command::Control(_) => CommandName::Control,
            Command::ScanR(_) => CommandName::ScanR,
            Command::PhaseDiagram(_) => CommandName::PhaseDiagram,
        }
    }

    fn overrides(&self) -> &Overrides {
        match &self.command {
            Command::Constants(o)
            | Command::Eigs(o)
            | Command::Sets(o)
            | Command::Audit(o)
            | Command::Grushin(o)
            | Command::Control(o)
            | Command::ScanR(o)
            | Command::PhaseDiagram(o) => o,
        }
    }

    /// The config file (or defaults) with every flag applied, resolved.
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        let o = self.overrides();
        if let Some(v) = o.assumption.as_deref() {
            c.assumption.assumption = Some(parse_assumption(v)?);
        }
        if o.c1.is_some() {
            c.assumption.c1 = o.c1;
        }
        if o.c2.is_some() {
            c.assumption.c2 = o.c2;
        }
        if o.beta1.is_some() {
            c.assumption.beta1 = o.beta1;
        }
        if o.beta2.is_some() {
            c.assumption.beta2 = o.beta2;
        }
        if let Some(v) = o.potential.as_deref() {
            c.potential = PotentialConfig::parse(v, &c.assumption)?;
        }
        if let Some(v) = o.additive.as_deref() {
            c.additive = Some(PotentialConfig::parse(v, &c.assumption)?);
        }
        set(&mut c.grid.dim, o.dim);
        set(&mut c.grid.halfwidth, o.halfwidth);
        set(&mut c.grid.points, o.points);
        if o.periodic {
            c.grid.boundary = Boundary::Periodic;
        }
        if let Some(n) = o.count {
            c.eigen = EigenRequest::Count(n);
        }
        if let Some(l) = o.cutoff {
            c.eigen = EigenRequest::Cutoff(l);
        }
        if let Some(v) = o.set.as_deref() {
            c.set.kind = match v {
                "full" => SetKind::Full,
                "empty" => SetKind::Empty,
                "equidistributed" => SetKind::Equidistributed,
                "distributed" => SetKind::Distributed,
                _ => bail!("set must be full, empty, equidistributed or distributed, got `{v}`"),
            };
        }
        if let Some(v) = o.placement.as_deref() {
            c.set.placement = match v {
                "cell-center" => PlacementKind::CellCenter,
                "seeded-random" => PlacementKind::SeededRandom,
                _ => bail!("placement must be cell-center or seeded-random, got `{v}`"),
            };
        }
        set(&mut c.set.gamma, o.gamma);
        if let Some(sigma) = o.sigma {
            c.set.sigma = sigma;
            c.assumption.sigma = Some(sigma);
        }
        if o.box_halfwidth.is_some() {
            c.set.box_halfwidth = o.box_halfwidth;
        }
        let p = &mut c.physics;
        if o.t.is_some() {
            p.t = o.t;
        }
        if o.s.is_some() {
            p.s = o.s;
        }
        set(&mut p.lambda, o.lambda.clone());
        set(&mut p.rho, o.rho.clone());
        set(&mut p.r_values, o.r_values.clone());
        set(&mut p.max_mode, o.max_mode);
        set(&mut p.y_dim, o.y_dim);
        set(&mut p.y_points, o.y_points);
        set(&mut p.oracle_points, o.oracle_points);
        if o.eps.is_some() {
            p.eps = o.eps;
        }
        set(&mut p.u0_modes, o.u0_modes.clone());
        set(&mut p.time_samples, o.time_samples);
        set(&mut p.mass_fraction, o.mass_fraction);
        set(&mut p.thickness_scale, o.thickness_scale);
        if o.oracle {
            c.oracle = true;
        }
        if let Some(list) = &o.audits {
            c.audits = list.iter().map(|a| AuditKind::parse(a)).collect::<anyhow::Result<_>>()?;
        }
        if !o.free.is_empty() {
            let mut fc = serde_json::to_value(c.free_constants)?;
            for kv in &o.free {
                let (k, v) = kv.split_once('=').with_context(|| format!("expected NAME=VALUE, got `{kv}`"))?;
                let v: f64 = v.parse().with_context(|| format!("bad value in `{kv}`"))?;
                if fc.get(k).is_none() {
                    bail!("unknown free constant `{k}`");
                }
                fc[k] = serde_json::json!(v);
            }
            c.free_constants = serde_json::from_value(fc)?;
        }
        set(&mut c.beta_max, o.beta_max);
        set(&mut c.resolution, o.resolution);
        if o.aux_out.is_some() {
            c.aux_out = o.aux_out.clone();
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        set(&mut c.seed, self.seed);
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        set(&mut c.tolerance, self.tolerance);
        c.resolve(self.command_name());
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses `args` and runs the command, returning the exit code. Errors are
/// reported on standard error and, for resolved configs, as error JSON.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_ERROR } else { commands::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.run_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return commands::EXIT_ERROR;
        }
    };
    match commands::run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let _ = output::write_error(&config, config.out.as_deref(), commands::error_kind(&e), &format!("{e:#}"));
            commands::EXIT_ERROR
        }
    }
}
