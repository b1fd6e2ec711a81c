//! Command implementations. Each returns the process exit code.

use std::path::Path;

use anyhow::{bail, Context};
use grushinlab_core::constants::{
    cobs_formula, default_epsilon, exponent_table, phase_diagram, spectral_exponent, AssumptionParams, ConstantsReport, ExponentTable,
    PhaseRow,
};
use grushinlab_core::control_sets::thickness;
use grushinlab_core::grushin::{
    build_modes, direct_oracle, evolve, grushin_observability, scan_scaled_observability, BoundInputs, GrushinState, ModePotentials,
    YSymbol,
};
use grushinlab_core::verify::{
    caccioppoli_audit, default_regularization, gramian_observability, harmonic_lift_audit, localization_audit_with, spectral_ratio,
    synthesize_control, weighted_norm_audit, GramianBundle, ReportMeta, VerificationReport,
};
use grushinlab_core::{discretize, Assumption, EigenRequest, Error, Grid, PotentialField, SpectralData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache;
use crate::config::{AuditKind, BuiltSet, CommandName, Potential, RunConfig, SetKind};
use crate::output::{self, num, JsonLines};

/// Exit status of a run in which every audit passed.
pub const EXIT_OK: i32 = 0;
/// Usage, configuration or numerical-precondition error.
pub const EXIT_ERROR: i32 = 1;
/// At least one audit reported `pass = false`.
pub const EXIT_AUDIT_FAILURE: i32 = 2;

/// Snake-case name of the core error behind `e`, if any.
pub fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidParameter { .. }) => "invalid_parameter",
        Some(Error::DimensionMismatch { .. }) => "dimension_mismatch",
        Some(Error::TooLarge { .. }) => "too_large",
        Some(Error::NotConverged { .. }) => "not_converged",
        Some(Error::InsufficientCutoff { .. }) => "insufficient_cutoff",
        Some(Error::TruncatedTail { .. }) => "truncated_tail",
        Some(Error::EmptySpectralWindow(_)) => "empty_spectral_window",
        Some(Error::Hypothesis(_)) => "hypothesis",
        Some(Error::NegativeTime(_)) => "negative_time",
        Some(Error::OutsideDomain { .. }) => "outside_domain",
        Some(Error::UnresolvedTail { .. }) => "unresolved_tail",
        Some(Error::IndefiniteGramian { .. }) => "indefinite_gramian",
        Some(Error::SingularSystem) => "singular_system",
        Some(Error::Mode { .. }) => "mode",
        None => "config",
    }
}

pub fn run(config: &RunConfig) -> anyhow::Result<i32> {
    match config.command.context("command is unresolved")? {
        CommandName::Constants => constants(config),
        CommandName::Eigs => eigs(config),
        CommandName::Sets => sets(config),
        CommandName::Audit => audit(config),
        CommandName::Grushin => grushin(config),
        CommandName::Control => control(config),
        CommandName::ScanR => scan_r(config),
        CommandName::PhaseDiagram => phase(config),
    }
}

fn out(config: &RunConfig) -> Option<&Path> {
    config.out.as_deref()
}

/// Non-finite numbers are not JSON; write them as the strings `inf`, `-inf`, `NaN`.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn report_json(r: &VerificationReport) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(r)?;
    for (k, x) in [("empirical", r.empirical), ("bound", r.bound), ("margin", r.margin)] {
        v[k] = json_number(x);
    }
    Ok(v)
}

// ------------------------------------------------------------------ shared

struct Problem {
    grid: Grid,
    potential: Potential,
}

fn problem(config: &RunConfig) -> anyhow::Result<Problem> {
    let grid = config.grid.build()?;
    let potential = config.potential.build(grid.dim)?;
    Ok(Problem { grid, potential })
}

fn solve(p: &Problem, config: &RunConfig) -> anyhow::Result<SpectralData> {
    let op = discretize(&p.potential, &p.grid)?;
    cache::solve(&op, config.eigen)
}

fn build_set(config: &RunConfig, grid: &Grid) -> anyhow::Result<BuiltSet> {
    config.set.build(grid, config.seed)
}

fn params(config: &RunConfig) -> anyhow::Result<AssumptionParams> {
    config.assumption.params()
}

/// Exponent table at the proof's `ε` for power `s`, or `None` when undefined.
fn table(params: &AssumptionParams, s: f64) -> Option<ExponentTable> {
    exponent_table(params, default_epsilon(params, Some(s))).ok()
}

fn check_positive_list(name: &str, v: &[f64]) -> anyhow::Result<()> {
    if v.is_empty() {
        bail!("`{name}` must not be empty");
    }
    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        bail!("`{name}` entries must be finite and positive, got {x}");
    }
    Ok(())
}

// --------------------------------------------------------------- constants

fn constants(config: &RunConfig) -> anyhow::Result<i32> {
    let params = params(config)?;
    if let Some(s) = config.physics.s {
        if s <= params.zeta() {
            return Err(Error::Hypothesis(format!("s > ζ is required (s = {s}, ζ = {})", params.zeta())).into());
        }
    }
    let report = ConstantsReport::build(params, config.physics.t, config.physics.s, config.free_constants)?;
    output::write_json(config, out(config), &report)?;
    Ok(EXIT_OK)
}

// -------------------------------------------------------------------- eigs

#[derive(Serialize)]
struct EigsResult<'a> {
    grid: &'a Grid,
    eigenvalues: &'a [f64],
    complete_to: Value,
    max_residual: f64,
    orthonormality_defect: f64,
}

fn eigs(config: &RunConfig) -> anyhow::Result<i32> {
    let p = problem(config)?;
    let s = solve(&p, config)?;
    if let Some(path) = &config.aux_out {
        let mut columns: Vec<String> = (0..p.grid.dim).map(|i| format!("x{i}")).collect();
        columns.extend((0..s.len()).map(|k| format!("phi_{k}")));
        let mut node = vec![0.0; p.grid.dim];
        let rows: Vec<Vec<String>> = (0..p.grid.len())
            .map(|i| {
                p.grid.node(i, &mut node);
                node.iter().copied().chain(s.eigenvectors.iter().map(|v| v[i])).map(num).collect()
            })
            .collect();
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        output::write_csv(config, Some(path), &cols, &rows)?;
    }
    let result = EigsResult {
        grid: &s.grid,
        eigenvalues: &s.eigenvalues,
        complete_to: json_number(s.complete_to),
        max_residual: s.max_residual,
        orthonormality_defect: s.orthonormality_defect(),
    };
    output::write_json(config, out(config), &result)?;
    Ok(EXIT_OK)
}

// -------------------------------------------------------------------- sets

fn sets(config: &RunConfig) -> anyhow::Result<i32> {
    let grid = config.grid.build()?;
    let built = build_set(config, &grid)?;
    let ind = &built.indicator;
    let thick =
        if config.physics.thickness_scale <= 2.0 * grid.halfwidth { Some(thickness(ind, config.physics.thickness_scale)?) } else { None };
    if let Some(path) = &config.aux_out {
        let mut columns = vec!["node".to_string()];
        columns.extend((0..grid.dim).map(|i| format!("x{i}")));
        let mut node = vec![0.0; grid.dim];
        let rows: Vec<Vec<String>> = ind
            .nodes()
            .into_iter()
            .map(|i| {
                grid.node(i, &mut node);
                std::iter::once(i.to_string()).chain(node.iter().map(|x| num(*x))).collect()
            })
            .collect();
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        output::write_csv(config, Some(path), &cols, &rows)?;
    }
    let result = json!({
        "set": built.set,
        "measure": ind.measure,
        "nodes_in_set": ind.count(),
        "nodes_total": grid.len(),
        "coarse_grid_warning": ind.warning,
        "thickness": thick,
    });
    output::write_json(config, out(config), &result)?;
    Ok(EXIT_OK)
}

// ------------------------------------------------------------------- audit

fn audit(config: &RunConfig) -> anyhow::Result<i32> {
    // Everything that can be rejected is checked before the eigensolve.
    let p = problem(config)?;
    let built = build_set(config, &p.grid)?;
    let params = params(config)?;
    let (t, s_pow) = (config.t(), config.s());
    let lambdas = &config.physics.lambda;
    check_positive_list("lambda", lambdas)?;
    let needs_rho = config.audits.iter().any(|a| matches!(a, AuditKind::Caccioppoli | AuditKind::Lift));
    if needs_rho {
        check_positive_list("rho", &config.physics.rho)?;
    }
    if !(config.tolerance >= 0.0) {
        bail!("tolerance must be ≥ 0");
    }
    let lam_max = lambdas.iter().copied().fold(0.0, f64::max);
    let (c, beta) = (params.c1, params.beta1);
    let tol = config.tolerance;
    let fc = &config.free_constants;
    let gamma = (config.set.kind != SetKind::Full).then_some(config.set.gamma);
    let base_meta = ReportMeta { gamma, sigma: Some(config.set.sigma), ..ReportMeta::default() };

    let spec = solve(&p, config)?;
    let mut lines = JsonLines::new(config, out(config))?;
    let mut all_pass = true;
    let mut emit = |r: VerificationReport, lines: &mut JsonLines| -> anyhow::Result<()> {
        all_pass &= r.pass;
        lines.push(&report_json(&r)?)
    };

    for kind in &config.audits {
        match kind {
            AuditKind::SpectralIneq => {
                for &lambda in lambdas {
                    let ratio = spectral_ratio(&spec, lambda, &built.indicator)?;
                    let j = spectral_exponent(&params, params.c1, params.c2, lambda)?.script_j;
                    let bound = (fc.c_spec * (1.0 / params.gamma).ln() * j).exp();
                    let meta = ReportMeta { lambda: Some(lambda), ..base_meta.clone() };
                    emit(VerificationReport::upper_bound("spectral_ratio", ratio.ratio, bound, tol, meta), &mut lines)?;
                }
            }
            AuditKind::Localization => {
                for &lambda in lambdas {
                    let a = localization_audit_with(&spec, lambda, c, beta, config.physics.mass_fraction)?;
                    let meta = ReportMeta { lambda: Some(lambda), ..base_meta.clone() };
                    emit(VerificationReport::upper_bound("localization_C_hat", a.c_hat_min, fc.c_hat, tol, meta), &mut lines)?;
                }
            }
            AuditKind::Weighted => {
                let a = weighted_norm_audit(&spec, lam_max, c, beta)?;
                for row in &a.rows {
                    let meta = ReportMeta { lambda: Some(row.lambda), ..base_meta.clone() };
                    emit(VerificationReport::upper_bound("weighted_norm", row.weighted, row.bound, tol, meta), &mut lines)?;
                }
            }
            AuditKind::Caccioppoli => {
                let z = vec![0.0; p.grid.dim];
                for k in 0..spec.count_below(lam_max) {
                    for &rho in &config.physics.rho {
                        let a = caccioppoli_audit(&spec, k, rho, &z)?;
                        let meta = ReportMeta { lambda: Some(spec.eigenvalues[k]), r: Some(rho), ..base_meta.clone() };
                        emit(VerificationReport::upper_bound("caccioppoli_constant", a.constant_min, a.bound, tol, meta), &mut lines)?;
                    }
                }
            }
            AuditKind::Lift => {
                let m = spec.count_below(lam_max);
                let first = spec.eigenvalues[..m].partition_point(|l| *l <= 0.0);
                if first == m {
                    return Err(Error::EmptySpectralWindow(lam_max).into());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                for &rho in &config.physics.rho {
                    for _ in 0..config.physics.lift_samples {
                        let mut coeffs = vec![0.0; m];
                        for a in &mut coeffs[first..] {
                            *a = rng.gen_range(-1.0..1.0);
                        }
                        let a = harmonic_lift_audit(&spec, &coeffs, rho)?;
                        let meta = ReportMeta { lambda: Some(lam_max), r: Some(rho), ..base_meta.clone() };
                        emit(VerificationReport::upper_bound("harmonic_lift_lower", a.lower, a.h1_norm_sq, tol, meta.clone()), &mut lines)?;
                        emit(VerificationReport::upper_bound("harmonic_lift_upper", a.h1_norm_sq, a.upper, tol, meta), &mut lines)?;
                    }
                }
            }
            AuditKind::Observability => {
                let bundle = GramianBundle::for_horizon(&spec, built.indicator.clone(), t, s_pow)?;
                let est = gramian_observability(&bundle)?;
                let bound = if config.set.kind == SetKind::Full {
                    1.0
                } else {
                    let table = exponent_table(&params, default_epsilon(&params, Some(s_pow)))?;
                    cobs_formula(t, s_pow, 1.0, &params, &table, fc)?
                };
                let meta = ReportMeta { t: Some(t), s: Some(s_pow), r: Some(1.0), ..base_meta.clone() };
                emit(VerificationReport::upper_bound("observability_constant", est.c_emp, bound, tol, meta), &mut lines)?;
            }
            AuditKind::Control => {
                let bundle = GramianBundle::new(spec.clone(), built.indicator.clone(), t, s_pow)?;
                let est = gramian_observability(&bundle)?;
                let u0 = initial_state(&spec, &config.physics.u0_modes)?;
                let eps = config.physics.eps.unwrap_or_else(|| default_regularization(&bundle));
                let syn = synthesize_control(&bundle, &u0, eps, config.physics.time_samples)?;
                let u0_norm = p.grid.norm(&u0);
                let meta = ReportMeta { t: Some(t), s: Some(s_pow), ..base_meta.clone() };
                emit(
                    VerificationReport::upper_bound(
                        "hum_terminal_ratio",
                        syn.terminal_norm / u0_norm,
                        config.physics.terminal_tolerance,
                        tol,
                        meta.clone(),
                    ),
                    &mut lines,
                )?;
                emit(VerificationReport::upper_bound("hum_cost", syn.cost, est.c_emp / t * u0_norm * u0_norm, tol, meta), &mut lines)?;
            }
        }
    }
    lines.finish()?;
    Ok(if all_pass { EXIT_OK } else { EXIT_AUDIT_FAILURE })
}

fn initial_state(spec: &SpectralData, modes: &[usize]) -> anyhow::Result<Vec<f64>> {
    if modes.is_empty() {
        bail!("`u0_modes` must not be empty");
    }
    let mut u0 = vec![0.0; spec.grid.len()];
    for &j in modes {
        let v = spec.eigenvectors.get(j).with_context(|| format!("u0 mode {j} not computed ({} modes available)", spec.len()))?;
        for (a, b) in u0.iter_mut().zip(v) {
            *a += b;
        }
    }
    Ok(u0)
}

// ----------------------------------------------------------------- grushin

fn grushin(config: &RunConfig) -> anyhow::Result<i32> {
    let p = problem(config)?;
    let additive = config.additive.as_ref().map(|a| a.build(p.grid.dim)).transpose()?;
    let built = build_set(config, &p.grid)?;
    let phys = &config.physics;
    let (t, s_pow) = (config.t(), config.s());
    if config.oracle {
        if p.grid.dim != 1 || phys.y_dim != 1 {
            bail!("the oracle comparison needs dim = 1 and y_dim = 1");
        }
        if additive.is_some() {
            bail!("the oracle comparison does not support an additive potential");
        }
        let unknowns = phys.oracle_points * phys.y_points;
        if unknowns > grushinlab_core::grushin::ORACLE_MAX_UNKNOWNS {
            bail!(
                "oracle grid {}×{} has {unknowns} unknowns, above the cap of {}; lower oracle_points or y_points",
                phys.oracle_points,
                phys.y_points,
                grushinlab_core::grushin::ORACLE_MAX_UNKNOWNS
            );
        }
        check_positive_list("oracle_times", &phys.oracle_times)?;
        check_positive_list("oracle_powers", &phys.oracle_powers)?;
    }
    let params = params(config)?;
    let table = table(&params, s_pow);
    let bound = table.as_ref().map(|table| BoundInputs { params: &params, table, constants: &config.free_constants });

    let pots = ModePotentials { base: &p.potential, additive: additive.as_ref().map(|a| a as &dyn PotentialField) };
    let fam = build_modes(&pots, &p.grid, phys.y_dim, phys.max_mode, YSymbol::Exact, s_pow, config.eigen)?;
    let report = grushin_observability(&fam, &built.indicator, t, s_pow, bound)?;

    let oracle = if config.oracle {
        Some(oracle_comparison(
            &p.potential,
            p.grid.halfwidth,
            phys.oracle_points,
            phys.y_points,
            phys.max_mode,
            &phys.oracle_times,
            &phys.oracle_powers,
            config.seed,
        )?)
    } else {
        None
    };
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "k_sq": r.r,
                "C_emp": r.c_emp.map(json_number),
                "paper_bound": r.paper_bound.map(json_number),
                "flags": r.flags,
            })
        })
        .collect();
    let result = json!({
        "T": report.t,
        "s": report.s,
        "modes": fam.modes.len(),
        "distinct_spectra": fam.distinct_spectra(),
        "rows": rows,
        "C_agg": json_number(report.c_agg),
        "argmax_mode": report.argmax_mode,
        "zero_mode_thickness": report.zero_mode_thickness,
        "oracle": oracle,
    });
    output::write_json(config, out(config), &result)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCase {
    pub t: f64,
    pub s: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub x_points: usize,
    pub y_points: usize,
    pub max_mode: i64,
    pub cases: Vec<OracleCase>,
    pub max_relative_deviation: f64,
}

/// Mode-decomposed evolution against the dense 2-D oracle on an
/// `x_points × y_points` grid over `[-L, L] × 𝕋`, with the finite-difference
/// `y`-symbol so both discretize the same operator. The initial datum is a
/// seeded sum of Gaussian bumps times `y`-harmonics with `|k| ≤ max_mode`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_comparison(
    v: &dyn PotentialField,
    halfwidth: f64,
    x_points: usize,
    y_points: usize,
    max_mode: i64,
    times: &[f64],
    powers: &[f64],
    seed: u64,
) -> anyhow::Result<OracleComparison> {
    let x_grid = Grid::dirichlet(1, halfwidth, x_points)?;
    let py = y_points;
    let max_mode = max_mode.min((py.saturating_sub(1) / 2) as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u0 = vec![0.0; x_points * py];
    let xs = x_grid.coordinates();
    for _ in 0..4 {
        let (a, x0, w) = (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.5..1.5));
        let k = rng.gen_range(0..=max_mode) as f64;
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        for (i, x) in xs.iter().enumerate() {
            let bump = a * (-((x - x0) / w).powi(2)).exp();
            for j in 0..py {
                let y = std::f64::consts::TAU * j as f64 / py as f64;
                u0[i * py + j] += bump * (k * y + phase).cos();
            }
        }
    }
    let mut cases = Vec::new();
    let mut worst: f64 = 0.0;
    for &s in powers {
        let pots = ModePotentials { base: v, additive: None };
        let fam = build_modes(&pots, &x_grid, 1, max_mode, YSymbol::FiniteDifference { points: py }, s, EigenRequest::Count(x_points))?;
        let state = GrushinState::from_physical(&fam, &u0, py)?;
        for &t in times {
            let modal = evolve(&fam, &state, t)?.to_physical(&fam, py)?;
            let dense = direct_oracle(v, &x_grid, py, t, s, &u0)?;
            let scale = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff = modal.iter().zip(&dense).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let rel = diff / scale;
            worst = worst.max(rel);
            cases.push(OracleCase { t, s, relative_deviation: rel });
        }
    }
    Ok(OracleComparison { x_points, y_points: py, max_mode, cases, max_relative_deviation: worst })
}

// ----------------------------------------------------------------- control

fn control(config: &RunConfig) -> anyhow::Result<i32> {
    let p = problem(config)?;
    let built = build_set(config, &p.grid)?;
    let (t, s_pow) = (config.t(), config.s());
    if let Some(eps) = config.physics.eps {
        if !(eps >= 0.0) {
            bail!("eps must be ≥ 0");
        }
    }
    let spec = solve(&p, config)?;
    let u0 = initial_state(&spec, &config.physics.u0_modes)?;
    let bundle = GramianBundle::new(spec, built.indicator, t, s_pow)?;
    let est = gramian_observability(&bundle)?;
    let eps = config.physics.eps.unwrap_or_else(|| default_regularization(&bundle));
    let syn = synthesize_control(&bundle, &u0, eps, config.physics.time_samples)?;
    let u0_norm = p.grid.norm(&u0);
    let free_sq = bundle.terminal.iter().zip(bundle.spectral.coefficients(&u0)).map(|(w, a)| w * a * a).sum::<f64>();
    let trajectory: Vec<Value> = syn.times.iter().zip(&syn.control_norms).map(|(t, n)| json!({ "t": t, "control_norm": n })).collect();
    let result = json!({
        "modes": bundle.len(),
        "eps": syn.eps,
        "C_emp": json_number(est.c_emp),
        "initial_norm": u0_norm,
        "free_terminal_norm_sq": free_sq,
        "terminal_norm": syn.terminal_norm,
        "relative_terminal_norm": syn.terminal_norm / u0_norm,
        "projection_residual": syn.projection_residual,
        "cost": syn.cost,
        "duality_bound": json_number(est.c_emp / t * u0_norm * u0_norm),
        "trajectory": trajectory,
    });
    output::write_json(config, out(config), &result)?;
    Ok(EXIT_OK)
}

// ------------------------------------------------------------------ scan-r

pub fn scan_rows(config: &RunConfig) -> anyhow::Result<Vec<Vec<String>>> {
    let p = problem(config)?;
    let additive = config.additive.as_ref().map(|a| a.build(p.grid.dim)).transpose()?;
    let built = build_set(config, &p.grid)?;
    check_positive_list("r_values", &config.physics.r_values)?;
    let params = params(config)?;
    let (t, s_pow) = (config.t(), config.s());
    let table = table(&params, s_pow);
    let bound = table.as_ref().map(|table| BoundInputs { params: &params, table, constants: &config.free_constants });
    let pots = ModePotentials { base: &p.potential, additive: additive.as_ref().map(|a| a as &dyn PotentialField) };
    let rows = scan_scaled_observability(&pots, &p.grid, config.eigen, &config.physics.r_values, &built.indicator, t, s_pow, bound)?;
    Ok(rows.iter().map(|r| vec![num(r.r), num(r.c_emp), r.bound.map(num).unwrap_or_default()]).collect())
}

fn scan_r(config: &RunConfig) -> anyhow::Result<i32> {
    let rows = scan_rows(config)?;
    output::write_csv(config, out(config), &["r", "C_emp", "bound"], &rows)?;
    Ok(EXIT_OK)
}

// ----------------------------------------------------------- phase diagram

pub const PHASE_COLUMNS: [&str; 5] = ["beta", "s_boundary", "assumption", "regime_above", "regime_below"];

pub fn phase_rows(beta_max: f64, resolution: usize) -> anyhow::Result<Vec<Vec<String>>> {
    let rows: Vec<PhaseRow> = phase_diagram(beta_max, resolution)?;
    Ok(rows
        .iter()
        .map(|r| {
            let a = match r.assumption {
                Assumption::A1 => "A1",
                Assumption::A2 => "A2",
            };
            vec![num(r.beta), num(r.s_critical), a.to_string(), "controllable".to_string(), "unknown".to_string()]
        })
        .collect())
}

fn phase(config: &RunConfig) -> anyhow::Result<i32> {
    let rows = phase_rows(config.beta_max, config.resolution)?;
    output::write_csv(config, out(config), &PHASE_COLUMNS, &rows)?;
    Ok(EXIT_OK)
}
