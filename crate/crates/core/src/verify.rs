//! Numerical audits of the inequalities behind the observability constants.
//!
//! Every audit works exactly on a truncated eigen-span: worst cases are
//! eigenvector problems of small Gram matrices, never random sampling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::constants::{eigencount_bound, localization_radius, spectral_exponent, AssumptionParams, FreeConstants};
use crate::control_sets::SetIndicator;
use crate::error::{ensure_positive, Error, Result};
use crate::grid::{Boundary, Grid};
use crate::spectral::{decay_factor, SpectralData};

/// Modes whose terminal weight `e^{-2Tλ^s}` falls below this fraction of the
/// largest one are dropped by [`truncate_for_horizon`].
pub const TERMINAL_WEIGHT_FLOOR: f64 = 1e-16;

// ------------------------------------------------------------------ helpers

fn check_grid(expected: &Grid, got: &Grid) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected: expected.len(), got: got.len() });
    }
    Ok(())
}

/// Number of eigenpairs `≤ level`, refusing windows the data cannot vouch for.
fn window(s: &SpectralData, level: f64) -> Result<usize> {
    if level > s.complete_to {
        return Err(Error::InsufficientCutoff { requested: level, available: s.complete_to });
    }
    let m = s.count_below(level);
    if m == 0 {
        return Err(Error::EmptySpectralWindow(level));
    }
    Ok(m)
}

/// `G_jk = h^n Σ_mask φ_j φ_k` over the first `m` eigenvectors.
fn overlap(s: &SpectralData, m: usize, mask: &[bool]) -> DMatrix<f64> {
    let nodes: Vec<usize> = mask.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
    let a = DMatrix::from_fn(m, nodes.len(), |j, i| s.eigenvectors[j][nodes[i]]);
    (&a * a.transpose()) * s.grid.cell_volume()
}

fn symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.into_iter().map(|x| x / n).collect()
    } else {
        v
    }
}

fn ball_mask(grid: &Grid, center: &[f64], radius: f64) -> Vec<bool> {
    let mut x = vec![0.0; grid.dim];
    (0..grid.len())
        .map(|i| {
            grid.node(i, &mut x);
            x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
        })
        .collect()
}

fn stride(grid: &Grid, axis: usize) -> usize {
    grid.points_per_dim.pow((grid.dim - 1 - axis) as u32)
}

/// Neighbour of `flat` one step along `axis` (`+1` or `-1`); `None` outside a Dirichlet box.
fn neighbour(grid: &Grid, flat: usize, axis: usize, forward: bool) -> Option<usize> {
    let n = grid.points_per_dim;
    let st = stride(grid, axis);
    let i = (flat / st) % n;
    match (forward, grid.boundary) {
        (true, _) if i + 1 < n => Some(flat + st),
        (false, _) if i > 0 => Some(flat - st),
        (_, Boundary::Dirichlet) => None,
        (true, Boundary::Periodic) => Some(flat + st - n * st),
        (false, Boundary::Periodic) => Some(flat + (n - 1) * st),
    }
}

/// `|∇u|²` at every node by central differences (zero extension on Dirichlet grids).
pub fn gradient_sq(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let h2 = 2.0 * grid.spacing();
    (0..grid.len())
        .map(|i| {
            (0..grid.dim)
                .map(|d| {
                    let up = neighbour(grid, i, d, true).map_or(0.0, |j| u[j]);
                    let dn = neighbour(grid, i, d, false).map_or(0.0, |j| u[j]);
                    ((up - dn) / h2).powi(2)
                })
                .sum()
        })
        .collect()
}

/// `⟨-Δ_h u, v⟩` written as a sum of forward differences over edges.
pub fn dirichlet_form(grid: &Grid, u: &[f64], v: &[f64]) -> f64 {
    let h = grid.spacing();
    let mut sum = 0.0;
    for i in 0..grid.len() {
        for d in 0..grid.dim {
            let (du, dv) = match neighbour(grid, i, d, true) {
                Some(j) => (u[j] - u[i], v[j] - v[i]),
                None => (-u[i], -v[i]),
            };
            sum += du * dv;
            // The edge entering the first node from the zero boundary.
            if grid.boundary == Boundary::Dirichlet && neighbour(grid, i, d, false).is_none() {
                sum += u[i] * v[i];
            }
        }
    }
    sum * grid.cell_volume() / (h * h)
}

// ------------------------------------------------------------------ reports

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// One checked inequality `empirical ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub quantity: String,
    pub empirical: f64,
    pub bound: f64,
    /// `bound - empirical`.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub meta: ReportMeta,
}

impl VerificationReport {
    pub fn upper_bound(quantity: impl Into<String>, empirical: f64, bound: f64, tolerance: f64, meta: ReportMeta) -> Self {
        Self {
            quantity: quantity.into(),
            empirical,
            bound,
            margin: bound - empirical,
            tolerance,
            pass: empirical <= bound * (1.0 + tolerance),
            meta,
        }
    }
}

// ------------------------------------------------------------ spectral ratio

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralRatio {
    /// `max ‖φ‖/‖φ‖_ω` over the window; `+∞` when some `φ` vanishes on `ω`.
    pub ratio: f64,
    /// Coefficients of the maximizer in the eigenbasis (unit length).
    pub minimizer: Vec<f64>,
    pub window: usize,
    pub min_eigenvalue: f64,
}

/// `λ_min(G_λ)^{-1/2}` with `G_λ` the overlap matrix of the eigenfunctions `≤ λ` on `ω`.
pub fn spectral_ratio(s: &SpectralData, lambda: f64, mask: &SetIndicator) -> Result<SpectralRatio> {
    check_grid(&s.grid, &mask.grid)?;
    let m = window(s, lambda)?;
    let (values, vectors) = symmetric_eigen(overlap(s, m, &mask.mask));
    let k = argmin(&values);
    let mu = values[k];
    let top = values.iter().fold(1.0f64, |a, &b| a.max(b));
    let singular = mu <= f64::EPSILON * m as f64 * top;
    Ok(SpectralRatio {
        ratio: if singular { f64::INFINITY } else { mu.powf(-0.5) },
        minimizer: unit(vectors.column(k).iter().copied().collect()),
        window: m,
        min_eigenvalue: mu,
    })
}

// -------------------------------------------------------------- localization

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationAudit {
    pub lambda: f64,
    pub window: usize,
    /// Smallest node radius `ρ` with `‖φ‖²_{B_ρ} ≥ fraction · ‖φ‖²` for every `φ` in the window.
    pub rho_min_half_mass: f64,
    /// `rho_min_half_mass` over the bracket of the localization radius (`Ĉ = 1`).
    #[serde(rename = "C_hat_min")]
    pub c_hat_min: f64,
    pub spacing: f64,
    pub fraction: f64,
}

/// Fraction of `‖φ‖²` that `B_ρ` must hold: `‖φ‖ ≤ 2‖φ‖_{B_ρ}`.
pub const QUARTER_MASS: f64 = 0.25;

/// Bisection over the sorted node radii for the smallest ball around the
/// origin that holds half of every eigen-combination's norm.
pub fn localization_audit(s: &SpectralData, lambda: f64, c: f64, beta: f64) -> Result<LocalizationAudit> {
    localization_audit_with(s, lambda, c, beta, QUARTER_MASS)
}

/// [`localization_audit`] with `‖φ‖²_{B_ρ} ≥ fraction · ‖φ‖²` instead.
pub fn localization_audit_with(s: &SpectralData, lambda: f64, c: f64, beta: f64, fraction: f64) -> Result<LocalizationAudit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("fraction", "must lie in (0, 1)"));
    }
    let m = window(s, lambda)?;
    let grid = &s.grid;
    let radii = grid.radii();
    let mut levels = radii.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let holds = |rho: f64| {
        let mask: Vec<bool> = radii.iter().map(|&r| r <= rho).collect();
        let (values, _) = symmetric_eigen(overlap(s, m, &mask));
        values[argmin(&values)] >= fraction
    };
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    if !holds(levels[hi]) {
        return Err(Error::UnresolvedTail { tail: 1.0, required_halfwidth: 2.0 * grid.halfwidth });
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if holds(levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let rho = levels[lo];
    let bracket = localization_radius(lambda, c, beta, grid.dim, 1.0)?;
    Ok(LocalizationAudit { lambda, window: m, rho_min_half_mass: rho, c_hat_min: rho / bracket, spacing: grid.spacing(), fraction })
}

// ------------------------------------------------------ exponential weights

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRow {
    pub k: usize,
    pub lambda: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// `‖e^{|x|/2}φ_k‖² / ‖φ_k‖²`.
    pub weighted: f64,
    /// `‖e^{|x|/2}∇φ_k‖² / ‖φ_k‖²`.
    pub weighted_gradient: f64,
    /// `7 e^{R^{1/β}+1}`.
    pub bound: f64,
    /// `weighted / e^{R^{1/β}+1}`, to be compared with 7.
    pub implied_constant: f64,
    /// `weighted_gradient / e^{R^{1/β}}`.
    pub gradient_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormAudit {
    pub rows: Vec<WeightedRow>,
    pub max_implied_constant: f64,
    pub max_gradient_constant: f64,
    pub within_bound: bool,
    /// Largest boundary value of `e^{|x|/2}|φ_k|` relative to its maximum.
    pub boundary_tail: f64,
}

/// Boundary tail allowed by [`weighted_norm_audit`].
pub const WEIGHTED_TAIL_TOLERANCE: f64 = 1e-8;

pub fn weighted_norm_audit(s: &SpectralData, lambda: f64, c: f64, beta: f64) -> Result<WeightedNormAudit> {
    ensure_positive("c", c)?;
    ensure_positive("beta", beta)?;
    let m = window(s, lambda)?;
    let grid = &s.grid;
    let weight: Vec<f64> = grid.radii().into_iter().map(|r| r.exp()).collect();
    let n = grid.points_per_dim;
    let on_boundary: Vec<bool> = (0..grid.len())
        .map(|i| {
            grid.boundary == Boundary::Dirichlet
                && (0..grid.dim).any(|d| matches!((i / stride(grid, d)) % n, 0) || (i / stride(grid, d)) % n == n - 1)
        })
        .collect();
    let mut rows = Vec::with_capacity(m);
    let mut tail: f64 = 0.0;
    for k in 0..m {
        let phi = &s.eigenvectors[k];
        let lam = s.eigenvalues[k];
        let norm2 = grid.inner(phi, phi);
        let weighted = grid.cell_volume() * phi.iter().zip(&weight).map(|(p, w)| w * p * p).sum::<f64>() / norm2;
        let grad = gradient_sq(grid, phi);
        let weighted_gradient = grid.cell_volume() * grad.iter().zip(&weight).map(|(g, w)| w * g).sum::<f64>() / norm2;
        let profile = |i: usize| weight[i].sqrt() * phi[i].abs();
        let peak = (0..grid.len()).map(profile).fold(0.0, f64::max);
        let edge = (0..grid.len()).filter(|&i| on_boundary[i]).map(profile).fold(0.0, f64::max);
        tail = tail.max(edge / peak);
        let r = ((lam + 2.0) / c).max(1.0);
        let e = r.powf(1.0 / beta);
        rows.push(WeightedRow {
            k,
            lambda: lam,
            r,
            weighted,
            weighted_gradient,
            bound: 7.0 * (e + 1.0).exp(),
            implied_constant: weighted / (e + 1.0).exp(),
            gradient_constant: weighted_gradient / e.exp(),
        });
    }
    if tail > WEIGHTED_TAIL_TOLERANCE {
        // Gaussian-type decay: the log of the tail scales like L².
        let grow = if tail < 1.0 { ((1.0 / WEIGHTED_TAIL_TOLERANCE).ln() / (1.0 / tail).ln()).sqrt().max(1.25) } else { 2.0 };
        return Err(Error::UnresolvedTail { tail, required_halfwidth: grid.halfwidth * grow });
    }
    let max_implied_constant = rows.iter().map(|r| r.implied_constant).fold(0.0, f64::max);
    let max_gradient_constant = rows.iter().map(|r| r.gradient_constant).fold(0.0, f64::max);
    Ok(WeightedNormAudit {
        within_bound: rows.iter().all(|r| r.weighted <= r.bound),
        rows,
        max_implied_constant,
        max_gradient_constant,
        boundary_tail: tail,
    })
}

// --------------------------------------------------------------- Caccioppoli

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliAudit {
    pub k: usize,
    pub rho: f64,
    /// `‖∇φ_k‖²_{B_ρ(z)}`.
    pub lhs: f64,
    /// `(1+λ_k)‖φ_k‖²_{B_{2ρ}(z)}`.
    pub rhs: f64,
    pub constant_min: f64,
    /// `1 + 8/ρ²`.
    pub bound: f64,
    pub pass: bool,
}

pub fn caccioppoli_audit(s: &SpectralData, k: usize, rho: f64, z: &[f64]) -> Result<CaccioppoliAudit> {
    ensure_positive("rho", rho)?;
    let grid = &s.grid;
    if z.len() != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: z.len() });
    }
    if k >= s.len() {
        return Err(Error::invalid("k", alloc::format!("only {} eigenpairs available", s.len())));
    }
    if z.iter().any(|c| c.abs() + 2.0 * rho > grid.halfwidth) {
        return Err(Error::OutsideDomain { center: z.to_vec(), radius: 2.0 * rho });
    }
    let phi = &s.eigenvectors[k];
    let inner = ball_mask(grid, z, rho);
    let outer = ball_mask(grid, z, 2.0 * rho);
    let grad = gradient_sq(grid, phi);
    let lhs = grid.cell_volume() * grad.iter().zip(&inner).filter(|(_, m)| **m).map(|(g, _)| g).sum::<f64>();
    let rhs = (1.0 + s.eigenvalues[k]) * grid.masked_inner(&outer, phi, phi);
    let constant_min = lhs / rhs;
    let bound = 1.0 + 8.0 / (rho * rho);
    Ok(CaccioppoliAudit { k, rho, lhs, rhs, constant_min, bound, pass: constant_min <= bound })
}

// ------------------------------------------------------------ harmonic lift

/// `sinh(dρ)/d`, continuous at `d = 0`.
fn sinhc(d: f64, rho: f64) -> f64 {
    let x = d * rho;
    if x.abs() < 1e-4 {
        rho * (1.0 + x * x / 6.0)
    } else {
        x.sinh() / d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicLiftAudit {
    pub rho: f64,
    #[serde(rename = "H1_norm_sq")]
    pub h1_norm_sq: f64,
    /// `2ρ‖φ‖²`.
    pub lower: f64,
    /// `2ρ(1 + ρ²(1+λ)e^{2ρ√λ}/3)‖φ‖²`.
    pub upper: f64,
    pub pass: bool,
}

fn lift_support(s: &SpectralData, coeffs: &[f64]) -> Result<f64> {
    if coeffs.len() > s.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), got: coeffs.len() });
    }
    let mut lam_max: f64 = 0.0;
    for (k, a) in coeffs.iter().enumerate() {
        if *a != 0.0 {
            if s.eigenvalues[k] <= 0.0 {
                return Err(Error::Hypothesis(alloc::format!("mode {k} has eigenvalue {} ≤ 0", s.eigenvalues[k])));
            }
            lam_max = lam_max.max(s.eigenvalues[k]);
        }
    }
    Ok(lam_max)
}

/// `Φ(x,t) = Σ α_k φ_k(x) sinh(√λ_k t)/√λ_k`; `‖Φ‖²_{H¹(ℝⁿ×(−ρ,ρ))}` from
/// closed-form time integrals and the discrete Dirichlet form in `x`.
pub fn harmonic_lift_audit(s: &SpectralData, coeffs: &[f64], rho: f64) -> Result<HarmonicLiftAudit> {
    ensure_positive("rho", rho)?;
    let lam_max = lift_support(s, coeffs)?;
    let grid = &s.grid;
    let idx: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k] != 0.0).collect();
    let sq: Vec<f64> = idx.iter().map(|&k| s.eigenvalues[k].sqrt()).collect();
    let mut total = 0.0;
    let mut norm2 = 0.0;
    for (p, &j) in idx.iter().enumerate() {
        let (aj, cj) = (sq[p], coeffs[j]);
        norm2 += cj * cj;
        // ∫ sinh²/λ and ∫ cosh² for the L² and ∂_t parts.
        total += cj * cj * ((sinhc(2.0 * aj, rho) - rho) / (aj * aj) + sinhc(2.0 * aj, rho) + rho);
        for (q, &k) in idx.iter().enumerate() {
            let (ak, ck) = (sq[q], coeffs[k]);
            let ss = (sinhc(aj + ak, rho) - sinhc(aj - ak, rho)) / (aj * ak);
            total += cj * ck * ss * dirichlet_form(grid, &s.eigenvectors[j], &s.eigenvectors[k]);
        }
    }
    let lower = 2.0 * rho * norm2;
    let upper = 2.0 * rho * (1.0 + rho * rho * (1.0 + lam_max) * (2.0 * rho * lam_max.sqrt()).exp() / 3.0) * norm2;
    Ok(HarmonicLiftAudit { rho, h1_norm_sq: total, lower, upper, pass: lower <= total && total <= upper })
}

/// The same norm as [`harmonic_lift_audit`] by sampling `Φ` on the grid times
/// `2·half_steps + 1` Simpson nodes in `t`.
pub fn harmonic_lift_quadrature(s: &SpectralData, coeffs: &[f64], rho: f64, half_steps: usize) -> Result<f64> {
    ensure_positive("rho", rho)?;
    lift_support(s, coeffs)?;
    if half_steps == 0 {
        return Err(Error::invalid("half_steps", "must be positive"));
    }
    let grid = &s.grid;
    let steps = 2 * half_steps;
    let dt = 2.0 * rho / steps as f64;
    let mut total = 0.0;
    let mut phi = vec![0.0; grid.len()];
    let mut dphi = vec![0.0; grid.len()];
    for i in 0..=steps {
        let t = -rho + i as f64 * dt;
        phi.iter_mut().for_each(|v| *v = 0.0);
        dphi.iter_mut().for_each(|v| *v = 0.0);
        for (k, a) in coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0) {
            let w = s.eigenvalues[k].sqrt();
            let (sh, ch) = ((w * t).sinh() / w, (w * t).cosh());
            for ((p, d), e) in phi.iter_mut().zip(dphi.iter_mut()).zip(&s.eigenvectors[k]) {
                *p += a * sh * e;
                *d += a * ch * e;
            }
        }
        let f = grid.inner(&phi, &phi) + dirichlet_form(grid, &phi, &phi) + grid.inner(&dphi, &dphi);
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        total += w * f;
    }
    Ok(total * dt / 3.0)
}

// ------------------------------------------------------------------ Gramian

/// Restriction of `s` to the modes that matter at horizon `T`, plus the
/// relative terminal weight of the first mode left out (0 if none).
pub fn truncate_for_horizon(s: &SpectralData, t: f64, power: f64) -> (SpectralData, f64) {
    let weight = |l: f64| decay_factor(l, 2.0 * t, power);
    let top = s.eigenvalues.first().map_or(1.0, |&l| weight(l));
    let keep = s.eigenvalues.iter().take_while(|&&l| weight(l) >= TERMINAL_WEIGHT_FLOOR * top).count();
    let next = if keep < s.len() {
        weight(s.eigenvalues[keep]) / top
    } else if s.spans_everything() {
        0.0
    } else {
        weight(s.complete_to) / top
    };
    let mut out = s.clone();
    out.eigenvalues.truncate(keep);
    out.eigenvectors.truncate(keep);
    if keep < s.len() {
        out.complete_to = s.eigenvalues[keep - 1].min(s.complete_to);
    }
    (out, next)
}

/// The quadratic forms of observability on a truncated eigen-span.
#[derive(Debug, Clone)]
pub struct GramianBundle {
    pub spectral: SpectralData,
    pub mask: SetIndicator,
    pub horizon: f64,
    pub power: f64,
    /// `G_jk = h^n Σ_ω φ_j φ_k`.
    pub overlap: DMatrix<f64>,
    /// `M_jk = G_jk (1 − e^{−(λ_j^s+λ_k^s)T}) / (λ_j^s+λ_k^s)`.
    pub observability: DMatrix<f64>,
    /// Diagonal of `D = diag(e^{−2Tλ_j^s})`.
    pub terminal: Vec<f64>,
    /// Relative terminal weight of the first mode not represented.
    pub truncation_error: f64,
}

impl GramianBundle {
    /// Uses every eigenpair in `spectral`.
    pub fn new(spectral: SpectralData, mask: SetIndicator, horizon: f64, power: f64) -> Result<Self> {
        ensure_positive("T", horizon)?;
        ensure_positive("s", power)?;
        check_grid(&spectral.grid, &mask.grid)?;
        if spectral.is_empty() {
            return Err(Error::EmptySpectralWindow(spectral.complete_to));
        }
        let m = spectral.len();
        let a: Vec<f64> = spectral.eigenvalues.iter().map(|l| l.max(0.0).powf(power)).collect();
        let overlap = overlap(&spectral, m, &mask.mask);
        let observability = DMatrix::from_fn(m, m, |j, k| {
            let x = a[j] + a[k];
            let f = if x == 0.0 { horizon } else { -(-x * horizon).exp_m1() / x };
            overlap[(j, k)] * f
        });
        let terminal = a.iter().map(|x| (-2.0 * horizon * x).exp()).collect();
        let top = (-2.0 * horizon * a[0]).exp();
        let truncation_error =
            if spectral.spans_everything() { 0.0 } else { decay_factor(spectral.complete_to, 2.0 * horizon, power) / top };
        Ok(Self { spectral, mask, horizon, power, overlap, observability, terminal, truncation_error })
    }

    /// Applies [`truncate_for_horizon`] first.
    pub fn for_horizon(spectral: &SpectralData, mask: SetIndicator, horizon: f64, power: f64) -> Result<Self> {
        let (kept, err) = truncate_for_horizon(spectral, horizon, power);
        let mut b = Self::new(kept, mask, horizon, power)?;
        b.truncation_error = err;
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.terminal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminal.is_empty()
    }

    /// Smallest and largest eigenvalue of the overlap matrix.
    pub fn overlap_range(&self) -> (f64, f64) {
        let (v, _) = symmetric_eigen(self.overlap.clone());
        (v[argmin(&v)], v[argmax(&v)])
    }

    /// `‖e^{−TH^s}f‖²` and `∫₀ᵀ‖e^{−tH^s}f‖²_ω dt` for coefficients `c`.
    pub fn energies(&self, c: &[f64]) -> (f64, f64) {
        let v = DVector::from_column_slice(c);
        let terminal = c.iter().zip(&self.terminal).map(|(x, d)| d * x * x).sum();
        (terminal, (v.transpose() * &self.observability * &v)[(0, 0)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityEstimate {
    /// `T · max_c (cᵀDc)/(cᵀMc)`; `+∞` when `M` is singular.
    #[serde(rename = "C_emp")]
    pub c_emp: f64,
    pub worst_initial_state: Vec<f64>,
    pub truncation_error: f64,
}

/// Largest generalized eigenvalue of `(D, M)` after unit-diagonal scaling of `M`.
pub fn gramian_observability(b: &GramianBundle) -> Result<ObservabilityEstimate> {
    let m = b.len();
    let infinite =
        |c: Vec<f64>| ObservabilityEstimate { c_emp: f64::INFINITY, worst_initial_state: unit(c), truncation_error: b.truncation_error };
    let diag: Vec<f64> = (0..m).map(|j| b.observability[(j, j)]).collect();
    if let Some(j) = diag.iter().position(|&d| !(d > 0.0)) {
        let mut c = vec![0.0; m];
        c[j] = 1.0;
        return Ok(infinite(c));
    }
    let sq: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let scaled = DMatrix::from_fn(m, m, |i, j| b.observability[(i, j)] / (sq[i] * sq[j]));
    match scaled.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            let dh = DMatrix::from_fn(m, m, |i, j| if i == j { b.terminal[i].sqrt() / sq[i] } else { 0.0 });
            let w = l.solve_lower_triangular(&dh).ok_or(Error::SingularSystem)?;
            let (values, vectors) = symmetric_eigen(&w * w.transpose());
            let k = argmax(&values);
            let x = l.transpose().solve_upper_triangular(&vectors.column(k).into_owned()).ok_or(Error::SingularSystem)?;
            let c: Vec<f64> = x.iter().zip(&sq).map(|(x, s)| x / s).collect();
            Ok(ObservabilityEstimate { c_emp: b.horizon * values[k], worst_initial_state: unit(c), truncation_error: b.truncation_error })
        }
        None => {
            let (values, vectors) = symmetric_eigen(scaled);
            let (lo, hi) = (argmin(&values), argmax(&values));
            if values[lo] < -1e-10 * values[hi].max(1.0) {
                return Err(Error::IndefiniteGramian { min_eigenvalue: values[lo], max_eigenvalue: values[hi] });
            }
            Ok(infinite(vectors.column(lo).iter().zip(&sq).map(|(x, s)| x / s).collect()))
        }
    }
}

// ---------------------------------------------------------------------- HUM

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSynthesis {
    pub eps: f64,
    /// Coefficients of the adjoint terminal state `η`.
    pub eta: Vec<f64>,
    /// Coefficients of `u0` in the span.
    pub initial: Vec<f64>,
    /// `‖u0 − Pu0‖`, the part of `u0` outside the span.
    pub projection_residual: f64,
    /// Coefficients of `u(T)` by Duhamel on the span.
    pub terminal: Vec<f64>,
    pub terminal_norm: f64,
    /// `∫₀ᵀ‖h(t)‖² dt = ηᵀMη`.
    pub cost: f64,
    pub times: Vec<f64>,
    /// `‖h(t)‖` at `times`.
    pub control_norms: Vec<f64>,
}

/// `10⁻¹⁰ · trace(M)/dim`.
pub fn default_regularization(b: &GramianBundle) -> f64 {
    1e-10 * b.observability.trace() / b.len() as f64
}

impl GramianBundle {
    /// Coefficients of `e^{−(T−t)H^s}η` in the eigenbasis.
    fn adjoint_at(&self, eta: &[f64], t: f64) -> Vec<f64> {
        eta.iter().zip(&self.spectral.eigenvalues).map(|(e, l)| e * decay_factor(*l, self.horizon - t, self.power)).collect()
    }

    /// The control `h(t) = 1_ω e^{−(T−t)H^s}η` as a grid function.
    pub fn control_at(&self, eta: &[f64], t: f64) -> Vec<f64> {
        let mut h = self.spectral.synthesize(&self.adjoint_at(eta, t));
        for (v, m) in h.iter_mut().zip(&self.mask.mask) {
            if !m {
                *v = 0.0;
            }
        }
        h
    }
}

/// Minimal-norm (Tikhonov-regularized) null control of `u0` on the span.
pub fn synthesize_control(b: &GramianBundle, u0: &[f64], eps: f64, time_samples: usize) -> Result<ControlSynthesis> {
    let grid = &b.spectral.grid;
    if u0.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: u0.len() });
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::invalid("eps", "must be finite and ≥ 0"));
    }
    let m = b.len();
    let c0 = b.spectral.coefficients(u0);
    let back = b.spectral.synthesize(&c0);
    let residual: Vec<f64> = u0.iter().zip(&back).map(|(a, b)| a - b).collect();
    let y = DVector::from_fn(m, |j, _| b.terminal[j].sqrt() * c0[j]);
    let a = &b.observability + DMatrix::identity(m, m) * eps;
    let eta = if y.iter().all(|v| *v == 0.0) {
        DVector::zeros(m)
    } else {
        match a.clone().cholesky() {
            Some(ch) => -ch.solve(&y),
            None if eps > 0.0 => -a.lu().solve(&y).ok_or(Error::SingularSystem)?,
            None => return Err(Error::SingularSystem),
        }
    };
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let terminal = &y + &b.observability * &eta;
    let cost = (eta.transpose() * &b.observability * &eta)[(0, 0)];
    let eta: Vec<f64> = eta.iter().copied().collect();
    let times: Vec<f64> =
        (0..time_samples).map(|i| if time_samples == 1 { b.horizon } else { b.horizon * i as f64 / (time_samples - 1) as f64 }).collect();
    let control_norms = times.iter().map(|&t| grid.norm(&b.control_at(&eta, t))).collect();
    Ok(ControlSynthesis {
        eps,
        terminal_norm: terminal.norm(),
        terminal: terminal.iter().copied().collect(),
        eta,
        initial: c0,
        projection_residual: grid.norm(&residual),
        cost: cost.max(0.0),
        times,
        control_norms,
    })
}

// -------------------------------------------------------------- calibration

/// One spectrum to calibrate against.
#[derive(Debug, Clone)]
pub struct CalibrationCase<'a> {
    pub spectral: &'a SpectralData,
    /// Growth constants of `V ≈ c|x|^β`, used by the localization radius and the eigencount bound.
    pub c: f64,
    pub beta: f64,
    pub lambdas: Vec<f64>,
    /// Control set and parameters for the spectral-inequality constant.
    pub observation: Option<(&'a SetIndicator, AssumptionParams)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub lambda: f64,
    pub eigencount: usize,
    pub kappa_n_min: f64,
    pub c_hat_min: Option<f64>,
    pub c_spec_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    #[serde(rename = "C_hat_fit")]
    pub c_hat_fit: Option<f64>,
    pub kappa_n_fit: Option<f64>,
    #[serde(rename = "C_spec_fit")]
    pub c_spec_fit: Option<f64>,
    pub samples: Vec<CalibrationSample>,
}

impl CalibrationFit {
    /// Overwrites the fitted entries of `fc`.
    pub fn apply_to(&self, fc: &mut FreeConstants) {
        if let Some(v) = self.c_hat_fit {
            fc.c_hat = v;
        }
        if let Some(v) = self.kappa_n_fit {
            fc.kappa_n = v;
        }
        if let Some(v) = self.c_spec_fit {
            fc.c_spec = v;
        }
    }
}

fn fold_max(acc: Option<f64>, v: Option<f64>) -> Option<f64> {
    match (acc, v) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    }
}

/// Smallest `Ĉ`, `κ_n` and spectral-inequality `C` for which the
/// corresponding bounds hold at every sampled `λ`.
pub fn calibrate_free_constants(cases: &[CalibrationCase<'_>]) -> Result<CalibrationFit> {
    let mut fit = CalibrationFit { c_hat_fit: None, kappa_n_fit: None, c_spec_fit: None, samples: Vec::new() };
    for case in cases {
        let n = case.spectral.grid.dim;
        for &lambda in &case.lambdas {
            if lambda > case.spectral.complete_to {
                return Err(Error::InsufficientCutoff { requested: lambda, available: case.spectral.complete_to });
            }
            let count = case.spectral.count_below(lambda);
            let kappa = count as f64 / eigencount_bound(lambda, case.c, case.beta, n, 1.0)?;
            let (c_hat, c_spec) = if count == 0 {
                (None, None)
            } else {
                let c_hat = localization_audit(case.spectral, lambda, case.c, case.beta)?.c_hat_min;
                let c_spec = match &case.observation {
                    Some((mask, params)) => {
                        let ratio = spectral_ratio(case.spectral, lambda, mask)?.ratio;
                        let j = spectral_exponent(params, params.c1, params.c2, lambda)?.script_j;
                        Some(ratio.ln().max(0.0) / ((1.0 / params.gamma).ln() * j))
                    }
                    None => None,
                };
                (Some(c_hat), c_spec)
            };
            fit.kappa_n_fit = fold_max(fit.kappa_n_fit, Some(kappa));
            fit.c_hat_fit = fold_max(fit.c_hat_fit, c_hat);
            fit.c_spec_fit = fold_max(fit.c_spec_fit, c_spec);
            fit.samples.push(CalibrationSample { lambda, eigencount: count, kappa_n_min: kappa, c_hat_min: c_hat, c_spec_min: c_spec });
        }
    }
    Ok(fit)
}
