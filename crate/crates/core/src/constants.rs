//! Closed-form constants and exponents: the BBL ground-state bound, the
//! localization radius, eigenvalue counts, the spectral-inequality exponent,
//! the `a±/b±` exponent tables, critical powers, `C_obs` and its uniform-in-`r`
//! bounds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::potential::{Assumption, GrowthParams};

/// `max(ln x, 0)`.
pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * core::f64::consts::PI.powf(h) / libm::tgamma(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub assumption: Assumption,
    pub c1: f64,
    pub c2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub n: usize,
}

impl AssumptionParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(assumption: Assumption, c1: f64, c2: f64, beta1: f64, beta2: f64, sigma: f64, gamma: f64, n: usize) -> Result<Self> {
        let p = Self { assumption, c1, c2, beta1, beta2, sigma, gamma, n };
        p.validate()?;
        Ok(p)
    }

    /// Defaults `c1 = c2 = 1`, `γ = 0.2`, `n = 1`.
    pub fn simple(assumption: Assumption, beta1: f64, beta2: f64, sigma: f64) -> Result<Self> {
        Self::new(assumption, 1.0, 1.0, beta1, beta2, sigma, 0.2, 1)
    }

    pub fn validate(&self) -> Result<()> {
        GrowthParams::new(self.c1, self.c2, self.beta1, self.beta2)?;
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma", "must be ≥ 0"));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1/2), got {}", self.gamma)));
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "dimension must be ≥ 1"));
        }
        Ok(())
    }

    pub fn growth(&self) -> GrowthParams {
        GrowthParams { c1: self.c1, c2: self.c2, beta1: self.beta1, beta2: self.beta2 }
    }

    /// `ζ = (β₂ + 2σ) / (2β₁)`.
    pub fn zeta(&self) -> f64 {
        (self.beta2 + 2.0 * self.sigma) / (2.0 * self.beta1)
    }

    /// `β* = 3β₂ − 4β₁ − 2`.
    pub fn beta_star(&self) -> f64 {
        3.0 * self.beta2 - 4.0 * self.beta1 - 2.0
    }

    pub(crate) fn log_inv_gamma(&self) -> f64 {
        (1.0 / self.gamma).ln()
    }
}

// ---------------------------------------------------------------- BBL bound

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BblBound {
    pub mu_star: f64,
    pub lambda_star: f64,
    /// Maximizing `t`.
    pub t_star: f64,
}

/// `ln I(a)` for `I(a) = ∫ e^{-a c |x|^β} dx = σ_n Γ(n/β) / (β (ac)^{n/β})`.
fn ln_gaussian_like_integral(a: f64, c: f64, beta: f64, n: usize) -> f64 {
    let nb = n as f64 / beta;
    sphere_area(n).ln() + libm::lgamma(nb) - beta.ln() - nb * (a * c).ln()
}

/// `t [n + (n/2) ln(π/t) − ln I(1/t)]`.
fn bbl_functional(t: f64, c: f64, beta: f64, n: usize) -> f64 {
    let nf = n as f64;
    t * (nf + 0.5 * nf * (core::f64::consts::PI / t).ln() - ln_gaussian_like_integral(1.0 / t, c, beta, n))
}

/// Lower bound for the ground state of `−Δ + c|x|^β`, by maximizing the
/// functional over `t > 0` (golden-section search in `ln t`).
pub fn bbl_lower_bound(c: f64, beta: f64, n: usize) -> Result<BblBound> {
    ensure_positive("c", c)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta", "the integral diverges unless β > 0"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be ≥ 1"));
    }
    let g = |u: f64| bbl_functional(u.exp(), c, beta, n);
    // Bracket the maximum of a unimodal function of u = ln t.
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut step = 1.0;
    while g(lo) > g(lo + 1e-3) && lo > -700.0 {
        lo -= step;
        step *= 2.0;
    }
    step = 1.0;
    while g(hi) > g(hi - 1e-3) && hi < 700.0 {
        hi += step;
        step *= 2.0;
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..300 {
        if hi - lo < 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        }
    }
    let u = 0.5 * (lo + hi);
    let mu_star = g(u);
    Ok(BblBound { mu_star, lambda_star: mu_star / c.powf(2.0 / (beta + 2.0)), t_star: u.exp() })
}

// ------------------------------------------------------- explicit functions

/// `ρ(λ) = Ĉ[(n/β + (n+2)/2) log₊((λ+1)/c) + ((n+2)/2) log₊c + ((λ+2)/c)^{1/β} + 1]`.
pub fn localization_radius(lambda: f64, c: f64, beta: f64, n: usize, c_hat: f64) -> Result<f64> {
    check_lambda(lambda)?;
    ensure_positive("c", c)?;
    ensure_positive("beta", beta)?;
    ensure_positive("C_hat", c_hat)?;
    let (nf, h) = (n as f64, (n as f64 + 2.0) / 2.0);
    Ok(c_hat * ((nf / beta + h) * log_plus((lambda + 1.0) / c) + h * log_plus(c) + ((lambda + 2.0) / c).powf(1.0 / beta) + 1.0))
}

/// `κ_n c^{(n+2)/2} ((λ+1)/c)^{n/β + (n+2)/2}`.
pub fn eigencount_bound(lambda: f64, c: f64, beta: f64, n: usize, kappa_n: f64) -> Result<f64> {
    check_lambda(lambda)?;
    ensure_positive("c", c)?;
    ensure_positive("beta", beta)?;
    ensure_positive("kappa_n", kappa_n)?;
    let (nf, h) = (n as f64, (n as f64 + 2.0) / 2.0);
    Ok(kappa_n * c.powf(h) * ((lambda + 1.0) / c).powf(nf / beta + h))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("lambda", format!("must be finite and ≥ 0, got {lambda}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralExponent {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "J_hat")]
    pub j_hat: f64,
    #[serde(rename = "script_J")]
    pub script_j: f64,
}

/// `J = (1 + ((λ+2)/c₁)^{1/β₁} + ((n+2)/2) log₊c₁)^{β₂/2}`, `Ĵ = λ^{1/2} + c₂^{1/2} J`,
/// `𝒥 = J^{2σ/β₂} Ĵ`.
pub fn spectral_exponent(params: &AssumptionParams, c1_eff: f64, c2_eff: f64, lambda: f64) -> Result<SpectralExponent> {
    check_lambda(lambda)?;
    ensure_positive("c1_eff", c1_eff)?;
    ensure_positive("c2_eff", c2_eff)?;
    let h = (params.n as f64 + 2.0) / 2.0;
    let base = 1.0 + ((lambda + 2.0) / c1_eff).powf(1.0 / params.beta1) + h * log_plus(c1_eff);
    let j = base.powf(params.beta2 / 2.0);
    let j_hat = lambda.sqrt() + c2_eff.sqrt() * j;
    let script_j = if params.sigma == 0.0 { j_hat } else { j.powf(2.0 * params.sigma / params.beta2) * j_hat };
    Ok(SpectralExponent { j, j_hat, script_j })
}

/// `(β₁+2)/4` under A1, `(β₁+2)/3` under A2.
pub fn critical_power(assumption: Assumption, beta1: f64) -> Result<f64> {
    ensure_positive("beta1", beta1)?;
    Ok(match assumption {
        Assumption::A1 => (beta1 + 2.0) / 4.0,
        Assumption::A2 => (beta1 + 2.0) / 3.0,
    })
}

// --------------------------------------------------------- exponent tables

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    A1Case,
    A2BetaStarNonpos,
    A2BetaStarPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    pub zeta: f64,
    pub a_minus: f64,
    pub b_minus: f64,
    pub a_plus: f64,
    pub b_plus: f64,
    pub epsilon: f64,
    pub branch: Branch,
    /// The first alternative of the `b₋` cases was used (`β*σ = 0` in case (ii)).
    pub b_minus_degenerate: bool,
    /// The first alternative of the `b₊` cases was used (`(β₁−β₂)σ = 0` in case (i), `σ = 0` in case (iii)).
    pub b_plus_degenerate: bool,
}

impl ExponentTable {
    /// `(a, b)` used in `C_obs` at scale `r`: `(a₋, b₋)` below 1, `(a₊+ε, b₊+ε)` from 1 on.
    pub fn exponents_at(&self, r: f64) -> (f64, f64) {
        if r < 1.0 {
            (self.a_minus, self.b_minus)
        } else {
            (self.a_plus + self.epsilon, self.b_plus + self.epsilon)
        }
    }

    /// `ν = max(a₊, s b₊ / (s − ζ))`.
    pub fn nu(&self, s: f64) -> f64 {
        self.a_plus.max(s * self.b_plus / (s - self.zeta))
    }
}

pub fn exponent_table(params: &AssumptionParams, epsilon: f64) -> Result<ExponentTable> {
    params.validate()?;
    ensure_positive("epsilon", epsilon)?;
    let (b1, b2, sigma) = (params.beta1, params.beta2, params.sigma);
    let zeta = params.zeta();
    let d = b1 + 2.0;
    let table = |a_minus, b_minus, a_plus, b_plus, branch, b_minus_degenerate, b_plus_degenerate| ExponentTable {
        zeta,
        a_minus,
        b_minus,
        a_plus,
        b_plus,
        epsilon,
        branch,
        b_minus_degenerate,
        b_plus_degenerate,
    };
    Ok(match params.assumption {
        Assumption::A1 => {
            let degenerate = (b1 - b2) * sigma == 0.0;
            let b_plus = if degenerate { (1.0 - sigma - 2.0 * zeta) / d } else { (0.5 - sigma / d).max(1.0 / d) - 2.0 * zeta / d };
            table(0.5 - zeta, 0.5 - zeta, 0.5, b_plus, Branch::A1Case, false, degenerate)
        }
        Assumption::A2 => {
            let beta_star = params.beta_star();
            if beta_star <= 0.0 {
                let degenerate = beta_star * sigma == 0.0;
                let b_minus = if degenerate {
                    -(sigma / b1 + (b2 - b1) / (d * b1))
                } else {
                    (2.0 / 3.0 - b2 / (2.0 * b1) - sigma / d).min(1.0 / d - sigma / b1) - 2.0 * zeta / d
                };
                let b_plus = -sigma / d + 2.0 / 3.0 - b2 / (2.0 * b1) - 2.0 * zeta / d;
                table(2.0 / 3.0 - zeta, b_minus, 2.0 / 3.0, b_plus, Branch::A2BetaStarNonpos, degenerate, false)
            } else {
                let b_minus = -(beta_star / (2.0 * d) + sigma / d + (2.0 * zeta - 1.0) / d);
                let degenerate = sigma == 0.0;
                let b_plus = if degenerate { -(b2 - b1) / (d * b1) } else { (2.0 / 3.0 - sigma / d).max(1.0 / d) - 2.0 * zeta / d };
                table(2.0 / 3.0 - zeta, b_minus, 2.0 / 3.0, b_plus, Branch::A2BetaStarPos, false, degenerate)
            }
        }
    })
}

/// The `ε` fixed in the uniform-bound argument:
/// `ε = (2s/(β₁+2) − ν)(s − ζ)/(2s)`. Errors when it is not positive.
pub fn proof_epsilon(params: &AssumptionParams, s: f64) -> Result<f64> {
    let t = exponent_table(params, 1.0)?;
    check_s_above_zeta(s, t.zeta)?;
    let nu = t.nu(s);
    let eps = (2.0 * s / (params.beta1 + 2.0) - nu) * (s - t.zeta) / (2.0 * s);
    if eps > 0.0 {
        Ok(eps)
    } else {
        Err(Error::Hypothesis(format!("2s/(β₁+2) = {} does not exceed ν = {nu}; no admissible ε", 2.0 * s / (params.beta1 + 2.0))))
    }
}

/// Fallback `ε` when [`proof_epsilon`] is not positive.
pub const FALLBACK_EPSILON: f64 = 0.01;

/// [`proof_epsilon`] when admissible, otherwise [`FALLBACK_EPSILON`].
pub fn default_epsilon(params: &AssumptionParams, s: Option<f64>) -> f64 {
    s.and_then(|s| proof_epsilon(params, s).ok()).unwrap_or(FALLBACK_EPSILON)
}

fn check_s_above_zeta(s: f64, zeta: f64) -> Result<()> {
    if s > zeta {
        Ok(())
    } else {
        Err(Error::Hypothesis(format!("the observability estimate needs s > ζ; got s = {s}, ζ = {zeta}")))
    }
}

// ------------------------------------------------------------------ C_obs

/// The non-explicit constants; every default is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeConstants {
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub kappa_n: f64,
    /// The constant of the spectral inequality.
    #[serde(rename = "C")]
    pub c_spec: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

impl Default for FreeConstants {
    fn default() -> Self {
        Self {
            c_hat: 1.0,
            kappa_n: 1.0,
            c_spec: 1.0,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            c5: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            kappa3: 1.0,
        }
    }
}

impl FreeConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("C_hat", self.c_hat),
            ("kappa_n", self.kappa_n),
            ("C", self.c_spec),
            ("C0", self.c0),
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa3", self.kappa3),
        ];
        for (name, v) in all {
            ensure_positive(name, v)?;
        }
        Ok(())
    }
}

/// `ln C_obs(T, s, r)`; see [`cobs_formula`].
pub fn log_cobs(t: f64, s: f64, r: f64, params: &AssumptionParams, table: &ExponentTable, fc: &FreeConstants) -> Result<f64> {
    ensure_positive("T", t)?;
    ensure_positive("s", s)?;
    ensure_positive("r", r)?;
    check_s_above_zeta(s, table.zeta)?;
    let zeta = table.zeta;
    let (a, b) = table.exponents_at(r);
    let l = params.log_inv_gamma();
    let q = s / (s - zeta);
    Ok(fc.c0.ln() + fc.c1 * l * r.powf(a) + fc.c2 * t.powf(-zeta / (s - zeta)) * l.powf(q) * r.powf(q * b)
        - fc.c3 * t * r.powf(2.0 * s / (params.beta1 + 2.0)))
}

/// `C₀ exp[C₁ ln(1/γ) r^a + C₂ T^{−ζ/(s−ζ)} ln^{s/(s−ζ)}(1/γ) r^{s b/(s−ζ)} − C₃ T r^{2s/(β₁+2)}]`
/// with `(a, b)` from [`ExponentTable::exponents_at`].
pub fn cobs_formula(t: f64, s: f64, r: f64, params: &AssumptionParams, table: &ExponentTable, fc: &FreeConstants) -> Result<f64> {
    Ok(log_cobs(t, s, r, params, table, fc)?.exp())
}

/// Uniform-in-`r` bounds, as natural logarithms (the values themselves
/// overflow for moderate parameters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupBounds {
    /// Bound on `sup_{0<r<1}`, when `a₋, b₋ ≥ 0`.
    #[serde(rename = "log_A0")]
    pub log_a0: Option<f64>,
    /// Bound on `sup_{r≥1}`, when `2s/(β₁+2) > ν`.
    #[serde(rename = "log_A1_bound")]
    pub log_a1_bound: Option<f64>,
    /// Bound on `sup_{r>0}` for `T ≤ 1` (`β₁ = β₂`, `σ = 0`, `s > s*`).
    #[serde(rename = "log_B_minus")]
    pub log_b_minus: Option<f64>,
    /// Same for `T ≥ 1`.
    #[serde(rename = "log_B_plus")]
    pub log_b_plus: Option<f64>,
    pub sup_is_finite: bool,
    /// Violated conditions, when the supremum over `r > 0` is infinite.
    pub reason: Option<String>,
}

impl SupBounds {
    pub fn a0(&self) -> Option<f64> {
        self.log_a0.map(f64::exp)
    }
    pub fn a1_bound(&self) -> Option<f64> {
        self.log_a1_bound.map(f64::exp)
    }
    pub fn b_minus(&self) -> Option<f64> {
        self.log_b_minus.map(f64::exp)
    }
    pub fn b_plus(&self) -> Option<f64> {
        self.log_b_plus.map(f64::exp)
    }
}

/// `ln(e^x + e^y)`.
fn log_add(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

pub fn cobs_sup_bounds(t: f64, s: f64, params: &AssumptionParams, table: &ExponentTable, fc: &FreeConstants) -> Result<SupBounds> {
    ensure_positive("T", t)?;
    ensure_positive("s", s)?;
    fc.validate()?;
    let zeta = table.zeta;
    let d = params.beta1 + 2.0;
    let l = params.log_inv_gamma();
    let mut violated: Vec<&str> = Vec::new();
    if !(s > zeta) {
        return Ok(SupBounds {
            log_a0: None,
            log_a1_bound: None,
            log_b_minus: None,
            log_b_plus: None,
            sup_is_finite: false,
            reason: Some(format!("s ≤ ζ (s = {s}, ζ = {zeta})")),
        });
    }
    let q = s / (s - zeta);

    let small_r_finite = table.a_minus >= 0.0 && table.b_minus >= 0.0;
    if table.b_minus < 0.0 {
        violated.push("b₋<0");
    }
    if table.a_minus < 0.0 {
        violated.push("a₋<0");
    }
    let log_a0 = small_r_finite.then(|| fc.c0.ln() + fc.c1 * l + fc.c2 * t.powf(-zeta / (s - zeta)) * l.powf(q));

    let nu = table.nu(s);
    let large_r_finite = 2.0 * s / d > nu;
    if !large_r_finite {
        violated.push("2s/(β₁+2)≤ν (s ≤ s*)");
    }
    let log_a1_bound = large_r_finite.then(|| {
        let delta = 1.0 / (s / d - nu / 2.0);
        let log_power = l.powf(q * (1.0 + delta));
        if t <= 1.0 {
            fc.c0.ln() + fc.c4 * t.powf(-(delta + zeta * (1.0 + delta) / (s - zeta))) * log_power
        } else {
            fc.c0.ln() + fc.c5 * t.powf(-delta) * log_power
        }
    });

    let s_a = critical_power(params.assumption, params.beta1)?;
    let corollary = params.beta1 == params.beta2 && params.sigma == 0.0 && s > s_a;
    let (mut log_b_minus, mut log_b_plus) = (None, None);
    if corollary {
        let delta = 2.0 * d / (s - s_a);
        let e = 2.0 * s - 1.0;
        let first = fc.c1 * l + fc.c2 * t.powf(-1.0 / e) * l.powf(2.0 * s / e);
        let log_power = l.powf(2.0 * s * (1.0 + delta) / e);
        if t <= 1.0 {
            log_b_minus = Some(log_add(first, fc.c3 * t.powf(-delta - (1.0 + delta) / e) * log_power));
        }
        if t >= 1.0 {
            log_b_plus = Some(log_add(first, fc.c3 * t.powf(-delta) * log_power));
        }
    }

    let sup_is_finite = small_r_finite && large_r_finite;
    let reason = (!sup_is_finite).then(|| violated.join(", "));
    Ok(SupBounds { log_a0, log_a1_bound, log_b_minus, log_b_plus, sup_is_finite, reason })
}

// ---------------------------------------------------------- phase diagram

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub beta: f64,
    pub s_critical: f64,
    pub assumption: Assumption,
}

/// Critical power of `|x|^β`: power potentials with `β < 1` fall under A2,
/// the others under A1.
pub fn phase_boundary(beta: f64) -> Result<PhaseRow> {
    ensure_positive("beta", beta)?;
    let assumption = if beta < 1.0 { Assumption::A2 } else { Assumption::A1 };
    Ok(PhaseRow { beta, s_critical: critical_power(assumption, beta)?, assumption })
}

/// Rows on a uniform `β` grid over `(0, beta_max]` with `samples` points, plus
/// both one-sided values at the breakpoint `β = 1`.
pub fn phase_diagram(beta_max: f64, samples: usize) -> Result<Vec<PhaseRow>> {
    ensure_positive("beta_max", beta_max)?;
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let mut rows: Vec<PhaseRow> = (1..=samples).map(|i| phase_boundary(beta_max * i as f64 / samples as f64)).collect::<Result<_>>()?;
    if beta_max >= 1.0 {
        rows.retain(|r| r.beta != 1.0);
        rows.push(PhaseRow { beta: 1.0, s_critical: 1.0, assumption: Assumption::A2 });
        rows.push(PhaseRow { beta: 1.0, s_critical: 0.75, assumption: Assumption::A1 });
        rows.sort_by(|a, b| a.beta.total_cmp(&b.beta).then((a.assumption == Assumption::A1).cmp(&(b.assumption == Assumption::A1))));
    }
    Ok(rows)
}

// ----------------------------------------------------------------- report

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: f64,
}

/// Everything computable from one parameter configuration. Functions of `λ`
/// (and of `r` for `C_obs`) are stored sampled on fixed grids and are also
/// available as methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub params: AssumptionParams,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub mu_star: f64,
    pub lambda_star: f64,
    pub rho_of_lambda: Vec<Sample>,
    #[serde(rename = "N_bound")]
    pub n_bound: Vec<Sample>,
    #[serde(rename = "J")]
    pub j: Vec<Sample>,
    #[serde(rename = "J_hat")]
    pub j_hat: Vec<Sample>,
    #[serde(rename = "script_J")]
    pub script_j: Vec<Sample>,
    pub exponents: ExponentTable,
    pub s_critical: f64,
    /// `C_obs` against `r`, when `T` and `s > ζ` are given.
    pub cobs: Vec<Sample>,
    pub sup_bounds: Option<SupBounds>,
    pub free_constants: FreeConstants,
}

/// `λ` grid of the sampled functions.
pub const LAMBDA_SAMPLES: [f64; 10] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0];
/// `r` grid of the sampled `C_obs`.
pub const R_SAMPLES: [f64; 9] = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1000.0];

impl ConstantsReport {
    pub fn build(params: AssumptionParams, t: Option<f64>, s: Option<f64>, fc: FreeConstants) -> Result<Self> {
        params.validate()?;
        fc.validate()?;
        if let Some(t) = t {
            ensure_positive("T", t)?;
        }
        if let Some(s) = s {
            ensure_positive("s", s)?;
        }
        let bbl = bbl_lower_bound(params.c1, params.beta1, params.n)?;
        let exponents = exponent_table(&params, default_epsilon(&params, s))?;
        let mut report = Self {
            params,
            t,
            s,
            mu_star: bbl.mu_star,
            lambda_star: bbl.lambda_star,
            rho_of_lambda: Vec::new(),
            n_bound: Vec::new(),
            j: Vec::new(),
            j_hat: Vec::new(),
            script_j: Vec::new(),
            exponents,
            s_critical: critical_power(params.assumption, params.beta1)?,
            cobs: Vec::new(),
            sup_bounds: None,
            free_constants: fc,
        };
        for lambda in LAMBDA_SAMPLES {
            let e = report.spectral_exponent(lambda)?;
            report.rho_of_lambda.push(Sample { x: lambda, value: report.rho(lambda)? });
            report.n_bound.push(Sample { x: lambda, value: report.eigencount(lambda)? });
            report.j.push(Sample { x: lambda, value: e.j });
            report.j_hat.push(Sample { x: lambda, value: e.j_hat });
            report.script_j.push(Sample { x: lambda, value: e.script_j });
        }
        if let (Some(t), Some(s)) = (t, s) {
            if s > exponents.zeta {
                for r in R_SAMPLES {
                    report.cobs.push(Sample { x: r, value: report.cobs(t, s, r)? });
                }
            }
            report.sup_bounds = Some(cobs_sup_bounds(t, s, &params, &exponents, &fc)?);
        }
        Ok(report)
    }

    pub fn rho(&self, lambda: f64) -> Result<f64> {
        localization_radius(lambda, self.params.c1, self.params.beta1, self.params.n, self.free_constants.c_hat)
    }

    pub fn eigencount(&self, lambda: f64) -> Result<f64> {
        eigencount_bound(lambda, self.params.c1, self.params.beta1, self.params.n, self.free_constants.kappa_n)
    }

    pub fn spectral_exponent(&self, lambda: f64) -> Result<SpectralExponent> {
        spectral_exponent(&self.params, self.params.c1, self.params.c2, lambda)
    }

    pub fn cobs(&self, t: f64, s: f64, r: f64) -> Result<f64> {
        cobs_formula(t, s, r, &self.params, &self.exponents, &self.free_constants)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(assumption: Assumption, b1: f64, b2: f64, sigma: f64) -> ExponentTable {
        exponent_table(&AssumptionParams::simple(assumption, b1, b2, sigma).unwrap(), 0.1).unwrap()
    }

    /// Closed form of the maximization: `μ* = p e^{K/p − 1}` with `p = n/2 + n/β`.
    fn bbl_closed_form(c: f64, beta: f64, n: usize) -> f64 {
        let nf = n as f64;
        let p = nf / 2.0 + nf / beta;
        let k = nf + 0.5 * nf * core::f64::consts::PI.ln() - sphere_area(n).ln() - libm::lgamma(nf / beta) + beta.ln() + nf / beta * c.ln();
        p * (k / p - 1.0).exp()
    }

    #[test]
    fn bbl_is_tight_for_the_oscillator() {
        for n in 1..=3 {
            let b = bbl_lower_bound(1.0, 2.0, n).unwrap();
            assert!((b.mu_star - n as f64).abs() < 1e-12, "n={n}: {}", b.mu_star);
            assert!((b.t_star - 1.0).abs() < 1e-5);
        }
        assert_relative_eq!(bbl_lower_bound(16.0, 2.0, 1).unwrap().mu_star, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn bbl_matches_closed_form_and_scales() {
        for &(beta, n) in &[(0.5, 1), (1.0, 2), (3.0, 3), (4.0, 1)] {
            let base = bbl_lower_bound(1.0, beta, n).unwrap().mu_star;
            assert_relative_eq!(base, bbl_closed_form(1.0, beta, n), max_relative = 1e-12);
            for c in [0.1, 1.0, 10.0, 100.0] {
                let b = bbl_lower_bound(c, beta, n).unwrap();
                assert_relative_eq!(b.mu_star, c.powf(2.0 / (beta + 2.0)) * base, max_relative = 1e-10);
                assert_relative_eq!(b.lambda_star, base, max_relative = 1e-10);
            }
        }
        assert!(bbl_lower_bound(1.0, 0.0, 1).is_err());
        assert!(bbl_lower_bound(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn localization_examples() {
        assert_relative_eq!(localization_radius(0.0, 1.0, 2.0, 1, 1.0).unwrap(), 1.0 + 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(localization_radius(2.0, 1.0, 1.0, 1, 1.0).unwrap(), 2.5 * 3f64.ln() + 5.0, max_relative = 1e-14);
        let mut prev = 0.0;
        for i in 0..100 {
            let r = localization_radius(i as f64 * 0.7, 0.3, 1.5, 2, 2.0).unwrap();
            assert!(r >= prev);
            prev = r;
        }
        assert!(localization_radius(-1.0, 1.0, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn eigencount_examples() {
        assert_eq!(eigencount_bound(0.0, 1.0, 2.0, 3, 1.0).unwrap(), 1.0);
        assert_relative_eq!(eigencount_bound(3.0, 1.0, 2.0, 1, 1.0).unwrap(), 16.0, max_relative = 1e-14);
    }

    #[test]
    fn spectral_exponent_examples() {
        let p = AssumptionParams::simple(Assumption::A1, 2.0, 2.0, 0.0).unwrap();
        let e = spectral_exponent(&p, 1.0, 1.0, 0.0).unwrap();
        for v in [e.j, e.j_hat, e.script_j] {
            assert_relative_eq!(v, 1.0 + 2f64.sqrt(), max_relative = 1e-14);
        }
        let p = AssumptionParams::simple(Assumption::A1, 2.0, 3.0, 0.7).unwrap();
        let mut prev = 0.0;
        for i in 0..50 {
            let e = spectral_exponent(&p, 0.5, 2.0, i as f64).unwrap();
            assert!(e.script_j >= prev);
            prev = e.script_j;
        }
    }

    #[test]
    fn table_examples() {
        let t = table(Assumption::A1, 2.0, 2.0, 0.0);
        assert_eq!((t.zeta, t.a_minus, t.b_minus, t.a_plus, t.b_plus), (0.5, 0.0, 0.0, 0.5, 0.0));
        let t = table(Assumption::A2, 2.0, 2.0, 0.0);
        assert_eq!(t.branch, Branch::A2BetaStarNonpos);
        assert_relative_eq!(t.a_minus, 1.0 / 6.0, max_relative = 1e-14);
        assert_eq!(t.b_minus, 0.0);
        assert_relative_eq!(t.a_plus, 2.0 / 3.0);
        assert_relative_eq!(t.b_plus, -1.0 / 12.0, max_relative = 1e-14);
        let t = table(Assumption::A2, 1.0, 2.0, 0.0);
        assert_eq!(t.branch, Branch::A2BetaStarNonpos);
        assert_eq!(t.zeta, 1.0);
        assert_relative_eq!(t.a_minus, -1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(t.b_minus, -1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(t.b_plus, -1.0, max_relative = 1e-14);
    }

    #[test]
    fn zeta_at_least_half() {
        for b1 in [0.5, 1.0, 2.0, 3.0] {
            for b2 in [b1, b1 + 0.5, 2.0 * b1] {
                for sigma in [0.0, 0.3, 1.0] {
                    let z = table(Assumption::A1, b1, b2, sigma).zeta;
                    assert!(z >= 0.5);
                    assert_eq!(z == 0.5, b1 == b2 && sigma == 0.0);
                }
            }
        }
    }

    #[test]
    fn equal_exponents_zero_sigma_consistency() {
        for b in [1.0, 2.0, 3.0, 4.0] {
            let t = table(Assumption::A1, b, b, 0.0);
            assert_eq!((t.a_minus, t.b_minus), (0.0, 0.0));
            let t = table(Assumption::A2, b, b, 0.0);
            assert_eq!(t.b_minus, 0.0);
            assert_relative_eq!(t.a_minus, 2.0 / 3.0 - 0.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn critical_powers() {
        assert_eq!(critical_power(Assumption::A1, 2.0).unwrap(), 1.0);
        assert_eq!(critical_power(Assumption::A1, 1.0).unwrap(), 0.75);
        assert_eq!(critical_power(Assumption::A2, 1.0).unwrap(), 1.0);
        for b in [0.1, 0.5, 1.0, 2.0, 7.0] {
            assert!(critical_power(Assumption::A2, b).unwrap() > critical_power(Assumption::A1, b).unwrap());
        }
    }

    #[test]
    fn cobs_small_r_limit_and_rejection() {
        let p = AssumptionParams::simple(Assumption::A1, 2.0, 2.0, 0.0).unwrap();
        let (s, t) = (1.5, 0.5);
        let tab = exponent_table(&p, proof_epsilon(&p, s).unwrap()).unwrap();
        let fc = FreeConstants::default();
        let l = (1.0f64 / p.gamma).ln();
        let limit = (l + t.powf(-0.5 / (s - 0.5)) * l.powf(s / (s - 0.5))).exp();
        assert_relative_eq!(cobs_formula(t, s, 1e-9, &p, &tab, &fc).unwrap(), limit, max_relative = 1e-6);
        assert!(matches!(cobs_formula(t, 0.5, 1.0, &p, &tab, &fc), Err(Error::Hypothesis(_))));
        // Decay dominates for large r.
        let big = log_cobs(t, s, 1e6, &p, &tab, &fc).unwrap();
        assert!(big < -1e3);
    }

    #[test]
    fn cobs_nonincreasing_in_time() {
        let p = AssumptionParams::simple(Assumption::A1, 2.0, 2.0, 0.0).unwrap();
        let s = 1.5;
        let tab = exponent_table(&p, proof_epsilon(&p, s).unwrap()).unwrap();
        let fc = FreeConstants::default();
        for r in [0.1, 1.0, 5.0] {
            let mut prev = f64::INFINITY;
            for i in 1..60 {
                let v = cobs_formula(0.05 * i as f64, s, r, &p, &tab, &fc).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn sup_bound_examples() {
        let fc = FreeConstants::default();
        let p = AssumptionParams::simple(Assumption::A1, 2.0, 2.0, 0.0).unwrap();
        let tab = exponent_table(&p, default_epsilon(&p, Some(1.5))).unwrap();
        let b = cobs_sup_bounds(0.5, 1.5, &p, &tab, &fc).unwrap();
        assert!(b.sup_is_finite);
        assert!(b.log_a0.unwrap().is_finite() && b.log_a1_bound.unwrap().is_finite() && b.log_b_minus.unwrap().is_finite());
        assert!(b.log_b_plus.is_none());

        let tab = exponent_table(&p, default_epsilon(&p, Some(0.9))).unwrap();
        let b = cobs_sup_bounds(0.5, 0.9, &p, &tab, &fc).unwrap();
        assert!(!b.sup_is_finite);
        assert!(b.reason.unwrap().contains("s*"));

        let p = AssumptionParams::simple(Assumption::A1, 2.0, 3.0, 0.0).unwrap();
        let tab = exponent_table(&p, default_epsilon(&p, Some(2.0))).unwrap();
        assert_relative_eq!(tab.b_minus, -0.25);
        let b = cobs_sup_bounds(1.0, 2.0, &p, &tab, &fc).unwrap();
        assert!(!b.sup_is_finite);
        assert!(b.reason.unwrap().starts_with("b₋<0"));
    }

    #[test]
    fn phase_diagram_breakpoint() {
        let rows = phase_diagram(3.0, 30).unwrap();
        let at_one: Vec<_> = rows.iter().filter(|r| r.beta == 1.0).collect();
        assert_eq!(at_one.len(), 2);
        assert!(at_one.iter().any(|r| r.s_critical == 0.75 && r.assumption == Assumption::A1));
        for r in &rows {
            let expect = if r.assumption == Assumption::A2 { (r.beta + 2.0) / 3.0 } else { (r.beta + 2.0) / 4.0 };
            assert_eq!(r.s_critical, expect);
            assert_eq!(r.assumption == Assumption::A2, r.beta < 1.0 || (r.beta == 1.0 && r.s_critical == 1.0));
        }
    }

    #[test]
    fn report_is_finite_on_a_grid() {
        for (i, b1) in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0].into_iter().enumerate() {
            let assumption = if i % 2 == 0 { Assumption::A1 } else { Assumption::A2 };
            let p =
                AssumptionParams::new(assumption, 0.5 + i as f64, 1.0 + i as f64, b1, b1 + 0.5 * i as f64, 0.1 * i as f64, 0.1, 1 + i % 3)
                    .unwrap();
            let r = ConstantsReport::build(p, Some(0.7), Some(p.zeta() + 1.0), FreeConstants::default()).unwrap();
            for lambda in [0.0, 0.3, 1.0, 3.0, 7.0, 12.0, 25.0, 60.0, 200.0, 900.0] {
                let e = r.spectral_exponent(lambda).unwrap();
                for v in [r.rho(lambda).unwrap(), r.eigencount(lambda).unwrap(), e.j, e.j_hat, e.script_j] {
                    assert!(v.is_finite() && v > 0.0);
                }
            }
            assert!(r.mu_star.is_finite() && r.mu_star > 0.0);
        }
    }
}
