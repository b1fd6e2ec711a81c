//! Potentials `V ≥ 0` on `R^n` together with their growth parameters.
//!
//! Two growth classes are supported:
//!
//! * [`Assumption::A1`]: `c1 |x|^β1 ≤ V(x)` and `|V(x)| + |∇V(x)| ≤ c2 (1 + |x|)^β2`;
//! * [`Assumption::A2`]: the same lower bound, and a split `V = V1 + V2` with
//!   `|V1| + |∇V1| + |V2|^{4/3} ≤ c2 (1 + |x|)^β2`.
//!
//! The A1 upper bound is audited against `(1 + |x|)^β2`; against the bare
//! `|x|^β2` no power potential with a nonzero gradient at the origin would pass.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::grid::euclid;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientEvaluator = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Relative slack accepted by [`check_assumption`].
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// Outer radius slope bound of the C² smoothstep cutoff: `max |S'| = 30/16`.
const CUTOFF_SLOPE: f64 = 1.875;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub c1: f64,
    pub c2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl GrowthParams {
    pub fn new(c1: f64, c2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        ensure_positive("c1", c1)?;
        ensure_positive("c2", c2)?;
        ensure_positive("beta1", beta1)?;
        ensure_positive("beta2", beta2)?;
        if beta2 < beta1 {
            return Err(Error::invalid("beta2", format!("must be ≥ beta1 = {beta1}, got {beta2}")));
        }
        Ok(Self { c1, c2, beta1, beta2 })
    }
}

/// `V = regular + singular`, the decomposition required under A2.
#[derive(Clone)]
pub struct Split {
    pub regular: Evaluator,
    pub singular: Evaluator,
}

#[derive(Clone)]
pub struct PotentialSpec {
    dim: usize,
    evaluator: Evaluator,
    gradient: Option<GradientEvaluator>,
    params: GrowthParams,
    assumption: Assumption,
    split: Option<Split>,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("assumption", &self.assumption)
            .field("has_gradient", &self.gradient.is_some())
            .field("has_split", &self.split.is_some())
            .finish()
    }
}

impl PotentialSpec {
    pub fn new(dim: usize, evaluator: Evaluator, params: GrowthParams, assumption: Assumption) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        let params = GrowthParams::new(params.c1, params.c2, params.beta1, params.beta2)?;
        Ok(Self { dim, evaluator, gradient: None, params, assumption, split: None })
    }

    pub fn with_gradient(mut self, gradient: GradientEvaluator) -> Self {
        self.gradient = Some(gradient);
        self
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> GrowthParams {
        self.params
    }

    pub fn assumption(&self) -> Assumption {
        self.assumption
    }

    pub fn split(&self) -> Option<&Split> {
        self.split.as_ref()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.evaluator.clone()
    }

    /// Gradient of `V`, analytic when supplied, central differences otherwise.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match &self.gradient {
            Some(g) => g(x, out),
            None => fd_gradient(&*self.evaluator, x, out),
        }
    }
}

/// Central differences with step `1e-5 (1 + |x|)`.
pub fn fd_gradient(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), x: &[f64], out: &mut [f64]) {
    let h = 1e-5 * (1.0 + euclid(x));
    let mut probe = x.to_vec();
    for (i, g) in out.iter_mut().enumerate() {
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        *g = (fp - fm) / (2.0 * h);
    }
}

/// C² smoothstep cutoff: 1 on `B_1`, 0 outside `B_2`.
pub fn cutoff(radius: f64) -> f64 {
    if radius <= 1.0 {
        1.0
    } else if radius >= 2.0 {
        0.0
    } else {
        let t = radius - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn cutoff_derivative(radius: f64) -> f64 {
    if radius <= 1.0 || radius >= 2.0 {
        0.0
    } else {
        let t = radius - 1.0;
        -30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

/// `V(x) = c |x|^β`.
///
/// `β ≥ 1` is classified A1 with parameters `(c, c, β, β)`. For `β < 1` the
/// gradient blows up at the origin, so the potential is split with the
/// smoothstep cutoff `η` into `V1 = V (1 - η)` and `V2 = V η` and classified A2;
/// `c2` is then the closed-form bound `c (2.875 + β) + c^{4/3} 2^{β/3}`.
pub fn make_power_potential(c: f64, beta: f64, dim: usize) -> Result<PotentialSpec> {
    ensure_positive("c", c)?;
    ensure_positive("beta", beta)?;
    let evaluator: Evaluator = Arc::new(move |x: &[f64]| c * euclid(x).powf(beta));
    if beta >= 1.0 {
        let gradient: GradientEvaluator = Arc::new(move |x: &[f64], out: &mut [f64]| {
            let r = euclid(x);
            let factor = if r > 0.0 { c * beta * r.powf(beta - 2.0) } else { 0.0 };
            for (o, xi) in out.iter_mut().zip(x) {
                *o = factor * xi;
            }
        });
        let params = GrowthParams::new(c, c, beta, beta)?;
        Ok(PotentialSpec::new(dim, evaluator, params, Assumption::A1)?.with_gradient(gradient))
    } else {
        let regular: Evaluator = Arc::new(move |x: &[f64]| {
            let r = euclid(x);
            c * r.powf(beta) * (1.0 - cutoff(r))
        });
        let singular: Evaluator = Arc::new(move |x: &[f64]| {
            let r = euclid(x);
            c * r.powf(beta) * cutoff(r)
        });
        let c2 = c * (1.0 + beta + CUTOFF_SLOPE) + c.powf(4.0 / 3.0) * 2f64.powf(beta / 3.0);
        let params = GrowthParams::new(c, c2, beta, beta)?;
        Ok(PotentialSpec::new(dim, evaluator, params, Assumption::A2)?.with_split(Split { regular, singular }))
    }
}

/// Analytic gradient of the regular part of a split power potential.
pub fn power_regular_gradient(c: f64, beta: f64, x: &[f64], out: &mut [f64]) {
    let r = euclid(x);
    if r == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let radial = c * beta * r.powf(beta - 1.0) * (1.0 - cutoff(r)) - c * r.powf(beta) * cutoff_derivative(r);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = radial * xi / r;
    }
}

/// Piecewise-linear profile through `(abscissa, value)` samples, held constant
/// beyond the end points. In one dimension the abscissa is `x`; in higher
/// dimensions it is the radius `|x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("table", "needs at least two samples"));
        }
        if samples.iter().any(|(a, v)| !a.is_finite() || !v.is_finite()) {
            return Err(Error::invalid("table", "samples must be finite"));
        }
        if samples.iter().any(|(_, v)| *v < 0.0) {
            return Err(Error::invalid("table", "potential values must be non-negative"));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("table", "duplicate abscissae"));
        }
        let (abscissae, values) = samples.into_iter().unzip();
        Ok(Self { abscissae, values })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = &self.abscissae;
        let v = &self.values;
        if t <= a[0] {
            return v[0];
        }
        if t >= a[a.len() - 1] {
            return v[v.len() - 1];
        }
        let hi = a.partition_point(|&s| s <= t);
        let lo = hi - 1;
        let w = (t - a[lo]) / (a[hi] - a[lo]);
        v[lo] + w * (v[hi] - v[lo])
    }
}

pub fn make_table_potential(profile: TabulatedProfile, dim: usize, params: GrowthParams, assumption: Assumption) -> Result<PotentialSpec> {
    let profile = Arc::new(profile);
    let evaluator: Evaluator =
        if dim == 1 { Arc::new(move |x: &[f64]| profile.eval(x[0])) } else { Arc::new(move |x: &[f64]| profile.eval(euclid(x))) };
    PotentialSpec::new(dim, evaluator, params, assumption)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditCondition {
    LowerBound,
    UpperBound,
    SplitConsistency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionAudit {
    pub holds: bool,
    /// Smallest normalized slack `(rhs - lhs) / max(1, |lhs| + |rhs|)`.
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    pub worst_condition: AuditCondition,
    pub notes: Vec<String>,
}

/// Audits the growth inequalities of `p` on a uniform sample grid of
/// `samples_per_dim^n` points spanning `[-halfwidth, halfwidth]^n`.
pub fn check_assumption(p: &PotentialSpec, sample_box_halfwidth: f64, samples_per_dim: usize) -> Result<AssumptionAudit> {
    ensure_positive("sample_box_halfwidth", sample_box_halfwidth)?;
    if samples_per_dim == 0 {
        return Err(Error::invalid("samples_per_dim", "sample grid is empty"));
    }
    let n = p.dim;
    let GrowthParams { c1, c2, beta1, beta2 } = p.params;
    let mut notes = Vec::new();

    let trivial_split;
    let split = match (p.assumption, &p.split) {
        (Assumption::A2, Some(s)) => Some(s),
        (Assumption::A2, None) => {
            notes.push(String::from("no split supplied under A2; audited V1 = V, V2 = 0"));
            trivial_split = Split { regular: p.evaluator.clone(), singular: Arc::new(|_: &[f64]| 0.0) };
            Some(&trivial_split)
        }
        (Assumption::A1, _) => None,
    };

    let total = samples_per_dim.pow(n as u32);
    let step = if samples_per_dim > 1 { 2.0 * sample_box_halfwidth / (samples_per_dim - 1) as f64 } else { 0.0 };
    let mut x = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut worst = (f64::INFINITY, vec![0.0; n], AuditCondition::LowerBound);

    let mut consider = |margin: f64, x: &[f64], cond: AuditCondition| {
        if margin < worst.0 {
            worst = (margin, x.to_vec(), cond);
        }
    };
    let normalized = |lhs: f64, rhs: f64| (rhs - lhs) / (1.0f64).max(lhs.abs() + rhs.abs());

    for flat in 0..total {
        let mut rem = flat;
        for xi in x.iter_mut().rev() {
            let i = rem % samples_per_dim;
            rem /= samples_per_dim;
            *xi = if samples_per_dim > 1 { -sample_box_halfwidth + i as f64 * step } else { 0.0 };
        }
        let r = euclid(&x);
        let v = p.evaluate(&x);
        consider(normalized(c1 * r.powf(beta1), v), &x, AuditCondition::LowerBound);

        let envelope = c2 * (1.0 + r).powf(beta2);
        match split {
            None => {
                p.gradient(&x, &mut grad);
                consider(normalized(v.abs() + euclid(&grad), envelope), &x, AuditCondition::UpperBound);
            }
            Some(s) => {
                let v1 = (s.regular)(&x);
                let v2 = (s.singular)(&x);
                let regular_grad: &(dyn Fn(&[f64]) -> f64 + Send + Sync) = &*s.regular;
                fd_gradient(regular_grad, &x, &mut grad);
                let lhs = v1.abs() + euclid(&grad) + v2.abs().powf(4.0 / 3.0);
                consider(normalized(lhs, envelope), &x, AuditCondition::UpperBound);
                consider(normalized((v1 + v2 - v).abs(), 0.0), &x, AuditCondition::SplitConsistency);
            }
        }
    }

    let (worst_margin, worst_point, worst_condition) = worst;
    Ok(AssumptionAudit { holds: worst_margin >= -AUDIT_TOLERANCE, worst_margin, worst_point, worst_condition, notes })
}

/// `r V + Ṽ`, with the growth parameters it inherits from `V` (and `Ṽ`).
#[derive(Debug, Clone)]
pub struct ScaledPotential {
    pub base: PotentialSpec,
    pub r: f64,
    pub additive: Option<PotentialSpec>,
}

/// Factor multiplying `c2` when `V` is scaled by `r` under A2. For `r ≥ 1` this
/// is `r^{4/3}`; below 1 the linear terms dominate and it is `r`.
fn a2_upper_factor(r: f64) -> f64 {
    r.max(r.powf(4.0 / 3.0))
}

impl ScaledPotential {
    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn assumption(&self) -> Assumption {
        match &self.additive {
            Some(a) if a.assumption == Assumption::A2 => Assumption::A2,
            _ => self.base.assumption,
        }
    }

    /// Growth parameters of the composite potential.
    ///
    /// Without `Ṽ`: `(r c1, r c2)` under A1, `(r c1, r^{4/3} c2)` under A2.
    /// With `Ṽ` (same exponents): `r` is effectively replaced by `r + 1`; under
    /// A2 the `|V2 + Ṽ2|^{4/3}` term costs an extra factor `2^{1/3}`.
    pub fn params(&self) -> GrowthParams {
        let p = self.base.params;
        let r = self.r;
        let (c1, c2) = match (&self.additive, self.assumption()) {
            (None, Assumption::A1) => (r * p.c1, r * p.c2),
            (None, Assumption::A2) => (r * p.c1, a2_upper_factor(r) * p.c2),
            (Some(a), Assumption::A1) => {
                let q = a.params;
                (r * p.c1 + q.c1, r * p.c2 + q.c2)
            }
            (Some(a), Assumption::A2) => {
                let q = a.params;
                (r * p.c1 + q.c1, 2f64.powf(1.0 / 3.0) * (a2_upper_factor(r) * p.c2 + q.c2))
            }
        };
        GrowthParams { c1, c2, beta1: p.beta1, beta2: p.beta2 }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let extra = self.additive.as_ref().map_or(0.0, |a| a.evaluate(x));
        self.r * self.base.evaluate(x) + extra
    }

    /// Materializes the composite as a plain [`PotentialSpec`].
    pub fn to_spec(&self) -> PotentialSpec {
        let r = self.r;
        let base = self.base.evaluator.clone();
        let add = self.additive.as_ref().map(|a| a.evaluator.clone());
        let evaluator: Evaluator = match add.clone() {
            Some(a) => Arc::new(move |x: &[f64]| r * base(x) + a(x)),
            None => Arc::new(move |x: &[f64]| r * base(x)),
        };
        let gradient = match (&self.base.gradient, &self.additive) {
            (Some(g), None) => {
                let g = g.clone();
                Some(Arc::new(move |x: &[f64], out: &mut [f64]| {
                    g(x, out);
                    out.iter_mut().for_each(|o| *o *= r);
                }) as GradientEvaluator)
            }
            _ => None,
        };
        let split = match self.assumption() {
            Assumption::A1 => None,
            Assumption::A2 => {
                let parts = |s: Option<&Split>, whole: &Evaluator| match s {
                    Some(s) => (s.regular.clone(), s.singular.clone()),
                    None => (whole.clone(), Arc::new(|_: &[f64]| 0.0) as Evaluator),
                };
                let (b1, b2) = parts(self.base.split.as_ref(), &self.base.evaluator);
                let (a1, a2) = match &self.additive {
                    Some(a) => {
                        let (x1, x2) = parts(a.split.as_ref(), &a.evaluator);
                        (Some(x1), Some(x2))
                    }
                    None => (None, None),
                };
                let combine = |b: Evaluator, a: Option<Evaluator>| -> Evaluator {
                    match a {
                        Some(a) => Arc::new(move |x: &[f64]| r * b(x) + a(x)),
                        None => Arc::new(move |x: &[f64]| r * b(x)),
                    }
                };
                Some(Split { regular: combine(b1, a1), singular: combine(b2, a2) })
            }
        };
        PotentialSpec { dim: self.base.dim, evaluator, gradient, params: self.params(), assumption: self.assumption(), split }
    }
}

/// `r V + Ṽ`; `Ṽ` must share the exponents `(β1, β2)` of `V`.
pub fn scale(p: &PotentialSpec, r: f64, additive: Option<&PotentialSpec>) -> Result<ScaledPotential> {
    ensure_positive("r", r)?;
    if let Some(a) = additive {
        if a.dim != p.dim {
            return Err(Error::DimensionMismatch { expected: p.dim, got: a.dim });
        }
        let (pp, ap) = (p.params, a.params);
        if pp.beta1 != ap.beta1 || pp.beta2 != ap.beta2 {
            return Err(Error::invalid(
                "additive",
                format!("exponents ({}, {}) differ from ({}, {})", ap.beta1, ap.beta2, pp.beta1, pp.beta2),
            ));
        }
    }
    Ok(ScaledPotential { base: p.clone(), r, additive: additive.cloned() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn declared(evaluator: Evaluator, c1: f64, beta1: f64, c2: f64, beta2: f64) -> PotentialSpec {
        PotentialSpec::new(1, evaluator, GrowthParams::new(c1, c2, beta1, beta2).unwrap(), Assumption::A1).unwrap()
    }

    #[test]
    fn quadratic_power_potential() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        assert_eq!(p.assumption(), Assumption::A1);
        assert_eq!(p.params(), GrowthParams { c1: 1.0, c2: 1.0, beta1: 2.0, beta2: 2.0 });
        assert_eq!(p.evaluate(&[3.0]), 9.0);
        let p = make_power_potential(16.0, 2.0, 1).unwrap();
        assert_eq!(p.params(), GrowthParams { c1: 16.0, c2: 16.0, beta1: 2.0, beta2: 2.0 });
    }

    #[test]
    fn square_root_potential_gets_cutoff_split() {
        let p = make_power_potential(1.0, 0.5, 1).unwrap();
        assert_eq!(p.assumption(), Assumption::A2);
        let s = p.split().unwrap();
        // V2 carries everything inside B_1, V1 everything outside B_2.
        assert_eq!((s.regular)(&[0.5]), 0.0);
        assert!(((s.singular)(&[0.5]) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!((s.singular)(&[3.0]), 0.0);
        assert!(((s.regular)(&[3.0]) - 3f64.sqrt()).abs() < 1e-15);
        for x in [0.3, 1.2, 1.5, 1.9, 2.5] {
            assert!(((s.regular)(&[x]) + (s.singular)(&[x]) - p.evaluate(&[x])).abs() < 1e-14);
        }
        let audit = check_assumption(&p, 4.0, 801).unwrap();
        assert!(audit.holds, "{audit:?}");
    }

    #[test]
    fn regular_gradient_matches_differences() {
        let mut analytic = [0.0];
        let mut numeric = [0.0];
        let p = make_power_potential(1.0, 0.5, 1).unwrap();
        let reg = p.split().unwrap().regular.clone();
        for x in [1.1, 1.5, 1.8, 2.4] {
            power_regular_gradient(1.0, 0.5, &[x], &mut analytic);
            fd_gradient(&*reg, &[x], &mut numeric);
            assert!((analytic[0] - numeric[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(make_power_potential(0.0, 2.0, 1).is_err());
        assert!(make_power_potential(1.0, -1.0, 1).is_err());
        assert!(GrowthParams::new(1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn audit_equality_case() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let audit = check_assumption(&p, 5.0, 101).unwrap();
        assert!(audit.holds);
        assert!(audit.worst_margin.abs() < 1e-12);
        assert_eq!(audit.worst_condition, AuditCondition::LowerBound);
    }

    #[test]
    fn audit_detects_overclaimed_lower_bound() {
        let v: Evaluator = Arc::new(|x: &[f64]| x[0] * x[0]);
        let p = declared(v, 2.0, 2.0, 10.0, 2.0);
        let audit = check_assumption(&p, 5.0, 101).unwrap();
        assert!(!audit.holds);
        assert_eq!(audit.worst_condition, AuditCondition::LowerBound);
        assert!(audit.worst_point[0] != 0.0);
    }

    #[test]
    fn audit_dominated_quartic() {
        let v: Evaluator = Arc::new(|x: &[f64]| x[0].powi(4) + x[0] * x[0]);
        let p = PotentialSpec::new(1, v, GrowthParams::new(1.0, 6.0, 2.0, 4.0).unwrap(), Assumption::A1).unwrap();
        assert!(check_assumption(&p, 5.0, 101).unwrap().holds);
    }

    #[test]
    fn missing_split_is_reported() {
        let v: Evaluator = Arc::new(|x: &[f64]| x[0].abs().sqrt());
        let p = PotentialSpec::new(1, v, GrowthParams::new(1.0, 1.5, 0.5, 0.5).unwrap(), Assumption::A2).unwrap();
        let audit = check_assumption(&p, 3.0, 100).unwrap();
        assert!(!audit.notes.is_empty());
        assert!(!audit.holds, "gradient singularity at the origin must surface");
    }

    #[test]
    fn scaling_rules() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let s = scale(&p, 4.0, None).unwrap();
        assert_eq!(s.params(), GrowthParams { c1: 4.0, c2: 4.0, beta1: 2.0, beta2: 2.0 });
        let s = scale(&p, 1.0, None).unwrap();
        assert_eq!(s.params(), p.params());

        let v: Evaluator = Arc::new(|x: &[f64]| x[0] * x[0]);
        let q = PotentialSpec::new(1, v, GrowthParams::new(1.0, 3.0, 2.0, 2.0).unwrap(), Assumption::A2).unwrap();
        let s = scale(&q, 8.0, None).unwrap();
        assert!((s.params().c2 - 48.0).abs() < 1e-12);
        assert_eq!(s.params().c1, 8.0);
    }

    #[test]
    fn additive_shifts_r_to_r_plus_one() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let s = scale(&p, 3.0, Some(&p)).unwrap();
        assert_eq!(s.params().c1, 4.0);
        assert_eq!(s.params().c2, 4.0);
        assert_eq!(s.evaluate(&[2.0]), 16.0);
        let spec = s.to_spec();
        assert!(check_assumption(&spec, 5.0, 101).unwrap().holds);
    }

    #[test]
    fn mismatched_exponents_rejected() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let q = make_power_potential(1.0, 3.0, 1).unwrap();
        assert!(scale(&p, 2.0, Some(&q)).is_err());
        assert!(scale(&p, 0.0, None).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let t = TabulatedProfile::new(vec![(1.0, 1.0), (-1.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(t.eval(0.5), 0.5);
        assert_eq!(t.eval(-0.25), 0.25);
        assert_eq!(t.eval(7.0), 1.0);
        assert!(TabulatedProfile::new(vec![(0.0, 1.0)]).is_err());
        assert!(TabulatedProfile::new(vec![(0.0, -1.0), (1.0, 0.0)]).is_err());
    }

    proptest! {
        #[test]
        fn power_lower_bound_is_exact(c in 0.1f64..10.0, beta in 0.2f64..4.0, x in -20.0f64..20.0) {
            let p = make_power_potential(c, beta, 1).unwrap();
            let r = x.abs();
            prop_assert!(p.evaluate(&[x]) - c * r.powf(beta) >= 0.0);
        }

        #[test]
        fn power_potentials_pass_their_own_audit(c in 0.2f64..5.0, beta in 0.3f64..4.0) {
            let p = make_power_potential(c, beta, 1).unwrap();
            prop_assert!(check_assumption(&p, 4.0, 161).unwrap().holds);
        }

        #[test]
        fn a1_scaling_composes(r1 in 0.1f64..10.0, r2 in 0.1f64..10.0) {
            let p = make_power_potential(1.5, 2.0, 1).unwrap();
            let twice = scale(&scale(&p, r1, None).unwrap().to_spec(), r2, None).unwrap().params();
            let once = scale(&p, r1 * r2, None).unwrap().params();
            prop_assert!((twice.c1 - once.c1).abs() <= 1e-12 * once.c1);
            prop_assert!((twice.c2 - once.c2).abs() <= 1e-12 * once.c2);
        }
    }
}
