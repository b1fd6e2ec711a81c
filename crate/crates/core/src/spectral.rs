//! Eigenpairs of discretized Schrödinger operators, spectral projectors and
//! the (fractional) heat semigroup `e^{-t H^s}` acting through them.

use alloc::vec;
use alloc::vec::Vec;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::eigen::{dense, lanczos, tridiagonal, Selection};
use crate::error::{Error, Result};
use crate::grid::{axpy, dot, Grid};
use crate::operator::{DiscreteOperator, LinearOperator};

/// Orthonormality tolerance of stored eigenvectors.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
/// Relative tail allowed to be dropped by [`semigroup_apply`].
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRequest {
    Count(usize),
    Cutoff(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Problems with at most this many unknowns (and not tridiagonal) are solved densely.
    pub dense_limit: usize,
    pub lanczos: lanczos::LanczosOptions,
    /// Required `‖Aφ - λφ‖ / (1 + λ)`.
    pub residual_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dense_limit: 3000, lanczos: lanczos::LanczosOptions::default(), residual_tolerance: 1e-8 }
    }
}

/// Ascending eigenvalues with grid-orthonormal eigenvectors (`h^n Σ φ_j φ_k = δ_jk`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub grid: Grid,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// Every eigenvalue of the discrete operator `≤ complete_to` is present.
    /// Infinite when the eigenvectors span the whole grid space.
    pub complete_to: f64,
    /// Largest residual `‖Aφ_k - λ_kφ_k‖ / (1 + λ_k)` observed at solve time.
    pub max_residual: f64,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of stored eigenvalues `≤ level`.
    pub fn count_below(&self, level: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l <= level)
    }

    pub fn spans_everything(&self) -> bool {
        self.complete_to == f64::INFINITY
    }

    fn ensure_covers(&self, level: f64) -> Result<()> {
        if level > self.complete_to {
            Err(Error::InsufficientCutoff { requested: level, available: self.complete_to })
        } else {
            Ok(())
        }
    }

    /// `⟨φ_k, f⟩` for every stored eigenvector.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        self.eigenvectors.iter().map(|phi| self.grid.inner(phi, f)).collect()
    }

    /// `Σ c_k φ_k` over the first `c.len()` eigenvectors.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (ck, phi) in c.iter().zip(&self.eigenvectors) {
            axpy(*ck, phi, &mut out);
        }
        out
    }

    /// Keeps only the eigenpairs `≤ level`.
    pub fn truncated(&self, level: f64) -> SpectralData {
        let k = self.count_below(level);
        let complete_to = if k == self.len() && self.spans_everything() { f64::INFINITY } else { level.min(self.complete_to) };
        SpectralData {
            grid: self.grid,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors[..k].to_vec(),
            complete_to,
            max_residual: self.max_residual,
        }
    }

    /// `max_{j,k} |⟨φ_j, φ_k⟩ - δ_jk|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, a) in self.eigenvectors.iter().enumerate() {
            for (k, b) in self.eigenvectors.iter().enumerate().take(j + 1) {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((self.grid.inner(a, b) - target).abs());
            }
        }
        worst
    }
}

fn finalize(
    grid: &Grid,
    op: &DiscreteOperator,
    values: Vec<f64>,
    mut vectors: Vec<Vec<f64>>,
    complete_to: f64,
    opts: &SolverOptions,
) -> Result<SpectralData> {
    let scale = 1.0 / grid.cell_volume().sqrt();
    let mut worst: f64 = 0.0;
    let mut av = vec![0.0; grid.len()];
    for (lambda, v) in values.iter().zip(vectors.iter_mut()) {
        let norm = dot(v, v).sqrt();
        let mut pivot = 0.0f64;
        for x in v.iter() {
            if x.abs() > pivot.abs() + 1e-12 * norm {
                pivot = *x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        v.iter_mut().for_each(|x| *x *= sign * scale / norm);
        op.apply(v, &mut av);
        let residual = av.iter().zip(v.iter()).map(|(a, x)| (a - lambda * x).powi(2)).sum::<f64>();
        let residual = (residual * grid.cell_volume()).sqrt() / (1.0 + lambda.abs());
        worst = worst.max(residual);
    }
    if worst > opts.residual_tolerance {
        return Err(Error::NotConverged { iterations: 0, residual: worst });
    }
    Ok(SpectralData { grid: *grid, eigenvalues: values, eigenvectors: vectors, complete_to, max_residual: worst })
}

pub fn eigensolve(op: &DiscreteOperator, request: EigenRequest) -> Result<SpectralData> {
    eigensolve_with(op, request, &SolverOptions::default())
}

pub fn eigensolve_with(op: &DiscreteOperator, request: EigenRequest, opts: &SolverOptions) -> Result<SpectralData> {
    let grid = *op.grid();
    let size = op.size();
    let selection = match request {
        EigenRequest::Count(k) => {
            if k > size {
                return Err(Error::invalid("count", alloc::format!("{k} eigenpairs requested from {size} unknowns")));
            }
            Selection::Lowest(k)
        }
        EigenRequest::Cutoff(level) => {
            if !level.is_finite() {
                return Err(Error::invalid("cutoff", "must be finite"));
            }
            Selection::Below(level)
        }
    };
    let (values, vectors) = if let Some((diag, off)) = op.tridiagonal() {
        tridiagonal::eigenpairs(&diag, &off, selection)
    } else if size <= opts.dense_limit {
        dense::eigenpairs(op.to_dense(), selection)
    } else {
        lanczos::eigenpairs(op, selection, &opts.lanczos)?
    };
    let complete_to = if values.len() == size {
        f64::INFINITY
    } else {
        match request {
            EigenRequest::Count(_) => values.last().copied().unwrap_or(f64::NEG_INFINITY),
            EigenRequest::Cutoff(level) => level,
        }
    };
    finalize(&grid, op, values, vectors, complete_to, opts)
}

/// `Σ_{λ_k ≤ λ} ⟨φ_k, f⟩ φ_k`.
pub fn spectral_project(s: &SpectralData, level: f64, f: &[f64]) -> Result<Vec<f64>> {
    s.ensure_covers(level)?;
    let k = s.count_below(level);
    let c: Vec<f64> = s.eigenvectors[..k].iter().map(|phi| s.grid.inner(phi, f)).collect();
    Ok(s.synthesize(&c))
}

/// `e^{-t λ^s}` with `λ` clamped at zero.
pub fn decay_factor(lambda: f64, t: f64, s: f64) -> f64 {
    (-t * lambda.max(0.0).powf(s)).exp()
}

/// `Σ_k e^{-t λ_k^s} ⟨φ_k, f⟩ φ_k`.
pub fn semigroup_apply(s: &SpectralData, t: f64, power: f64, f: &[f64]) -> Result<Vec<f64>> {
    semigroup_apply_with_tolerance(s, t, power, f, DEFAULT_TAIL_TOLERANCE)
}

/// As [`semigroup_apply`], rejecting inputs whose dropped out-of-span part,
/// damped by `e^{-t Λ^s}` at the completeness level `Λ`, exceeds
/// `tail_tolerance ‖f‖`.
pub fn semigroup_apply_with_tolerance(s: &SpectralData, t: f64, power: f64, f: &[f64], tail_tolerance: f64) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !(power > 0.0) {
        return Err(Error::invalid("s", "fractional power must be positive"));
    }
    let c = s.coefficients(f);
    let inside = s.synthesize(&c);
    if !s.spans_everything() {
        let outside: Vec<f64> = f.iter().zip(&inside).map(|(a, b)| a - b).collect();
        let f_norm = s.grid.norm(f);
        let tail = decay_factor(s.complete_to, t, power) * s.grid.norm(&outside);
        if tail > tail_tolerance * f_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::TruncatedTail { tail, tolerance: tail_tolerance * f_norm });
        }
    }
    let damped: Vec<f64> = c.iter().zip(&s.eigenvalues).map(|(ck, l)| ck * decay_factor(*l, t, power)).collect();
    Ok(s.synthesize(&damped))
}
