//! Thick-restart Lanczos with full reorthogonalization and locking, for the
//! low end of the spectrum of large symmetric operators.
//!
//! The projected matrix `H = Vᵀ A V` is assembled from the Gram-Schmidt
//! coefficients, so after a thick restart (kept Ritz vectors plus the last
//! residual direction) the Rayleigh-Ritz step is still exact. Ritz pairs are
//! locked only after an explicit residual check. Once the requested window
//! looks complete, one more cycle from a fresh random vector (orthogonal to
//! everything locked) must turn up nothing new; that is how multiplicities
//! invisible to a single Krylov sequence get picked up.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Selection;
use crate::error::{Error, Result};
use crate::grid::{axpy, dot};
use crate::operator::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_basis: usize,
    /// Cap on `max_basis * size` (stored doubles).
    pub max_stored: usize,
    /// Ritz pairs are accepted once `‖Ay - θy‖ ≤ tol (1 + |θ|)`.
    pub tolerance: f64,
    pub max_cycles: usize,
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_basis: 120, max_stored: 24_000_000, tolerance: 1e-10, max_cycles: 200, check_every: 20, seed: 0x5eed }
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Twice-iterated Gram-Schmidt; returns the accumulated coefficients against `basis`.
fn orthogonalize(v: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for q in locked {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
        for (q, acc) in basis.iter().zip(coeffs.iter_mut()) {
            let c = dot(q, v);
            axpy(-c, q, v);
            *acc += c;
        }
    }
    coeffs
}

fn ritz_vector(basis: &[Vec<f64>], coefficients: impl Iterator<Item = f64>, size: usize) -> Vec<f64> {
    let mut y = vec![0.0; size];
    for (v, c) in basis.iter().zip(coefficients) {
        axpy(c, v, &mut y);
    }
    let ny = norm(&y);
    y.iter_mut().for_each(|x| *x /= ny);
    y
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

fn rayleigh_ritz(h: &DMatrix<f64>, m: usize) -> Ritz {
    let eig = SymmetricEigen::new(h.view((0, 0), (m, m)).into_owned());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ritz { values, vectors }
}

/// One step of inverse iteration on the projected matrix. The dense
/// eigensolver's vectors are only accurate to a modest multiple of `ε‖H‖`,
/// which is not enough for the residual tolerance on stiff operators.
fn refine(h: &DMatrix<f64>, m: usize, theta: f64, c: Vec<f64>) -> (f64, Vec<f64>) {
    let hm = h.view((0, 0), (m, m)).into_owned();
    let mut shifted = hm.clone();
    for i in 0..m {
        shifted[(i, i)] -= theta;
    }
    let rhs = nalgebra::DVector::from_vec(c.clone());
    let Some(x) = shifted.lu().solve(&rhs) else {
        return (theta, c);
    };
    let nx = x.norm();
    if !(nx.is_finite() && nx > 0.0) {
        return (theta, c);
    }
    let x = x / nx;
    let rayleigh = x.dot(&(&hm * &x));
    (rayleigh, x.iter().copied().collect())
}

fn random_vector(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Lowest eigenpairs of `op` per `selection`, ascending, Euclidean-normalized.
pub fn eigenpairs(op: &dyn LinearOperator, selection: Selection, opts: &LanczosOptions) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let size = op.size();
    if size == 0 || matches!(selection, Selection::Lowest(0)) {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_basis = opts.max_basis.min(opts.max_stored / size).max(8).min(size);
    let tol = opts.tolerance;

    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut locked_values: Vec<f64> = Vec::new();
    let needed = |theta: f64, position: usize, locked_values: &[f64]| -> bool {
        match selection {
            Selection::Below(level) => theta <= level,
            Selection::Lowest(k) => locked_values.len() + position < k || locked_values.iter().any(|&l| theta < l),
        }
    };

    // Thick-restart state: kept Ritz vectors, then the next direction to expand.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut h = DMatrix::<f64>::zeros(max_basis, max_basis);
    let mut pending: Option<Vec<f64>> = None;
    // Set while running the confirmation pass that started from a fresh vector.
    let mut verifying = false;
    let mut epoch_locks = 0;
    let mut w = vec![0.0; size];
    let mut av = vec![0.0; size];
    let mut worst_residual = f64::INFINITY;

    for _cycle in 0..opts.max_cycles {
        if locked.len() >= size {
            break;
        }
        // The residual direction is kept at any scale: replacing it would break
        // the Lanczos relation of the kept Ritz vectors.
        let mut q = pending.take().unwrap_or_else(|| random_vector(&mut rng, size));
        let q0 = norm(&q);
        orthogonalize(&mut q, &locked, &basis);
        let mut qn = norm(&q);
        if !(qn > 1e-8 * q0) || qn == 0.0 {
            q = random_vector(&mut rng, size);
            orthogonalize(&mut q, &locked, &basis);
            qn = norm(&q);
        }
        if qn < 1e-8 {
            break;
        }
        q.iter_mut().for_each(|x| *x /= qn);
        basis.push(q);

        let mut ritz;
        let mut last_beta;
        let mut steps = 0;
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            let coeffs = orthogonalize(&mut w, &locked, &basis);
            for (i, c) in coeffs.iter().enumerate() {
                h[(i, j)] = *c;
                h[(j, i)] = *c;
            }
            last_beta = norm(&w);
            steps += 1;
            let m = basis.len();
            let exhausted = last_beta <= 1e-12 * h[(j, j)].abs().max(1.0) || m + locked.len() >= size;
            let full = m >= max_basis;
            if exhausted || full || steps % opts.check_every == 0 {
                ritz = rayleigh_ritz(&h, m);
                let mut settled = true;
                for i in 0..m {
                    let estimate = if exhausted { 0.0 } else { (last_beta * ritz.vectors[(m - 1, i)]).abs() };
                    let theta = ritz.values[i];
                    if !needed(theta, i, &locked_values) {
                        // Enough to know it stays outside the window.
                        settled &= estimate <= tol * (1.0 + theta.abs()) || !needed(theta - estimate, i, &locked_values);
                        break;
                    }
                    settled &= estimate <= tol * (1.0 + theta.abs());
                }
                if settled || exhausted || full {
                    break;
                }
            }
            basis.push(w.iter().map(|x| x / last_beta).collect());
        }

        // Lock converged pairs in the wanted window, verifying residuals explicitly.
        let m = basis.len();
        let mut new_locks = 0;
        let mut lowest_free: Option<bool> = None;
        let mut keep: Vec<(f64, Vec<f64>)> = Vec::new();
        let keep_cap = (max_basis / 2).max(1);
        worst_residual = 0.0;
        for i in 0..m {
            let mut theta = ritz.values[i];
            let is_needed = needed(theta, i - new_locks, &locked_values);
            if !is_needed && lowest_free.is_some() && keep.len() >= keep_cap {
                break;
            }
            let checked = is_needed || lowest_free.is_none();
            let y = if checked {
                let (refined_theta, c) = refine(&h, m, theta, ritz.vectors.column(i).iter().copied().collect());
                theta = refined_theta;
                ritz_vector(&basis, c.into_iter(), size)
            } else {
                ritz_vector(&basis, ritz.vectors.column(i).iter().copied(), size)
            };
            if checked {
                op.apply(&y, &mut av);
                axpy(-theta, &y, &mut av);
                let residual = norm(&av);
                let converged = residual <= tol * (1.0 + theta.abs());
                if is_needed && converged {
                    locked.push(y);
                    locked_values.push(theta);
                    new_locks += 1;
                    continue;
                }
                if is_needed {
                    worst_residual = worst_residual.max(residual);
                } else {
                    lowest_free = Some(converged || !needed(theta - residual, i - new_locks, &locked_values));
                }
            }
            if keep.len() < keep_cap {
                keep.push((theta, y));
            }
        }
        if let Selection::Lowest(k) = selection {
            if locked.len() > k {
                let (values, vectors) = sorted(core::mem::take(&mut locked_values), core::mem::take(&mut locked), selection);
                locked_values = values;
                locked = vectors;
            }
        }

        let window_complete = worst_residual == 0.0
            && match lowest_free {
                Some(converged) => converged,
                // Nothing beyond the window is left in the active space.
                None => true,
            };
        h.fill(0.0);
        if window_complete {
            epoch_locks += new_locks;
            if verifying && epoch_locks == 0 {
                return Ok(sorted(locked_values, locked, selection));
            }
            basis.clear();
            pending = None;
            verifying = true;
            epoch_locks = 0;
            continue;
        }

        // Thick restart: kept Ritz vectors plus the residual direction.
        basis = Vec::with_capacity(max_basis);
        for (slot, (theta, y)) in keep.into_iter().enumerate() {
            h[(slot, slot)] = theta;
            basis.push(y);
        }
        basis.truncate(max_basis - 1);
        pending = if last_beta > 0.0 { Some(w.clone()) } else { None };
        epoch_locks += new_locks;
    }
    if locked.len() >= size {
        return Ok(sorted(locked_values, locked, selection));
    }
    Err(Error::NotConverged { iterations: opts.max_cycles, residual: worst_residual })
}

fn sorted(values: Vec<f64>, mut vectors: Vec<Vec<f64>>, selection: Selection) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    if let Selection::Lowest(k) = selection {
        order.truncate(k);
    }
    let out_values = order.iter().map(|&i| values[i]).collect();
    let out_vectors = order.into_iter().map(|i| core::mem::take(&mut vectors[i])).collect();
    (out_values, out_vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operator::DiscreteOperator;

    #[test]
    fn free_laplacian_square_has_double_eigenvalue() {
        // 2-D Dirichlet Laplacian: λ_{jk} = μ_j + μ_k, with μ_1 + μ_2 doubly degenerate.
        let n = 30;
        let g = Grid::dirichlet(2, 1.0, n).unwrap();
        let op = DiscreteOperator::from_values(g, vec![0.0; g.len()]).unwrap();
        let h = g.spacing();
        let mu = |k: usize| (2.0 - 2.0 * (core::f64::consts::PI * k as f64 / (n + 1) as f64).cos()) / (h * h);
        let mut exact = Vec::new();
        for j in 1..6 {
            for k in 1..6 {
                exact.push(mu(j) + mu(k));
            }
        }
        exact.sort_by(f64::total_cmp);
        let opts = LanczosOptions { max_basis: 80, ..Default::default() };
        let (vals, vecs) = eigenpairs(&op, Selection::Lowest(6), &opts).unwrap();
        for (v, e) in vals.iter().zip(&exact) {
            assert!((v - e).abs() < 1e-7 * e, "{v} vs {e}");
        }
        for i in 0..vecs.len() {
            for j in 0..i {
                assert!(dot(&vecs[i], &vecs[j]).abs() < 1e-9);
            }
        }
        let level = exact[5] + 1e-6;
        let (vals, _) = eigenpairs(&op, Selection::Below(level), &opts).unwrap();
        let want = exact.iter().filter(|&&e| e <= level).count();
        assert_eq!(vals.len(), want);
    }

    #[test]
    fn small_operator_is_exhausted() {
        let g = Grid::dirichlet(2, 1.0, 4).unwrap();
        let op = DiscreteOperator::from_values(g, vec![0.0; g.len()]).unwrap();
        let (vals, _) = eigenpairs(&op, Selection::Lowest(16), &LanczosOptions::default()).unwrap();
        assert_eq!(vals.len(), 16);
        let dense = crate::eigen::dense::eigenpairs(op.to_dense(), Selection::Lowest(16)).0;
        for (a, b) in vals.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}
