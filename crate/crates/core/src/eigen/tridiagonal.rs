//! Symmetric tridiagonal eigenpairs by Sturm-sequence bisection and inverse
//! iteration.

use alloc::vec;
use alloc::vec::Vec;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;

use super::Selection;

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        if q == 0.0 {
            q = tiny;
        }
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based).
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * scale || mid == lo || mid == hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting of `T - shift I` (LAPACK `gttrf` layout).
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, pivot_floor: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = pivot_floor;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = pivot_floor;
        }
        for p in d.iter_mut() {
            if p.abs() < pivot_floor {
                *p = pivot_floor.copysign(*p);
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let tmp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tmp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        x[n - 1] /= self.d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off`, ascending, with Euclidean-normalized eigenvectors.
pub fn eigenpairs(diag: &[f64], off: &[f64], selection: Selection) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    if n == 1 {
        return match selection {
            Selection::Lowest(0) => (Vec::new(), Vec::new()),
            Selection::Below(level) if diag[0] > level => (Vec::new(), Vec::new()),
            _ => (vec![diag[0]], vec![vec![1.0]]),
        };
    }
    let count = match selection {
        Selection::Lowest(k) => k.min(n),
        Selection::Below(level) => {
            // Eigenvalues ≤ level: count those strictly below the next float.
            sturm_count(diag, off, level.next_up())
        }
    };
    let values: Vec<f64> = (0..count).map(|k| kth_eigenvalue(diag, off, k)).collect();
    let (lo, hi) = gershgorin(diag, off);
    let norm = lo.abs().max(hi.abs());
    let cluster_gap = 1e-3 * norm;
    let pivot_floor = f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut cluster_start = 0;
    for (k, &lambda) in values.iter().enumerate() {
        if k > 0 && lambda - values[k - 1] > cluster_gap {
            cluster_start = k;
        }
        // Perturb the shift slightly so the factorization is not exactly singular.
        let shift = lambda + pivot_floor * (1.0 + k as f64);
        let lu = ShiftedLu::new(diag, off, shift, pivot_floor);
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                // Deterministic, non-degenerate start vector.
                let t = (i as f64 + 1.0) * 0.618_033_988_749_895 + k as f64 * 0.414_213_562;
                0.5 + (t - t.floor())
            })
            .collect();
        normalize(&mut v);
        for _ in 0..5 {
            lu.solve(&mut v);
            for prev in &vectors[cluster_start..k] {
                let c: f64 = prev.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
            normalize(&mut v);
        }
        vectors.push(v);
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let (d, e) = laplacian(n);
        let (vals, vecs) = eigenpairs(&d, &e, Selection::Lowest(5));
        for (k, v) in vals.iter().enumerate() {
            let theta = core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64;
            assert!((v - (2.0 - 2.0 * theta.cos())).abs() < 1e-13);
        }
        for (k, vec) in vecs.iter().enumerate() {
            // residual
            let lam = vals[k];
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let mut av = 2.0 * vec[i];
                if i > 0 {
                    av -= vec[i - 1];
                }
                if i + 1 < n {
                    av -= vec[i + 1];
                }
                worst = worst.max((av - lam * vec[i]).abs());
            }
            assert!(worst < 1e-12, "residual {worst}");
        }
    }

    #[test]
    fn below_counts_inclusive() {
        let (d, e) = (vec![1.0, 2.0, 3.0], vec![0.0, 0.0]);
        assert_eq!(sturm_count(&d, &e, 2.0), 1);
        let (vals, _) = eigenpairs(&d, &e, Selection::Below(2.0));
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        let (vals, _) = eigenpairs(&d, &e, Selection::Below(0.5));
        assert!(vals.is_empty());
    }

    #[test]
    fn clustered_eigenvalues_stay_orthogonal() {
        // Two decoupled identical blocks give exact double eigenvalues.
        let d = vec![2.0, 2.0, 2.0, 2.0, 2.0, 2.0];
        let e = vec![-1.0, -1.0, 0.0, -1.0, -1.0];
        let (vals, vecs) = eigenpairs(&d, &e, Selection::Lowest(4));
        assert!((vals[0] - vals[1]).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..i {
                let c: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(c.abs() < 1e-10, "overlap {c} between {i} and {j}");
            }
        }
    }
}
