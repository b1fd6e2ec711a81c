//! Second-order finite-difference discretization of `H_V = -Δ + V`.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::potential::{PotentialSpec, ScaledPotential};

/// Default cap on the number of unknowns accepted by [`discretize`].
pub const DEFAULT_MAX_UNKNOWNS: usize = 4_000_000;

/// Anything that can be sampled pointwise as a potential.
pub trait PotentialField {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

impl PotentialField for PotentialSpec {
    fn dim(&self) -> usize {
        PotentialSpec::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
}

impl PotentialField for ScaledPotential {
    fn dim(&self) -> usize {
        ScaledPotential::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
}

/// Symmetric linear map acting on flat vectors.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// `-Δ_h + diag(V)` on a [`Grid`], stored matrix-free.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    grid: Grid,
    potential: Vec<f64>,
}

pub fn discretize(p: &dyn PotentialField, grid: &Grid) -> Result<DiscreteOperator> {
    discretize_capped(p, grid, DEFAULT_MAX_UNKNOWNS)
}

pub fn discretize_capped(p: &dyn PotentialField, grid: &Grid, max_unknowns: usize) -> Result<DiscreteOperator> {
    if p.dim() != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: p.dim() });
    }
    let unknowns = grid
        .points_per_dim
        .checked_pow(grid.dim as u32)
        .filter(|&u| u <= max_unknowns)
        .ok_or(Error::TooLarge { unknowns: grid.points_per_dim.saturating_pow(grid.dim as u32), cap: max_unknowns })?;
    let mut x = vec![0.0; grid.dim];
    let potential = (0..unknowns)
        .map(|flat| {
            grid.node(flat, &mut x);
            p.value(&x)
        })
        .collect();
    Ok(DiscreteOperator { grid: *grid, potential })
}

impl DiscreteOperator {
    /// Builds the operator from potential values already sampled at the nodes.
    pub fn from_values(grid: Grid, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: potential.len() });
        }
        Ok(Self { grid, potential })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    /// Diagonal and off-diagonal of the matrix when it is tridiagonal
    /// (one-dimensional Dirichlet grids).
    pub fn tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.grid.dim != 1 || self.grid.boundary != Boundary::Dirichlet {
            return None;
        }
        let inv_h2 = 1.0 / self.grid.spacing().powi(2);
        let diag = self.potential.iter().map(|v| 2.0 * inv_h2 + v).collect();
        let off = vec![-inv_h2; self.potential.len() - 1];
        Some((diag, off))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
            e[j] = 0.0;
        }
        m
    }

    /// Quadratic form `<A u, u>` in the grid inner product.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let mut au = vec![0.0; u.len()];
        self.apply(u, &mut au);
        self.grid.inner(&au, u)
    }
}

impl LinearOperator for DiscreteOperator {
    fn size(&self) -> usize {
        self.potential.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.grid;
        let n = g.points_per_dim;
        let dim = g.dim;
        let inv_h2 = 1.0 / g.spacing().powi(2);
        let periodic = g.boundary == Boundary::Periodic;
        let center = 2.0 * dim as f64 * inv_h2;
        for (yi, (xi, vi)) in y.iter_mut().zip(x.iter().zip(&self.potential)) {
            *yi = (center + vi) * xi;
        }
        let mut stride = 1;
        for _ in 0..dim {
            let block = stride * n;
            for base in (0..x.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for i in 0..n {
                        let k = start + i * stride;
                        let mut nb = 0.0;
                        if i > 0 {
                            nb += x[k - stride];
                        } else if periodic {
                            nb += x[start + (n - 1) * stride];
                        }
                        if i + 1 < n {
                            nb += x[k + stride];
                        } else if periodic {
                            nb += x[start];
                        }
                        y[k] -= inv_h2 * nb;
                    }
                }
            }
            stride = block;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_power_potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn symmetric_and_positive_in_two_dimensions() {
        let p = make_power_potential(1.0, 2.0, 2).unwrap();
        for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
            let g = Grid::new(2, 3.0, 9, boundary).unwrap();
            let a = discretize(&p, &g).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..5 {
                let u = random_vec(&mut rng, g.len());
                let v = random_vec(&mut rng, g.len());
                let mut au = vec![0.0; g.len()];
                let mut av = vec![0.0; g.len()];
                a.apply(&u, &mut au);
                a.apply(&v, &mut av);
                let lhs = g.inner(&au, &v);
                let rhs = g.inner(&u, &av);
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
                assert!(a.quadratic_form(&u) >= 0.0);
            }
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let g = Grid::dirichlet(1, 2.0, 7).unwrap();
        let a = discretize(&p, &g).unwrap();
        let (d, e) = a.tridiagonal().unwrap();
        let m = a.to_dense();
        for i in 0..7 {
            assert!((m[(i, i)] - d[i]).abs() < 1e-12);
            if i + 1 < 7 {
                assert!((m[(i, i + 1)] - e[i]).abs() < 1e-12);
                assert!((m[(i + 1, i)] - e[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn periodic_wraps_around() {
        let g = Grid::new(1, 1.0, 4, Boundary::Periodic).unwrap();
        let a = DiscreteOperator::from_values(g, vec![0.0; 4]).unwrap();
        let m = a.to_dense();
        assert!(m[(0, 3)] < 0.0 && m[(3, 0)] < 0.0);
        // Constants are annihilated by the periodic Laplacian.
        let mut y = vec![0.0; 4];
        a.apply(&[1.0; 4], &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dimension_and_size_checks() {
        let p = make_power_potential(1.0, 2.0, 1).unwrap();
        let g2 = Grid::dirichlet(2, 1.0, 5).unwrap();
        assert!(matches!(discretize(&p, &g2), Err(Error::DimensionMismatch { .. })));
        let big = Grid::dirichlet(1, 1.0, 100).unwrap();
        assert!(matches!(discretize_capped(&p, &big, 50), Err(Error::TooLarge { .. })));
    }
}
