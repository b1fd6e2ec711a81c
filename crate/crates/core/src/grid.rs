//! Uniform tensor grids on the truncated box `[-L, L]^n`.
//!
//! Grid functions are flat `Vec<f64>` in row-major order (last axis fastest).
//! Dirichlet grids store only interior nodes, `x_i = -L + (i + 1) h` with
//! `h = 2L / (N + 1)`. Periodic grids store `x_i = -L + i h` with `h = 2L / N`.

use alloc::vec;
use alloc::vec::Vec;
// Unused when a dependency links std and the inherent f64 methods win.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub halfwidth: f64,
    pub points_per_dim: usize,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(dim: usize, halfwidth: f64, points_per_dim: usize, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        ensure_positive("halfwidth", halfwidth)?;
        if points_per_dim < 3 {
            return Err(Error::invalid("points_per_dim", "must be at least 3"));
        }
        Ok(Self { dim, halfwidth, points_per_dim, boundary })
    }

    pub fn dirichlet(dim: usize, halfwidth: f64, points_per_dim: usize) -> Result<Self> {
        Self::new(dim, halfwidth, points_per_dim, Boundary::Dirichlet)
    }

    pub fn spacing(&self) -> f64 {
        let n = self.points_per_dim as f64;
        match self.boundary {
            Boundary::Dirichlet => 2.0 * self.halfwidth / (n + 1.0),
            Boundary::Periodic => 2.0 * self.halfwidth / n,
        }
    }

    /// Total number of unknowns `N^n`.
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^n` of a single node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of node `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.boundary {
            Boundary::Dirichlet => -self.halfwidth + (i as f64 + 1.0) * h,
            Boundary::Periodic => -self.halfwidth + i as f64 * h,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points_per_dim).map(|i| self.coordinate(i)).collect()
    }

    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points_per_dim;
        for slot in out.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points_per_dim + i)
    }

    /// Writes the position of node `flat` into `out` (length `dim`).
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0usize; self.dim];
        self.multi_index(flat, &mut idx);
        for (x, i) in out.iter_mut().zip(idx) {
            *x = self.coordinate(i);
        }
    }

    /// Iterator over all node positions in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |flat| {
            let mut x = vec![0.0; self.dim];
            self.node(flat, &mut x);
            x
        })
    }

    /// Euclidean norm of every node, in storage order.
    pub fn radii(&self) -> Vec<f64> {
        self.nodes().map(|x| euclid(&x)).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.cell_volume() * dot(u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// `h^n Σ_{mask} u v`.
    pub fn masked_inner(&self, mask: &[bool], u: &[f64], v: &[f64]) -> f64 {
        let s: f64 = mask.iter().zip(u.iter().zip(v)).filter(|(m, _)| **m).map(|(_, (a, b))| a * b).sum();
        self.cell_volume() * s
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_spacing_and_nodes() {
        let g = Grid::dirichlet(1, 1.0, 3).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coordinates(), vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn periodic_nodes_start_at_left_edge() {
        let g = Grid::new(1, core::f64::consts::PI, 4, Boundary::Periodic).unwrap();
        assert!((g.coordinate(0) + core::f64::consts::PI).abs() < 1e-15);
        assert!((g.spacing() - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn flat_index_round_trip() {
        let g = Grid::dirichlet(3, 2.0, 5).unwrap();
        let mut idx = [0usize; 3];
        for flat in [0, 7, 63, 124] {
            g.multi_index(flat, &mut idx);
            assert_eq!(g.flat_index(&idx), flat);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::dirichlet(0, 1.0, 5).is_err());
        assert!(Grid::dirichlet(1, -1.0, 5).is_err());
        assert!(Grid::dirichlet(1, 1.0, 2).is_err());
    }
}
