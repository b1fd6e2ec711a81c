//! Symmetric eigensolvers: tridiagonal bisection, dense (nalgebra) and Lanczos.

pub mod dense;
pub mod lanczos;
pub mod tridiagonal;

/// Which end of the spectrum to return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// The `k` smallest eigenvalues.
    Lowest(usize),
    /// Every eigenvalue `≤ level`.
    Below(f64),
}
