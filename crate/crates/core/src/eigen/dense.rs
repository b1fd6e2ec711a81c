use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use super::Selection;

/// Ascending eigenpairs of a dense symmetric matrix.
pub fn eigenpairs(matrix: DMatrix<f64>, selection: Selection) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = match selection {
        Selection::Lowest(k) => k.min(order.len()),
        Selection::Below(level) => order.iter().take_while(|&&i| eig.eigenvalues[i] <= level).count(),
    };
    let values = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order[..keep].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

/// All eigenvalues and eigenvectors (as matrix columns), ascending.
pub fn full(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let (values, vectors) = eigenpairs(matrix, Selection::Lowest(n));
    let mut m = DMatrix::zeros(n, n);
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, &nalgebra::DVector::from_column_slice(v));
    }
    (values, m)
}
