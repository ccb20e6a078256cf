//! Small dense and structured linear-algebra kernels.

mod band;
mod tridiag;

pub use band::{reverse_cuthill_mckee, BandLu, SymBand};
pub use tridiag::{inverse_corners, sturm_negatives, TridiagCholesky, TridiagLu};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of the symmetric-definite pencil (A, M), ascending.
/// Eigenvectors are M-orthonormal columns.
pub fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or(Error::Singular)?;
    let l = chol.l();
    let y = l.solve_lower_triangular(a).ok_or(Error::Singular)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::Singular)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let sorted = DMatrix::from_fn(eig.eigenvectors.nrows(), idx.len(), |r, k| {
        eig.eigenvectors[(r, idx[k])]
    });
    let vectors = l
        .transpose()
        .solve_upper_triangular(&sorted)
        .ok_or(Error::Singular)?;
    Ok((values, vectors))
}
