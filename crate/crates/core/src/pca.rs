//! Principal component projection of one kind's population.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::ChemError;
use crate::molecule::Molecule;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// One row of `dims` coordinates per input molecule.
    pub coords: Vec<Vec<f64>>,
    /// Fraction of total variance carried by each retained component,
    /// non-increasing.
    pub explained: Vec<f64>,
    /// Unit loading vectors, one per retained component.
    pub components: Vec<Vec<f64>>,
}

pub fn pca_project(molecules: &[Molecule], dims: usize) -> Result<PcaProjection, ChemError> {
    let first = molecules.first().ok_or(ChemError::EmptyInput)?;
    let dim = first.kind().len();
    let mut data = Vec::with_capacity(molecules.len() * dim);
    for m in molecules {
        if m.kind() != first.kind() {
            return Err(ChemError::Invalid("mixed molecule kinds".into()));
        }
        data.extend_from_slice(m.values());
    }
    pca_project_flat(&data, dim, dims)
}

/// PCA over row-major points of dimension `dim`.
///
/// Covariance route: centre, form the `dim x dim` sample covariance, take its
/// symmetric eigendecomposition and keep the `dims` largest eigenpairs. Each
/// component is signed so its largest-magnitude loading is non-negative.
pub fn pca_project_flat(data: &[f64], dim: usize, dims: usize) -> Result<PcaProjection, ChemError> {
    if dims == 0 || dims > dim {
        return Err(ChemError::Invalid(format!(
            "dims must lie in 1..={dim}, got {dims}"
        )));
    }
    let n = data.len() / dim;
    if n < 2 {
        return Err(ChemError::Invalid(format!("PCA needs at least 2 points, got {n}")));
    }
    let x = DMatrix::from_row_slice(n, dim, data);
    let mean = x.row_mean();
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(dims);
    let mut explained = Vec::with_capacity(dims);
    for &c in order.iter().take(dims) {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        let lambda = eig.eigenvalues[c].max(0.0);
        explained.push(if total > 0.0 { lambda / total } else { 0.0 });
    }

    let coords = centered
        .row_iter()
        .map(|row| {
            components
                .iter()
                .map(|v| row.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PcaProjection {
        coords,
        explained,
        components,
    })
}
