//! Dense complex helpers: SVD null spaces and principal angles.

use nalgebra::DMatrix;

use crate::Complex64;

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Singular values (descending) and an orthonormal null-space basis, the
/// right singular vectors whose singular value is at most
/// `rel_tol * sigma_max`.
pub(crate) struct NullSpace {
    pub singular_values: Vec<f64>,
    pub basis: CMatrix,
    pub rank: usize,
}

pub(crate) fn null_space(a: &CMatrix, rel_tol: f64) -> NullSpace {
    let cols = a.ncols();
    if cols == 0 {
        return NullSpace {
            singular_values: Vec::new(),
            basis: CMatrix::zeros(0, 0),
            rank: 0,
        };
    }
    // Pad with zero rows so the SVD returns the full right factor.
    let padded = if a.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = rel_tol * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        sigma.iter().filter(|&&s| s > threshold).count()
    };
    let null_rows: Vec<usize> = order[rank..].to_vec();
    let mut basis = CMatrix::zeros(cols, null_rows.len());
    for (j, &row) in null_rows.iter().enumerate() {
        for i in 0..cols {
            basis[(i, j)] = v_t[(row, i)].conj();
        }
    }
    NullSpace {
        singular_values: sigma,
        basis,
        rank,
    }
}

/// Orthonormal basis of the column span (thin QR, no rank revealing; the
/// input columns are assumed independent).
pub(crate) fn orthonormalize(a: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return a.clone();
    }
    a.clone().qr().q()
}

/// Largest principal angle between the spans of two orthonormal bases of
/// equal dimension, via `‖(I - Q_b Q_b^H) Q_a‖₂`, which stays accurate for
/// small angles.
pub(crate) fn max_principal_angle(qa: &CMatrix, qb: &CMatrix) -> f64 {
    if qa.ncols() != qb.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let residual = qa - qb * (qb.adjoint() * qa);
    let s = residual.singular_values().max();
    s.clamp(0.0, 1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = CMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.rank, 1);
        assert_eq!(ns.basis.ncols(), 2);
        assert!((&a * &ns.basis).norm() < 1e-14);
        let gram = ns.basis.adjoint() * &ns.basis;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_is_all_null() {
        let ns = null_space(&CMatrix::zeros(4, 3), 1e-10);
        assert_eq!(ns.rank, 0);
        assert_eq!(ns.basis.ncols(), 3);
    }

    #[test]
    fn principal_angles() {
        let e = CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let t = 1e-9f64;
        let f = CMatrix::from_column_slice(2, 1, &[c(t.cos()), c(t.sin())]);
        assert!((max_principal_angle(&e, &f) - t).abs() < 1e-20);
        let g = CMatrix::from_column_slice(2, 1, &[c(0.0), c(1.0)]);
        assert!((max_principal_angle(&e, &g) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
