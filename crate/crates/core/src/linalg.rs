//! Small complex linear-algebra helpers on top of nalgebra.
//!
//! Everything here works on dense `DMatrix<Complex64>`. Decompositions are
//! returned with their spectra sorted in descending order, which nalgebra
//! does not guarantee.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;

/// Singular value decomposition with a full set of right singular vectors.
#[derive(Debug, Clone)]
pub struct FullSvd {
    /// Left singular vectors, `rows x r` with `r = min(rows, cols)`.
    pub u: CMat,
    /// Singular values in descending order, length `cols` (padded with zeros
    /// when `rows < cols`).
    pub singular_values: Vec<f64>,
    /// All `cols` right singular vectors as columns, ordered like
    /// `singular_values`.
    pub v: CMat,
}

/// SVD returning every right singular vector, even for wide matrices.
///
/// Wide inputs are padded with zero rows so that the thin decomposition
/// already spans the whole row space; the extra singular values are zero.
pub fn full_svd(a: &CMat) -> Result<FullSvd> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("empty {rows}x{cols} matrix")));
    }
    let padded = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not converge".into())),
    };
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite singular value".into()));
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let r = rows.min(cols);
    let v_full = v_t.adjoint();
    let mut v = CMat::zeros(cols, cols);
    let mut u_sorted = CMat::zeros(rows, r);
    let mut values = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_full.column(src));
        values.push(sv[src]);
    }
    // Left vectors: only those belonging to the original rows are meaningful.
    let mut k = 0;
    for &src in &order {
        if k == r {
            break;
        }
        if rows < cols {
            // padded rows carry no energy; keep vectors restricted to the
            // original rows, which are orthonormal for the leading `r` values
            u_sorted.set_column(k, &u.column(src).rows(0, rows));
        } else {
            u_sorted.set_column(k, &u.column(src));
        }
        k += 1;
    }
    Ok(FullSvd {
        u: u_sorted,
        singular_values: values,
        v,
    })
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let sym = hermitian_part(a);
    let eig = SymmetricEigen::new(sym);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let n = a.nrows();
    let mut vecs = CMat::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        sorted.push(vals[src]);
    }
    Ok((sorted, vecs))
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// `log2 det(A)` for a Hermitian positive-definite matrix, via Cholesky.
pub fn log2_det_hpd(a: &CMat) -> Result<f64> {
    let chol = hermitian_part(a)
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    let l = chol.l();
    // complex Cholesky in nalgebra takes square roots of any diagonal value
    if l.diagonal().iter().any(|d| !(d.re > 0.0) || d.im.abs() > 1e-9 * d.re) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    let sum: f64 = l.diagonal().iter().map(|d| d.re.ln()).sum();
    let out = 2.0 * sum / std::f64::consts::LN_2;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Numerical("non-finite log-determinant".into()))
    }
}

/// Squared Euclidean norm of every row.
pub fn row_norms_sq(a: &CMat) -> Vec<f64> {
    a.row_iter().map(|r| r.norm_squared()).collect()
}

/// Identity-like `rows x cols` matrix with ones on the leading diagonal.
pub fn eye(rows: usize, cols: usize) -> CMat {
    CMat::identity(rows, cols)
}

/// Keep the listed rows of `a`, in the given order.
pub fn select_rows(a: &CMat, rows: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Orthonormal basis of the column span of `a` (columns assumed independent).
pub fn orthonormal_basis(a: &CMat) -> CMat {
    let qr = a.clone().qr();
    qr.q()
}

/// Sine of the largest principal angle between the column spans of `a` and
/// `b` (both `n x k` with independent columns). Zero iff the spans coincide.
pub fn subspace_distance(a: &CMat, b: &CMat) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    let proj = &qa * (qa.adjoint() * &qb);
    let resid = &qb - proj;
    let sv = resid.singular_values();
    sv.iter().copied().fold(0.0, f64::max)
}

/// `sqrt` of a non-negative real diagonal as a complex column vector.
pub fn sqrt_diag(values: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn full_svd_wide_matrix_has_complete_right_basis() {
        let a = CMat::from_row_slice(1, 3, &[c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let svd = full_svd(&a).unwrap();
        assert_eq!(svd.v.shape(), (3, 3));
        assert_eq!(svd.singular_values.len(), 3);
        let gram = svd.v.adjoint() * &svd.v;
        assert!((gram - CMat::identity(3, 3)).norm() < 1e-12);
        assert!((svd.singular_values[0] - a.norm()).abs() < 1e-12);
        assert!(svd.singular_values[1].abs() < 1e-12);
        // trailing right vectors span the null space
        let null = &a * svd.v.columns(1, 2);
        assert!(null.norm() < 1e-12);
    }

    #[test]
    fn full_svd_sorted_and_reconstructs() {
        let a = CMat::from_row_slice(
            3,
            2,
            &[c(0.1, 0.0), c(3.0, 1.0), c(0.0, 0.0), c(0.2, -0.5), c(1.0, 1.0), c(0.0, 0.3)],
        );
        let svd = full_svd(&a).unwrap();
        assert!(svd.singular_values[0] >= svd.singular_values[1]);
        let s = CMat::from_diagonal(&DVector::from_iterator(
            2,
            svd.singular_values.iter().map(|&v| c(v, 0.0)),
        ));
        let rebuilt = &svd.u * s * svd.v.adjoint();
        assert!((rebuilt - a).norm() < 1e-12);
    }

    #[test]
    fn log2_det_matches_product_of_diagonal() {
        let d = CMat::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(8.0, 0.0)]));
        assert!((log2_det_hpd(&d).unwrap() - 4.0).abs() < 1e-12);
        let bad = CMat::from_diagonal(&DVector::from_vec(vec![c(-1.0, 0.0), c(1.0, 0.0)]));
        assert!(log2_det_hpd(&bad).is_err());
    }

    #[test]
    fn eigen_descending() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        assert!(vals[0] > vals[1]);
        let lhs = &a * vecs.column(0);
        let rhs = vecs.column(0) * c(vals[0], 0.0);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn subspace_distance_ignores_basis_choice() {
        let a = CMat::from_row_slice(3, 1, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let b = a.map(|z| z * c(0.0, -2.5));
        assert!(subspace_distance(&a, &b) < 1e-14);
        let e = CMat::from_row_slice(3, 1, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((subspace_distance(&a, &e) - 1.0).abs() < 1e-14);
    }
}
