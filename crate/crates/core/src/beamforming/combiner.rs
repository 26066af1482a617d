use num_complex::Complex64;

use super::rates::uplink_precoder;
use crate::error::{Error, Result};
use crate::linalg::{full_svd, hermitian_eigen, CMat};

/// Uplink RX combiner `U_k` (`d_m x M_k`) with unit-norm rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    pub u: CMat,
}

/// Combiner maximizing the uplink rate against residual SI plus noise.
///
/// With `B = c_eff V V^H c_eff^H + sigma_k^2 I = E Lambda E^H`, the channel
/// is whitened by `T = Lambda^{-1/2} E^H`; `W` holds the `d_m` dominant left
/// singular vectors of `T H_km V_m`, and `U = Gamma W^H T` with `Gamma`
/// normalizing each row. For `d_m = 1` this is `(B^{-1} h)^H` up to scale.
pub fn optimal_combiner(
    c_eff: &CMat,
    v: &CMat,
    h_km: &CMat,
    sigma_k_sq: f64,
    d_m: usize,
) -> Result<Combiner> {
    let m_k = c_eff.nrows();
    if h_km.nrows() != m_k || c_eff.ncols() != v.nrows() {
        return Err(Error::Dimension("inconsistent combiner dimensions".into()));
    }
    if d_m == 0 || d_m > h_km.ncols() || d_m > m_k {
        return Err(Error::param("d_m", format!("{d_m} streams on a {m_k}x{} channel", h_km.ncols())));
    }
    if !(sigma_k_sq > 0.0) {
        return Err(Error::param("sigma_k_sq", "must be positive"));
    }
    let si = c_eff * v;
    let b = &si * si.adjoint() + CMat::identity(m_k, m_k).scale(sigma_k_sq);
    let (lambda, e) = hermitian_eigen(&b)?;
    let mut whitener = e.adjoint();
    for (i, l) in lambda.iter().enumerate() {
        if !(*l > 0.0) {
            return Err(Error::Numerical("interference covariance is not positive definite".into()));
        }
        whitener.row_mut(i).scale_mut(1.0 / l.sqrt());
    }
    // the unit scale of V_m does not affect the span of W
    let h_eff = &whitener * (h_km * uplink_precoder(h_km.ncols(), d_m, d_m as f64));
    let svd = full_svd(&h_eff)?;
    let top = svd.singular_values[0];
    if top == 0.0 || svd.singular_values[d_m - 1] <= 1e-12 * top {
        return Err(Error::Numerical(format!(
            "d_m = {d_m} exceeds the rank of the whitened uplink channel"
        )));
    }
    let w = svd.u.columns(0, d_m);
    let mut u = w.adjoint() * whitener;
    for mut row in u.row_iter_mut() {
        let n = row.norm();
        row.scale_mut(1.0 / n);
    }
    debug_assert!(u.iter().all(|z: &Complex64| z.is_finite()));
    Ok(Combiner { u })
}
