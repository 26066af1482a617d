use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eye, log2_det_hpd, row_norms_sq, CMat};

fn check_finite(rate: f64) -> Result<f64> {
    if rate.is_finite() {
        // log-det of I + PSD is >= 0; clip rounding noise
        Ok(rate.max(0.0))
    } else {
        Err(Error::Numerical("non-finite rate".into()))
    }
}

/// Downlink rate `log2 det(I + H_qk V V^H H_qk^H / sigma_q^2)`.
pub fn dl_rate(v: &CMat, h_qk: &CMat, sigma_q_sq: f64) -> Result<f64> {
    if h_qk.ncols() != v.nrows() {
        return Err(Error::Dimension(format!(
            "H_qk is {}x{}, V is {}x{}",
            h_qk.nrows(),
            h_qk.ncols(),
            v.nrows(),
            v.ncols()
        )));
    }
    if !(sigma_q_sq > 0.0) {
        return Err(Error::param("sigma_q_sq", "must be positive"));
    }
    let hv = h_qk * v;
    let m = eye(h_qk.nrows(), h_qk.nrows()) + (&hv * hv.adjoint()).unscale(sigma_q_sq);
    check_finite(log2_det_hpd(&m)?)
}

/// Open-loop uplink precoder of node m: `sqrt(P_m / d_m)` times the first
/// `d_m` columns of the `N_m x N_m` identity.
pub fn uplink_precoder(n_m: usize, d_m: usize, p_m: f64) -> CMat {
    eye(n_m, d_m).scale((p_m / d_m as f64).sqrt())
}

/// Uplink rate after combining with `U`, treating the residual SI `c_eff V`
/// plus thermal noise as Gaussian interference:
/// `log2 det(I + S Q^{-1})`, with `S = U H_km V_m V_m^H H_km^H U^H` and
/// `Q = U c_eff V V^H c_eff^H U^H + sigma_k^2 U U^H`.
pub fn ul_rate(
    u: &CMat,
    c_eff: &CMat,
    v: &CMat,
    h_km: &CMat,
    p_m: f64,
    sigma_k_sq: f64,
) -> Result<f64> {
    let d_m = u.nrows();
    if u.ncols() != c_eff.nrows() || u.ncols() != h_km.nrows() || c_eff.ncols() != v.nrows() {
        return Err(Error::Dimension("inconsistent uplink dimensions".into()));
    }
    if d_m > h_km.ncols() {
        return Err(Error::Dimension(format!(
            "{d_m} uplink streams from {} TX antennas",
            h_km.ncols()
        )));
    }
    let v_m = uplink_precoder(h_km.ncols(), d_m, p_m);
    let si = u * (c_eff * v);
    let q = &si * si.adjoint() + (u * u.adjoint()).scale(sigma_k_sq);
    let sig = u * (h_km * v_m);
    let s = &sig * sig.adjoint();
    let q_inv = q
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular interference-plus-noise covariance".into()))?;
    let det: Complex64 = (eye(d_m, d_m) + s * q_inv).lu().determinant();
    check_finite(det.norm().log2())
}

/// Per-RX-chain residual SI power `||[c_eff V]_(j,:)||^2`.
pub fn residual_si_row_powers(c_eff: &CMat, v: &CMat) -> Vec<f64> {
    row_norms_sq(&(c_eff * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::draw_rayleigh_channel;
    use crate::linalg::full_svd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dl_zero_and_scalar() {
        let h = CMat::from_element(1, 1, c(1.0));
        assert_eq!(dl_rate(&CMat::zeros(1, 1), &h, 1.0).unwrap(), 0.0);
        let p: f64 = 7.0;
        let v = CMat::from_element(1, 1, c(p.sqrt()));
        assert!((dl_rate(&v, &h, 1.0).unwrap() - (1.0 + p).log2()).abs() < 1e-12);
        assert!(dl_rate(&v, &h, 0.0).is_err());
    }

    #[test]
    fn dl_matches_svd_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let h = draw_rayleigh_channel(2, 2, 0.0, &mut rng);
            let svd = full_svd(&h).unwrap();
            let powers = [0.7_f64, 0.3];
            let mut v = CMat::zeros(2, 2);
            for i in 0..2 {
                v.set_column(i, &(svd.v.column(i) * c(powers[i].sqrt())));
            }
            let sigma: f64 = 0.4;
            let oracle: f64 = (0..2)
                .map(|i| (1.0 + svd.singular_values[i].powi(2) * powers[i] / sigma).log2())
                .sum();
            assert!((dl_rate(&v, &h, sigma).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn ul_interference_free_bound() {
        let h = CMat::from_column_slice(2, 1, &[c(1.0), Complex64::new(0.0, 1.0)]);
        let u = h.adjoint().unscale(h.norm());
        let c_eff = CMat::from_element(2, 2, c(3.0));
        let p_m = 2.0;
        let sigma = 0.5;
        let expected = (1.0 + p_m * (&u * &h)[(0, 0)].norm_sqr() / sigma).log2();
        let no_tx = ul_rate(&u, &c_eff, &CMat::zeros(2, 1), &h, p_m, sigma).unwrap();
        assert!((no_tx - expected).abs() < 1e-12);
        let zero_si = ul_rate(&u, &CMat::zeros(2, 2), &CMat::identity(2, 1), &h, p_m, sigma).unwrap();
        assert!((zero_si - expected).abs() < 1e-12);
    }

    #[test]
    fn uplink_precoder_power() {
        let v = uplink_precoder(4, 2, 3.0);
        assert!(((&v * v.adjoint()).trace().re - 3.0).abs() < 1e-12);
    }
}
