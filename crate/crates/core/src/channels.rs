//! Channel realizations and power-unit conversions.
//!
//! Downlink and uplink channels are IID Rayleigh; the self-interference
//! channel is Ricean with a fixed line-of-sight phase pattern.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Ricean factors at or below this value (in dB) mean no LoS component.
pub const RAYLEIGH_K_FACTOR_DB: f64 = -300.0;

/// `10^((x - 30) / 10)`: dBm to watts.
pub fn dbm_to_watt(x_dbm: f64) -> f64 {
    10f64.powf((x_dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Large-scale parameters of the three channels and the two noise floors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    /// Path loss of the downlink channel `H_qk`.
    pub pathloss_dl_db: f64,
    /// Path loss of the uplink channel `H_km`.
    pub pathloss_ul_db: f64,
    /// Path loss of the self-interference channel `H_kk`.
    pub pathloss_si_db: f64,
    /// Ricean factor of the SI channel.
    pub ricean_k_db: f64,
    pub noise_floor_k_dbm: f64,
    pub noise_floor_q_dbm: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            pathloss_dl_db: 110.0,
            pathloss_ul_db: 110.0,
            pathloss_si_db: 40.0,
            ricean_k_db: 35.0,
            noise_floor_k_dbm: -110.0,
            noise_floor_q_dbm: -90.0,
        }
    }
}

impl ChannelParams {
    /// Noise power at the FD node, in watts.
    pub fn sigma_k_sq(&self) -> f64 {
        dbm_to_watt(self.noise_floor_k_dbm)
    }

    /// Noise power at the downlink node, in watts.
    pub fn sigma_q_sq(&self) -> f64 {
        dbm_to_watt(self.noise_floor_q_dbm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pathloss_dl_db", self.pathloss_dl_db),
            ("pathloss_ul_db", self.pathloss_ul_db),
            ("pathloss_si_db", self.pathloss_si_db),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("{v} must be a finite value >= 0 dB")));
            }
        }
        for (name, v) in [
            ("ricean_k_db", self.ricean_k_db),
            ("noise_floor_k_dbm", self.noise_floor_k_dbm),
            ("noise_floor_q_dbm", self.noise_floor_q_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// One realization of the downlink, uplink and self-interference channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Downlink channel, `M_q x N_k`.
    pub h_qk: CMat,
    /// Uplink channel, `M_k x N_m`.
    pub h_km: CMat,
    /// Self-interference channel, `M_k x N_k`.
    pub h_kk: CMat,
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// IID Rayleigh matrix with per-entry power `10^(-pathloss_db / 10)`.
pub fn draw_rayleigh_channel<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    pathloss_db: f64,
    rng: &mut R,
) -> CMat {
    let var = db_to_linear(-pathloss_db);
    // column-major fill keeps the draw order stable across nalgebra versions
    let mut h = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            h[(i, j)] = complex_gaussian(rng, var);
        }
    }
    h
}

/// Deterministic LoS phase of entry `(i, j)` (zero-based): a linear ramp over
/// the row-major entry index.
pub fn ricean_los_phase(i: usize, j: usize, rows: usize, cols: usize) -> f64 {
    2.0 * PI * (i * cols + j) as f64 / (rows * cols) as f64
}

/// Ricean matrix: `sqrt(P k/(1+k)) e^{j theta_ij} + sqrt(P/(1+k)) CN(0, 1)`.
pub fn draw_ricean_si_channel<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    pathloss_db: f64,
    k_factor_db: f64,
    rng: &mut R,
) -> CMat {
    let power = db_to_linear(-pathloss_db);
    let (los_w, nlos_w) = if k_factor_db <= RAYLEIGH_K_FACTOR_DB {
        (0.0, power)
    } else {
        let k = db_to_linear(k_factor_db);
        (power * k / (1.0 + k), power / (1.0 + k))
    };
    let los_amp = los_w.sqrt();
    let mut h = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let los = Complex64::from_polar(los_amp, ricean_los_phase(i, j, rows, cols));
            h[(i, j)] = los + complex_gaussian(rng, nlos_w);
        }
    }
    h
}

/// Draw all three channels. The SI channel is drawn first so that it is
/// shared between configurations that only differ in `M_q` or `N_m`.
pub fn draw_channel_set<R: Rng + ?Sized>(
    config: &SystemConfig,
    params: &ChannelParams,
    rng: &mut R,
) -> ChannelSet {
    let h_kk = draw_ricean_si_channel(
        config.m_k,
        config.n_k,
        params.pathloss_si_db,
        params.ricean_k_db,
        rng,
    );
    let h_qk = draw_rayleigh_channel(config.m_q, config.n_k, params.pathloss_dl_db, rng);
    let h_km = draw_rayleigh_channel(config.m_k, config.n_m, params.pathloss_ul_db, rng);
    ChannelSet { h_qk, h_km, h_kk }
}
