use num_complex::Complex64;

use super::rates::{dl_rate, residual_si_row_powers};
use super::waterfill::waterfilling;
use crate::config::PrecodingStrategy;
use crate::error::{Error, Result};
use crate::linalg::{eye, full_svd, CMat};

/// How `G_k` is built for the effective channel `H_qk F_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubPrecoderMode {
    /// Equal power over `min(M_q, alpha)` identity columns.
    OpenLoop,
    /// Right singular vectors of the effective channel with water-filling.
    ClosedLoop,
    /// Conjugate beamforming toward a single-antenna receiver.
    Mrt,
    /// `G = sqrt(P_k)` for a single effective antenna.
    Scalar,
}

/// Mode used for `alpha` effective antennas and `m_q` receive antennas.
pub fn resolve_mode(alpha: usize, m_q: usize, strategy: PrecodingStrategy) -> SubPrecoderMode {
    if alpha == 1 {
        SubPrecoderMode::Scalar
    } else if m_q == 1 {
        SubPrecoderMode::Mrt
    } else {
        match strategy {
            PrecodingStrategy::OpenLoop => SubPrecoderMode::OpenLoop,
            PrecodingStrategy::ClosedLoop => SubPrecoderMode::ClosedLoop,
        }
    }
}

fn open_loop(alpha: usize, streams: usize, p_k: f64) -> CMat {
    eye(alpha, streams).scale((p_k / streams as f64).sqrt())
}

/// Sub-precoder `G_k` (`alpha x d_k`) for the effective channel `h_eff`
/// (`M_q x alpha`). `noise` is the receiver noise power used by water-filling;
/// `max_streams` caps `d_k` below `min(M_q, alpha)`.
pub fn sub_precoder(
    h_eff: &CMat,
    p_k: f64,
    mode: SubPrecoderMode,
    noise: f64,
    max_streams: Option<usize>,
) -> Result<CMat> {
    let (m_q, alpha) = h_eff.shape();
    if alpha == 0 || m_q == 0 {
        return Err(Error::Dimension(format!("effective channel is {m_q}x{alpha}")));
    }
    let streams = m_q.min(alpha).min(max_streams.unwrap_or(usize::MAX)).max(1);
    match mode {
        SubPrecoderMode::Scalar => {
            if alpha != 1 {
                return Err(Error::Dimension(format!("scalar precoder with alpha = {alpha}")));
            }
            Ok(CMat::from_element(1, 1, Complex64::new(p_k.sqrt(), 0.0)))
        }
        SubPrecoderMode::Mrt => {
            if m_q != 1 {
                return Err(Error::Dimension(format!("MRT toward {m_q} receive antennas")));
            }
            let norm = h_eff.norm();
            if norm == 0.0 {
                return Ok(open_loop(alpha, 1, p_k));
            }
            Ok(h_eff.adjoint().scale(p_k.sqrt() / norm))
        }
        SubPrecoderMode::OpenLoop => Ok(open_loop(alpha, streams, p_k)),
        SubPrecoderMode::ClosedLoop => {
            let svd = full_svd(h_eff)?;
            let gains: Vec<f64> = svd.singular_values[..streams].to_vec();
            if gains.iter().all(|&g| g < 1e-15) {
                return Ok(open_loop(alpha, streams, p_k));
            }
            let powers = waterfilling(&gains, p_k, noise)?;
            let mut g = CMat::zeros(alpha, streams);
            for (i, p) in powers.iter().enumerate() {
                g.set_column(i, &(svd.v.column(i) * Complex64::new(p.sqrt(), 0.0)));
            }
            Ok(g)
        }
    }
}

/// One feasible TX precoder `V = F G` found by the search.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderCandidate {
    /// Canceller realization this candidate was screened against.
    pub realization_index: usize,
    /// 1-based discovery order; larger means fewer effective antennas.
    pub candidate_index: usize,
    pub alpha: usize,
    pub f: CMat,
    pub g: CMat,
    pub v: CMat,
    pub dl_rate: f64,
}

/// Parameters of the TX precoder search for a given analog canceller.
#[derive(Debug, Clone)]
pub struct PrecoderSearch {
    pub p_k: f64,
    /// Residual SI threshold per RX chain, watts.
    pub lambda_a: f64,
    pub alpha_max: usize,
    pub strategy: PrecodingStrategy,
    /// Downlink receiver noise, used for water-filling and the DL rate.
    pub sigma_q_sq: f64,
    /// Cap on `d_k`; `None` means `min(M_q, alpha)`.
    pub max_streams: Option<usize>,
    /// Number of RX chains that must meet `lambda_a`; `None` means all.
    pub rows_required: Option<usize>,
}

impl PrecoderSearch {
    fn meets_threshold(&self, row_powers: &[f64]) -> bool {
        let required = self.rows_required.unwrap_or(row_powers.len());
        row_powers.iter().filter(|&&p| p <= self.lambda_a).count() >= required
    }

    /// Screen `alpha = alpha_max, ..., 1`, keeping every precoder whose
    /// residual SI `c_eff F G` meets the threshold.
    pub fn run(
        &self,
        c_eff: &CMat,
        h_qk: &CMat,
        realization_index: usize,
    ) -> Result<Vec<PrecoderCandidate>> {
        let n_k = c_eff.ncols();
        if h_qk.ncols() != n_k {
            return Err(Error::Dimension("H_qk and SI channel disagree on N_k".into()));
        }
        if self.alpha_max == 0 || self.alpha_max > n_k {
            return Err(Error::param(
                "alpha_max",
                format!("{} outside [1, {n_k}]", self.alpha_max),
            ));
        }
        let d = full_svd(c_eff)?.v;
        let m_q = h_qk.nrows();
        let mut out = Vec::new();
        for alpha in (1..=self.alpha_max).rev() {
            let f = d.columns(n_k - alpha, alpha).into_owned();
            let mode = match self.max_streams {
                // a single stream on the dominant direction
                Some(1) if alpha > 1 && m_q > 1 => SubPrecoderMode::ClosedLoop,
                _ => resolve_mode(alpha, m_q, self.strategy),
            };
            let g = sub_precoder(&(h_qk * &f), self.p_k, mode, self.sigma_q_sq, self.max_streams)?;
            let v = &f * &g;
            if !self.meets_threshold(&residual_si_row_powers(c_eff, &v)) {
                continue;
            }
            let rate = dl_rate(&v, h_qk, self.sigma_q_sq)?;
            out.push(PrecoderCandidate {
                realization_index,
                candidate_index: out.len() + 1,
                alpha,
                f,
                g,
                v,
                dl_rate: rate,
            });
        }
        Ok(out)
    }
}

/// Convenience wrapper: every row must meet `lambda_a`, no stream cap.
#[allow(clippy::too_many_arguments)]
pub fn algorithm1_precoders(
    c_eff: &CMat,
    h_qk: &CMat,
    p_k: f64,
    lambda_a: f64,
    alpha_max: usize,
    strategy: PrecodingStrategy,
    sigma_q_sq: f64,
) -> Result<Vec<PrecoderCandidate>> {
    PrecoderSearch {
        p_k,
        lambda_a,
        alpha_max,
        strategy,
        sigma_q_sq,
        max_streams: None,
        rows_required: None,
    }
    .run(c_eff, h_qk, 0)
}
