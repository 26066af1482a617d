//! Node configuration shared by the solver and the sweep harness.

use serde::{Deserialize, Serialize};

use crate::channels::dbm_to_watt;
use crate::error::{Error, Result};

/// Analog canceller hardware family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Fixed-delay / phase-shifter / attenuator taps routed by MUX and DEMUX.
    Taps,
    /// Auxiliary TX RF chains fed from the digital domain, routed by DEMUX.
    Aux,
}

impl Architecture {
    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Taps => "taps",
            Architecture::Aux => "aux",
        }
    }

    /// Number of elements a conventional, fully-connected canceller needs.
    pub fn full_budget(self, m_k: usize, n_k: usize) -> usize {
        match self {
            Architecture::Taps => m_k * n_k,
            Architecture::Aux => m_k,
        }
    }
}

/// How the downlink sub-precoder is chosen when the effective channel is MIMO.
///
/// MISO effective channels always use maximal ratio transmission and a single
/// effective antenna always uses the scalar `sqrt(P_k)` precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecodingStrategy {
    OpenLoop,
    ClosedLoop,
}

/// Antenna counts, stream counts, powers and canceller budget of the FD node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// RX antennas at the full-duplex node.
    pub m_k: usize,
    /// TX antennas at the full-duplex node.
    pub n_k: usize,
    /// RX antennas at the downlink node.
    pub m_q: usize,
    /// TX antennas at the uplink node.
    pub n_m: usize,
    /// Uplink streams.
    pub d_m: usize,
    pub p_k_dbm: f64,
    pub p_m_dbm: f64,
    /// Per-RX-chain residual SI threshold after analog cancellation.
    pub lambda_a_dbm: f64,
    pub architecture: Architecture,
    /// Canceller budget: number of taps or AUX TX chains.
    pub n_elements: usize,
    pub precoding: PrecodingStrategy,
    /// Overrides the default `alpha_max` rule when set.
    pub alpha_max: Option<usize>,
    pub enumerate_realizations: bool,
    pub realization_cap: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m_k: 4,
            n_k: 4,
            m_q: 1,
            n_m: 1,
            d_m: 1,
            p_k_dbm: 30.0,
            p_m_dbm: 10.0,
            lambda_a_dbm: -60.0,
            architecture: Architecture::Taps,
            n_elements: 8,
            precoding: PrecodingStrategy::OpenLoop,
            alpha_max: None,
            enumerate_realizations: false,
            realization_cap: 10_000,
        }
    }
}

impl SystemConfig {
    pub fn p_k_w(&self) -> f64 {
        dbm_to_watt(self.p_k_dbm)
    }

    pub fn p_m_w(&self) -> f64 {
        dbm_to_watt(self.p_m_dbm)
    }

    pub fn lambda_a_w(&self) -> f64 {
        dbm_to_watt(self.lambda_a_dbm)
    }

    /// Largest number of effective TX antennas tried by the precoder search.
    ///
    /// Defaults to `min(M_q, N_k)` at 30 dBm and above, `N_k` otherwise.
    pub fn effective_alpha_max(&self) -> usize {
        match self.alpha_max {
            Some(a) => a,
            None if self.p_k_dbm >= 30.0 => self.m_q.min(self.n_k),
            None => self.n_k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m_k", self.m_k),
            ("n_k", self.n_k),
            ("m_q", self.m_q),
            ("n_m", self.n_m),
            ("d_m", self.d_m),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        let dof = self.m_k.min(self.n_m);
        if self.d_m > dof {
            return Err(Error::param(
                "d_m",
                format!("{} exceeds min(m_k, n_m) = {dof}", self.d_m),
            ));
        }
        let budget = self.architecture.full_budget(self.m_k, self.n_k);
        if self.n_elements > budget {
            return Err(Error::param(
                "n_elements",
                format!(
                    "{} {} exceeds the {} available positions",
                    self.n_elements,
                    self.architecture.as_str(),
                    budget
                ),
            ));
        }
        if let Some(a) = self.alpha_max {
            if a == 0 || a > self.n_k {
                return Err(Error::param(
                    "alpha_max",
                    format!("{a} is outside [1, n_k = {}]", self.n_k),
                ));
            }
        }
        for (name, v) in [
            ("p_k_dbm", self.p_k_dbm),
            ("p_m_dbm", self.p_m_dbm),
            ("lambda_a_dbm", self.lambda_a_dbm),
        ] {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::param(name, "must be a number above -inf"));
            }
        }
        if self.realization_cap == 0 {
            return Err(Error::param("realization_cap", "must be at least 1"));
        }
        Ok(())
    }
}
