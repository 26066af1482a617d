//! Joint selection of analog canceller, TX precoder and RX combiner, plus
//! the comparison designs and the half-duplex fallback.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    dl_rate, optimal_combiner, residual_si_row_powers, resolve_mode, sub_precoder, ul_rate,
    Combiner, PrecoderCandidate, PrecoderSearch,
};
use crate::canceller::{
    enumerate_realizations, realize_aux_canceller_largest_rows, realize_tap_canceller_rowwise,
    AuxTxCancellerRealization, CancellerRealization, ImpairmentParams, TapCancellerRealization,
};
use crate::channels::{ChannelParams, ChannelSet};
use crate::config::{Architecture, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{eye, full_svd, CMat};

/// Everything a single solve needs besides the channels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub system: SystemConfig,
    pub channel: ChannelParams,
    pub impairments: ImpairmentParams,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.channel.validate()?;
        self.impairments.validate()
    }

    fn search(&self, alpha_max: usize, max_streams: Option<usize>, rows: Option<usize>) -> PrecoderSearch {
        PrecoderSearch {
            p_k: self.system.p_k_w(),
            lambda_a: self.system.lambda_a_w(),
            alpha_max,
            strategy: self.system.precoding,
            sigma_q_sq: self.channel.sigma_q_sq(),
            max_streams,
            rows_required: rows,
        }
    }
}

/// Which design produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignId {
    ProposedTaps,
    ProposedAux,
    SotaFullTaps,
    SotaFullAux,
    Softnull,
    HalfDuplexDl,
    HalfDuplexUl,
}

/// A design to evaluate in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DesignSpec {
    /// Reduced-complexity canceller with `n` elements, searched jointly.
    Proposed { architecture: Architecture, n: usize },
    /// Fully-connected canceller followed by null-space projection.
    SotaFull { architecture: Architecture },
    /// No analog canceller, spatial suppression only.
    Softnull,
}

impl DesignSpec {
    /// Name used in result files, with the element count spelled out.
    pub fn label(&self, m_k: usize, n_k: usize) -> String {
        match *self {
            DesignSpec::SotaFull { architecture } => {
                format!("sota_{}{}", architecture.as_str(), architecture.full_budget(m_k, n_k))
            }
            other => other.to_string(),
        }
    }

    pub fn architecture(&self) -> Option<Architecture> {
        match *self {
            DesignSpec::Proposed { architecture, .. } | DesignSpec::SotaFull { architecture } => {
                Some(architecture)
            }
            DesignSpec::Softnull => None,
        }
    }
}

impl fmt::Display for DesignSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignSpec::Proposed { architecture, n } => write!(f, "{}{n}", architecture.as_str()),
            DesignSpec::SotaFull { architecture } => write!(f, "sota_{}", architecture.as_str()),
            DesignSpec::Softnull => f.write_str("softnull"),
        }
    }
}

impl FromStr for DesignSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::param(
                "designs",
                format!("unknown design `{s}` (expected tapsN, auxN, sota_taps, sota_aux or softnull)"),
            )
        };
        match s {
            "softnull" => return Ok(DesignSpec::Softnull),
            "sota_taps" => return Ok(DesignSpec::SotaFull { architecture: Architecture::Taps }),
            "sota_aux" => return Ok(DesignSpec::SotaFull { architecture: Architecture::Aux }),
            _ => {}
        }
        let (architecture, digits) = if let Some(d) = s.strip_prefix("taps") {
            (Architecture::Taps, d)
        } else if let Some(d) = s.strip_prefix("aux") {
            (Architecture::Aux, d)
        } else {
            return Err(bad());
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n = digits.parse().map_err(|_| bad())?;
        Ok(DesignSpec::Proposed { architecture, n })
    }
}

impl TryFrom<String> for DesignSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DesignSpec> for String {
    fn from(d: DesignSpec) -> String {
        d.to_string()
    }
}

/// Chosen canceller, precoder and combiner with their rates.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub design_id: DesignId,
    pub canceller: Option<CancellerRealization>,
    pub precoder: Option<PrecoderCandidate>,
    pub combiner: Option<Combiner>,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub fd_rate: f64,
    /// Full-duplex operation met the residual SI threshold.
    pub feasible: bool,
    /// Effective TX antennas; 0 in half-duplex fallback.
    pub alpha_used: usize,
    /// RX chains used for the uplink.
    pub active_rows: Vec<usize>,
}

/// One (realization, precoder) pair together with its best combiner.
#[derive(Debug, Clone)]
pub struct EvaluatedCandidate {
    pub realization_index: usize,
    pub precoder: PrecoderCandidate,
    pub combiner: Combiner,
    pub ul_rate: f64,
    pub active_rows: Vec<usize>,
}

impl EvaluatedCandidate {
    pub fn fd_rate(&self) -> f64 {
        self.precoder.dl_rate + self.ul_rate
    }
}

/// Combiner computed on a subset of RX chains, embedded in `d x M_k` with
/// zero columns for the excluded chains.
pub fn combiner_on_rows(
    c_eff: &CMat,
    v: &CMat,
    h_km: &CMat,
    sigma_k_sq: f64,
    d_m: usize,
    rows: &[usize],
) -> Result<Combiner> {
    let m_k = c_eff.nrows();
    let d = d_m.min(rows.len());
    if d == 0 {
        return Err(Error::param("active rows", "no RX chain available for the uplink"));
    }
    let sub_c = crate::linalg::select_rows(c_eff, rows);
    let sub_h = crate::linalg::select_rows(h_km, rows);
    let sub = match optimal_combiner(&sub_c, v, &sub_h, sigma_k_sq, d) {
        Ok(comb) => comb.u,
        // rank-deficient uplink channel: any unit-row combiner is as good
        Err(Error::Numerical(_)) => eye(d, rows.len()),
        Err(e) => return Err(e),
    };
    let mut u = CMat::zeros(d, m_k);
    for (k, &r) in rows.iter().enumerate() {
        u.set_column(r, &sub.column(k));
    }
    Ok(Combiner { u })
}

fn evaluate(
    sc: &Scenario,
    chans: &ChannelSet,
    c_eff: &CMat,
    precoder: PrecoderCandidate,
    rows_required: Option<usize>,
) -> Result<EvaluatedCandidate> {
    let sigma_k_sq = sc.channel.sigma_k_sq();
    let active_rows: Vec<usize> = match rows_required {
        None => (0..c_eff.nrows()).collect(),
        Some(_) => residual_si_row_powers(c_eff, &precoder.v)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p <= sc.system.lambda_a_w())
            .map(|(i, _)| i)
            .collect(),
    };
    let combiner = combiner_on_rows(c_eff, &precoder.v, &chans.h_km, sigma_k_sq, sc.system.d_m, &active_rows)?;
    let ul = ul_rate(&combiner.u, c_eff, &precoder.v, &chans.h_km, sc.system.p_m_w(), sigma_k_sq)?;
    Ok(EvaluatedCandidate {
        realization_index: precoder.realization_index,
        precoder,
        combiner,
        ul_rate: ul,
        active_rows,
    })
}

/// Canceller realizations searched for the configured budget, before
/// impairment: the single heuristic placement, or every placement when
/// enumeration is enabled.
pub fn candidate_realizations(h_kk: &CMat, system: &SystemConfig) -> Result<Vec<CancellerRealization>> {
    let n = system.n_elements;
    if system.enumerate_realizations {
        return enumerate_realizations(h_kk, system.architecture, n, system.realization_cap);
    }
    let real = match (system.architecture, n) {
        (Architecture::Taps, 0) => CancellerRealization::Taps(TapCancellerRealization::at_positions(h_kk, &[])?),
        (Architecture::Aux, 0) => CancellerRealization::Aux(AuxTxCancellerRealization::at_rows(h_kk, &[])?),
        (Architecture::Taps, n) => CancellerRealization::Taps(realize_tap_canceller_rowwise(h_kk, n)?),
        (Architecture::Aux, n) => CancellerRealization::Aux(realize_aux_canceller_largest_rows(h_kk, n)?),
    };
    Ok(vec![real])
}

/// Impaired realizations and every feasible candidate pair, evaluated.
pub fn op3_candidates<R: Rng + ?Sized>(
    chans: &ChannelSet,
    sc: &Scenario,
    rows_required: Option<usize>,
    rng: &mut R,
) -> Result<(Vec<CancellerRealization>, Vec<EvaluatedCandidate>)> {
    let search = sc.search(sc.system.effective_alpha_max(), None, rows_required);
    let mut realizations = Vec::new();
    let mut evaluated = Vec::new();
    for (l, real) in candidate_realizations(&chans.h_kk, &sc.system)?.into_iter().enumerate() {
        let real = real.impair(&sc.impairments, rng);
        let c_eff = &chans.h_kk + real.c_impaired();
        for cand in search.run(&c_eff, &chans.h_qk, l)? {
            evaluated.push(evaluate(sc, chans, &c_eff, cand, rows_required)?);
        }
        realizations.push(real);
    }
    Ok((realizations, evaluated))
}

/// Highest FD rate; ties go to the smaller candidate index, then the
/// smaller realization index.
fn pick_best(cands: Vec<EvaluatedCandidate>) -> Option<EvaluatedCandidate> {
    cands.into_iter().reduce(|best, c| {
        let key = |e: &EvaluatedCandidate| (e.precoder.candidate_index, e.realization_index);
        if c.fd_rate() > best.fd_rate() || (c.fd_rate() == best.fd_rate() && key(&c) < key(&best)) {
            c
        } else {
            best
        }
    })
}

fn proposed_id(arch: Architecture) -> DesignId {
    match arch {
        Architecture::Taps => DesignId::ProposedTaps,
        Architecture::Aux => DesignId::ProposedAux,
    }
}

fn solution_from(
    design_id: DesignId,
    mut realizations: Vec<CancellerRealization>,
    best: EvaluatedCandidate,
) -> FdSolution {
    let canceller = if best.realization_index < realizations.len() {
        Some(realizations.swap_remove(best.realization_index))
    } else {
        None
    };
    FdSolution {
        design_id,
        canceller,
        alpha_used: best.precoder.alpha,
        dl_rate: best.precoder.dl_rate,
        ul_rate: best.ul_rate,
        fd_rate: best.precoder.dl_rate + best.ul_rate,
        precoder: Some(best.precoder),
        combiner: Some(best.combiner),
        feasible: true,
        active_rows: best.active_rows,
    }
}

/// Proposed joint design: search every canceller realization and feasible
/// precoder, pair each with its optimal combiner, keep the best FD rate.
/// Falls back to half duplex when nothing meets the threshold.
pub fn solve_op3<R: Rng + ?Sized>(chans: &ChannelSet, sc: &Scenario, rng: &mut R) -> Result<FdSolution> {
    let (reals, cands) = op3_candidates(chans, sc, None, rng)?;
    match pick_best(cands) {
        Some(best) => Ok(solution_from(proposed_id(sc.system.architecture), reals, best)),
        None => fallback_half_duplex(chans, sc),
    }
}

/// As [`solve_op3`], but only `m_k_prime` RX chains need to meet the
/// threshold; saturated chains are dropped from the uplink.
pub fn relax_rx_subset<R: Rng + ?Sized>(
    chans: &ChannelSet,
    sc: &Scenario,
    m_k_prime: usize,
    rng: &mut R,
) -> Result<FdSolution> {
    if m_k_prime == 0 || m_k_prime > sc.system.m_k {
        return Err(Error::param(
            "m_k_prime",
            format!("{m_k_prime} outside [1, {}]", sc.system.m_k),
        ));
    }
    let (reals, cands) = op3_candidates(chans, sc, Some(m_k_prime), rng)?;
    match pick_best(cands) {
        Some(best) => Ok(solution_from(proposed_id(sc.system.architecture), reals, best)),
        None => fallback_half_duplex(chans, sc),
    }
}

/// Half-duplex operation: the better of downlink-only and uplink-only
/// (ties go to the downlink).
pub fn fallback_half_duplex(chans: &ChannelSet, sc: &Scenario) -> Result<FdSolution> {
    let (m_q, n_k) = chans.h_qk.shape();
    let m_k = chans.h_km.nrows();
    let mode = resolve_mode(n_k, m_q, sc.system.precoding);
    let v = sub_precoder(&chans.h_qk, sc.system.p_k_w(), mode, sc.channel.sigma_q_sq(), None)?;
    let dl = dl_rate(&v, &chans.h_qk, sc.channel.sigma_q_sq())?;

    let silent = CMat::zeros(n_k, 1);
    let rows: Vec<usize> = (0..m_k).collect();
    let sigma_k_sq = sc.channel.sigma_k_sq();
    let combiner = combiner_on_rows(&chans.h_kk, &silent, &chans.h_km, sigma_k_sq, sc.system.d_m, &rows)?;
    let ul = ul_rate(&combiner.u, &chans.h_kk, &silent, &chans.h_km, sc.system.p_m_w(), sigma_k_sq)?;

    let base = FdSolution {
        design_id: DesignId::HalfDuplexDl,
        canceller: None,
        precoder: None,
        combiner: None,
        dl_rate: 0.0,
        ul_rate: 0.0,
        fd_rate: 0.0,
        feasible: false,
        alpha_used: 0,
        active_rows: Vec::new(),
    };
    Ok(if dl >= ul {
        FdSolution {
            dl_rate: dl,
            fd_rate: dl,
            ..base
        }
    } else {
        FdSolution {
            design_id: DesignId::HalfDuplexUl,
            combiner: Some(combiner),
            ul_rate: ul,
            fd_rate: ul,
            active_rows: rows,
            ..base
        }
    })
}

/// Fully-connected canceller (one tap per TX-RX pair, or one AUX chain per
/// RX antenna) followed by projection onto the `min(M_q, N_k)` weakest
/// right singular vectors of the impaired residual channel.
pub fn solve_sota_full_canceller<R: Rng + ?Sized>(
    chans: &ChannelSet,
    sc: &Scenario,
    architecture: Architecture,
    rng: &mut R,
) -> Result<FdSolution> {
    let (m_k, n_k) = chans.h_kk.shape();
    let real = match architecture {
        Architecture::Taps => CancellerRealization::Taps(realize_tap_canceller_rowwise(&chans.h_kk, m_k * n_k)?),
        Architecture::Aux => CancellerRealization::Aux(realize_aux_canceller_largest_rows(&chans.h_kk, m_k)?),
    };
    let real = real.impair(&sc.impairments, rng);
    let c_eff = &chans.h_kk + real.c_impaired();
    let m_q = chans.h_qk.nrows();
    let alpha = m_q.min(n_k);
    let f = full_svd(&c_eff)?.v.columns(n_k - alpha, alpha).into_owned();
    let mode = resolve_mode(alpha, m_q, sc.system.precoding);
    let g = sub_precoder(&(&chans.h_qk * &f), sc.system.p_k_w(), mode, sc.channel.sigma_q_sq(), None)?;
    let v = &f * &g;
    let lambda = sc.system.lambda_a_w();
    if residual_si_row_powers(&c_eff, &v).iter().any(|&p| p > lambda) {
        return fallback_half_duplex(chans, sc);
    }
    let dl = dl_rate(&v, &chans.h_qk, sc.channel.sigma_q_sq())?;
    let cand = PrecoderCandidate {
        realization_index: 0,
        candidate_index: 1,
        alpha,
        f,
        g,
        v,
        dl_rate: dl,
    };
    let best = evaluate(sc, chans, &c_eff, cand, None)?;
    let id = match architecture {
        Architecture::Taps => DesignId::SotaFullTaps,
        Architecture::Aux => DesignId::SotaFullAux,
    };
    Ok(solution_from(id, vec![real], best))
}

/// Spatial suppression only: no analog canceller, one DL stream, the
/// largest number of effective antennas that meets the threshold.
pub fn solve_softnull(chans: &ChannelSet, sc: &Scenario) -> Result<FdSolution> {
    let search = sc.search(sc.system.effective_alpha_max(), Some(1), None);
    let cands = search.run(&chans.h_kk, &chans.h_qk, 0)?;
    match cands.into_iter().next() {
        Some(first) => {
            let best = evaluate(sc, chans, &chans.h_kk, first, None)?;
            let mut sol = solution_from(DesignId::Softnull, Vec::new(), best);
            sol.canceller = None;
            Ok(sol)
        }
        None => fallback_half_duplex(chans, sc),
    }
}

/// Solve one design on one channel draw. `sc.system` supplies antenna
/// counts and powers; the design overrides architecture and budget.
pub fn solve_design<R: Rng + ?Sized>(
    design: &DesignSpec,
    chans: &ChannelSet,
    sc: &Scenario,
    rng: &mut R,
) -> Result<FdSolution> {
    match *design {
        DesignSpec::Proposed { architecture, n } => {
            let mut local = sc.clone();
            local.system.architecture = architecture;
            local.system.n_elements = n;
            local.system.validate()?;
            solve_op3(chans, &local, rng)
        }
        DesignSpec::SotaFull { architecture } => solve_sota_full_canceller(chans, sc, architecture, rng),
        DesignSpec::Softnull => solve_softnull(chans, sc),
    }
}
