//! Analog canceller construction for the multi-tap and multi-AUX-TX
//! architectures, plus their hardware impairment models.
//!
//! A canceller is described by its routing (which TX chain feeds which tap,
//! which RX chain each tap or AUX chain is added to) and its complex values.
//! The routing matrices `L1`, `L3` and `L5` are derived from the index lists,
//! so their binary and unit-sum constraints hold by construction.
//!
//! Canceller values are the negated SI channel entries they target: the
//! effective SI channel is `H_kk + C_k`.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::Architecture;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Hardware error magnitudes of the analog canceller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpairmentParams {
    /// Half-width of the uniform tap phase error, radians.
    pub tap_phase_err_max_rad: f64,
    /// Half-width of the uniform tap magnitude error, dB.
    pub tap_mag_err_max_db: f64,
    /// Standard deviation of each oscillator's phase noise, radians.
    pub aux_phase_jitter_std_rad: f64,
}

impl Default for ImpairmentParams {
    fn default() -> Self {
        ImpairmentParams {
            tap_phase_err_max_rad: 0.065_f64.to_radians(),
            tap_mag_err_max_db: 0.01,
            aux_phase_jitter_std_rad: 0.717_f64.to_radians(),
        }
    }
}

impl ImpairmentParams {
    /// No hardware error at all.
    pub fn ideal() -> Self {
        ImpairmentParams {
            tap_phase_err_max_rad: 0.0,
            tap_mag_err_max_db: 0.0,
            aux_phase_jitter_std_rad: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tap_phase_err_max_rad", self.tap_phase_err_max_rad),
            ("tap_mag_err_max_db", self.tap_mag_err_max_db),
            ("aux_phase_jitter_std_rad", self.aux_phase_jitter_std_rad),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("{v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Closed-form `E|c_hat - c|^2 / |c|^2` of one tap, to second order.
    pub fn tap_residual_ratio(&self) -> f64 {
        let a = self.tap_phase_err_max_rad;
        let b = self.tap_mag_err_max_db * std::f64::consts::LN_10 / 20.0;
        a * a / 3.0 + b * b / 3.0
    }

    /// Closed-form `E|Phi_ij - 1|^2 = 2 - 2 exp(-sigma^2)`.
    pub fn aux_residual_ratio(&self) -> f64 {
        let s2 = self.aux_phase_jitter_std_rad.powi(2);
        2.0 - 2.0 * (-s2).exp()
    }
}

/// One analog tap: routed from TX chain `tx` to RX chain `rx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub tx: usize,
    pub rx: usize,
    /// Ideal attenuation and phase setting.
    pub value: Complex64,
}

/// Multi-tap canceller `C_k = L3 L2 L1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TapCancellerRealization {
    m_k: usize,
    n_k: usize,
    pub taps: Vec<Tap>,
    /// Tap values after hardware impairment, same order as `taps`.
    pub impaired_values: Vec<Complex64>,
    pub c_ideal: CMat,
    pub c_impaired: CMat,
}

impl TapCancellerRealization {
    /// Canceller with no taps (`C_k = 0`).
    pub fn empty(m_k: usize, n_k: usize) -> Self {
        TapCancellerRealization {
            m_k,
            n_k,
            taps: Vec::new(),
            impaired_values: Vec::new(),
            c_ideal: CMat::zeros(m_k, n_k),
            c_impaired: CMat::zeros(m_k, n_k),
        }
    }

    /// Place one tap on every `(rx, tx)` position, set to `-H_kk` there.
    pub fn at_positions(h_kk: &CMat, positions: &[(usize, usize)]) -> Result<Self> {
        let (m_k, n_k) = h_kk.shape();
        let mut taps = Vec::with_capacity(positions.len());
        for &(rx, tx) in positions {
            if rx >= m_k || tx >= n_k {
                return Err(Error::param(
                    "tap position",
                    format!("({rx}, {tx}) outside {m_k}x{n_k}"),
                ));
            }
            if taps.iter().any(|t: &Tap| t.rx == rx && t.tx == tx) {
                return Err(Error::param(
                    "tap position",
                    format!("({rx}, {tx}) used twice"),
                ));
            }
            taps.push(Tap {
                tx,
                rx,
                value: -h_kk[(rx, tx)],
            });
        }
        let values: Vec<Complex64> = taps.iter().map(|t| t.value).collect();
        let c = place_taps(m_k, n_k, &taps, &values);
        Ok(TapCancellerRealization {
            m_k,
            n_k,
            taps,
            impaired_values: values,
            c_ideal: c.clone(),
            c_impaired: c,
        })
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    /// Input MUX routing, `N x N_k`.
    pub fn l1(&self) -> DMatrix<f64> {
        let mut l1 = DMatrix::zeros(self.taps.len(), self.n_k);
        for (n, t) in self.taps.iter().enumerate() {
            l1[(n, t.tx)] = 1.0;
        }
        l1
    }

    /// Diagonal tap matrix, `N x N`, ideal values.
    pub fn l2(&self) -> CMat {
        let n = self.taps.len();
        let mut l2 = CMat::zeros(n, n);
        for (i, t) in self.taps.iter().enumerate() {
            l2[(i, i)] = t.value;
        }
        l2
    }

    /// Output DEMUX routing, `M_k x N`.
    pub fn l3(&self) -> DMatrix<f64> {
        let mut l3 = DMatrix::zeros(self.m_k, self.taps.len());
        for (n, t) in self.taps.iter().enumerate() {
            l3[(t.rx, n)] = 1.0;
        }
        l3
    }
}

fn place_taps(m_k: usize, n_k: usize, taps: &[Tap], values: &[Complex64]) -> CMat {
    let mut c = CMat::zeros(m_k, n_k);
    for (t, v) in taps.iter().zip(values) {
        c[(t.rx, t.tx)] += v;
    }
    c
}

/// Multi-AUX-TX canceller `C_k = L5 L4`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxTxCancellerRealization {
    m_k: usize,
    /// RX chain each AUX chain is routed to.
    pub rx_of_aux: Vec<usize>,
    /// Digital transform feeding the AUX chains, `N x N_k`.
    pub l4: CMat,
    /// `Phi_k (.) L4` after phase noise; equals `l4` until impaired.
    pub l4_impaired: CMat,
    pub c_ideal: CMat,
    pub c_impaired: CMat,
}

impl AuxTxCancellerRealization {
    /// Route one AUX chain to each listed RX chain, cancelling that row.
    pub fn at_rows(h_kk: &CMat, rows: &[usize]) -> Result<Self> {
        let (m_k, n_k) = h_kk.shape();
        for (i, &r) in rows.iter().enumerate() {
            if r >= m_k {
                return Err(Error::param("aux row", format!("{r} outside 0..{m_k}")));
            }
            if rows[..i].contains(&r) {
                return Err(Error::param("aux row", format!("{r} used twice")));
            }
        }
        let mut l4 = CMat::zeros(rows.len(), n_k);
        for (i, &r) in rows.iter().enumerate() {
            l4.set_row(i, &(-h_kk.row(r)));
        }
        let c = route_rows(m_k, rows, &l4);
        Ok(AuxTxCancellerRealization {
            m_k,
            rx_of_aux: rows.to_vec(),
            l4_impaired: l4.clone(),
            l4,
            c_ideal: c.clone(),
            c_impaired: c,
        })
    }

    pub fn n_aux(&self) -> usize {
        self.rx_of_aux.len()
    }

    /// DEMUX routing, `M_k x N`; `[L5]_{j,i} = 1` connects AUX `i` to RX `j`.
    pub fn l5(&self) -> DMatrix<f64> {
        let mut l5 = DMatrix::zeros(self.m_k, self.rx_of_aux.len());
        for (i, &j) in self.rx_of_aux.iter().enumerate() {
            l5[(j, i)] = 1.0;
        }
        l5
    }
}

fn route_rows(m_k: usize, rows: &[usize], l4: &CMat) -> CMat {
    let mut c = CMat::zeros(m_k, l4.ncols());
    for (i, &r) in rows.iter().enumerate() {
        let sum = c.row(r) + l4.row(i);
        c.set_row(r, &sum);
    }
    c
}

/// Either canceller architecture.
#[derive(Debug, Clone, PartialEq)]
pub enum CancellerRealization {
    Taps(TapCancellerRealization),
    Aux(AuxTxCancellerRealization),
}

impl CancellerRealization {
    pub fn architecture(&self) -> Architecture {
        match self {
            CancellerRealization::Taps(_) => Architecture::Taps,
            CancellerRealization::Aux(_) => Architecture::Aux,
        }
    }

    pub fn c_ideal(&self) -> &CMat {
        match self {
            CancellerRealization::Taps(t) => &t.c_ideal,
            CancellerRealization::Aux(a) => &a.c_ideal,
        }
    }

    pub fn c_impaired(&self) -> &CMat {
        match self {
            CancellerRealization::Taps(t) => &t.c_impaired,
            CancellerRealization::Aux(a) => &a.c_impaired,
        }
    }

    pub fn n_elements(&self) -> usize {
        match self {
            CancellerRealization::Taps(t) => t.n_taps(),
            CancellerRealization::Aux(a) => a.n_aux(),
        }
    }

    /// Apply the architecture's impairment model.
    pub fn impair<R: Rng + ?Sized>(self, params: &ImpairmentParams, rng: &mut R) -> Self {
        match self {
            CancellerRealization::Taps(t) => {
                CancellerRealization::Taps(impair_tap_canceller(t, params, rng))
            }
            CancellerRealization::Aux(a) => {
                CancellerRealization::Aux(impair_aux_canceller(a, params, rng))
            }
        }
    }
}

fn check_budget(name: &str, n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::param(name, format!("{n} outside [1, {max}]")));
    }
    Ok(())
}

/// Rows of `h` ordered by descending Euclidean norm; ties keep index order.
pub fn rows_by_descending_norm(h: &CMat) -> Vec<usize> {
    let norms: Vec<f64> = h.row_iter().map(|r| r.norm()).collect();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    order
}

/// Row-by-row tap placement: strongest rows first, and within a row the
/// largest-magnitude entries first.
pub fn rowwise_tap_positions(h_kk: &CMat, n_taps: usize) -> Vec<(usize, usize)> {
    let mut positions = Vec::with_capacity(n_taps);
    'rows: for row in rows_by_descending_norm(h_kk) {
        let mut cols: Vec<usize> = (0..h_kk.ncols()).collect();
        cols.sort_by(|&a, &b| h_kk[(row, b)].norm().total_cmp(&h_kk[(row, a)].norm()));
        for col in cols {
            if positions.len() == n_taps {
                break 'rows;
            }
            positions.push((row, col));
        }
    }
    positions
}

/// Tap canceller from the row-by-row heuristic (ideal values only).
pub fn realize_tap_canceller_rowwise(h_kk: &CMat, n_taps: usize) -> Result<TapCancellerRealization> {
    check_budget("n_taps", n_taps, h_kk.nrows() * h_kk.ncols())?;
    TapCancellerRealization::at_positions(h_kk, &rowwise_tap_positions(h_kk, n_taps))
}

/// AUX canceller targeting the `n_aux` rows with the largest norms.
pub fn realize_aux_canceller_largest_rows(
    h_kk: &CMat,
    n_aux: usize,
) -> Result<AuxTxCancellerRealization> {
    check_budget("n_aux", n_aux, h_kk.nrows())?;
    let rows: Vec<usize> = rows_by_descending_norm(h_kk).into_iter().take(n_aux).collect();
    AuxTxCancellerRealization::at_rows(h_kk, &rows)
}

/// Binomial coefficient, erroring on 64-bit overflow.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow { n, k })?
            / (i as u128 + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow { n, k })
}

/// Number of distinct MUX/DEMUX configurations for a budget of `n` elements.
pub fn enumerate_realization_count(
    architecture: Architecture,
    m_k: usize,
    n_k: usize,
    n: usize,
) -> Result<u64> {
    if m_k == 0 || n_k == 0 {
        return Err(Error::param("m_k/n_k", "antenna counts must be positive"));
    }
    let slots = architecture.full_budget(m_k, n_k);
    if n > slots {
        return Err(Error::param(
            "n_elements",
            format!("{n} exceeds the {slots} available positions"),
        ));
    }
    binomial(slots, n)
}

/// Every placement of `n` elements, in lexicographic order of the chosen
/// slots. Fails when there are more than `cap` of them.
pub fn enumerate_realizations(
    h_kk: &CMat,
    architecture: Architecture,
    n: usize,
    cap: usize,
) -> Result<Vec<CancellerRealization>> {
    let (m_k, n_k) = h_kk.shape();
    let count = enumerate_realization_count(architecture, m_k, n_k, n)?;
    if count > cap as u64 {
        return Err(Error::param(
            "realization_cap",
            format!("{count} realizations exceed the cap of {cap}"),
        ));
    }
    let slots = architecture.full_budget(m_k, n_k);
    (0..slots)
        .combinations(n)
        .map(|combo| match architecture {
            Architecture::Taps => {
                let positions: Vec<(usize, usize)> =
                    combo.iter().map(|&s| (s / n_k, s % n_k)).collect();
                TapCancellerRealization::at_positions(h_kk, &positions)
                    .map(CancellerRealization::Taps)
            }
            Architecture::Aux => {
                AuxTxCancellerRealization::at_rows(h_kk, &combo).map(CancellerRealization::Aux)
            }
        })
        .collect()
}

/// Hardware saving relative to a fully-connected canceller, in percent.
pub fn hardware_reduction_percent(architecture: Architecture, n: usize, m_k: usize, n_k: usize) -> f64 {
    100.0 * (1.0 - n as f64 / architecture.full_budget(m_k, n_k) as f64)
}

/// Quantized tap settings: each tap gets an IID uniform phase error and an
/// IID uniform magnitude error (in dB). Zero entries stay zero.
pub fn impair_tap_canceller<R: Rng + ?Sized>(
    mut real: TapCancellerRealization,
    params: &ImpairmentParams,
    rng: &mut R,
) -> TapCancellerRealization {
    let a = params.tap_phase_err_max_rad;
    let b = params.tap_mag_err_max_db;
    real.impaired_values = real
        .taps
        .iter()
        .map(|t| {
            let phase: f64 = rng.random_range(-a..=a);
            let mag_db: f64 = rng.random_range(-b..=b);
            t.value * Complex64::from_polar(10f64.powf(mag_db / 20.0), phase)
        })
        .collect();
    real.c_impaired = place_taps(real.m_k, real.n_k, &real.taps, &real.impaired_values);
    real
}

/// `[Phi]_{i,j} = e^{j phi_aux_i} - e^{j phi_tx_j} + 1`.
pub fn aux_phase_mismatch(phi_aux: &[f64], phi_tx: &[f64]) -> CMat {
    let one = Complex64::new(1.0, 0.0);
    CMat::from_fn(phi_aux.len(), phi_tx.len(), |i, j| {
        Complex64::from_polar(1.0, phi_aux[i]) - Complex64::from_polar(1.0, phi_tx[j]) + one
    })
}

/// Independent oscillator phase noise on every AUX and TX chain:
/// `C_hat = L5 (Phi (.) L4)`.
pub fn impair_aux_canceller<R: Rng + ?Sized>(
    real: AuxTxCancellerRealization,
    params: &ImpairmentParams,
    rng: &mut R,
) -> AuxTxCancellerRealization {
    let n = real.n_aux();
    let n_k = real.l4.ncols();
    let sigma = params.aux_phase_jitter_std_rad;
    let (phi_aux, phi_tx): (Vec<f64>, Vec<f64>) = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite non-negative std");
        (
            (0..n).map(|_| normal.sample(rng)).collect(),
            (0..n_k).map(|_| normal.sample(rng)).collect(),
        )
    } else {
        (vec![0.0; n], vec![0.0; n_k])
    };
    impair_aux_with_phases(real, &phi_aux, &phi_tx)
}

/// Apply given oscillator phases instead of drawing them.
pub fn impair_aux_with_phases(
    mut real: AuxTxCancellerRealization,
    phi_aux: &[f64],
    phi_tx: &[f64],
) -> AuxTxCancellerRealization {
    let phi = aux_phase_mismatch(phi_aux, phi_tx);
    real.l4_impaired = phi.component_mul(&real.l4);
    real.c_impaired = route_rows(real.m_k, &real.rx_of_aux, &real.l4_impaired);
    real
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn to_complex(m: &DMatrix<f64>) -> CMat {
        m.map(|x| c(x, 0.0))
    }

    fn random_h(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
        crate::channels::draw_rayleigh_channel(m, n, 0.0, rng)
    }

    #[test]
    fn identity_fully_cancelled() {
        let h = CMat::identity(2, 2);
        let real = realize_tap_canceller_rowwise(&h, 4).unwrap();
        assert_eq!(real.c_ideal, -h.clone());
        assert!((&h + &real.c_ideal).norm() == 0.0);
    }

    #[test]
    fn all_taps_on_strongest_row() {
        // row norms: row 0 -> sqrt(2), row 1 -> sqrt(13)
        let h = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, -3.0)]);
        let real = realize_tap_canceller_rowwise(&h, 2).unwrap();
        let eff = &h + &real.c_ideal;
        assert_eq!(eff.row(1).norm(), 0.0);
        assert_eq!(eff.row(0), h.row(0));
        // larger-magnitude column first within the row
        assert_eq!(real.taps[0].tx, 1);
        assert_eq!(real.taps[1].tx, 0);
    }

    #[test]
    fn single_tap_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let h = random_h(&mut rng, 3, 4);
            let real = realize_tap_canceller_rowwise(&h, 1).unwrap();
            // brute force: strongest row, then strongest entry in it
            let mut best_row = 0;
            for i in 0..3 {
                if h.row(i).norm() > h.row(best_row).norm() {
                    best_row = i;
                }
            }
            let mut best_col = 0;
            for j in 0..4 {
                if h[(best_row, j)].norm() > h[(best_row, best_col)].norm() {
                    best_col = j;
                }
            }
            let nz: Vec<(usize, usize)> = (0..3)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .filter(|&(i, j)| real.c_ideal[(i, j)] != c(0.0, 0.0))
                .collect();
            assert_eq!(nz, vec![(best_row, best_col)]);
        }
    }

    #[test]
    fn tap_budget_errors() {
        let h = CMat::identity(2, 2);
        assert!(realize_tap_canceller_rowwise(&h, 0).is_err());
        assert!(realize_tap_canceller_rowwise(&h, 5).is_err());
        assert!(realize_aux_canceller_largest_rows(&h, 3).is_err());
    }

    #[test]
    fn aux_full_rows_and_single_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_h(&mut rng, 4, 3);
        let full = realize_aux_canceller_largest_rows(&h, 4).unwrap();
        assert_eq!(full.c_ideal, -h.clone());

        let one = realize_aux_canceller_largest_rows(&h, 1).unwrap();
        let best = (0..4)
            .max_by(|&a, &b| h.row(a).norm().total_cmp(&h.row(b).norm()))
            .unwrap();
        for i in 0..4 {
            let nonzero = one.c_ideal.row(i).norm() > 0.0;
            assert_eq!(nonzero, i == best);
        }
    }

    #[test]
    fn aux_tie_break_lowest_index() {
        let h = CMat::from_row_slice(3, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.5), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let real = realize_aux_canceller_largest_rows(&h, 1).unwrap();
        assert_eq!(real.rx_of_aux, vec![0]);
        let two = realize_aux_canceller_largest_rows(&h, 2).unwrap();
        assert_eq!(two.rx_of_aux, vec![0, 2]);
        // [L5]_{j,i} = 1 connects AUX i to RX j
        assert_eq!(two.l5()[(2, 1)], 1.0);
    }

    #[test]
    fn realization_counts() {
        assert_eq!(enumerate_realization_count(Architecture::Taps, 4, 4, 4).unwrap(), 1820);
        assert_eq!(enumerate_realization_count(Architecture::Aux, 4, 4, 2).unwrap(), 6);
        assert_eq!(enumerate_realization_count(Architecture::Taps, 4, 4, 0).unwrap(), 1);
        assert!(matches!(binomial(200, 100), Err(Error::Overflow { .. })));
        assert!(enumerate_realization_count(Architecture::Aux, 4, 4, 5).is_err());
    }

    #[test]
    fn enumeration_covers_all_placements() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_h(&mut rng, 2, 2);
        let reals = enumerate_realizations(&h, Architecture::Taps, 2, 100).unwrap();
        assert_eq!(reals.len(), 6);
        let aux = enumerate_realizations(&h, Architecture::Aux, 1, 100).unwrap();
        assert_eq!(aux.len(), 2);
        assert!(enumerate_realizations(&h, Architecture::Taps, 2, 5).is_err());
    }

    #[test]
    fn hardware_reduction() {
        assert_eq!(hardware_reduction_percent(Architecture::Taps, 8, 4, 4), 50.0);
        assert_eq!(hardware_reduction_percent(Architecture::Taps, 4, 4, 4), 75.0);
        assert_eq!(hardware_reduction_percent(Architecture::Aux, 3, 4, 4), 25.0);
    }

    #[test]
    fn zero_impairment_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_h(&mut rng, 4, 4);
        let ideal = ImpairmentParams::ideal();
        let t = impair_tap_canceller(realize_tap_canceller_rowwise(&h, 7).unwrap(), &ideal, &mut rng);
        assert_eq!(t.c_impaired, t.c_ideal);
        let a = impair_aux_canceller(realize_aux_canceller_largest_rows(&h, 2).unwrap(), &ideal, &mut rng);
        assert_eq!(a.c_impaired, a.c_ideal);
    }

    #[test]
    fn tap_error_bounded_and_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = ImpairmentParams::default();
        let lo = 10f64.powf(-0.01 / 20.0);
        let hi = 10f64.powf(0.01 / 20.0);
        for _ in 0..200 {
            let h = random_h(&mut rng, 4, 4);
            let t = impair_tap_canceller(realize_tap_canceller_rowwise(&h, 6).unwrap(), &params, &mut rng);
            for (ci, ch) in t.c_ideal.iter().zip(t.c_impaired.iter()) {
                if *ci == c(0.0, 0.0) {
                    assert_eq!(*ch, c(0.0, 0.0));
                } else {
                    let r = ch.norm() / ci.norm();
                    assert!(r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12));
                    assert!((ch / ci).arg().abs() <= params.tap_phase_err_max_rad * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn common_oscillator_cancels() {
        let phases = [0.3, -0.1, 0.7];
        let phi = aux_phase_mismatch(&phases, &phases);
        // identical oscillators on matching chains: diagonal entries are exactly 1
        for i in 0..3 {
            assert!((phi[(i, i)] - c(1.0, 0.0)).norm() < 1e-15);
        }
        let same = aux_phase_mismatch(&[0.2, 0.2], &[0.2, 0.2, 0.2]);
        assert!(same.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn aux_zero_rows_stay_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = ImpairmentParams::default();
        let h = random_h(&mut rng, 4, 4);
        let a = impair_aux_canceller(realize_aux_canceller_largest_rows(&h, 2).unwrap(), &params, &mut rng);
        for i in 0..4 {
            if a.c_ideal.row(i).norm() == 0.0 {
                assert_eq!(a.c_impaired.row(i).norm(), 0.0);
            }
        }
        let rebuilt = to_complex(&a.l5()) * &a.l4_impaired;
        assert!((rebuilt - &a.c_impaired).norm() <= 1e-12 * a.c_impaired.norm());
    }

    #[test]
    fn closed_form_residual_ratios() {
        let p = ImpairmentParams::default();
        assert!((10.0 * p.tap_residual_ratio().log10() + 60.6).abs() < 0.05);
        assert!((10.0 * p.aux_residual_ratio().log10() + 35.0).abs() < 0.05);
    }
}
