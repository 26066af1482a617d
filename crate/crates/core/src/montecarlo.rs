//! Seeded, parallel Monte Carlo sweeps over the transmit power.
//!
//! Trial `t` draws from the ChaCha8 stream `t` of the master seed, so a
//! result depends only on the spec, never on the thread schedule. Within a
//! trial the channel draw is shared by every power point and design, and so
//! are the canceller impairment draws (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canceller::ImpairmentParams;
use crate::channels::{draw_channel_set, ChannelParams};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::solver::{solve_design, DesignSpec, Scenario};

/// Power grid, trial count and designs of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub p_k_grid_dbm: Vec<f64>,
    /// Uplink power relative to the downlink power.
    pub p_m_offset_db: f64,
    pub n_trials: usize,
    pub designs: Vec<DesignSpec>,
    pub master_seed: u64,
    pub lambda_a_dbm: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p_k_grid_dbm: (0..7).map(|i| 10.0 + 5.0 * i as f64).collect(),
            p_m_offset_db: -20.0,
            n_trials: 1000,
            designs: vec![DesignSpec::Proposed {
                architecture: crate::config::Architecture::Taps,
                n: 8,
            }],
            master_seed: 1,
            lambda_a_dbm: -60.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::param("n_trials", "must be at least 1"));
        }
        if self.p_k_grid_dbm.is_empty() {
            return Err(Error::param("p_k_grid_dbm", "grid is empty"));
        }
        if self.p_k_grid_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("p_k_grid_dbm", "entries must be finite"));
        }
        if !self.p_m_offset_db.is_finite() {
            return Err(Error::param("p_m_offset_db", "must be finite"));
        }
        if self.lambda_a_dbm.is_nan() {
            return Err(Error::param("lambda_a_dbm", "must be a number"));
        }
        if self.designs.is_empty() {
            return Err(Error::param("designs", "no design selected"));
        }
        Ok(())
    }
}

/// Statistics of one design at one power point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub design: DesignSpec,
    pub label: String,
    pub p_k_dbm: f64,
    pub p_m_dbm: f64,
    pub prob_constraint_met: f64,
    /// Mean effective TX antennas over feasible trials.
    pub avg_alpha: Option<f64>,
    /// Means over all trials, infeasible ones contributing half-duplex rates.
    pub mean_dl: f64,
    pub mean_ul: f64,
    pub mean_fd: f64,
    /// Mean FD rate over feasible trials only.
    pub mean_fd_conditioned: Option<f64>,
    pub n_feasible: usize,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub master_seed: u64,
    /// Ordered by design, then power.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, design: &DesignSpec, p_k_dbm: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.design == *design && p.p_k_dbm == p_k_dbm)
    }

    /// Points of one design in grid order.
    pub fn series(&self, design: &DesignSpec) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.design == *design).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    feasible: bool,
    alpha: usize,
    dl: f64,
    ul: f64,
    fd: f64,
}

fn run_trial(
    trial: u64,
    spec: &SweepSpec,
    base: &Scenario,
) -> Result<Vec<Outcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(trial);
    let chans = draw_channel_set(&base.system, &base.channel, &mut rng);
    let impairment_seed: u64 = rng.random();
    let mut out = Vec::with_capacity(spec.designs.len() * spec.p_k_grid_dbm.len());
    for design in &spec.designs {
        for &p_k in &spec.p_k_grid_dbm {
            let mut sc = base.clone();
            sc.system.p_k_dbm = p_k;
            sc.system.p_m_dbm = p_k + spec.p_m_offset_db;
            sc.system.lambda_a_dbm = spec.lambda_a_dbm;
            let mut imp_rng = ChaCha8Rng::seed_from_u64(impairment_seed);
            let sol = solve_design(design, &chans, &sc, &mut imp_rng)?;
            out.push(Outcome {
                feasible: sol.feasible,
                alpha: sol.alpha_used,
                dl: sol.dl_rate,
                ul: sol.ul_rate,
                fd: sol.fd_rate,
            });
        }
    }
    Ok(out)
}

/// Run every trial and aggregate per (design, power point).
pub fn run_sweep(
    spec: &SweepSpec,
    system: &SystemConfig,
    channel: &ChannelParams,
    impairments: &ImpairmentParams,
) -> Result<SweepResult> {
    spec.validate()?;
    let base = Scenario {
        system: system.clone(),
        channel: channel.clone(),
        impairments: impairments.clone(),
    };
    base.validate()?;
    for d in &spec.designs {
        if let DesignSpec::Proposed { architecture, n } = *d {
            let budget = architecture.full_budget(system.m_k, system.n_k);
            if n > budget {
                return Err(Error::param(
                    "n_elements",
                    format!("design `{d}` needs {n} elements, only {budget} positions exist"),
                ));
            }
        }
    }

    let trials: Vec<Vec<Outcome>> = (0..spec.n_trials as u64)
        .into_par_iter()
        .map(|t| run_trial(t, spec, &base))
        .collect::<Result<_>>()?;

    let n_powers = spec.p_k_grid_dbm.len();
    let n = spec.n_trials as f64;
    let mut points = Vec::with_capacity(spec.designs.len() * n_powers);
    for (di, design) in spec.designs.iter().enumerate() {
        for (pi, &p_k) in spec.p_k_grid_dbm.iter().enumerate() {
            let idx = di * n_powers + pi;
            let (mut dl, mut ul, mut fd, mut fd_ok, mut alpha) = (0.0, 0.0, 0.0, 0.0, 0.0);
            let mut n_feasible = 0usize;
            for outcomes in &trials {
                let o = outcomes[idx];
                dl += o.dl;
                ul += o.ul;
                fd += o.fd;
                if o.feasible {
                    n_feasible += 1;
                    fd_ok += o.fd;
                    alpha += o.alpha as f64;
                }
            }
            let cond = |sum: f64| (n_feasible > 0).then(|| sum / n_feasible as f64);
            points.push(SweepPoint {
                design: *design,
                label: design.label(system.m_k, system.n_k),
                p_k_dbm: p_k,
                p_m_dbm: p_k + spec.p_m_offset_db,
                prob_constraint_met: n_feasible as f64 / n,
                avg_alpha: cond(alpha),
                mean_dl: dl / n,
                mean_ul: ul / n,
                mean_fd: fd / n,
                mean_fd_conditioned: cond(fd_ok),
                n_feasible,
                n_trials: spec.n_trials,
            });
        }
    }
    Ok(SweepResult {
        master_seed: spec.master_seed,
        points,
    })
}

/// Average alpha per (design label, P_k); `None` where no trial was feasible.
pub fn summarize_alpha(result: &SweepResult) -> Vec<(String, f64, Option<f64>)> {
    result
        .points
        .iter()
        .map(|p| (p.label.clone(), p.p_k_dbm, p.avg_alpha))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Architecture;

    fn small_spec(trials: usize, designs: Vec<DesignSpec>) -> SweepSpec {
        SweepSpec {
            p_k_grid_dbm: vec![10.0, 40.0],
            n_trials: trials,
            designs,
            master_seed: 42,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let spec = small_spec(8, vec!["taps4".parse().unwrap(), DesignSpec::Softnull]);
        let sys = SystemConfig::default();
        let ch = ChannelParams::default();
        let imp = ImpairmentParams::default();
        let a = run_sweep(&spec, &sys, &ch, &imp).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_sweep(&spec, &sys, &ch, &imp)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn statistics_in_range() {
        let spec = small_spec(
            6,
            vec![
                "taps8".parse().unwrap(),
                DesignSpec::SotaFull { architecture: Architecture::Aux },
                DesignSpec::Softnull,
            ],
        );
        let sys = SystemConfig::default();
        let r = run_sweep(&spec, &sys, &ChannelParams::default(), &ImpairmentParams::default()).unwrap();
        assert_eq!(r.points.len(), 6);
        for p in &r.points {
            assert!((0.0..=1.0).contains(&p.prob_constraint_met));
            assert_eq!(p.prob_constraint_met, p.n_feasible as f64 / p.n_trials as f64);
            assert!(p.mean_dl >= 0.0 && p.mean_ul >= 0.0 && p.mean_fd >= 0.0);
            if let Some(a) = p.avg_alpha {
                assert!(a >= 1.0 && a <= sys.n_k as f64);
            }
        }
    }

    #[test]
    fn ideal_full_canceller_alpha_is_alpha_max() {
        let spec = small_spec(5, vec!["taps16".parse().unwrap()]);
        // closed loop: more effective antennas never lower the DL rate
        let sys = SystemConfig {
            m_q: 2,
            precoding: crate::config::PrecodingStrategy::ClosedLoop,
            ..SystemConfig::default()
        };
        let r = run_sweep(&spec, &sys, &ChannelParams::default(), &ImpairmentParams::ideal()).unwrap();
        assert_eq!(r.points[0].avg_alpha, Some(4.0));
        assert_eq!(r.points[1].avg_alpha, Some(2.0));
    }

    #[test]
    fn invalid_specs() {
        let mut spec = small_spec(0, vec![DesignSpec::Softnull]);
        assert!(spec.validate().is_err());
        spec.n_trials = 1;
        spec.p_k_grid_dbm.clear();
        assert!(spec.validate().is_err());
        let spec = small_spec(1, vec!["taps17".parse().unwrap()]);
        let err = run_sweep(&spec, &SystemConfig::default(), &ChannelParams::default(), &ImpairmentParams::default());
        assert!(matches!(err, Err(Error::Parameter { ref name, .. }) if name == "n_elements"));
    }
}
