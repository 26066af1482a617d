use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fdmimo::beamforming::{residual_si_row_powers, PrecoderSearch};
use fdmimo::canceller::{
    hardware_reduction_percent, realize_aux_canceller_largest_rows, realize_tap_canceller_rowwise,
};
use fdmimo::channels::{draw_channel_set, draw_rayleigh_channel, ChannelParams};
use fdmimo::config::{Architecture, PrecodingStrategy, SystemConfig};
use fdmimo::linalg::{full_svd, CMat};
use fdmimo::solver::{solve_design, DesignSpec, Scenario};

fn randn(rows: usize, cols: usize, seed: u64) -> CMat {
    draw_rayleigh_channel(rows, cols, 0.0, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tap_realization_cancels_tapped_entries(m_k in 1usize..6, n_k in 1usize..6, frac in 0.0f64..1.0, seed: u64) {
        let h = randn(m_k, n_k, seed);
        let n = 1 + ((m_k * n_k - 1) as f64 * frac) as usize;
        let real = realize_tap_canceller_rowwise(&h, n).unwrap();
        let nonzero = real.c_ideal.iter().filter(|z| z.norm() > 0.0).count();
        prop_assert!(nonzero <= n);
        let residual = &h + &real.c_ideal;
        for tap in &real.taps {
            prop_assert_eq!(residual[(tap.rx, tap.tx)].norm(), 0.0);
        }
    }

    #[test]
    fn aux_realization_cancels_selected_rows(m_k in 1usize..6, n_k in 1usize..6, frac in 0.0f64..1.0, seed: u64) {
        let h = randn(m_k, n_k, seed);
        let n = 1 + ((m_k - 1) as f64 * frac) as usize;
        let real = realize_aux_canceller_largest_rows(&h, n).unwrap();
        let zero_rows = real.c_ideal.row_iter().filter(|r| r.norm() == 0.0).count();
        prop_assert_eq!(zero_rows, m_k - n);
        let residual = &h + &real.c_ideal;
        for &row in &real.rx_of_aux {
            prop_assert_eq!(residual.row(row).norm(), 0.0);
        }
    }

    #[test]
    fn precoder_candidates_are_consistent(
        m_k in 1usize..6, n_k in 1usize..6, m_q in 1usize..5,
        closed in any::<bool>(), lambda in 0.01f64..10.0, seed: u64,
    ) {
        let c_eff = randn(m_k, n_k, seed);
        let h_qk = randn(m_q, n_k, seed ^ 1);
        let search = PrecoderSearch {
            p_k: 3.0,
            lambda_a: lambda,
            alpha_max: n_k,
            strategy: if closed { PrecodingStrategy::ClosedLoop } else { PrecodingStrategy::OpenLoop },
            sigma_q_sq: 0.1,
            max_streams: None,
            rows_required: None,
        };
        // singular values padded with zeros up to N_k, descending
        let mut sv: Vec<f64> = full_svd(&c_eff).unwrap().singular_values.iter().copied().collect();
        sv.resize(n_k, 0.0);
        for cand in search.run(&c_eff, &h_qk, 0).unwrap() {
            let gram = cand.f.adjoint() * &cand.f;
            prop_assert!((gram - CMat::identity(cand.alpha, cand.alpha)).norm() < 1e-10);
            prop_assert!(residual_si_row_powers(&c_eff, &cand.v).iter().all(|&p| p <= lambda));
            // F spans the least dominant right singular subspace
            let tail: f64 = sv[n_k - cand.alpha..].iter().map(|s| s * s).sum();
            prop_assert!(((&c_eff * &cand.f).norm() - tail.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn solutions_add_up(n_taps in 1usize..17, n_aux in 1usize..5, mq in prop::sample::select(vec![1usize, 4]), p_k in 10.0f64..40.0, seed: u64) {
        let n = mq;
        let sc = Scenario {
            system: SystemConfig { m_q: n, n_m: n, d_m: n, p_k_dbm: p_k, p_m_dbm: p_k - 20.0, ..SystemConfig::default() },
            ..Scenario::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chans = draw_channel_set(&sc.system, &sc.channel, &mut rng);
        let designs = [
            DesignSpec::Proposed { architecture: Architecture::Taps, n: n_taps },
            DesignSpec::Proposed { architecture: Architecture::Aux, n: n_aux },
            DesignSpec::Softnull,
        ];
        for design in designs {
            let sol = solve_design(&design, &chans, &sc, &mut rng).unwrap();
            prop_assert!((sol.fd_rate - sol.dl_rate - sol.ul_rate).abs() <= 1e-12 * sol.fd_rate.max(1.0));
            if sol.feasible {
                let cancelled = &chans.h_kk + sol.canceller.as_ref().map_or(CMat::zeros(4, 4), |c| c.c_impaired().clone());
                let v = &sol.precoder.as_ref().unwrap().v;
                let trace = (v * v.adjoint()).trace().re;
                prop_assert!(trace <= sc.system.p_k_w() + 1e-9);
                let rows = residual_si_row_powers(&cancelled, v);
                let met = sol.active_rows.iter().all(|&r| rows[r] <= sc.system.lambda_a_w());
                prop_assert!(met);
            }
        }
    }
}

#[test]
fn hardware_reduction_formula() {
    for n in 0..=16 {
        assert_eq!(
            hardware_reduction_percent(Architecture::Taps, n, 4, 4),
            100.0 * (1.0 - n as f64 / 16.0)
        );
    }
    for n in 0..=4 {
        assert_eq!(
            hardware_reduction_percent(Architecture::Aux, n, 4, 4),
            100.0 * (1.0 - n as f64 / 4.0)
        );
    }
}

#[test]
fn channel_draws_are_deterministic() {
    let cfg = SystemConfig::default();
    let params = ChannelParams::default();
    let a = draw_channel_set(&cfg, &params, &mut ChaCha8Rng::seed_from_u64(9));
    let b = draw_channel_set(&cfg, &params, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a.h_kk, b.h_kk);
    assert_eq!(a.h_qk, b.h_qk);
    assert_eq!(a.h_km, b.h_km);
}
