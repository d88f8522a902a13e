//! Randomized invariant checks on the beamforming pipeline and the
//! serialization layers.

use proptest::prelude::*;
use risbeam::beamforming::{build_beamformers, sum_rate, PhaseAction};
use risbeam::channel::sample_channel;
use risbeam::harness::{read_csv, write_csv, ResultRow};
use risbeam::{RngStream, SystemConfig};

fn small_system() -> impl Strategy<Value = SystemConfig> {
    (2usize..=6, 1usize..=3, prop_oneof![Just(4usize), Just(9), Just(16)]).prop_map(
        |(n_t, n_rf, m_ris)| {
            let n_rf = n_rf.min(n_t);
            SystemConfig::with_dims(n_t, n_rf, m_ris)
        },
    )
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-20.0f64..20.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beamformer_constraints_hold_for_any_phases(
        cfg in small_system(),
        chan_seed in 0u64..1_000,
        raw in proptest::collection::vec(-20.0f64..20.0, 64),
    ) {
        let chan = sample_channel(&cfg, &mut RngStream::new(chan_seed));
        let analog: Vec<f64> = raw.iter().cycle().take(cfg.n_t * cfg.n_rf).cloned().collect();
        let ris: Vec<f64> = raw.iter().rev().cycle().take(cfg.m_ris).cloned().collect();
        let action = PhaseAction::new(cfg.n_t, cfg.n_rf, analog, ris);
        // degenerate phase patterns (e.g. all equal) make the MMSE system
        // singular; those measure-zero inputs are discarded, not failures
        let set = match build_beamformers(&chan, &action, cfg.power, cfg.noise_var) {
            Ok(s) => s,
            Err(_) => {
                prop_assume!(false);
                unreachable!()
            }
        };

        let want = 1.0 / (cfg.n_t as f64).sqrt();
        for v in set.f_rf.data() {
            prop_assert!((v.norm() - want).abs() < 1e-12);
        }
        for v in &set.phi {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let product = set.f_rf.mul(&set.f_bb).unwrap();
        let total = product.frobenius_norm().powi(2);
        prop_assert!((total - cfg.n_streams() as f64).abs() < 1e-9, "power {total}");

        let rate = sum_rate(&chan, &set, cfg.power, cfg.noise_var);
        prop_assert!(rate.is_finite() && rate >= 0.0);
    }

    #[test]
    fn phase_canonicalization_preserves_rate(
        cfg in small_system(),
        chan_seed in 0u64..1_000,
        offset in -50.0f64..50.0,
    ) {
        let chan = sample_channel(&cfg, &mut RngStream::new(chan_seed));
        let n = cfg.n_t * cfg.n_rf;
        // quadratic progression keeps the analog columns linearly independent
        let analog: Vec<f64> = (0..n).map(|i| (i * i) as f64 * 0.37).collect();
        let ris: Vec<f64> = (0..cfg.m_ris).map(|i| i as f64 * 0.61).collect();
        let a = PhaseAction::new(cfg.n_t, cfg.n_rf, analog.clone(), ris.clone());
        // shifting every phase by a multiple of 2*pi changes nothing
        let k = offset.round() * std::f64::consts::TAU;
        let b = PhaseAction::new(
            cfg.n_t,
            cfg.n_rf,
            analog.iter().map(|p| p + k).collect(),
            ris.iter().map(|p| p + k).collect(),
        );
        let ra = sum_rate(&chan, &build_beamformers(&chan, &a, cfg.power, cfg.noise_var).unwrap(), cfg.power, cfg.noise_var);
        let rb = sum_rate(&chan, &build_beamformers(&chan, &b, cfg.power, cfg.noise_var).unwrap(), cfg.power, cfg.noise_var);
        prop_assert!((ra - rb).abs() < 1e-9 * (1.0 + ra.abs()));
    }

    #[test]
    fn result_csv_round_trips_any_finite_values(
        values in proptest::collection::vec(
            prop_oneof![
                -1e12f64..1e12,
                -1e-12f64..1e-12,
                Just(0.0),
                Just(-0.0),
            ],
            1..30,
        ),
        seeds in proptest::collection::vec(any::<u64>(), 1..30),
    ) {
        let rows: Vec<ResultRow> = values
            .iter()
            .zip(seeds.iter().cycle())
            .enumerate()
            .map(|(i, (&v, &s))| ResultRow {
                scheme: "x".into(),
                seed: s,
                sweep_value: v / 2.0,
                episode: i,
                metric: "m".into(),
                value: v,
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert_eq!(a.sweep_value.to_bits(), b.sweep_value.to_bits());
            prop_assert_eq!(a.seed, b.seed);
        }
    }

    #[test]
    fn raw_action_decode_is_total_on_the_box(
        cfg in small_system(),
        raw_seed in 0u64..1_000,
    ) {
        use risbeam::env::{EnvConfig, RisEnv};
        let mut env = RisEnv::new(EnvConfig::new(cfg.clone()));
        let mut rng = RngStream::new(raw_seed);
        env.reset(&mut rng);
        let raw: Vec<f64> = (0..env.action_dim()).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let action = env.decode_action(&raw).unwrap();
        for (i, &p) in action.analog_phases.iter().enumerate() {
            prop_assert!((p - std::f64::consts::PI * (raw[i] + 1.0)).abs() < 1e-12);
        }
        let (_, reward) = env.step(&raw, &mut rng).unwrap();
        prop_assert!(reward.is_finite() && reward >= 0.0);
    }
}
