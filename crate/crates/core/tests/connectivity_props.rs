use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use eegprint::connectivity::{
    common_block_len, connectivity_matrix, n_features, pli, plv, segment_epochs, upper_pairs,
    upper_triangle, BlockSums, ConnectivityError, PhaseEpoch, Provenance,
};
use eegprint::dsp::wrap_phase;
use eegprint::synth::{gen_uniform_phase_pair, noisy_coupled_phases, SplitMix64};
use eegprint::{Band, Condition, Method, PhaseSeries, WindowGrid};

fn series(phases: Vec<Vec<f64>>) -> PhaseSeries {
    PhaseSeries {
        subject_id: "S007".into(),
        condition: Condition::EyesOpen,
        band: Band::Gamma.definition(),
        sample_rate: 160.0,
        channel_labels: (0..phases.len()).map(|c| format!("Ch{c}")).collect(),
        phases,
        degenerate: Vec::new(),
    }
}

fn epoch(phases: Vec<Vec<f64>>) -> PhaseEpoch {
    PhaseEpoch {
        phases,
        epoch_index: 0,
        window_s: 1.0,
        provenance: Provenance {
            subject_id: "S007".into(),
            condition: Condition::EyesOpen,
            band: Band::Gamma.definition(),
        },
    }
}

/// Direct complex mean via explicit cos/sin sums, for comparison.
fn plv_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let re: f64 = a.iter().zip(b).map(|(x, y)| (x - y).cos()).sum();
    let im: f64 = a.iter().zip(b).map(|(x, y)| (x - y).sin()).sum();
    (re * re + im * im).sqrt() / n
}

fn pli_oracle(a: &[f64], b: &[f64]) -> f64 {
    let mut pos = 0i64;
    let mut neg = 0i64;
    for (x, y) in a.iter().zip(b) {
        let s = (x - y).sin();
        if s > 0.0 {
            pos += 1;
        } else if s < 0.0 {
            neg += 1;
        }
    }
    (pos - neg).abs() as f64 / a.len() as f64
}

#[test]
fn quarter_cycle_lag_is_fully_lagged() {
    let mut rng = SplitMix64::new(4);
    let a: Vec<f64> = (0..500).map(|_| rng.phase()).collect();
    let b: Vec<f64> = a.iter().map(|p| wrap_phase(p - PI / 2.0)).collect();
    assert_eq!(pli(&a, &b).unwrap(), 1.0);
    assert_abs_diff_eq!(plv(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn identical_phases_have_no_lag() {
    let [a, _] = gen_uniform_phase_pair(700, 5);
    assert_eq!(pli(&a, &a).unwrap(), 0.0);
    assert_eq!(plv(&a, &a).unwrap(), 1.0);
}

#[test]
fn alternating_quarter_cycles_cancel() {
    let a: Vec<f64> = (0..1000)
        .map(|i| if i % 2 == 0 { PI / 2.0 } else { -PI / 2.0 })
        .collect();
    let b = vec![0.0; 1000];
    assert!(plv(&a, &b).unwrap() < 1e-12);
    assert_eq!(pli(&a, &b).unwrap(), 0.0);
}

#[test]
fn single_sample_and_mismatched_lengths() {
    assert_abs_diff_eq!(plv(&[0.3], &[2.0]).unwrap(), 1.0, epsilon = 1e-15);
    assert!(matches!(
        pli(&[0.0, 1.0], &[0.0]),
        Err(ConnectivityError::LengthMismatch(2, 1))
    ));
    assert!(plv(&[], &[]).is_err());
}

#[test]
fn uniform_phases_are_unlocked() {
    let mut over = 0;
    for seed in 0..200 {
        let [a, b] = gen_uniform_phase_pair(10_000, seed);
        if pli(&a, &b).unwrap() > 0.03 || plv(&a, &b).unwrap() > 0.03 {
            over += 1;
        }
    }
    assert!(over <= 4, "{over} of 200 seeds above 0.03");
}

#[test]
fn jitter_lowers_locking() {
    let w = 1920;
    let mut prev = 1.0;
    for sigma in [0.0, 0.3, 0.8, 1.5, 3.0] {
        let [a, b] = noisy_coupled_phases(37.0, 0.6, sigma, w, 160.0, 21).unwrap();
        let v = plv(&a, &b).unwrap();
        // E[PLV] = exp(-σ²/2) for Gaussian jitter
        assert!(
            (v - (-sigma * sigma / 2.0f64).exp()).abs() < 0.05,
            "σ={sigma} PLV={v}"
        );
        assert!(v <= prev + 1e-12);
        prev = v;
    }
}

#[test]
fn heavy_jitter_looks_like_noise() {
    let [a, b] = noisy_coupled_phases(37.0, 0.6, 10.0, 10_000, 160.0, 8).unwrap();
    assert!(plv(&a, &b).unwrap() < 0.03);
    assert!(pli(&a, &b).unwrap() < 0.03);
}

#[test]
fn plv_spread_shrinks_with_window() {
    let std_at = |w: usize| {
        let vals: Vec<f64> = (0..200)
            .map(|s| {
                let [a, b] = noisy_coupled_phases(37.0, 0.6, 1.0, w, 160.0, s).unwrap();
                plv(&a, &b).unwrap()
            })
            .collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
    };
    assert!(std_at(1920) < std_at(80));
}

#[test]
fn three_channel_matrix() {
    let mut rng = SplitMix64::new(99);
    let ch0: Vec<f64> = (0..1920).map(|_| rng.phase()).collect();
    let ch1: Vec<f64> = ch0.iter().map(|p| wrap_phase(p - PI / 4.0)).collect();
    let ch2: Vec<f64> = (0..1920).map(|_| rng.phase()).collect();
    let e = epoch(vec![ch0, ch1, ch2]);
    let m = connectivity_matrix(&e, Method::Plv).unwrap();
    assert!((m.get(0, 1) - 1.0).abs() <= 0.02);
    assert!(m.get(0, 2) <= 0.1);
    for i in 0..3 {
        assert_eq!(m.get(i, i), 1.0);
    }
    let p = connectivity_matrix(&e, Method::Pli).unwrap();
    for i in 0..3 {
        assert_eq!(p.get(i, i), 0.0);
    }
    let f = upper_triangle(&m);
    assert_eq!(f.values, vec![m.get(0, 1), m.get(0, 2), m.get(1, 2)]);
}

#[test]
fn sixty_four_channels_give_2016_features() {
    assert_eq!(n_features(64), 2016);
    assert_eq!(upper_pairs(64).count(), 2016);
    let pairs: Vec<_> = upper_pairs(4).collect();
    assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
}

#[test]
fn epochs_are_contiguous_and_drop_the_remainder() {
    let phases: Vec<Vec<f64>> = (0..2)
        .map(|c| {
            (0..1000)
                .map(|i| wrap_phase(i as f64 * 0.1 + c as f64))
                .collect()
        })
        .collect();
    let s = series(phases.clone());
    let epochs = segment_epochs(&s, 1.5).unwrap();
    assert_eq!(epochs.len(), 1000 / 240);
    for (k, e) in epochs.iter().enumerate() {
        assert_eq!(e.epoch_index, k);
        assert_eq!(e.phases[1], phases[1][k * 240..(k + 1) * 240].to_vec());
    }
    assert!(matches!(
        segment_epochs(&s, 0.33),
        Err(ConnectivityError::FractionalWindow { .. })
    ));
    assert!(matches!(
        segment_epochs(&s, 12.0),
        Err(ConnectivityError::WindowTooLong { .. })
    ));
}

#[test]
fn default_grid_has_block_length_80() {
    let grid = WindowGrid::default();
    assert_eq!(grid.lengths_s.len(), 24);
    let samples = grid.validate(160.0).unwrap();
    assert_eq!(samples[0], 80);
    assert_eq!(samples[23], 1920);
    assert_eq!(common_block_len(&samples), 80);
    assert_eq!(common_block_len(&[240, 400]), 80);
}

fn random_series(seed: u64, channels: usize, n: usize) -> PhaseSeries {
    let mut rng = SplitMix64::new(seed);
    // half the channels partly locked to channel 0
    let base: Vec<f64> = (0..n).map(|_| rng.phase()).collect();
    let phases = (0..channels)
        .map(|c| {
            if c % 2 == 0 {
                base.iter()
                    .map(|p| wrap_phase(p + 0.4 * c as f64 + 0.5 * rng.normal()))
                    .collect()
            } else {
                (0..n).map(|_| rng.phase()).collect()
            }
        })
        .collect();
    series(phases)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_are_bounded_and_symmetric(seed in any::<u64>(), n in 1usize..300) {
        let [a, b] = gen_uniform_phase_pair(n, seed);
        for m in [pli, plv] {
            let ab = m(&a, &b).unwrap();
            let ba = m(&b, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_sums(seed in any::<u64>(), n in 1usize..8) {
        let [a, b] = gen_uniform_phase_pair(n, seed);
        prop_assert_eq!(pli(&a, &b).unwrap(), pli_oracle(&a, &b));
        prop_assert!((plv(&a, &b).unwrap() - plv_oracle(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn common_phase_shift_is_invisible(seed in any::<u64>(), shift in -PI..PI) {
        let [a, b] = gen_uniform_phase_pair(200, seed);
        let a2: Vec<f64> = a.iter().map(|p| wrap_phase(p + shift)).collect();
        let b2: Vec<f64> = b.iter().map(|p| wrap_phase(p + shift)).collect();
        prop_assert!((plv(&a, &b).unwrap() - plv(&a2, &b2).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn matrix_is_symmetric(seed in any::<u64>(), c in 2usize..7, n in 2usize..60) {
        let mut rng = SplitMix64::new(seed);
        let phases: Vec<Vec<f64>> = (0..c).map(|_| (0..n).map(|_| rng.phase()).collect()).collect();
        for method in Method::ALL {
            let m = connectivity_matrix(&epoch(phases.clone()), method).unwrap();
            for i in 0..c {
                for j in 0..c {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
            prop_assert_eq!(upper_triangle(&m).values.len(), c * (c - 1) / 2);
        }
    }

    #[test]
    fn block_sums_equal_per_epoch_matrices(
        seed in any::<u64>(),
        channels in 2usize..6,
        window_idx in 0usize..6,
    ) {
        let s = random_series(seed, channels, 1920);
        let sums = BlockSums::new(&s, 80).unwrap();
        let window_s = [0.5, 1.0, 1.5, 2.5, 6.0, 12.0][window_idx];
        let epochs = segment_epochs(&s, window_s).unwrap();
        for method in Method::ALL {
            let rows = sums.features(method, window_s).unwrap();
            prop_assert_eq!(rows.len(), epochs.len());
            for (row, e) in rows.iter().zip(&epochs) {
                let direct = upper_triangle(&connectivity_matrix(e, method).unwrap()).values;
                for (x, y) in row.iter().zip(&direct) {
                    match method {
                        Method::Pli => prop_assert_eq!(x, y),
                        Method::Plv => prop_assert!((x - y).abs() < 1e-12),
                    }
                }
            }
        }
    }
}
