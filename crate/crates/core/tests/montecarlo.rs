mod common;

use common::*;
use powergame_core::game::efficiency;
use powergame_core::montecarlo::{empirical_packet_success_with_filter, empirical_sinr_with_filter};
use powergame_core::receivers::{receiver_filter, sinr};
use powergame_core::{Channel, CodeBook, Error, ReceiverKind};

const FRAMES: usize = 100_000;

const KINDS: [ReceiverKind; 3] = [
    ReceiverKind::MatchedFilter,
    ReceiverKind::Decorrelator,
    ReceiverKind::Mmse,
];

fn z_against_analytic(kind: ReceiverKind, k: usize, ch: &Channel<'_>, seed: u64) -> f64 {
    let c = receiver_filter(kind, k, ch).unwrap().coefficients;
    let est = empirical_sinr_with_filter(&c, k, ch, FRAMES, seed).unwrap();
    est.z_score(sinr(kind, k, ch).unwrap())
}

/// Gaussian tail `Q(x)`.
fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[test]
fn single_user_estimate() {
    let codes = CodeBook::generate(1, 32, 1).unwrap();
    let ch = Channel {
        codes: &codes,
        powers: &[1.0],
        gains: &[1.0],
        noise_power: 1.0,
    };
    for kind in KINDS {
        let z = z_against_analytic(kind, 0, &ch, 10);
        assert!(z < 4.0, "{kind}: z = {z}");
    }
}

#[test]
fn hand_instance_estimates() {
    let codes = half_correlated();
    let ch = Channel {
        codes: &codes,
        powers: &HAND_POWERS,
        gains: &HAND_GAINS,
        noise_power: HAND_NOISE,
    };
    for (kind, want) in [
        (ReceiverKind::MatchedFilter, 1.6),
        (ReceiverKind::Decorrelator, 1.5),
        (ReceiverKind::Mmse, 1.75),
    ] {
        let c = receiver_filter(kind, 0, &ch).unwrap().coefficients;
        let est = empirical_sinr_with_filter(&c, 0, &ch, FRAMES, 20).unwrap();
        assert!(est.z_score(want) < 4.0, "{kind}: {} ± {}", est.sinr, est.std_error);
    }
}

#[test]
fn estimate_doubles_with_power() {
    let codes = half_correlated();
    let doubled = [2.0 * HAND_POWERS[0], HAND_POWERS[1]];
    let ch = Channel {
        codes: &codes,
        powers: &doubled,
        gains: &HAND_GAINS,
        noise_power: HAND_NOISE,
    };
    for (kind, base) in [
        (ReceiverKind::MatchedFilter, 1.6),
        (ReceiverKind::Decorrelator, 1.5),
        (ReceiverKind::Mmse, 1.75),
    ] {
        // The MMSE filter depends on p_k only through a scale factor.
        let c = receiver_filter(kind, 0, &ch).unwrap().coefficients;
        let est = empirical_sinr_with_filter(&c, 0, &ch, FRAMES, 30).unwrap();
        assert!(est.z_score(2.0 * base) < 4.0, "{kind}: {}", est.sinr);
    }
}

#[test]
fn random_instances_agree_with_closed_forms() {
    for seed in 0..4 {
        let inst = random_instance(8, 32, 40 + seed);
        let ch = Channel {
            codes: &inst.codes,
            powers: &inst.powers,
            gains: &inst.gains,
            noise_power: inst.noise,
        };
        for kind in KINDS {
            for k in [0, 5] {
                let z = z_against_analytic(kind, k, &ch, 1000 * seed + k as u64);
                assert!(z < 4.0, "{kind} seed {seed} k={k}: z = {z}");
            }
        }
    }
}

#[test]
fn decorrelator_output_carries_only_noise() {
    let inst = random_instance(12, 32, 77);
    let ch = Channel {
        codes: &inst.codes,
        powers: &inst.powers,
        gains: &inst.gains,
        noise_power: inst.noise,
    };
    let c = receiver_filter(ReceiverKind::Decorrelator, 3, &ch).unwrap().coefficients;
    let est = empirical_sinr_with_filter(&c, 3, &ch, FRAMES, 5).unwrap();
    let noise_only = inst.noise * c.iter().map(|x| x * x).sum::<f64>();
    // Sample variance of Gaussian noise has relative SE √(2/n).
    let z = (est.interference_variance / noise_only - 1.0).abs() / (2.0 / FRAMES as f64).sqrt();
    assert!(z < 4.0, "z = {z}");
}

#[test]
fn too_few_frames_are_rejected() {
    let codes = half_correlated();
    let ch = Channel {
        codes: &codes,
        powers: &HAND_POWERS,
        gains: &HAND_GAINS,
        noise_power: HAND_NOISE,
    };
    let c = codes.code(0).to_vec();
    assert!(matches!(empirical_sinr_with_filter(&c, 0, &ch, 999, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(
        empirical_packet_success_with_filter(&c, 0, &ch, 100, 999, 1),
        Err(Error::InvalidArgument(_))
    ));
}

fn single_user_success(power: f64, noise: f64, packets: usize, seed: u64) -> f64 {
    let codes = CodeBook::generate(1, 32, 2).unwrap();
    let ch = Channel {
        codes: &codes,
        powers: &[power],
        gains: &[1.0],
        noise_power: noise,
    };
    empirical_packet_success_with_filter(codes.code(0), 0, &ch, 100, packets, seed).unwrap()
}

#[test]
fn silent_user_never_gets_a_packet_through() {
    assert_eq!(single_user_success(0.0, 1.0, 2000, 3), 0.0);
}

#[test]
fn noiseless_limit_delivers_every_packet() {
    assert_eq!(single_user_success(1.0, 1e-6, 2000, 4), 1.0);
}

#[test]
fn awgn_packet_success_against_oracles() {
    let gamma = 6.49;
    let packets = 4000;
    let measured = single_user_success(gamma, 1.0, packets, 5);
    // Real BPSK with noise variance σ² per chip: bit error rate Q(√γ).
    let oracle = (1.0 - q_function(gamma.sqrt())).powi(100);
    let se = (oracle * (1.0 - oracle) / packets as f64).sqrt();
    assert!((measured - oracle).abs() < 4.0 * se, "{measured} vs {oracle} ± {se}");

    let f = efficiency(100, gamma).unwrap();
    let complex_oracle = (1.0 - q_function((2.0 * gamma).sqrt())).powi(100);
    println!(
        "γ = {gamma}: measured success {measured:.4}, real-BPSK oracle {oracle:.4}, \
         f(γ) = {f:.4}, complex-noise oracle {complex_oracle:.4}, |measured − f| = {:.4}",
        (measured - f).abs()
    );
}
