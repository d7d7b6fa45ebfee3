use asc_core::frontend::{flms_aec, gcc_phat, run_chain, AecConfig, ChainConfig};
use asc_core::room::{
    place_device, simulate_scene, DelayModel, Level, RoomSpec, SceneDescription, SignalKind, SourceDescription,
    SourceRole,
};
use asc_core::ssl::angle_distance;
use asc_core::Execution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn estimate(heading: f64, device_deg: f64, seed: u64) -> u16 {
    let room = RoomSpec::new([7.0, 6.0, 3.0], 0.0).with_delay(DelayModel::Fractional);
    let origin = [3.5, 3.0, 1.0];
    let dev = place_device(&room, origin, heading).unwrap();
    let desc = SceneDescription {
        room,
        device_origin: origin,
        heading,
        duration_s: 0.5,
        sensor_noise_db: None,
        sources: vec![SourceDescription {
            role: SourceRole::Speech,
            signal: SignalKind::Speech,
            signal_seed: seed,
            position: Some(dev.point_at(device_deg, 2.0, 1.1)),
            level: Level::Reference,
        }],
    };
    let (audio, _) = simulate_scene(&desc.to_spec().unwrap(), seed).unwrap();
    let cfg = ChainConfig {
        aec: None,
        ..ChainConfig::default()
    };
    run_chain(&audio, &cfg, Execution::Parallel).unwrap().doa
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gcc_peak_follows_circular_shift(seed in any::<u64>(), k in -12i64..=12) {
        let n = 1024;
        let a = noise(n, seed);
        let b: Vec<f64> = (0..n).map(|t| a[(t as i64 - k).rem_euclid(n as i64) as usize]).collect();
        let cc = gcc_phat(&a, &b, 16).unwrap();
        prop_assert_eq!(cc.argmax_lag(), -(k as f64));
    }

    #[test]
    fn aec_never_amplifies_by_more_than_3_db(
        seed in any::<u64>(),
        mic_gain in -60.0f64..40.0,
        ref_gain in -60.0f64..40.0,
        shared in any::<bool>(),
    ) {
        let n = 8192;
        let mic: Vec<f64> = noise(n, seed).into_iter().map(|v| v * 10f64.powf(mic_gain / 20.0)).collect();
        let r0: Vec<f64> = noise(n, seed ^ 1).into_iter().map(|v| v * 10f64.powf(ref_gain / 20.0)).collect();
        let r1 = if shared { r0.clone() } else { vec![0.0; n] };
        let cfg = AecConfig { filter_len: 256, block_len: 256, ..AecConfig::default() };
        let out = flms_aec(&mic, [&r0, &r1], &cfg).unwrap();
        prop_assert!(10.0 * (energy(&out.signal) / energy(&mic)).log10() <= 3.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn srp_estimate_rotates_with_the_source(heading in 0.0f64..360.0, deg in 1u16..=360, phi in 1u16..360) {
        let base = estimate(heading, f64::from(deg), 5);
        let turned_deg = (deg + phi - 1) % 360 + 1;
        let turned = estimate(heading, f64::from(turned_deg), 5);
        let expect = (base + phi - 1) % 360 + 1;
        prop_assert!(angle_distance(turned, expect).unwrap() <= 5, "{base} {turned} {expect}");
    }

    #[test]
    fn srp_estimate_ignores_device_heading(h1 in 0.0f64..360.0, h2 in 0.0f64..360.0, deg in 1u16..=360) {
        let a = estimate(h1, f64::from(deg), 6);
        let b = estimate(h2, f64::from(deg), 6);
        prop_assert!(angle_distance(a, b).unwrap() <= 5, "{a} {b}");
    }
}
