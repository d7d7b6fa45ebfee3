//! Seeded synthetic source signals standing in for the recorded corpora:
//! speech-like harmonic babble, a fixed keyword utterance, noises, music-like
//! loudspeaker playback and servo noise. All outputs are normalized to
//! [`TARGET_RMS`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const TARGET_RMS: f64 = 0.05;
const KEYWORD_SEED: u64 = 0x6b77_735f_6b65_7921;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Speech,
    Keyword,
    WhiteNoise,
    PinkNoise,
    Babble,
    Music,
    Mechanical,
}

pub fn synthesize(kind: SignalKind, len: usize, sample_rate: u32, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = f64::from(sample_rate);
    let mut x = match kind {
        SignalKind::Speech => speech_like(len, fs, &mut rng),
        SignalKind::Keyword => keyword(len, fs, &mut rng),
        SignalKind::WhiteNoise => (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        SignalKind::PinkNoise => pink(len, &mut rng),
        SignalKind::Babble => {
            let mut acc = vec![0.0; len];
            for _ in 0..4 {
                let s = speech_like(len, fs, &mut rng);
                acc.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
            }
            acc
        }
        SignalKind::Music => music(len, fs, &mut rng),
        SignalKind::Mechanical => mechanical(len, fs, &mut rng),
    };
    normalize(&mut x, TARGET_RMS);
    x
}

fn normalize(x: &mut [f64], rms: f64) {
    let p = crate::audio::mean_square(x);
    if p > 0.0 {
        let g = rms / p.sqrt();
        x.iter_mut().for_each(|v| *v *= g);
    }
}

fn hann_env(i: usize, n: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos()
}

/// One voiced syllable: gliding f0 with harmonics shaped by three formants.
fn syllable(out: &mut [f64], fs: f64, rng: &mut ChaCha8Rng) {
    let n = out.len();
    let f0_start: f64 = rng.random_range(90.0..240.0);
    let f0_end = f0_start * rng.random_range(0.8..1.2);
    let formants = [
        (rng.random_range(300.0..900.0), 90.0),
        (rng.random_range(900.0..2500.0), 130.0),
        (rng.random_range(2400.0..3500.0), 180.0),
    ];
    let n_harm = (4000.0 / f0_start.max(f0_end)) as usize;
    let gains: Vec<f64> = (1..=n_harm)
        .map(|h| {
            let f = h as f64 * f0_start;
            let env: f64 = formants
                .iter()
                .map(|&(fc, bw)| (-0.5 * ((f - fc) / bw).powi(2)).exp())
                .sum();
            (0.05 + env) / h as f64
        })
        .collect();
    let phases: Vec<f64> = (0..n_harm).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut phase = 0.0;
    for (i, o) in out.iter_mut().enumerate() {
        let f0 = f0_start + (f0_end - f0_start) * i as f64 / n as f64;
        phase += 2.0 * PI * f0 / fs;
        let v: f64 = gains
            .iter()
            .zip(&phases)
            .enumerate()
            .map(|(h, (g, p))| g * ((h + 1) as f64 * phase + p).sin())
            .sum();
        *o += v * hann_env(i, n);
    }
}

/// High-passed noise burst (fricative).
fn fricative(out: &mut [f64], rng: &mut ChaCha8Rng) {
    let n = out.len();
    let mut prev = 0.0;
    for (i, o) in out.iter_mut().enumerate() {
        let w: f64 = rng.sample(StandardNormal);
        *o += 0.15 * (w - prev) * hann_env(i, n);
        prev = w;
    }
}

fn speech_like(len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; len];
    let mut t = (rng.random_range(0.0..0.1) * fs) as usize;
    while t < len {
        let syl = ((rng.random_range(0.12..0.3) * fs) as usize).min(len - t);
        syllable(&mut x[t..t + syl], fs, rng);
        t += syl;
        let gap = (rng.random_range(0.03..0.2) * fs) as usize;
        if rng.random_bool(0.4) {
            let fr = ((rng.random_range(0.05..0.12) * fs) as usize).min(len.saturating_sub(t));
            fricative(&mut x[t..t + fr], rng);
        }
        t += gap;
    }
    x
}

/// A fixed four-syllable utterance at a random offset, silence elsewhere.
fn keyword(len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut tmpl_rng = ChaCha8Rng::seed_from_u64(KEYWORD_SEED);
    let syl = (0.18 * fs) as usize;
    let gap = (0.04 * fs) as usize;
    let mut tmpl = vec![0.0; 4 * syl + 3 * gap];
    for k in 0..4 {
        let start = k * (syl + gap);
        syllable(&mut tmpl[start..start + syl], fs, &mut tmpl_rng);
    }
    let mut x = vec![0.0; len];
    let slack = len.saturating_sub(tmpl.len());
    let offset = if slack > 0 { rng.random_range(0..=slack) } else { 0 };
    for (o, v) in x[offset..].iter_mut().zip(&tmpl) {
        *o = *v;
    }
    x
}

/// Paul Kellet's economy pink filter on white noise.
fn pink(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    (0..len)
        .map(|_| {
            let w: f64 = rng.sample(StandardNormal);
            b0 = 0.99765 * b0 + w * 0.0990460;
            b1 = 0.96300 * b1 + w * 0.2965164;
            b2 = 0.57000 * b2 + w * 1.0526913;
            b0 + b1 + b2 + w * 0.1848
        })
        .collect()
}

fn music(len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; len];
    let mut t = 0;
    while t < len {
        let n = ((rng.random_range(0.2..0.5) * fs) as usize).min(len - t);
        let root = 110.0 * 2f64.powf(rng.random_range(0..24) as f64 / 12.0);
        for ratio in [1.0, 1.26, 1.5] {
            let f = root * ratio;
            for h in 1..=6 {
                let fh = f * h as f64;
                if fh > 7000.0 {
                    break;
                }
                let p: f64 = rng.random_range(0.0..2.0 * PI);
                for i in 0..n {
                    let decay = (-3.0 * i as f64 / n as f64).exp();
                    x[t + i] += decay / h as f64 * (2.0 * PI * fh * i as f64 / fs + p).sin();
                }
            }
        }
        t += n;
    }
    x
}

fn mechanical(len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; len];
    let mut t = 0;
    while t < len {
        let n = ((rng.random_range(0.15..0.6) * fs) as usize).min(len - t);
        let f_lo: f64 = rng.random_range(300.0..600.0);
        let f_hi = f_lo * rng.random_range(1.5..2.5);
        let mut phase = 0.0;
        for i in 0..n {
            let f = f_lo + (f_hi - f_lo) * i as f64 / n as f64;
            phase += 2.0 * PI * f / fs;
            let w: f64 = rng.sample(StandardNormal);
            let tone = phase.sin() + 0.5 * (2.0 * phase).sin() + 0.3 * (3.0 * phase).sin();
            x[t + i] += (tone + 0.2 * w) * hann_env(i, n);
        }
        // Gear click at the end of each movement.
        let click = ((0.01 * fs) as usize).min(len - t - n / 2);
        for i in 0..click {
            let w: f64 = rng.sample(StandardNormal);
            x[t + n / 2 + i] += 2.0 * w * (-(i as f64) / (0.002 * fs)).exp();
        }
        t += n + ((rng.random_range(0.05..0.3) * fs) as usize);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [SignalKind; 7] = [
        SignalKind::Speech,
        SignalKind::Keyword,
        SignalKind::WhiteNoise,
        SignalKind::PinkNoise,
        SignalKind::Babble,
        SignalKind::Music,
        SignalKind::Mechanical,
    ];

    #[test]
    fn deterministic_normalized_finite() {
        for kind in ALL {
            let a = synthesize(kind, 16_000, 16_000, 11);
            let b = synthesize(kind, 16_000, 16_000, 11);
            assert_eq!(a, b);
            assert_eq!(a.len(), 16_000);
            assert!(a.iter().all(|v| v.is_finite()));
            let rms = crate::audio::mean_square(&a).sqrt();
            assert!((rms - TARGET_RMS).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn keyword_template_is_fixed() {
        let a = synthesize(SignalKind::Keyword, 40_000, 16_000, 1);
        let b = synthesize(SignalKind::Keyword, 40_000, 16_000, 2);
        let nz = |x: &[f64]| x.iter().position(|&v| v != 0.0).unwrap();
        let (oa, ob) = (nz(&a), nz(&b));
        let n = 4 * 2880 + 3 * 640 - 10;
        for i in 0..n {
            assert!((a[oa + i] - b[ob + i]).abs() < 1e-12);
        }
    }

    #[test]
    fn short_lengths_do_not_panic() {
        for kind in ALL {
            for len in [0, 1, 100, 5000] {
                assert_eq!(synthesize(kind, len, 16_000, 3).len(), len);
            }
        }
    }
}
