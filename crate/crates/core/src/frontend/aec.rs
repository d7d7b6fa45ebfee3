use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::audio::energy;
use crate::error::{Error, Result};

/// Frequency-domain (overlap-save) NLMS echo canceller settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AecConfig {
    pub filter_len: usize,
    /// Samples processed per update; the FFT spans `2 * block_len`.
    pub block_len: usize,
    pub step_size: f64,
    /// Scaled by the mean reference power and FFT size.
    pub regularization: f64,
}

impl Default for AecConfig {
    fn default() -> Self {
        Self {
            filter_len: 4096,
            block_len: 4096,
            step_size: 0.5,
            regularization: 1e-6,
        }
    }
}

impl AecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.filter_len == 0 {
            return Err(Error::param("filter_len must be positive"));
        }
        if self.block_len < self.filter_len {
            return Err(Error::param("block_len must be at least filter_len"));
        }
        if !(self.step_size > 0.0 && self.step_size < 2.0) {
            return Err(Error::param("step_size must lie in (0, 2)"));
        }
        if !(self.regularization > 0.0) || !self.regularization.is_finite() {
            return Err(Error::param("regularization must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AecOutput {
    pub signal: Vec<f64>,
    /// False when the references were silent and the input passed through.
    pub adapted: bool,
}

/// Streaming two-reference FLMS canceller. Each reference drives its own
/// adaptive filter; the filter outputs are summed and share one error.
pub struct FlmsAec {
    cfg: AecConfig,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    weights: [Vec<Complex64>; 2],
    history: [Vec<f64>; 2],
    power: Vec<f64>,
    delta: f64,
}

/// Forgetting factor of the per-bin reference power estimate.
const POWER_SMOOTHING: f64 = 0.9;

impl FlmsAec {
    /// `ref_power` is the mean power of the references; it sets the
    /// regularization floor.
    pub fn new(cfg: AecConfig, ref_power: f64) -> Result<Self> {
        cfg.validate()?;
        let n = 2 * cfg.block_len;
        let mut planner = FftPlanner::new();
        Ok(Self {
            cfg,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            weights: [vec![Complex64::default(); n], vec![Complex64::default(); n]],
            history: [vec![0.0; cfg.block_len], vec![0.0; cfg.block_len]],
            power: vec![0.0; n],
            delta: cfg.regularization * n as f64 * ref_power.max(f64::MIN_POSITIVE),
        })
    }

    pub fn block_len(&self) -> usize {
        self.cfg.block_len
    }

    /// Processes one block of `block_len` samples and returns the residual.
    pub fn process_block(&mut self, mic: &[f64], refs: [&[f64]; 2]) -> Vec<f64> {
        let b = self.cfg.block_len;
        let n = self.n;
        assert!(mic.len() == b && refs.iter().all(|r| r.len() == b));

        let spectra: [Vec<Complex64>; 2] = [0, 1].map(|r| {
            let mut buf: Vec<Complex64> = self.history[r]
                .iter()
                .chain(refs[r])
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            self.fwd.process(&mut buf);
            self.history[r].copy_from_slice(refs[r]);
            buf
        });

        let mut y: Vec<Complex64> = (0..n)
            .map(|k| spectra[0][k] * self.weights[0][k] + spectra[1][k] * self.weights[1][k])
            .collect();
        self.inv.process(&mut y);
        let scale = 1.0 / n as f64;
        let err: Vec<f64> = mic.iter().zip(&y[b..]).map(|(d, yv)| d - yv.re * scale).collect();

        let mut e: Vec<Complex64> = std::iter::repeat_n(Complex64::default(), b)
            .chain(err.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        self.fwd.process(&mut e);

        for (p, (s0, s1)) in self.power.iter_mut().zip(spectra[0].iter().zip(&spectra[1])) {
            let current = s0.norm_sqr() + s1.norm_sqr();
            let smoothed = POWER_SMOOTHING * *p + (1.0 - POWER_SMOOTHING) * current;
            *p = smoothed.max(current);
        }

        for (r, spectrum) in spectra.iter().enumerate() {
            let mut g: Vec<Complex64> = spectrum
                .iter()
                .zip(&e)
                .zip(&self.power)
                .map(|((x, ek), p)| x.conj() * ek / (p + self.delta))
                .collect();
            // Gradient constraint: keep only the causal first `filter_len` taps.
            self.inv.process(&mut g);
            for v in &mut g[self.cfg.filter_len..] {
                *v = Complex64::default();
            }
            self.fwd.process(&mut g);
            for (w, gv) in self.weights[r].iter_mut().zip(&g) {
                *w += gv * (self.cfg.step_size * scale);
            }
        }
        err
    }
}

/// Cancels the echo of two loudspeaker references from one microphone.
/// Blocks whose residual would be louder than the microphone are passed
/// through, so the output never gains energy block by block.
pub fn flms_aec(mic: &[f64], refs: [&[f64]; 2], cfg: &AecConfig) -> Result<AecOutput> {
    cfg.validate()?;
    if refs.iter().any(|r| r.len() != mic.len()) {
        return Err(Error::param("microphone and reference lengths differ"));
    }
    if refs.iter().all(|r| r.iter().all(|&v| v == 0.0)) {
        return Ok(AecOutput {
            signal: mic.to_vec(),
            adapted: false,
        });
    }
    let ref_power = refs.iter().map(|r| crate::audio::mean_square(r)).sum::<f64>() / 2.0;
    let mut aec = FlmsAec::new(*cfg, ref_power)?;
    let b = aec.block_len();
    let mut out = Vec::with_capacity(mic.len() + b);
    let mut pad = [vec![0.0; b], vec![0.0; b], vec![0.0; b]];
    for start in (0..mic.len()).step_by(b) {
        let end = (start + b).min(mic.len());
        let chunk = |x: &[f64], buf: &mut Vec<f64>| {
            buf.fill(0.0);
            buf[..end - start].copy_from_slice(&x[start..end]);
        };
        let [pm, p0, p1] = &mut pad;
        chunk(mic, pm);
        chunk(refs[0], p0);
        chunk(refs[1], p1);
        let n = end - start;
        let residual = aec.process_block(pm, [p0, p1]);
        // A block the filter made louder is passed through unchanged.
        if energy(&residual[..n]) > energy(&pm[..n]) {
            out.extend_from_slice(&pm[..n]);
        } else {
            out.extend_from_slice(&residual[..n]);
        }
    }
    out.truncate(mic.len());
    Ok(AecOutput {
        signal: out,
        adapted: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::fft_convolve;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn gauss(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn through(x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut y = fft_convolve(x, h);
        y.truncate(x.len());
        y
    }

    fn erle_last_second(echo: &[f64], residual: &[f64]) -> f64 {
        let s = echo.len() - 16_000;
        10.0 * (energy(&echo[s..]) / energy(&residual[s..])).log10()
    }

    #[test]
    fn silent_references_pass_through() {
        let mic = gauss(10_000, 1);
        let z = vec![0.0; 10_000];
        let out = flms_aec(&mic, [&z, &z], &AecConfig::default()).unwrap();
        assert!(!out.adapted);
        assert_eq!(out.signal, mic);
    }

    #[test]
    fn pure_delay_echo() {
        let x = gauss(160_000, 2);
        let mut h = vec![0.0; 33];
        h[32] = 0.5;
        let echo = through(&x, &h);
        let z = vec![0.0; x.len()];
        let out = flms_aec(&echo, [&x, &z], &AecConfig::default()).unwrap();
        assert_eq!(out.signal.len(), echo.len());
        assert!(erle_last_second(&echo, &out.signal) >= 10.0);
    }

    #[test]
    fn two_references_dispersive_path() {
        let n = 160_000;
        let x0 = gauss(n, 3);
        let x1 = gauss(n, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let path = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..3000).map(|t| rng.sample::<f64, _>(StandardNormal) * (-(t as f64) / 600.0).exp() * 0.1).collect()
        };
        let h0 = path(&mut rng);
        let h1 = path(&mut rng);
        let echo: Vec<f64> = through(&x0, &h0).iter().zip(through(&x1, &h1)).map(|(a, b)| a + b).collect();
        let out = flms_aec(&echo, [&x0, &x1], &AecConfig::default()).unwrap();
        assert!(erle_last_second(&echo, &out.signal) >= 10.0);
    }

    #[test]
    fn near_end_preserved() {
        let n = 160_000;
        let x = gauss(n, 6);
        let mut h = vec![0.0; 200];
        h[40] = 0.4;
        h[199] = -0.2;
        let echo = through(&x, &h);
        // Speech-like near end: modulated coloured noise.
        let raw = gauss(n, 7);
        let near: Vec<f64> = raw
            .windows(3)
            .enumerate()
            .map(|(t, w)| (w[0] + w[1] + w[2]) * (1.0 + (t as f64 / 2000.0).sin()).max(0.0))
            .chain([0.0, 0.0])
            .collect();
        let g = (energy(&echo) / energy(&near)).sqrt();
        let near: Vec<f64> = near.iter().map(|v| v * g).collect();
        let mic: Vec<f64> = echo.iter().zip(&near).map(|(a, b)| a + b).collect();
        let z = vec![0.0; n];
        let out = flms_aec(&mic, [&x, &z], &AecConfig::default()).unwrap();
        let s = n - 32_000;
        let change = 10.0 * (energy(&out.signal[s..]) / energy(&near[s..])).log10();
        assert!(change.abs() <= 3.0, "{change}");
    }

    #[test]
    fn never_amplifies_beyond_three_db() {
        let n = 64_000;
        let z = vec![0.0; n];
        let cases: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = vec![
            // Loud unrelated reference, quiet mic.
            (gauss(n, 10).iter().map(|v| v * 1e-3).collect(), gauss(n, 11).iter().map(|v| v * 100.0).collect(), z.clone()),
            // Loud near end, quiet reference.
            (gauss(n, 12).iter().map(|v| v * 10.0).collect(), gauss(n, 13).iter().map(|v| v * 1e-4).collect(), z.clone()),
            // Reference bursts after long silence.
            (gauss(n, 14), (0..n).map(|t| if t > 40_000 { 50.0 * ((t as f64) * 0.3).sin() } else { 0.0 }).collect(), z.clone()),
            // Identical references, mic unrelated.
            (gauss(n, 15), gauss(n, 16), gauss(n, 16)),
            // Reference is a pure tone.
            (gauss(n, 17), (0..n).map(|t| (t as f64 * 0.05).sin()).collect(), z.clone()),
        ];
        for (i, (mic, r0, r1)) in cases.iter().enumerate() {
            let out = flms_aec(mic, [r0, r1], &AecConfig::default()).unwrap();
            let gain = 10.0 * (energy(&out.signal) / energy(mic)).log10();
            assert!(gain <= 3.0, "case {i}: {gain}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            AecConfig { filter_len: 0, ..Default::default() },
            AecConfig { block_len: 100, ..Default::default() },
            AecConfig { step_size: 2.0, ..Default::default() },
            AecConfig { regularization: 0.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
        let x = vec![1.0; 10];
        assert!(flms_aec(&x, [&x[..9], &x], &AecConfig::default()).is_err());
    }
}
