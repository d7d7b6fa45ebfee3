use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::audio::fft::rfft_padded;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Magnitude floor of the PHAT weighting.
pub const PHAT_FLOOR: f64 = 1e-12;

/// GCC-PHAT values on the lag grid `-max_lag ..= max_lag` in steps of
/// `1/upsample` samples. Lag τ holds `Σ_n a[n+τ]·b[n]` (whitened), so a
/// peak at τ means `b` lags `a` by `−τ` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorr {
    pub values: Vec<f64>,
    pub max_lag: usize,
    pub upsample: usize,
}

impl CrossCorr {
    pub fn lag_of(&self, index: usize) -> f64 {
        index as f64 / self.upsample as f64 - self.max_lag as f64
    }

    /// Value at the grid lag nearest to `lag` (clamped to the grid).
    pub fn value_near(&self, lag: f64) -> f64 {
        let i = ((lag + self.max_lag as f64) * self.upsample as f64).round();
        let i = i.clamp(0.0, (self.values.len() - 1) as f64) as usize;
        self.values[i]
    }

    /// Lag of the largest value; earliest grid index on ties.
    pub fn argmax_lag(&self) -> f64 {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        self.lag_of(best)
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Frames more than 20 dB below the loudest frame are left out of framed GCC.
const FRAME_GATE: f64 = 0.01;
/// Energy rise (about 1.8 dB) that marks a frame as an onset.
const ONSET_RATIO: f64 = 1.5;

/// Half-spectrum of the PHAT-weighted cross-power, evaluable at any lag.
pub(crate) struct PhatSpectrum {
    half: Vec<Complex64>,
    n: usize,
}

impl PhatSpectrum {
    pub(crate) fn new(a: &[f64], b: &[f64], max_lag: usize) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::param("GCC-PHAT inputs differ in length"));
        }
        if a.len() < 2 * max_lag || a.is_empty() {
            return Err(Error::param(format!(
                "signal length {} shorter than 2·max_lag = {}",
                a.len(),
                2 * max_lag
            )));
        }
        if a.iter().all(|&v| v == 0.0) || b.iter().all(|&v| v == 0.0) {
            return Err(Error::degenerate("GCC-PHAT of an all-zero signal"));
        }
        let n = (2 * a.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fa = rfft_padded(&mut planner, a, n);
        let fb = rfft_padded(&mut planner, b, n);
        let half = fa[..=n / 2]
            .iter()
            .zip(&fb[..=n / 2])
            .map(|(x, y)| {
                let c = x * y.conj();
                c / c.norm().max(PHAT_FLOOR)
            })
            .collect();
        Ok(Self { half, n })
    }

    /// Whitened cross-spectra of half-overlapping Hann frames, averaged over
    /// the frames that are within 20 dB of the loudest one and louder than
    /// their predecessor (all gated frames if none is). Bins outside `band`
    /// (cycles per sample) are zeroed. Falls back to [`PhatSpectrum::new`]
    /// when the signal is shorter than one frame.
    pub(crate) fn framed(a: &[f64], b: &[f64], max_lag: usize, frame: usize, band: [f64; 2]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::param("GCC-PHAT inputs differ in length"));
        }
        if frame < 2 * max_lag.max(1) {
            return Err(Error::param(format!("frame length {frame} shorter than 2·max_lag = {}", 2 * max_lag)));
        }
        if !(0.0 <= band[0] && band[0] < band[1] && band[1] <= 0.5) {
            return Err(Error::param(format!("band {band:?} outside 0 ≤ lo < hi ≤ 0.5")));
        }
        if a.len() < frame {
            return Self::new(a, b, max_lag);
        }
        if a.iter().all(|&v| v == 0.0) || b.iter().all(|&v| v == 0.0) {
            return Err(Error::degenerate("GCC-PHAT of an all-zero signal"));
        }
        let n = (2 * frame).next_power_of_two();
        let window: Vec<f64> = (0..frame)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / frame as f64).cos())
            .collect();
        let starts: Vec<usize> = (0..=a.len() - frame).step_by(frame / 2).collect();
        let power = |x: &[f64], s: usize| x[s..s + frame].iter().map(|v| v * v).sum::<f64>();
        let energies: Vec<f64> = starts.iter().map(|&s| power(a, s) + power(b, s)).collect();
        let loudest = energies.iter().copied().fold(0.0, f64::max);
        let gated: Vec<usize> = (0..starts.len())
            .filter(|&k| energies[k] > 0.0 && energies[k] >= loudest * FRAME_GATE)
            .collect();
        let onsets: Vec<usize> = gated
            .iter()
            .copied()
            .filter(|&k| k == 0 || energies[k] > energies[k - 1] * ONSET_RATIO)
            .collect();
        let chosen = if onsets.is_empty() { gated } else { onsets };

        let lo = (band[0] * n as f64).ceil() as usize;
        let hi = ((band[1] * n as f64).floor() as usize).min(n / 2);
        let mut planner = FftPlanner::new();
        let mut half = vec![Complex64::default(); n / 2 + 1];
        for &k in &chosen {
            let s = starts[k];
            let wa: Vec<f64> = a[s..s + frame].iter().zip(&window).map(|(x, w)| x * w).collect();
            let wb: Vec<f64> = b[s..s + frame].iter().zip(&window).map(|(x, w)| x * w).collect();
            let fa = rfft_padded(&mut planner, &wa, n);
            let fb = rfft_padded(&mut planner, &wb, n);
            for bin in lo..=hi {
                let c = fa[bin] * fb[bin].conj();
                half[bin] += c / c.norm().max(PHAT_FLOOR);
            }
        }
        let scale = 1.0 / chosen.len() as f64;
        half.iter_mut().for_each(|h| *h *= scale);
        Ok(Self { half, n })
    }

    /// Band-limited inverse transform at a (possibly fractional) lag.
    pub(crate) fn at(&self, lag: f64) -> f64 {
        let n = self.n;
        let w = 2.0 * PI * lag / n as f64;
        let mut acc = self.half[0].re + self.half[n / 2].re * (PI * lag).cos();
        let step = Complex64::from_polar(1.0, w);
        let mut rot = step;
        let mut inner = 0.0;
        for (k, c) in self.half[1..n / 2].iter().enumerate() {
            // Re-anchor the rotating phasor periodically to bound drift.
            if k % 1024 == 1023 {
                rot = Complex64::from_polar(1.0, w * (k + 1) as f64);
            }
            inner += c.re * rot.re - c.im * rot.im;
            rot *= step;
        }
        acc += 2.0 * inner;
        acc / n as f64
    }

    /// Exact values at integer lags via one inverse FFT.
    pub(crate) fn integer_lags(&self, max_lag: usize) -> Vec<f64> {
        let n = self.n;
        let mut full = vec![Complex64::default(); n];
        full[..=n / 2].copy_from_slice(&self.half);
        for k in 1..n / 2 {
            full[n - k] = self.half[k].conj();
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut full);
        let m = max_lag as i64;
        (-m..=m)
            .map(|l| full[l.rem_euclid(n as i64) as usize].re / n as f64)
            .collect()
    }
}

/// GCC-PHAT at integer lags.
pub fn gcc_phat(a: &[f64], b: &[f64], max_lag: usize) -> Result<CrossCorr> {
    let spec = PhatSpectrum::new(a, b, max_lag)?;
    Ok(CrossCorr {
        values: spec.integer_lags(max_lag),
        max_lag,
        upsample: 1,
    })
}

/// GCC-PHAT on a lag grid refined by `upsample`, using band-limited
/// interpolation of the whitened cross-spectrum.
pub fn gcc_phat_upsampled(a: &[f64], b: &[f64], max_lag: usize, upsample: usize, exec: Execution) -> Result<CrossCorr> {
    if upsample == 0 {
        return Err(Error::param("upsample factor must be positive"));
    }
    let spec = PhatSpectrum::new(a, b, max_lag)?;
    let count = 2 * max_lag * upsample + 1;
    let values = par::map_range(exec, count, |i| {
        spec.at(i as f64 / upsample as f64 - max_lag as f64)
    });
    Ok(CrossCorr {
        values,
        max_lag,
        upsample,
    })
}

/// Like [`gcc_phat_upsampled`], but averages the whitened cross-spectra of
/// loud onset frames of `frame_len` samples, restricted to `band` (in cycles
/// per sample).
pub fn gcc_phat_framed(
    a: &[f64],
    b: &[f64],
    max_lag: usize,
    upsample: usize,
    frame_len: usize,
    band: [f64; 2],
    exec: Execution,
) -> Result<CrossCorr> {
    if upsample == 0 {
        return Err(Error::param("upsample factor must be positive"));
    }
    let spec = PhatSpectrum::framed(a, b, max_lag, frame_len, band)?;
    let count = 2 * max_lag * upsample + 1;
    let values = par::map_range(exec, count, |i| {
        spec.at(i as f64 / upsample as f64 - max_lag as f64)
    });
    Ok(CrossCorr {
        values,
        max_lag,
        upsample,
    })
}
