use super::stft::Spectrogram;
use crate::error::{Error, Result};

/// Floor applied to mel-weighted power before the log.
pub const LOG_FLOOR: f64 = 1e-10;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Log mel filterbank energies, `frames × n_mels`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFeatures {
    pub values: Vec<Vec<f64>>,
    pub n_mels: usize,
    pub frame_len: usize,
    pub hop: usize,
}

/// Triangular filters with edges equally spaced on the mel scale between
/// 0 Hz and Nyquist, evaluated at the FFT bin centres.
pub(crate) fn filterbank(n_mels: usize, frame_len: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = frame_len / 2 + 1;
    let nyquist = f64::from(sample_rate) / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz: Vec<f64> = (0..n_bins)
        .map(|k| k as f64 * f64::from(sample_rate) / frame_len as f64)
        .collect();
    (0..n_mels)
        .map(|m| {
            let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            bin_hz
                .iter()
                .map(|&f| {
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= centre {
                        (f - lo) / (centre - lo)
                    } else {
                        (hi - f) / (hi - centre)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mel_features(spec: &Spectrogram, n_mels: usize, sample_rate: u32) -> Result<MelFeatures> {
    let n_bins = spec.num_bins();
    if n_mels == 0 || n_mels > n_bins {
        return Err(Error::param(format!(
            "n_mels = {n_mels} must be in 1..={n_bins}"
        )));
    }
    if spec.bins.is_empty() {
        return Err(Error::param("empty spectrogram"));
    }
    let bank = filterbank(n_mels, spec.frame_len, sample_rate);
    let values = spec
        .bins
        .iter()
        .map(|frame| {
            let power: Vec<f64> = frame.iter().map(|c| c.norm_sqr()).collect();
            bank.iter()
                .map(|w| {
                    let e: f64 = w.iter().zip(&power).map(|(a, p)| a * p).sum();
                    e.max(LOG_FLOOR).ln()
                })
                .collect()
        })
        .collect();
    Ok(MelFeatures {
        values,
        n_mels,
        frame_len: spec.frame_len,
        hop: spec.hop,
    })
}
