use std::f64::consts::PI;

use num_complex::Complex64;

use super::stft::{stft, Window};
use super::MultiChannelAudio;
use crate::error::{Error, Result};

/// Channels fed to the SSL feature tensor: four mics plus the first reference.
pub const SSL_CHANNELS: usize = 5;

/// `[2C × F × T]` tensor: C magnitude planes followed by C phase planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    values: Vec<f64>,
    channels: usize,
    freq_bins: usize,
    frames: usize,
}

impl FeatureTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (2 * self.channels, self.freq_bins, self.frames)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    fn offset(&self, plane: usize, f: usize, t: usize) -> usize {
        (plane * self.freq_bins + f) * self.frames + t
    }

    pub fn get(&self, plane: usize, f: usize, t: usize) -> f64 {
        self.values[self.offset(plane, f, t)]
    }

    pub fn magnitude(&self, channel: usize, f: usize, t: usize) -> f64 {
        self.get(channel, f, t)
    }

    pub fn phase(&self, channel: usize, f: usize, t: usize) -> f64 {
        self.get(self.channels + channel, f, t)
    }

    /// Recombines the magnitude and phase planes into a complex bin.
    pub fn complex(&self, channel: usize, f: usize, t: usize) -> Complex64 {
        Complex64::from_polar(self.magnitude(channel, f, t), self.phase(channel, f, t))
    }

    /// Row-major `[plane][freq][frame]` storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Phase in (−π, π].
fn principal_phase(c: Complex64) -> f64 {
    let p = c.im.atan2(c.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

pub fn assemble_ssl_features(
    audio: &MultiChannelAudio,
    frame_len: usize,
    hop: usize,
) -> Result<FeatureTensor> {
    if audio.num_channels() < SSL_CHANNELS {
        return Err(Error::param(format!(
            "SSL features need {SSL_CHANNELS} channels, got {}",
            audio.num_channels()
        )));
    }
    let specs = (0..SSL_CHANNELS)
        .map(|c| stft(audio.channel(c), frame_len, hop, Window::Hann))
        .collect::<Result<Vec<_>>>()?;
    let frames = specs[0].num_frames();
    let freq_bins = specs[0].num_bins();
    let mut t = FeatureTensor {
        values: vec![0.0; 2 * SSL_CHANNELS * freq_bins * frames],
        channels: SSL_CHANNELS,
        freq_bins,
        frames,
    };
    for (c, spec) in specs.iter().enumerate() {
        for (ti, frame) in spec.bins.iter().enumerate() {
            for (f, &bin) in frame.iter().enumerate() {
                let m = t.offset(c, f, ti);
                let p = t.offset(SSL_CHANNELS + c, f, ti);
                t.values[m] = bin.norm();
                t.values[p] = principal_phase(bin);
            }
        }
    }
    Ok(t)
}
