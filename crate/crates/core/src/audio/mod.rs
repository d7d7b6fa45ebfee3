//! Multichannel PCM container, WAV I/O and the spectral front-ends.

mod features;
pub(crate) mod fft;
mod mel;
mod stft;
mod wav;

pub use features::{assemble_ssl_features, FeatureTensor, SSL_CHANNELS};
pub use fft::fft_convolve;
pub use mel::{hz_to_mel, mel_features, mel_to_hz, MelFeatures, LOG_FLOOR};
pub use stft::{frame_count as stft_frame_count, stft, Spectrogram, Window};
pub use wav::{read_wav, write_wav, RoleLayout};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// KWS frames: 25 ms window, 10 ms shift at 16 kHz.
pub const KWS_FRAME_LEN: usize = 400;
pub const KWS_HOP: usize = 160;
/// SSL frames: 32 ms window, 16 ms shift at 16 kHz.
pub const SSL_FRAME_LEN: usize = 512;
pub const SSL_HOP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelRole {
    Mic(u8),
    LoudspeakerRef(u8),
    Mono,
}

impl ChannelRole {
    /// Mic0..Mic3, Ref0, Ref1.
    pub fn alpha_mini() -> [ChannelRole; 6] {
        [
            ChannelRole::Mic(0),
            ChannelRole::Mic(1),
            ChannelRole::Mic(2),
            ChannelRole::Mic(3),
            ChannelRole::LoudspeakerRef(0),
            ChannelRole::LoudspeakerRef(1),
        ]
    }
}

/// Sample-rate-tagged real PCM matrix, one `Vec` per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelAudio {
    samples: Vec<Vec<f64>>,
    sample_rate: u32,
    roles: Vec<ChannelRole>,
}

impl MultiChannelAudio {
    pub fn new(samples: Vec<Vec<f64>>, sample_rate: u32, roles: Vec<ChannelRole>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::param("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::param("audio needs at least one channel"));
        }
        if roles.len() != samples.len() {
            return Err(Error::param(format!(
                "{} roles for {} channels",
                roles.len(),
                samples.len()
            )));
        }
        let len = samples[0].len();
        if samples.iter().any(|c| c.len() != len) {
            return Err(Error::param("channels differ in length"));
        }
        let six = roles.len() == 6 && roles.iter().any(|r| matches!(r, ChannelRole::LoudspeakerRef(_)));
        if six && roles[..] != ChannelRole::alpha_mini()[..] {
            return Err(Error::param(
                "six-channel layout must be Mic0..Mic3 followed by Ref0, Ref1",
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
            roles,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate, vec![ChannelRole::Mono])
    }

    /// Generic roles: `Mono` for one channel, `Mic(i)` otherwise.
    pub fn with_default_roles(samples: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        let roles = default_roles(samples.len());
        Self::new(samples, sample_rate, roles)
    }

    pub fn alpha_mini(samples: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if samples.len() != 6 {
            return Err(Error::param(format!(
                "alpha-mini layout needs 6 channels, got {}",
                samples.len()
            )));
        }
        Self::new(samples, sample_rate, ChannelRole::alpha_mini().to_vec())
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn roles(&self) -> &[ChannelRole] {
        &self.roles
    }

    pub fn is_alpha_mini(&self) -> bool {
        self.roles[..] == ChannelRole::alpha_mini()[..]
    }

    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.samples[idx]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.samples
    }

    /// Mean square of one channel.
    pub fn power(&self, idx: usize) -> f64 {
        mean_square(&self.samples[idx])
    }
}

pub(crate) fn default_roles(n: usize) -> Vec<ChannelRole> {
    if n == 1 {
        vec![ChannelRole::Mono]
    } else {
        (0..n).map(|i| ChannelRole::Mic(i as u8)).collect()
    }
}

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        let err = MultiChannelAudio::with_default_roles(vec![vec![0.0; 3], vec![0.0; 4]], 16_000);
        assert!(matches!(err, Err(Error::Parameter(_))));
    }

    #[test]
    fn rejects_zero_rate() {
        assert!(MultiChannelAudio::mono(vec![0.0], 0).is_err());
    }

    #[test]
    fn six_channel_roles_must_follow_layout() {
        let mut roles = ChannelRole::alpha_mini().to_vec();
        roles.swap(0, 4);
        assert!(MultiChannelAudio::new(vec![vec![0.0; 2]; 6], 16_000, roles).is_err());
        let ok = MultiChannelAudio::alpha_mini(vec![vec![0.0; 2]; 6], 16_000).unwrap();
        assert!(ok.is_alpha_mini());
    }
}
