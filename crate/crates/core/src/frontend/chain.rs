use super::aec::{flms_aec, AecConfig};
use super::dsbf::dsbf;
use super::srp::{srp_phat_doa, SteeringGrid, DEFAULT_UPSAMPLE};
use crate::audio::MultiChannelAudio;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::room::{DeviceGeometry, SPEED_OF_SOUND};
use crate::ssl::{decide_doa, DoaDistribution};

/// Settings for the AEC → SRP-PHAT → decision → DSBF chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// `None` skips echo cancellation.
    pub aec: Option<AecConfig>,
    pub upsample: usize,
    pub speed_of_sound: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            aec: Some(AecConfig::default()),
            upsample: DEFAULT_UPSAMPLE,
            speed_of_sound: SPEED_OF_SOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub doa: u16,
    pub profile: DoaDistribution,
    /// Beamformed mono signal steered at `doa`.
    pub beam: Vec<f64>,
    /// Whether any mic channel went through an adapting canceller.
    pub aec_adapted: bool,
}

/// Runs the classical front-end on a recording whose first four channels
/// are the array mics and, when AEC is on, channels 4 and 5 the references.
/// The speech/non-speech weighting of the decision is all ones.
pub fn run_chain(audio: &MultiChannelAudio, cfg: &ChainConfig, exec: Execution) -> Result<ChainOutput> {
    if audio.num_channels() < 4 {
        return Err(Error::param(format!("need 4 mic channels, got {}", audio.num_channels())));
    }
    let mut adapted = false;
    let mics: Vec<Vec<f64>> = match &cfg.aec {
        Some(aec) => {
            if audio.num_channels() < 6 {
                return Err(Error::param("AEC requested but reference channels 4 and 5 are missing"));
            }
            let refs = [audio.channel(4), audio.channel(5)];
            let out = par::map_range(exec, 4, |m| flms_aec(audio.channel(m), refs, aec))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            adapted = out.iter().any(|o| o.adapted);
            out.into_iter().map(|o| o.signal).collect()
        }
        None => (0..4).map(|m| audio.channel(m).to_vec()).collect(),
    };
    let geometry = DeviceGeometry::at([0.0; 3], 0.0);
    let grid = SteeringGrid::new(&geometry, audio.sample_rate(), cfg.speed_of_sound, cfg.upsample)?;
    let chans = [&mics[0][..], &mics[1][..], &mics[2][..], &mics[3][..]];
    let profile = srp_phat_doa(chans, &grid, exec)?;
    let doa = decide_doa(&profile, &DoaDistribution::uniform(1.0))?;
    let beam = dsbf(chans, &geometry, doa, audio.sample_rate(), cfg.speed_of_sound)?;
    Ok(ChainOutput {
        doa,
        profile,
        beam,
        aec_adapted: adapted,
    })
}
