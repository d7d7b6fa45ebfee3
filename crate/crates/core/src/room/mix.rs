use super::super::audio::{mean_square, MultiChannelAudio};
use crate::error::{Error, Result};

/// Gain that brings an interferer of power `interferer_power` to
/// `ratio_db` below a target of power `target_power`.
pub fn ratio_gain(target_power: f64, interferer_power: f64, ratio_db: f64) -> Result<f64> {
    if !(target_power > 0.0) {
        return Err(Error::degenerate("target has zero power"));
    }
    if !(interferer_power > 0.0) {
        return Err(Error::degenerate("interferer has zero power"));
    }
    Ok((target_power / (interferer_power * 10f64.powf(ratio_db / 10.0))).sqrt())
}

/// `target + g · interferer`, with `g` set so the channel-0 power ratio is
/// `ratio_db`.
pub fn mix_at_ratio(
    target: &MultiChannelAudio,
    interferer: &MultiChannelAudio,
    ratio_db: f64,
) -> Result<MultiChannelAudio> {
    if target.len() != interferer.len() || target.num_channels() != interferer.num_channels() {
        return Err(Error::param("target and interferer shapes differ"));
    }
    if target.sample_rate() != interferer.sample_rate() {
        return Err(Error::param("target and interferer sample rates differ"));
    }
    let g = ratio_gain(mean_square(target.channel(0)), mean_square(interferer.channel(0)), ratio_db)?;
    let mixed = target
        .channels()
        .iter()
        .zip(interferer.channels())
        .map(|(t, i)| t.iter().zip(i).map(|(a, b)| a + g * b).collect())
        .collect();
    MultiChannelAudio::new(mixed, target.sample_rate(), target.roles().to_vec())
}
