use crate::error::{Error, Result};
use crate::room::DeviceGeometry;

/// Per-mic arrival offsets for `doa`, rounded to whole samples.
pub fn steering_shifts(geometry: &DeviceGeometry, doa: u16, sample_rate: u32, speed_of_sound: f64) -> Result<[i64; 4]> {
    if !(1..=360).contains(&doa) {
        return Err(Error::param(format!("doa {doa} outside 1..=360")));
    }
    if !(speed_of_sound > 0.0) {
        return Err(Error::param("speed of sound must be positive"));
    }
    Ok(geometry
        .plane_wave_delays(doa as f64, speed_of_sound)
        .map(|d| (d * sample_rate as f64).round() as i64))
}

/// Delay-and-sum beamformer: mean of the channels, each advanced by its
/// expected delay toward `doa`. Samples shifted in from outside are zero.
pub fn dsbf(mics: [&[f64]; 4], geometry: &DeviceGeometry, doa: u16, sample_rate: u32, speed_of_sound: f64) -> Result<Vec<f64>> {
    let n = mics[0].len();
    if mics.iter().any(|m| m.len() != n) {
        return Err(Error::param("microphone channels differ in length"));
    }
    let shifts = steering_shifts(geometry, doa, sample_rate, speed_of_sound)?;
    let mut out = vec![0.0; n];
    for (m, &d) in mics.iter().zip(&shifts) {
        for (t, o) in out.iter_mut().enumerate() {
            let k = t as i64 + d;
            if k >= 0 && (k as usize) < n {
                *o += m[k as usize];
            }
        }
    }
    for o in &mut out {
        *o /= 4.0;
    }
    Ok(out)
}
