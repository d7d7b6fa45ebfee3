use super::gcc::{gcc_phat_framed, CrossCorr};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::room::DeviceGeometry;
use crate::ssl::{DoaDistribution, NUM_AZIMUTHS};

/// Microphone pairs scanned by SRP-PHAT.
pub const MIC_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Lag-grid refinement used when looking up GCC-PHAT values.
pub const DEFAULT_UPSAMPLE: usize = 64;

/// Analysis frame of the framed GCC-PHAT behind SRP (32 ms at 16 kHz).
pub const DEFAULT_FRAME_LEN: usize = 512;

/// Frequency band scanned by SRP, Hz.
pub const DEFAULT_BAND_HZ: [f64; 2] = [200.0, 4000.0];

/// Expected far-field TDOAs for every pair and azimuth 1..=360.
///
/// The grid lives in the device frame, so it does not depend on the heading.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringGrid {
    /// `tdoa[p][az - 1]`: arrival at mic `i` minus arrival at mic `j`, seconds.
    pub tdoa: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub speed_of_sound: f64,
    pub upsample: usize,
    /// GCC-PHAT frame length in samples.
    pub frame_len: usize,
    /// PHAT band in Hz; clipped to Nyquist.
    pub band_hz: [f64; 2],
    aperture: f64,
}

impl SteeringGrid {
    pub fn new(geometry: &DeviceGeometry, sample_rate: u32, speed_of_sound: f64, upsample: usize) -> Result<Self> {
        if sample_rate == 0 || !(speed_of_sound > 0.0) || upsample == 0 {
            return Err(Error::param("steering grid needs positive rate, speed and upsample"));
        }
        let delays: Vec<[f64; 4]> = (1..=NUM_AZIMUTHS)
            .map(|az| geometry.plane_wave_delays(az as f64, speed_of_sound))
            .collect();
        let tdoa = MIC_PAIRS
            .iter()
            .map(|&(i, j)| delays.iter().map(|d| d[i] - d[j]).collect())
            .collect();
        let mut aperture: f64 = 0.0;
        for a in &geometry.mics {
            for b in &geometry.mics {
                aperture = aperture.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt());
            }
        }
        Ok(Self {
            tdoa,
            sample_rate,
            speed_of_sound,
            upsample,
            frame_len: DEFAULT_FRAME_LEN,
            band_hz: DEFAULT_BAND_HZ,
            aperture,
        })
    }

    /// Largest microphone separation.
    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Integer lag bound covering every expected TDOA.
    pub fn max_lag(&self) -> usize {
        (self.aperture / self.speed_of_sound * self.sample_rate as f64).ceil() as usize + 1
    }
}

fn check_channels(mics: [&[f64]; 4]) -> Result<usize> {
    let n = mics[0].len();
    if mics.iter().any(|m| m.len() != n) {
        return Err(Error::param("microphone channels differ in length"));
    }
    Ok(n)
}

/// Raw steered-response power per azimuth (index `az - 1`).
pub fn srp_phat_scores(mics: [&[f64]; 4], grid: &SteeringGrid, exec: Execution) -> Result<Vec<f64>> {
    check_channels(mics)?;
    let max_lag = grid.max_lag();
    let fs = grid.sample_rate as f64;
    let band = grid.band_hz.map(|f| (f / fs).min(0.5));
    let ccs: Vec<Result<CrossCorr>> = par::map(exec, &MIC_PAIRS, |&(i, j)| {
        gcc_phat_framed(mics[i], mics[j], max_lag, grid.upsample, grid.frame_len, band, Execution::Sequential)
    });
    let ccs = ccs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..NUM_AZIMUTHS)
        .map(|a| ccs.iter().zip(&grid.tdoa).map(|(cc, t)| cc.value_near(t[a] * fs)).sum())
        .collect())
}

/// SRP-PHAT azimuth distribution: scores shifted to a zero minimum and
/// normalized to sum 1 (uniform when the profile is flat).
pub fn srp_phat_doa(mics: [&[f64]; 4], grid: &SteeringGrid, exec: Execution) -> Result<DoaDistribution> {
    let scores = srp_phat_scores(mics, grid, exec)?;
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = scores.iter().map(|s| s - min).collect();
    let total: f64 = shifted.iter().sum();
    if !(total > 0.0) {
        return Ok(DoaDistribution::uniform(1.0 / NUM_AZIMUTHS as f64));
    }
    DoaDistribution::new(shifted.into_iter().map(|s| s / total).collect())
}
