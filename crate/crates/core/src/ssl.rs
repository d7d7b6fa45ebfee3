//! SSL targets and decisions on the integer azimuth grid 1..=360.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const NUM_AZIMUTHS: usize = 360;
/// Default Gaussian width of the SSL target, in degrees.
pub const DEFAULT_SIGMA: f64 = 45.0;

fn check_azimuth(a: u16) -> Result<()> {
    if (1..=360).contains(&a) {
        Ok(())
    } else {
        Err(Error::param(format!("azimuth {a} outside 1..=360")))
    }
}

/// Circular distance `min(|a−b|, 360−|a−b|)`, in [0, 180].
pub fn angle_distance(a: u16, b: u16) -> Result<u16> {
    check_azimuth(a)?;
    check_azimuth(b)?;
    Ok(circular(a, b))
}

fn circular(a: u16, b: u16) -> u16 {
    let d = a.abs_diff(b);
    d.min(360 - d)
}

/// A value per azimuth; index `i` holds azimuth `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaDistribution {
    values: Vec<f64>,
}

impl DoaDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != NUM_AZIMUTHS {
            return Err(Error::param(format!("expected 360 values, got {}", values.len())));
        }
        Ok(Self { values })
    }

    pub fn uniform(v: f64) -> Self {
        Self {
            values: vec![v; NUM_AZIMUTHS],
        }
    }

    pub fn at(&self, azimuth: u16) -> f64 {
        self.values[usize::from(azimuth) - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Azimuth of the largest value; ties go to the smallest azimuth.
    pub fn argmax(&self) -> u16 {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best as u16 + 1
    }

    /// Circular shift so that the value at azimuth θ moves to θ + φ.
    pub fn rotated(&self, phi: i32) -> Self {
        let shift = phi.rem_euclid(360) as usize;
        let mut values = vec![0.0; NUM_AZIMUTHS];
        for (i, &v) in self.values.iter().enumerate() {
            values[(i + shift) % NUM_AZIMUTHS] = v;
        }
        Self { values }
    }

    /// 360 comma-separated reals.
    pub fn to_csv_line(&self) -> String {
        let mut s = String::with_capacity(NUM_AZIMUTHS * 8);
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{v}").expect("write to String");
        }
        s
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let values = line
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::param(format!("bad value {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

fn check_angles(angles: &[u16]) -> Result<()> {
    angles.iter().try_for_each(|&a| check_azimuth(a))
}

/// Maximum over all source angles of `exp(−d(θ_i, θ̄)² / σ²)`.
pub fn encode_ssl_target(speech: &[u16], noise: &[u16], sigma: f64) -> Result<DoaDistribution> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma must be positive"));
    }
    check_angles(speech)?;
    check_angles(noise)?;
    if speech.is_empty() && noise.is_empty() {
        return Err(Error::param("no source angles"));
    }
    let values = (1..=NUM_AZIMUTHS as u16)
        .map(|i| {
            speech
                .iter()
                .chain(noise)
                .map(|&s| {
                    let d = f64::from(circular(i, s));
                    (-(d * d) / (sigma * sigma)).exp()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(DoaDistribution { values })
}

/// 1 where the nearest source angle is speech, 0 where it is noise.
/// Equidistant speech and noise resolve to speech.
pub fn encode_sns_target(speech: &[u16], noise: &[u16]) -> Result<DoaDistribution> {
    check_angles(speech)?;
    check_angles(noise)?;
    if speech.is_empty() && noise.is_empty() {
        return Err(Error::param("no source angles"));
    }
    let nearest = |i: u16, set: &[u16]| set.iter().map(|&s| circular(i, s)).min().unwrap_or(u16::MAX);
    let values = (1..=NUM_AZIMUTHS as u16)
        .map(|i| {
            if nearest(i, speech) <= nearest(i, noise) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(DoaDistribution { values })
}

/// Sum of squared differences of the SSL pair plus the SNS pair.
pub fn ssl_sns_loss(
    est_ssl: &DoaDistribution,
    est_sns: &DoaDistribution,
    tgt_ssl: &DoaDistribution,
    tgt_sns: &DoaDistribution,
) -> f64 {
    let sq = |a: &DoaDistribution, b: &DoaDistribution| -> f64 {
        a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum()
    };
    sq(tgt_ssl, est_ssl) + sq(tgt_sns, est_sns)
}

/// `argmax_i est_ssl[i] · est_sns[i]`, smallest azimuth on ties.
pub fn decide_doa(est_ssl: &DoaDistribution, est_sns: &DoaDistribution) -> Result<u16> {
    if est_ssl.values.iter().chain(&est_sns.values).any(|v| !v.is_finite()) {
        return Err(Error::param("non-finite estimate"));
    }
    let product: Vec<f64> = est_ssl.values.iter().zip(&est_sns.values).map(|(a, b)| a * b).collect();
    if product.iter().all(|&v| v == 0.0) {
        return Err(Error::NoDecision("speech-gated SSL product is zero everywhere".into()));
    }
    Ok(DoaDistribution { values: product }.argmax())
}
