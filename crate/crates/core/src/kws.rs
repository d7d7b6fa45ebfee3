//! Keyword posterior smoothing and wake-up decisions.

use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_HOP_MS: f64 = 10.0;
/// 300 ms at a 10 ms hop.
pub const DEFAULT_SMOOTH_WINDOW: usize = 30;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Per-frame keyword posteriors, each in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTrack {
    keyword_prob: Vec<f64>,
    hop_ms: f64,
}

impl PosteriorTrack {
    pub fn new(keyword_prob: Vec<f64>, hop_ms: f64) -> Result<Self> {
        if !(hop_ms > 0.0) {
            return Err(Error::param("hop must be positive"));
        }
        if let Some(v) = keyword_prob.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("posterior {v} outside [0, 1]")));
        }
        Ok(Self { keyword_prob, hop_ms })
    }

    pub fn values(&self) -> &[f64] {
        &self.keyword_prob
    }

    pub fn hop_ms(&self) -> f64 {
        self.hop_ms
    }

    pub fn len(&self) -> usize {
        self.keyword_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keyword_prob.is_empty()
    }

    pub fn truncated(&self, frames: usize) -> Self {
        Self {
            keyword_prob: self.keyword_prob[..frames.min(self.len())].to_vec(),
            hop_ms: self.hop_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KwsDecision {
    pub detected: bool,
    pub trigger_frame: Option<usize>,
    pub peak_confidence: f64,
}

impl KwsDecision {
    pub fn label(&self) -> u8 {
        u8::from(self.detected)
    }
}

/// Trailing moving average over at most `window` frames; early frames
/// average over what is available.
pub fn smooth_posteriors(track: &PosteriorTrack, window: usize) -> Result<PosteriorTrack> {
    if window == 0 {
        return Err(Error::param("smoothing window must be at least one frame"));
    }
    let p = &track.keyword_prob;
    // Direct window sums: no running-sum drift, exact for w = 1.
    let out = (0..p.len())
        .map(|t| {
            let window = &p[(t + 1).saturating_sub(window)..=t];
            (window.iter().sum::<f64>() / window.len() as f64).clamp(0.0, 1.0)
        })
        .collect();
    Ok(PosteriorTrack {
        keyword_prob: out,
        hop_ms: track.hop_ms,
    })
}

/// Fires at the first frame whose smoothed confidence exceeds `threshold`.
/// Uses no future frames.
pub fn decide_keyword(track: &PosteriorTrack, window: usize, threshold: f64) -> Result<KwsDecision> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::param(format!("threshold {threshold} outside (0, 1]")));
    }
    let smooth = smooth_posteriors(track, window)?;
    let trigger_frame = smooth.keyword_prob.iter().position(|&c| c > threshold);
    let peak_confidence = smooth.keyword_prob.iter().copied().fold(0.0, f64::max);
    Ok(KwsDecision {
        detected: trigger_frame.is_some(),
        trigger_frame,
        peak_confidence,
    })
}

/// Parses a posterior file: optional `#hop_ms=<ms>` header, other `#` lines
/// ignored, then one probability per line. Line numbers in errors are 1-based.
pub fn parse_posteriors(text: &str) -> Result<PosteriorTrack> {
    let mut hop_ms = DEFAULT_HOP_MS;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if let Some(v) = header.trim().strip_prefix("hop_ms=") {
                hop_ms = v.trim().parse().ok().filter(|h: &f64| *h > 0.0).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("bad hop header {line:?}"),
                })?;
            }
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("not a number: {line:?}"),
        })?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Range { line: line_no, value: v });
        }
        values.push(v);
    }
    PosteriorTrack::new(values, hop_ms)
}

pub fn posterior_provider(path: impl AsRef<Path>) -> Result<PosteriorTrack> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_posteriors(&text)
}

pub fn format_posteriors(track: &PosteriorTrack) -> String {
    let mut s = format!("#hop_ms={}\n", track.hop_ms);
    for v in &track.keyword_prob {
        s.push_str(&format!("{v:.6}\n"));
    }
    s
}

/// Stand-in posterior source for demos without an acoustic model: a
/// logistic function of frame energy (25 ms / 10 ms frames). It detects
/// voice activity, not the keyword.
pub fn energy_gate_posteriors(signal: &[f64], sample_rate: u32, floor_db: f64) -> Result<PosteriorTrack> {
    let frame = (0.025 * f64::from(sample_rate)).round() as usize;
    let hop = (0.010 * f64::from(sample_rate)).round() as usize;
    if frame == 0 || hop == 0 {
        return Err(Error::param("sample rate too low"));
    }
    let frames = crate::audio::stft_frame_count(signal.len(), frame, hop);
    let values = (0..frames)
        .map(|t| {
            let e = crate::audio::mean_square(&signal[t * hop..t * hop + frame]);
            let db = 10.0 * e.max(1e-12).log10();
            1.0 / (1.0 + (-(db - floor_db) / 3.0).exp())
        })
        .collect();
    PosteriorTrack::new(values, 1000.0 * hop as f64 / f64::from(sample_rate))
}
