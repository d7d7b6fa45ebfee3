use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Periodic Hann, `0.5 - 0.5 cos(2πn/N)`.
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; len],
        }
    }
}

/// One-sided short-time spectrum, `frames × (frame_len/2 + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub bins: Vec<Vec<Complex64>>,
    pub frame_len: usize,
    pub hop: usize,
    pub window: Window,
}

impl Spectrogram {
    pub fn num_frames(&self) -> usize {
        self.bins.len()
    }

    pub fn num_bins(&self) -> usize {
        self.frame_len / 2 + 1
    }
}

/// Frames produced by [`stft`] for a signal of `len` samples.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Frames the signal without tail padding; the last partial frame is dropped.
pub fn stft(signal: &[f64], frame_len: usize, hop: usize, window: Window) -> Result<Spectrogram> {
    if frame_len == 0 || !frame_len.is_multiple_of(2) {
        return Err(Error::param(format!("frame length {frame_len} must be even and positive")));
    }
    if hop == 0 {
        return Err(Error::param("hop must be positive"));
    }
    if signal.len() < frame_len {
        return Err(Error::EmptyInput {
            len: signal.len(),
            frame_len,
        });
    }
    let win = window.coefficients(frame_len);
    let fft = FftPlanner::new().plan_fft_forward(frame_len);
    let frames = frame_count(signal.len(), frame_len, hop);
    let n_bins = frame_len / 2 + 1;
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); frame_len];
    let bins = (0..frames)
        .map(|t| {
            let frame = &signal[t * hop..t * hop + frame_len];
            for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&win) {
                *b = Complex64::new(x * w, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf[..n_bins].to_vec()
        })
        .collect();
    Ok(Spectrogram {
        bins,
        frame_len,
        hop,
        window,
    })
}
