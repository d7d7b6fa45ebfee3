//! Simulation, front-end processing, decision math and scoring for a
//! six-channel robot microphone array (four mics, two loudspeaker
//! references) used for keyword spotting and sound source localization.
//!
//! Module map:
//!
//! * [`audio`]: WAV I/O, STFT, log-mel features, SSL feature tensors.
//! * [`room`]: image-method RIRs, device geometry, labeled scene synthesis.
//! * [`frontend`]: FLMS echo cancellation, GCC-PHAT, SRP-PHAT, delay-and-sum.
//! * [`ssl`]: angle arithmetic, Gaussian/SNS targets, loss, DOA decision.
//! * [`kws`]: posterior smoothing and threshold decisions.
//! * [`scoring`]: FRR/FAR, MAE/ACC scores, ranking, LR schedule.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod error;
pub mod frontend;
pub mod kws;
pub mod par;
pub mod room;
pub mod scoring;
pub mod ssl;

pub use error::{Error, Result};
pub use par::Execution;

/// Sample rate of every challenge recording.
pub const SAMPLE_RATE: u32 = 16_000;
