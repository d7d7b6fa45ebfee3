//! Classical multichannel front-end: FLMS echo cancellation, GCC-PHAT
//! delay estimation, SRP-PHAT azimuth search and delay-and-sum beamforming.

mod aec;
mod chain;
mod dsbf;
mod gcc;
mod srp;

pub use aec::{flms_aec, AecConfig, AecOutput, FlmsAec};
pub use chain::{run_chain, ChainConfig, ChainOutput};
pub use dsbf::{dsbf, steering_shifts};
pub use gcc::{gcc_phat, gcc_phat_framed, gcc_phat_upsampled, CrossCorr, PHAT_FLOOR};
pub use srp::{srp_phat_doa, srp_phat_scores, SteeringGrid, DEFAULT_BAND_HZ, DEFAULT_FRAME_LEN, DEFAULT_UPSAMPLE, MIC_PAIRS};
