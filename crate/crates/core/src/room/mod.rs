//! Room acoustics and labeled scene synthesis.

pub(crate) mod device;
mod generate;
mod mix;
mod rir;
mod scene;
pub mod signals;

pub use device::{place_device, DeviceGeometry, ADJACENT_MIC_SPACING, LOUDSPEAKER_DROP, LOUDSPEAKER_SPACING, MECH_DROP};
pub use generate::{generate_scene, SimConfig};
pub use mix::{mix_at_ratio, ratio_gain};
pub use rir::{DelayModel, FRACTIONAL_HALF_WIDTH, image_method_rir, image_method_rir_with, schroeder_t60, Point, RoomSpec, SPEED_OF_SOUND};
pub use scene::{
    render_contributions, simulate_scene, simulate_scene_with, GroundTruth, Level, Scenario, SceneDescription,
    SceneSource, SceneSpec, SourceDescription, SourceRole, SourceContribution,
};
pub use signals::SignalKind;
