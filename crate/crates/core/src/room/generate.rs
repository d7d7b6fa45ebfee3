use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::device::DeviceGeometry;
use super::rir::{DelayModel, RoomSpec, SPEED_OF_SOUND};
use super::scene::{Level, Scenario, SceneDescription, SourceDescription, SourceRole};
use super::signals::SignalKind;
use crate::error::{Error, Result};

type Range = [f64; 2];

/// Randomized scene generator settings. Defaults follow the challenge
/// simulation ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub sample_rate: u32,
    pub duration_s: f64,
    pub keyword_fraction: f64,
    pub scenarios: Vec<Scenario>,
    pub sensor_noise_db: Option<f64>,
    pub room: RoomRanges,
    pub device: DeviceRanges,
    pub sources: SourceRanges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomRanges {
    pub length: Range,
    pub width: Range,
    pub height: f64,
    pub rt60: Range,
    pub speed_of_sound: f64,
    pub delay: DelayModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceRanges {
    /// Height of the mic-array plane.
    pub height: Range,
    pub heading: Range,
    pub wall_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceRanges {
    pub distance: Range,
    pub height: Range,
    pub wall_margin: f64,
    pub snr_db: Range,
    pub ser_db: Range,
    pub mech_snr_db: Range,
    pub noise_signals: Vec<SignalKind>,
    pub echo_signals: Vec<SignalKind>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_rate: crate::SAMPLE_RATE,
            duration_s: 2.0,
            keyword_fraction: 0.5,
            scenarios: Scenario::ALL.to_vec(),
            sensor_noise_db: None,
            room: RoomRanges::default(),
            device: DeviceRanges::default(),
            sources: SourceRanges::default(),
        }
    }
}

impl Default for RoomRanges {
    fn default() -> Self {
        Self {
            length: [3.0, 8.0],
            width: [3.0, 8.0],
            height: 3.0,
            rt60: [0.2, 0.8],
            speed_of_sound: SPEED_OF_SOUND,
            delay: DelayModel::Fractional,
        }
    }
}

impl Default for DeviceRanges {
    fn default() -> Self {
        Self {
            height: [0.7, 1.2],
            heading: [0.0, 360.0],
            wall_margin: 0.5,
        }
    }
}

impl Default for SourceRanges {
    fn default() -> Self {
        Self {
            distance: [1.5, 5.0],
            height: [0.7, 1.2],
            wall_margin: 0.3,
            snr_db: [-5.0, 10.0],
            ser_db: [-5.0, 10.0],
            mech_snr_db: [-5.0, 10.0],
            noise_signals: vec![SignalKind::PinkNoise, SignalKind::Babble, SignalKind::WhiteNoise],
            echo_signals: vec![SignalKind::Music, SignalKind::Speech],
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, r: Range) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

impl SimConfig {
    /// Returns the dotted keys of every malformed setting.
    pub fn invalid_keys(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mut range = |key: &str, r: Range, lo: f64| {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] && r[0] >= lo) {
                bad.push(key.to_string());
            }
        };
        range("room.length", self.room.length, 1e-3);
        range("room.width", self.room.width, 1e-3);
        range("room.rt60", self.room.rt60, 0.0);
        range("device.height", self.device.height, 1e-3);
        range("device.heading", self.device.heading, f64::NEG_INFINITY);
        range("sources.distance", self.sources.distance, 1e-3);
        range("sources.height", self.sources.height, 1e-3);
        range("sources.snr_db", self.sources.snr_db, f64::NEG_INFINITY);
        range("sources.ser_db", self.sources.ser_db, f64::NEG_INFINITY);
        range("sources.mech_snr_db", self.sources.mech_snr_db, f64::NEG_INFINITY);
        if self.sample_rate == 0 {
            bad.push("sample_rate".into());
        }
        if !(self.duration_s > 0.0) {
            bad.push("duration_s".into());
        }
        if !(0.0..=1.0).contains(&self.keyword_fraction) {
            bad.push("keyword_fraction".into());
        }
        if self.scenarios.is_empty() {
            bad.push("scenarios".into());
        }
        if !(self.room.height > 0.0) {
            bad.push("room.height".into());
        }
        if !(self.room.speed_of_sound > 0.0) {
            bad.push("room.speed_of_sound".into());
        }
        if !(self.device.wall_margin >= 0.0) {
            bad.push("device.wall_margin".into());
        }
        if !(self.sources.wall_margin >= 0.0) {
            bad.push("sources.wall_margin".into());
        }
        if self.sources.noise_signals.is_empty() {
            bad.push("sources.noise_signals".into());
        }
        if self.sources.echo_signals.is_empty() {
            bad.push("sources.echo_signals".into());
        }
        bad
    }

    /// Keys whose ranges leave the challenge-conformant region.
    pub fn nonconformant_keys(&self) -> Vec<String> {
        let within = |r: Range, lo: f64, hi: f64| r[0] >= lo && r[1] <= hi;
        let mut out = Vec::new();
        if !within(self.room.length, 3.0, 8.0) {
            out.push("room.length".into());
        }
        if !within(self.room.width, 3.0, 8.0) {
            out.push("room.width".into());
        }
        if (self.room.height - 3.0).abs() > 1e-9 {
            out.push("room.height".into());
        }
        if !within(self.room.rt60, 0.2, 0.8) {
            out.push("room.rt60".into());
        }
        if !within(self.sources.distance, 1.5, 5.0) {
            out.push("sources.distance".into());
        }
        for (k, r) in [
            ("sources.snr_db", self.sources.snr_db),
            ("sources.ser_db", self.sources.ser_db),
            ("sources.mech_snr_db", self.sources.mech_snr_db),
        ] {
            if !within(r, -5.0, 10.0) {
                out.push(k.into());
            }
        }
        out
    }
}

const MAX_PLACEMENT_TRIES: usize = 1000;

/// Draws scene `index` of a run. Each index uses its own ChaCha8 stream of
/// `seed`, so scenes can be generated in any order or in parallel.
pub fn generate_scene(cfg: &SimConfig, seed: u64, index: u64) -> Result<SceneDescription> {
    let bad = cfg.invalid_keys();
    if !bad.is_empty() {
        return Err(Error::param(format!("invalid settings: {}", bad.join(", "))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);

    let room = RoomSpec {
        dims: [draw(&mut rng, cfg.room.length), draw(&mut rng, cfg.room.width), cfg.room.height],
        rt60: draw(&mut rng, cfg.room.rt60),
        sample_rate: cfg.sample_rate,
        speed_of_sound: cfg.room.speed_of_sound,
        delay: cfg.room.delay,
    };
    room.absorption()?;
    let scenario = cfg.scenarios[rng.random_range(0..cfg.scenarios.len())];
    let keyword = rng.random_bool(cfg.keyword_fraction);

    for _ in 0..MAX_PLACEMENT_TRIES {
        let dm = cfg.device.wall_margin;
        if room.dims[0] <= 2.0 * dm || room.dims[1] <= 2.0 * dm {
            break;
        }
        let origin = [
            rng.random_range(dm..room.dims[0] - dm),
            rng.random_range(dm..room.dims[1] - dm),
            draw(&mut rng, cfg.device.height),
        ];
        let heading = draw(&mut rng, cfg.device.heading);
        let dev = DeviceGeometry::at(origin, heading);
        let place = |rng: &mut ChaCha8Rng| {
            let az = rng.random_range(0.0..360.0);
            let d = draw(rng, cfg.sources.distance);
            let z = draw(rng, cfg.sources.height);
            // Horizontal range that yields 3-D distance d from the array centre.
            let dz = z - origin[2];
            let range = (d * d - dz * dz).max(0.0).sqrt();
            let p = dev.point_at(az, range, z);
            let m = cfg.sources.wall_margin;
            let inside = p.iter().zip(&room.dims).all(|(&x, &l)| x >= m && x <= l - m);
            inside.then_some(p)
        };
        let Some(target_pos) = place(&mut rng) else {
            continue;
        };
        let noise_pos = if scenario.roles().contains(&SourceRole::Noise) {
            match place(&mut rng) {
                Some(p) => Some(p),
                None => continue,
            }
        } else {
            None
        };

        let mut sources = vec![SourceDescription {
            role: if keyword { SourceRole::Keyword } else { SourceRole::Speech },
            signal: if keyword { SignalKind::Keyword } else { SignalKind::Speech },
            signal_seed: rng.random(),
            position: Some(target_pos),
            level: Level::Reference,
        }];
        for &role in scenario.roles() {
            let src = match role {
                SourceRole::Noise => SourceDescription {
                    role,
                    signal: cfg.sources.noise_signals[rng.random_range(0..cfg.sources.noise_signals.len())],
                    signal_seed: rng.random(),
                    position: noise_pos,
                    level: Level::SnrDb(draw(&mut rng, cfg.sources.snr_db)),
                },
                SourceRole::Echo => SourceDescription {
                    role,
                    signal: cfg.sources.echo_signals[rng.random_range(0..cfg.sources.echo_signals.len())],
                    signal_seed: rng.random(),
                    position: None,
                    level: Level::SerDb(draw(&mut rng, cfg.sources.ser_db)),
                },
                _ => SourceDescription {
                    role,
                    signal: SignalKind::Mechanical,
                    signal_seed: rng.random(),
                    position: None,
                    level: Level::SnrDb(draw(&mut rng, cfg.sources.mech_snr_db)),
                },
            };
            sources.push(src);
        }
        return Ok(SceneDescription {
            room,
            device_origin: origin,
            heading,
            duration_s: cfg.duration_s,
            sensor_noise_db: cfg.sensor_noise_db,
            sources,
        });
    }
    Err(Error::geometry(format!(
        "could not place device and sources in a {:?} m room",
        room.dims
    )))
}
