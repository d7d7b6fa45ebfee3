use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::device::{place_device, DeviceGeometry};
use super::mix::ratio_gain;
use super::rir::{distance, image_method_rir_with, Point, RoomSpec};
use super::signals::{synthesize, SignalKind};
use crate::audio::{fft_convolve, mean_square, ChannelRole, MultiChannelAudio};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRole {
    Speech,
    Keyword,
    Noise,
    Echo,
    Mech,
}

impl SourceRole {
    pub fn is_target(self) -> bool {
        matches!(self, SourceRole::Speech | SourceRole::Keyword)
    }

    /// Echo and mechanical noise come from the robot itself.
    pub fn is_device_mounted(self) -> bool {
        matches!(self, SourceRole::Echo | SourceRole::Mech)
    }
}

/// How a source's level is set relative to the target image at mic 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Reference,
    SnrDb(f64),
    SerDb(f64),
}

impl Level {
    fn ratio_db(self) -> Option<f64> {
        match self {
            Level::Reference => None,
            Level::SnrDb(d) | Level::SerDb(d) => Some(d),
        }
    }
}

/// The five recording conditions; `X` is keyword or speech.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Only,
    Noise,
    Echo,
    NoiseEcho,
    EchoMech,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Only,
        Scenario::Noise,
        Scenario::Echo,
        Scenario::NoiseEcho,
        Scenario::EchoMech,
    ];

    /// Row label as used in result tables, e.g. `Keyword+Noise+Echo`.
    pub fn label(self, keyword: bool) -> String {
        let x = if keyword { "Keyword" } else { "Speech" };
        match self {
            Scenario::Only => format!("{x} only"),
            Scenario::Noise => format!("{x}+Noise"),
            Scenario::Echo => format!("{x}+Echo"),
            Scenario::NoiseEcho => format!("{x}+Noise+Echo"),
            Scenario::EchoMech => format!("{x}+Echo+Mech"),
        }
    }

    pub fn roles(self) -> &'static [SourceRole] {
        match self {
            Scenario::Only => &[],
            Scenario::Noise => &[SourceRole::Noise],
            Scenario::Echo => &[SourceRole::Echo],
            Scenario::NoiseEcho => &[SourceRole::Noise, SourceRole::Echo],
            Scenario::EchoMech => &[SourceRole::Echo, SourceRole::Mech],
        }
    }

    fn from_interferers(noise: bool, echo: bool, mech: bool) -> Option<Self> {
        match (noise, echo, mech) {
            (false, false, false) => Some(Scenario::Only),
            (true, false, false) => Some(Scenario::Noise),
            (false, true, false) => Some(Scenario::Echo),
            (true, true, false) => Some(Scenario::NoiseEcho),
            (false, true, true) => Some(Scenario::EchoMech),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSource {
    pub role: SourceRole,
    /// Required for external sources; ignored for device-mounted ones.
    pub position: Option<Point>,
    /// Mono, at the room sample rate.
    pub signal: MultiChannelAudio,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub room: RoomSpec,
    pub device: DeviceGeometry,
    pub sources: Vec<SceneSource>,
    /// Optional white sensor noise per mic, in dB below the target at mic 0.
    pub sensor_noise_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePosition {
    pub role: SourceRole,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Positions {
    pub device_origin: Point,
    pub heading: f64,
    pub mics: [Point; 4],
    pub sources: Vec<SourcePosition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: Scenario,
    pub keyword: bool,
    pub speech_doas: Vec<u16>,
    pub noise_doas: Vec<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ser_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mech_snr_db: Option<f64>,
    pub room: RoomSpec,
    pub positions: Positions,
}

impl SceneSpec {
    fn source_position(&self, s: &SceneSource) -> Point {
        match s.role {
            SourceRole::Echo => self.device.origin,
            SourceRole::Mech => self.device.mech_position(),
            _ => s.position.expect("validated"),
        }
    }

    pub fn len(&self) -> usize {
        self.sources.first().map_or(0, |s| s.signal.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let has = |r| self.sources.iter().any(|s| s.role == r);
        Scenario::from_interferers(has(SourceRole::Noise), has(SourceRole::Echo), has(SourceRole::Mech))
            .ok_or_else(|| Error::param("source roles do not form one of the five scenarios"))
    }

    pub fn validate(&self) -> Result<Scenario> {
        self.room.validate()?;
        if !self.sources.iter().any(|s| s.role.is_target()) {
            return Err(Error::param("scene needs a speech or keyword source"));
        }
        let len = self.len();
        if len == 0 {
            return Err(Error::param("source signals are empty"));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if s.signal.num_channels() != 1 {
                return Err(Error::param(format!("source {i} is not mono")));
            }
            if s.signal.sample_rate() != self.room.sample_rate {
                return Err(Error::param(format!("source {i} sample rate differs from room")));
            }
            if s.signal.len() != len {
                return Err(Error::param(format!("source {i} length differs")));
            }
            let level_ok = match (s.role, s.level) {
                (SourceRole::Speech | SourceRole::Keyword, Level::Reference) => true,
                (SourceRole::Noise | SourceRole::Mech, Level::SnrDb(d)) => d.is_finite(),
                (SourceRole::Echo, Level::SerDb(d)) => d.is_finite(),
                _ => false,
            };
            if !level_ok {
                return Err(Error::param(format!("source {i}: level {:?} invalid for {:?}", s.level, s.role)));
            }
            if !s.role.is_device_mounted() {
                let p = s
                    .position
                    .ok_or_else(|| Error::param(format!("source {i} ({:?}) needs a position", s.role)))?;
                if !self.room.contains(p) {
                    return Err(Error::geometry(format!("source {i} at {p:?} outside room")));
                }
            }
        }
        self.scenario()
    }

    /// Deviations from the challenge ranges; empty when conformant.
    pub fn conformance_issues(&self) -> Vec<String> {
        let mut issues = self.room.conformance_issues();
        for (i, s) in self.sources.iter().enumerate() {
            if let Some(p) = s.position.filter(|_| !s.role.is_device_mounted()) {
                let d = distance(p, self.device.origin);
                if !(1.5..=5.0).contains(&d) {
                    issues.push(format!("source {i} distance {d:.2} m outside [1.5, 5]"));
                }
            }
            if let Some(db) = s.level.ratio_db() {
                if !(-5.0..=10.0).contains(&db) {
                    issues.push(format!("source {i} ratio {db} dB outside [-5, 10]"));
                }
            }
        }
        issues
    }

    pub fn ground_truth(&self) -> Result<GroundTruth> {
        let scenario = self.validate()?;
        let doas = |pred: fn(SourceRole) -> bool| {
            let mut v: Vec<u16> = self
                .sources
                .iter()
                .filter(|s| pred(s.role))
                .map(|s| self.device.doa_of(self.source_position(s)))
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let level_of = |role: SourceRole| {
            self.sources
                .iter()
                .find(|s| s.role == role)
                .and_then(|s| s.level.ratio_db())
        };
        Ok(GroundTruth {
            scenario,
            keyword: self.sources.iter().any(|s| s.role == SourceRole::Keyword),
            speech_doas: doas(SourceRole::is_target),
            noise_doas: doas(|r| r == SourceRole::Noise),
            snr_db: level_of(SourceRole::Noise),
            ser_db: level_of(SourceRole::Echo),
            mech_snr_db: level_of(SourceRole::Mech),
            room: self.room,
            positions: Positions {
                device_origin: self.device.origin,
                heading: self.device.heading,
                mics: self.device.mics,
                sources: self
                    .sources
                    .iter()
                    .map(|s| SourcePosition {
                        role: s.role,
                        position: self.source_position(s),
                    })
                    .collect(),
            },
        })
    }
}

/// One source's contribution to the four mic channels, after level scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceContribution {
    pub role: SourceRole,
    pub gain: f64,
    pub mics: [Vec<f64>; 4],
}

fn reverberate(spec: &SceneSpec, src: &SceneSource, mic: Point, exec: Execution) -> Result<Vec<f64>> {
    let len = src.signal.len();
    let x = src.signal.channel(0);
    let mut out = vec![0.0; len];
    let emitters: Vec<(Point, f64)> = match src.role {
        // The playback signal is split equally over both loudspeakers.
        SourceRole::Echo => spec.device.loudspeakers.iter().map(|&p| (p, 0.5)).collect(),
        SourceRole::Mech => vec![(spec.device.mech_position(), 1.0)],
        _ => vec![(src.position.expect("validated"), 1.0)],
    };
    for (pos, w) in emitters {
        let h = image_method_rir_with(&spec.room, pos, mic, exec)?;
        let y = fft_convolve(x, &h);
        out.iter_mut().zip(&y).for_each(|(o, v)| *o += w * v);
    }
    Ok(out)
}

/// Reverberant images of every source at the four mics, with interferers
/// scaled to their SNR/SER against the summed target image at mic 0.
pub fn render_contributions(spec: &SceneSpec, exec: Execution) -> Result<Vec<SourceContribution>> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.sources.len())
        .flat_map(|s| (0..4).map(move |m| (s, m)))
        .collect();
    let images = par::map(exec, &jobs, |&(s, m)| {
        reverberate(spec, &spec.sources[s], spec.device.mics[m], Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut per_source: Vec<[Vec<f64>; 4]> = images
        .chunks(4)
        .map(|c| [c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()])
        .collect();

    let len = spec.len();
    let mut target0 = vec![0.0; len];
    for (s, img) in spec.sources.iter().zip(&per_source) {
        if s.role.is_target() {
            target0.iter_mut().zip(&img[0]).for_each(|(a, b)| *a += b);
        }
    }
    let target_power = mean_square(&target0);
    let mut out = Vec::with_capacity(spec.sources.len());
    for (s, img) in spec.sources.iter().zip(per_source.iter_mut()) {
        let gain = match s.level.ratio_db() {
            None => 1.0,
            Some(db) => ratio_gain(target_power, mean_square(&img[0]), db)?,
        };
        if gain != 1.0 {
            for ch in img.iter_mut() {
                ch.iter_mut().for_each(|v| *v *= gain);
            }
        }
        out.push(SourceContribution {
            role: s.role,
            gain,
            mics: std::mem::take(img),
        });
    }
    Ok(out)
}

/// Six-channel recording plus labels. Channels 0–3 are the summed mic
/// images; channels 4–5 both carry the raw echo playback signal (zero
/// offset, silence when there is no echo source).
pub fn simulate_scene(spec: &SceneSpec, seed: u64) -> Result<(MultiChannelAudio, GroundTruth)> {
    simulate_scene_with(spec, seed, Execution::Parallel)
}

pub fn simulate_scene_with(
    spec: &SceneSpec,
    seed: u64,
    exec: Execution,
) -> Result<(MultiChannelAudio, GroundTruth)> {
    let truth = spec.ground_truth()?;
    let contributions = render_contributions(spec, exec)?;
    let len = spec.len();
    let mut chans = vec![vec![0.0; len]; 6];
    for c in &contributions {
        for (m, img) in c.mics.iter().enumerate() {
            chans[m].iter_mut().zip(img).for_each(|(a, b)| *a += b);
        }
    }
    if let Some(db) = spec.sensor_noise_db {
        let target: f64 = contributions
            .iter()
            .filter(|c| c.role.is_target())
            .map(|c| mean_square(&c.mics[0]))
            .sum();
        let sigma = (target / 10f64.powf(db / 10.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ch in chans.iter_mut().take(4) {
            for v in ch.iter_mut() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * n;
            }
        }
    }
    for s in spec.sources.iter().filter(|s| s.role == SourceRole::Echo) {
        for ch in &mut chans[4..6] {
            ch.iter_mut().zip(s.signal.channel(0)).for_each(|(a, b)| *a += b);
        }
    }
    let audio = MultiChannelAudio::new(chans, spec.room.sample_rate, ChannelRole::alpha_mini().to_vec())?;
    Ok((audio, truth))
}

/// Serializable scene: geometry plus signal recipes instead of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub room: RoomSpec,
    pub device_origin: Point,
    #[serde(default)]
    pub heading: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub sensor_noise_db: Option<f64>,
    pub sources: Vec<SourceDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDescription {
    pub role: SourceRole,
    pub signal: SignalKind,
    #[serde(default)]
    pub signal_seed: u64,
    #[serde(default)]
    pub position: Option<Point>,
    pub level: Level,
}

impl SceneDescription {
    pub fn num_samples(&self) -> usize {
        (self.duration_s * f64::from(self.room.sample_rate)).round() as usize
    }

    pub fn to_spec(&self) -> Result<SceneSpec> {
        if !(self.duration_s > 0.0) {
            return Err(Error::param("duration must be positive"));
        }
        let device = place_device(&self.room, self.device_origin, self.heading)?;
        let len = self.num_samples();
        let sources = self
            .sources
            .iter()
            .map(|s| {
                let x = synthesize(s.signal, len, self.room.sample_rate, s.signal_seed);
                Ok(SceneSource {
                    role: s.role,
                    position: s.position,
                    signal: MultiChannelAudio::mono(x, self.room.sample_rate)?,
                    level: s.level,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SceneSpec {
            room: self.room,
            device,
            sources,
            sensor_noise_db: self.sensor_noise_db,
        };
        spec.validate()?;
        Ok(spec)
    }
}
