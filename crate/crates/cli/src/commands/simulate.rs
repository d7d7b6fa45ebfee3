use std::path::PathBuf;

use asc_core::audio::write_wav;
use asc_core::par;
use asc_core::room::{generate_scene, simulate_scene_with, DelayModel, Scenario, SceneDescription};
use asc_core::Execution;
use clap::Args;
use serde::Serialize;

use crate::config;
use crate::error::CliError;
use crate::formats::{write_jsonl, ManifestEntry, TruthRecord};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML configuration (default: $ASC_CONFIG_DIR/asc.toml if present).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seconds per scene.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub keyword_fraction: Option<f64>,
    /// Comma-separated subset of only, noise, echo, noise_echo, echo_mech.
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Option<Vec<String>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub rt60: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub ser_db: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    pub distance: Option<Vec<f64>>,
    /// rounded or fractional.
    #[arg(long)]
    pub delay: Option<String>,
    #[arg(long)]
    pub sensor_noise_db: Option<f64>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub scenes: u64,
    pub manifest: PathBuf,
    pub truth: PathBuf,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nonconformant: Vec<String>,
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

fn parse_enum<T: serde::de::DeserializeOwned>(flag: &str, v: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(v.to_string()))
        .map_err(|_| CliError::config(format!("--{flag}: unknown value {v:?}")).with_keys(vec![flag.to_string()]))
}

pub fn resolve(args: &SimulateArgs) -> Result<config::SimulateSection, CliError> {
    let mut s = config::load(args.config.as_deref())?.simulate;
    if let Some(v) = args.count {
        s.count = v;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    let c = &mut s.scene;
    if let Some(v) = args.duration {
        c.duration_s = v;
    }
    if let Some(v) = args.keyword_fraction {
        c.keyword_fraction = v;
    }
    if let Some(v) = &args.scenarios {
        c.scenarios = v.iter().map(|x| parse_enum::<Scenario>("scenarios", x)).collect::<Result<_, _>>()?;
    }
    if let Some(v) = &args.rt60 {
        c.room.rt60 = pair(v);
    }
    if let Some(v) = &args.snr_db {
        c.sources.snr_db = pair(v);
    }
    if let Some(v) = &args.ser_db {
        c.sources.ser_db = pair(v);
    }
    if let Some(v) = &args.distance {
        c.sources.distance = pair(v);
    }
    if let Some(v) = &args.delay {
        c.room.delay = parse_enum::<DelayModel>("delay", v)?;
    }
    if args.sensor_noise_db.is_some() {
        c.sensor_noise_db = args.sensor_noise_db;
    }
    let bad = c.invalid_keys();
    if !bad.is_empty() {
        return Err(CliError::config(format!("invalid settings: {}", bad.join(", "))).with_keys(bad));
    }
    Ok(s)
}

pub fn scene_id(index: u64) -> String {
    format!("scene_{index:06}")
}

/// Seed for the per-scene sensor noise, decorrelated across indices.
fn scene_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

pub fn run(args: &SimulateArgs) -> Result<SimulateSummary, CliError> {
    let s = resolve(args)?;
    let exec = super::execution(args.sequential);
    let wav_dir = args.out.join("wav");
    std::fs::create_dir_all(&wav_dir).map_err(|e| CliError::io(&wav_dir, e))?;

    let mut manifest = Vec::new();
    let mut truths = Vec::new();
    let mut scenes: Vec<(String, SceneDescription)> = Vec::new();
    let indices: Vec<u64> = (0..s.count).collect();
    for chunk in indices.chunks(super::CHUNK) {
        let rendered = par::map(exec, chunk, |&i| {
            let desc = generate_scene(&s.scene, s.seed, i)?;
            let spec = desc.to_spec()?;
            let (audio, truth) = simulate_scene_with(&spec, scene_seed(s.seed, i), Execution::Sequential)?;
            Ok::<_, asc_core::Error>((desc, audio, truth))
        });
        for (&i, r) in chunk.iter().zip(rendered) {
            let id = scene_id(i);
            let (desc, audio, truth) = r.map_err(|e| CliError::from(e).with_id(id.clone()))?;
            let rel = format!("wav/{id}.wav");
            write_wav(args.out.join(&rel), &audio).map_err(|e| CliError::from(e).with_id(id.clone()))?;
            manifest.push(ManifestEntry {
                id: id.clone(),
                wav_path: rel,
            });
            truths.push(TruthRecord { id: id.clone(), truth });
            scenes.push((id, desc));
        }
    }

    #[derive(Serialize)]
    struct SceneRecord<'a> {
        id: &'a str,
        #[serde(flatten)]
        scene: &'a SceneDescription,
    }
    let scene_records: Vec<SceneRecord> = scenes.iter().map(|(id, d)| SceneRecord { id, scene: d }).collect();
    let manifest_path = args.out.join("manifest.jsonl");
    let truth_path = args.out.join("truth.jsonl");
    write_jsonl(&manifest_path, &manifest)?;
    write_jsonl(&truth_path, &truths)?;
    write_jsonl(&args.out.join("scenes.jsonl"), &scene_records)?;
    Ok(SimulateSummary {
        scenes: s.count,
        manifest: manifest_path,
        truth: truth_path,
        nonconformant: s.scene.nonconformant_keys(),
    })
}
