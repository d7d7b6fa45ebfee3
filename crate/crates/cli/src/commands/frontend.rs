use std::path::PathBuf;

use asc_core::audio::{read_wav, write_wav, MultiChannelAudio, RoleLayout};
use asc_core::frontend::{run_chain, ChainConfig};
use asc_core::kws::{energy_gate_posteriors, format_posteriors};
use asc_core::{par, Execution};
use clap::Args;
use serde::Serialize;

use crate::config::{self, FrontendSection};
use crate::error::CliError;
use crate::formats::{
    base_dir, format_labels, read_jsonl, resolve, write_jsonl, write_text, LabelKind, Labels, ManifestEntry,
    PosteriorEntry,
};

#[derive(Debug, Clone, Args)]
pub struct FrontendArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON-lines manifest of `{id, wav_path}`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Skip echo cancellation.
    #[arg(long)]
    pub no_aec: bool,
    #[arg(long)]
    pub filter_len: Option<usize>,
    #[arg(long)]
    pub block_len: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub regularization: Option<f64>,
    /// Sub-sample resolution of the SRP lag grid.
    #[arg(long)]
    pub upsample: Option<usize>,
    /// Also write energy-gate posteriors and a manifest for kws-decide.
    #[arg(long)]
    pub posteriors: bool,
    #[arg(long)]
    pub energy_floor_db: Option<f64>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontendSummary {
    pub entries: usize,
    pub processed: usize,
    pub labels: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posteriors: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct DoaRecord {
    id: String,
    doa: u16,
    aec_adapted: bool,
}

pub fn resolve_config(args: &FrontendArgs) -> Result<FrontendSection, CliError> {
    let mut f = config::load(args.config.as_deref())?.frontend;
    if args.no_aec {
        f.enable_aec = false;
    }
    if let Some(v) = args.filter_len {
        f.aec.filter_len = v;
        // Keep the default block equal to the filter unless set explicitly.
        if args.block_len.is_none() && f.aec.block_len < v {
            f.aec.block_len = v;
        }
    }
    if let Some(v) = args.block_len {
        f.aec.block_len = v;
    }
    if let Some(v) = args.step_size {
        f.aec.step_size = v;
    }
    if let Some(v) = args.regularization {
        f.aec.regularization = v;
    }
    if let Some(v) = args.upsample {
        f.upsample = v;
    }
    if args.posteriors {
        f.posteriors = true;
    }
    if let Some(v) = args.energy_floor_db {
        f.energy_floor_db = v;
    }
    f.aec.validate().map_err(|e| CliError::config(e.to_string()).with_keys(vec!["frontend.aec".into()]))?;
    if f.upsample == 0 {
        return Err(CliError::config("upsample must be positive").with_keys(vec!["frontend.upsample".into()]));
    }
    Ok(f)
}

struct Processed {
    doa: u16,
    adapted: bool,
    profile: String,
    beam: MultiChannelAudio,
    posteriors: Option<String>,
}

fn process(path: &std::path::Path, f: &FrontendSection) -> Result<Processed, CliError> {
    let audio = read_wav(path, RoleLayout::Generic)?;
    let cfg = ChainConfig {
        aec: f.enable_aec.then_some(f.aec),
        upsample: f.upsample,
        speed_of_sound: f.speed_of_sound,
    };
    let out = run_chain(&audio, &cfg, Execution::Sequential).map_err(|e| CliError::data(e.to_string()))?;
    let posteriors = if f.posteriors {
        let track = energy_gate_posteriors(&out.beam, audio.sample_rate(), f.energy_floor_db)?;
        Some(format_posteriors(&track))
    } else {
        None
    };
    Ok(Processed {
        doa: out.doa,
        adapted: out.aec_adapted,
        profile: out.profile.to_csv_line(),
        beam: MultiChannelAudio::mono(out.beam, audio.sample_rate())?,
        posteriors,
    })
}

pub fn run(args: &FrontendArgs) -> Result<FrontendSummary, CliError> {
    let f = resolve_config(args)?;
    let entries: Vec<ManifestEntry> = read_jsonl(&args.manifest)?;
    let base = base_dir(&args.manifest);
    let exec = super::execution(args.sequential);
    let wav_dir = args.out.join("wav");
    std::fs::create_dir_all(&wav_dir).map_err(|e| CliError::io(&wav_dir, e))?;

    let mut order: Vec<&ManifestEntry> = entries.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));

    let mut labels = Labels::new();
    let mut doas = Vec::new();
    let mut profiles = String::new();
    let mut posterior_entries = Vec::new();
    let mut errors = Vec::new();
    for chunk in order.chunks(super::CHUNK) {
        let results = par::map(exec, chunk, |e| process(&resolve(&base, &e.wav_path), &f));
        for (e, r) in chunk.iter().zip(results) {
            let p = match r {
                Ok(p) => p,
                Err(err) => {
                    errors.push(err.with_id(e.id.clone()));
                    continue;
                }
            };
            write_wav(wav_dir.join(format!("{}.wav", e.id)), &p.beam)?;
            if let Some(text) = &p.posteriors {
                let rel = format!("posteriors/{}.txt", e.id);
                write_text(&args.out.join(&rel), text)?;
                posterior_entries.push(PosteriorEntry {
                    id: e.id.clone(),
                    posterior_path: rel,
                });
            }
            labels.insert(e.id.clone(), p.doa);
            doas.push(DoaRecord {
                id: e.id.clone(),
                doa: p.doa,
                aec_adapted: p.adapted,
            });
            profiles.push_str(&format!("{},{}\n", e.id, p.profile));
        }
    }

    let labels_path = args.out.join("ssl_labels.txt");
    write_text(&labels_path, &format_labels(&labels, LabelKind::Ssl)?)?;
    write_jsonl(&args.out.join("doa.jsonl"), &doas)?;
    write_text(&args.out.join("srp_profiles.csv"), &profiles)?;
    write_jsonl(&args.out.join("errors.jsonl"), &errors)?;
    let posteriors = if f.posteriors {
        let p = args.out.join("posteriors.jsonl");
        write_jsonl(&p, &posterior_entries)?;
        Some(p)
    } else {
        None
    };
    if let Some(err) = super::entry_failures(&errors) {
        for e in &errors {
            eprintln!("{}", e.to_json());
        }
        return Err(err);
    }
    Ok(FrontendSummary {
        entries: entries.len(),
        processed: doas.len(),
        labels: labels_path,
        posteriors,
    })
}
