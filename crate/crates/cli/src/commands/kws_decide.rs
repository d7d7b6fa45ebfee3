use std::path::PathBuf;

use asc_core::kws::{decide_keyword, posterior_provider};
use asc_core::par;
use clap::Args;
use serde::Serialize;

use crate::config;
use crate::error::CliError;
use crate::formats::{base_dir, format_labels, read_jsonl, resolve, write_jsonl, write_text, LabelKind, Labels, PosteriorEntry};

#[derive(Debug, Clone, Args)]
pub struct KwsDecideArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON-lines manifest of `{id, posterior_path}`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Label file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Smoothing window in frames.
    #[arg(long)]
    pub window: Option<usize>,
    /// Detection threshold in (0, 1]; the smoothed posterior must exceed it.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KwsDecideSummary {
    pub entries: usize,
    pub detected: usize,
    pub labels: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct DecisionRecord {
    id: String,
    label: u8,
    trigger_frame: Option<usize>,
    peak_confidence: f64,
}

pub fn run(args: &KwsDecideArgs) -> Result<KwsDecideSummary, CliError> {
    let mut k = config::load(args.config.as_deref())?.kws;
    if let Some(v) = args.window {
        k.window = v;
    }
    if let Some(v) = args.threshold {
        k.threshold = v;
    }
    if k.window == 0 {
        return Err(CliError::config("window must be at least 1").with_keys(vec!["kws.window".into()]));
    }
    if !(k.threshold > 0.0 && k.threshold <= 1.0) {
        return Err(CliError::config("threshold must lie in (0, 1]").with_keys(vec!["kws.threshold".into()]));
    }
    let mut entries: Vec<PosteriorEntry> = read_jsonl(&args.manifest)?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let base = base_dir(&args.manifest);
    let results = par::map(super::execution(args.sequential), &entries, |e| {
        let track = posterior_provider(resolve(&base, &e.posterior_path))?;
        decide_keyword(&track, k.window, k.threshold)
    });

    let mut labels = Labels::new();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(d) => {
                labels.insert(e.id.clone(), u16::from(d.label()));
                records.push(DecisionRecord {
                    id: e.id.clone(),
                    label: d.label(),
                    trigger_frame: d.trigger_frame,
                    peak_confidence: d.peak_confidence,
                });
            }
            Err(err) => errors.push(CliError::from(err).with_id(e.id.clone())),
        }
    }
    write_text(&args.out, &format_labels(&labels, LabelKind::Kws)?)?;
    let detail = args.out.with_extension("decisions.jsonl");
    write_jsonl(&detail, &records)?;
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("{}", e.to_json());
        }
        return Err(super::entry_failures(&errors).expect("nonempty"));
    }
    Ok(KwsDecideSummary {
        entries: entries.len(),
        detected: records.iter().filter(|r| r.label == 1).count(),
        labels: args.out.clone(),
    })
}
