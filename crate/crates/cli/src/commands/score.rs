use std::path::PathBuf;

use asc_core::room::RoomSpec;
use asc_core::scoring::{kws_report, ssl_report, KwsItem, SslItem, Track};
use clap::{Args, ValueEnum};

use crate::config;
use crate::error::CliError;
use crate::formats::{parse_labels, read_jsonl, read_text, write_text, LabelKind, TruthRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrackArg {
    Kws,
    Ssl,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub track: TrackArg,
    /// Ground-truth JSON lines written by `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
    /// `id label` file.
    #[arg(long)]
    pub labels: PathBuf,
    /// Reference MAE in degrees (SSL only).
    #[arg(long)]
    pub mae_baseline: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Coarse room grouping for per-room rows.
pub fn room_group(room: &RoomSpec) -> String {
    if room.rt60 == 0.0 {
        return "free field".into();
    }
    let band = match room.rt60 {
        t if t < 0.4 => "rt60 < 0.4 s",
        t if t < 0.6 => "rt60 0.4-0.6 s",
        _ => "rt60 >= 0.6 s",
    };
    band.into()
}

pub fn run(args: &ScoreArgs) -> Result<String, CliError> {
    let s = config::load(args.config.as_deref())?.score;
    let mae_baseline = args.mae_baseline.unwrap_or(s.mae_baseline);
    let truth: Vec<TruthRecord> = read_jsonl(&args.truth)?;
    let kind = match args.track {
        TrackArg::Kws => LabelKind::Kws,
        TrackArg::Ssl => LabelKind::Ssl,
    };
    let labels = parse_labels(&read_text(&args.labels)?, kind).map_err(|mut e| {
        e.message = format!("{}: {}", args.labels.display(), e.message);
        e
    })?;
    for id in labels.keys() {
        if !truth.iter().any(|t| &t.id == id) {
            return Err(CliError::data(format!("label id {id} has no ground truth")).with_id(id.clone()));
        }
    }
    let mut truth = truth;
    truth.sort_by(|a, b| a.id.cmp(&b.id));
    let label_of = |id: &str| {
        labels
            .get(id)
            .copied()
            .ok_or_else(|| CliError::data(format!("missing label for id {id}")).with_id(id))
    };

    let json = match args.track {
        TrackArg::Kws => {
            let items = truth
                .iter()
                .map(|t| {
                    Ok(KwsItem {
                        scenario: t.truth.scenario.label(t.truth.keyword),
                        room: room_group(&t.truth.room),
                        has_keyword: t.truth.keyword,
                        label: label_of(&t.id)? as u8,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = kws_report(&items)?;
            debug_assert_eq!(report.track, Track::Kws);
            serde_json::to_string_pretty(&report)
        }
        TrackArg::Ssl => {
            let items = truth
                .iter()
                .map(|t| {
                    let &target = t.truth.speech_doas.first().ok_or_else(|| {
                        CliError::data(format!("truth for {} has no speech direction", t.id)).with_id(t.id.clone())
                    })?;
                    Ok(SslItem {
                        scenario: t.truth.scenario.label(t.truth.keyword),
                        room: room_group(&t.truth.room),
                        truth: target,
                        label: label_of(&t.id)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            serde_json::to_string_pretty(&ssl_report(&items, mae_baseline)?)
        }
    }
    .map_err(|e| CliError::data(e.to_string()))?;
    if let Some(out) = &args.out {
        write_text(out, &format!("{json}\n"))?;
    }
    Ok(json)
}
