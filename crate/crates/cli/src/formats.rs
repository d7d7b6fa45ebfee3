use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use asc_core::room::GroundTruth;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One recording to process. Relative paths resolve against the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub wav_path: String,
}

/// One posterior file for `kws-decide`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEntry {
    pub id: String,
    pub posterior_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: String,
    #[serde(flatten)]
    pub truth: GroundTruth,
}

pub trait HasId {
    fn id(&self) -> &str;
}

impl HasId for ManifestEntry {
    fn id(&self) -> &str {
        &self.id
    }
}

impl HasId for PosteriorEntry {
    fn id(&self) -> &str {
        &self.id
    }
}

impl HasId for TruthRecord {
    fn id(&self) -> &str {
        &self.id
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// JSON lines; blank lines are skipped. Ids must be unique.
pub fn parse_jsonl<T: DeserializeOwned + HasId>(text: &str) -> Result<Vec<T>, CliError> {
    let mut out: Vec<T> = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(line).map_err(|e| CliError::parse(e.to_string(), i + 1))?;
        if !seen.insert(item.id().to_string()) {
            return Err(CliError::parse(format!("duplicate id {}", item.id()), i + 1).with_id(item.id()));
        }
        out.push(item);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned + HasId>(path: &Path) -> Result<Vec<T>, CliError> {
    parse_jsonl(&read_text(path)?).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        e
    })
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    for it in items {
        serde_json::to_writer(&mut buf, it).map_err(|e| CliError::data(e.to_string()))?;
        buf.push(b'\n');
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&buf).map_err(|e| CliError::io(path, e))
}

pub fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn base_dir(file: &Path) -> PathBuf {
    file.parent().map(Path::to_path_buf).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    /// 0 or 1.
    Kws,
    /// Integer azimuth 1..=360.
    Ssl,
}

impl LabelKind {
    fn check(self, value: &str) -> Option<u16> {
        // Canonical decimal only: no signs, padding or fractions.
        if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) || (value.len() > 1 && value.starts_with('0')) {
            return None;
        }
        let v: u16 = value.parse().ok()?;
        let ok = match self {
            LabelKind::Kws => v <= 1,
            LabelKind::Ssl => (1..=360).contains(&v),
        };
        ok.then_some(v)
    }
}

/// `id label` rows, sorted by id.
pub type Labels = BTreeMap<String, u16>;

pub fn parse_labels(text: &str, kind: LabelKind) -> Result<Labels, CliError> {
    let mut out = Labels::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, value] = fields[..] else {
            return Err(CliError::parse(format!("row {row}: expected `id label`"), row));
        };
        let v = kind
            .check(value)
            .ok_or_else(|| CliError::parse(format!("row {row}: invalid label {value:?}"), row).with_id(id))?;
        if out.insert(id.to_string(), v).is_some() {
            return Err(CliError::parse(format!("row {row}: duplicate id {id}"), row).with_id(id));
        }
    }
    Ok(out)
}

pub fn format_labels(labels: &Labels, kind: LabelKind) -> Result<String, CliError> {
    let mut s = String::new();
    for (id, &v) in labels {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(CliError::data(format!("id {id:?} cannot be written to a label file")));
        }
        if kind.check(&v.to_string()).is_none() {
            return Err(CliError::data(format!("label {v} for {id} outside the alphabet")).with_id(id.clone()));
        }
        s.push_str(&format!("{id} {v}\n"));
    }
    Ok(s)
}
