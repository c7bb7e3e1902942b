//! Newline-delimited JSON manifests, one image per line:
//!
//! ```text
//! {"path": "imgs/a.png", "label": "half-full", "container_id": "c07", "split_tag": "train"}
//! ```
//!
//! `path` is resolved against the manifest's directory when relative.
//! `container_id` and `split_tag` are optional. Blank lines are ignored.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AugmentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Empty,
    HalfFull,
    Full,
    Unknown,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Empty, Label::HalfFull, Label::Full, Label::Unknown];

    pub fn name(self) -> &'static str {
        match self {
            Label::Empty => "empty",
            Label::HalfFull => "half-full",
            Label::Full => "full",
            Label::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Label::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("label `{s}` is not one of empty, half-full, full, unknown"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_path: PathBuf,
    pub label: Label,
    pub container_id: Option<String>,
    pub split_tag: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    path: String,
    label: String,
    #[serde(default)]
    container_id: Option<String>,
    #[serde(default)]
    split_tag: Option<String>,
}

/// Parses manifest text; relative paths are joined onto `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| AugmentError::Manifest {
            line: line_no,
            message,
        };
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let label: Label = raw.label.parse().map_err(err)?;
        let path = PathBuf::from(&raw.path);
        let image_path = if path.is_absolute() {
            path
        } else {
            base.join(path)
        };
        if !image_path.is_file() {
            return Err(err(format!("image `{}` not found", image_path.display())));
        }
        entries.push(ManifestEntry {
            image_path,
            label,
            container_id: raw.container_id,
            split_tag: raw.split_tag,
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(&text, base)
}
