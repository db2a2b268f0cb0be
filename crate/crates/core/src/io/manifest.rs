//! Scene manifests: JSON Lines, one scene per line.
//!
//! ```text
//! {"id": "scene_001", "cube_path": "cubes/scene_001.bhsc", "tags": ["test"]}
//! {"id": "studio_1", "rgb_clean_path": "rgb/studio_1.png", "tags": ["test", "out_of_scope"]}
//! ```
//!
//! Relative paths resolve against the manifest's directory. Blank lines and
//! lines starting with `#` are skipped.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OUT_OF_SCOPE_TAG: &str = "out_of_scope";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgb_clean_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgb_real_path: Option<PathBuf>,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

impl SceneRecord {
    pub fn new(id: impl Into<String>, cube_path: impl Into<PathBuf>) -> Self {
        SceneRecord {
            id: id.into(),
            cube_path: Some(cube_path.into()),
            rgb_clean_path: None,
            rgb_real_path: None,
            tags: BTreeSet::new(),
        }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        [&self.cube_path, &self.rgb_clean_path, &self.rgb_real_path]
            .into_iter()
            .filter_map(|p| p.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub records: Vec<SceneRecord>,
    pub root: PathBuf,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SceneRecord> {
        self.records.iter()
    }

    pub fn get(&self, id: &str) -> Option<&SceneRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// `path` joined onto the manifest root unless already absolute.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        }
    }

    pub fn cube_path(&self, record: &SceneRecord) -> Option<PathBuf> {
        record.cube_path.as_deref().map(|p| self.resolve(p))
    }

    /// Every referenced path that does not exist, as `id: path` strings.
    pub fn dangling_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        for rec in &self.records {
            for p in rec.paths() {
                let full = self.resolve(p);
                if !full.exists() {
                    out.push(format!("{}: dangling path {}", rec.id, full.display()));
                }
            }
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a Manifest {
    type Item = &'a SceneRecord;
    type IntoIter = std::slice::Iter<'a, SceneRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Parses manifest text without touching the filesystem. Syntax errors,
/// empty ids, records without any path and duplicate ids are all collected
/// into one [`Error::Manifest`].
pub fn parse_manifest(text: &str, root: impl Into<PathBuf>) -> Result<Manifest> {
    let mut records = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    let mut reported_dupes = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: SceneRecord = match serde_json::from_str(trimmed) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("line {line_no}: {e}"));
                continue;
            }
        };
        if rec.id.trim().is_empty() {
            problems.push(format!("line {line_no}: empty id"));
            continue;
        }
        if rec.paths().next().is_none() {
            problems.push(format!("line {line_no}: scene `{}` has no cube or rgb path", rec.id));
        }
        if !seen.insert(rec.id.clone()) {
            if reported_dupes.insert(rec.id.clone()) {
                problems.push(format!("duplicate id `{}`", rec.id));
            }
            continue;
        }
        records.push(rec);
    }
    if problems.is_empty() {
        Ok(Manifest {
            records,
            root: root.into(),
        })
    } else {
        Err(Error::Manifest(problems))
    }
}

/// Reads and validates a manifest file, including that every referenced path
/// exists. All offenders are reported together.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let m = load_manifest_unchecked(path)?;
    let dangling = m.dangling_paths();
    if dangling.is_empty() {
        Ok(m)
    } else {
        Err(Error::Manifest(dangling))
    }
}

/// As [`load_manifest`] but without the existence check, for callers that
/// report missing files per scene.
pub fn load_manifest_unchecked(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    parse_manifest(&text, root)
}

pub fn write_manifest(m: &Manifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, m.to_jsonl()).map_err(|e| Error::io(path, e))
}

/// Records carrying `tag`, in their original order.
pub fn filter_by_tag(m: &Manifest, tag: &str) -> Manifest {
    Manifest {
        records: m.records.iter().filter(|r| r.has_tag(tag)).cloned().collect(),
        root: m.root.clone(),
    }
}
