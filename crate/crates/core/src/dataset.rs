//! Image records, the JSON Lines manifest, discovery, counts, splits and
//! validation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::imageio;
use crate::radiometric::{load_tiff, LoadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Pending,
    Accepted,
    Excluded,
}

impl Decision {
    /// Pending may move to either verdict, verdicts may swap, and nothing
    /// returns to pending. Repeating the current state is allowed.
    pub fn can_become(self, to: Decision) -> bool {
        self == to || to != Decision::Pending
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Pending => "pending",
            Decision::Accepted => "accepted",
            Decision::Excluded => "excluded",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Decision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(Decision::Pending),
            "accepted" => Ok(Decision::Accepted),
            "excluded" => Ok(Decision::Excluded),
            other => Err(Error::invalid(format!("unknown decision {other:?}"))),
        }
    }
}

/// What the pipeline concluded for a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Selected,
    /// The temperature histogram had no split, so no prompts were placed.
    NoFire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub burn_location: String,
    pub rgb_path: PathBuf,
    pub thermal_path: PathBuf,
    pub tiff_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_path: Option<PathBuf>,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_report_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proposal_paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl ImageRecord {
    pub fn new(id: impl Into<String>, burn_location: impl Into<String>, rgb: PathBuf, thermal: PathBuf, tiff: PathBuf) -> Self {
        Self {
            id: id.into(),
            burn_location: burn_location.into(),
            rgb_path: rgb,
            thermal_path: thermal,
            tiff_path: tiff,
            mask_path: None,
            points_path: None,
            decision: Decision::Pending,
            selection_report_path: None,
            proposal_paths: Vec::new(),
            chosen: None,
            outcome: None,
            reason: None,
        }
    }

    pub fn set_decision(&mut self, to: Decision) -> Result<()> {
        if !self.decision.can_become(to) {
            return Err(Error::IllegalTransition {
                id: self.id.clone(),
                from: self.decision.to_string(),
                to: to.to_string(),
            });
        }
        self.decision = to;
        Ok(())
    }

    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [&mut self.rgb_path, &mut self.thermal_path, &mut self.tiff_path]
            .into_iter()
            .chain(self.mask_path.as_mut())
            .chain(self.points_path.as_mut())
            .chain(self.selection_report_path.as_mut())
            .chain(self.proposal_paths.iter_mut())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    config_snapshot: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub config_snapshot: serde_json::Value,
    pub records: Vec<ImageRecord>,
}

impl Manifest {
    pub fn new(config_snapshot: serde_json::Value, records: Vec<ImageRecord>) -> Result<Self> {
        let m = Self { config_snapshot, records };
        m.check_unique_ids()?;
        Ok(m)
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate record id {:?}", r.id)));
            }
        }
        Ok(())
    }

    /// One header line then one record per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = serde_json::to_string(&Header {
            config_snapshot: self.config_snapshot.clone(),
        })?;
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
        let mut config_snapshot = serde_json::Value::Null;
        if let Some((_, first)) = lines.peek() {
            let v: serde_json::Value = serde_json::from_str(first)
                .map_err(|e| Error::Dataset(format!("manifest line 1: {e}")))?;
            if v.get("config_snapshot").is_some() && v.get("id").is_none() {
                config_snapshot = v["config_snapshot"].clone();
                lines.next();
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let r: ImageRecord = serde_json::from_str(line)
                .map_err(|e| Error::Dataset(format!("manifest line {}: {e}", i + 1)))?;
            records.push(r);
        }
        Self::new(config_snapshot, records)
    }

    /// Reads a manifest, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_jsonl(&text)?;
        let base = manifest_dir(path);
        for r in &mut m.records {
            for p in r.paths_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(m)
    }

    /// Atomically writes the manifest, storing paths relative to its directory.
    pub fn save(&self, path: &Path) -> Result<()> {
        let base = manifest_dir(path);
        let mut rel = self.clone();
        for r in &mut rel.records {
            for p in r.paths_mut() {
                *p = fsutil::relative_to(&absolute(p), &base);
            }
        }
        fsutil::write_atomic(path, rel.to_jsonl()?.as_bytes())
    }

    pub fn get(&self, id: &str) -> Option<&ImageRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut ImageRecord> {
        self.records.iter_mut().find(|r| r.id == id)
    }

    pub fn excluded_ids(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.decision == Decision::Excluded)
            .map(|r| r.id.as_str())
            .collect()
    }

    /// `excluded.txt`: one id per line.
    pub fn write_excluded(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for id in self.excluded_ids() {
            text.push_str(id);
            text.push('\n');
        }
        fsutil::write_atomic(path, text.as_bytes())
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn manifest_dir(path: &Path) -> PathBuf {
    absolute(path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairingRule {
    pub rgb_dir: String,
    pub thermal_dir: String,
    pub tiff_dir: String,
    /// First capture group is the burn location.
    pub location_pattern: String,
}

impl Default for PairingRule {
    fn default() -> Self {
        Self {
            rgb_dir: "rgb".into(),
            thermal_dir: "thermal".into(),
            tiff_dir: "tiff".into(),
            location_pattern: "^([^_]+)_".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    pub manifest: Manifest,
    pub warnings: Vec<String>,
}

fn list_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.starts_with('.') {
            continue;
        }
        if let Some(prev) = out.insert(stem.to_string(), path.clone()) {
            return Err(Error::Dataset(format!(
                "duplicate stem {stem:?}: {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(out)
}

/// Builds one pending record per stem present in all three modality
/// directories, sorted by stem. Files missing a partner become warnings.
pub fn discover(root: &Path, rule: &PairingRule) -> Result<Discovery> {
    std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let pattern = Regex::new(&rule.location_pattern)
        .map_err(|e| Error::invalid(format!("bad location pattern: {e}")))?;
    let dirs = [&rule.rgb_dir, &rule.thermal_dir, &rule.tiff_dir];
    let maps: Vec<BTreeMap<String, PathBuf>> = dirs
        .iter()
        .map(|d| list_stems(&root.join(d)))
        .collect::<Result<_>>()?;
    let all: std::collections::BTreeSet<&String> = maps.iter().flat_map(|m| m.keys()).collect();

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for stem in all {
        let found: Vec<Option<&PathBuf>> = maps.iter().map(|m| m.get(stem)).collect();
        if let [Some(rgb), Some(thermal), Some(tiff)] = found[..] {
            let location = match pattern.captures(stem).and_then(|c| c.get(1)) {
                Some(m) => m.as_str().to_string(),
                None => {
                    warnings.push(format!("{stem}: no burn location in name, using \"unknown\""));
                    "unknown".to_string()
                }
            };
            records.push(ImageRecord::new(stem.clone(), location, rgb.clone(), thermal.clone(), tiff.clone()));
        } else {
            let present: Vec<String> = found.iter().flatten().map(|p| p.display().to_string()).collect();
            let missing: Vec<&str> = found
                .iter()
                .zip(dirs)
                .filter(|(p, _)| p.is_none())
                .map(|(_, d)| d.as_str())
                .collect();
            warnings.push(format!(
                "unpaired {stem}: have {}, missing {}/",
                present.join(", "),
                missing.join("/, ")
            ));
        }
    }
    Ok(Discovery {
        manifest: Manifest::new(serde_json::Value::Null, records)?,
        warnings,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub location: String,
    pub excluded: usize,
    #[serde(rename = "final")]
    pub final_count: usize,
    pub pending: usize,
}

impl CountRow {
    pub fn total(&self) -> usize {
        self.excluded + self.final_count + self.pending
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub rows: Vec<CountRow>,
    pub total: CountRow,
}

/// Tallies decisions per burn location (alphabetical) plus a total row.
pub fn counts(manifest: &Manifest) -> CountsTable {
    let mut by_loc: BTreeMap<&str, CountRow> = BTreeMap::new();
    let mut total = CountRow {
        location: "All Burn Locations".into(),
        ..CountRow::default()
    };
    for r in &manifest.records {
        let row = by_loc.entry(&r.burn_location).or_insert_with(|| CountRow {
            location: r.burn_location.clone(),
            ..CountRow::default()
        });
        for row in [row, &mut total] {
            match r.decision {
                Decision::Excluded => row.excluded += 1,
                Decision::Accepted => row.final_count += 1,
                Decision::Pending => row.pending += 1,
            }
        }
    }
    CountsTable {
        rows: by_loc.into_values().collect(),
        total,
    }
}

impl fmt::Display for CountsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = ["Burn Location", "Excluded Count", "Final Count", "Pending"];
        let w0 = self
            .rows
            .iter()
            .chain([&self.total])
            .map(|r| r.location.len())
            .chain([head[0].len()])
            .max()
            .unwrap_or(0);
        let line = |f: &mut fmt::Formatter<'_>, a: &str, b: &str, c: &str, d: &str| {
            writeln!(f, "{a:<w0$}  {b:>14}  {c:>11}  {d:>7}")
        };
        line(f, head[0], head[1], head[2], head[3])?;
        for r in &self.rows {
            line(f, &r.location, &r.excluded.to_string(), &r.final_count.to_string(), &r.pending.to_string())?;
        }
        let t = &self.total;
        line(f, &t.location, &t.excluded.to_string(), &t.final_count.to_string(), &t.pending.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded shuffle of the accepted ids, then a prefix of `round(f * n)` for
/// training.
pub fn split(manifest: &Manifest, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::invalid(format!("train fraction must be in [0, 1], got {train_fraction}")));
    }
    let mut ids: Vec<String> = manifest
        .records
        .iter()
        .filter(|r| r.decision == Decision::Accepted)
        .map(|r| r.id.clone())
        .collect();
    if ids.is_empty() {
        return Err(Error::Dataset("no accepted records to split".into()));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * ids.len() as f64).round() as usize;
    let test = ids.split_off(n_train);
    Ok(Split { train: ids, test })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub id: String,
    pub problem: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks file presence, TIFF decodability, mask/TIFF size agreement and
/// decision consistency. RGB/thermal size disagreement is only a warning.
pub fn validate(manifest: &Manifest, tiff_options: &LoadOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for r in &manifest.records {
        let mut bad = |problem: String| {
            report.violations.push(Violation { id: r.id.clone(), problem });
        };
        if !seen.insert(&r.id) {
            bad("duplicate id".into());
        }
        let required = [("rgb", &r.rgb_path), ("thermal", &r.thermal_path), ("tiff", &r.tiff_path)];
        let optional = [("mask", &r.mask_path), ("points", &r.points_path), ("selection report", &r.selection_report_path)];
        let listed = required
            .iter()
            .map(|(k, p)| (*k, *p))
            .chain(optional.iter().filter_map(|(k, p)| p.as_ref().map(|p| (*k, p))))
            .chain(r.proposal_paths.iter().map(|p| ("proposal", p)));
        for (kind, p) in listed {
            if !p.is_file() {
                bad(format!("{kind} file missing: {}", p.display()));
            }
        }
        let tiff_dims = if r.tiff_path.is_file() {
            match load_tiff(&r.tiff_path, tiff_options) {
                Ok(g) => Some(g.dims()),
                Err(e) => {
                    bad(format!("tiff not loadable: {e}"));
                    None
                }
            }
        } else {
            None
        };
        if let (Some(mask), Some(td)) = (r.mask_path.as_ref().filter(|p| p.is_file()), tiff_dims) {
            match imageio::image_dims(mask) {
                Ok(md) if md != td => bad(format!("mask is {}x{} but tiff is {}x{}", md.0, md.1, td.0, td.1)),
                Ok(_) => {}
                Err(e) => bad(format!("mask not readable: {e}")),
            }
        }
        if r.decision == Decision::Accepted && r.mask_path.is_none() {
            bad("accepted without a mask".into());
        }
        if let Some(c) = r.chosen {
            if c >= r.proposal_paths.len() {
                bad(format!("chosen index {c} but {} proposals", r.proposal_paths.len()));
            }
        }
        if r.rgb_path.is_file() && r.thermal_path.is_file() {
            if let (Ok(a), Ok(b)) = (imageio::image_dims(&r.rgb_path), imageio::image_dims(&r.thermal_path)) {
                if a != b {
                    report.warnings.push(Violation {
                        id: r.id.clone(),
                        problem: format!("rgb is {}x{} but thermal is {}x{}", a.0, a.1, b.0, b.1),
                    });
                }
            }
        }
    }
    report
}
