//! Whole-corpus run: calibrate, locate prompts, propose, select, and write
//! masks, points, reports and the manifest under one output directory.

use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autopoint::{autolocate, AutopointConfig};
use crate::dataset::{discover, ImageRecord, Manifest, Outcome, PairingRule};
use crate::error::{Error, Result};
use crate::fsutil::{create_dir, write_atomic};
use crate::imageio;
use crate::kernels::{binarize, thermal_jpg_to_gray};
use crate::proposer::{propose_baseline, ExternalProposer, ProposalSet, DEFAULT_MAX_IN_FLIGHT, DEFAULT_TIMEOUT};
use crate::radiometric::{calibrate, load_tiff, saturation_report, CalibrationPolicy, LoadOptions, SaturationStats};
use crate::raster::BinaryMask;
use crate::topsis::{select_mask, thermal_threshold_mask, SelectionContext, SelectionReport, DEFAULT_WEIGHTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposerConfig {
    /// Base URL of the segmentation service. Ignored when `baseline` is set.
    pub endpoint: Option<String>,
    pub baseline: bool,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ProposerConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            baseline: false,
            timeout_secs: DEFAULT_TIMEOUT.as_secs(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub calibration: CalibrationPolicy,
    pub tiff: LoadOptions,
    pub autopoint: AutopointConfig,
    pub weights: [f64; 5],
    /// Fixed threshold for the thermal-image mask; Otsu when absent.
    pub thermal_thresh: Option<u8>,
    pub proposer: ProposerConfig,
    pub pairing: PairingRule,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            calibration: CalibrationPolicy::default(),
            tiff: LoadOptions::default(),
            autopoint: AutopointConfig::default(),
            weights: DEFAULT_WEIGHTS,
            thermal_thresh: None,
            proposer: ProposerConfig::default(),
            pairing: PairingRule::default(),
            batch_size: 8,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.calibration.validate()?;
        self.autopoint.validate()?;
        if self.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid(format!("weights must be positive, got {:?}", self.weights)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if !self.proposer.baseline && self.proposer.endpoint.is_none() {
            return Err(Error::invalid("either a proposer endpoint or the baseline proposer is required"));
        }
        Ok(())
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.snapshot()).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub enum Proposer {
    Baseline,
    External(ExternalProposer),
}

impl Proposer {
    pub fn from_config(cfg: &ProposerConfig) -> Result<Self> {
        if cfg.baseline {
            return Ok(Proposer::Baseline);
        }
        let endpoint = cfg.endpoint.clone().ok_or_else(|| Error::invalid("no proposer endpoint"))?;
        let mut p = ExternalProposer::new(endpoint, Duration::from_secs(cfg.timeout_secs), cfg.max_in_flight)?;
        if let Some(dir) = &cfg.cache_dir {
            p = p.with_cache(dir);
        }
        Ok(Proposer::External(p))
    }
}

/// Where one record's outputs go, relative to the run directory.
pub struct RecordPaths {
    pub mask: PathBuf,
    pub points: PathBuf,
    pub report: PathBuf,
    pub calibration: PathBuf,
    pub proposals: [PathBuf; 3],
}

impl RecordPaths {
    pub fn new(out: &Path, id: &str) -> Self {
        Self {
            mask: out.join("masks").join(format!("{id}.png")),
            points: out.join("points").join(format!("{id}.json")),
            report: out.join("reports").join(format!("{id}.json")),
            calibration: out.join("reports").join(format!("{id}.calibration.json")),
            proposals: [0, 1, 2].map(|k| out.join("masks").join("proposals").join(format!("{id}_{k}.png"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub id: String,
    pub outcome: Outcome,
    pub chosen: Option<usize>,
    pub saturation: SaturationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub records: usize,
    pub selected: usize,
    pub no_fire: usize,
    /// How often each proposal index was chosen.
    pub chosen_histogram: [usize; 3],
    pub pixels_above_caution: usize,
    pub pixels_at_or_above_clip_max: usize,
    pub frames_with_caution_pixels: usize,
}

fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    write_atomic(path, &imageio::encode_mask_png(mask)?)
}

/// Runs every stage for one record and updates it in place.
pub fn process_record(record: &mut ImageRecord, cfg: &PipelineConfig, proposer: &Proposer, out: &Path) -> Result<RecordSummary> {
    let paths = RecordPaths::new(out, &record.id);
    let raw = load_tiff(&record.tiff_path, &cfg.tiff)?;
    let saturation = saturation_report(&raw, &cfg.calibration);
    let grid = calibrate(&raw, &cfg.calibration);
    write_atomic(&paths.calibration, &to_json_bytes(&saturation)?)?;

    let thermal = image::open(&record.thermal_path)
        .map_err(|e| Error::Image(format!("{}: {e}", record.thermal_path.display())))?;
    let gray = thermal_jpg_to_gray(&thermal)?;
    gray.same_dims(&grid)?;

    let points = match autolocate(&grid, &cfg.autopoint) {
        Ok(p) => Some(p),
        Err(Error::DegenerateHistogram(_)) => None,
        Err(e) => return Err(e),
    };
    let Some(points) = points else {
        let no_points = serde_json::json!({"outcome": "no_fire", "positives": [], "negatives": []});
        write_atomic(&paths.points, &to_json_bytes(&no_points)?)?;
        write_mask(&BinaryMask::filled(grid.width(), grid.height(), false), &paths.mask)?;
        record.mask_path = Some(paths.mask);
        record.points_path = Some(paths.points);
        record.selection_report_path = None;
        record.proposal_paths.clear();
        record.chosen = None;
        record.outcome = Some(Outcome::NoFire);
        return Ok(RecordSummary { id: record.id.clone(), outcome: Outcome::NoFire, chosen: None, saturation });
    };
    write_atomic(&paths.points, points.to_json()?.as_bytes())?;

    let proposals: ProposalSet = match proposer {
        Proposer::Baseline => propose_baseline(&gray, &points),
        // The service needs at least one prompt.
        Proposer::External(_) if points.is_empty() => propose_baseline(&gray, &points),
        Proposer::External(p) => p.propose(&thermal.to_rgb8(), &points)?,
    };

    let otsu_mask = binarize(&grid, points.tau);
    let thermal_mask = thermal_threshold_mask(&gray, cfg.thermal_thresh);
    let ctx = SelectionContext {
        otsu_mask: &otsu_mask,
        thermal_mask: &thermal_mask,
        grid: &grid,
        empty_sentinel: cfg.calibration.clip_max,
    };
    let (chosen, result, report) = select_mask(&proposals, &ctx, cfg.weights)?;

    for (mask, path) in proposals.masks().zip(&paths.proposals) {
        write_mask(mask, path)?;
    }
    write_mask(&chosen, &paths.mask)?;
    write_atomic(&paths.report, &to_json_bytes(&report)?)?;

    record.mask_path = Some(paths.mask);
    record.points_path = Some(paths.points);
    record.selection_report_path = Some(paths.report);
    record.proposal_paths = paths.proposals.to_vec();
    record.chosen = Some(result.chosen_index);
    record.outcome = Some(Outcome::Selected);
    Ok(RecordSummary {
        id: record.id.clone(),
        outcome: Outcome::Selected,
        chosen: Some(result.chosen_index),
        saturation,
    })
}

pub fn read_report(path: &Path) -> Result<SelectionReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs the pipeline over every record discovered under `root`, with `jobs`
/// worker threads (all cores when `None`). Earlier review decisions found in
/// an existing `out/manifest.jsonl` are carried over.
pub fn run(root: &Path, out: &Path, cfg: &PipelineConfig, jobs: Option<usize>) -> Result<(Manifest, RunSummary, Vec<String>)> {
    cfg.validate()?;
    let discovery = discover(root, &cfg.pairing)?;
    for sub in ["masks/proposals", "points", "reports"] {
        create_dir(&out.join(sub))?;
    }
    let manifest_path = out.join("manifest.jsonl");
    let previous = if manifest_path.is_file() { Some(Manifest::load(&manifest_path)?) } else { None };

    let proposer = Proposer::from_config(&cfg.proposer)?;
    let mut records = discovery.manifest.records;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let summaries: Vec<RecordSummary> = pool.install(|| {
        records
            .par_iter_mut()
            .map(|r| process_record(r, cfg, &proposer, out).map_err(|e| annotate(&r.id, e)))
            .collect::<Result<_>>()
    })?;

    if let Some(prev) = &previous {
        for r in &mut records {
            if let Some(old) = prev.get(&r.id) {
                r.decision = old.decision;
                r.reason = old.reason.clone();
            }
        }
    }

    let manifest = Manifest::new(cfg.snapshot(), records)?;
    manifest.save(&manifest_path)?;

    let mut summary = RunSummary {
        config_hash: cfg.hash(),
        records: summaries.len(),
        selected: 0,
        no_fire: 0,
        chosen_histogram: [0; 3],
        pixels_above_caution: 0,
        pixels_at_or_above_clip_max: 0,
        frames_with_caution_pixels: 0,
    };
    for s in &summaries {
        match s.outcome {
            Outcome::Selected => summary.selected += 1,
            Outcome::NoFire => summary.no_fire += 1,
        }
        if let Some(k) = s.chosen {
            summary.chosen_histogram[k] += 1;
        }
        summary.pixels_above_caution += s.saturation.pixels_above_caution;
        summary.pixels_at_or_above_clip_max += s.saturation.pixels_at_or_above_clip_max;
        summary.frames_with_caution_pixels += (s.saturation.pixels_above_caution > 0) as usize;
    }
    write_atomic(&out.join("aggregate.json"), &to_json_bytes(&summary)?)?;
    Ok((manifest, summary, discovery.warnings))
}

fn annotate(id: &str, e: Error) -> Error {
    match e {
        Error::Protocol(m) => Error::Protocol(format!("{id}: {m}")),
        Error::Network(m) => Error::Network(format!("{id}: {m}")),
        Error::Dataset(m) => Error::Dataset(format!("{id}: {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{id}: {m}")),
        other => other,
    }
}
