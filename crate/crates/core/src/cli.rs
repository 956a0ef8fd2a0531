//! Command-line front end. `run` parses arguments and maps results to exit
//! codes: 0 success, 1 invalid input or usage, 2 I/O or protocol failure.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::autopoint::{autolocate, AutopointConfig, PointSet};
use crate::dataset::{counts, split, validate, Manifest};
use crate::error::{Error, Result};
use crate::fsutil::{create_dir, write_atomic};
use crate::imageio;
use crate::kernels::{binarize, thermal_jpg_to_gray};
use crate::losses::{self, LossWeights, ProbMap};
use crate::metrics::{aggregate_seg, aggregate_temp, seg_scores, temp_tolerance_accuracy, SegScores, TempAccuracy};
use crate::pipeline::{self, PipelineConfig};
use crate::proposer::{propose_baseline, ExternalProposer, MaskProposal, ProposalSet, ProposalSource, DEFAULT_MAX_IN_FLIGHT};
use crate::radiometric::{calibrate, grid_stats, load_tiff, saturation_report, write_tiff, CalibrationPolicy, LinearScale, LoadOptions};
use crate::synth::{corpus_stem, gen_scene, random_spec, write_scene, SceneSpec};
use crate::topsis::{select_mask, thermal_threshold_mask, SelectionContext, DEFAULT_WEIGHTS};

#[derive(Debug, Parser)]
#[command(name = "firelabel", version, about = "Fire pseudo-label generation, selection, review and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clip a radiometric TIFF and report saturation.
    Calibrate(CalibrateArgs),
    /// Place positive and negative point prompts on a TIFF.
    Points(PointsArgs),
    /// Produce three candidate masks for a thermal image.
    Propose(ProposeArgs),
    /// Rank proposals with TOPSIS and write the chosen mask.
    Select(SelectArgs),
    /// Run every stage over a directory of paired images.
    Pipeline(PipelineArgs),
    /// Score predicted masks (and optionally temperatures) against references.
    Evaluate(EvaluateArgs),
    /// Reference loss evaluation.
    Losses {
        #[command(subcommand)]
        command: LossesCommand,
    },
    /// Decision tallies per burn location.
    Counts(CountsArgs),
    /// Seeded train/test split of accepted records.
    Split(SplitArgs),
    /// Check a manifest for missing files and inconsistent records.
    Validate(ValidateArgs),
    /// Synthetic scene generation.
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
    /// Review service.
    Review {
        #[command(subcommand)]
        command: ReviewCommand,
    },
}

#[derive(Debug, Args, Clone, Default)]
struct TiffArgs {
    /// Scale for integer-sample TIFFs (temperature = sample * scale + offset).
    #[arg(long)]
    int_scale: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    int_offset: f64,
}

impl TiffArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            integer_scale: self.int_scale.map(|scale| LinearScale { scale, offset: self.int_offset }),
        }
    }
}

#[derive(Debug, Args, Clone)]
struct PolicyArgs {
    #[arg(long, default_value_t = 0.0)]
    clip_min: f64,
    #[arg(long, default_value_t = 500.0)]
    clip_max: f64,
    #[arg(long, default_value_t = 450.0)]
    caution: f64,
}

impl PolicyArgs {
    fn policy(&self) -> Result<CalibrationPolicy> {
        CalibrationPolicy::new(self.clip_min, self.clip_max, self.caution)
    }
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    tiff: PathBuf,
    /// Write the clipped grid as a float TIFF.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    tiff_args: TiffArgs,
}

#[derive(Debug, Args, Clone, Default)]
struct AutopointArgs {
    #[arg(long)]
    pos_patch: Option<usize>,
    #[arg(long)]
    neg_patch: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    neg_epsilon: Option<f64>,
    #[arg(long)]
    canny_high: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long)]
    max_positive: Option<usize>,
    #[arg(long)]
    max_negative: Option<usize>,
}

impl AutopointArgs {
    fn apply(&self, c: &mut AutopointConfig) {
        if let Some(v) = self.pos_patch { c.pos_patch = v; }
        if let Some(v) = self.neg_patch { c.neg_patch = v; }
        if let Some(v) = self.epsilon { c.epsilon = v; }
        if let Some(v) = self.neg_epsilon { c.negative_epsilon = Some(v); }
        if let Some(v) = self.canny_high { c.canny_high = v; }
        if let Some(v) = self.d_max { c.d_max = v; }
        if let Some(v) = self.max_positive { c.max_positive = v; }
        if let Some(v) = self.max_negative { c.max_negative = v; }
    }
}

#[derive(Debug, Args)]
struct PointsArgs {
    tiff: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    autopoint: AutopointArgs,
    #[command(flatten)]
    tiff_args: TiffArgs,
}

#[derive(Debug, Args, Clone, Default)]
struct ProposerArgs {
    /// Use the classical baseline instead of a segmentation service.
    #[arg(long, conflicts_with = "endpoint")]
    baseline: bool,
    /// Base URL of a service implementing `POST /predict`.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Directory for cached service responses.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProposeArgs {
    /// Thermal image (3-channel 8-bit).
    #[arg(long)]
    thermal: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    proposer: ProposerArgs,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    tiff: PathBuf,
    #[arg(long)]
    thermal: PathBuf,
    /// Directory written by `propose`.
    #[arg(long)]
    proposals: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Five comma-separated weights.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    thermal_thresh: Option<u8>,
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    tiff_args: TiffArgs,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Directory holding rgb/, thermal/ and tiff/.
    #[arg(long)]
    root: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// JSON config; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    proposer: ProposerArgs,
    #[command(flatten)]
    autopoint: AutopointArgs,
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    thermal_thresh: Option<u8>,
    #[arg(long)]
    clip_min: Option<f64>,
    #[arg(long)]
    clip_max: Option<f64>,
    #[arg(long)]
    caution: Option<f64>,
    #[arg(long)]
    int_scale: Option<f64>,
    #[arg(long)]
    int_offset: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Directory of predicted masks (`<id>.png`).
    #[arg(long)]
    pred: PathBuf,
    /// Directory of reference masks (`<id>.png`).
    #[arg(long)]
    gt: PathBuf,
    /// Predicted temperature TIFFs (`<id>.tif`).
    #[arg(long, requires = "gt_temp")]
    pred_temp: Option<PathBuf>,
    /// Reference temperature TIFFs (`<id>.tif`).
    #[arg(long, requires = "pred_temp")]
    gt_temp: Option<PathBuf>,
    /// Masks marking where temperature accuracy is measured; defaults to --gt.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Restrict to the ids listed in this file, one per line.
    #[arg(long)]
    ids: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tiff_args: TiffArgs,
}

#[derive(Debug, Subcommand)]
enum LossesCommand {
    /// Print teacher and student loss terms as JSON.
    Eval(LossesEvalArgs),
}

#[derive(Debug, Args)]
struct LossesEvalArgs {
    /// Fire probabilities in [0, 1] as a float TIFF.
    #[arg(long)]
    pred: PathBuf,
    /// Target mask PNG.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, requires = "gt_temp")]
    pred_temp: Option<PathBuf>,
    #[arg(long, requires = "pred_temp")]
    gt_temp: Option<PathBuf>,
    /// Fire mask for the temperature term; defaults to --target.
    #[arg(long)]
    fire: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    lambda_dice: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda_student_dice: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_flame_l1: f64,
    #[arg(long, default_value_t = losses::DEFAULT_DICE_SMOOTH)]
    smooth: f64,
}

#[derive(Debug, Args)]
struct CountsArgs {
    manifest: PathBuf,
    #[arg(long)]
    json: bool,
    /// Also write the excluded ids, one per line.
    #[arg(long)]
    excluded_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    manifest: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for train.txt and test.txt; JSON on stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    manifest: PathBuf,
    #[command(flatten)]
    tiff_args: TiffArgs,
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Write scenes as tiff/, thermal/, rgb/ and gt/ under --out.
    Gen(SynthGenArgs),
}

#[derive(Debug, Args)]
struct SynthGenArgs {
    #[arg(long)]
    out: PathBuf,
    /// Scene spec JSON; scene i uses seed `spec.seed + i`. Random scenes otherwise.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 96)]
    height: usize,
}

#[derive(Debug, Subcommand)]
enum ReviewCommand {
    /// Serve the review API for a manifest.
    Serve(ReviewServeArgs),
}

#[derive(Debug, Args)]
struct ReviewServeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io_or_protocol() { 2 } else { 1 }
        }
    }
}

fn emit_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Calibrate(a) => cmd_calibrate(a, out),
        Command::Points(a) => cmd_points(a, out),
        Command::Propose(a) => cmd_propose(a, out),
        Command::Select(a) => cmd_select(a, out),
        Command::Pipeline(a) => cmd_pipeline(a, out, err),
        Command::Evaluate(a) => cmd_evaluate(a, out, err),
        Command::Losses { command: LossesCommand::Eval(a) } => cmd_losses(a, out),
        Command::Counts(a) => cmd_counts(a, out),
        Command::Split(a) => cmd_split(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Synth { command: SynthCommand::Gen(a) } => cmd_synth(a, out),
        Command::Review { command: ReviewCommand::Serve(a) } => cmd_review(a, err),
    }
}

fn cmd_calibrate(a: CalibrateArgs, out: &mut dyn Write) -> Result<()> {
    let policy = a.policy.policy()?;
    let raw = load_tiff(&a.tiff, &a.tiff_args.options())?;
    let saturation = saturation_report(&raw, &policy);
    let grid = calibrate(&raw, &policy);
    let stats = grid_stats(&grid, &policy);
    if let Some(path) = &a.out {
        write_tiff(&grid, path)?;
    }
    emit_json(out, &json!({
        "width": grid.width(),
        "height": grid.height(),
        "saturation": saturation,
        "min": stats.min,
        "max": stats.max,
        "mean": stats.mean,
    }))
}

fn cmd_points(a: PointsArgs, out: &mut dyn Write) -> Result<()> {
    let policy = a.policy.policy()?;
    let mut cfg = AutopointConfig { otsu_range: (policy.clip_min, policy.clip_max), ..AutopointConfig::default() };
    a.autopoint.apply(&mut cfg);
    let grid = calibrate(&load_tiff(&a.tiff, &a.tiff_args.options())?, &policy);
    match autolocate(&grid, &cfg) {
        Ok(points) => {
            write_atomic(&a.out, points.to_json()?.as_bytes())?;
            emit_json(out, &json!({"outcome": "selected", "tau": points.tau, "positives": points.positives.len(), "negatives": points.negatives.len()}))
        }
        Err(Error::DegenerateHistogram(_)) => {
            let none = json!({"outcome": "no_fire", "positives": [], "negatives": []});
            write_atomic(&a.out, serde_json::to_string_pretty(&none)?.as_bytes())?;
            emit_json(out, &json!({"outcome": "no_fire"}))
        }
        Err(e) => Err(e),
    }
}

fn read_points(path: &Path) -> Result<PointSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PointSet::from_json(&text)
}

fn read_thermal(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

fn proposal_file(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("proposal_{k}.png"))
}

fn cmd_propose(a: ProposeArgs, out: &mut dyn Write) -> Result<()> {
    let thermal = read_thermal(&a.thermal)?;
    let points = read_points(&a.points)?;
    let set = if a.proposer.baseline {
        propose_baseline(&thermal_jpg_to_gray(&thermal)?, &points)
    } else {
        let endpoint = a.proposer.endpoint.clone().ok_or_else(|| Error::invalid("pass --endpoint or --baseline"))?;
        let timeout = Duration::from_secs(a.proposer.timeout_secs.unwrap_or(crate::proposer::DEFAULT_TIMEOUT.as_secs()));
        let mut p = ExternalProposer::new(endpoint, timeout, a.proposer.max_in_flight.unwrap_or(DEFAULT_MAX_IN_FLIGHT))?;
        if let Some(c) = &a.proposer.cache {
            p = p.with_cache(c);
        }
        p.propose(&thermal.to_rgb8(), &points)?
    };
    create_dir(&a.out)?;
    for (k, m) in set.masks().enumerate() {
        write_atomic(&proposal_file(&a.out, k), &imageio::encode_mask_png(m)?)?;
    }
    let meta = json!({"source": set.source, "confidences": set.confidences()});
    write_atomic(&a.out.join("proposals.json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
    emit_json(out, &meta)
}

fn read_proposals(dir: &Path) -> Result<ProposalSet> {
    let meta_path = dir.join("proposals.json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: serde_json::Value = serde_json::from_str(&text)?;
    let source: ProposalSource = serde_json::from_value(meta["source"].clone())?;
    let conf: [f64; 3] = serde_json::from_value(meta["confidences"].clone())?;
    let load = |k: usize| -> Result<MaskProposal> {
        Ok(MaskProposal { mask: imageio::read_mask(&proposal_file(dir, k))?, confidence: conf[k] })
    };
    Ok(ProposalSet { proposals: [load(0)?, load(1)?, load(2)?], source })
}

fn weights_from(v: Option<Vec<f64>>) -> Result<[f64; 5]> {
    match v {
        None => Ok(DEFAULT_WEIGHTS),
        Some(v) => v.try_into().map_err(|v: Vec<f64>| Error::invalid(format!("expected 5 weights, got {}", v.len()))),
    }
}

fn cmd_select(a: SelectArgs, out: &mut dyn Write) -> Result<()> {
    let policy = a.policy.policy()?;
    let weights = weights_from(a.weights)?;
    let grid = calibrate(&load_tiff(&a.tiff, &a.tiff_args.options())?, &policy);
    let gray = thermal_jpg_to_gray(&read_thermal(&a.thermal)?)?;
    let points = read_points(&a.points)?;
    let proposals = read_proposals(&a.proposals)?;
    let otsu_mask = binarize(&grid, points.tau);
    let thermal_mask = thermal_threshold_mask(&gray, a.thermal_thresh);
    let ctx = SelectionContext {
        otsu_mask: &otsu_mask,
        thermal_mask: &thermal_mask,
        grid: &grid,
        empty_sentinel: policy.clip_max,
    };
    let (mask, _, report) = select_mask(&proposals, &ctx, weights)?;
    create_dir(&a.out)?;
    write_atomic(&a.out.join("mask.png"), &imageio::encode_mask_png(&mask)?)?;
    let report_json = serde_json::to_value(&report)?;
    write_atomic(&a.out.join("report.json"), serde_json::to_string_pretty(&report_json)?.as_bytes())?;
    emit_json(out, &report_json)
}

fn pipeline_config(a: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = match &a.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    a.autopoint.apply(&mut cfg.autopoint);
    if a.weights.is_some() {
        cfg.weights = weights_from(a.weights.clone())?;
    }
    if a.thermal_thresh.is_some() {
        cfg.thermal_thresh = a.thermal_thresh;
    }
    if let Some(v) = a.clip_min { cfg.calibration.clip_min = v; }
    if let Some(v) = a.clip_max { cfg.calibration.clip_max = v; }
    if let Some(v) = a.caution { cfg.calibration.caution_threshold = v; }
    if a.clip_min.is_some() || a.clip_max.is_some() {
        cfg.autopoint.otsu_range = (cfg.calibration.clip_min, cfg.calibration.clip_max);
    }
    if let Some(scale) = a.int_scale {
        cfg.tiff.integer_scale = Some(LinearScale { scale, offset: a.int_offset.unwrap_or(0.0) });
    }
    if let Some(v) = a.batch_size { cfg.batch_size = v; }
    if let Some(v) = a.seed { cfg.seed = v; }
    let p = &a.proposer;
    if p.baseline {
        cfg.proposer.baseline = true;
        cfg.proposer.endpoint = None;
    }
    if let Some(e) = &p.endpoint {
        cfg.proposer.endpoint = Some(e.clone());
        cfg.proposer.baseline = false;
    }
    if let Some(v) = p.timeout_secs { cfg.proposer.timeout_secs = v; }
    if let Some(v) = p.max_in_flight { cfg.proposer.max_in_flight = v; }
    if let Some(v) = &p.cache { cfg.proposer.cache_dir = Some(v.clone()); }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_pipeline(a: PipelineArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = pipeline_config(&a)?;
    if a.jobs == Some(0) {
        return Err(Error::invalid("--jobs must be at least 1"));
    }
    let (_, summary, warnings) = pipeline::run(&a.root, &a.out, &cfg, a.jobs)?;
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    emit_json(out, &serde_json::to_value(&summary)?)
}

fn list_pngs(dir: &Path) -> Result<std::collections::BTreeMap<String, PathBuf>> {
    let mut out = std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path.clone());
            }
        }
    }
    Ok(out)
}

/// Column headers of the evaluation CSV.
pub const EVALUATE_COLUMNS: [&str; 8] = ["id", "IoU 0", "IoU 1", "mIoU", "mAcc", "±25", "±50", "pixels"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn cmd_evaluate(a: EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let preds = list_pngs(&a.pred)?;
    let gts = list_pngs(&a.gt)?;
    let wanted: Option<std::collections::HashSet<String>> = match &a.ids {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::io(p, e))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        ),
        None => None,
    };
    let mut seg = Vec::new();
    let mut t25 = Vec::new();
    let mut t50 = Vec::new();
    let mut csv = EVALUATE_COLUMNS.join(",") + "\n";
    for (id, gt_path) in &gts {
        if wanted.as_ref().is_some_and(|w| !w.contains(id)) {
            continue;
        }
        let Some(pred_path) = preds.get(id) else {
            let _ = writeln!(err, "warning: no prediction for {id}");
            continue;
        };
        let gt = imageio::read_mask(gt_path)?;
        let s = seg_scores(&imageio::read_mask(pred_path)?, &gt)?;
        let (mut a25, mut a50) = (None, None);
        if let (Some(pt), Some(gtt)) = (&a.pred_temp, &a.gt_temp) {
            let opts = a.tiff_args.options();
            let p = load_tiff(&pt.join(format!("{id}.tif")), &opts)?;
            let g = load_tiff(&gtt.join(format!("{id}.tif")), &opts)?;
            let region = match &a.region {
                Some(d) => imageio::read_mask(&d.join(format!("{id}.png")))?,
                None => gt.clone(),
            };
            let x25 = temp_tolerance_accuracy(&p, &g, &region, 25.0)?;
            let x50 = temp_tolerance_accuracy(&p, &g, &region, 50.0)?;
            a25 = Some(x25);
            a50 = Some(x50);
        }
        let frac = |x: &Option<TempAccuracy>| x.filter(|t| t.pixels_evaluated > 0).map(|t| t.fraction_within);
        csv.push_str(&format!(
            "{id},{:.6},{:.6},{:.6},{:.6},{},{},{}\n",
            s.iou_background,
            s.iou_fire,
            s.miou,
            s.macc,
            fmt_opt(frac(&a25)),
            fmt_opt(frac(&a50)),
            a25.map(|t| t.pixels_evaluated.to_string()).unwrap_or_default(),
        ));
        seg.push(s);
        t25.extend(a25);
        t50.extend(a50);
    }
    if seg.is_empty() {
        return Err(Error::Dataset("no prediction/reference pairs to evaluate".into()));
    }
    let agg: SegScores = aggregate_seg(&seg, a.batch_size)?;
    let temp = |v: &[TempAccuracy]| -> Result<Option<f64>> { if v.is_empty() { Ok(None) } else { aggregate_temp(v, a.batch_size) } };
    let aggregate = json!({
        "images": seg.len(),
        "batch_size": a.batch_size,
        "IoU 0": agg.iou_background,
        "IoU 1": agg.iou_fire,
        "mIoU": agg.miou,
        "mAcc": agg.macc,
        "±25": temp(&t25)?,
        "±50": temp(&t50)?,
    });
    create_dir(&a.out)?;
    write_atomic(&a.out.join("scores.csv"), csv.as_bytes())?;
    write_atomic(&a.out.join("aggregate.json"), (serde_json::to_string_pretty(&aggregate)? + "\n").as_bytes())?;
    emit_json(out, &aggregate)
}

fn cmd_losses(a: LossesEvalArgs, out: &mut dyn Write) -> Result<()> {
    let weights = LossWeights {
        lambda_dice: a.lambda_dice,
        lambda_student_dice: a.lambda_student_dice,
        lambda_flame_l1: a.lambda_flame_l1,
    };
    weights.validate()?;
    let pred = ProbMap::new(load_tiff(&a.pred, &LoadOptions::default())?)?;
    let target = imageio::read_mask(&a.target)?;
    let ce = losses::cross_entropy(&pred, &target)?;
    let dice = losses::dice_loss(&pred, &target, a.smooth)?;
    let teacher = ce + weights.lambda_dice * dice;
    let flame_l1 = match (&a.pred_temp, &a.gt_temp) {
        (Some(p), Some(g)) => {
            let fire = match &a.fire {
                Some(f) => imageio::read_mask(f)?,
                None => target.clone(),
            };
            Some(losses::flame_l1(&load_tiff(p, &LoadOptions::default())?, &load_tiff(g, &LoadOptions::default())?, &fire)?)
        }
        _ => None,
    };
    let student = flame_l1.map(|f| losses::student_total(ce, dice, f, &weights));
    emit_json(out, &json!({
        "cross_entropy": ce,
        "dice": dice,
        "teacher": teacher,
        "flame_l1": flame_l1,
        "student_total": student,
        "weights": weights,
        "smooth": a.smooth,
    }))
}

fn cmd_counts(a: CountsArgs, out: &mut dyn Write) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    let table = counts(&m);
    if let Some(p) = &a.excluded_out {
        m.write_excluded(p)?;
    }
    if a.json {
        emit_json(out, &serde_json::to_value(&table)?)
    } else {
        write!(out, "{table}").map_err(|e| Error::io("<stdout>", e))
    }
}

fn cmd_split(a: SplitArgs, out: &mut dyn Write) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    let s = split(&m, a.train_fraction, a.seed)?;
    match &a.out {
        Some(dir) => {
            create_dir(dir)?;
            let lines = |ids: &[String]| ids.iter().map(|i| format!("{i}\n")).collect::<String>();
            write_atomic(&dir.join("train.txt"), lines(&s.train).as_bytes())?;
            write_atomic(&dir.join("test.txt"), lines(&s.test).as_bytes())?;
            emit_json(out, &json!({"train": s.train.len(), "test": s.test.len()}))
        }
        None => emit_json(out, &serde_json::to_value(&s)?),
    }
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Result<()> {
    let m = Manifest::load(&a.manifest)?;
    let report = validate(&m, &a.tiff_args.options());
    emit_json(out, &serde_json::to_value(&report)?)?;
    if report.is_clean() {
        Ok(())
    } else {
        Err(Error::Dataset(format!("{} violation(s)", report.violations.len())))
    }
}

fn cmd_synth(a: SynthGenArgs, out: &mut dyn Write) -> Result<()> {
    let base: Option<SceneSpec> = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    for i in 0..a.count {
        let spec = match &base {
            Some(s) => SceneSpec { seed: s.seed.wrapping_add(i as u64), ..s.clone() },
            None => random_spec(a.seed.wrapping_add(i as u64), a.width, a.height),
        };
        let scene = gen_scene(&spec)?;
        write_scene(&scene, &a.out, &corpus_stem(i))?;
    }
    emit_json(out, &json!({"scenes": a.count, "out": a.out}))
}

fn cmd_review(a: ReviewServeArgs, err: &mut dyn Write) -> Result<()> {
    let addr = SocketAddr::new(a.host, a.port);
    let _ = writeln!(err, "serving {} on http://{addr}", a.manifest.display());
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Network(e.to_string()))?;
    rt.block_on(crate::review::serve(&a.manifest, addr))
}
