//! Automatic point-prompt location from a calibrated temperature grid.
//!
//! Otsu gives a per-frame threshold `tau`. Non-overlapping patches whose mean
//! clears `tau` by a margin become positive (hot) or negative (cold)
//! candidates. Candidates are then kept only near Canny edges of the same
//! grid, nearest-to-edge first, up to a per-label cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{canny, euclidean_distance_transform, otsu_threshold};
use crate::raster::{DistanceField, TemperatureGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutopointConfig {
    /// Side of the square patches scanned for positive points (odd, >= 3).
    pub pos_patch: usize,
    /// Side of the square patches scanned for negative points (odd, >= 3).
    pub neg_patch: usize,
    /// Margin above `tau` a patch mean must reach to be positive (°C).
    pub epsilon: f64,
    /// Margin below `tau` for negatives; defaults to `epsilon`.
    pub negative_epsilon: Option<f64>,
    /// Canny high threshold; the low threshold is `tau` (capped at this).
    pub canny_high: f64,
    pub canny_sigma: f64,
    /// Maximum distance (pixels) from a Canny edge for a retained point.
    pub d_max: f64,
    pub max_positive: usize,
    pub max_negative: usize,
    /// Histogram range for Otsu, normally the calibration clip range.
    pub otsu_range: (f64, f64),
}

impl Default for AutopointConfig {
    fn default() -> Self {
        Self {
            pos_patch: 5,
            neg_patch: 3,
            epsilon: 25.0,
            negative_epsilon: None,
            canny_high: 200.0,
            canny_sigma: 1.0,
            d_max: 20.0,
            max_positive: 10,
            max_negative: 10,
            otsu_range: (0.0, 500.0),
        }
    }
}

impl AutopointConfig {
    pub fn negative_margin(&self) -> f64 {
        self.negative_epsilon.unwrap_or(self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("pos_patch", self.pos_patch), ("neg_patch", self.neg_patch)] {
            if p < 3 || p % 2 == 0 {
                return Err(Error::invalid(format!("{name} must be odd and >= 3, got {p}")));
            }
        }
        if !(self.epsilon >= 0.0) || !(self.negative_margin() >= 0.0) {
            return Err(Error::invalid("epsilon margins must be >= 0"));
        }
        if !(self.d_max > 0.0) {
            return Err(Error::invalid(format!("d_max must be > 0, got {}", self.d_max)));
        }
        if self.max_positive == 0 || self.max_negative == 0 {
            return Err(Error::invalid("point caps must be >= 1"));
        }
        if !(self.canny_high >= 0.0) || !(self.canny_sigma > 0.0) {
            return Err(Error::invalid("canny_high must be >= 0 and canny_sigma > 0"));
        }
        if !(self.otsu_range.1 > self.otsu_range.0) {
            return Err(Error::invalid("otsu_range needs hi > lo"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointLabel {
    Positive,
    Negative,
}

/// A window that passed the mean test, before edge filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub x: usize,
    pub y: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPrompt {
    pub x: usize,
    pub y: usize,
    #[serde(skip, default = "positive")]
    pub label: PointLabel,
    #[serde(rename = "mean")]
    pub patch_mean: f64,
    #[serde(rename = "dist")]
    pub edge_distance: f64,
}

fn positive() -> PointLabel {
    PointLabel::Positive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub tau: f64,
    pub positives: Vec<PointPrompt>,
    pub negatives: Vec<PointPrompt>,
    /// Number of Canny edge pixels in the frame.
    #[serde(default)]
    pub edge_pixels: usize,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &PointPrompt> {
        self.positives.iter().chain(self.negatives.iter())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses the JSON form, restoring labels from the list each point is in.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut set: PointSet = serde_json::from_str(text)?;
        for p in &mut set.positives {
            p.label = PointLabel::Positive;
        }
        for p in &mut set.negatives {
            p.label = PointLabel::Negative;
        }
        Ok(set)
    }
}

/// Means of all non-overlapping `patch`x`patch` windows (partial windows at
/// the right/bottom border are discarded), as `(center_x, center_y, mean)`.
fn tile_means(grid: &TemperatureGrid, patch: usize) -> impl Iterator<Item = Candidate> + '_ {
    let (w, h) = grid.dims();
    let (cols, rows) = (w / patch, h / patch);
    (0..rows).flat_map(move |ty| {
        (0..cols).map(move |tx| {
            let (ox, oy) = (tx * patch, ty * patch);
            let mut sum = 0.0;
            for y in oy..oy + patch {
                for x in ox..ox + patch {
                    sum += grid.get(x, y);
                }
            }
            Candidate {
                x: ox + patch / 2,
                y: oy + patch / 2,
                mean: sum / (patch * patch) as f64,
            }
        })
    })
}

/// Positive and negative candidates from two independent tilings.
pub fn scan_patches(
    grid: &TemperatureGrid,
    tau: f64,
    config: &AutopointConfig,
) -> Result<(Vec<Candidate>, Vec<Candidate>)> {
    let (w, h) = grid.dims();
    let largest = config.pos_patch.max(config.neg_patch);
    if w < largest || h < largest {
        return Err(Error::invalid(format!(
            "grid {w}x{h} is smaller than the {largest}x{largest} patch"
        )));
    }
    let hot = tau + config.epsilon;
    let cold = tau - config.negative_margin();
    let positives = tile_means(grid, config.pos_patch)
        .filter(|c| c.mean >= hot)
        .collect();
    let negatives = tile_means(grid, config.neg_patch)
        .filter(|c| c.mean <= cold)
        .collect();
    Ok((positives, negatives))
}

/// Keeps candidates within `d_max` of an edge; if more than `cap` remain,
/// keeps the `cap` nearest (ties in row-major order). Output is ordered by
/// distance, then row-major position.
pub fn filter_by_edges(
    candidates: &[Candidate],
    label: PointLabel,
    field: &DistanceField,
    d_max: f64,
    cap: usize,
) -> Vec<PointPrompt> {
    let mut kept: Vec<PointPrompt> = candidates
        .iter()
        .map(|c| PointPrompt {
            x: c.x,
            y: c.y,
            label,
            patch_mean: c.mean,
            edge_distance: *field.get(c.x, c.y),
        })
        .filter(|p| p.edge_distance <= d_max)
        .collect();
    kept.sort_by(|a, b| {
        a.edge_distance
            .total_cmp(&b.edge_distance)
            .then((a.y, a.x).cmp(&(b.y, b.x)))
    });
    kept.truncate(cap);
    kept
}

/// Full locator: Otsu, Canny, distance transform, scan, filter.
///
/// A frame without a valid Otsu split (e.g. constant temperature) surfaces
/// as [`Error::DegenerateHistogram`]; callers treat it as a no-fire frame.
pub fn autolocate(grid: &TemperatureGrid, config: &AutopointConfig) -> Result<PointSet> {
    config.validate()?;
    let tau = otsu_threshold(grid.as_slice(), config.otsu_range)?.tau;
    let low = tau.min(config.canny_high).max(0.0);
    let edges = canny(grid, low, config.canny_high, config.canny_sigma)?;
    let field = euclidean_distance_transform(&edges);
    let (pos, neg) = scan_patches(grid, tau, config)?;
    Ok(PointSet {
        tau,
        positives: filter_by_edges(&pos, PointLabel::Positive, &field, config.d_max, config.max_positive),
        negatives: filter_by_edges(&neg, PointLabel::Negative, &field, config.d_max, config.max_negative),
        edge_pixels: edges.count_ones(),
    })
}
