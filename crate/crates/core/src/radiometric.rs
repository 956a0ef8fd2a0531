//! Radiometric TIFF temperature grids: loading, clipping policy and
//! saturation accounting.

use std::fs::File;
use std::io::{BufWriter, Cursor, Read, Seek};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tiff::decoder::{Decoder, DecodingResult, Limits};
use tiff::encoder::{colortype, TiffEncoder};
use tiff::ColorType;

use crate::error::{Error, Result};
use crate::kernels::histogram_bin;
use crate::raster::TemperatureGrid;

/// Number of histogram bins used for temperature statistics (and Otsu).
pub const HISTOGRAM_BINS: usize = 256;

/// Linear decode for integer-sample TIFFs: `temperature = sample * scale + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScale {
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Required for integer sample formats; ignored for floating point.
    #[serde(default)]
    pub integer_scale: Option<LinearScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPolicy {
    pub clip_min: f64,
    pub clip_max: f64,
    pub caution_threshold: f64,
}

impl Default for CalibrationPolicy {
    fn default() -> Self {
        Self {
            clip_min: 0.0,
            clip_max: 500.0,
            caution_threshold: 450.0,
        }
    }
}

impl CalibrationPolicy {
    pub fn new(clip_min: f64, clip_max: f64, caution_threshold: f64) -> Result<Self> {
        let p = Self {
            clip_min,
            clip_max,
            caution_threshold,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.clip_min.is_finite()
            && self.clip_max.is_finite()
            && self.caution_threshold.is_finite();
        if !finite || !(self.clip_min < self.caution_threshold && self.caution_threshold <= self.clip_max)
        {
            return Err(Error::invalid(format!(
                "calibration policy needs clip_min < caution <= clip_max, got {} / {} / {}",
                self.clip_min, self.caution_threshold, self.clip_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationStats {
    pub pixels_above_caution: usize,
    pub pixels_at_or_above_clip_max: usize,
    pub fraction_caution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `HISTOGRAM_BINS` counts over `[clip_min, clip_max]`; out-of-range
    /// values land in the end bins.
    pub histogram: Vec<u64>,
}

pub fn load_tiff(path: &Path, options: &LoadOptions) -> Result<TemperatureGrid> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    decode_tiff(Cursor::new(bytes), options)
}

fn tiff_err(e: tiff::TiffError) -> Error {
    Error::Tiff(e.to_string())
}

/// Decodes a single-band TIFF into temperatures without any clipping.
pub fn decode_tiff<R: Read + Seek>(reader: R, options: &LoadOptions) -> Result<TemperatureGrid> {
    let mut decoder = Decoder::new(reader)
        .map_err(tiff_err)?
        .with_limits(Limits::unlimited());
    let (w, h) = decoder.dimensions().map_err(tiff_err)?;
    match decoder.colortype().map_err(tiff_err)? {
        ColorType::Gray(_) => {}
        other => {
            return Err(Error::Tiff(format!(
                "expected a single-band image, got {other:?}"
            )))
        }
    }
    let decoded = decoder.read_image().map_err(tiff_err)?;

    let ints = |samples: Vec<f64>| -> Result<Vec<f64>> {
        let scale = options.integer_scale.ok_or_else(|| {
            Error::Tiff(
                "unsupported sample format: integer samples need an explicit scale/offset".into(),
            )
        })?;
        Ok(samples
            .into_iter()
            .map(|s| s * scale.scale + scale.offset)
            .collect())
    };
    let values: Vec<f64> = match decoded {
        DecodingResult::F32(v) => v.into_iter().map(f64::from).collect(),
        DecodingResult::F64(v) => v,
        DecodingResult::U8(v) => ints(v.into_iter().map(f64::from).collect())?,
        DecodingResult::U16(v) => ints(v.into_iter().map(f64::from).collect())?,
        DecodingResult::U32(v) => ints(v.into_iter().map(f64::from).collect())?,
        DecodingResult::I8(v) => ints(v.into_iter().map(f64::from).collect())?,
        DecodingResult::I16(v) => ints(v.into_iter().map(f64::from).collect())?,
        DecodingResult::I32(v) => ints(v.into_iter().map(f64::from).collect())?,
        _ => return Err(Error::Tiff("unsupported sample format".into())),
    };
    let (w, h) = (w as usize, h as usize);
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index,
            x: index % w,
            y: index / w,
        });
    }
    TemperatureGrid::from_vec(w, h, values).map_err(|e| Error::Tiff(e.to_string()))
}

/// Writes a single-band 32-bit float TIFF. Values are narrowed to `f32`.
pub fn write_tiff(grid: &TemperatureGrid, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = TiffEncoder::new(BufWriter::new(file)).map_err(tiff_err)?;
    let data: Vec<f32> = grid.as_slice().iter().map(|&v| v as f32).collect();
    encoder
        .write_image::<colortype::Gray32Float>(grid.width() as u32, grid.height() as u32, &data)
        .map_err(tiff_err)
}

pub fn calibrate(grid: &TemperatureGrid, policy: &CalibrationPolicy) -> TemperatureGrid {
    grid.map(|&v| v.clamp(policy.clip_min, policy.clip_max))
}

/// Saturation counts, meant to run on the raw (pre-calibration) grid.
pub fn saturation_report(grid: &TemperatureGrid, policy: &CalibrationPolicy) -> SaturationStats {
    let mut above_caution = 0;
    let mut at_clip = 0;
    for &v in grid.as_slice() {
        if v > policy.caution_threshold {
            above_caution += 1;
        }
        if v >= policy.clip_max {
            at_clip += 1;
        }
    }
    SaturationStats {
        pixels_above_caution: above_caution,
        pixels_at_or_above_clip_max: at_clip,
        fraction_caution: above_caution as f64 / grid.len() as f64,
    }
}

pub fn grid_stats(grid: &TemperatureGrid, policy: &CalibrationPolicy) -> GridStats {
    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in grid.as_slice() {
        min = min.min(v);
        max = max.max(v);
        sum += v;
        histogram[histogram_bin(v, policy.clip_min, policy.clip_max, HISTOGRAM_BINS)] += 1;
    }
    GridStats {
        min,
        max,
        mean: sum / grid.len() as f64,
        histogram,
    }
}
