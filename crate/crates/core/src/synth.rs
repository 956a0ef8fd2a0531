//! Synthetic paired scenes with known fire geometry.
//!
//! A scene is a background temperature plus hot blobs plus seeded Gaussian
//! noise. Ground truth is the noiseless field thresholded at
//! `fire_threshold`. Temperatures are rounded to `f32` so a TIFF round trip
//! is exact.

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio;
use crate::radiometric::write_tiff;
use crate::raster::{BinaryMask, GrayImage, Raster, TemperatureGrid};

pub const MAX_TEMPERATURE: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlobShape {
    /// Flat plateau over the pixels whose centers lie within `radius`
    /// (Chebyshev) of `center`.
    Square,
    /// Radial Gaussian with standard deviation `radius / 2`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    /// `(x, y)` in pixel units; pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.
    pub center: (f64, f64),
    pub radius: f64,
    pub peak_temp: f64,
    pub shape: BlobShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background_temp: f64,
    #[serde(default)]
    pub blobs: Vec<Blob>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_fire_threshold")]
    pub fire_threshold: f64,
}

fn default_fire_threshold() -> f64 {
    100.0
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("scene dimensions must be positive"));
        }
        if !(0.0..=MAX_TEMPERATURE).contains(&self.background_temp) {
            return Err(Error::invalid("background_temp must lie in [0, 500]"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::invalid("noise_sigma must be finite and >= 0"));
        }
        for (i, b) in self.blobs.iter().enumerate() {
            let (cx, cy) = b.center;
            if !(0.0..=self.width as f64).contains(&cx) || !(0.0..=self.height as f64).contains(&cy) {
                return Err(Error::invalid(format!("blob {i} center lies outside the scene")));
            }
            if !(b.radius > 0.0) || !b.radius.is_finite() {
                return Err(Error::invalid(format!("blob {i} radius must be > 0")));
            }
            if !(b.peak_temp <= MAX_TEMPERATURE) || !b.peak_temp.is_finite() {
                return Err(Error::invalid(format!("blob {i} peak_temp must be <= 500")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub temperature: TemperatureGrid,
    pub thermal: GrayImage,
    pub rgb: RgbImage,
    pub ground_truth: BinaryMask,
}

impl Scene {
    /// Thermal rendering as a 3-channel image (gray replicated), the form a
    /// thermal JPG takes.
    pub fn thermal_rgb(&self) -> RgbImage {
        let (w, h) = self.thermal.dims();
        RgbImage::from_fn(w as u32, h as u32, |x, y| {
            let g = *self.thermal.get(x as usize, y as usize);
            Rgb([g, g, g])
        })
    }
}

fn blob_contribution(b: &Blob, background: f64, px: f64, py: f64) -> f64 {
    let (dx, dy) = (px - b.center.0, py - b.center.1);
    let rise = b.peak_temp - background;
    match b.shape {
        BlobShape::Square => {
            if dx.abs() < b.radius && dy.abs() < b.radius {
                rise
            } else {
                0.0
            }
        }
        BlobShape::Gaussian => {
            let s = b.radius / 2.0;
            rise * (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
        }
    }
}

/// Noiseless temperature field (before clipping and rounding).
pub fn noiseless_field(spec: &SceneSpec) -> TemperatureGrid {
    Raster::from_fn(spec.width, spec.height, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let lift = spec
            .blobs
            .iter()
            .map(|b| blob_contribution(b, spec.background_temp, px, py))
            .fold(0.0, f64::max);
        spec.background_temp + lift
    })
}

/// Linear map of `[0, 500]` °C onto `[0, 255]`.
pub fn temperature_to_gray(t: f64) -> u8 {
    (t.clamp(0.0, MAX_TEMPERATURE) / MAX_TEMPERATURE * 255.0).round() as u8
}

pub fn gen_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let clean = noiseless_field(spec);
    let ground_truth = clean.map(|&t| t >= spec.fire_threshold);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let temperature = clean.map(|&t| {
        let noisy = if spec.noise_sigma > 0.0 { t + noise.sample(&mut rng) } else { t };
        noisy.clamp(0.0, MAX_TEMPERATURE) as f32 as f64
    });
    let thermal = temperature.map(|&t| temperature_to_gray(t));
    let (w, h) = thermal.dims();
    let rgb = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let g = *thermal.get(x as usize, y as usize);
        if *ground_truth.get(x as usize, y as usize) {
            Rgb([g / 2 + 128, g / 2 + 64, g / 4])
        } else {
            Rgb([g, g, g])
        }
    });
    Ok(Scene {
        temperature,
        thermal,
        rgb,
        ground_truth,
    })
}

/// A randomized but seed-determined scene: one to three blobs of either
/// shape over a mild, noisy background.
pub fn random_spec(seed: u64, width: usize, height: usize) -> SceneSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1e1_d5ce_0e00);
    let n_blobs = rng.random_range(1..=3);
    let max_r = (width.min(height) as f64 / 6.0).max(4.0);
    let blobs = (0..n_blobs)
        .map(|_| {
            let shape = if rng.random_bool(0.5) { BlobShape::Square } else { BlobShape::Gaussian };
            let radius = rng.random_range(4.0..=max_r).round();
            let margin = radius + 2.0;
            let cx = rng.random_range(margin..(width as f64 - margin).max(margin + 1.0)).round();
            let cy = rng.random_range(margin..(height as f64 - margin).max(margin + 1.0)).round();
            Blob {
                center: (cx.min(width as f64), cy.min(height as f64)),
                radius,
                peak_temp: rng.random_range(250.0..480.0),
                shape,
            }
        })
        .collect();
    SceneSpec {
        width,
        height,
        background_temp: rng.random_range(10.0..40.0),
        blobs,
        noise_sigma: rng.random_range(2.0..8.0),
        seed,
        fire_threshold: default_fire_threshold(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenePaths {
    pub tiff: PathBuf,
    pub thermal: PathBuf,
    pub rgb: PathBuf,
    pub ground_truth: PathBuf,
}

/// Writes `tiff/<stem>.tif`, `thermal/<stem>.png`, `rgb/<stem>.png` and
/// `gt/<stem>.png` under `dir`.
pub fn write_scene(scene: &Scene, dir: &Path, stem: &str) -> Result<ScenePaths> {
    let sub = |name: &str, ext: &str| -> Result<PathBuf> {
        let d = dir.join(name);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        Ok(d.join(format!("{stem}.{ext}")))
    };
    let paths = ScenePaths {
        tiff: sub("tiff", "tif")?,
        thermal: sub("thermal", "png")?,
        rgb: sub("rgb", "png")?,
        ground_truth: sub("gt", "png")?,
    };
    write_tiff(&scene.temperature, &paths.tiff)?;
    imageio::write_rgb(&scene.thermal_rgb(), &paths.thermal)?;
    imageio::write_rgb(&scene.rgb, &paths.rgb)?;
    imageio::write_mask(&scene.ground_truth, &paths.ground_truth)?;
    Ok(paths)
}

/// Stem used for the `index`-th scene of a generated corpus.
pub fn corpus_stem(index: usize) -> String {
    format!("synth_{index:04}")
}
