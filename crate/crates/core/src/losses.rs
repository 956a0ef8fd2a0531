//! Reference loss functions for teacher/student training, with analytic
//! gradients so external training code can be checked against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Raster, TemperatureGrid};

/// Clamp applied to probabilities before taking logs.
pub const PROB_EPSILON: f64 = 1e-7;
pub const DEFAULT_DICE_SMOOTH: f64 = 1.0;
pub const DEFAULT_T_MAX: f64 = 500.0;

/// Per-pixel fire probability; background is `1 - p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap(Raster<f64>);

impl ProbMap {
    pub fn new(p_fire: Raster<f64>) -> Result<Self> {
        if let Some(i) = p_fire.as_slice().iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!(
                "probability {} at index {i} is outside [0, 1]",
                p_fire.as_slice()[i]
            )));
        }
        Ok(Self(p_fire))
    }

    pub fn p_fire(&self) -> &Raster<f64> {
        &self.0
    }
}

/// Pre-activation of the student temperature head.
#[derive(Debug, Clone, PartialEq)]
pub struct TempLogits(Raster<f64>);

impl TempLogits {
    pub fn new(z: Raster<f64>) -> Result<Self> {
        if let Some(i) = z.as_slice().iter().position(|v| !v.is_finite()) {
            let (x, y) = (i % z.width(), i / z.width());
            return Err(Error::NonFinite { index: i, x, y });
        }
        Ok(Self(z))
    }

    pub fn z(&self) -> &Raster<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub lambda_dice: f64,
    pub lambda_student_dice: f64,
    pub lambda_flame_l1: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_dice: 0.5,
            lambda_student_dice: 0.5,
            lambda_flame_l1: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.lambda_dice, self.lambda_student_dice, self.lambda_flame_l1]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("loss weights must be finite and >= 0, got {self:?}")))
        }
    }
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// Pixel-mean binary cross-entropy.
pub fn cross_entropy(pred: &ProbMap, target: &BinaryMask) -> Result<f64> {
    pred.0.same_dims(target)?;
    let n = target.len() as f64;
    let sum: f64 = pred
        .0
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&p, &t)| {
            let p = clamp_p(p);
            if t { -p.ln() } else { -(1.0 - p).ln() }
        })
        .sum();
    Ok(sum / n)
}

/// d(cross_entropy)/d(p_fire) per pixel; zero where the clamp is active.
pub fn cross_entropy_grad(pred: &ProbMap, target: &BinaryMask) -> Result<Raster<f64>> {
    pred.0.same_dims(target)?;
    let n = target.len() as f64;
    let (w, h) = target.dims();
    Ok(Raster::from_fn(w, h, |x, y| {
        let p = *pred.0.get(x, y);
        if p != clamp_p(p) {
            return 0.0;
        }
        if *target.get(x, y) { -1.0 / (p * n) } else { 1.0 / ((1.0 - p) * n) }
    }))
}

fn dice_sums(pred: &ProbMap, target: &BinaryMask) -> (f64, f64, f64) {
    let (mut pt, mut sp, mut st) = (0.0, 0.0, 0.0);
    for (&p, &t) in pred.0.as_slice().iter().zip(target.as_slice()) {
        let t = if t { 1.0 } else { 0.0 };
        pt += p * t;
        sp += p;
        st += t;
    }
    (pt, sp, st)
}

/// Soft Dice on the fire probability: `1 - (2 sum(pt) + s) / (sum(p) + sum(t) + s)`.
pub fn dice_loss(pred: &ProbMap, target: &BinaryMask, smooth: f64) -> Result<f64> {
    pred.0.same_dims(target)?;
    let (pt, sp, st) = dice_sums(pred, target);
    Ok(1.0 - (2.0 * pt + smooth) / (sp + st + smooth))
}

pub fn dice_loss_grad(pred: &ProbMap, target: &BinaryMask, smooth: f64) -> Result<Raster<f64>> {
    pred.0.same_dims(target)?;
    let (pt, sp, st) = dice_sums(pred, target);
    let num = 2.0 * pt + smooth;
    let den = sp + st + smooth;
    Ok(target.map(|&t| {
        let t = if t { 1.0 } else { 0.0 };
        -(2.0 * t * den - num) / (den * den)
    }))
}

pub fn teacher_loss(pred: &ProbMap, target: &BinaryMask, weights: &LossWeights) -> Result<f64> {
    Ok(cross_entropy(pred, target)? + weights.lambda_dice * dice_loss(pred, target, DEFAULT_DICE_SMOOTH)?)
}

/// Mean absolute temperature error over fire pixels; 0 when there are none.
pub fn flame_l1(pred_temp: &TemperatureGrid, gt: &TemperatureGrid, fire: &BinaryMask) -> Result<f64> {
    pred_temp.same_dims(gt)?;
    pred_temp.same_dims(fire)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for ((&p, &t), &f) in pred_temp.as_slice().iter().zip(gt.as_slice()).zip(fire.as_slice()) {
        if f {
            sum += (p - t).abs();
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Subgradient of [`flame_l1`] with respect to the prediction (0 at ties).
pub fn flame_l1_grad(pred_temp: &TemperatureGrid, gt: &TemperatureGrid, fire: &BinaryMask) -> Result<Raster<f64>> {
    pred_temp.same_dims(gt)?;
    pred_temp.same_dims(fire)?;
    let n = fire.count_ones();
    let (w, h) = fire.dims();
    Ok(Raster::from_fn(w, h, |x, y| {
        if n == 0 || !*fire.get(x, y) {
            return 0.0;
        }
        let d = pred_temp.get(x, y) - gt.get(x, y);
        if d == 0.0 { 0.0 } else { d.signum() / n as f64 }
    }))
}

pub fn student_total(ce: f64, dice: f64, fl1: f64, weights: &LossWeights) -> f64 {
    ce + weights.lambda_student_dice * dice + weights.lambda_flame_l1 * fl1
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `t_max * sigmoid(z)` per pixel.
pub fn scale_temperature(z: &TempLogits, t_max: f64) -> TemperatureGrid {
    z.0.map(|&v| t_max * sigmoid(v))
}

/// d(scale_temperature)/dz per pixel.
pub fn scale_temperature_grad(z: &TempLogits, t_max: f64) -> Raster<f64> {
    z.0.map(|&v| {
        let s = sigmoid(v);
        t_max * s * (1.0 - s)
    })
}
