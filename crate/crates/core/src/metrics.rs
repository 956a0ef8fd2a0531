//! Segmentation and temperature-accuracy metrics with batch-mean aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::iou;
use crate::raster::{BinaryMask, TemperatureGrid};

/// Class 0 is background, class 1 is fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegScores {
    pub iou_background: f64,
    pub iou_fire: f64,
    pub miou: f64,
    pub acc_background: f64,
    pub acc_fire: f64,
    pub macc: f64,
}

impl SegScores {
    fn from_parts(iou0: f64, iou1: f64, acc0: f64, acc1: f64) -> Self {
        Self {
            iou_background: iou0,
            iou_fire: iou1,
            miou: (iou0 + iou1) / 2.0,
            acc_background: acc0,
            acc_fire: acc1,
            macc: (acc0 + acc1) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempAccuracy {
    pub tolerance: f64,
    pub fraction_within: f64,
    pub pixels_evaluated: usize,
}

/// Per-class IoU and per-class recall. A class missing from `gt` has
/// accuracy 1.
pub fn seg_scores(pred: &BinaryMask, gt: &BinaryMask) -> Result<SegScores> {
    pred.same_dims(gt)?;
    let iou1 = iou(pred, gt)?;
    let iou0 = iou(&pred.complement(), &gt.complement())?;
    let (mut hit0, mut n0, mut hit1, mut n1) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &g) in pred.as_slice().iter().zip(gt.as_slice()) {
        if g {
            n1 += 1;
            hit1 += p as usize;
        } else {
            n0 += 1;
            hit0 += !p as usize;
        }
    }
    let recall = |hit: usize, n: usize| if n == 0 { 1.0 } else { hit as f64 / n as f64 };
    Ok(SegScores::from_parts(iou0, iou1, recall(hit0, n0), recall(hit1, n1)))
}

/// Fraction of `region` pixels with `|pred - gt| <= tol`.
pub fn temp_tolerance_accuracy(
    pred: &TemperatureGrid,
    gt: &TemperatureGrid,
    region: &BinaryMask,
    tol: f64,
) -> Result<TempAccuracy> {
    pred.same_dims(gt)?;
    pred.same_dims(region)?;
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tol}")));
    }
    let (mut within, mut n) = (0usize, 0usize);
    for ((&p, &t), &r) in pred.as_slice().iter().zip(gt.as_slice()).zip(region.as_slice()) {
        if r {
            n += 1;
            within += ((p - t).abs() <= tol) as usize;
        }
    }
    Ok(TempAccuracy {
        tolerance: tol,
        fraction_within: if n == 0 { 0.0 } else { within as f64 / n as f64 },
        pixels_evaluated: n,
    })
}

/// Mean of per-batch means over consecutive batches (last may be partial).
/// `None` entries are skipped inside their batch; a batch with no values is
/// skipped entirely. Returns `None` if nothing remains.
pub fn mean_of_batch_means(values: &[Option<f64>], batch_size: usize) -> Result<Option<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty list"));
    }
    if batch_size == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let means: Vec<f64> = values
        .chunks(batch_size)
        .filter_map(|batch| {
            let present: Vec<f64> = batch.iter().flatten().copied().collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        })
        .collect();
    Ok((!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64))
}

pub fn aggregate_seg(scores: &[SegScores], batch_size: usize) -> Result<SegScores> {
    let field = |f: fn(&SegScores) -> f64| -> Result<f64> {
        let v: Vec<Option<f64>> = scores.iter().map(|s| Some(f(s))).collect();
        Ok(mean_of_batch_means(&v, batch_size)?.expect("no entries are skipped"))
    };
    Ok(SegScores::from_parts(
        field(|s| s.iou_background)?,
        field(|s| s.iou_fire)?,
        field(|s| s.acc_background)?,
        field(|s| s.acc_fire)?,
    ))
}

/// Entries with an empty region are excluded from their batch.
pub fn aggregate_temp(acc: &[TempAccuracy], batch_size: usize) -> Result<Option<f64>> {
    let v: Vec<Option<f64>> = acc
        .iter()
        .map(|a| (a.pixels_evaluated > 0).then_some(a.fraction_within))
        .collect();
    mean_of_batch_means(&v, batch_size)
}
