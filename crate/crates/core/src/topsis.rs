//! Mask selection by TOPSIS over five per-proposal criteria.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{binarize, iou, otsu_threshold, ssim_masks};
use crate::proposer::ProposalSet;
use crate::raster::{BinaryMask, GrayImage, TemperatureGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Benefit,
    Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub name: String,
    pub direction: Direction,
    pub weight: f64,
}

pub const CRITERION_NAMES: [&str; 5] = ["iou_otsu", "iou_thermal", "temp_diff", "confidence", "ssim"];
pub const DEFAULT_WEIGHTS: [f64; 5] = [0.15, 0.40, 0.15, 0.15, 0.15];

/// The five mask criteria; only the temperature difference is a cost.
pub fn mask_criteria(weights: [f64; 5]) -> Vec<CriterionSpec> {
    CRITERION_NAMES
        .iter()
        .zip(weights)
        .map(|(name, weight)| CriterionSpec {
            name: name.to_string(),
            direction: if *name == "temp_diff" { Direction::Cost } else { Direction::Benefit },
            weight,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    /// One row per alternative, one column per criterion.
    values: Vec<Vec<f64>>,
    specs: Vec<CriterionSpec>,
}

impl DecisionMatrix {
    pub fn new(values: Vec<Vec<f64>>, specs: Vec<CriterionSpec>) -> Result<Self> {
        if values.is_empty() || specs.is_empty() {
            return Err(Error::invalid("decision matrix needs at least one alternative and one criterion"));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != specs.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} values for {} criteria",
                    row.len(),
                    specs.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite value at ({i}, {j})")));
            }
        }
        for s in &specs {
            if !(s.weight > 0.0) || !s.weight.is_finite() {
                return Err(Error::invalid(format!("criterion {} needs a positive weight", s.name)));
            }
        }
        Ok(Self { values, specs })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn specs(&self) -> &[CriterionSpec] {
        &self.specs
    }

    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.specs.iter().map(|s| s.weight).sum();
        self.specs.iter().map(|s| s.weight / total).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopsisResult {
    pub closeness: Vec<f64>,
    pub chosen_index: usize,
    /// Raw criterion values, as ranked.
    pub report: Vec<Vec<f64>>,
}

pub fn topsis_rank(matrix: &DecisionMatrix) -> Result<TopsisResult> {
    let m = matrix.values.len();
    let n = matrix.specs.len();
    let weights = matrix.normalized_weights();

    let mut v = vec![vec![0.0; n]; m];
    for j in 0..n {
        let norm = matrix.values.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..m {
                v[i][j] = matrix.values[i][j] / norm * weights[j];
            }
        }
    }

    let mut ideal = vec![0.0; n];
    let mut anti = vec![0.0; n];
    for j in 0..n {
        let col = v.iter().map(|r| r[j]);
        let hi = col.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo = col.fold(f64::INFINITY, f64::min);
        (ideal[j], anti[j]) = match matrix.specs[j].direction {
            Direction::Benefit => (hi, lo),
            Direction::Cost => (lo, hi),
        };
    }

    let dist = |row: &[f64], p: &[f64]| row.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let closeness: Vec<f64> = v
        .iter()
        .map(|row| {
            let dp = dist(row, &ideal);
            let dm = dist(row, &anti);
            if dp + dm == 0.0 { 0.0 } else { dm / (dp + dm) }
        })
        .collect();

    let mut chosen_index = 0;
    for (i, &c) in closeness.iter().enumerate() {
        if c > closeness[chosen_index] {
            chosen_index = i;
        }
    }
    Ok(TopsisResult {
        closeness,
        chosen_index,
        report: matrix.values.clone(),
    })
}

fn mean_inside(grid: &TemperatureGrid, mask: &BinaryMask) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (&t, &m) in grid.as_slice().iter().zip(mask.as_slice()) {
        if m {
            sum += t;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Reference masks and grid each proposal is scored against.
#[derive(Debug, Clone, Copy)]
pub struct SelectionContext<'a> {
    /// Otsu binarization of the calibrated temperature grid.
    pub otsu_mask: &'a BinaryMask,
    /// Threshold mask of the thermal grayscale image.
    pub thermal_mask: &'a BinaryMask,
    pub grid: &'a TemperatureGrid,
    /// Temperature difference charged to an empty foreground.
    pub empty_sentinel: f64,
}

pub fn build_criteria(
    proposals: &ProposalSet,
    ctx: &SelectionContext<'_>,
    specs: Vec<CriterionSpec>,
) -> Result<DecisionMatrix> {
    if specs.len() != CRITERION_NAMES.len() {
        return Err(Error::invalid(format!("expected {} criteria, got {}", CRITERION_NAMES.len(), specs.len())));
    }
    ctx.otsu_mask.same_dims(ctx.thermal_mask)?;
    ctx.otsu_mask.same_dims(ctx.grid)?;
    let otsu_mean = mean_inside(ctx.grid, ctx.otsu_mask);
    let mut rows = Vec::with_capacity(proposals.proposals.len());
    for p in &proposals.proposals {
        p.mask.same_dims(ctx.grid)?;
        let temp_diff = match (mean_inside(ctx.grid, &p.mask), otsu_mean) {
            (Some(a), Some(b)) => (a - b).abs(),
            _ => ctx.empty_sentinel,
        };
        rows.push(vec![
            iou(ctx.otsu_mask, &p.mask)?,
            iou(ctx.thermal_mask, &p.mask)?,
            temp_diff,
            p.confidence,
            ssim_masks(ctx.otsu_mask, &p.mask)?,
        ]);
    }
    DecisionMatrix::new(rows, specs)
}

pub fn select_mask(
    proposals: &ProposalSet,
    ctx: &SelectionContext<'_>,
    weights: [f64; 5],
) -> Result<(BinaryMask, TopsisResult, SelectionReport)> {
    let matrix = build_criteria(proposals, ctx, mask_criteria(weights))?;
    let result = topsis_rank(&matrix)?;
    let report = SelectionReport {
        criteria: result.report.clone(),
        weights: matrix.normalized_weights(),
        closeness: result.closeness.clone(),
        chosen: result.chosen_index,
    };
    Ok((proposals.proposals[result.chosen_index].mask.clone(), result, report))
}

/// Per-image record of a selection, read by the review service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub criteria: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub closeness: Vec<f64>,
    pub chosen: usize,
}

/// Pixels `>= threshold` when given, otherwise Otsu on the grayscale. A
/// constant image without an override gives an empty mask.
pub fn thermal_threshold_mask(gray: &GrayImage, threshold: Option<u8>) -> BinaryMask {
    match threshold {
        Some(t) => gray.map(|&v| v >= t),
        None => {
            let values: Vec<f64> = gray.as_slice().iter().map(|&v| f64::from(v)).collect();
            match otsu_threshold(&values, (0.0, 255.0)) {
                Ok(r) => binarize(gray, r.tau),
                Err(_) => BinaryMask::filled(gray.width(), gray.height(), false),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposer::{MaskProposal, ProposalSource};
    use crate::raster::Raster;
    use proptest::prelude::*;

    fn matrix(values: Vec<Vec<f64>>, weights: [f64; 5]) -> DecisionMatrix {
        DecisionMatrix::new(values, mask_criteria(weights)).unwrap()
    }

    #[test]
    fn fixed_matrix_matches_scripted_values() {
        // Closeness produced by a separate scalar script before this code existed.
        let m = matrix(
            vec![
                vec![0.82, 0.75, 3.2, 0.91, 0.88],
                vec![0.64, 0.93, 12.5, 0.72, 0.70],
                vec![0.90, 0.58, 0.8, 0.66, 0.93],
            ],
            DEFAULT_WEIGHTS,
        );
        let r = topsis_rank(&m).unwrap();
        let expected = [0.6703342696647253, 0.4260592744282679, 0.5632354193517609];
        for (c, e) in r.closeness.iter().zip(expected) {
            assert!((c - e).abs() < 1e-12, "{c} vs {e}");
        }
        assert_eq!(r.chosen_index, 0);
    }

    #[test]
    fn single_alternative() {
        let r = topsis_rank(&matrix(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]], DEFAULT_WEIGHTS)).unwrap();
        assert_eq!(r.closeness, vec![0.0]);
        assert_eq!(r.chosen_index, 0);
    }

    #[test]
    fn dominant_alternative_chosen() {
        let r = topsis_rank(&matrix(
            vec![
                vec![0.5, 0.5, 10.0, 0.5, 0.5],
                vec![0.9, 0.9, 1.0, 0.9, 0.9],
                vec![0.4, 0.1, 20.0, 0.2, 0.3],
            ],
            DEFAULT_WEIGHTS,
        ))
        .unwrap();
        assert_eq!(r.chosen_index, 1);
        assert_eq!(r.closeness[1], 1.0);
        assert_eq!(r.closeness[2], 0.0);
    }

    #[test]
    fn zero_column_contributes_nothing() {
        let r = topsis_rank(&matrix(
            vec![vec![0.0, 1.0, 0.0, 0.2, 0.0], vec![0.0, 0.5, 0.0, 0.2, 0.0]],
            DEFAULT_WEIGHTS,
        ))
        .unwrap();
        assert_eq!(r.closeness, vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DecisionMatrix::new(vec![], mask_criteria(DEFAULT_WEIGHTS)).is_err());
        assert!(DecisionMatrix::new(vec![vec![1.0; 4]], mask_criteria(DEFAULT_WEIGHTS)).is_err());
        assert!(DecisionMatrix::new(vec![vec![f64::NAN; 5]], mask_criteria(DEFAULT_WEIGHTS)).is_err());
        assert!(DecisionMatrix::new(vec![vec![1.0; 5]], mask_criteria([0.0, 1.0, 1.0, 1.0, 1.0])).is_err());
    }

    fn square(w: usize, x0: usize, x1: usize) -> BinaryMask {
        Raster::from_fn(w, w, |x, y| (x0..x1).contains(&x) && (x0..x1).contains(&y))
    }

    fn set(masks: [BinaryMask; 3], conf: [f64; 3]) -> ProposalSet {
        let [a, b, c] = masks;
        ProposalSet {
            proposals: [
                MaskProposal { mask: a, confidence: conf[0] },
                MaskProposal { mask: b, confidence: conf[1] },
                MaskProposal { mask: c, confidence: conf[2] },
            ],
            source: ProposalSource::Baseline,
        }
    }

    #[test]
    fn criteria_of_self_and_empty() {
        let otsu = square(16, 4, 12);
        let thermal = square(16, 5, 12);
        let grid = Raster::from_fn(16, 16, |x, y| if *otsu.get(x, y) { 300.0 } else { 20.0 });
        let ctx = SelectionContext { otsu_mask: &otsu, thermal_mask: &thermal, grid: &grid, empty_sentinel: 500.0 };
        let empty = Raster::filled(16, 16, false);
        let props = set([otsu.clone(), empty, otsu.complement()], [0.7, 0.0, 0.0]);
        let m = build_criteria(&props, &ctx, mask_criteria(DEFAULT_WEIGHTS)).unwrap();
        let t_iou = iou(&thermal, &otsu).unwrap();
        assert_eq!(m.values()[0], vec![1.0, t_iou, 0.0, 0.7, 1.0]);
        assert_eq!(m.values()[1][2], 500.0);
        assert_eq!(m.values()[2][0], 0.0);

        let (chosen, r, report) = select_mask(&props, &ctx, DEFAULT_WEIGHTS).unwrap();
        assert_eq!(r.chosen_index, 0);
        assert_eq!(chosen, otsu);
        assert_eq!(report.chosen, 0);
        let json = serde_json::to_value(&report).unwrap();
        for key in ["criteria", "weights", "closeness", "chosen"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn identical_proposals_pick_first() {
        let otsu = square(16, 4, 12);
        let grid = Raster::filled(16, 16, 30.0);
        let ctx = SelectionContext { otsu_mask: &otsu, thermal_mask: &otsu, grid: &grid, empty_sentinel: 500.0 };
        let props = set([otsu.clone(), otsu.clone(), otsu.clone()], [0.5; 3]);
        let (_, r, _) = select_mask(&props, &ctx, DEFAULT_WEIGHTS).unwrap();
        assert_eq!(r.chosen_index, 0);
        assert_eq!(r.closeness, vec![0.0; 3]);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let otsu = square(16, 4, 12);
        let grid = Raster::filled(15, 16, 30.0);
        let ctx = SelectionContext { otsu_mask: &otsu, thermal_mask: &otsu, grid: &grid, empty_sentinel: 500.0 };
        let props = set([otsu.clone(), otsu.clone(), otsu.clone()], [0.5; 3]);
        assert!(matches!(
            build_criteria(&props, &ctx, mask_criteria(DEFAULT_WEIGHTS)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn thermal_mask_override() {
        let gray = Raster::from_fn(4, 1, |x, _| (x * 60) as u8);
        assert_eq!(thermal_threshold_mask(&gray, Some(120)).as_slice(), &[false, false, true, true]);
        assert_eq!(thermal_threshold_mask(&Raster::filled(3, 3, 9u8), None).count_ones(), 0);
    }

    fn arb_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..10.0, 5), 1..6)
    }

    proptest! {
        #[test]
        fn closeness_in_unit_interval(values in arb_matrix()) {
            let r = topsis_rank(&matrix(values, DEFAULT_WEIGHTS)).unwrap();
            for c in &r.closeness {
                prop_assert!((0.0..=1.0).contains(c));
            }
            let best = r.closeness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(r.closeness.iter().position(|&c| c == best), Some(r.chosen_index));
        }

        #[test]
        fn uniform_weights_are_scale_free(values in arb_matrix(), k in 0.1f64..100.0) {
            let a = topsis_rank(&matrix(values.clone(), [1.0; 5])).unwrap();
            let b = topsis_rank(&matrix(values, [k; 5])).unwrap();
            for (x, y) in a.closeness.iter().zip(&b.closeness) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
