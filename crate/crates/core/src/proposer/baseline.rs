use crate::autopoint::PointSet;
use crate::kernels::{binarize, dilate3x3, erode3x3, otsu_threshold};
use crate::proposer::{MaskProposal, ProposalSet, ProposalSource};
use crate::raster::{BinaryMask, GrayImage};

/// SAM-free stand-in: the Otsu mask of the thermal image, its 3x3 erosion
/// and its 3x3 dilation. Confidence is the fraction of positive points each
/// mask covers (0 without positives). A frame with no Otsu split yields
/// three empty masks.
pub fn propose_baseline(thermal_gray: &GrayImage, points: &PointSet) -> ProposalSet {
    let values: Vec<f64> = thermal_gray.as_slice().iter().map(|&v| f64::from(v)).collect();
    let raw = match otsu_threshold(&values, (0.0, 255.0)) {
        Ok(r) => binarize(thermal_gray, r.tau),
        Err(_) => BinaryMask::filled(thermal_gray.width(), thermal_gray.height(), false),
    };
    let eroded = erode3x3(&raw);
    let dilated = dilate3x3(&raw);

    let coverage = |m: &BinaryMask| -> f64 {
        if points.positives.is_empty() {
            return 0.0;
        }
        let hit = points.positives.iter().filter(|p| *m.get(p.x, p.y)).count();
        (hit as f64 / points.positives.len() as f64).clamp(0.0, 1.0)
    };
    let proposal = |mask: BinaryMask| MaskProposal {
        confidence: coverage(&mask),
        mask,
    };
    ProposalSet {
        proposals: [proposal(raw), proposal(eroded), proposal(dilated)],
        source: ProposalSource::Baseline,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autopoint::{PointLabel, PointPrompt};
    use crate::synth::{gen_scene, Blob, BlobShape, SceneSpec};

    fn points_at(coords: &[(usize, usize)]) -> PointSet {
        PointSet {
            tau: 0.0,
            positives: coords
                .iter()
                .map(|&(x, y)| PointPrompt { x, y, label: PointLabel::Positive, patch_mean: 0.0, edge_distance: 0.0 })
                .collect(),
            negatives: vec![],
            edge_pixels: 0,
        }
    }

    fn scene() -> crate::synth::Scene {
        gen_scene(&SceneSpec {
            width: 64,
            height: 64,
            background_temp: 20.0,
            blobs: vec![Blob { center: (32.0, 32.0), radius: 12.0, peak_temp: 420.0, shape: BlobShape::Square }],
            noise_sigma: 4.0,
            seed: 3,
            fire_threshold: 100.0,
        })
        .unwrap()
    }

    #[test]
    fn nesting_and_coverage() {
        let s = scene();
        let set = propose_baseline(&s.thermal, &points_at(&[(30, 30), (25, 34)]));
        let [raw, eroded, dilated] = &set.proposals;
        assert!(eroded.mask.is_subset_of(&raw.mask));
        assert!(raw.mask.is_subset_of(&dilated.mask));
        assert_eq!(raw.confidence, 1.0);
        assert_eq!(set.source, ProposalSource::Baseline);
    }

    #[test]
    fn otsu_mask_matches_square() {
        let s = scene();
        let set = propose_baseline(&s.thermal, &points_at(&[]));
        let iou = crate::kernels::iou(&set.proposals[0].mask, &s.ground_truth).unwrap();
        assert!(iou >= 0.95, "iou {iou}");
        assert!(set.confidences().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constant_frame_gives_empty_masks() {
        let g = GrayImage::filled(16, 16, 9);
        let set = propose_baseline(&g, &points_at(&[(1, 1)]));
        assert!(set.masks().all(|m| m.count_ones() == 0));
        assert_eq!(set.proposals.len(), 3);
    }
}
