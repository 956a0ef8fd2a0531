//! JSON bodies of the `POST {endpoint}/predict` contract.
//!
//! Request: `{"image_png_b64": str, "points": [{"x": int, "y": int, "label": 0|1}]}`
//! with label 1 for positive points. Response:
//! `{"masks_png_b64": [str, str, str], "scores": [float, float, float]}`,
//! masks being single-channel PNG holding `{0, 255}`.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::autopoint::{PointLabel, PointSet};
use crate::error::{Error, Result};
use crate::imageio;
use crate::proposer::{MaskProposal, ProposalSet, ProposalSource, PROPOSAL_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirePoint {
    pub x: i64,
    pub y: i64,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub image_png_b64: String,
    pub points: Vec<WirePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub masks_png_b64: Vec<String>,
    pub scores: Vec<f64>,
}

impl PredictRequest {
    pub fn new(image_png: &[u8], points: &PointSet) -> Self {
        let points = points
            .iter()
            .map(|p| WirePoint {
                x: p.x as i64,
                y: p.y as i64,
                label: match p.label {
                    PointLabel::Positive => 1,
                    PointLabel::Negative => 0,
                },
            })
            .collect();
        Self {
            image_png_b64: STANDARD.encode(image_png),
            points,
        }
    }

    pub fn image_png(&self) -> Result<Vec<u8>> {
        STANDARD
            .decode(&self.image_png_b64)
            .map_err(|e| Error::Protocol(format!("image is not valid base64: {e}")))
    }
}

impl PredictResponse {
    pub fn from_masks(masks: &[Vec<u8>], scores: &[f64]) -> Self {
        Self {
            masks_png_b64: masks.iter().map(|m| STANDARD.encode(m)).collect(),
            scores: scores.to_vec(),
        }
    }

    /// Checks count, decodability, dimensions and score range, then builds
    /// the proposal set. Mask bytes are decoded as-is, never re-thresholded.
    pub fn into_proposals(self, expected_dims: (usize, usize)) -> Result<ProposalSet> {
        if self.masks_png_b64.len() != PROPOSAL_COUNT {
            return Err(Error::Protocol(format!(
                "expected {PROPOSAL_COUNT} masks, got {}",
                self.masks_png_b64.len()
            )));
        }
        if self.scores.len() != PROPOSAL_COUNT {
            return Err(Error::Protocol(format!(
                "expected {PROPOSAL_COUNT} scores, got {}",
                self.scores.len()
            )));
        }
        if let Some(i) = self.scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::Protocol(format!(
                "score at index {i} is outside [0, 1]: {}",
                self.scores[i]
            )));
        }
        let mut proposals = Vec::with_capacity(PROPOSAL_COUNT);
        for (i, (b64, &score)) in self.masks_png_b64.iter().zip(&self.scores).enumerate() {
            let bytes = STANDARD
                .decode(b64)
                .map_err(|e| Error::Protocol(format!("mask {i} is not valid base64: {e}")))?;
            let mask = imageio::decode_mask_png(&bytes)
                .map_err(|e| Error::Protocol(format!("mask {i}: {e}")))?;
            if mask.dims() != expected_dims {
                return Err(Error::Protocol(format!(
                    "mask {i} is {:?}, expected {:?}",
                    mask.dims(),
                    expected_dims
                )));
            }
            proposals.push(MaskProposal {
                mask,
                confidence: score,
            });
        }
        let proposals: [MaskProposal; PROPOSAL_COUNT] =
            proposals.try_into().expect("length checked above");
        Ok(ProposalSet {
            proposals,
            source: ProposalSource::External,
        })
    }
}
