//! Candidate mask proposals: three masks with confidences per frame, either
//! from an external promptable-segmentation service or a classical baseline.

mod baseline;
mod external;
pub mod stub;
pub mod wire;

pub use baseline::propose_baseline;
pub use external::{ExternalProposer, DEFAULT_MAX_IN_FLIGHT, DEFAULT_TIMEOUT};

use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;

/// Every proposer returns exactly this many masks.
pub const PROPOSAL_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskProposal {
    pub mask: BinaryMask,
    /// In `[0, 1]`.
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalSource {
    External,
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProposalSet {
    pub proposals: [MaskProposal; PROPOSAL_COUNT],
    pub source: ProposalSource,
}

impl ProposalSet {
    pub fn masks(&self) -> impl Iterator<Item = &BinaryMask> {
        self.proposals.iter().map(|p| &p.mask)
    }

    pub fn confidences(&self) -> [f64; PROPOSAL_COUNT] {
        [
            self.proposals[0].confidence,
            self.proposals[1].confidence,
            self.proposals[2].confidence,
        ]
    }
}
