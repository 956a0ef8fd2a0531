use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use image::RgbImage;
use sha2::{Digest, Sha256};

use crate::autopoint::PointSet;
use crate::error::{Error, Result};
use crate::imageio;
use crate::proposer::wire::{PredictRequest, PredictResponse};
use crate::proposer::ProposalSet;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

/// Counting gate bounding concurrent requests.
struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl Gate {
    fn enter(&self) -> GateGuard<'_> {
        let mut n = self.in_flight.lock().expect("gate poisoned");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("gate poisoned");
        }
        *n += 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().expect("gate poisoned");
        *n -= 1;
        self.0.freed.notify_one();
    }
}

/// Client for an out-of-process promptable segmentation service.
pub struct ExternalProposer {
    endpoint: String,
    client: reqwest::blocking::Client,
    gate: Gate,
    cache_dir: Option<PathBuf>,
}

impl ExternalProposer {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, max_in_flight: usize) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Network(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            client,
            gate: Gate {
                in_flight: Mutex::new(0),
                freed: Condvar::new(),
                limit: max_in_flight.max(1),
            },
            cache_dir: None,
        })
    }

    /// Responses are stored under `dir`, keyed by a hash of the request body
    /// and endpoint, and reused on later calls.
    pub fn with_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn cache_path(&self, body: &[u8]) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let mut h = Sha256::new();
        h.update(self.endpoint.as_bytes());
        h.update([0u8]);
        h.update(body);
        Some(dir.join(format!("{}.json", hex::encode(h.finalize()))))
    }

    fn post(&self, body: Vec<u8>) -> Result<Vec<u8>> {
        let _slot = self.gate.enter();
        let url = format!("{}/predict", self.endpoint);
        let resp = self
            .client
            .post(&url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        let status = resp.status();
        let bytes = resp.bytes().map_err(|e| Error::Network(format!("{url}: {e}")))?;
        if !status.is_success() {
            return Err(Error::Protocol(format!(
                "{url} answered {status}: {}",
                String::from_utf8_lossy(&bytes)
            )));
        }
        Ok(bytes.to_vec())
    }

    /// Sends the image and points, validates and decodes the three masks.
    pub fn propose(&self, image: &RgbImage, points: &PointSet) -> Result<ProposalSet> {
        if points.is_empty() {
            return Err(Error::invalid("external proposer needs at least one point"));
        }
        let png = imageio::encode_rgb_png(image)?;
        let body = serde_json::to_vec(&PredictRequest::new(&png, points))?;

        let cache = self.cache_path(&body);
        let raw = match cache.as_ref().filter(|p| p.exists()) {
            Some(path) => std::fs::read(path).map_err(|e| Error::io(path, e))?,
            None => self.post(body)?,
        };
        let response: PredictResponse = serde_json::from_slice(&raw)
            .map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
        let set = response.into_proposals((image.width() as usize, image.height() as usize))?;

        if let Some(path) = cache.filter(|p| !p.exists()) {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            crate::fsutil::write_atomic(&path, &raw)?;
        }
        Ok(set)
    }
}
