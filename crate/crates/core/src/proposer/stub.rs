//! Reference implementation of the proposer service contract, for tests,
//! examples and local runs without a segmentation model.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::Value;

use crate::error::Result;
use crate::httpserver::BackgroundServer;
use crate::imageio;
use crate::kernels::rgb_to_gray;
use crate::proposer::propose_baseline;
use crate::proposer::wire::{PredictRequest, PredictResponse};
use crate::autopoint::{PointLabel, PointPrompt, PointSet};

type Responder = dyn Fn(&PredictRequest) -> Value + Send + Sync;

/// A loopback HTTP server answering `POST /predict` with whatever the
/// responder returns. Shuts down on drop.
pub struct StubServer {
    inner: BackgroundServer,
}

impl StubServer {
    pub fn spawn<F>(responder: F) -> Result<Self>
    where
        F: Fn(&PredictRequest) -> Value + Send + Sync + 'static,
    {
        let responder: Arc<Responder> = Arc::new(responder);
        let app = Router::new().route("/predict", post(predict)).with_state(responder);
        let inner = BackgroundServer::spawn(app, SocketAddr::from(([127, 0, 0, 1], 0)))?;
        Ok(Self { inner })
    }

    /// Serves the classical baseline over the wire: decodes the image,
    /// converts to gray and returns the baseline's three masks.
    pub fn spawn_baseline() -> Result<Self> {
        Self::spawn(baseline_response)
    }

    pub fn endpoint(&self) -> String {
        self.inner.base_url()
    }
}

async fn predict(State(responder): State<Arc<Responder>>, Json(req): Json<PredictRequest>) -> Json<Value> {
    let responder = responder.clone();
    let value = tokio::task::spawn_blocking(move || responder(&req))
        .await
        .unwrap_or(Value::Null);
    Json(value)
}

/// Responder used by [`StubServer::spawn_baseline`].
pub fn baseline_response(req: &PredictRequest) -> Value {
    let Ok(png) = req.image_png() else {
        return Value::Null;
    };
    let Ok(img) = image::load_from_memory(&png) else {
        return Value::Null;
    };
    let gray = rgb_to_gray(&img.to_rgb8());
    let mut points = PointSet {
        tau: 0.0,
        positives: vec![],
        negatives: vec![],
        edge_pixels: 0,
    };
    for p in &req.points {
        let prompt = PointPrompt {
            x: p.x.max(0) as usize,
            y: p.y.max(0) as usize,
            label: if p.label == 1 { PointLabel::Positive } else { PointLabel::Negative },
            patch_mean: 0.0,
            edge_distance: 0.0,
        };
        if p.label == 1 {
            points.positives.push(prompt);
        } else {
            points.negatives.push(prompt);
        }
    }
    let set = propose_baseline(&gray, &points);
    let masks: Vec<Vec<u8>> = set
        .masks()
        .map(|m| imageio::encode_mask_png(m).expect("in-memory png encode"))
        .collect();
    serde_json::to_value(PredictResponse::from_masks(&masks, &set.confidences()))
        .expect("response serializes")
}
