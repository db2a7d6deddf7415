//! Streaming inference: gating, normalization, a sliding window over the last
//! `N` frames, and one `AffectOutput` per input frame.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{FeatureTrace, PredictionRecord};
use crate::model::Model;
use crate::types::{validate_frame, FrameFeatures, Landmarks68, AU_MAX, FEATURE_DIM, N_LANDMARKS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max)]
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

/// Tight axis-aligned box around `lm`, grown on every side by `expand` times its diagonal.
pub fn compute_bbox(lm: &Landmarks68, expand: f64) -> Result<BBox> {
    if !(expand >= 0.0 && expand.is_finite()) {
        return Err(Error::Range {
            field: "expand",
            value: expand,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let mut b = BBox {
        x_min: f64::INFINITY,
        y_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for p in lm.points() {
        b.x_min = b.x_min.min(p[0]);
        b.y_min = b.y_min.min(p[1]);
        b.x_max = b.x_max.max(p[0]);
        b.y_max = b.y_max.max(p[1]);
    }
    let diag = b.diagonal();
    if diag.is_nan() || diag <= 0.0 {
        return Err(Error::DegenerateShape);
    }
    let m = expand * diag;
    Ok(BBox {
        x_min: b.x_min - m,
        y_min: b.y_min - m,
        x_max: b.x_max + m,
        y_max: b.y_max + m,
    })
}

/// Maps one frame to the model's 219-d input.
///
/// Layout: 136 landmark coordinates (x0, y0, x1, y1, ...) centred on the
/// landmark bounding box and divided by its diagonal, then the 68 landmark
/// uncertainties, then the 15 AU intensities divided by 5. Invalid frames map
/// to all zeros.
pub fn normalize_frame(f: &FrameFeatures) -> Result<Vec<f64>> {
    let mut out = vec![0.0; FEATURE_DIM];
    if !f.valid {
        return Ok(out);
    }
    let f = validate_frame(f.clone())?;
    let bbox = compute_bbox(&f.landmarks, 0.0)?;
    let [cx, cy] = bbox.center();
    let inv = 1.0 / bbox.diagonal();
    for (i, p) in f.landmarks.points().iter().enumerate() {
        out[2 * i] = (p[0] - cx) * inv;
        out[2 * i + 1] = (p[1] - cy) * inv;
    }
    let lmu = &mut out[2 * N_LANDMARKS..3 * N_LANDMARKS];
    lmu.copy_from_slice(&f.landmark_uncertainties);
    for (o, a) in out[3 * N_LANDMARKS..].iter_mut().zip(&f.au_intensities) {
        *o = a / AU_MAX;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warmup {
    /// Left-pad the window with the first frame so every push emits.
    #[default]
    ReplicateFirst,
    /// Emit only once the window is full; the first `N - 1` frames are
    /// predicted from the first full window and released by `flush`.
    EmitAfterFill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub window_len: usize,
    pub warmup: Warmup,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_len: 64,
            warmup: Warmup::ReplicateFirst,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 {
            return Err(Error::Config("window_len must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// Per-stream state. The model is shared read-only; one pipeline per stream.
#[derive(Debug, Clone)]
pub struct Pipeline<'m> {
    model: &'m Model,
    cfg: PipelineConfig,
    buffer: VecDeque<Vec<f64>>,
    last_valid_landmarks: Option<Landmarks68>,
    first_index: Option<usize>,
    frames_seen: usize,
    emitted: usize,
    backlog: Vec<PredictionRecord>,
    tap: Option<Vec<Vec<f64>>>,
}

impl<'m> Pipeline<'m> {
    pub fn new(model: &'m Model, cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        if model.config().input_dim != FEATURE_DIM {
            return Err(Error::ShapeMismatch {
                expected: format!("model input_dim {FEATURE_DIM}"),
                got: format!("{}", model.config().input_dim),
            });
        }
        Ok(Self {
            model,
            buffer: VecDeque::with_capacity(cfg.window_len),
            cfg,
            last_valid_landmarks: None,
            first_index: None,
            frames_seen: 0,
            emitted: 0,
            backlog: Vec::new(),
            tap: None,
        })
    }

    /// Records every normalized vector fed into the window from now on.
    pub fn enable_input_tap(&mut self) {
        self.tap.get_or_insert_with(Vec::new);
    }

    pub fn input_tap(&self) -> &[Vec<f64>] {
        self.tap.as_deref().unwrap_or(&[])
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn last_valid_landmarks(&self) -> Option<&Landmarks68> {
        self.last_valid_landmarks.as_ref()
    }

    fn expected_index(&self) -> Option<usize> {
        self.first_index.map(|b| b + self.frames_seen)
    }

    /// Feeds one frame; returns the outputs that became available (0 or 1).
    pub fn push_frame(&mut self, f: &FrameFeatures) -> Result<Vec<PredictionRecord>> {
        if let Some(expected) = self.expected_index() {
            if f.frame_index != expected {
                return Err(Error::OutOfOrderFrame {
                    expected,
                    got: f.frame_index,
                });
            }
        }
        let x = normalize_frame(f)?;
        let n = self.cfg.window_len;
        if self.frames_seen == 0 {
            self.first_index = Some(f.frame_index);
            if self.cfg.warmup == Warmup::ReplicateFirst {
                self.buffer.extend(std::iter::repeat_n(x.clone(), n - 1));
            }
        }
        if f.valid {
            self.last_valid_landmarks = Some(f.landmarks.clone());
        }
        if let Some(t) = &mut self.tap {
            t.push(x.clone());
        }
        if self.buffer.len() == n {
            self.buffer.pop_front();
        }
        self.buffer.push_back(x);
        self.frames_seen += 1;

        if self.buffer.len() < n {
            return Ok(Vec::new());
        }
        let window = self.buffer.make_contiguous();
        if self.cfg.warmup == Warmup::EmitAfterFill && self.frames_seen == n && n > 1 {
            let heads = self.model.forward(window)?;
            let base = self.first_index.unwrap_or(0);
            self.backlog = heads[..n - 1]
                .iter()
                .enumerate()
                .map(|(k, h)| PredictionRecord {
                    frame_index: base + k,
                    output: h.to_affect_output(),
                })
                .collect();
        }
        let out = self.model.forward_last(window)?.to_affect_output();
        self.emitted += 1;
        Ok(vec![PredictionRecord {
            frame_index: f.frame_index,
            output: out,
        }])
    }

    /// Releases anything still pending. Empty under `ReplicateFirst`.
    pub fn flush(&mut self) -> Result<Vec<PredictionRecord>> {
        if self.cfg.warmup == Warmup::ReplicateFirst {
            return Ok(Vec::new());
        }
        let out = if self.frames_seen >= self.cfg.window_len {
            std::mem::take(&mut self.backlog)
        } else if self.buffer.is_empty() {
            Vec::new()
        } else {
            let base = self.first_index.unwrap_or(0);
            let window = self.buffer.make_contiguous();
            let heads = self.model.forward(window)?;
            self.buffer.clear();
            heads
                .iter()
                .enumerate()
                .map(|(k, h)| PredictionRecord {
                    frame_index: base + k,
                    output: h.to_affect_output(),
                })
                .collect()
        };
        self.emitted += out.len();
        Ok(out)
    }
}

/// Streams a whole trace through a fresh pipeline and flushes it.
/// Records come back in emission order.
pub fn stream_trace(model: &Model, cfg: &PipelineConfig, trace: &FeatureTrace) -> Result<Vec<PredictionRecord>> {
    let mut p = Pipeline::new(model, cfg.clone())?;
    let mut out = Vec::with_capacity(trace.len());
    for f in &trace.frames {
        out.extend(p.push_frame(f)?);
    }
    out.extend(p.flush()?);
    Ok(out)
}

/// Batch inference over a whole trace, frames in parallel, sorted by frame
/// index. Bitwise identical to [`stream_trace`] after sorting.
pub fn process_trace(model: &Model, cfg: &PipelineConfig, trace: &FeatureTrace) -> Result<Vec<PredictionRecord>> {
    cfg.validate()?;
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    for (k, f) in trace.frames.iter().enumerate() {
        let expected = trace.frames[0].frame_index + k;
        if f.frame_index != expected {
            return Err(Error::OutOfOrderFrame {
                expected,
                got: f.frame_index,
            });
        }
    }
    let n = cfg.window_len;
    let xs: Vec<Vec<f64>> = trace.frames.iter().map(normalize_frame).collect::<Result<_>>()?;
    let base = trace.frames[0].frame_index;
    let record = |k: usize, h: crate::model::FrameHeads| PredictionRecord {
        frame_index: base + k,
        output: h.to_affect_output(),
    };
    match cfg.warmup {
        Warmup::ReplicateFirst => {
            let mut padded: Vec<&[f64]> = vec![xs[0].as_slice(); n - 1];
            padded.extend(xs.iter().map(Vec::as_slice));
            (0..xs.len())
                .into_par_iter()
                .map(|k| model.forward_last(&padded[k..k + n]).map(|h| record(k, h)))
                .collect()
        }
        Warmup::EmitAfterFill => {
            if xs.len() < n {
                let heads = model.forward(&xs)?;
                return Ok(heads.into_iter().enumerate().map(|(k, h)| record(k, h)).collect());
            }
            let mut out: Vec<PredictionRecord> = model.forward(&xs[..n])?[..n - 1]
                .iter()
                .enumerate()
                .map(|(k, h)| record(k, *h))
                .collect();
            let rest: Vec<PredictionRecord> = (n - 1..xs.len())
                .into_par_iter()
                .map(|k| model.forward_last(&xs[k + 1 - n..=k]).map(|h| record(k, h)))
                .collect::<Result<_>>()?;
            out.extend(rest);
            Ok(out)
        }
    }
}
