//! Continuous valence/arousal estimation from per-frame facial descriptors
//! (68 landmarks with uncertainties, 15 action-unit intensities), with a
//! sampling-free evidential uncertainty estimate per frame.
//!
//! The crate covers the whole loop: a synthetic trace generator, file formats,
//! a streaming inference pipeline, a small causal temporal regressor with its
//! own training loop, agreement metrics, evaluation reports and a command-line
//! front end.
//!
//! ```no_run
//! use affect_trace::{model::{Model, ModelConfig}, pipeline::{stream_trace, PipelineConfig}, sim};
//!
//! let cfg = sim::SimConfig::default();
//! let map = sim::GenerativeMap::new(cfg.seed);
//! let plan = sim::DatasetPlan::from_total(10);
//! let clip = sim::simulate_clip(&cfg, &map, &plan, 0);
//! let model = Model::init(ModelConfig::default()).unwrap();
//! let out = stream_trace(&model, &PipelineConfig::default(), &clip.trace).unwrap();
//! assert_eq!(out.len(), clip.trace.len());
//! ```

pub mod config;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod run;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use types::{AffectOutput, Dim, FrameFeatures, Landmarks68, Quadrant, UncertaintyTriple, VAPoint};
