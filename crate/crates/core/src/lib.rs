//! Scoring library for continuous behavioral predictions in
//! novel-object-recognition (NOR) trials.
//!
//! The crate is organized around [`timeline::Timeline`], a normalized set of
//! half-open frame intervals that represents one binary activity track.
//! Everything else consumes timelines:
//!
//! - [`annotation`]: parse and serialize ground-truth trial annotations and
//!   model prediction files (interval JSON, window CSV).
//! - [`clipper`]: fragment labeled intervals into fixed-length training clips
//!   and produce a deterministic seeded train/validation split.
//! - [`clip_metrics`]: clip-level accuracy and precision-recall / average
//!   precision with `investigate` as the positive class.
//! - [`segmental`]: the eight-category continuous-recognition error taxonomy
//!   (TP, TN, overfill, underfill, fragmentation, merge, insertion, deletion).
//! - [`nor`]: the six NOR behavioral metrics per trial and regression-style
//!   agreement statistics across a corpus.
//! - [`synth`]: seeded synthetic trial generator and perturbation injector
//!   that emits (ground truth, perturbed prediction, expected-error ledger)
//!   triples for oracle testing.
//! - [`batch`]: order-preserving batch execution, data-parallel when the
//!   `parallel` feature is enabled (default), sequential otherwise.

pub mod annotation;
pub mod batch;
pub mod clip_metrics;
pub mod clipper;
pub mod error;
pub mod nor;
pub mod rng;
pub mod segmental;
pub mod synth;
pub mod timeline;

pub use error::Error;
pub use timeline::{Frame, FrameInterval, TimeBase, Timeline};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
