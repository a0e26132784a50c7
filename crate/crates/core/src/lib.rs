//! Laser-speckle synthesis and analysis pipeline.
//!
//! The crate covers the full chain from image formation to inference:
//!
//! 1. [`speckle`] - synthetic speckle images (per-pixel phasor sums or a
//!    band-limited pupil model), speckle contrast, Gaussian blur.
//! 2. [`texture`] - ROI selection by local contrast and the nine kernel
//!    texture measures t1..t9.
//! 3. [`dataset`] / [`discretize`] - tabular feature rows and supervised
//!    binning (equal-frequency or equal-width).
//! 4. [`info`] - empirical entropy, mutual information, and conditional
//!    mutual information in bits.
//! 5. [`classifier`] - a selective tree-augmented naive Bayes classifier
//!    gated by an information threshold.
//! 6. [`links`] - three-phase (draft/thicken/thin) dependency-skeleton
//!    discovery, reporting edges incident to the progress attribute.
//! 7. [`eval`] / [`experiment`] - stratified splits, confusion-matrix
//!    metrics, and the three-group end-to-end experiment runner.
//! 8. [`format`] - pure byte/string codecs (CSV, PGM, SPKL, JSON); this
//!    crate never touches the filesystem.
//!
//! Everything is deterministic: all randomness flows from explicit 64-bit
//! seeds through the counter-based generator in [`rng`], so identical inputs
//! produce bit-identical outputs across runs, thread counts, and platforms.

pub mod classifier;
pub mod dataset;
pub mod discretize;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod format;
pub mod info;
pub mod links;
pub mod rng;
pub mod speckle;
pub mod texture;

pub use error::{Error, Result};
