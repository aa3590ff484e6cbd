//! # voicescreen
//!
//! Sustained-vowel voice analysis for telephone-quality recordings (8 kHz).
//!
//! The crate implements an end-to-end screening pipeline:
//!
//! - **Audio gating**: load mono 16-bit PCM WAV files, trim silence, and
//!   reject phonations shorter than a minimum voiced duration.
//! - **Pitch**: a sawtooth-kernel spectral pitch tracker plus per-cycle
//!   period/amplitude extraction.
//! - **Dysphonia measures**: a fixed 307-dimensional feature vector covering
//!   jitter, shimmer, HNR/NHR, glottis quotient, RPDE, DFA, PPE, GNE, VFER,
//!   EMD excitation ratios, MFCCs, F0 statistics, and wavelet measures of the
//!   F0 contour.
//! - **Feature selection**: mRMR, Gram-Schmidt orthogonalization, RELIEF, and
//!   LASSO rankers combined by Borda voting, with a balance/split/select
//!   tally protocol.
//! - **Classification**: a Random Forest grown to purity (500 trees, sqrt(M)
//!   candidate features per split), a Gaussian Naive Bayes baseline, and a
//!   fair-coin baseline.
//! - **Evaluation**: balanced, stratified 10-fold cross-validation with 10
//!   repetitions, sensitivity/specificity/accuracy/balanced accuracy, feature
//!   count sweeps, and exploratory statistics.
//! - **Synthesis**: a glottal-pulse phonation synthesizer with controllable
//!   jitter, shimmer, HNR, and F0 drift, used as the ground-truth oracle for
//!   every measure.
//!
//! The `voicescreen` binary exposes the pipeline as subcommands; see the
//! crate README for usage.

pub mod audio;
pub mod classify;
pub mod config;
mod dsp;
pub mod error;
pub mod eval;
pub mod features;
pub mod fselect;
pub mod pipeline;
pub mod pitch;
mod rng;
pub mod synth;

pub use audio::{gate_recording, load_wav, save_wav, trim_phonation, Label, Recording, Sex};
pub use error::{Error, Result};
// pub use features::{extract_features, FeatureMatrix, FeatureVector};
pub use pitch::{estimate_f0, extract_cycles, CycleSequence, F0Contour};
pub use synth::{synthesize, SynthSpec};
