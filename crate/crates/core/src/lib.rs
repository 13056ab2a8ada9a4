//! EEG phase-connectivity fingerprints.
//!
//! Reads EEG-MMI style EDF recordings, band-limits them forward-backward,
//! extracts instantaneous phase, builds PLI/PLV connectivity features per
//! epoch for a grid of epoch lengths and scores verification performance
//! (EER, AUC) for every condition/band/method/window cell.

pub mod biometric;
pub mod connectivity;
pub mod dsp;
pub mod edf;
pub mod pipeline;
pub mod selftest;
pub mod stats;
pub mod synth;

pub use biometric::{CellKey, ImpostorSampling, PerformancePoint, ScoreSet};
pub use connectivity::{Method, WindowGrid};
pub use dsp::{Band, BandDefinition, PhaseSeries};
pub use edf::{Condition, DatasetCatalog, Recording};
