//! Radial harmonic modes and the existence pipeline: Dirichlet solutions on
//! exhausting balls, `J`-normalization, growth envelopes and convergence of
//! the normalized sequence.

mod mode;
mod pipeline;

pub use mode::{
    classify_mode, dirichlet_mode, dirichlet_mode_with, growth_classification,
    harmonicity_residual, normalize_by_j, solve_radial_mode, solve_radial_mode_with, GrowthClass,
    ModeSample, ModeSolver, RadialMode,
};
pub use pipeline::{
    existence_pipeline, growth_envelope, lemma53_scan, Envelope, Lemma53Scan, LevelReport,
    PipelineOptions, PipelineReport, PipelineStatus, PreconditionReport, Stage,
};
