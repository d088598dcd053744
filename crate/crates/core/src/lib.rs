//! Numerical models for three-circles theorems on manifolds with
//! nonnegative Ricci curvature: warped-product model metrics, metric cones
//! with conic measures, the three-circles inequalities, frequency functions
//! and the existence pipeline for polynomial-growth harmonic functions.

pub mod cone;
pub mod dirichlet;
pub mod error;
pub mod frequency;
pub mod numerics;
pub mod profiles;
pub mod three_circles;
pub mod tolerances;

pub use cone::{ConeHarmonic, ConeSpace, CrossSectionSpectrum, DegreeSpectrum, Eigenspace};
pub use dirichlet::{GrowthClass, PipelineReport, PipelineStatus, RadialMode, Stage};
pub use error::{Error, Result};
pub use frequency::{FrequencyCurves, GreenRadial, WindowPolicy};
pub use profiles::{DoublyWarpedMetric, NiParameters, SingleWarpMetric, WarpProfile};
pub use three_circles::{ThreeCircles, WeightSystem};
