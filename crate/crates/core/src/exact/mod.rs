//! Exact law of the continuous-time walk on D_n and its distance to uniform.

pub mod dist;
pub mod measure;
pub mod spectral;

pub use dist::{collision_exact, tv_exact, DistVector};
pub use measure::{convolve_naive, step_measure, StepMeasure};
pub use spectral::{
    convolve_fast, evolve_continuous, evolve_measure, poisson_weights, tv_curve, tv_curve_measure, CurvePoint,
    EvolveOptions, Evolved, Evolver, SpectralKernel,
};
