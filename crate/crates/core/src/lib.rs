//! Spectral laboratory for kernel ridge regression: synthetic spectra and
//! targets, feature samplers, exact and simulated bias/variance, concrete
//! kernels, non-asymptotic bounds and learning-curve sweeps.

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod features;
pub mod kernels;
pub mod numerics;
pub mod spectral;
pub mod sweep;

pub use diagnostics::{bound_scan, BoundReport, ConcentrationTriple, GfEmpirical};
pub use error::{Error, Result};
pub use estimators::{exact_bias, exact_errors, exact_variance, ErrorEstimate, EstimateMethod};
pub use features::{FeatureFamily, FeatureSample};
pub use kernels::{Domain, KernelKind, PointSet};
pub use numerics::{Matrix, RngStream, SymMatrix};
pub use spectral::{
    make_spectrum, predict_rates, FeatureAssumption, Rate, RatePrediction, RateScale, Regime, RidgeKind,
    RidgeSchedule, SpectralFamily, SpectralModel, Variant,
};
pub use sweep::{run_sweep, RateFit, SweepConfig, SweepResult, SweepRow};
