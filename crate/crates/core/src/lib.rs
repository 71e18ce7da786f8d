//! Numerical small-time density estimates for one-dimensional Lévy processes.

pub mod bounds;
pub mod decomposition;
pub mod error;
pub mod exponents;
pub mod fourier;
pub mod measure;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod scales;

/// Version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{LevyError, Result};
pub use exponents::{estimate_beta, growth_floor, BetaEstimate, ExponentProfile};
pub use montecarlo::{compare_to_density, sample_increments, Comparison, SamplerConfig, Samples, Scheme};
pub use measure::{validate, LevyMeasure, LevyMeasureSpec, MeasureKind, URange, ValidationReport};
pub use report::Verdict;
pub use scales::{comparability_report, rho, rho_l, rho_u, ScaleTable};
pub use decomposition::{build, poisson_law, psi_t, Decomposition, PoissonLaw};
pub use fourier::{convolution_check, ConvolutionCheck, DensityGrid, DensityOptions, Fourier, TailConstants, Which};
pub use bounds::{
    bell_upper, compare_sharpening, fit_bar_upper, fit_compound_lower, fit_compound_upper, fit_derivative_upper,
    fit_on_diagonal, ik_diagnostic, BoundCertificate, BoundsConfig, BoundsContext, EstimateId, Needs, Shape, TailSpec,
};
