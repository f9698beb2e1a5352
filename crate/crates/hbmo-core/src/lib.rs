//! Numerical toolkit for the Heisenberg group: group arithmetic, gauge
//! geometry, seeded Monte-Carlo sampling, multilinear integral-operator
//! evaluation, sharp-constant computation, BMO-seminorm estimation, and a
//! verification harness for the identities and inequalities those constants
//! satisfy.
//!
//! # Layout
//!
//! - [`group`]: the group law, inverses, anisotropic dilations, the
//!   homogeneous gauge and distance, and ball volumes.
//! - [`stream`]: seeded, splittable random streams; every stochastic routine
//!   takes one, and equal streams give bit-identical results regardless of
//!   thread count.
//! - [`sampling`]: uniform ball sampling, gauge-polar decomposition, radial
//!   importance densities, and deterministic radial quadrature.
//! - [`functions`]: the built-in input corpus (`f0`, `one`, `bump`,
//!   `log_gauge`, ...) with homogeneity metadata and known seminorms.
//! - [`operators`]: pointwise kernel evaluation and Monte-Carlo operator
//!   evaluation for the three kernel families.
//! - [`constants`]: the sharp constants via closed forms, nested
//!   deterministic quadrature, and Monte Carlo, with analytic divergence
//!   detection.
//! - [`bmo`]: ball means, mean oscillations, and grid lower bounds for the
//!   BMO seminorm, including of noisy (sampled) fields.
//! - [`verify`]: mean-identity, integration-interchange, upper-bound and
//!   extremal-probe checks producing [`verify::VerificationReport`]s.
//!
//! # Conventions
//!
//! Points of the group of index `n` are stored as `2n + 1` coordinates,
//! horizontal first, vertical last. The homogeneous dimension is
//! `Q = 2n + 2`. All estimates report a standard error alongside the value,
//! and all stochastic routines are deterministic functions of their
//! [`stream::SeededStream`].

pub mod accumulate;
pub mod bmo;
pub mod constants;
pub mod error;
pub mod functions;
pub mod group;
pub mod operators;
pub mod quadrature;
pub mod sampling;
pub mod special;
pub mod stream;
pub mod verify;

pub use accumulate::{mc_run, mc_run_scoped, McStats, DEFAULT_CHUNK};
pub use bmo::{
    bmo_seminorm_lb, default_grid, mean_on_ball, mean_oscillation, Ball, BallGrid, BallMean,
    BallOscillation, BmoEstimate, Oscillation, SampledField,
};
pub use constants::{
    closed_form, closed_form_a, closed_form_b, closed_form_f_indicator, convergence_threshold,
    mc_constant, quad_constant, ConstantFamily, ConstantMethod, ConstantQuery, ConstantResult,
    ConstantStatus,
};
pub use error::{HbmoError, Result};
pub use functions::{builtin_corpus, corpus_lookup, FunctionSpec, Homogeneity};
pub use group::{unit_ball_volume, GroupDimension, GroupPoint, VolumeMethod};
pub use operators::{
    eval_operator, eval_operator_direct, kernel_value, EvalResult, KernelFamily, KernelSpec,
    PhiSpec, QuadratureConfig, MAX_M,
};
pub use quadrature::{integrate, integrate_with_breakpoints, QuadOptions, QuadResult};
pub use sampling::{
    gauge_polar, radial_integral, sample_ball_uniform, BallSampler, ImportanceSampler,
    RadialDensity, RadialProfile,
};
pub use stream::SeededStream;
pub use verify::{
    bounds_grid, check_fubini_interchange, check_mean_identity, check_upper_bound, extremal_probe,
    suite_bounds, suite_extremal, suite_identities, OperatorField, VerificationReport,
};
