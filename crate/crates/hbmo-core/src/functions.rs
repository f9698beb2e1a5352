//! The built-in corpus of test functions on H^n.
//!
//! Each entry carries the analytically known BMO seminorm when one exists;
//! bound checks use these known values so the inequality tests stay
//! one-sided and statistically sound.

use crate::group::{self, GroupPoint};
use std::sync::Arc;

/// Structural behaviour of a test function under dilations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    /// f(delta_r x) = f(x) for every r > 0.
    DilationInvariant,
    /// f depends only on the gauge norm |x|.
    Radial,
    /// No special structure.
    None,
}

/// A named test function on H^n.
///
/// Evaluators work on raw coordinate slices (the vertical coordinate is the
/// last entry) so samplers can avoid allocation in hot loops.
#[derive(Clone)]
pub struct FunctionSpec {
    pub name: &'static str,
    pub homogeneity: Homogeneity,
    /// Analytically known BMO seminorm, when available.
    pub known_bmo_seminorm: Option<f64>,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("homogeneity", &self.homogeneity)
            .field("known_bmo_seminorm", &self.known_bmo_seminorm)
            .finish()
    }
}

impl FunctionSpec {
    pub fn new(
        name: &'static str,
        homogeneity: Homogeneity,
        known_bmo_seminorm: Option<f64>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FunctionSpec {
            name,
            homogeneity,
            known_bmo_seminorm,
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, p: &GroupPoint) -> f64 {
        (self.eval)(p.coords())
    }

    pub fn eval_coords(&self, coords: &[f64]) -> f64 {
        (self.eval)(coords)
    }
}

/// Sign of the vertical coordinate: the dilation-invariant extremal
/// candidate. Value 0 exactly on the hyperplane (a null set); BMO seminorm 1,
/// attained on vertically symmetric balls.
pub fn f0() -> FunctionSpec {
    FunctionSpec::new("f0", Homogeneity::DilationInvariant, Some(1.0), |c| {
        let t = c[c.len() - 1];
        if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// The constant function 1; BMO seminorm 0.
pub fn one() -> FunctionSpec {
    FunctionSpec::new("one", Homogeneity::Radial, Some(0.0), |_| 1.0)
}

/// The zero function; BMO seminorm 0.
pub fn zero() -> FunctionSpec {
    FunctionSpec::new("zero", Homogeneity::Radial, Some(0.0), |_| 0.0)
}

/// Smooth radial bump exp(-|x|^4); bounded, seminorm not known in closed
/// form.
pub fn bump() -> FunctionSpec {
    FunctionSpec::new("bump", Homogeneity::Radial, None, |c| {
        let g = group::gauge_of_coords(c);
        (-g.powi(4)).exp()
    })
}

/// log |x|: the classic unbounded function of bounded mean oscillation;
/// seminorm not known in closed form. Returns -inf at the identity, which the
/// ball-mean estimators discard and count.
pub fn log_gauge() -> FunctionSpec {
    FunctionSpec::new("log_gauge", Homogeneity::Radial, None, |c| {
        group::gauge_of_coords(c).ln()
    })
}

/// 2 * f0: scaled copy used to exercise estimator homogeneity; seminorm 2.
pub fn two_f0() -> FunctionSpec {
    FunctionSpec::new("2f0", Homogeneity::DilationInvariant, Some(2.0), |c| {
        let t = c[c.len() - 1];
        if t > 0.0 {
            2.0
        } else if t < 0.0 {
            -2.0
        } else {
            0.0
        }
    })
}

/// The full corpus.
pub fn builtin_corpus() -> Vec<FunctionSpec> {
    vec![f0(), one(), zero(), bump(), log_gauge(), two_f0()]
}

/// Look a corpus entry up by name.
pub fn corpus_lookup(name: &str) -> Option<FunctionSpec> {
    builtin_corpus().into_iter().find(|f| f.name == name)
}
