//! Pointwise evaluation of the multilinear integral operators.
//!
//! Three families act on m-tuples of functions on H^n:
//!
//! * Hardy-Littlewood-Polya: kernel `1 / max(|x|^beta, |y_1|^beta, ..., |y_m|^beta)^m`
//! * Hilbert: kernel `1 / (|x|^beta + |y_1|^beta + ... + |y_m|^beta)^m`
//! * Hausdorff: kernel `Phi(delta_{1/|y_1|} x, ..., delta_{1/|y_m|} x) / prod_j |y_j|^beta`
//!
//! For the first two, evaluation substitutes y_j = delta_{|x|} z_j, which
//! normalizes the kernel (|x| is replaced by 1) and moves the dilation into
//! the arguments of the f_j; that is the form integrated by Monte Carlo here.
//! Note the substitution also produces a Jacobian factor |x|^{m(Q-beta)}
//! relative to the defining integral, so the two forms coincide on the unit
//! gauge sphere |x| = 1 (and everywhere when beta = Q, where neither
//! converges). `eval_operator` computes the normalized (dilated) form;
//! `eval_operator_direct` computes the defining integral.
//!
//! The kernel exponent is an explicit parameter beta. The textbook choice
//! beta = n makes every one of these integrals diverge (the threshold is the
//! homogeneous dimension Q = 2n + 2 > n), so divergence is decided
//! analytically up front and a finite truncation radius must be requested
//! explicitly to evaluate a divergent configuration.

use crate::accumulate::{self, DEFAULT_CHUNK};
use crate::error::{HbmoError, Result};
use crate::functions::FunctionSpec;
use crate::group::{self, GroupDimension, GroupPoint};
use crate::sampling::{ImportanceSampler, RadialDensity};
use crate::stream::SeededStream;
use std::sync::Arc;

/// Operator family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Hlp,
    Hilbert,
    Hausdorff,
}

impl KernelFamily {
    pub fn label(&self) -> &'static str {
        match self {
            KernelFamily::Hlp => "hlp",
            KernelFamily::Hilbert => "hilbert",
            KernelFamily::Hausdorff => "hausdorff",
        }
    }
}

/// Weight function for the Hausdorff family: a function of m group points.
///
/// `per_factor_radial` is set when Phi factorizes as a product of radial
/// functions of the individual gauges; the deterministic constant routes
/// exploit that structure.
#[derive(Clone)]
pub struct PhiSpec {
    pub name: &'static str,
    eval: Arc<dyn Fn(&GroupDimension, &[GroupPoint]) -> f64 + Send + Sync>,
    pub per_factor_radial: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Upper edge of the radial support of each factor (infinite when
    /// unbounded); bounded supports let the samplers avoid truncation bias.
    pub radial_support: f64,
}

impl std::fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhiSpec")
            .field("name", &self.name)
            .field("radial_support", &self.radial_support)
            .finish()
    }
}

impl PhiSpec {
    pub fn eval(&self, dim: &GroupDimension, zs: &[GroupPoint]) -> f64 {
        (self.eval)(dim, zs)
    }

    /// Product of per-factor indicators of the unit gauge ball.
    pub fn unit_ball_indicator() -> PhiSpec {
        PhiSpec {
            name: "unit-ball-indicator",
            eval: Arc::new(|dim, zs| {
                for z in zs {
                    if dim.gauge_norm(z).unwrap_or(f64::INFINITY) >= 1.0 {
                        return 0.0;
                    }
                }
                1.0
            }),
            per_factor_radial: Some(Arc::new(|r| if r < 1.0 { 1.0 } else { 0.0 })),
            radial_support: 1.0,
        }
    }

    /// Product of per-factor gauge Gaussians exp(-|z|^4).
    pub fn gauge_gaussian() -> PhiSpec {
        PhiSpec {
            name: "gauge-gaussian",
            eval: Arc::new(|_dim, zs| {
                let mut acc = 0.0;
                for z in zs {
                    acc += group::gauge_of_coords(z.coords()).powi(4);
                }
                (-acc).exp()
            }),
            per_factor_radial: Some(Arc::new(|r| (-r.powi(4)).exp())),
            radial_support: f64::INFINITY,
        }
    }

    pub fn builtin(name: &str) -> Option<PhiSpec> {
        match name {
            "unit-ball-indicator" => Some(Self::unit_ball_indicator()),
            "gauge-gaussian" => Some(Self::gauge_gaussian()),
            _ => None,
        }
    }
}

/// Largest supported multilinearity; the evaluation loops keep the
/// per-factor gauges in fixed stack buffers of this size.
pub const MAX_M: usize = 8;

/// Which operator to evaluate: family, multilinearity and gauge exponent.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub m: usize,
    pub beta: f64,
    /// Present exactly when family = Hausdorff.
    pub phi: Option<PhiSpec>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, m: usize, beta: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            m,
            beta,
            phi: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hausdorff(m: usize, beta: f64, phi: PhiSpec) -> Result<Self> {
        let spec = KernelSpec {
            family: KernelFamily::Hausdorff,
            m,
            beta,
            phi: Some(phi),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(HbmoError::invalid("multilinearity m must be >= 1"));
        }
        if self.m > MAX_M {
            return Err(HbmoError::invalid(format!(
                "multilinearity m must be <= {MAX_M}, got {}",
                self.m
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(HbmoError::invalid(format!(
                "kernel exponent beta must be positive and finite, got {}",
                self.beta
            )));
        }
        match (self.family, &self.phi) {
            (KernelFamily::Hausdorff, None) => Err(HbmoError::invalid(
                "Hausdorff kernel requires a weight function phi",
            )),
            (KernelFamily::Hausdorff, Some(_)) => Ok(()),
            (_, Some(_)) => Err(HbmoError::invalid(
                "phi is only meaningful for the Hausdorff family",
            )),
            (_, None) => Ok(()),
        }
    }

    /// Analytic convergence check for the untruncated integral defining the
    /// operator (equivalently its sharp constant).
    pub fn divergence_reason(&self, dim: &GroupDimension) -> Option<String> {
        let q = dim.q();
        match self.family {
            KernelFamily::Hlp | KernelFamily::Hilbert => {
                if self.beta <= q {
                    Some(format!(
                        "beta <= Q = {q}: per-factor tail exponent Q - 1 - beta = {} >= -1, so the radial integral diverges at infinity",
                        q - 1.0 - self.beta
                    ))
                } else {
                    None
                }
            }
            KernelFamily::Hausdorff => {
                // Integrand per factor ~ phi(r) r^{Q-1-beta}; for the built-in
                // weights the constraint is integrability at the origin.
                if self.beta >= q {
                    Some(format!(
                        "beta >= Q = {q}: per-factor exponent Q - 1 - beta = {} <= -1 makes the integral diverge at the origin (truncation cannot help there)",
                        q - 1.0 - self.beta
                    ))
                } else if self
                    .phi
                    .as_ref()
                    .is_some_and(|p| p.radial_support.is_infinite() && p.per_factor_radial.is_none())
                {
                    Some("unbounded phi without known radial structure: convergence cannot be certified".into())
                } else {
                    None
                }
            }
        }
    }
}

/// The defining integrand (direct form) at (x, y_1, ..., y_m).
pub fn kernel_value(
    spec: &KernelSpec,
    dim: &GroupDimension,
    x: &GroupPoint,
    ys: &[GroupPoint],
) -> Result<f64> {
    spec.validate()?;
    if ys.len() != spec.m {
        return Err(HbmoError::invalid(format!(
            "kernel_value: expected {} y-arguments, got {}",
            spec.m,
            ys.len()
        )));
    }
    let gx = dim.gauge_norm(x)?;
    match spec.family {
        KernelFamily::Hlp => {
            if gx == 0.0 {
                return Err(HbmoError::invalid(
                    "kernel_value: x must not be the identity for this family",
                ));
            }
            let mut mx = gx.powf(spec.beta);
            for y in ys {
                mx = mx.max(dim.gauge_norm(y)?.powf(spec.beta));
            }
            Ok(mx.powi(-(spec.m as i32)))
        }
        KernelFamily::Hilbert => {
            if gx == 0.0 {
                return Err(HbmoError::invalid(
                    "kernel_value: x must not be the identity for this family",
                ));
            }
            let mut s = gx.powf(spec.beta);
            for y in ys {
                s += dim.gauge_norm(y)?.powf(spec.beta);
            }
            Ok(s.powi(-(spec.m as i32)))
        }
        KernelFamily::Hausdorff => {
            let phi = spec.phi.as_ref().expect("validated");
            let mut args = Vec::with_capacity(spec.m);
            let mut denom = 1.0;
            for y in ys {
                let gy = dim.gauge_norm(y)?;
                if gy == 0.0 {
                    return Err(HbmoError::invalid(
                        "kernel_value: Hausdorff y-arguments must not be the identity",
                    ));
                }
                args.push(dim.dilate(1.0 / gy, x)?);
                denom *= gy.powf(spec.beta);
            }
            Ok(phi.eval(dim, &args) / denom)
        }
    }
}

/// Normalized kernel of the dilated form, as a function of the y-gauges only
/// (|x| replaced by 1). Not meaningful for the Hausdorff family.
pub(crate) fn normalized_kernel(family: KernelFamily, m: usize, beta: f64, gauges: &[f64]) -> f64 {
    match family {
        KernelFamily::Hlp => {
            let mut mx = 1.0f64;
            for g in gauges {
                mx = mx.max(g.powf(beta));
            }
            mx.powi(-(m as i32))
        }
        KernelFamily::Hilbert => {
            let mut s = 1.0f64;
            for g in gauges {
                s += g.powf(beta);
            }
            s.powi(-(m as i32))
        }
        KernelFamily::Hausdorff => unreachable!("Hausdorff has no normalized kernel"),
    }
}

/// Monte-Carlo configuration for operator evaluation.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub n_samples: u64,
    /// Truncate every factor's radial integration to (0, R]; required to
    /// evaluate divergent configurations, in which case the result is a
    /// truncated value and flagged as such.
    pub truncation_radius: Option<f64>,
    pub stream: SeededStream,
    /// Per-factor radial importance density; defaults to a kernel-matched
    /// choice per family when absent.
    pub proposal: Option<RadialDensity>,
}

impl QuadratureConfig {
    pub fn new(n_samples: u64, stream: SeededStream) -> Self {
        QuadratureConfig {
            n_samples,
            truncation_radius: None,
            stream,
            proposal: None,
        }
    }

    pub fn with_truncation(mut self, r: f64) -> Self {
        self.truncation_radius = Some(r);
        self
    }
}

/// Result of a Monte-Carlo operator evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalResult {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub truncated: bool,
}

fn default_proposal(
    spec: &KernelSpec,
    dim: &GroupDimension,
    truncation: Option<f64>,
) -> Result<(RadialDensity, bool)> {
    let q = dim.q();
    match spec.family {
        KernelFamily::Hlp | KernelFamily::Hilbert => match truncation {
            Some(r) => {
                if !(r >= 1.0 && r.is_finite()) {
                    return Err(HbmoError::invalid(format!(
                        "truncation radius must be finite and >= 1, got {r}"
                    )));
                }
                Ok((
                    RadialDensity::KernelMatchedTruncated {
                        beta: spec.beta,
                        r_max: r,
                    },
                    true,
                ))
            }
            None => Ok((RadialDensity::KernelMatched { beta: spec.beta }, false)),
        },
        KernelFamily::Hausdorff => {
            let phi = spec.phi.as_ref().expect("validated");
            // Integrand per factor is phi(r) r^{Q-1-beta}; the power-law
            // density with exponent Q - beta matches it exactly, so the
            // radial part of the indicator weight is constant.
            let support = phi.radial_support;
            let (r_max, truncated) = match (support.is_finite(), truncation) {
                (true, _) => (support, false),
                (false, Some(r)) => (r, true),
                (false, None) => (4.0, true),
            };
            Ok((
                RadialDensity::PowerLawTruncated {
                    r_max,
                    exponent: Some(q - spec.beta),
                },
                truncated,
            ))
        }
    }
}

/// Evaluate the operator at x on the function tuple `fs` by Monte Carlo.
///
/// Hardy-Littlewood-Polya and Hilbert use the dilated form: the integrand is
/// `prod_j f_j(delta_{|x|} y_j)` against the normalized kernel, with
/// per-factor radial importance sampling matched to the kernel decay. The
/// Hausdorff family integrates `Phi(y_vec) / prod |y_j|^beta * prod_j
/// f_j(delta_{1/|y_j|} x)`.
pub fn eval_operator(
    spec: &KernelSpec,
    dim: &GroupDimension,
    fs: &[FunctionSpec],
    x: &GroupPoint,
    cfg: &QuadratureConfig,
) -> Result<EvalResult> {
    spec.validate()?;
    if fs.len() != spec.m {
        return Err(HbmoError::invalid(format!(
            "eval_operator: expected {} functions, got {}",
            spec.m,
            fs.len()
        )));
    }
    let gx = dim.gauge_norm(x)?;
    if gx == 0.0 {
        return Err(HbmoError::invalid(
            "eval_operator: x must not be the identity",
        ));
    }
    if let Some(reason) = spec.divergence_reason(dim) {
        let truncation_helps = matches!(spec.family, KernelFamily::Hlp | KernelFamily::Hilbert);
        if !(truncation_helps && cfg.truncation_radius.is_some()) {
            return Err(HbmoError::DivergentIntegral { reason });
        }
    }

    let (density, truncated) = match cfg.proposal {
        Some(d) => (d, cfg.truncation_radius.is_some()),
        None => default_proposal(spec, dim, cfg.truncation_radius)?,
    };

    let m = spec.m;
    let len = dim.coords_len();
    let family = spec.family;
    let beta = spec.beta;
    let phi = spec.phi.clone();

    struct Scratch<'d> {
        sampler: ImportanceSampler<'d>,
        y: Vec<f64>,
        arg: Vec<f64>,
        points: Vec<GroupPoint>,
    }
    let need_joint_phi = matches!(spec.family, KernelFamily::Hausdorff)
        && phi.as_ref().is_some_and(|p| p.per_factor_radial.is_none());
    let stats = accumulate::mc_run_scoped(
        &cfg.stream,
        cfg.n_samples,
        DEFAULT_CHUNK,
        || Scratch {
            sampler: ImportanceSampler::new(dim, density).expect("validated density"),
            y: vec![0.0; len],
            arg: vec![0.0; len],
            points: Vec::with_capacity(m),
        },
        |sc, rng| {
            let mut product = 1.0;
            let mut gauges = [0.0f64; 8];
            let gs = &mut gauges[..m];
            sc.points.clear();
            for (j, g_slot) in gs.iter_mut().enumerate() {
                let (s, w) = sc
                    .sampler
                    .sample_into(rng, &mut sc.y)
                    .expect("sampler is total");
                *g_slot = s;
                match family {
                    KernelFamily::Hlp | KernelFamily::Hilbert => {
                        sc.arg.copy_from_slice(&sc.y);
                        group::dilate_in_place(dim.n(), gx, &mut sc.arg);
                        product *= fs[j].eval_coords(&sc.arg) * w;
                    }
                    KernelFamily::Hausdorff => {
                        sc.arg.copy_from_slice(x.coords());
                        group::dilate_in_place(dim.n(), 1.0 / s, &mut sc.arg);
                        let phi_factor = match &phi.as_ref().expect("validated").per_factor_radial {
                            Some(radial) => radial(s),
                            // Joint (non-factorizing) weights are evaluated
                            // on the full argument tuple after the loop.
                            None => {
                                sc.points
                                    .push(GroupPoint::from_coords_unchecked(sc.y.clone()));
                                1.0
                            }
                        };
                        product *= fs[j].eval_coords(&sc.arg) * phi_factor * s.powf(-beta) * w;
                    }
                }
            }
            match family {
                KernelFamily::Hlp | KernelFamily::Hilbert => {
                    product * normalized_kernel(family, m, beta, gs)
                }
                KernelFamily::Hausdorff => {
                    if need_joint_phi {
                        product *= phi.as_ref().expect("validated").eval(dim, &sc.points);
                    }
                    product
                }
            }
        },
    );

    Ok(EvalResult {
        value: stats.mean(),
        stderr: stats.stderr(),
        n_samples: stats.n,
        truncated,
    })
}

/// Evaluate the defining (direct) integral at x for the Hardy-Littlewood-
/// Polya and Hilbert families, used to cross-check the dilated form on the
/// unit gauge sphere. The per-factor proposal is the kernel-matched density
/// scaled by |x|.
pub fn eval_operator_direct(
    spec: &KernelSpec,
    dim: &GroupDimension,
    fs: &[FunctionSpec],
    x: &GroupPoint,
    cfg: &QuadratureConfig,
) -> Result<EvalResult> {
    spec.validate()?;
    if matches!(spec.family, KernelFamily::Hausdorff) {
        return Err(HbmoError::invalid(
            "eval_operator_direct supports the max- and sum-kernel families only",
        ));
    }
    if fs.len() != spec.m {
        return Err(HbmoError::invalid(format!(
            "eval_operator_direct: expected {} functions, got {}",
            spec.m,
            fs.len()
        )));
    }
    let gx = dim.gauge_norm(x)?;
    if gx == 0.0 {
        return Err(HbmoError::invalid(
            "eval_operator_direct: x must not be the identity",
        ));
    }
    if let Some(reason) = spec.divergence_reason(dim) {
        if cfg.truncation_radius.is_none() {
            return Err(HbmoError::DivergentIntegral { reason });
        }
    }

    // Draw z from the normalized-kernel proposal and set y = delta_{|x|} z;
    // the importance weight for y = |x|^Q * weight(z), and the direct kernel
    // at (x, y) equals |x|^{-beta m} * normalized kernel at the z-gauges.
    let density = match cfg.truncation_radius {
        Some(r) => RadialDensity::KernelMatchedTruncated {
            beta: spec.beta,
            r_max: r,
        },
        None => RadialDensity::KernelMatched { beta: spec.beta },
    };
    let truncated = cfg.truncation_radius.is_some();

    let m = spec.m;
    let len = dim.coords_len();
    let family = spec.family;
    let beta = spec.beta;
    let q = dim.q();

    struct Scratch<'d> {
        sampler: ImportanceSampler<'d>,
        z: Vec<f64>,
        y: Vec<f64>,
    }
    let stats = accumulate::mc_run_scoped(
        &cfg.stream,
        cfg.n_samples,
        DEFAULT_CHUNK,
        || Scratch {
            sampler: ImportanceSampler::new(dim, density).expect("validated density"),
            z: vec![0.0; len],
            y: vec![0.0; len],
        },
        |sc, rng| {
            let mut product = 1.0;
            let mut gauges = [0.0f64; 8];
            let gs = &mut gauges[..m];
            for (j, g_slot) in gs.iter_mut().enumerate() {
                let (s, w) = sc
                    .sampler
                    .sample_into(rng, &mut sc.z)
                    .expect("sampler is total");
                *g_slot = s;
                sc.y.copy_from_slice(&sc.z);
                group::dilate_in_place(dim.n(), gx, &mut sc.y);
                product *= fs[j].eval_coords(&sc.y) * w * gx.powf(q);
            }
            product * normalized_kernel(family, m, beta, gs) * gx.powf(-beta * m as f64)
        },
    );

    Ok(EvalResult {
        value: stats.mean(),
        stderr: stats.stderr(),
        n_samples: stats.n,
        truncated,
    })
}
