//! Haar-measure sampling and radial-reduction quadrature.
//!
//! The Haar measure of H^n is Lebesgue measure on R^{2n+1}. Uniform ball
//! samples are drawn by rejection from the bounding box of the unit gauge
//! ball, then dilated and left-translated; for gauge-radial integrands the
//! volume law |B(0,r)| = Omega r^Q yields the one-dimensional reduction
//!
//! ```text
//! int_{H^n} f(|y|) dy = omega * int_0^inf f(r) r^{Q-1} dr,   omega = Q * Omega.
//! ```

use crate::error::{HbmoError, Result};
use crate::group::{self, GroupDimension, GroupPoint};
use crate::quadrature::{self, QuadOptions};
use crate::stream::SeededStream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Iteration cap for rejection loops; exceeding it signals an internal bug
/// (the acceptance probability is bounded below for every n).
const REJECTION_CAP: u64 = 1_000_000;

/// A gauge-radial integrand together with a tail-decay hint.
///
/// `tail_exponent_hint` is the asymptotic decay power kappa such that
/// `eval(r) ~ r^{-kappa}` as r -> infinity; it documents integrability
/// (the reduced integrand needs kappa > Q) and is carried for diagnostics.
/// `breakpoints` marks known kinks (e.g. from max(1, r^beta)) so the
/// quadrature never straddles them.
pub struct RadialProfile {
    pub eval: Box<dyn Fn(f64) -> f64 + Sync>,
    pub tail_exponent_hint: f64,
    pub breakpoints: Vec<f64>,
}

impl RadialProfile {
    pub fn new(eval: impl Fn(f64) -> f64 + Sync + 'static, tail_exponent_hint: f64) -> Self {
        RadialProfile {
            eval: Box::new(eval),
            tail_exponent_hint,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, pts: &[f64]) -> Self {
        self.breakpoints = pts.to_vec();
        self
    }
}

/// Reusable uniform sampler for a gauge ball B(center, r).
///
/// Proposals are drawn uniformly from the box [-1,1]^{2n} x [-1,1], accepted
/// when inside the unit gauge ball, then dilated by r and left-translated by
/// the center. Left translation preserves Lebesgue measure, so the output is
/// uniform on B(center, r).
pub struct BallSampler {
    n: usize,
    center: Option<Vec<f64>>,
    radius: f64,
    pub accepted: u64,
    pub proposals: u64,
    scratch: Vec<f64>,
}

impl BallSampler {
    pub fn new(dim: &GroupDimension, center: &GroupPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(HbmoError::invalid(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        dim.gauge_norm(center)?; // validates the center's length and finiteness
        let center_coords = if center.is_identity() {
            None
        } else {
            Some(center.coords().to_vec())
        };
        Ok(BallSampler {
            n: dim.n(),
            center: center_coords,
            radius,
            accepted: 0,
            proposals: 0,
            scratch: vec![0.0; dim.coords_len()],
        })
    }

    /// Draw one uniform sample into `out` (length 2n+1).
    pub fn sample_into(&mut self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<()> {
        let len = 2 * self.n + 1;
        debug_assert_eq!(out.len(), len);
        for _ in 0..REJECTION_CAP {
            self.proposals += 1;
            let mut horizontal_sq = 0.0;
            for slot in self.scratch.iter_mut().take(2 * self.n) {
                let u = 2.0 * rng.gen::<f64>() - 1.0;
                *slot = u;
                horizontal_sq += u * u;
            }
            let t = 2.0 * rng.gen::<f64>() - 1.0;
            if horizontal_sq * horizontal_sq + t * t < 1.0 {
                self.accepted += 1;
                self.scratch[len - 1] = t;
                group::dilate_in_place(self.n, self.radius, &mut self.scratch);
                match &self.center {
                    None => out.copy_from_slice(&self.scratch),
                    Some(c) => group::multiply_into(self.n, c, &self.scratch, out),
                }
                return Ok(());
            }
        }
        Err(HbmoError::Internal(format!(
            "ball rejection sampler exceeded {REJECTION_CAP} proposals"
        )))
    }

    pub fn sample(&mut self, rng: &mut ChaCha8Rng) -> Result<GroupPoint> {
        let mut out = vec![0.0; 2 * self.n + 1];
        self.sample_into(rng, &mut out)?;
        Ok(GroupPoint::from_coords_unchecked(out))
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Draw a single uniform sample from B(center, r) using `stream`.
pub fn sample_ball_uniform(
    dim: &GroupDimension,
    center: &GroupPoint,
    r: f64,
    stream: &SeededStream,
) -> Result<GroupPoint> {
    let mut sampler = BallSampler::new(dim, center, r)?;
    let mut rng = stream.rng();
    let p = sampler.sample(&mut rng)?;
    debug_assert!(dim.distance(&p, center)? < r * (1.0 + 1e-12));
    Ok(p)
}

/// Gauge-polar factorization y = delta_rho(theta) with rho = |y| and
/// |theta| = 1. Fails on the identity (no direction).
pub fn gauge_polar(dim: &GroupDimension, y: &GroupPoint) -> Result<(f64, GroupPoint)> {
    let rho = dim.gauge_norm(y)?;
    if rho == 0.0 {
        return Err(HbmoError::invalid(
            "gauge_polar: the identity has no polar decomposition",
        ));
    }
    let direction = dim.dilate(1.0 / rho, y)?;
    Ok((rho, direction))
}

/// Evaluate `omega * int_0^inf profile(r) r^{Q-1} dr` by adaptive quadrature:
/// directly on [0, 1] and through the substitution u = 1/r on (1, inf).
/// The caller asserts absolute integrability; divergence detection belongs to
/// the constants layer.
pub fn radial_integral(dim: &GroupDimension, profile: &RadialProfile) -> Result<f64> {
    let q = dim.q();
    let opts = QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_intervals: 8192,
    };

    let inner_breaks: Vec<f64> = profile
        .breakpoints
        .iter()
        .copied()
        .filter(|b| *b > 0.0 && *b < 1.0)
        .collect();
    let head = quadrature::integrate_with_breakpoints(
        |r| (profile.eval)(r) * r.powf(q - 1.0),
        0.0,
        1.0,
        &inner_breaks,
        &opts,
    )?;

    // Tail: int_1^inf g(r) dr = int_0^1 g(1/u) u^{-2} du; with the r^{Q-1}
    // factor this is profile(1/u) * u^{-(Q+1)}.
    let tail_breaks: Vec<f64> = profile
        .breakpoints
        .iter()
        .copied()
        .filter(|b| *b > 1.0)
        .map(|b| 1.0 / b)
        .collect();
    let tail = quadrature::integrate_with_breakpoints(
        |u| (profile.eval)(1.0 / u) * u.powf(-(q + 1.0)),
        0.0,
        1.0,
        &tail_breaks,
        &opts,
    )?;

    Ok(dim.omega_sphere() * (head.value + tail.value))
}

/// Radial importance densities for gauge-polar Monte Carlo.
///
/// Each density is normalized on its support; `sample` inverts the CDF and
/// `pdf` evaluates the density, so the importance weight for the volume
/// element is `omega * r^{Q-1} / pdf(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialDensity {
    /// Density proportional to r^{p-1} on (0, r_max]; p defaults to Q, which
    /// reproduces the radial law of a uniform ball sample.
    PowerLawTruncated { r_max: f64, exponent: Option<f64> },
    /// Density proportional to r^{Q-1-kappa} on [1, inf); requires kappa > Q.
    ParetoTail { kappa: f64 },
    /// Density proportional to r^{Q-1} min(1, r^{-beta}) on (0, inf);
    /// matched to the decay of the normalized operator kernels. Requires
    /// beta > Q.
    KernelMatched { beta: f64 },
    /// The kernel-matched density restricted to (0, r_max]; normalizable for
    /// every beta, which is what truncated divergent runs use.
    KernelMatchedTruncated { beta: f64, r_max: f64 },
}

impl RadialDensity {
    pub(crate) fn validate(&self, q: f64) -> Result<()> {
        match *self {
            RadialDensity::PowerLawTruncated { r_max, exponent } => {
                let p = exponent.unwrap_or(q);
                if !(r_max > 0.0 && r_max.is_finite()) || !(p > 0.0) {
                    return Err(HbmoError::invalid(format!(
                        "power-law-truncated density needs r_max > 0 and exponent > 0 (r_max={r_max}, exponent={p})"
                    )));
                }
            }
            RadialDensity::ParetoTail { kappa } => {
                if !(kappa > q) {
                    return Err(HbmoError::invalid(format!(
                        "pareto-tail density needs kappa > Q = {q}, got {kappa}"
                    )));
                }
            }
            RadialDensity::KernelMatched { beta } => {
                if !(beta > q) {
                    return Err(HbmoError::invalid(format!(
                        "kernel-matched density needs beta > Q = {q}, got {beta}"
                    )));
                }
            }
            RadialDensity::KernelMatchedTruncated { beta, r_max } => {
                if !(r_max >= 1.0 && r_max.is_finite()) || !(beta > 0.0) {
                    return Err(HbmoError::invalid(format!(
                        "truncated kernel-matched density needs r_max >= 1 and beta > 0 (r_max={r_max}, beta={beta})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Normalized density at r (0 outside the support).
    pub fn pdf(&self, q: f64, r: f64) -> f64 {
        match *self {
            RadialDensity::PowerLawTruncated { r_max, exponent } => {
                let p = exponent.unwrap_or(q);
                if r <= 0.0 || r > r_max {
                    0.0
                } else {
                    p * r.powf(p - 1.0) / r_max.powf(p)
                }
            }
            RadialDensity::ParetoTail { kappa } => {
                if r < 1.0 {
                    0.0
                } else {
                    (kappa - q) * r.powf(q - 1.0 - kappa)
                }
            }
            RadialDensity::KernelMatched { beta } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let z = 1.0 / q + 1.0 / (beta - q);
                r.powf(q - 1.0) * r.powf(-beta).min(1.0) / z
            }
            RadialDensity::KernelMatchedTruncated { beta, r_max } => {
                if r <= 0.0 || r > r_max {
                    return 0.0;
                }
                let z = Self::truncated_norm(q, beta, r_max);
                r.powf(q - 1.0) * r.powf(-beta).min(1.0) / z
            }
        }
    }

    /// Normalization constant of the truncated kernel-matched density:
    /// int_0^1 r^{Q-1} dr + int_1^R r^{Q-1-beta} dr.
    fn truncated_norm(q: f64, beta: f64, r_max: f64) -> f64 {
        let p = q - beta;
        let tail = if p.abs() < 1e-12 {
            r_max.ln()
        } else {
            (r_max.powf(p) - 1.0) / p
        };
        1.0 / q + tail
    }

    /// Inverse-CDF sample.
    pub fn sample(&self, q: f64, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            RadialDensity::PowerLawTruncated { r_max, exponent } => {
                let p = exponent.unwrap_or(q);
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                r_max * u.powf(1.0 / p)
            }
            RadialDensity::ParetoTail { kappa } => {
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                u.powf(-1.0 / (kappa - q))
            }
            RadialDensity::KernelMatched { beta } => {
                let z = 1.0 / q + 1.0 / (beta - q);
                let p_head = (1.0 / q) / z;
                let pick: f64 = rng.gen();
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                if pick < p_head {
                    u.powf(1.0 / q)
                } else {
                    u.powf(-1.0 / (beta - q))
                }
            }
            RadialDensity::KernelMatchedTruncated { beta, r_max } => {
                let z = Self::truncated_norm(q, beta, r_max);
                let p_head = (1.0 / q) / z;
                let pick: f64 = rng.gen();
                let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                if pick < p_head {
                    u.powf(1.0 / q)
                } else {
                    let p = q - beta;
                    if p.abs() < 1e-12 {
                        r_max.powf(u)
                    } else {
                        (1.0 + u * (r_max.powf(p) - 1.0)).powf(1.0 / p)
                    }
                }
            }
        }
    }
}

/// Reusable importance sampler producing full group points y = delta_S(Theta)
/// together with the weight `omega * S^{Q-1} / pdf(S)`, so that
/// `E[f(y) * weight]` is an unbiased estimate of `int f dy` over the support.
///
/// Directions Theta come from gauge-polar factorization of a uniform sample
/// of the unit ball — under that law the radius and direction are
/// independent, and the direction carries the cone measure of total mass
/// omega, which the weight accounts for.
pub struct ImportanceSampler<'d> {
    dim: &'d GroupDimension,
    density: RadialDensity,
    ball: BallSampler,
    dir_scratch: Vec<f64>,
}

impl<'d> ImportanceSampler<'d> {
    pub fn new(dim: &'d GroupDimension, density: RadialDensity) -> Result<Self> {
        density.validate(dim.q())?;
        let ball = BallSampler::new(dim, &dim.identity(), 1.0)?;
        Ok(ImportanceSampler {
            dim,
            density,
            ball,
            dir_scratch: vec![0.0; dim.coords_len()],
        })
    }

    /// Draw (y, weight) into `out_coords`; returns (radius, weight).
    pub fn sample_into(&mut self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<(f64, f64)> {
        // Direction from a unit-ball draw. The draw is almost surely not the
        // identity; re-draw on the measure-zero event to stay total.
        loop {
            self.ball.sample_into(rng, &mut self.dir_scratch)?;
            let rho = group::gauge_of_coords(&self.dir_scratch);
            if rho > 0.0 {
                let inv = 1.0 / rho;
                group::dilate_in_place(self.dim.n(), inv, &mut self.dir_scratch);
                break;
            }
        }
        let q = self.dim.q();
        let s = self.density.sample(q, rng);
        out.copy_from_slice(&self.dir_scratch);
        group::dilate_in_place(self.dim.n(), s, out);
        let weight = self.dim.omega_sphere() * s.powf(q - 1.0) / self.density.pdf(q, s);
        Ok((s, weight))
    }
}

/// Single-draw form of the importance sampler (see `ImportanceSampler`).
pub fn sample_radial_importance(
    dim: &GroupDimension,
    density: RadialDensity,
    stream: &SeededStream,
) -> Result<(GroupPoint, f64)> {
    let mut sampler = ImportanceSampler::new(dim, density)?;
    let mut rng = stream.rng();
    let mut out = vec![0.0; dim.coords_len()];
    let (_, w) = sampler.sample_into(&mut rng, &mut out)?;
    Ok((GroupPoint::from_coords_unchecked(out), w))
}
