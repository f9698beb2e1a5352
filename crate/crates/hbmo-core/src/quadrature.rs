//! Adaptive one-dimensional quadrature on finite intervals.
//!
//! The rule is the classical 15-point Gauss-Kronrod pair (7-point Gauss
//! embedded in a 15-point Kronrod extension) with the usual error rescaling,
//! driven by a globally adaptive loop that always bisects the interval with
//! the largest error estimate. Semi-infinite integrals are handled by callers
//! via the substitution u = 1/r (see `sampling::radial_integral`).

use crate::error::{HbmoError, Result};
use std::collections::BinaryHeap;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// Weights of the embedded 7-point Gauss rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_97,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

/// Options controlling the adaptive refinement.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 4096,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_bound: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// One application of the Gauss-Kronrod 7-15 pair on [a, b].
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    // The center is both a Kronrod node and the middle Gauss node.
    let mut result_gauss = f_center * WG[3];
    let mut result_kronrod = f_center * WGK[7];
    let mut result_abs = f_center.abs() * WGK[7];

    // Values at the symmetric node pairs, kept for the resasc computation.
    let mut pair_vals = [[0.0f64; 2]; 7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        pair_vals[i] = [f1, f2];
        result_kronrod += WGK[i] * (f1 + f2);
        result_abs += WGK[i] * (f1.abs() + f2.abs());
        // Odd-indexed Kronrod nodes are the embedded Gauss nodes.
        if i % 2 == 1 {
            result_gauss += WG[i / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * result_kronrod;
    let mut result_asc = WGK[7] * (f_center - mean).abs();
    for i in 0..7 {
        result_asc += WGK[i] * ((pair_vals[i][0] - mean).abs() + (pair_vals[i][1] - mean).abs());
    }

    let value = result_kronrod * half;
    let resabs = result_abs * half.abs();
    let resasc = result_asc * half.abs();
    let mut err = ((result_kronrod - result_gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * resabs;
    if round_off > err {
        err = round_off;
    }

    Segment {
        a,
        b,
        value,
        error: err,
    }
}

/// Adaptive integration of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_with_breakpoints(f, a, b, &[], opts)
}

/// Adaptive integration with caller-supplied interior breakpoints (placed at
/// known kinks of the integrand so the rule never straddles them).
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(HbmoError::invalid(format!(
            "integrate: bad interval [{a}, {b}]"
        )));
    }

    let mut edges: Vec<f64> = vec![a];
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| *p > a && *p < b)
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    edges.extend(pts);
    edges.push(b);

    let mut heap: BinaryHeap<Segment> = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    let mut evals = 0usize;
    for w in edges.windows(2) {
        let seg = gk15(&f, w[0], w[1]);
        evals += 15;
        total_value += seg.value;
        total_error += seg.error;
        heap.push(seg);
    }

    while total_error > opts.abs_tol.max(opts.rel_tol * total_value.abs())
        && heap.len() < opts.max_intervals
    {
        let worst = heap.pop().expect("heap non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval is at floating-point resolution; no further splitting.
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evals += 30;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let result = QuadResult {
        value: total_value,
        error_bound: total_error,
        intervals: heap.len(),
        evaluations: evals,
    };
    if total_error > opts.abs_tol.max(opts.rel_tol * total_value.abs()) {
        return Err(HbmoError::AccuracyFailure {
            estimate: result.value,
            error_bound: result.error_bound,
            context: format!(
                "adaptive quadrature stalled after {} intervals on [{a}, {b}]",
                result.intervals
            ),
        });
    }
    Ok(result)
}
