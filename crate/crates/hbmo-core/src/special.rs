//! Special functions needed by the closed-form constants.
//!
//! Only the Gamma function is required. It is evaluated with a Lanczos
//! approximation (g = 7, nine coefficients), which delivers better than
//! 1e-13 relative accuracy on the range used by this crate, (0, 50).
//! Keeping the implementation local means the closed forms do not depend on
//! any external special-function library.

use crate::error::{HbmoError, Result};

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma(x) for real x that is not a non-positive integer.
///
/// Uses the reflection formula for x < 0.5 and the Lanczos series otherwise.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(HbmoError::invalid(format!("gamma: non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(HbmoError::invalid(format!(
            "gamma: pole at non-positive integer {x}"
        )));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// Natural log of Gamma(x) for x > 0; avoids overflow for large arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(HbmoError::invalid(format!(
            "ln_gamma: argument must be positive, got {x}"
        )));
    }
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}
