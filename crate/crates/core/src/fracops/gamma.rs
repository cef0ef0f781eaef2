//! Euler gamma via a Lanczos approximation (g = 7, nine terms).

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
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

/// Lanczos sum and the shifted base for `x >= 1`.
fn lanczos_parts(x: f64) -> (f64, f64) {
    let z = x - 1.0;
    let series = LANCZOS_COEFFS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEFFS[0], |acc, (i, &c)| acc + c / (z + (i + 1) as f64));
    (series, z + LANCZOS_G + 0.5)
}

fn gamma_positive(x: f64) -> f64 {
    // shift small arguments up with Γ(x) = Γ(x + 1) / x
    if x < 1.0 {
        return gamma_positive(x + 1.0) / x;
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x == x.floor() {
        // exact factorials through 22!
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    let (series, t) = lanczos_parts(x);
    // split the power so t^(x-0.5) does not overflow before e^-t shrinks it
    let half = t.powf(0.5 * (x - 0.5));
    (2.0 * PI).sqrt() * series * half * (-t).exp() * half
}

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "gamma is only supported for finite x > 0, got {x}"
        )));
    }
    Ok(gamma_positive(x))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 1.0 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let (series, t) = lanczos_parts(x);
    0.5 * (2.0 * PI).ln() + series.ln() + (x - 0.5) * t.ln() - t
}

/// `1 / Γ(x)` on the whole real line, zero at the poles `0, -1, -2, ...`.
pub fn recip_gamma(x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 / gamma_positive(x);
    }
    if x == x.floor() {
        return 0.0;
    }
    // reflection: 1/Γ(x) = sin(πx) Γ(1 - x) / π
    (PI * x).sin() * gamma_positive(1.0 - x) / PI
}

/// `Γ(x) / Γ(y)` for `x > 0`, robust for large arguments; `y` may be any
/// real, in which case poles of `Γ(y)` give zero.
pub fn gamma_ratio(x: f64, y: f64) -> f64 {
    if x < 150.0 && y < 150.0 {
        return gamma_positive(x) * recip_gamma(y);
    }
    if y > 0.0 {
        (ln_gamma(x) - ln_gamma(y)).exp()
    } else {
        gamma_positive(x) * recip_gamma(y)
    }
}
