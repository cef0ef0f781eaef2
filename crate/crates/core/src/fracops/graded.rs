//! Weakly singular kernel integrals `∫_0^L v^(nu-1) (delta + v)^gamma dv`.
//!
//! Near `v = 0` the factor `(delta + v)^gamma` is expanded binomially and
//! integrated exactly against `v^(nu-1)`; the rest of the range is split into
//! geometrically growing cells, each far enough from both singular points for
//! 16-point Gauss–Legendre to reach rounding.

use std::sync::OnceLock;

const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // three-term recurrence for P_n and its derivative
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn gauss_cell(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    gauss_legendre().iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// `∫_0^l v^(nu-1) (delta + v)^gamma dv` by the binomial series, `l <= delta / 2`.
fn binomial_part(nu: f64, gamma: f64, delta: f64, l: f64) -> f64 {
    let ratio = l / delta;
    let mut coef = 1.0; // binom(gamma, k) * ratio^k
    let mut sum = 0.0;
    for k in 0..200 {
        let term = coef / (nu + k as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || coef == 0.0 {
            break;
        }
        coef *= (gamma - k as f64) / (k as f64 + 1.0) * ratio;
    }
    delta.powf(gamma) * l.powf(nu) * sum
}

/// `∫_0^L v^(nu-1) (delta + v)^gamma dv` for `nu > 0`, `delta >= 0`.
///
/// Returns `+inf` when `delta = 0` and `nu + gamma <= 0`.
pub(crate) fn kernel_power_integral(nu: f64, gamma: f64, delta: f64, l: f64) -> f64 {
    debug_assert!(nu > 0.0 && delta >= 0.0 && l >= 0.0);
    if l == 0.0 {
        return 0.0;
    }
    if delta == 0.0 {
        let e = nu + gamma;
        return if e > 0.0 { l.powf(e) / e } else { f64::INFINITY };
    }
    let near = l.min(0.5 * delta);
    let mut total = binomial_part(nu, gamma, delta, near);
    let f = |v: f64| v.powf(nu - 1.0) * (delta + v).powf(gamma);
    let mut lo = near;
    while lo < l {
        let hi = (2.0 * lo).min(l);
        total += gauss_cell(f, lo, hi);
        lo = hi;
    }
    total
}
