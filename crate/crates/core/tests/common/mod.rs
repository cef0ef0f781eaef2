//! Test-side oracles, written independently of the library's evaluation paths.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use fracdual::{Anchor, ClosedFormFn, FuncRep, Grid, Interval};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Tanh-sinh quadrature of `∫_a^b f`, where the integrand receives
/// `(t, t - a, b - t)` with both distances accurate near the endpoints.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // contribution of +-u, scaled by the step later
    let pair = |u: f64| -> Option<f64> {
        let v = FRAC_PI_2 * u.sinh();
        let cv = v.cosh();
        let w = FRAC_PI_2 * u.cosh() / (cv * cv);
        // 1 - tanh(v) without cancellation
        let small = half * 2.0 / ((2.0 * v).exp() + 1.0);
        if !(w > 1e-300) || small == 0.0 {
            return None;
        }
        let big = 2.0 * half - small;
        let right = f(mid + (half - small), big, small);
        let left = f(mid - (half - small), small, big);
        Some(w * (left + right))
    };
    let center = FRAC_PI_2 * f(mid, half, half);
    let tail = |start: f64, step: f64| {
        let mut s = 0.0;
        let mut u = start;
        while let Some(v) = pair(u) {
            s += v;
            u += step;
        }
        s
    };
    let mut h = 1.0;
    let mut sum = center + tail(1.0, 1.0);
    let mut estimate = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        sum += tail(h, 2.0 * h);
        let next = half * h * sum;
        let done = (next - estimate).abs() <= 1e-15 * next.abs().max(1e-300);
        estimate = next;
        if done && h < 0.1 {
            break;
        }
    }
    estimate
}

/// `f^(k)` for the closed-form families, given `t` and its distances to the
/// interval endpoints.
pub fn family_derivative(func: &ClosedFormFn, k: usize, t: f64, ta: f64, tb: f64) -> f64 {
    let ff = |beta: f64| (0..k).fold(1.0, |acc, i| acc * (beta - i as f64));
    match func {
        ClosedFormFn::Const { value } => {
            if k == 0 {
                *value
            } else {
                0.0
            }
        }
        ClosedFormFn::Power { beta, anchor } => {
            let c = ff(*beta);
            if c == 0.0 {
                return 0.0;
            }
            match anchor {
                Anchor::Left => c * ta.powf(beta - k as f64),
                Anchor::Right => (-1f64).powi(k as i32) * c * tb.powf(beta - k as f64),
            }
        }
        ClosedFormFn::Poly { coeffs } => {
            let deg = coeffs.len() - 1;
            let mut s = 0.0;
            for (i, c) in coeffs.iter().enumerate() {
                let p = deg - i;
                if p >= k {
                    let fall = (0..k).fold(1.0, |acc, j| acc * (p - j) as f64);
                    s += c * fall * t.powi((p - k) as i32);
                }
            }
            s
        }
        ClosedFormFn::Exp { rate } => rate.powi(k as i32) * (rate * t).exp(),
        ClosedFormFn::Sin { omega, phase } => omega.powi(k as i32) * (omega * t + phase + k as f64 * FRAC_PI_2).sin(),
        ClosedFormFn::Cos { omega, phase } => omega.powi(k as i32) * (omega * t + phase + k as f64 * FRAC_PI_2).cos(),
    }
}

/// `(1/Γ(nu)) ∫ |x - t|^(nu-1) g(t) dt` over `[a, x]` (left) or `[x, b]` (right),
/// where `g` receives `(t, t - a, b - t)`.
pub fn kernel_integral(left: bool, nu: f64, g: &dyn Fn(f64, f64, f64) -> f64, a: f64, b: f64, x: f64) -> f64 {
    if left {
        if x == a {
            return 0.0;
        }
        let bx = b - x;
        tanh_sinh(|t, da, db| db.powf(nu - 1.0) * g(t, da, bx + db), a, x) / gamma(nu)
    } else {
        if x == b {
            return 0.0;
        }
        let xa = x - a;
        tanh_sinh(|t, da, db| da.powf(nu - 1.0) * g(t, xa + da, db), x, b) / gamma(nu)
    }
}

pub fn integral_oracle(left: bool, alpha: f64, func: &ClosedFormFn, a: f64, b: f64, x: f64) -> f64 {
    kernel_integral(left, alpha, &|t, ta, tb| family_derivative(func, 0, t, ta, tb), a, b, x)
}

pub fn caputo_oracle(left: bool, alpha: f64, func: &ClosedFormFn, a: f64, b: f64, x: f64) -> f64 {
    let n = alpha.ceil() as usize;
    let sign = if !left && n % 2 == 1 { -1.0 } else { 1.0 };
    sign * kernel_integral(left, n as f64 - alpha, &|t, ta, tb| family_derivative(func, n, t, ta, tb), a, b, x)
}

/// RL derivative for `0 < alpha < 1` by Richardson-extrapolated central
/// differences of the order `1 - alpha` integral; `x` must be interior.
pub fn rl_derivative_oracle(left: bool, alpha: f64, func: &ClosedFormFn, a: f64, b: f64, x: f64) -> f64 {
    let i = |y: f64| integral_oracle(left, 1.0 - alpha, func, a, b, y);
    let room = (x - a).min(b - x);
    let h = (2e-3f64).min(0.25 * room);
    let d = |h: f64| (i(x + h) - i(x - h)) / (2.0 * h);
    let r1 = (4.0 * d(h / 2.0) - d(h)) / 3.0;
    let r2 = (4.0 * d(h / 4.0) - d(h / 2.0)) / 3.0;
    let v = (16.0 * r2 - r1) / 15.0;
    if left {
        v
    } else {
        -v
    }
}

pub fn closed(spec: &str, a: f64, b: f64) -> FuncRep {
    let f = fracdual::parse_funcspec(spec).unwrap();
    FuncRep::closed(f, Interval::new(a, b).unwrap()).unwrap()
}

pub fn grid(a: f64, b: f64, n: usize) -> Grid {
    Grid::on(a, b, n).unwrap()
}

/// Observed order between two errors at steps `h1 > h2`.
pub fn observed_order(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1.abs() / e2.abs()).ln() / (h1 / h2).ln()
}
