//! Closed-form evaluation of the operators.
//!
//! A left operator at `x` only sees `f` through `g(w) = f(a + w)`, and a
//! right operator through `g(w) = f(b - w)`, both at distance `D` from the
//! anchor endpoint. Each family is rewritten in that anchored variable:
//!
//! * constants, anchor-matched powers and polynomials become finite sums of
//!   `c * w^gamma`, handled term by term with the power rule;
//! * `exp`, `sin` and `cos` become their Taylor series in `w`, summed
//!   term by term with the power rule until the tail drops below rounding;
//! * a power anchored at the opposite endpoint becomes `(span - w)^beta`,
//!   whose kernel integral is evaluated by [`super::graded`].
//!
//! Integer orders use classical derivatives for the derivative kinds and the
//! same power rule (Cauchy's repeated-integral formula) for integrals.

use super::graded::kernel_power_integral;
use super::{gamma, gamma_ratio, recip_gamma, FracOrder, Method, OpKind, OperatorKind, OperatorResult, Side};
use crate::error::{Error, Result};
use crate::gridfn::{falling_factorial, trig_phase_derivative, Anchor, ClosedForm, ClosedFormFn, Grid};
use crate::par::{map_indices, Exec};

/// `f` rewritten in the distance `w` from the anchor endpoint.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Frame {
    /// `sum c * w^gamma`
    Powers(Vec<(f64, f64)>),
    /// `scale * exp(rate * w)`
    Exp { scale: f64, rate: f64 },
    /// `sin(theta + omega * w)`, or `cos(...)` when `cosine`
    Trig { omega: f64, theta: f64, cosine: bool },
    /// `coef * (span - w)^beta`
    FarPower { coef: f64, beta: f64, span: f64 },
}

/// Taylor coefficients `p^(k)(x0) / k!` of a highest-first polynomial.
fn taylor_shift(coeffs: &[f64], x0: f64) -> Vec<f64> {
    let mut a = coeffs.to_vec();
    let deg = a.len() - 1;
    let mut out = Vec::with_capacity(deg + 1);
    for k in 0..=deg {
        let m = deg - k;
        for i in 1..=m {
            a[i] += a[i - 1] * x0;
        }
        out.push(a[m]);
    }
    out
}

impl Frame {
    pub(crate) fn new(c: &ClosedForm, side: Side) -> Self {
        let (a, b) = (c.interval.a(), c.interval.b());
        let anchor = match side {
            Side::Left => a,
            Side::Right => b,
        };
        // d/dw = +d/dx on the left, -d/dx on the right
        let dir = match side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        };
        match &c.func {
            ClosedFormFn::Const { value } => Frame::Powers(vec![(*value, 0.0)]),
            ClosedFormFn::Power { beta, anchor: which } => {
                let matched = matches!((which, side), (Anchor::Left, Side::Left) | (Anchor::Right, Side::Right));
                if matched {
                    Frame::Powers(vec![(1.0, *beta)])
                } else {
                    Frame::FarPower {
                        coef: 1.0,
                        beta: *beta,
                        span: c.interval.len(),
                    }
                }
            }
            ClosedFormFn::Poly { coeffs } => Frame::Powers(
                taylor_shift(coeffs, anchor)
                    .into_iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let sign = if dir < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                        (sign * t, k as f64)
                    })
                    .collect(),
            ),
            ClosedFormFn::Exp { rate } => Frame::Exp {
                scale: (rate * anchor).exp(),
                rate: dir * rate,
            },
            ClosedFormFn::Sin { omega, phase } => Frame::Trig {
                omega: dir * omega,
                theta: omega * anchor + phase,
                cosine: false,
            },
            ClosedFormFn::Cos { omega, phase } => Frame::Trig {
                omega: dir * omega,
                theta: omega * anchor + phase,
                cosine: true,
            },
        }
    }

    /// Rejects Caputo orders whose `n`-th derivative is not integrable.
    fn check_caputo(&self, n: usize) -> Result<()> {
        match self {
            Frame::Powers(terms) => {
                for &(c, g) in terms {
                    let vanishes = g >= 0.0 && g == g.round() && (g as usize) < n;
                    if c != 0.0 && !vanishes && g <= n as f64 - 1.0 {
                        return Err(Error::NotSmooth(format!(
                            "w^{g} has a non-integrable derivative of order {n}"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Which left-sided operator to evaluate in the anchored frame.
#[derive(Debug, Clone, Copy)]
enum FrameOp {
    Integral { alpha: f64 },
    RlDerivative { alpha: f64, n: usize },
    Caputo { alpha: f64, n: usize },
}

impl FrameOp {
    /// Power shift: `w^gamma -> w^(gamma + mu)`.
    fn mu(self) -> f64 {
        match self {
            FrameOp::Integral { alpha } => alpha,
            FrameOp::RlDerivative { alpha, .. } | FrameOp::Caputo { alpha, .. } => -alpha,
        }
    }

    /// First Taylor index that contributes.
    fn first_index(self) -> usize {
        match self {
            FrameOp::Caputo { n, .. } => n,
            _ => 0,
        }
    }
}

/// `c * Γ(gamma + 1) / Γ(gamma + 1 + mu) * d^(gamma + mu)`, with the `d = 0` limit.
fn power_term(c: f64, gamma_exp: f64, mu: f64, d: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let k = c * gamma_ratio(gamma_exp + 1.0, gamma_exp + 1.0 + mu);
    if k == 0.0 {
        return 0.0;
    }
    let e = gamma_exp + mu;
    if d == 0.0 {
        return if e > 0.0 {
            0.0
        } else if e == 0.0 {
            k
        } else {
            f64::INFINITY.copysign(k)
        };
    }
    k * d.powf(e)
}

const SERIES_MAX_TERMS: usize = 4000;

/// Power-rule sum of a Taylor series whose `k`-th coefficient is
/// `coef(k) * x^k / k!`.
fn series_sum(coef: impl Fn(usize) -> f64, x: f64, cmax: f64, op: FrameOp, d: f64) -> f64 {
    let mu = op.mu();
    let k0 = op.first_index();
    if d == 0.0 {
        return match op {
            FrameOp::RlDerivative { alpha, .. } => {
                // lowest nonvanishing term decides; all k < alpha diverge
                let mut k = 0;
                while (k as f64) < alpha {
                    let w = coef(k) * x.powi(k as i32) * recip_gamma(k as f64 + 1.0 + mu);
                    if w != 0.0 {
                        return f64::INFINITY.copysign(w);
                    }
                    k += 1;
                }
                0.0
            }
            _ => 0.0,
        };
    }
    let xd = x * d;
    // P_k = (x d)^k d^mu / Γ(k + 1 + mu)
    let mut p = xd.powi(k0 as i32) * d.powf(mu) * recip_gamma(k0 as f64 + 1.0 + mu);
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += coef(k) * p;
        k += 1;
        if k > SERIES_MAX_TERMS {
            break;
        }
        p *= xd / (k as f64 + mu);
        let small = (p * cmax).abs() <= 1e-17 * sum.abs() || (p * cmax).abs() < 1e-300;
        if small && k as f64 > xd.abs() && k > k0 + 2 {
            break;
        }
    }
    sum
}

fn eval_frame(frame: &Frame, op: FrameOp, d: f64, delta: f64) -> f64 {
    let mu = op.mu();
    match frame {
        Frame::Powers(terms) => terms
            .iter()
            .filter(|&&(_, g)| match op {
                FrameOp::Caputo { n, .. } => !(g >= 0.0 && g == g.round() && (g as usize) < n),
                _ => true,
            })
            .map(|&(c, g)| power_term(c, g, mu, d))
            .sum(),
        Frame::Exp { scale, rate } => series_sum(|_| *scale, *rate, scale.abs(), op, d),
        Frame::Trig { omega, theta, cosine } => {
            let pattern: [f64; 4] = std::array::from_fn(|k| trig_phase_derivative(*theta, k, *cosine));
            series_sum(|k| pattern[k % 4], *omega, 1.0, op, d)
        }
        Frame::FarPower { coef, beta, span } => far_power(*coef, *beta, *span, op, d, delta),
    }
}

/// Operators on `coef * (span - w)^beta` at distance `d`, with `delta = span - d`.
fn far_power(coef: f64, beta: f64, span: f64, op: FrameOp, d: f64, delta: f64) -> f64 {
    // k-th w-derivative at w is coef (-1)^k ff(beta, k) (span - w)^(beta - k)
    let deriv_coef = |k: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coef * sign * falling_factorial(beta, k)
    };
    let caputo = |alpha: f64, n: usize| {
        let c = deriv_coef(n);
        if c == 0.0 {
            return 0.0;
        }
        let nu = n as f64 - alpha;
        c * kernel_power_integral(nu, beta - n as f64, delta, d) / gamma_unchecked(nu)
    };
    match op {
        FrameOp::Integral { alpha } => coef * kernel_power_integral(alpha, beta, delta, d) / gamma_unchecked(alpha),
        FrameOp::Caputo { alpha, n } => caputo(alpha, n),
        FrameOp::RlDerivative { alpha, n } => {
            let mut v = caputo(alpha, n);
            for k in 0..n {
                let c = deriv_coef(k) * span.powf(beta - k as f64) * recip_gamma(k as f64 - alpha + 1.0);
                if c == 0.0 {
                    continue;
                }
                v += if d == 0.0 {
                    f64::INFINITY.copysign(c)
                } else {
                    c * d.powf(k as f64 - alpha)
                };
            }
            v
        }
    }
}

fn gamma_unchecked(x: f64) -> f64 {
    gamma(x).expect("positive gamma argument")
}

/// Evaluates `op` on a closed-form function at every node of `grid`.
pub(crate) fn apply(op: OperatorKind, order: FracOrder, c: &ClosedForm, grid: &Grid, exec: Exec) -> Result<OperatorResult> {
    let alpha = order.alpha();
    let n = order.n();
    let interval = grid.interval();
    let (a, b) = (interval.a(), interval.b());

    if order.is_integer() && op.kind != OpKind::RlIntegral {
        let sign = if op.side == Side::Right && n % 2 == 1 { -1.0 } else { 1.0 };
        let values = map_indices(exec, grid.n_points(), |i| sign * c.derivative(n, grid.node(i)));
        return Ok(OperatorResult::from_values(*grid, values, Method::Analytic, "classical-derivative"));
    }

    let frame = Frame::new(c, op.side);
    let frame_op = match op.kind {
        OpKind::RlIntegral => FrameOp::Integral { alpha },
        OpKind::RlDerivative => FrameOp::RlDerivative { alpha, n },
        OpKind::Caputo => {
            frame.check_caputo(n)?;
            FrameOp::Caputo { alpha, n }
        }
    };
    let scheme = match (&frame, order.is_integer()) {
        (_, true) => "cauchy-power-rule",
        (Frame::Powers(_), false) => "power-rule",
        (Frame::Exp { .. } | Frame::Trig { .. }, false) => "power-rule-series",
        (Frame::FarPower { .. }, false) => "graded-gauss",
    };
    let values = map_indices(exec, grid.n_points(), |i| {
        let x = grid.node(i);
        let (d, delta) = match op.side {
            Side::Left => (x - a, b - x),
            Side::Right => (b - x, x - a),
        };
        eval_frame(&frame, frame_op, d, delta)
    });
    Ok(OperatorResult::from_values(*grid, values, Method::Analytic, scheme))
}

#[cfg(test)]
fn frame_value(frame: &Frame, w: f64) -> f64 {
    match frame {
        Frame::Powers(terms) => terms.iter().map(|&(c, g)| c * w.powf(g)).sum(),
        Frame::Exp { scale, rate } => scale * (rate * w).exp(),
        Frame::Trig { omega, theta, cosine } => {
            if *cosine {
                (theta + omega * w).cos()
            } else {
                (theta + omega * w).sin()
            }
        }
        Frame::FarPower { coef, beta, span } => coef * (span - w).powf(*beta),
    }
}
