//! Discretizations on uniform grids.
//!
//! Every scheme is written in anchored coordinates: node values are indexed
//! by their distance `i` (in steps) from the anchor endpoint, and the value
//! at distance `m` is a weighted sum over `i <= m`. Left operators read the
//! samples in grid order and right operators in reverse order, so the right
//! weight matrix is the row/column reversal of the left one by construction.
//!
//! * RL integral: product trapezoid, the kernel integrated exactly against
//!   the piecewise-linear interpolant of the samples.
//! * Caputo, `0 < alpha < 1`: L1 scheme.
//! * RL derivative, `0 < alpha < 1`: L1 plus the anchor-value term.
//! * `alpha = 1`: second-order finite differences.

use super::{gamma, recip_gamma, rl_from_caputo_with, ApplyOptions, FracOrder, Method, OpKind, OperatorKind, OperatorResult, PathChoice, Side};
use crate::error::{Error, Result};
use crate::gridfn::{ClosedForm, FuncRep, Grid};
use crate::par::{map_indices, Exec};

/// `sum_{k >= k0} binom(p, k) x^k` for `|x| <= 1/8`.
fn binomial_tail(p: f64, x: f64, k0: usize) -> f64 {
    let mut term = 1.0;
    for k in 0..k0 {
        term *= (p - k as f64) / (k as f64 + 1.0) * x;
    }
    let mut sum = 0.0;
    let mut k = k0;
    while k < k0 + 200 {
        sum += term;
        if term == 0.0 || term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        term *= (p - k as f64) / (k as f64 + 1.0) * x;
        k += 1;
    }
    sum
}

const SERIES_FROM: usize = 8;

/// `(r+1)^p - 2 r^p + (r-1)^p` for `r >= 1`, without cancellation for large `r`.
fn second_difference(r: usize, p: f64) -> f64 {
    let rf = r as f64;
    if r < SERIES_FROM {
        return (rf + 1.0).powf(p) - 2.0 * rf.powf(p) + (rf - 1.0).powf(p);
    }
    let x = 1.0 / rf;
    rf.powf(p) * (binomial_tail(p, x, 2) + binomial_tail(p, -x, 2))
}

/// `(m-1)^p - (m - p) m^(p-1)` for `m >= 1`.
fn trapezoid_end(m: usize, p: f64) -> f64 {
    let mf = m as f64;
    if m < SERIES_FROM {
        return (mf - 1.0).powf(p) - (mf - p) * mf.powf(p - 1.0);
    }
    mf.powf(p) * binomial_tail(p, -1.0 / mf, 2)
}

/// `m^q - (m-1)^q` for `m >= 1`.
fn first_difference(m: usize, q: f64) -> f64 {
    let mf = m as f64;
    if m < SERIES_FROM {
        return mf.powf(q) - (mf - 1.0).powf(q);
    }
    -mf.powf(q) * binomial_tail(q, -1.0 / mf, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scheme {
    ProductTrapezoid { alpha: f64 },
    L1 { alpha: f64, rl: bool },
    FiniteDifference,
}

impl Scheme {
    fn select(op: OperatorKind, order: FracOrder) -> Result<Self> {
        let alpha = order.alpha();
        match op.kind {
            OpKind::RlIntegral => Ok(Scheme::ProductTrapezoid { alpha }),
            _ if alpha == 1.0 => Ok(Scheme::FiniteDifference),
            _ if alpha < 1.0 => Ok(Scheme::L1 {
                alpha,
                rl: op.kind == OpKind::RlDerivative,
            }),
            _ => Err(Error::UnsupportedOrder {
                alpha,
                reason: "sampled derivatives need 0 < alpha <= 1".into(),
            }),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Scheme::ProductTrapezoid { .. } => "product-trapezoid",
            Scheme::L1 { rl: false, .. } => "l1",
            Scheme::L1 { rl: true, .. } => "l1+anchor",
            Scheme::FiniteDifference => "finite-difference",
        }
    }

    /// Calls `f(i, w)` for every distance index `i` with a weight in the row
    /// for distance `m`. The RL anchor row reports an infinite weight.
    fn visit(self, m: usize, n: usize, h: f64, mut f: impl FnMut(usize, f64)) {
        match self {
            Scheme::ProductTrapezoid { alpha } => {
                if m == 0 {
                    return;
                }
                let s = h.powf(alpha) * recip_gamma(alpha + 2.0);
                let p = alpha + 1.0;
                f(m, s);
                for r in 1..m {
                    f(m - r, s * second_difference(r, p));
                }
                f(0, s * trapezoid_end(m, p));
            }
            Scheme::L1 { alpha, rl } => {
                if m == 0 {
                    if rl {
                        f(0, f64::INFINITY);
                    }
                    return;
                }
                let s = h.powf(-alpha) / gamma(2.0 - alpha).expect("1 < 2 - alpha < 2");
                let q = 1.0 - alpha;
                f(m, s);
                for r in 1..m {
                    f(m - r, s * second_difference(r, q));
                }
                let mut end = -s * first_difference(m, q);
                if rl {
                    end += recip_gamma(q) * (m as f64 * h).powf(-alpha);
                }
                f(0, end);
            }
            Scheme::FiniteDifference => {
                let inv = 1.0 / h;
                if n == 2 {
                    f(0, -inv);
                    f(1, inv);
                } else if m == 0 {
                    f(0, -1.5 * inv);
                    f(1, 2.0 * inv);
                    f(2, -0.5 * inv);
                } else if m == n - 1 {
                    f(m - 2, 0.5 * inv);
                    f(m - 1, -2.0 * inv);
                    f(m, 1.5 * inv);
                } else {
                    f(m - 1, -0.5 * inv);
                    f(m + 1, 0.5 * inv);
                }
            }
        }
    }

    /// Applies the row for distance `m` to anchored samples `g`.
    fn apply_row(self, m: usize, h: f64, g: impl Fn(usize) -> f64, n: usize) -> f64 {
        if let Scheme::L1 { alpha, rl } = self {
            // difference form, so constants are annihilated exactly
            let g0 = g(0);
            if m == 0 {
                return if !rl || g0 == 0.0 { 0.0 } else { f64::INFINITY.copysign(g0) };
            }
            let s = h.powf(-alpha) / gamma(2.0 - alpha).expect("1 < 2 - alpha < 2");
            let q = 1.0 - alpha;
            let mut acc = 0.0;
            for r in 0..m {
                acc += first_difference(r + 1, q) * (g(m - r) - g(m - r - 1));
            }
            acc *= s;
            if rl {
                acc += g0 * recip_gamma(q) * (m as f64 * h).powf(-alpha);
            }
            return acc;
        }
        let mut acc = 0.0;
        self.visit(m, n, h, |i, w| acc += w * g(i));
        acc
    }
}

fn distance_index(side: Side, k: usize, n: usize) -> usize {
    match side {
        Side::Left => k,
        Side::Right => n - 1 - k,
    }
}

fn run(scheme: Scheme, side: Side, values: &[f64], grid: &Grid, exec: Exec) -> Vec<f64> {
    let n = grid.n_points();
    let h = grid.h();
    let g = |i: usize| values[distance_index(side, i, n)];
    map_indices(exec, n, |k| scheme.apply_row(distance_index(side, k, n), h, g, n))
}

/// Dense quadrature/difference weights: `values = W * samples`.
///
/// The RL derivative row at the anchor carries an infinite weight on the
/// anchor sample, marking the divergence of that operator at its endpoint.
pub fn weight_matrix(op: OperatorKind, order: FracOrder, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let scheme = Scheme::select(op, order)?;
    let n = grid.n_points();
    let h = grid.h();
    Ok((0..n)
        .map(|k| {
            let mut row = vec![0.0; n];
            scheme.visit(distance_index(op.side, k, n), n, h, |i, w| {
                row[distance_index(op.side, i, n)] += w;
            });
            row
        })
        .collect())
}

/// Numeric path for sampled data.
pub(crate) fn apply_samples(op: OperatorKind, order: FracOrder, values: &[f64], grid: &Grid, exec: Exec) -> Result<OperatorResult> {
    let scheme = Scheme::select(op, order)?;
    let out = run(scheme, op.side, values, grid, exec);
    Ok(OperatorResult::from_values(*grid, out, Method::Numeric, scheme.name()))
}

/// Numeric path for closed-form data, using exact derivatives where the
/// scheme needs them.
pub(crate) fn apply_closed(op: OperatorKind, order: FracOrder, c: &ClosedForm, grid: &Grid, exec: Exec) -> Result<OperatorResult> {
    let alpha = order.alpha();
    let n = order.n();
    if order.is_integer() && op.kind != OpKind::RlIntegral {
        let sign = if op.side == Side::Right && n % 2 == 1 { -1.0 } else { 1.0 };
        let values = map_indices(exec, grid.n_points(), |i| sign * c.derivative(n, grid.node(i)));
        return Ok(OperatorResult::from_values(*grid, values, Method::Numeric, "classical-derivative"));
    }
    match op.kind {
        OpKind::RlIntegral => {
            let samples = c.sample(grid);
            apply_samples(op, order, &samples, grid, exec)
        }
        OpKind::Caputo => {
            // derivative with respect to the distance from the anchor
            let sign = if op.side == Side::Right && n % 2 == 1 { -1.0 } else { 1.0 };
            let deriv = map_indices(exec, grid.n_points(), |i| sign * c.derivative(n, grid.node(i)));
            if deriv.iter().all(|v| v.is_finite()) {
                let scheme = Scheme::ProductTrapezoid { alpha: n as f64 - alpha };
                let out = run(scheme, op.side, &deriv, grid, exec);
                return Ok(OperatorResult::from_values(*grid, out, Method::Numeric, "product-trapezoid(derivative)"));
            }
            if n == 1 {
                let samples = c.sample(grid);
                return apply_samples(op, order, &samples, grid, exec);
            }
            Err(Error::NotSmooth(format!(
                "derivative of order {n} is not finite at every node"
            )))
        }
        OpKind::RlDerivative => {
            let opts = ApplyOptions {
                path: PathChoice::Numeric,
                exec,
            };
            rl_from_caputo_with(order, &FuncRep::Closed(c.clone()), op.side, grid, &opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::{ClosedFormFn, Interval};

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn stable_differences_match_direct_formulas() {
        for p in [0.3, 1.25, 1.5, 2.0, 2.9] {
            for r in [8usize, 9, 20, 100] {
                let rf = r as f64;
                let direct = (rf + 1.0).powf(p) - 2.0 * rf.powf(p) + (rf - 1.0).powf(p);
                assert!((second_difference(r, p) - direct).abs() < 1e-9 * direct.abs().max(1e-3));
                let end = (rf - 1.0).powf(p) - (rf - p) * rf.powf(p - 1.0);
                assert!((trapezoid_end(r, p) - end).abs() < 1e-9 * end.abs().max(1e-3));
                let first = rf.powf(p) - (rf - 1.0).powf(p);
                assert!((first_difference(r, p) - first).abs() < 1e-11 * first.abs());
            }
        }
    }

    #[test]
    fn product_trapezoid_is_exact_for_linear_data() {
        let grid = Grid::on(0.0, 2.0, 33).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + 3.0 * x).collect();
        for alpha in [0.3, 1.0, 1.7, 3.0] {
            let op = OperatorKind::new(Side::Left, OpKind::RlIntegral);
            let r = apply_samples(op, order(alpha), &f, &grid, Exec::Sequential).unwrap();
            for (k, x) in grid.nodes().iter().enumerate() {
                let want = x.powf(alpha) / gamma(alpha + 1.0).unwrap() + 3.0 * x.powf(alpha + 1.0) / gamma(alpha + 2.0).unwrap();
                assert!((r.values[k] - want).abs() < 1e-12 * want.max(1.0), "alpha={alpha} k={k}");
            }
        }
    }

    #[test]
    fn l1_is_exact_for_linear_data() {
        let grid = Grid::on(-1.0, 1.0, 41).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|x| 2.0 - 0.5 * x).collect();
        let alpha = 0.6;
        let r = apply_samples(OperatorKind::new(Side::Right, OpKind::Caputo), order(alpha), &f, &grid, Exec::Sequential).unwrap();
        for (k, x) in grid.nodes().iter().enumerate() {
            // right Caputo of -0.5 x: 0.5 (1 - x)^(1-alpha) / Γ(2 - alpha)
            let want = 0.5 * (1.0 - x).powf(1.0 - alpha) / gamma(2.0 - alpha).unwrap();
            assert!((r.values[k] - want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn weight_matrices_are_mirror_images() {
        let grid = Grid::on(0.0, 1.0, 17).unwrap();
        for kind in [OpKind::RlIntegral, OpKind::Caputo, OpKind::RlDerivative] {
            for alpha in [0.4, 1.0] {
                let l = weight_matrix(OperatorKind::new(Side::Left, kind), order(alpha), &grid).unwrap();
                let r = weight_matrix(OperatorKind::new(Side::Right, kind), order(alpha), &grid).unwrap();
                for k in 0..17 {
                    for j in 0..17 {
                        assert_eq!(r[k][j].to_bits(), l[16 - k][16 - j].to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_and_apply_agree() {
        let grid = Grid::on(0.0, 1.0, 12).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|x| (3.0 * x).sin() + 0.2).collect();
        for op in OperatorKind::ALL {
            let w = weight_matrix(op, order(0.55), &grid).unwrap();
            let r = apply_samples(op, order(0.55), &f, &grid, Exec::Sequential).unwrap();
            for k in 0..12 {
                if r.is_flagged(k) {
                    continue;
                }
                let via: f64 = w[k].iter().zip(&f).map(|(a, b)| a * b).sum();
                assert!((via - r.values[k]).abs() < 1e-13 * via.abs().max(1.0));
            }
        }
    }

    #[test]
    fn finite_differences_are_second_order_exact_on_quadratics() {
        let grid = Grid::on(0.0, 1.0, 9).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|x| x * x).collect();
        let left = apply_samples(OperatorKind::new(Side::Left, OpKind::Caputo), order(1.0), &f, &grid, Exec::Sequential).unwrap();
        let right = apply_samples(OperatorKind::new(Side::Right, OpKind::Caputo), order(1.0), &f, &grid, Exec::Sequential).unwrap();
        for (k, x) in grid.nodes().iter().enumerate() {
            assert!((left.values[k] - 2.0 * x).abs() < 1e-12);
            assert!((right.values[k] + 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_numeric_caputo_falls_back_to_l1_for_rough_powers() {
        let interval = Interval::new(0.0, 1.0).unwrap();
        let c = ClosedForm::new(ClosedFormFn::Power { beta: 0.5, anchor: crate::gridfn::Anchor::Left }, interval).unwrap();
        let grid = Grid::new(interval, 65).unwrap();
        let r = apply_closed(OperatorKind::new(Side::Left, OpKind::Caputo), order(0.3), &c, &grid, Exec::Sequential).unwrap();
        assert_eq!(r.scheme, "l1");
        let r = apply_closed(OperatorKind::new(Side::Right, OpKind::Caputo), order(0.3), &c, &grid, Exec::Sequential).unwrap();
        assert_eq!(r.scheme, "l1");
    }
}
