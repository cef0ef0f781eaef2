//! Fractional integration by parts, checked numerically.
//!
//! Left form, for the left Caputo derivative:
//!
//! ```text
//! ∫ g · cD_a^α f = ∫ f · D_b^α g + Σ_j [ D_b^(α+j-n) g · f^(n-1-j) ]_a^b
//! ```
//!
//! Right form, for the right Caputo derivative:
//!
//! ```text
//! ∫ g · cD_b^α f = ∫ f · D_a^α g - Σ_j [ D_a^(α+j-n) g · (-1)^(n-1-j) f^(n-1-j) ]_a^b
//! ```
//!
//! A negative boundary order means an RL integral. Only `n ∈ {1, 2}` is
//! supported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{apply, FracOrder, Method, OpKind, OperatorKind, OperatorResult, Side};
use crate::gridfn::{FuncRep, Grid};

/// Which integration-by-parts formula to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbpVariant {
    /// Left Caputo derivative on `f`, plus-signed boundary sum.
    Left,
    /// Right Caputo derivative on `f`, minus-signed boundary sum.
    Right,
}

impl IbpVariant {
    /// Side of the Caputo derivative on `f`.
    fn caputo_side(self) -> Side {
        match self {
            IbpVariant::Left => Side::Left,
            IbpVariant::Right => Side::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct IbpResidual {
    pub variant: IbpVariant,
    pub lhs: f64,
    pub rhs_integral: f64,
    pub boundary_sum: f64,
    pub residual: f64,
    pub grid: Grid,
    pub order: f64,
    /// Nodes where an integrand diverges; handled by one-sided cells.
    pub flagged_nodes: Vec<usize>,
}

/// `D^shift g` with the convention that a negative shift is the RL integral
/// of order `-shift` and a zero shift is `g` itself.
pub fn boundary_operator(shift: f64, g: &FuncRep, grid: &Grid, side: Side) -> Result<OperatorResult> {
    if !(shift > -1.0 && shift <= 1.0) {
        return Err(Error::UnsupportedOrder {
            alpha: shift,
            reason: "boundary orders must lie in (-1, 1]".into(),
        });
    }
    if shift == 0.0 {
        let values = g.sample_on(grid)?;
        let method = match g {
            FuncRep::Closed(_) => Method::Analytic,
            FuncRep::Sampled(_) => Method::Numeric,
        };
        return Ok(OperatorResult::from_values(*grid, values, method, "identity"));
    }
    let (kind, order) = if shift < 0.0 {
        (OpKind::RlIntegral, -shift)
    } else {
        (OpKind::RlDerivative, shift)
    };
    apply(OperatorKind::new(side, kind), FracOrder::new(order)?, g, grid)
}

/// `k`-th classical derivative of `f` at both endpoints.
fn endpoint_derivatives(f: &FuncRep, grid: &Grid, k: usize) -> Result<(f64, f64)> {
    let interval = grid.interval();
    match f {
        FuncRep::Closed(c) => Ok((c.derivative(k, interval.a()), c.derivative(k, interval.b()))),
        FuncRep::Sampled(s) if k == 0 => {
            let v = s.values();
            Ok((v[0], v[v.len() - 1]))
        }
        FuncRep::Sampled(_) => Err(Error::UnsupportedOrder {
            alpha: k as f64,
            reason: "boundary terms need classical derivatives of sampled data".into(),
        }),
    }
}

/// `ζ(s)` for `0 < s < 1`, by Borwein's accelerated alternating series.
fn zeta(s: f64) -> f64 {
    const N: usize = 40;
    let mut d = [0.0; N + 1];
    let mut term = 1.0;
    let mut acc = 1.0;
    d[0] = acc;
    for i in 1..=N {
        let fi = i as f64;
        let fn_ = N as f64;
        term *= (fn_ + fi - 1.0) * 4.0 * (fn_ - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        acc += term;
        d[i] = acc;
    }
    let dn = d[N];
    let mut eta = 0.0;
    for (k, dk) in d.iter().take(N).enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    eta = -eta / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

/// Composite rule for `∫_a^b F` on the grid.
///
/// Simpson when the node count is odd and every value is finite, otherwise
/// trapezoid. A non-finite endpoint value is treated as an integrable
/// `c · w^(-sing)` singularity: its weight is dropped and, when `sing` is in
/// `(0, 1)`, the generalized Euler-Maclaurin term `ζ(sing) c h^(1-sing)`
/// is subtracted with `c` extrapolated from the two nearest nodes.
pub fn outer_integral(values: &[f64], grid: &Grid, sing: Option<f64>) -> Result<f64> {
    let n = values.len();
    let h = grid.h();
    if values[1..n - 1].iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand diverges at an interior node".into()));
    }
    let (first, last) = (values[0].is_finite(), values[n - 1].is_finite());
    if first && last {
        if n % 2 == 1 && n >= 3 {
            let mut s = values[0] + values[n - 1];
            for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            return Ok(s * h / 3.0);
        }
        return Ok(grid.trapezoid_weights().iter().zip(values).map(|(w, v)| w * v).sum());
    }
    if n < 4 {
        return Err(Error::NonFinite("too few nodes around a singular endpoint".into()));
    }
    let mut total = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 {
            if first { 0.5 * h } else { 0.0 }
        } else if i == n - 1 {
            if last { 0.5 * h } else { 0.0 }
        } else {
            h
        };
        if w != 0.0 {
            total += w * v;
        }
    }
    if let Some(s) = sing.filter(|s| *s > 0.0 && *s < 1.0) {
        let correction = |f1: f64, f2: f64| {
            let c = 2.0 * f1 * h.powf(s) - f2 * (2.0 * h).powf(s);
            zeta(s) * c * h.powf(1.0 - s)
        };
        if !first {
            total -= correction(values[1], values[2]);
        }
        if !last {
            total -= correction(values[n - 2], values[n - 3]);
        }
    }
    Ok(total)
}

fn check_order(order: FracOrder) -> Result<()> {
    if order.n() > 2 {
        return Err(Error::UnsupportedOrder {
            alpha: order.alpha(),
            reason: "integration by parts is supported for n = ceil(alpha) <= 2".into(),
        });
    }
    Ok(())
}

/// Evaluates both sides and the boundary sum of the chosen formula.
pub fn check_ibp(variant: IbpVariant, order: FracOrder, f: &FuncRep, g: &FuncRep, grid: &Grid) -> Result<IbpResidual> {
    check_order(order)?;
    let n = order.n();
    let alpha = order.alpha();
    let caputo_side = variant.caputo_side();
    let g_side = caputo_side.mirror();

    let cap = apply(OperatorKind::new(caputo_side, OpKind::Caputo), order, f, grid)?;
    let rl = apply(OperatorKind::new(g_side, OpKind::RlDerivative), order, g, grid)?;
    let f_vals = f.sample_on(grid)?;
    let g_vals = g.sample_on(grid)?;

    let lhs_integrand: Vec<f64> = g_vals.iter().zip(&cap.values).map(|(a, b)| a * b).collect();
    let rhs_integrand: Vec<f64> = f_vals
        .iter()
        .zip(&rl.values)
        .map(|(a, b)| if *a == 0.0 && !b.is_finite() { 0.0 } else { a * b })
        .collect();
    let sing = (alpha < 1.0).then_some(alpha);
    let lhs = outer_integral(&lhs_integrand, grid, sing)?;
    let rhs_integral = outer_integral(&rhs_integrand, grid, sing)?;

    let last = grid.n_points() - 1;
    let mut boundary_sum = 0.0;
    for j in 0..n {
        let shift = alpha + j as f64 - n as f64;
        let k = n - 1 - j;
        let op = boundary_operator(shift, g, grid, g_side)?;
        let (fa, fb) = endpoint_derivatives(f, grid, k)?;
        let sign = match variant {
            IbpVariant::Left => 1.0,
            IbpVariant::Right if k % 2 == 1 => -1.0,
            IbpVariant::Right => 1.0,
        };
        let term = |gv: f64, fv: f64| -> Result<f64> {
            if fv == 0.0 {
                return Ok(0.0);
            }
            if !gv.is_finite() {
                return Err(Error::DivergentBoundary(format!(
                    "D^{shift} g diverges at an endpoint where f^({k}) = {fv}"
                )));
            }
            Ok(sign * gv * fv)
        };
        boundary_sum += term(op.values[last], fb)? - term(op.values[0], fa)?;
    }

    let residual = match variant {
        IbpVariant::Left => lhs - (rhs_integral + boundary_sum),
        IbpVariant::Right => lhs - (rhs_integral - boundary_sum),
    };
    let mut flagged: Vec<usize> = lhs_integrand
        .iter()
        .zip(&rhs_integrand)
        .enumerate()
        .filter(|(_, (a, b))| !a.is_finite() || !b.is_finite())
        .map(|(i, _)| i)
        .collect();
    flagged.dedup();
    Ok(IbpResidual {
        variant,
        lhs,
        rhs_integral,
        boundary_sum,
        residual,
        grid: *grid,
        order: alpha,
        flagged_nodes: flagged,
    })
}

pub fn check_ibp_left(order: FracOrder, f: &FuncRep, g: &FuncRep, grid: &Grid) -> Result<IbpResidual> {
    check_ibp(IbpVariant::Left, order, f, g, grid)
}

pub fn check_ibp_right(order: FracOrder, f: &FuncRep, g: &FuncRep, grid: &Grid) -> Result<IbpResidual> {
    check_ibp(IbpVariant::Right, order, f, g, grid)
}

/// Residuals over a sequence of grids with observed convergence orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct IbpStudy {
    pub variant: IbpVariant,
    pub order: f64,
    pub n_points: Vec<usize>,
    pub residuals: Vec<f64>,
    /// `log(|r_k| / |r_{k+1}|) / log(h_k / h_{k+1})` for consecutive grids.
    pub observed_orders: Vec<f64>,
}

impl IbpStudy {
    pub fn min_order(&self) -> f64 {
        self.observed_orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs [`check_ibp`] on closed-form `f`, `g` for each grid size.
pub fn ibp_study(variant: IbpVariant, order: FracOrder, f: &FuncRep, g: &FuncRep, sizes: &[usize]) -> Result<IbpStudy> {
    let interval = f.interval();
    let mut residuals = Vec::with_capacity(sizes.len());
    let mut steps = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = Grid::new(interval, n)?;
        residuals.push(check_ibp(variant, order, f, g, &grid)?.residual);
        steps.push(grid.h());
    }
    let observed_orders = residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, h)| (r[0].abs() / r[1].abs()).ln() / (h[0] / h[1]).ln())
        .collect();
    Ok(IbpStudy {
        variant,
        order: order.alpha(),
        n_points: sizes.to_vec(),
        residuals,
        observed_orders,
    })
}

/// Grid sizes `lo, 2 lo - 1, ...` up to `hi`, so each grid refines the last.
pub fn doubling_sizes(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = vec![lo];
    let mut n = lo;
    while 2 * n - 1 <= hi {
        n = 2 * n - 1;
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::{Anchor, ClosedFormFn, Interval};

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn closed(f: ClosedFormFn) -> FuncRep {
        FuncRep::closed(f, unit()).unwrap()
    }

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn zeta_values() {
        // ζ(1/2) and ζ(1/4)
        assert!((zeta(0.5) + 1.4603545088095868).abs() < 1e-13);
        assert!((zeta(0.25) + 0.813278405261892).abs() < 1e-13);
    }

    #[test]
    fn boundary_operator_shifts() {
        let g = closed(ClosedFormFn::Const { value: 1.0 });
        let grid = Grid::new(unit(), 5).unwrap();
        let r = boundary_operator(-0.5, &g, &grid, Side::Left).unwrap();
        // I^0.5 1 = 2 sqrt(x / π)
        assert!((r.values[4] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        let r = boundary_operator(0.0, &g, &grid, Side::Left).unwrap();
        assert_eq!(r.values, vec![1.0; 5]);
        let r = boundary_operator(0.5, &g, &grid, Side::Left).unwrap();
        assert!(r.values[0].is_infinite());
        assert!(boundary_operator(-1.5, &g, &grid, Side::Left).is_err());
    }

    #[test]
    fn singular_outer_rule_converges_fast() {
        // ∫_0^1 x^(-1/2) (1 + x) dx = 2 + 2/3
        let want = 2.0 + 2.0 / 3.0;
        let mut errs = Vec::new();
        for n in [65, 129, 257] {
            let grid = Grid::new(unit(), n).unwrap();
            let v: Vec<f64> = grid.nodes().iter().map(|&x| if x == 0.0 { f64::INFINITY } else { x.powf(-0.5) * (1.0 + x) }).collect();
            errs.push((outer_integral(&v, &grid, Some(0.5)).unwrap() - want).abs());
        }
        assert!(errs[2] < 1e-4, "{errs:?}");
        assert!(errs[0] / errs[1] > 2.5 && errs[1] / errs[2] > 2.5, "{errs:?}");
    }

    #[test]
    fn classical_case() {
        let f = closed(ClosedFormFn::Sin { omega: 1.0, phase: 0.0 });
        let g = closed(ClosedFormFn::Cos { omega: 1.0, phase: 0.0 });
        let grid = Grid::new(unit(), 2049).unwrap();
        for v in [IbpVariant::Left, IbpVariant::Right] {
            let r = check_ibp(v, order(1.0), &f, &g, &grid).unwrap();
            assert!(r.residual.abs() < 1e-8, "{v:?} {}", r.residual);
        }
    }

    #[test]
    fn vanishing_boundary_terms() {
        // f = x(1-x) vanishes at both ends
        let f = closed(ClosedFormFn::Poly { coeffs: vec![-1.0, 1.0, 0.0] });
        let g = closed(ClosedFormFn::Exp { rate: 0.7 });
        let grid = Grid::new(unit(), 65).unwrap();
        let r = check_ibp_right(order(0.5), &f, &g, &grid).unwrap();
        assert_eq!(r.boundary_sum, 0.0);
    }

    #[test]
    fn fractional_residual_shrinks() {
        // g(a) != 0, so the left RL derivative of g is singular at a
        let f = closed(ClosedFormFn::Poly { coeffs: vec![1.0, -0.5, 2.0] });
        let g = closed(ClosedFormFn::Poly { coeffs: vec![1.0, 1.0] });
        let study = ibp_study(IbpVariant::Right, order(0.5), &f, &g, &doubling_sizes(65, 257)).unwrap();
        assert!(study.min_order() >= 1.0, "{study:?}");
    }

    #[test]
    fn second_order_boundary_sum() {
        // n = 2 with g vanishing to second order at its anchor
        let f = closed(ClosedFormFn::Poly { coeffs: vec![1.0, -0.5, 2.0] });
        let sizes = doubling_sizes(129, 1025);
        for (variant, anchor) in [(IbpVariant::Right, Anchor::Left), (IbpVariant::Left, Anchor::Right)] {
            let g = closed(ClosedFormFn::Power { beta: 3.0, anchor });
            let study = ibp_study(variant, order(1.5), &f, &g, &sizes).unwrap();
            assert!(study.min_order() >= 1.4, "{study:?}");
            assert!(study.residuals.last().unwrap().abs() < 1e-5, "{study:?}");
        }
    }

    #[test]
    fn doubling_sizes_refine() {
        assert_eq!(doubling_sizes(129, 2049), vec![129, 257, 513, 1025, 2049]);
    }
}
