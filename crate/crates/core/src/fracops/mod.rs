//! The six fractional operators: left/right Riemann–Liouville integrals,
//! Riemann–Liouville derivatives and Caputo derivatives.
//!
//! Closed-form inputs go through [`analytic`], which reduces every operator
//! to a sum of power-rule terms in the distance from the operator's anchor
//! endpoint. Sampled inputs go through [`numeric`] (product trapezoid for
//! integrals, L1 for Caputo, Caputo plus boundary correction for RL
//! derivatives). Right-sided operators are evaluated natively in both paths,
//! never by reflecting a left-sided computation.

pub mod analytic;
mod gamma;
mod graded;
pub mod numeric;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::{ClosedForm, FuncRep, Grid, SampledFn};
use crate::par::Exec;

pub use gamma::{gamma, gamma_ratio, ln_gamma, recip_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn mirror(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    RlIntegral,
    RlDerivative,
    Caputo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorKind {
    pub side: Side,
    pub kind: OpKind,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::new(Side::Left, OpKind::RlIntegral),
        OperatorKind::new(Side::Right, OpKind::RlIntegral),
        OperatorKind::new(Side::Left, OpKind::RlDerivative),
        OperatorKind::new(Side::Right, OpKind::RlDerivative),
        OperatorKind::new(Side::Left, OpKind::Caputo),
        OperatorKind::new(Side::Right, OpKind::Caputo),
    ];

    pub const fn new(side: Side, kind: OpKind) -> Self {
        Self { side, kind }
    }

    /// Same operator on the other side.
    pub fn mirror(self) -> Self {
        Self::new(self.side.mirror(), self.kind)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let kind = match self.kind {
            OpKind::RlIntegral => "rl-integral",
            OpKind::RlDerivative => "rl-derivative",
            OpKind::Caputo => "caputo",
        };
        write!(f, "{side}-{kind}")
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|op| op.to_string() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown operator '{s}' (expected {{left,right}}-{{rl-integral,rl-derivative,caputo}})"
                ))
            })
    }
}

/// Order `alpha > 0` together with `n = ceil(alpha)`, so `n - 1 < alpha <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    alpha: f64,
    n: usize,
}

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("order must be finite and > 0, got {alpha}")));
        }
        if alpha > 64.0 {
            return Err(Error::UnsupportedOrder {
                alpha,
                reason: "orders above 64 are not supported".into(),
            });
        }
        Ok(Self {
            alpha,
            n: alpha.ceil() as usize,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_integer(&self) -> bool {
        self.alpha == self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Numeric,
}

/// Operator values at every node of a grid.
///
/// Nodes where the operator genuinely diverges hold `±inf` and are listed in
/// `flagged`; every other value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub flagged: Vec<usize>,
    pub method: Method,
    pub scheme: String,
}

impl OperatorResult {
    pub(crate) fn from_values(grid: Grid, values: Vec<f64>, method: Method, scheme: impl Into<String>) -> Self {
        let flagged = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| i)
            .collect();
        Self {
            grid,
            values,
            flagged,
            method,
            scheme: scheme.into(),
        }
    }

    pub fn is_flagged(&self, i: usize) -> bool {
        self.flagged.binary_search(&i).is_ok()
    }

    /// Converts to a sampled function; fails if any node is flagged.
    pub fn to_sampled(&self) -> Result<SampledFn> {
        SampledFn::new(self.grid, self.values.clone())
    }
}

/// Which evaluation path to take for closed-form inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// Analytic for closed-form functions, numeric for samples.
    #[default]
    Auto,
    /// Discretization schemes even when a closed form is available.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ApplyOptions {
    pub path: PathChoice,
    pub exec: Exec,
}

impl ApplyOptions {
    pub fn numeric() -> Self {
        Self {
            path: PathChoice::Numeric,
            ..Self::default()
        }
    }
}

fn check_grid(f: &FuncRep, grid: &Grid) -> Result<()> {
    match f {
        FuncRep::Closed(c) if c.interval == grid.interval() => Ok(()),
        FuncRep::Sampled(s) if s.grid() == grid => Ok(()),
        _ => Err(Error::GridMismatch),
    }
}

fn check_derivative_order(op: OperatorKind, order: FracOrder) -> Result<()> {
    if op.kind != OpKind::RlIntegral && order.alpha() > 2.0 {
        return Err(Error::UnsupportedOrder {
            alpha: order.alpha(),
            reason: "derivatives are supported for 0 < alpha <= 2".into(),
        });
    }
    Ok(())
}

pub fn apply(op: OperatorKind, order: FracOrder, f: &FuncRep, grid: &Grid) -> Result<OperatorResult> {
    apply_with(op, order, f, grid, &ApplyOptions::default())
}

/// Applies `op` of the given order to `f` at every node of `grid`.
pub fn apply_with(
    op: OperatorKind,
    order: FracOrder,
    f: &FuncRep,
    grid: &Grid,
    opts: &ApplyOptions,
) -> Result<OperatorResult> {
    check_grid(f, grid)?;
    check_derivative_order(op, order)?;
    match (f, opts.path) {
        (FuncRep::Closed(c), PathChoice::Auto) => analytic::apply(op, order, c, grid, opts.exec),
        (FuncRep::Closed(c), PathChoice::Numeric) => numeric::apply_closed(op, order, c, grid, opts.exec),
        (FuncRep::Sampled(s), _) => numeric::apply_samples(op, order, s.values(), grid, opts.exec),
    }
}

/// RL derivative assembled as the Caputo derivative plus the boundary terms
/// `sum_{k<n} g^(k)(0) / Γ(k - alpha + 1) * D^(k - alpha)`, where `D` is the
/// distance to the anchor endpoint and `g^(k)(0)` the `k`-th derivative with
/// respect to that distance (so `(-1)^k f^(k)(b)` on the right).
pub fn rl_from_caputo(order: FracOrder, f: &FuncRep, side: Side, grid: &Grid) -> Result<OperatorResult> {
    rl_from_caputo_with(order, f, side, grid, &ApplyOptions::default())
}

pub fn rl_from_caputo_with(
    order: FracOrder,
    f: &FuncRep,
    side: Side,
    grid: &Grid,
    opts: &ApplyOptions,
) -> Result<OperatorResult> {
    let caputo = OperatorKind::new(side, OpKind::Caputo);
    let caputo_result = apply_with(caputo, order, f, grid, opts)?;
    let n = order.n();
    let anchor_derivs: Vec<f64> = match f {
        FuncRep::Closed(c) => closed_anchor_derivatives(c, side, n),
        FuncRep::Sampled(s) => {
            if order.alpha() >= 1.0 && !order.is_integer() {
                return Err(Error::UnsupportedOrder {
                    alpha: order.alpha(),
                    reason: "sampled RL derivatives need 0 < alpha < 1".into(),
                });
            }
            let v = s.values();
            vec![match side {
                Side::Left => v[0],
                Side::Right => v[v.len() - 1],
            }]
        }
    };
    let alpha = order.alpha();
    let interval = grid.interval();
    let values = crate::par::map_indices(opts.exec, grid.n_points(), |i| {
        let x = grid.node(i);
        let dist = match side {
            Side::Left => x - interval.a(),
            Side::Right => interval.b() - x,
        };
        let mut v = caputo_result.values[i];
        for (k, &dk) in anchor_derivs.iter().enumerate().take(n) {
            let w = recip_gamma(k as f64 - alpha + 1.0);
            if dk == 0.0 || w == 0.0 {
                continue;
            }
            let e = k as f64 - alpha;
            v += if dist == 0.0 {
                // every k < n has k - alpha < 0
                f64::INFINITY.copysign(dk * w)
            } else {
                dk * w * dist.powf(e)
            };
        }
        v
    });
    let scheme = format!("caputo+boundary({})", caputo_result.scheme);
    Ok(OperatorResult::from_values(*grid, values, caputo_result.method, scheme))
}

/// `d^k/dD^k f` at the anchor for `k < n`, with `D` the distance from the anchor.
fn closed_anchor_derivatives(c: &ClosedForm, side: Side, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| match side {
            Side::Left => c.derivative(k, c.interval.a()),
            Side::Right => {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * c.derivative(k, c.interval.b())
            }
        })
        .collect()
}
