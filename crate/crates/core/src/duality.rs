//! Left/right duality: a left operator applied to `f` at `x` equals the
//! mirrored right operator applied to `f*(x) = f(-x)` at `-x`, and vice versa.
//!
//! [`via_dual`] computes an operator the long way round and [`check_duality`]
//! compares that with native evaluation node by node.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fracops::numeric::weight_matrix;
use crate::fracops::{apply_with, ApplyOptions, FracOrder, Method, OpKind, OperatorKind, OperatorResult, PathChoice, Side};
use crate::gridfn::{dual, FuncRep, Grid};

/// Node-wise comparison of two evaluations of the same quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct IdentityReport {
    pub identity: String,
    pub grid: Grid,
    pub order: f64,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub excluded_nodes: Vec<usize>,
    pub tolerance: f64,
    pub pass: bool,
    pub methods: (Method, Method),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl IdentityReport {
    /// Compares `lhs` and `rhs`, skipping nodes flagged in either.
    pub fn compare(identity: impl Into<String>, order: FracOrder, lhs: &OperatorResult, rhs: &OperatorResult, tolerance: f64) -> Self {
        let mut excluded = Vec::new();
        let mut max = 0.0f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, (x, y)) in lhs.values.iter().zip(&rhs.values).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                excluded.push(i);
                continue;
            }
            let d = (x - y).abs();
            max = max.max(d);
            sum += d;
            count += 1;
        }
        Self {
            identity: identity.into(),
            grid: lhs.grid,
            order: order.alpha(),
            max_abs_residual: max,
            mean_abs_residual: if count == 0 { 0.0 } else { sum / count as f64 },
            excluded_nodes: excluded,
            tolerance,
            pass: max <= tolerance,
            methods: (lhs.method, rhs.method),
            diagnostic: None,
        }
    }

    fn failed(identity: String, grid: Grid, order: FracOrder, tolerance: f64, methods: (Method, Method), why: String) -> Self {
        Self {
            identity,
            grid,
            order: order.alpha(),
            max_abs_residual: f64::NAN,
            mean_abs_residual: f64::NAN,
            excluded_nodes: Vec::new(),
            tolerance,
            pass: false,
            methods,
            diagnostic: Some(why),
        }
    }
}

/// Evaluates `op` by applying the mirrored operator to the dual function on
/// the reflected grid and reversing the result.
pub fn via_dual(op: OperatorKind, order: FracOrder, f: &FuncRep, grid: &Grid) -> Result<OperatorResult> {
    via_dual_with(op, order, f, grid, &ApplyOptions::default())
}

pub fn via_dual_with(op: OperatorKind, order: FracOrder, f: &FuncRep, grid: &Grid, opts: &ApplyOptions) -> Result<OperatorResult> {
    let reflected = grid.reflect();
    let mut r = apply_with(op.mirror(), order, &dual(f), &reflected, opts)?;
    r.values.reverse();
    let n = grid.n_points();
    r.flagged = r.flagged.iter().rev().map(|&i| n - 1 - i).collect();
    r.grid = *grid;
    Ok(r)
}

/// Default tolerance for a pair of evaluation methods.
pub fn default_tolerance(methods: (Method, Method), grid: &Grid) -> f64 {
    match methods {
        (Method::Analytic, Method::Analytic) => 1e-10,
        (Method::Numeric, Method::Numeric) => grid.h() * grid.h(),
        _ => 1e-6,
    }
}

fn expected_method(f: &FuncRep, path: PathChoice) -> Method {
    match (f, path) {
        (FuncRep::Closed(_), PathChoice::Auto) => Method::Analytic,
        _ => Method::Numeric,
    }
}

/// Compares [`via_dual`] with native evaluation on the default (analytic
/// where possible) path.
pub fn check_duality(op: OperatorKind, order: FracOrder, f: &FuncRep, grid: &Grid, tolerance: Option<f64>) -> IdentityReport {
    check_duality_with(op, order, f, grid, tolerance, PathChoice::Auto, PathChoice::Auto)
}

/// As [`check_duality`], choosing the path for the native and the dual side
/// separately.
pub fn check_duality_with(
    op: OperatorKind,
    order: FracOrder,
    f: &FuncRep,
    grid: &Grid,
    tolerance: Option<f64>,
    native_path: PathChoice,
    dual_path: PathChoice,
) -> IdentityReport {
    let name = format!("duality:{op}");
    let native_opts = ApplyOptions {
        path: native_path,
        ..ApplyOptions::default()
    };
    let dual_opts = ApplyOptions {
        path: dual_path,
        ..ApplyOptions::default()
    };
    let methods = (expected_method(f, native_path), expected_method(f, dual_path));
    let tol = tolerance.unwrap_or_else(|| default_tolerance(methods, grid));
    let native = apply_with(op, order, f, grid, &native_opts);
    let mirrored = via_dual_with(op, order, f, grid, &dual_opts);
    match (native, mirrored) {
        (Ok(n), Ok(d)) => IdentityReport::compare(name, order, &n, &d, tol),
        (Err(e), _) | (_, Err(e)) => IdentityReport::failed(name, *grid, order, tol, methods, e.to_string()),
    }
}

/// Outcome of comparing the right weight matrix with the reversed left one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSymmetry {
    pub kind: OpKind,
    pub n_points: usize,
    pub mismatches: usize,
    pub max_abs_difference: f64,
}

impl WeightSymmetry {
    pub fn exact(&self) -> bool {
        self.mismatches == 0
    }
}

/// Checks `W_right[k][j] == W_left[n-1-k][n-1-j]` bit for bit.
pub fn check_weight_symmetry(kind: OpKind, order: FracOrder, grid: &Grid) -> Result<WeightSymmetry> {
    let left = weight_matrix(OperatorKind::new(Side::Left, kind), order, grid)?;
    let right = weight_matrix(OperatorKind::new(Side::Right, kind), order, grid)?;
    let n = grid.n_points();
    let mut mismatches = 0;
    let mut max = 0.0f64;
    for k in 0..n {
        for j in 0..n {
            let (r, l) = (right[k][j], left[n - 1 - k][n - 1 - j]);
            if r.to_bits() != l.to_bits() {
                mismatches += 1;
                let d = (r - l).abs();
                max = max.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    Ok(WeightSymmetry {
        kind,
        n_points: n,
        mismatches,
        max_abs_difference: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridfn::{Anchor, ClosedFormFn, Interval, SampledFn};

    fn closed(f: ClosedFormFn, a: f64, b: f64) -> FuncRep {
        FuncRep::closed(f, Interval::new(a, b).unwrap()).unwrap()
    }

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn integral_of_one_via_dual() {
        let f = closed(ClosedFormFn::Const { value: 1.0 }, 0.0, 1.0);
        let g = Grid::on(0.0, 1.0, 11).unwrap();
        let op = OperatorKind::new(Side::Left, OpKind::RlIntegral);
        let r = via_dual(op, order(1.0), &f, &g).unwrap();
        for (v, x) in r.values.iter().zip(g.nodes()) {
            assert!((v - x).abs() < 1e-15);
        }
    }

    #[test]
    fn left_caputo_of_identity_at_one() {
        let f = closed(ClosedFormFn::Power { beta: 1.0, anchor: Anchor::Left }, 0.0, 1.0);
        let g = Grid::on(0.0, 1.0, 5).unwrap();
        let op = OperatorKind::new(Side::Left, OpKind::Caputo);
        let r = via_dual(op, order(0.5), &f, &g).unwrap();
        assert!((r.values[4] - 1.1283791670955126).abs() < 1e-12);
    }

    #[test]
    fn numeric_duality_is_exact() {
        let g = Grid::on(0.0, 1.0, 65).unwrap();
        let s = FuncRep::Sampled(SampledFn::from_fn(g, |x| (2.0 * x).sin() + 0.3).unwrap());
        for op in OperatorKind::ALL {
            let rep = check_duality(op, order(0.5), &s, &g, None);
            assert!(rep.pass);
            assert_eq!(rep.max_abs_residual, 0.0, "{op}");
        }
    }

    #[test]
    fn errors_become_failing_reports() {
        let g = Grid::on(0.0, 1.0, 9).unwrap();
        let s = FuncRep::Sampled(SampledFn::from_fn(g, |x| x).unwrap());
        let rep = check_duality(OperatorKind::new(Side::Left, OpKind::Caputo), order(1.5), &s, &g, None);
        assert!(!rep.pass);
        assert!(rep.diagnostic.unwrap().contains("unsupported order"));
    }

    #[test]
    fn flagged_nodes_are_mapped_back() {
        let f = closed(ClosedFormFn::Const { value: 2.0 }, 0.0, 1.0);
        let g = Grid::on(0.0, 1.0, 9).unwrap();
        let op = OperatorKind::new(Side::Left, OpKind::RlDerivative);
        let r = via_dual(op, order(0.5), &f, &g).unwrap();
        assert_eq!(r.flagged, vec![0]);
        let rep = check_duality(op, order(0.5), &f, &g, None);
        assert_eq!(rep.excluded_nodes, vec![0]);
        assert!(rep.pass);
    }

    #[test]
    fn weight_symmetry_for_all_kinds() {
        let g = Grid::on(-0.3, 2.0, 33).unwrap();
        for kind in [OpKind::RlIntegral, OpKind::Caputo, OpKind::RlDerivative] {
            assert!(check_weight_symmetry(kind, order(0.7), &g).unwrap().exact());
        }
    }
}
