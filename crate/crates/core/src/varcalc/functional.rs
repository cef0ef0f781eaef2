//! The discrete functional and its exact gradient.
//!
//! Terms without `u'` are sampled at the nodes and integrated with trapezoid
//! weights. Terms with `u'` are evaluated once per cell at the midpoint, with
//! `u'` the cell slope and `u` the average of the two end values; this is the
//! one-point rule that is exact for the classical problems with linear
//! minimizers.

use super::VariationalProblem;
use crate::fracops::numeric::weight_matrix;
use crate::fracops::{OpKind, OperatorKind};
use crate::gridfn::Grid;

use super::LagrangianSpec;

#[derive(Debug, Clone)]
pub struct DiscreteFunctional {
    grid: Grid,
    nodal: LagrangianSpec,
    cell: LagrangianSpec,
    weights: Vec<f64>,
    /// RL integral weights, present when `L` uses `x2`.
    integral: Option<Vec<Vec<f64>>>,
    /// Caputo weights, present when `L` uses `x4`.
    caputo: Option<Vec<Vec<f64>>>,
}

fn matvec(m: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
}

/// `m^T v`.
fn matvec_t(m: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    for (row, &vi) in m.iter().zip(v) {
        if vi == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * vi;
        }
    }
}

impl DiscreteFunctional {
    pub fn new(prob: &VariationalProblem) -> Self {
        let (cell, nodal): (Vec<_>, Vec<_>) = prob.lagrangian.terms.iter().cloned().partition(|t| t.uses_velocity());
        let nodal = LagrangianSpec { terms: nodal };
        let cell = LagrangianSpec { terms: cell };
        let matrix = |kind| weight_matrix(OperatorKind::new(prob.side, kind), prob.order, &prob.grid).expect("0 < alpha <= 1");
        Self {
            grid: prob.grid,
            integral: nodal.uses_integral().then(|| matrix(OpKind::RlIntegral)),
            caputo: nodal.uses_caputo().then(|| matrix(OpKind::Caputo)),
            weights: prob.grid.trapezoid_weights(),
            nodal,
            cell,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Slot values `(x1, x2, x3, x4, t)` at every node (with `x3 = 0`) and at
    /// every cell midpoint (with `x2 = x4 = 0`).
    pub fn slots(&self, u: &[f64]) -> (Vec<[f64; 5]>, Vec<[f64; 5]>) {
        let n = u.len();
        let zeros = || vec![0.0; n];
        let x2 = self.integral.as_ref().map_or_else(zeros, |m| matvec(m, u));
        let x4 = self.caputo.as_ref().map_or_else(zeros, |m| matvec(m, u));
        let nodes = (0..n).map(|i| [u[i], x2[i], 0.0, x4[i], self.grid.node(i)]).collect();
        let h = self.grid.h();
        let cells = if self.cell.terms.is_empty() {
            Vec::new()
        } else {
            (0..n - 1)
                .map(|c| {
                    let t = 0.5 * (self.grid.node(c) + self.grid.node(c + 1));
                    [0.5 * (u[c] + u[c + 1]), 0.0, (u[c + 1] - u[c]) / h, 0.0, t]
                })
                .collect()
        };
        (nodes, cells)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let (nodes, cells) = self.slots(u);
        let h = self.grid.h();
        let nodal: f64 = nodes.iter().zip(&self.weights).map(|(x, w)| w * self.nodal.value(*x)).sum();
        let cell: f64 = cells.iter().map(|x| h * self.cell.value(*x)).sum();
        nodal + cell
    }

    /// `dF/du_k` for every node, endpoints included.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let (nodes, cells) = self.slots(u);
        let h = self.grid.h();
        let mut grad = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        let mut d4 = vec![0.0; n];
        for (i, x) in nodes.iter().enumerate() {
            let p = self.nodal.partials(*x);
            let w = self.weights[i];
            grad[i] += w * p[0];
            d2[i] = w * p[1];
            d4[i] = w * p[3];
        }
        if let Some(m) = &self.integral {
            matvec_t(m, &d2, &mut grad);
        }
        if let Some(m) = &self.caputo {
            matvec_t(m, &d4, &mut grad);
        }
        for (c, x) in cells.iter().enumerate() {
            let p = self.cell.partials(*x);
            grad[c] += 0.5 * h * p[0] - p[2];
            grad[c + 1] += 0.5 * h * p[0] + p[2];
        }
        grad
    }
}
