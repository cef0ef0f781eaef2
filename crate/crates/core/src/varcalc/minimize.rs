//! Direct method on the discretization: nonlinear conjugate gradients over
//! the free node values.

use serde::{Deserialize, Serialize};

use super::VariationalProblem;
use crate::error::Result;
use crate::gridfn::SampledFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct MinimizationResult {
    pub minimizer: SampledFn,
    pub functional_value: f64,
    /// Euclidean norm of the gradient over the free nodes.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub gradient_tolerance: f64,
    /// Iteration cap as a multiple of the node count.
    pub max_iterations_per_node: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-8,
            max_iterations_per_node: 10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize(prob: &VariationalProblem) -> Result<MinimizationResult> {
    minimize_with(prob, &MinimizeOptions::default())
}

/// Minimizes the reflected dual problem; its minimizer lives on `[-b, -a]`.
pub fn minimize_dual(prob: &VariationalProblem) -> Result<MinimizationResult> {
    minimize(&prob.dual())
}

enum LineSearch {
    Step(f64),
    /// Non-positive curvature along the direction.
    Unbounded,
}

/// Secant iteration on `phi'(t) = grad(x + t d) . d`, exact in one step for
/// quadratics.
fn line_search(grad_along: impl Fn(f64) -> f64, slope0: f64, first: f64) -> LineSearch {
    let (mut t0, mut s0) = (0.0, slope0);
    let mut t1 = first;
    for iter in 0..50 {
        let s1 = grad_along(t1);
        if s1.abs() <= 1e-13 * slope0.abs() {
            return LineSearch::Step(t1);
        }
        let curvature = (s1 - s0) / (t1 - t0);
        if !(curvature > 0.0) {
            // later secant pairs are too close for a reliable sign
            return if iter == 0 { LineSearch::Unbounded } else { LineSearch::Step(t1) };
        }
        let next = t1 - s1 / curvature;
        if (next - t1).abs() <= 1e-15 * t1.abs() {
            return LineSearch::Step(next);
        }
        (t0, s0) = (t1, s1);
        t1 = next;
    }
    LineSearch::Step(t1)
}

pub fn minimize_with(prob: &VariationalProblem, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    let f = prob.functional();
    let n = prob.grid.n_points();
    let free: Vec<bool> = (0..n)
        .map(|i| !((i == 0 && prob.bc.left.is_some()) || (i == n - 1 && prob.bc.right.is_some())))
        .collect();
    let n_free = free.iter().filter(|&&b| b).count();
    let project = |mut g: Vec<f64>| {
        for (gi, &is_free) in g.iter_mut().zip(&free) {
            if !is_free {
                *gi = 0.0;
            }
        }
        g
    };

    let mut x = prob.initial_guess();
    let mut g = project(f.gradient(&x));
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut step = 1.0;
    let max_iter = opts.max_iterations_per_node * n;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= opts.gradient_tolerance {
            converged = true;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let along = |t: f64| {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            dot(&project(f.gradient(&xt)), &d)
        };
        let t = match line_search(along, slope, step) {
            LineSearch::Step(t) => t,
            LineSearch::Unbounded => break,
        };
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += t * di;
        }
        step = t;
        iterations += 1;
        let g_new = project(f.gradient(&x));
        // Polak-Ribiere with restart
        let beta = if iterations % n_free.max(1) == 0 {
            0.0
        } else {
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            (dot(&g_new, &y) / dot(&g, &g)).max(0.0)
        };
        for (di, gi) in d.iter_mut().zip(&g_new) {
            *di = -gi + beta * *di;
        }
        g = g_new;
    }
    let gradient_norm = dot(&g, &g).sqrt();
    converged = converged || gradient_norm <= opts.gradient_tolerance;
    let functional_value = f.value(&x);
    Ok(MinimizationResult {
        minimizer: SampledFn::new(prob.grid, x)?,
        functional_value,
        gradient_norm,
        iterations,
        converged,
        tolerance: opts.gradient_tolerance,
    })
}
