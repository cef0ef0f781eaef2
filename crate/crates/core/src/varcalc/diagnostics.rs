//! Numerical probes of the existence hypotheses and the `L^r` bound of the
//! right RL integral.
//!
//! The probes sample finitely many functions or arguments, so a pass is
//! evidence, not proof.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::VariationalProblem;
use crate::error::Result;
use crate::fracops::{apply, gamma, FracOrder, OpKind, OperatorKind, Side};
use crate::gridfn::{FuncRep, Grid, SampledFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct ProbeSet {
    pub regularity: ProbeVerdict,
    pub coercivity: ProbeVerdict,
    pub convexity: ProbeVerdict,
    /// Functional values along each coercivity ray, one row per ray.
    pub coercivity_values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct TonelliReport {
    pub primal: ProbeSet,
    pub dual: ProbeSet,
    pub dual_agrees: bool,
    pub note: String,
}

/// Ray scale factors for the coercivity probe.
const RAY_SCALES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
const CONVEXITY_PAIRS: usize = 256;

/// Discrete `W^{1,p}` norm with trapezoid weights and nodal second-order
/// differences for `u'`.
pub fn w1p_norm(u: &[f64], grid: &Grid, p: f64) -> f64 {
    let n = u.len();
    let h = grid.h();
    let w = grid.trapezoid_weights();
    let du = |i: usize| {
        if n == 2 {
            (u[1] - u[0]) / h
        } else if i == 0 {
            (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        }
    };
    let s: f64 = (0..n).map(|i| w[i] * (u[i].abs().powf(p) + du(i).abs().powf(p))).sum();
    s.powf(1.0 / p)
}

/// Admissible perturbation directions `sin(k π w / (b - a))`, with `w` the
/// distance from the operators' anchor so the dual probes mirror the primal.
fn bump(prob: &VariationalProblem, k: usize) -> Vec<f64> {
    let interval = prob.grid.interval();
    let len = interval.len();
    prob.grid
        .nodes()
        .iter()
        .map(|&t| {
            let w = match prob.side {
                Side::Left => t - interval.a(),
                Side::Right => interval.b() - t,
            };
            (k as f64 * PI * w / len).sin()
        })
        .collect()
}

fn probe_regularity(prob: &VariationalProblem) -> ProbeVerdict {
    let f = prob.functional();
    let base = prob.initial_guess();
    let q = prob.p_adjoint();
    let h = prob.grid.h();
    let w = prob.grid.trapezoid_weights();
    for k in 0..4 {
        let dir = bump(prob, k);
        let u: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + d).collect();
        let (nodes, cells) = f.slots(&u);
        let mut total = 0.0;
        for (x, wi) in nodes.iter().zip(&w) {
            let p = prob.lagrangian.partials(*x);
            total += wi * (prob.lagrangian.value(*x).abs() + p[0].abs() + p[1].abs().powf(q) + p[3].abs().powf(q));
        }
        for x in &cells {
            let p = prob.lagrangian.partials(*x);
            total += h * (p[0].abs() + p[2].abs().powf(q));
        }
        if !total.is_finite() {
            return ProbeVerdict::Fail;
        }
    }
    ProbeVerdict::Pass
}

fn probe_coercivity(prob: &VariationalProblem) -> (ProbeVerdict, Vec<Vec<f64>>) {
    let f = prob.functional();
    let base = prob.initial_guess();
    let mut verdict = ProbeVerdict::Pass;
    let mut rows = Vec::new();
    for k in 1..=3 {
        let dir = bump(prob, k);
        let mut values = Vec::new();
        let mut norms = Vec::new();
        for s in RAY_SCALES {
            let u: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + s * d).collect();
            values.push(f.value(&u));
            norms.push(w1p_norm(&u, &prob.grid, prob.p));
        }
        let increasing = values.windows(2).all(|v| v[1] > v[0]);
        let m = values.len();
        let last = (values[m - 1] - values[m - 2]) / (norms[m - 1] - norms[m - 2]);
        let prev = (values[m - 2] - values[m - 3]) / (norms[m - 2] - norms[m - 3]);
        if !increasing {
            verdict = ProbeVerdict::Fail;
        } else if !(last > prev) && verdict == ProbeVerdict::Pass {
            verdict = ProbeVerdict::Inconclusive;
        }
        rows.push(values);
    }
    (verdict, rows)
}

fn probe_convexity(prob: &VariationalProblem, seed: u64) -> ProbeVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (prob.grid.interval().a(), prob.grid.interval().b());
    let l = &prob.lagrangian;
    for _ in 0..CONVEXITY_PAIRS {
        let t = rng.gen_range(a..=b);
        let mut x = [0.0; 5];
        let mut y = [0.0; 5];
        for i in 0..4 {
            x[i] = rng.gen_range(-10.0..=10.0);
            y[i] = rng.gen_range(-10.0..=10.0);
        }
        x[4] = t;
        y[4] = t;
        let mid: [f64; 5] = std::array::from_fn(|i| 0.5 * (x[i] + y[i]));
        let avg = 0.5 * (l.value(x) + l.value(y));
        if l.value(mid) > avg + 1e-12 * (1.0 + avg.abs()) {
            return ProbeVerdict::Fail;
        }
    }
    ProbeVerdict::Pass
}

fn probe_set(prob: &VariationalProblem, seed: u64) -> ProbeSet {
    let (coercivity, coercivity_values) = probe_coercivity(prob);
    ProbeSet {
        regularity: probe_regularity(prob),
        coercivity,
        convexity: probe_convexity(prob, seed),
        coercivity_values,
    }
}

pub fn diagnose_tonelli(prob: &VariationalProblem) -> TonelliReport {
    diagnose_tonelli_with(prob, 42)
}

/// Runs the probes on the problem and on its dual.
pub fn diagnose_tonelli_with(prob: &VariationalProblem, seed: u64) -> TonelliReport {
    let primal = probe_set(prob, seed);
    let dual = probe_set(&prob.dual(), seed);
    let dual_agrees = primal.regularity == dual.regularity
        && primal.coercivity == dual.coercivity
        && primal.convexity == dual.convexity;
    TonelliReport {
        primal,
        dual,
        dual_agrees,
        note: "probes sample finitely many functions and arguments; the dual problem uses left operators anchored at -b and admissible set {u*: u admissible}".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub struct NormBoundReport {
    pub order: f64,
    /// `r`, with `f64::INFINITY` for the max norm.
    pub r: f64,
    /// `||I_b^α f||_r`.
    pub lhs: f64,
    /// `||f||_r`.
    pub f_norm: f64,
    /// `(b - a)^α / Γ(1 + α)`.
    pub constant: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Slack allowed on top of the bound for quadrature error.
pub const NORM_BOUND_SLACK: f64 = 1e-6;

fn lr_norm(v: &[f64], grid: &Grid, r: f64) -> f64 {
    if r.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let w = grid.trapezoid_weights();
    let s: f64 = v.iter().zip(&w).map(|(x, wi)| wi * x.abs().powf(r)).sum();
    s.powf(1.0 / r)
}

/// Checks `||I_b^α f||_r <= (b - a)^α / Γ(1 + α) ||f||_r` on the grid.
pub fn check_norm_bound(order: FracOrder, f: &SampledFn, r: f64) -> Result<NormBoundReport> {
    if !(r >= 1.0) {
        return Err(crate::Error::Domain(format!("norm exponent r = {r} must be >= 1")));
    }
    let grid = f.grid();
    let op = OperatorKind::new(Side::Right, OpKind::RlIntegral);
    let integral = apply(op, order, &FuncRep::Sampled(f.clone()), grid)?;
    let alpha = order.alpha();
    let constant = grid.interval().len().powf(alpha) / gamma(1.0 + alpha)?;
    let lhs = lr_norm(&integral.values, grid, r);
    let f_norm = lr_norm(f.values(), grid, r);
    Ok(NormBoundReport {
        order: alpha,
        r,
        lhs,
        f_norm,
        constant,
        slack: NORM_BOUND_SLACK,
        pass: lhs <= constant * f_norm + NORM_BOUND_SLACK,
    })
}

/// A random trigonometric polynomial of degree at most 6 sampled on `grid`.
pub fn random_smooth(grid: &Grid, rng: &mut impl Rng) -> SampledFn {
    let a = grid.interval().a();
    let len = grid.interval().len();
    let degree = rng.gen_range(1..=6);
    let coeffs: Vec<(f64, f64)> = (0..=degree).map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
    SampledFn::from_fn(*grid, |t| {
        let s = PI * (t - a) / len;
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (c, d))| (c * (k as f64 * s).cos() + d * (k as f64 * s).sin()) / (1.0 + k as f64))
            .sum()
    })
    .expect("finite samples")
}

/// Norm-bound checks on `count` seeded random functions for every
/// `(alpha, r)` pair.
pub fn norm_bound_sweep(grid: &Grid, alphas: &[f64], rs: &[f64], count: usize, seed: u64) -> Result<Vec<NormBoundReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions: Vec<SampledFn> = (0..count).map(|_| random_smooth(grid, &mut rng)).collect();
    let mut out = Vec::with_capacity(functions.len() * alphas.len() * rs.len());
    for f in &functions {
        for &alpha in alphas {
            let order = FracOrder::new(alpha)?;
            for &r in rs {
                out.push(check_norm_bound(order, f, r)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varcalc::BoundaryConditions;

    fn problem(l: &str, alpha: f64) -> VariationalProblem {
        VariationalProblem::new(l.parse().unwrap(), Grid::on(0.0, 1.0, 33).unwrap(), FracOrder::new(alpha).unwrap(), 2.0, BoundaryConditions::both(0.0, 1.0)).unwrap()
    }

    #[test]
    fn positive_definite_quadratic_passes() {
        let rep = diagnose_tonelli(&problem("vel2:0.5;u2:0.5", 0.5));
        assert_eq!(rep.primal.coercivity, ProbeVerdict::Pass);
        assert_eq!(rep.primal.convexity, ProbeVerdict::Pass);
        assert_eq!(rep.primal.regularity, ProbeVerdict::Pass);
        assert!(rep.dual_agrees);
    }

    #[test]
    fn concave_lagrangian_fails_convexity() {
        let rep = diagnose_tonelli(&problem("u2:-0.5", 0.5));
        assert_eq!(rep.primal.convexity, ProbeVerdict::Fail);
        assert_eq!(rep.primal.coercivity, ProbeVerdict::Fail);
    }

    #[test]
    fn fractional_quadratic_agrees_with_dual() {
        let rep = diagnose_tonelli(&problem("cap2:0.5", 0.5));
        assert!(rep.dual_agrees);
        for (p, q) in rep.primal.coercivity_values.iter().flatten().zip(rep.dual.coercivity_values.iter().flatten()) {
            assert!((p - q).abs() < 1e-12 * p.abs());
        }
    }

    #[test]
    fn norm_bound_of_one_is_tight() {
        let grid = Grid::on(0.0, 1.0, 129).unwrap();
        let one = SampledFn::from_fn(grid, |_| 1.0).unwrap();
        let rep = check_norm_bound(FracOrder::new(0.5).unwrap(), &one, f64::INFINITY).unwrap();
        assert!((rep.lhs - 1.1283791670955126).abs() < 1e-12);
        assert!(rep.pass);
        let zero = SampledFn::from_fn(grid, |_| 0.0).unwrap();
        let rep = check_norm_bound(FracOrder::new(0.5).unwrap(), &zero, 2.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn w1p_norm_of_linear() {
        let grid = Grid::on(0.0, 1.0, 5).unwrap();
        let u: Vec<f64> = grid.nodes();
        // ∫ t^2 by trapezoid at h = 1/4 plus ∫ 1
        let want = (11.0 / 32.0 + 1.0f64).sqrt();
        assert!((w1p_norm(&u, &grid, 2.0) - want).abs() < 1e-14);
    }
}
