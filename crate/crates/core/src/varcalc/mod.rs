//! Right-fractional variational problems on a grid.
//!
//! The functional is
//!
//! ```text
//! F[u] = ∫_a^b L(u, I_b^α u, u', cD_b^α u, t) dt
//! ```
//!
//! with `L` built from a fixed menu of terms ([`Term`]) whose partial
//! derivatives are known in closed form. The fractional operators act on
//! node values through the numeric weight matrices, so `F` is an explicit
//! function of the node vector and its gradient is assembled exactly.
//!
//! The dual problem lives on `[-b, -a]`, uses left operators on
//! `u*(s) = u(-s)` and the dual Lagrangian `L*(x1, x2, x3, x4, s) =
//! L(x1, x2, -x3, x4, -s)`; its left anchor is `-b`, the left endpoint of
//! the reflected interval.

mod diagnostics;
mod functional;
mod minimize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{FracOrder, Side};
use crate::gridfn::{format_funcspec, parse_funcspec, ClosedFormFn, Grid, Interval, SampledFn};

pub use diagnostics::{
    check_norm_bound, diagnose_tonelli, diagnose_tonelli_with, norm_bound_sweep, random_smooth, w1p_norm,
    NormBoundReport, ProbeSet, ProbeVerdict, TonelliReport,
};
pub use functional::DiscreteFunctional;
pub use minimize::{minimize, minimize_dual, minimize_with, MinimizationResult, MinimizeOptions};

/// One additive piece of a Lagrangian `L(x1, x2, x3, x4, t)`, where `x1 = u`,
/// `x2 = I^α u`, `x3 = u'`, `x4 = cD^α u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "term")]
pub enum Term {
    /// `coef * x1^2`
    StateSq { coef: f64 },
    /// `coef * x2^2`
    IntegralSq { coef: f64 },
    /// `coef * x3^2`
    VelocitySq { coef: f64 },
    /// `coef * x4^2`
    CaputoSq { coef: f64 },
    /// `coef * U(x1)`
    Potential { coef: f64, func: ClosedFormFn },
    /// `coef * x1 * x3`
    StateVelocity { coef: f64 },
    /// `coef * t`
    Time { coef: f64 },
}

/// Interval used to evaluate potentials, which never depend on an anchor.
fn potential_interval() -> Interval {
    Interval::new(0.0, 1.0).expect("unit interval")
}

impl Term {
    fn coef(&self) -> f64 {
        match self {
            Term::StateSq { coef }
            | Term::IntegralSq { coef }
            | Term::VelocitySq { coef }
            | Term::CaputoSq { coef }
            | Term::Potential { coef, .. }
            | Term::StateVelocity { coef }
            | Term::Time { coef } => *coef,
        }
    }

    /// Whether the term involves `x3`; such terms are integrated per cell.
    pub fn uses_velocity(&self) -> bool {
        matches!(self, Term::VelocitySq { .. } | Term::StateVelocity { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.coef().is_finite() {
            return Err(Error::Domain("term coefficient must be finite".into()));
        }
        if let Term::Potential { func, .. } = self {
            func.validate()?;
            if func.is_power() {
                return Err(Error::Domain(
                    "potentials must be const, poly, exp, sin or cos".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: [f64; 5]) -> f64 {
        match self {
            Term::StateSq { coef } => coef * x[0] * x[0],
            Term::IntegralSq { coef } => coef * x[1] * x[1],
            Term::VelocitySq { coef } => coef * x[2] * x[2],
            Term::CaputoSq { coef } => coef * x[3] * x[3],
            Term::Potential { coef, func } => coef * func.eval(&potential_interval(), x[0]),
            Term::StateVelocity { coef } => coef * x[0] * x[2],
            Term::Time { coef } => coef * x[4],
        }
    }

    /// Adds `∂L/∂x_i` into `out[i]`.
    pub fn add_partials(&self, x: [f64; 5], out: &mut [f64; 5]) {
        match self {
            Term::StateSq { coef } => out[0] += 2.0 * coef * x[0],
            Term::IntegralSq { coef } => out[1] += 2.0 * coef * x[1],
            Term::VelocitySq { coef } => out[2] += 2.0 * coef * x[2],
            Term::CaputoSq { coef } => out[3] += 2.0 * coef * x[3],
            Term::Potential { coef, func } => out[0] += coef * func.derivative(1, &potential_interval(), x[0]),
            Term::StateVelocity { coef } => {
                out[0] += coef * x[2];
                out[2] += coef * x[0];
            }
            Term::Time { coef } => out[4] += coef,
        }
    }

    /// The term of `L*`.
    pub fn dual(&self) -> Self {
        match self {
            Term::StateVelocity { coef } => Term::StateVelocity { coef: -coef },
            Term::Time { coef } => Term::Time { coef: -coef },
            other => other.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::StateSq { coef } => write!(f, "u2:{coef}"),
            Term::IntegralSq { coef } => write!(f, "int2:{coef}"),
            Term::VelocitySq { coef } => write!(f, "vel2:{coef}"),
            Term::CaputoSq { coef } => write!(f, "cap2:{coef}"),
            Term::Potential { coef, func } => write!(f, "pot:{coef}:{}", format_funcspec(func)),
            Term::StateVelocity { coef } => write!(f, "cross:{coef}"),
            Term::Time { coef } => write!(f, "time:{coef}"),
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    /// `u2:c`, `int2:c`, `vel2:c`, `cap2:c`, `cross:c`, `time:c` or
    /// `pot:c:<funcspec>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |expected: &str| Error::Parse {
            pos: 0,
            expected: format!("{expected} in term `{s}`"),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("`kind:coef`"))?;
        let (coef_text, func_text) = match kind {
            "pot" => {
                let (c, func) = rest.split_once(':').ok_or_else(|| bad("`pot:coef:funcspec`"))?;
                (c, Some(func))
            }
            _ => (rest, None),
        };
        let coef: f64 = coef_text.parse().map_err(|_| bad("a numeric coefficient"))?;
        let term = match kind {
            "u2" => Term::StateSq { coef },
            "int2" => Term::IntegralSq { coef },
            "vel2" => Term::VelocitySq { coef },
            "cap2" => Term::CaputoSq { coef },
            "cross" => Term::StateVelocity { coef },
            "time" => Term::Time { coef },
            "pot" => Term::Potential {
                coef,
                func: parse_funcspec(func_text.unwrap_or_default())?,
            },
            _ => return Err(bad("one of u2, int2, vel2, cap2, pot, cross, time")),
        };
        term.validate()?;
        Ok(term)
    }
}

/// `L` as a sum of [`Term`]s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub terms: Vec<Term>,
}

impl LagrangianSpec {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        terms.iter().try_for_each(Term::validate)?;
        Ok(Self { terms })
    }

    pub fn value(&self, x: [f64; 5]) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum()
    }

    /// `[∂1 L, ..., ∂5 L]` at `x`.
    pub fn partials(&self, x: [f64; 5]) -> [f64; 5] {
        let mut out = [0.0; 5];
        for t in &self.terms {
            t.add_partials(x, &mut out);
        }
        out
    }

    pub fn uses_integral(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::IntegralSq { .. }))
    }

    pub fn uses_caputo(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::CaputoSq { .. }))
    }
}

impl fmt::Display for LagrangianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for LagrangianSpec {
    type Err = Error;

    /// Terms separated by `;`, e.g. `vel2:0.5;pot:-1:poly:c=0.5,0,0`.
    fn from_str(s: &str) -> Result<Self> {
        let terms = s
            .split(';')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Term>>>()?;
        if terms.is_empty() {
            return Err(Error::Parse {
                pos: 0,
                expected: "at least one Lagrangian term".into(),
            });
        }
        Ok(Self { terms })
    }
}

/// `L*(x1, x2, x3, x4, s) = L(x1, x2, -x3, x4, -s)`. An involution.
pub fn dual_lagrangian(l: &LagrangianSpec) -> LagrangianSpec {
    LagrangianSpec {
        terms: l.terms.iter().map(Term::dual).collect(),
    }
}

/// Optional prescribed endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

impl BoundaryConditions {
    pub fn both(left: f64, right: f64) -> Self {
        Self {
            left: Some(left),
            right: Some(right),
        }
    }

    pub fn swapped(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
        }
    }
}

/// Tolerance for boundary values of admissible functions.
pub const BC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalProblem {
    pub lagrangian: LagrangianSpec,
    pub grid: Grid,
    pub order: FracOrder,
    /// Integrability exponent, `1 < p < inf`.
    pub p: f64,
    pub bc: BoundaryConditions,
    /// Side of the fractional operators: right for the problem as posed,
    /// left for its dual.
    pub side: Side,
}

impl VariationalProblem {
    /// A right-fractional problem. `alpha = 1` is accepted as the classical limit.
    pub fn new(lagrangian: LagrangianSpec, grid: Grid, order: FracOrder, p: f64, bc: BoundaryConditions) -> Result<Self> {
        if order.alpha() > 1.0 {
            return Err(Error::UnsupportedOrder {
                alpha: order.alpha(),
                reason: "variational problems need 0 < alpha <= 1".into(),
            });
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!("exponent p = {p} must satisfy 1 < p < inf")));
        }
        if grid.n_points() < 3 {
            return Err(Error::InvalidGrid("variational problems need at least 3 nodes".into()));
        }
        for v in [bc.left, bc.right].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::Domain("boundary values must be finite".into()));
            }
        }
        lagrangian.terms.iter().try_for_each(Term::validate)?;
        Ok(Self {
            lagrangian,
            grid,
            order,
            p,
            bc,
            side: Side::Right,
        })
    }

    /// `p' = p / (p - 1)`.
    pub fn p_adjoint(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The reflected problem on `[-b, -a]` with left operators and `L*`.
    pub fn dual(&self) -> Self {
        Self {
            lagrangian: dual_lagrangian(&self.lagrangian),
            grid: self.grid.reflect(),
            order: self.order,
            p: self.p,
            bc: self.bc.swapped(),
            side: self.side.mirror(),
        }
    }

    pub fn functional(&self) -> DiscreteFunctional {
        DiscreteFunctional::new(self)
    }

    /// Checks that `u` lives on the grid and meets the boundary conditions.
    pub fn check_admissible(&self, u: &SampledFn) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let v = u.values();
        let ends = [("left", self.bc.left, v[0]), ("right", self.bc.right, v[v.len() - 1])];
        for (side, want, got) in ends {
            if let Some(want) = want {
                if (got - want).abs() > BC_TOLERANCE {
                    return Err(Error::BoundaryCondition {
                        side,
                        expected: want,
                        got,
                    });
                }
            }
        }
        Ok(())
    }

    /// Linear interpolant of the boundary values (zero where free).
    pub fn initial_guess(&self) -> Vec<f64> {
        let ua = self.bc.left.unwrap_or(0.0);
        let ub = self.bc.right.unwrap_or(0.0);
        let n = self.grid.n_points();
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                ua + (ub - ua) * s
            })
            .collect()
    }
}

/// `F[u]` for an admissible `u`.
pub fn evaluate_functional(prob: &VariationalProblem, u: &SampledFn) -> Result<f64> {
    prob.check_admissible(u)?;
    Ok(prob.functional().value(u.values()))
}

/// The dual functional evaluated on `u*`; equal to [`evaluate_functional`].
pub fn evaluate_dual_functional(prob: &VariationalProblem, u: &SampledFn) -> Result<f64> {
    prob.check_admissible(u)?;
    evaluate_functional(&prob.dual(), &u.dual())
}

/// The linear-friction Lagrangian `½ m u'^2 - U(u) + ½ γ (cD_b^α u)^2`
/// with `U(u) = ½ u^2`.
pub fn friction_lagrangian(mass: f64, gamma: f64) -> LagrangianSpec {
    LagrangianSpec {
        terms: vec![
            Term::VelocitySq { coef: 0.5 * mass },
            Term::Potential {
                coef: -1.0,
                func: ClosedFormFn::Poly {
                    coeffs: vec![0.5, 0.0, 0.0],
                },
            },
            Term::CaputoSq { coef: 0.5 * gamma },
        ],
    }
}

/// The friction demo: `m = 1`, `γ = 0.1`, `α = 1/2`, `p = 2` on `[0, 1]`
/// with `u(0) = 1`, `u(1) = 0`.
pub fn friction_problem(n_points: usize) -> Result<VariationalProblem> {
    VariationalProblem::new(
        friction_lagrangian(1.0, 0.1),
        Grid::on(0.0, 1.0, n_points)?,
        FracOrder::new(0.5)?,
        2.0,
        BoundaryConditions::both(1.0, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::gamma;

    fn problem(l: &str, n: usize, alpha: f64, bc: BoundaryConditions) -> VariationalProblem {
        VariationalProblem::new(l.parse().unwrap(), Grid::on(0.0, 1.0, n).unwrap(), FracOrder::new(alpha).unwrap(), 2.0, bc).unwrap()
    }

    #[test]
    fn term_text_round_trip() {
        let l: LagrangianSpec = "vel2:0.5;pot:-1:poly:c=0.5,0,0;cap2:0.05;cross:2;time:-1;u2:1;int2:3".parse().unwrap();
        assert_eq!(l.terms.len(), 7);
        let again: LagrangianSpec = l.to_string().parse().unwrap();
        assert_eq!(again, l);
        assert!("pot:1:pow:beta=2".parse::<Term>().is_err());
        assert!("vel3:1".parse::<Term>().is_err());
        assert!("vel2:x".parse::<Term>().is_err());
        assert!("".parse::<LagrangianSpec>().is_err());
    }

    #[test]
    fn dual_lagrangian_examples() {
        let l: LagrangianSpec = "u2:0.5;int2:1;cap2:2".parse().unwrap();
        assert_eq!(dual_lagrangian(&l), l);
        let l: LagrangianSpec = "cross:1;time:1".parse().unwrap();
        let d = dual_lagrangian(&l);
        let x = [0.3, 0.0, -1.7, 0.0, 0.4];
        assert_eq!(d.value(x), -(0.3 * -1.7) - 0.4);
        assert_eq!(dual_lagrangian(&d), l);
    }

    #[test]
    fn partials_match_differences() {
        let l: LagrangianSpec = "vel2:0.5;pot:-1:sin:omega=2;cap2:0.05;cross:2;time:-1;u2:1;int2:3".parse().unwrap();
        let x = [0.3, -0.2, 1.1, 0.7, 0.25];
        let p = l.partials(x);
        for i in 0..5 {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let fd = (l.value(xp) - l.value(xm)) / (2.0 * h);
            assert!((fd - p[i]).abs() < 1e-8, "slot {i}");
        }
    }

    #[test]
    fn functional_examples() {
        let bc = BoundaryConditions::both(0.0, 1.0);
        let prob = problem("vel2:0.5", 33, 1.0, bc);
        let u = SampledFn::from_fn(prob.grid, |t| t).unwrap();
        assert!((evaluate_functional(&prob, &u).unwrap() - 0.5).abs() < 1e-14);
        assert!((evaluate_dual_functional(&prob, &u).unwrap() - 0.5).abs() < 1e-14);

        let prob = problem("u2:0.5", 33, 0.5, BoundaryConditions::default());
        let zero = SampledFn::from_fn(prob.grid, |_| 0.0).unwrap();
        assert_eq!(evaluate_functional(&prob, &zero).unwrap(), 0.0);

        let prob = problem("cap2:0.5", 65, 0.5, BoundaryConditions::both(1.0, 0.0));
        let u = SampledFn::from_fn(prob.grid, |t| 1.0 - t).unwrap();
        let want = 0.25 / gamma(1.5).unwrap().powi(2);
        let primal = evaluate_functional(&prob, &u).unwrap();
        let dual = evaluate_dual_functional(&prob, &u).unwrap();
        assert!((primal - want).abs() < 1e-13, "{primal} {want}");
        assert!((primal - dual).abs() < 1e-12);
    }

    #[test]
    fn boundary_conditions_are_enforced() {
        let prob = problem("vel2:0.5", 9, 0.5, BoundaryConditions::both(0.0, 1.0));
        let u = SampledFn::from_fn(prob.grid, |t| t + 1e-9).unwrap();
        let err = evaluate_functional(&prob, &u).unwrap_err();
        assert!(matches!(err, Error::BoundaryCondition { side: "left", .. }));
    }

    #[test]
    fn problem_validation() {
        let g = Grid::on(0.0, 1.0, 9).unwrap();
        let l: LagrangianSpec = "u2:1".parse().unwrap();
        let bc = BoundaryConditions::default();
        assert!(VariationalProblem::new(l.clone(), g, FracOrder::new(1.5).unwrap(), 2.0, bc).is_err());
        assert!(VariationalProblem::new(l.clone(), g, FracOrder::new(0.5).unwrap(), 1.0, bc).is_err());
        let p = VariationalProblem::new(l, g, FracOrder::new(0.5).unwrap(), 3.0, bc).unwrap();
        assert!((1.0 / p.p + 1.0 / p.p_adjoint() - 1.0).abs() < 1e-15);
    }
}
