//! Functions on an interval: closed-form test functions, node-sampled data,
//! the reflection `f★(x) = f(-x)` and the `family:key=value` text format.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// `[a, b] -> [-b, -a]`; negation is exact so this is an involution.
    pub fn reflect(&self) -> Self {
        Self {
            a: -self.b,
            b: -self.a,
        }
    }
}

/// Uniform grid with `n_points` nodes on an interval, both endpoints included.
///
/// Nodes in the left half are measured from `a`, nodes in the right half
/// from `b`, and an odd grid's middle node is `(a + b) / 2`. With that layout
/// the reflected grid's nodes are the bitwise negations of the original ones
/// in reverse order, and `x_0 = a`, `x_{n-1} = b` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    interval: Interval,
    n_points: usize,
}

impl Grid {
    pub fn new(interval: Interval, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        let grid = Self { interval, n_points };
        if !(grid.h() > 0.0) {
            return Err(Error::InvalidGrid("spacing underflows to zero".into()));
        }
        Ok(grid)
    }

    pub fn on(a: f64, b: f64, n_points: usize) -> Result<Self> {
        Self::new(Interval::new(a, b)?, n_points)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        self.interval.len() / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        let last = self.n_points - 1;
        debug_assert!(i <= last);
        let (a, b) = (self.interval.a, self.interval.b);
        match (2 * i).cmp(&last) {
            std::cmp::Ordering::Less => a + i as f64 * self.h(),
            std::cmp::Ordering::Equal => 0.5 * (a + b),
            std::cmp::Ordering::Greater => b - (last - i) as f64 * self.h(),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    pub fn reflect(&self) -> Self {
        Self {
            interval: self.interval.reflect(),
            n_points: self.n_points,
        }
    }

    /// Index of the node within `h * 1e-9` of `x`.
    pub fn node_index(&self, x: f64) -> Result<usize> {
        if !self.interval.contains(x) {
            return Err(Error::OutOfInterval {
                x,
                a: self.interval.a,
                b: self.interval.b,
            });
        }
        let h = self.h();
        let guess = ((x - self.interval.a) / h).round() as usize;
        let i = guess.min(self.n_points - 1);
        if (self.node(i) - x).abs() <= h * 1e-9 {
            Ok(i)
        } else {
            Err(Error::OffNode { x })
        }
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }
}

/// Which endpoint a power function is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Anchor {
    /// `(x - a)^beta`
    Left,
    /// `(b - x)^beta`
    Right,
}

impl Anchor {
    pub fn mirror(self) -> Self {
        match self {
            Anchor::Left => Anchor::Right,
            Anchor::Right => Anchor::Left,
        }
    }
}

/// The fixed families of closed-form test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClosedFormFn {
    Const { value: f64 },
    Power { beta: f64, anchor: Anchor },
    /// Coefficients listed highest degree first.
    Poly { coeffs: Vec<f64> },
    /// `exp(rate * x)`
    Exp { rate: f64 },
    /// `sin(omega * x + phase)`
    Sin { omega: f64, phase: f64 },
    /// `cos(omega * x + phase)`
    Cos { omega: f64, phase: f64 },
}

pub(crate) fn falling_factorial(beta: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (beta - i as f64))
}

/// `d^k/dx^k` of `sin(theta)` (or `cos(theta)`) with unit frequency.
pub(crate) fn trig_phase_derivative(theta: f64, k: usize, cosine: bool) -> f64 {
    let (s, c) = theta.sin_cos();
    let shift = if cosine { k + 1 } else { k };
    match shift % 4 {
        0 => s,
        1 => c,
        2 => -s,
        _ => -c,
    }
}

/// Power of `base` to a non-negative integer, exact sign handling for zero.
fn powi(base: f64, k: usize) -> f64 {
    base.powi(k as i32)
}

/// Derivative of a polynomial (highest-first coefficients).
pub(crate) fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return vec![0.0];
    }
    coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (deg - i) as f64)
        .collect()
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

impl ClosedFormFn {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} must be finite")))
            }
        };
        match self {
            ClosedFormFn::Const { value } => finite(*value, "v"),
            ClosedFormFn::Power { beta, .. } => {
                finite(*beta, "beta")?;
                if *beta <= -1.0 {
                    return Err(Error::Domain(format!(
                        "power exponent beta = {beta} must exceed -1"
                    )));
                }
                Ok(())
            }
            ClosedFormFn::Poly { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Domain("polynomial needs a coefficient".into()));
                }
                coeffs.iter().try_for_each(|&c| finite(c, "c"))
            }
            ClosedFormFn::Exp { rate } => finite(*rate, "rate"),
            ClosedFormFn::Sin { omega, phase } | ClosedFormFn::Cos { omega, phase } => {
                finite(*omega, "omega")?;
                finite(*phase, "phase")
            }
        }
    }

    /// `k`-th classical derivative at `x`. Powers need the interval for their anchor.
    pub fn derivative(&self, k: usize, interval: &Interval, x: f64) -> f64 {
        match self {
            ClosedFormFn::Const { value } => {
                if k == 0 {
                    *value
                } else {
                    0.0
                }
            }
            ClosedFormFn::Power { beta, anchor } => {
                let ff = falling_factorial(*beta, k);
                if ff == 0.0 {
                    return 0.0;
                }
                match anchor {
                    Anchor::Left => ff * (x - interval.a()).powf(beta - k as f64),
                    Anchor::Right => {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        sign * ff * (interval.b() - x).powf(beta - k as f64)
                    }
                }
            }
            ClosedFormFn::Poly { coeffs } => {
                let mut c = coeffs.clone();
                for _ in 0..k {
                    c = poly_derivative(&c);
                }
                horner(&c, x)
            }
            ClosedFormFn::Exp { rate } => powi(*rate, k) * (rate * x).exp(),
            ClosedFormFn::Sin { omega, phase } => {
                powi(*omega, k) * trig_phase_derivative(omega * x + phase, k, false)
            }
            ClosedFormFn::Cos { omega, phase } => {
                powi(*omega, k) * trig_phase_derivative(omega * x + phase, k, true)
            }
        }
    }

    pub fn eval(&self, interval: &Interval, x: f64) -> f64 {
        self.derivative(0, interval, x)
    }

    /// Parameters of `x -> f(-x)` on the reflected interval.
    pub fn dual(&self) -> Self {
        match self {
            ClosedFormFn::Const { value } => ClosedFormFn::Const { value: *value },
            ClosedFormFn::Power { beta, anchor } => ClosedFormFn::Power {
                beta: *beta,
                anchor: anchor.mirror(),
            },
            ClosedFormFn::Poly { coeffs } => {
                let deg = coeffs.len() - 1;
                ClosedFormFn::Poly {
                    coeffs: coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| if (deg - i) % 2 == 1 { -c } else { c })
                        .collect(),
                }
            }
            ClosedFormFn::Exp { rate } => ClosedFormFn::Exp { rate: -rate },
            ClosedFormFn::Sin { omega, phase } => ClosedFormFn::Sin {
                omega: -omega,
                phase: *phase,
            },
            ClosedFormFn::Cos { omega, phase } => ClosedFormFn::Cos {
                omega: -omega,
                phase: *phase,
            },
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, ClosedFormFn::Power { .. })
    }
}

/// A closed-form function bound to its interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub func: ClosedFormFn,
    pub interval: Interval,
}

impl ClosedForm {
    pub fn new(func: ClosedFormFn, interval: Interval) -> Result<Self> {
        func.validate()?;
        Ok(Self { func, interval })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.func.eval(&self.interval, x)
    }

    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        self.func.derivative(k, &self.interval, x)
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.eval(x)).collect()
    }
}

/// Node values on a uniform grid. Never interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFn {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {i} is {}", values[i])));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.values[self.grid.node_index(x)?])
    }

    pub fn dual(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid.reflect(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FuncRep {
    Closed(ClosedForm),
    Sampled(SampledFn),
}

impl FuncRep {
    pub fn closed(func: ClosedFormFn, interval: Interval) -> Result<Self> {
        Ok(FuncRep::Closed(ClosedForm::new(func, interval)?))
    }

    pub fn interval(&self) -> Interval {
        match self {
            FuncRep::Closed(c) => c.interval,
            FuncRep::Sampled(s) => s.grid.interval(),
        }
    }

    /// Values at the nodes of `grid`; sampled functions must live on that grid.
    pub fn sample_on(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            FuncRep::Closed(c) => {
                if c.interval != grid.interval() {
                    return Err(Error::GridMismatch);
                }
                Ok(c.sample(grid))
            }
            FuncRep::Sampled(s) => {
                if s.grid != *grid {
                    return Err(Error::GridMismatch);
                }
                Ok(s.values.clone())
            }
        }
    }
}

/// `f★(x) = f(-x)` on `[-b, -a]`. Exact for both representations.
pub fn dual(f: &FuncRep) -> FuncRep {
    match f {
        FuncRep::Closed(c) => FuncRep::Closed(ClosedForm {
            func: c.func.dual(),
            interval: c.interval.reflect(),
        }),
        FuncRep::Sampled(s) => FuncRep::Sampled(s.dual()),
    }
}

pub fn eval(f: &FuncRep, x: f64) -> Result<f64> {
    match f {
        FuncRep::Closed(c) => {
            if !c.interval.contains(x) {
                return Err(Error::OutOfInterval {
                    x,
                    a: c.interval.a(),
                    b: c.interval.b(),
                });
            }
            Ok(c.eval(x))
        }
        FuncRep::Sampled(s) => s.eval(x),
    }
}

// ---------------------------------------------------------------------------
// funcspec text format

const FAMILIES: &str = "family name (const|pow|poly|exp|sin|cos)";

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn err(&self, expected: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            expected: expected.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8, what: &str) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(what)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_lowercase()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(what));
        }
        Ok(&self.text[start..self.pos])
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// `[+-]? (digits ('.' digits?)? | '.' digits) ([eE] [+-]? digits)?`
    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let int_digits = self.digits();
        let mut frac_digits = 0;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac_digits = self.digits();
        }
        if int_digits + frac_digits == 0 {
            self.pos = start;
            return Err(self.err("decimal literal"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(self.err("exponent digits"));
            }
        }
        self.text[start..self.pos]
            .parse::<f64>()
            .map_err(|_| Error::Parse {
                pos: start,
                expected: "decimal literal".into(),
            })
    }
}

fn scalar(params: &[(String, Vec<f64>, usize)], key: &str) -> Result<Option<f64>> {
    match params.iter().find(|(k, _, _)| k == key) {
        None => Ok(None),
        Some((_, v, _)) if v.len() == 1 => Ok(Some(v[0])),
        Some((_, _, pos)) => Err(Error::Parse {
            pos: *pos,
            expected: format!("a single value for key '{key}'"),
        }),
    }
}

/// Parses `family:key=value,...`, e.g. `pow:beta=0.5` or `poly:c=1,0,-2`.
pub fn parse_funcspec(text: &str) -> Result<ClosedFormFn> {
    if let Some(pos) = text.find(|c: char| c.is_whitespace()) {
        return Err(Error::Parse {
            pos,
            expected: "no whitespace".into(),
        });
    }
    let mut sc = Scanner { text, pos: 0 };
    let family_pos = sc.pos;
    let family = sc.ident(FAMILIES)?;
    let allowed: &[&str] = match family {
        "const" => &["v"],
        "pow" => &["beta", "anchor"],
        "poly" => &["c"],
        "exp" => &["rate"],
        "sin" | "cos" => &["omega", "phase"],
        _ => {
            return Err(Error::Parse {
                pos: family_pos,
                expected: FAMILIES.into(),
            })
        }
    };
    sc.eat(b':', "':'")?;

    let mut params: Vec<(String, Vec<f64>, usize)> = Vec::new();
    loop {
        let key_pos = sc.pos;
        let key = sc.ident("key")?;
        if !allowed.contains(&key) {
            return Err(Error::Parse {
                pos: key_pos,
                expected: format!("one of the keys {allowed:?} for family '{family}'"),
            });
        }
        if params.iter().any(|(k, _, _)| k == key) {
            return Err(Error::Parse {
                pos: key_pos,
                expected: format!("a key other than the repeated '{key}'"),
            });
        }
        sc.eat(b'=', "'='")?;
        let mut values = vec![sc.number()?];
        loop {
            match sc.peek() {
                None => {
                    params.push((key.to_string(), values, key_pos));
                    return build_family(family, &params, text.len());
                }
                Some(b',') => {
                    sc.pos += 1;
                    match sc.peek() {
                        Some(c) if c.is_ascii_lowercase() => break,
                        _ => values.push(sc.number()?),
                    }
                }
                Some(_) => return Err(sc.err("',' or end of input")),
            }
        }
        params.push((key.to_string(), values, key_pos));
    }
}

fn build_family(family: &str, params: &[(String, Vec<f64>, usize)], end: usize) -> Result<ClosedFormFn> {
    let required = |key: &str| -> Result<f64> {
        scalar(params, key)?.ok_or_else(|| Error::Parse {
            pos: end,
            expected: format!("required key '{key}'"),
        })
    };
    let f = match family {
        "const" => ClosedFormFn::Const {
            value: required("v")?,
        },
        "pow" => {
            let anchor = match scalar(params, "anchor")? {
                None => Anchor::Left,
                Some(v) if v == 0.0 => Anchor::Left,
                Some(v) if v == 1.0 => Anchor::Right,
                Some(v) => {
                    return Err(Error::Domain(format!(
                        "anchor must be 0 (left endpoint) or 1 (right endpoint), got {v}"
                    )))
                }
            };
            ClosedFormFn::Power {
                beta: required("beta")?,
                anchor,
            }
        }
        "poly" => ClosedFormFn::Poly {
            coeffs: params
                .iter()
                .find(|(k, _, _)| k == "c")
                .map(|(_, v, _)| v.clone())
                .ok_or_else(|| Error::Parse {
                    pos: end,
                    expected: "required key 'c'".into(),
                })?,
        },
        "exp" => ClosedFormFn::Exp {
            rate: required("rate")?,
        },
        "sin" | "cos" => {
            let omega = required("omega")?;
            let phase = scalar(params, "phase")?.unwrap_or(0.0);
            if family == "sin" {
                ClosedFormFn::Sin { omega, phase }
            } else {
                ClosedFormFn::Cos { omega, phase }
            }
        }
        _ => unreachable!("family validated by the caller"),
    };
    f.validate()?;
    Ok(f)
}

fn fmt_num(x: f64) -> String {
    let ax = x.abs();
    if ax == 0.0 || (1e-4..1e15).contains(&ax) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl fmt::Display for ClosedFormFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedFormFn::Const { value } => write!(f, "const:v={}", fmt_num(*value)),
            ClosedFormFn::Power { beta, anchor } => {
                write!(f, "pow:beta={}", fmt_num(*beta))?;
                if *anchor == Anchor::Right {
                    write!(f, ",anchor=1")?;
                }
                Ok(())
            }
            ClosedFormFn::Poly { coeffs } => {
                let list: Vec<String> = coeffs.iter().map(|&c| fmt_num(c)).collect();
                write!(f, "poly:c={}", list.join(","))
            }
            ClosedFormFn::Exp { rate } => write!(f, "exp:rate={}", fmt_num(*rate)),
            ClosedFormFn::Sin { omega, phase } | ClosedFormFn::Cos { omega, phase } => {
                let name = if matches!(self, ClosedFormFn::Sin { .. }) {
                    "sin"
                } else {
                    "cos"
                };
                write!(f, "{name}:omega={}", fmt_num(*omega))?;
                if *phase != 0.0 || phase.is_sign_negative() {
                    write!(f, ",phase={}", fmt_num(*phase))?;
                }
                Ok(())
            }
        }
    }
}

pub fn format_funcspec(f: &ClosedFormFn) -> String {
    f.to_string()
}
