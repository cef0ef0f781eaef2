//! Left and right Riemann–Liouville and Caputo fractional operators.
//!
//! The crate evaluates the six operators (left/right × RL integral, RL
//! derivative, Caputo derivative) on closed-form test functions, where the
//! power rule gives values to rounding, and on sampled grid data, where
//! product-trapezoid and L1 schemes are used. Around them sit executable
//! checkers for left/right duality ([`duality`]), the fractional
//! integration-by-parts formulas ([`ibp`]) and a right-fractional
//! variational toolkit with a direct-method minimizer ([`varcalc`]).

pub mod duality;
pub mod error;
pub mod fracops;
pub mod gridfn;
pub mod ibp;
pub mod par;
pub mod varcalc;

pub use error::{Error, Result};
pub use fracops::{
    apply, apply_with, gamma, rl_from_caputo, ApplyOptions, FracOrder, Method, OpKind,
    OperatorKind, OperatorResult, PathChoice, Side,
};
pub use gridfn::{
    dual, eval, format_funcspec, parse_funcspec, Anchor, ClosedForm, ClosedFormFn, FuncRep,
    Grid, Interval, SampledFn,
};
pub use par::Exec;
