//! Fractional integration by parts: residuals, boundary sums and the dual
//! pair.

mod common;

use common::*;
use fracdual::ibp::{boundary_operator, check_ibp, check_ibp_left, check_ibp_right, doubling_sizes, ibp_study, IbpVariant};
use fracdual::{dual, parse_funcspec, FracOrder, Side};
use proptest::prelude::*;

fn order(alpha: f64) -> FracOrder {
    FracOrder::new(alpha).unwrap()
}

#[test]
fn boundary_order_below_zero_is_an_integral() {
    let g = closed("exp:rate=0.4", 0.0, 1.0);
    let grid = grid(0.0, 1.0, 9);
    let func = parse_funcspec("exp:rate=0.4").unwrap();
    for side in [Side::Left, Side::Right] {
        let r = boundary_operator(-0.5, &g, &grid, side).unwrap();
        for (i, x) in grid.nodes().into_iter().enumerate() {
            let want = integral_oracle(side == Side::Left, 0.5, &func, 0.0, 1.0, x);
            assert!((r.values[i] - want).abs() < 1e-12, "{side:?} {x}");
        }
    }
}

#[test]
fn second_order_boundary_sum_matches_expansion() {
    // n = 2, right variant: S = [I_a^0.5 g * (-f') + D_a^0.5 g * f]_a^b with
    // g = (x - a)^3, which vanishes with both operators at a
    let (a, b) = (0.0, 1.0);
    let f = closed("poly:c=1,-0.5,2", a, b);
    let g = closed("pow:beta=3", a, b);
    let r = check_ibp_right(order(1.5), &f, &g, &grid(a, b, 129)).unwrap();
    let i_half = integral_oracle(true, 0.5, &parse_funcspec("pow:beta=3").unwrap(), a, b, b);
    let d_half = gamma(4.0) / gamma(3.5);
    let (fb, dfb) = (1.0 - 0.5 + 2.0, 2.0 - 0.5);
    let want = -i_half * dfb + d_half * fb;
    assert!((r.boundary_sum - want).abs() < 1e-12, "{} vs {want}", r.boundary_sum);
}

#[test]
fn boundary_sum_vanishes_with_f() {
    let g = closed("sin:omega=2,phase=0.3", 0.0, 1.0);
    let grid = grid(0.0, 1.0, 65);
    // x(1 - x) for n = 1 and x^2 (1 - x)^2 for n = 2
    for (spec, alpha) in [("poly:c=-1,1,0", 0.5), ("poly:c=1,-2,1,0,0", 1.5)] {
        let f = closed(spec, 0.0, 1.0);
        for variant in [IbpVariant::Left, IbpVariant::Right] {
            let r = check_ibp(variant, order(alpha), &f, &g, &grid).unwrap();
            assert_eq!(r.boundary_sum, 0.0, "{spec} {variant:?}");
        }
    }
}

#[test]
fn reflected_power_pair_balances() {
    let f = closed("pow:beta=2,anchor=1", 0.0, 1.0);
    let g = closed("pow:beta=2", 0.0, 1.0);
    for n in doubling_sizes(129, 513) {
        let r = check_ibp_right(order(0.5), &f, &g, &grid(0.0, 1.0, n)).unwrap();
        assert!(r.residual.abs() < 1e-12 * r.lhs.abs().max(1.0), "{r:?}");
    }
}

#[test]
fn polynomial_pair_converges() {
    let f = closed("poly:c=1,-0.5,2", 0.0, 1.0);
    let g = closed("poly:c=1,1", 0.0, 1.0);
    for variant in [IbpVariant::Left, IbpVariant::Right] {
        let s = ibp_study(variant, order(0.5), &f, &g, &doubling_sizes(129, 1025)).unwrap();
        assert!(s.min_order() >= 1.0, "{s:?}");
        assert!(s.residuals.windows(2).all(|r| r[1].abs() < r[0].abs()), "{s:?}");
    }
}

#[test]
fn classical_case_is_tight() {
    let f = closed("exp:rate=0.9", -1.0, 1.0);
    let g = closed("poly:c=3,0,-1", -1.0, 1.0);
    for variant in [IbpVariant::Left, IbpVariant::Right] {
        let r = check_ibp(variant, order(1.0), &f, &g, &grid(-1.0, 1.0, 1025)).unwrap();
        assert!(r.residual.abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn divergent_boundary_is_reported() {
    // n = 2 needs D^0.5 g at the anchor, infinite for g(a) != 0, against f(a) != 0
    let f = closed("poly:c=1,-0.5,2", 0.0, 1.0);
    let g = closed("poly:c=1,1", 0.0, 1.0);
    let e = check_ibp_right(order(1.5), &f, &g, &grid(0.0, 1.0, 33)).unwrap_err();
    assert!(matches!(e, fracdual::Error::DivergentBoundary(_)), "{e}");
}

fn poly() -> impl Strategy<Value = String> {
    prop::collection::vec(-2.0f64..2.0, 1..5)
        .prop_map(|c| format!("poly:c={}", c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_pair_has_equal_residuals(fs in poly(), gs in poly(), alpha in 0.05f64..1.0, a in -1.0f64..0.5, len in 0.3f64..2.0) {
        let b = a + len;
        let (f, g) = (closed(&fs, a, b), closed(&gs, a, b));
        let mesh = grid(a, b, 65);
        let right = check_ibp_right(order(alpha), &f, &g, &mesh).unwrap();
        let left = check_ibp_left(order(alpha), &dual(&f), &dual(&g), &mesh.reflect()).unwrap();
        let scale = 1.0 + right.lhs.abs() + right.rhs_integral.abs();
        prop_assert!((left.residual - right.residual).abs() <= 1e-12 * scale, "{} vs {}", left.residual, right.residual);
        prop_assert!((left.boundary_sum + right.boundary_sum).abs() <= 1e-12 * scale);
    }
}
