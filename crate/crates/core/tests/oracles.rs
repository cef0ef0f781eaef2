//! The oracles themselves, checked against textbook integrals before they are
//! trusted elsewhere.

mod common;

use common::*;
use fracdual::ClosedFormFn;

#[test]
fn tanh_sinh_handles_endpoint_singularities() {
    // ∫_0^1 t^(-1/2) = 2, ∫_0^1 (t(1-t))^(-1/2) = π
    let v = tanh_sinh(|_, ta, _| ta.powf(-0.5), 0.0, 1.0);
    assert!((v - 2.0).abs() < 1e-14, "{v}");
    let v = tanh_sinh(|_, ta, tb| (ta * tb).powf(-0.5), 0.0, 1.0);
    assert!((v - std::f64::consts::PI).abs() < 1e-14, "{v}");
    // strong singularity: ∫_0^1 t^(-0.95) = 20
    let v = tanh_sinh(|_, ta, _| ta.powf(-0.95), 0.0, 1.0);
    assert!((v - 20.0).abs() < 1e-11, "{v}");
}

#[test]
fn tanh_sinh_on_smooth_integrands() {
    let v = tanh_sinh(|t, _, _| t.exp(), -1.0, 2.0);
    assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-14);
    let v = tanh_sinh(|t, _, _| (3.0 * t).sin(), 0.0, 5.0);
    assert!((v - (1.0 - 15f64.cos()) / 3.0).abs() < 1e-14);
}

#[test]
fn oracle_gamma_values() {
    assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
    assert!((gamma(5.0) - 24.0).abs() < 1e-12);
}

#[test]
fn integral_oracle_on_beta_integrals() {
    // I_0^alpha t^beta at x = Γ(β+1)/Γ(β+1+α) x^(β+α)
    let f = ClosedFormFn::Power { beta: 1.5, anchor: fracdual::Anchor::Left };
    for alpha in [0.2, 0.5, 1.7] {
        let x: f64 = 0.8;
        let want = gamma(2.5) / gamma(2.5 + alpha) * x.powf(1.5 + alpha);
        let got = integral_oracle(true, alpha, &f, 0.0, 1.0, x);
        assert!((got - want).abs() < 1e-13, "{alpha}: {got} {want}");
    }
}

#[test]
fn rl_derivative_oracle_of_identity() {
    // D_0^alpha t = t^(1-alpha)/Γ(2-alpha)
    let f = ClosedFormFn::Power { beta: 1.0, anchor: fracdual::Anchor::Left };
    for alpha in [0.3, 0.5, 0.8] {
        let x: f64 = 0.6;
        let want = x.powf(1.0 - alpha) / gamma(2.0 - alpha);
        let got = rl_derivative_oracle(true, alpha, &f, 0.0, 1.0, x);
        assert!((got - want).abs() < 1e-10, "{alpha}: {got} {want}");
    }
}

#[test]
fn family_derivatives_match_differences() {
    let fns = [
        ClosedFormFn::Poly { coeffs: vec![1.0, -2.0, 0.5, 3.0] },
        ClosedFormFn::Exp { rate: -1.3 },
        ClosedFormFn::Sin { omega: 2.0, phase: 0.4 },
        ClosedFormFn::Cos { omega: 3.0, phase: -0.2 },
    ];
    for f in &fns {
        let t = 0.37;
        let h = 1e-5;
        let fd = (family_derivative(f, 0, t + h, 0.0, 0.0) - family_derivative(f, 0, t - h, 0.0, 0.0)) / (2.0 * h);
        assert!((fd - family_derivative(f, 1, t, 0.0, 0.0)).abs() < 1e-8);
    }
}
