use std::f64::consts::PI;

use super::*;
use crate::quad::{integrate, integrate_to_inf};

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate(f, a, b, 1e-14, 1e-13, 20_000).unwrap().value
}

fn quad_inf(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    integrate_to_inf(f, a, 1e-14, 1e-12, 20_000).unwrap().value
}

fn cauchy() -> LevyMeasure {
    LevyMeasure::new(LevyMeasureSpec::cauchy()).unwrap()
}

fn dyadic() -> LevyMeasure {
    LevyMeasure::new(LevyMeasureSpec::dyadic(1.0, 1.0)).unwrap()
}

/// Direct summation over atoms `±2^{-n}`, weight `2^n`.
fn atom_sum(f: impl Fn(f64) -> f64) -> f64 {
    (-60..400).map(|n: i32| 2f64.powi(n) * 2.0 * f(2f64.powi(-n))).sum()
}

#[test]
fn cauchy_lower_integral() {
    let r = validate(&LevyMeasureSpec::cauchy()).unwrap();
    assert!((r.lower_integral - 4.0 / PI).abs() < 1e-14);
    let oracle = 2.0 / PI * (quad(|_| 1.0, 0.0, 1.0) + quad_inf(|u| u.powi(-2), 1.0));
    assert!((r.lower_integral - oracle).abs() < 1e-10);
    assert_eq!(r.divergence.method, "analytic");
}

#[test]
fn out_of_range_parameters_rejected() {
    let bad = LevyMeasureSpec::power_law(2.5, 1.0);
    assert!(matches!(validate(&bad), Err(LevyError::InvalidParameters(_))));
    let bad = LevyMeasureSpec::dyadic(2.0, 1.0);
    assert!(matches!(validate(&bad), Err(LevyError::InvalidParameters(_))));
    let bad = LevyMeasureSpec::power_law(1.0, -1.0);
    assert!(validate(&bad).is_err());
}

#[test]
fn finite_activity_table_rejected() {
    let points: Vec<[f64; 2]> = (0..50)
        .map(|i| {
            let u = 1e-3 * 1.2f64.powi(i);
            [u, u.powf(-0.5)]
        })
        .collect();
    let spec = LevyMeasureSpec {
        kind: MeasureKind::TabulatedDensity {
            points,
            symmetric_extension: true,
            tail_exponent: Some(1.0),
        },
        drift_a: 0.0,
        symmetric: true,
    };
    assert!(matches!(validate(&spec), Err(LevyError::FiniteActivity { .. })));
}

#[test]
fn declared_symmetry_is_checked() {
    let points = vec![[1e-3, 1e6], [1.0, 1.0]];
    let spec = LevyMeasureSpec {
        kind: MeasureKind::TabulatedDensity {
            points,
            symmetric_extension: false,
            tail_exponent: None,
        },
        drift_a: 0.0,
        symmetric: true,
    };
    assert!(validate(&spec).is_err());
}

#[test]
fn cauchy_primitives_match_quadrature() {
    let m = cauchy();
    let dens = |u: f64| u.powi(-2) / PI;
    assert!((m.truncated_second_moment(1.0) - 2.0 / PI).abs() < 1e-15);
    let oracle = 2.0 * quad(|u| u * u * dens(u), 0.0, 1.0);
    assert!((m.truncated_second_moment(1.0) - oracle).abs() < 1e-10 * oracle);
    assert!((m.tail_mass(1.0) - 2.0 / PI).abs() < 1e-15);
    let oracle = 2.0 * quad_inf(dens, 1.0);
    assert!((m.tail_mass(1.0) - oracle).abs() < 1e-10 * oracle);
}

#[test]
fn dyadic_primitives_match_atom_sums() {
    let m = dyadic();
    assert!((m.truncated_second_moment(0.125) - 0.5).abs() < 1e-15);
    assert!((m.tail_mass(1.0) - 2.0).abs() < 1e-14);
    let oracle = atom_sum(|u| if u <= 0.125 { u * u } else { 0.0 });
    assert!((m.truncated_second_moment(0.125) - oracle).abs() < 1e-14);
    // strict cut |ξu| < 1: the atom at 1/8 is excluded at ξ = 8 itself and
    // included just below it
    assert!((m.psi_l(8.0) - 16.0).abs() < 1e-12);
    let below = 8.0 * (1.0 - 1e-12);
    assert!((m.psi_l(below) - 32.0).abs() < 1e-9);
    let oracle = below * below * atom_sum(|u| if below * u < 1.0 { u * u } else { 0.0 });
    assert!((m.psi_l(below) - oracle).abs() < 1e-12);
    // ψ^U − ψ^L counts the atoms with |ξu| ≥ 1
    let xi = 8.0;
    let oracle = atom_sum(|u| if xi * u >= 1.0 { 1.0 } else { 0.0 });
    assert!((m.psi_u(xi) - m.psi_l(xi) - oracle).abs() < 1e-12);
}

#[test]
fn dyadic_orey_sandwich() {
    let m = dyadic();
    for k in -10..40 {
        let eps = 2f64.powi(-k);
        let v = m.truncated_second_moment(eps);
        assert!(v >= 2.0 * eps * (1.0 - 1e-12) && v <= 4.0 * eps * (1.0 + 1e-12), "k={k}: {v}");
    }
    let m = LevyMeasure::new(LevyMeasureSpec::dyadic(1.5, 1.0)).unwrap();
    let ratios: Vec<f64> = (0..30)
        .map(|j| {
            let eps = 2f64.powi(-j);
            m.truncated_second_moment(eps) / eps.powf(0.5)
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.0 + 1e-9, "constant ratio on dyadic eps: {lo} {hi}");
}

#[test]
fn cauchy_exponents() {
    let m = cauchy();
    let xi = 3.7;
    assert!((m.psi_u(xi) - m.psi_l(xi) - 2.0 / PI * xi).abs() < 1e-13);
    assert!((m.re_psi(5.0).unwrap() - 5.0).abs() < 1e-13);
    assert_eq!(m.im_psi(5.0).unwrap(), 0.0);
    assert_eq!(m.psi_l(0.0), 0.0);
    assert_eq!(m.psi_u(0.0), 0.0);
    assert_eq!(m.re_psi(0.0).unwrap(), 0.0);
}

#[test]
fn stable_normalization_matches_quadrature() {
    let m = LevyMeasure::new(LevyMeasureSpec::stable(1.5)).unwrap();
    assert!((m.re_psi(2.0).unwrap() - 2f64.powf(1.5)).abs() < 1e-13);
    let c = stable_normalization(1.5);
    // ∫(1 − cos 2u) C u^{-2.5} du over u > 0, per half period up to A, then
    // the non-oscillating part beyond A (the cosine part there is below A^{-2.5})
    let f = |u: f64| 2.0 * u.sin().powi(2) * c * u.powf(-2.5);
    let big_a = 2000.0 * PI;
    let mut head = integrate(f, 0.0, PI, 1e-13, 1e-12, 20_000).unwrap().value;
    for j in 1..2000 {
        let a = j as f64 * PI;
        head += quad(f, a, a + PI);
    }
    let tail = c * big_a.powf(-1.5) / 1.5;
    let oracle = 2.0 * (head + tail);
    assert!((oracle - 2f64.powf(1.5)).abs() < 1e-6, "{oracle}");
}

/// A table describing the stable density exactly must reproduce the closed
/// forms through the generic piecewise code.
#[test]
fn tabulated_power_law_matches_closed_form() {
    let alpha = 1.5;
    let c = stable_normalization(alpha);
    let points: Vec<[f64; 2]> = (0..=90)
        .map(|i| {
            let u = 10f64.powf(-6.0 + i as f64 / 10.0);
            [u, c * u.powf(-1.0 - alpha)]
        })
        .collect();
    let spec = LevyMeasureSpec {
        kind: MeasureKind::TabulatedDensity {
            points,
            symmetric_extension: true,
            tail_exponent: None,
        },
        drift_a: 0.0,
        symmetric: true,
    };
    let tab = LevyMeasure::new(spec).unwrap();
    let exact = LevyMeasure::new(LevyMeasureSpec::stable(alpha)).unwrap();
    for &xi in &[1e-3, 0.3, 1.0, 7.0, 1e3, 1e5] {
        let (a, b) = (tab.re_psi(xi).unwrap(), exact.re_psi(xi).unwrap());
        assert!((a / b - 1.0).abs() < 1e-9, "xi={xi}: {a} vs {b}");
        assert!((tab.psi_l(xi) / exact.psi_l(xi) - 1.0).abs() < 1e-10);
        assert!((tab.psi_u(xi) / exact.psi_u(xi) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn asymmetric_imaginary_part_matches_quadrature() {
    // one-sided density u^{-1.5} on (0, ∞)
    let points = vec![[1e-4, 1e6], [1.0, 1.0]];
    let spec = LevyMeasureSpec {
        kind: MeasureKind::TabulatedDensity {
            points,
            symmetric_extension: false,
            tail_exponent: Some(0.5),
        },
        drift_a: 0.3,
        symmetric: false,
    };
    let m = LevyMeasure::new(spec).unwrap();
    assert!(!m.is_symmetric());
    let xi = 2.5;
    let dens = |u: f64| u.powf(-1.5);
    let inner = quad(|u| (xi * u - (xi * u).sin()) * dens(u), 0.0, 1.0);
    // ∫₁^∞ sin(ξu) u^{-1.5} by sine-integral style splitting on half periods
    let period = PI / xi;
    let mut outer = quad(|u| (xi * u).sin() * dens(u), 1.0, 40.0 * period);
    let mut a = 40.0 * period;
    let mut terms = Vec::new();
    for _ in 0..4000 {
        terms.push(quad(|u| (xi * u).sin() * dens(u), a, a + period));
        a += period;
    }
    // alternating tail: average of partial sums accelerates convergence
    let s: f64 = terms.iter().sum();
    outer += s + 0.5 * terms.last().unwrap() * -1.0;
    let oracle = 0.3 * xi + inner - outer;
    let got = m.im_psi(xi).unwrap();
    assert!((got - oracle).abs() < 1e-6 * oracle.abs().max(1.0), "{got} vs {oracle}");
    assert!((m.im_psi(-xi).unwrap() + got).abs() < 1e-14 * got.abs());
}

#[test]
fn truncated_exponent_and_shift() {
    let m = cauchy();
    let (t, xi) = (0.1, 10.0);
    let r = t; // ρ_t = 1/t
    let psi_t = m.psi_truncated(t, r, xi).unwrap();
    assert_eq!(psi_t.im, 0.0);
    let dens = |u: f64| u.powi(-2) / PI;
    let oracle = t * 2.0 * quad(|u| 2.0 * (0.5 * xi * u).sin().powi(2) * dens(u), 0.0, r);
    assert!((psi_t.re - oracle).abs() < 1e-6 * oracle);
    assert!(psi_t.re <= t * m.re_psi(xi).unwrap());
    assert_eq!(m.shift(t, r), 0.0);
}

#[test]
fn spec_json_roundtrip() {
    for spec in [
        LevyMeasureSpec::cauchy(),
        LevyMeasureSpec::dyadic(1.5, 1.0),
        LevyMeasureSpec::oscillating(0.8, 1.6),
    ] {
        let s = serde_json::to_string(&spec).unwrap();
        let back: LevyMeasureSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }
    let parsed: LevyMeasureSpec = serde_json::from_str(
        r#"{"kind": "PowerLaw", "drift_a": 0.0, "symmetric": true, "params": {"alpha": 1.0, "c_alpha": 0.3183098861837907}}"#,
    )
    .unwrap();
    assert_eq!(parsed, LevyMeasureSpec::cauchy());
    assert_eq!(parsed.hash_hex(), LevyMeasureSpec::cauchy().hash_hex());
}

#[test]
fn oscillating_ratio_band() {
    let spec = LevyMeasureSpec::oscillating(0.8, 1.6);
    let m = LevyMeasure::new(spec).unwrap();
    for i in 0..=60 {
        let xi = 10f64.powf(-2.0 + i as f64 / 10.0);
        let ratio = m.psi_u(xi) / m.psi_l(xi);
        assert!(ratio >= 2.0 / 1.6 - 0.05 && ratio <= 2.0 / 0.8 + 0.05, "xi={xi}: {ratio}");
    }
}

#[test]
fn oscillating_psi_at_tiny_frequencies_follows_the_tail() {
    let m = LevyMeasure::new(LevyMeasureSpec::oscillating(0.8, 1.6)).unwrap();
    // tail exponent α(0) = (0.8 + 1.6)/2
    let kappa = 1.2;
    let a = m.re_psi(2f64.powi(-80)).unwrap();
    let b = m.re_psi(2f64.powi(-100)).unwrap();
    assert!(a > 0.0 && b > 0.0);
    assert!((b / a / 2f64.powf(-20.0 * kappa) - 1.0).abs() < 1e-6, "{a} {b}");
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn primitives_are_monotone(alpha in 0.2f64..1.9, e1 in -6.0f64..6.0, d in 0.01f64..3.0) {
            let m = LevyMeasure::new(LevyMeasureSpec::stable(alpha)).unwrap();
            let (a, b) = (10f64.powf(e1), 10f64.powf(e1 + d));
            prop_assert!(m.truncated_second_moment(a) <= m.truncated_second_moment(b));
            prop_assert!(m.tail_mass(a) >= m.tail_mass(b));
            let dy = dyadic();
            prop_assert!(dy.truncated_second_moment(a) <= dy.truncated_second_moment(b));
            prop_assert!(dy.tail_mass(a) >= dy.tail_mass(b));
        }

        #[test]
        fn symmetric_odd_moments_vanish(x in -3.0f64..3.0) {
            let dy = dyadic();
            let r = 10f64.powf(x);
            prop_assert_eq!(dy.signed_moment(1.0, URange::open(r, 1.0 + r)), 0.0);
            prop_assert_eq!(dy.im_psi(r).unwrap(), 0.0);
        }
    }
}

