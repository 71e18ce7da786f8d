use super::*;
use crate::decomposition::build;
use crate::fourier::{DensityOptions, Fourier};
use crate::measure::{LevyMeasure, LevyMeasureSpec};

fn cauchy() -> LevyMeasure {
    LevyMeasure::new(LevyMeasureSpec::cauchy()).unwrap()
}

#[test]
fn cauchy_series_needs_twelve_terms() {
    let lambda = 2.0 / std::f64::consts::PI;
    let m = series_m_max(lambda, 1e-10);
    assert_eq!(m + 1, 12);
    assert!(series_tail(lambda, m) <= 1e-10);
    assert!(series_tail(lambda, m - 1) > 1e-10);
    let direct: f64 = (m + 1..60).map(|k| lambda.powi(k as i32) / (1..=k).map(|j| j as f64).product::<f64>()).sum();
    assert!((series_tail(lambda, m) - direct).abs() <= 1e-12 * direct);
}

#[test]
fn kernel_conv_matches_direct_sums() {
    let half = 300;
    let series: Vec<f64> = (0..=2 * half).map(|i| ((i * 7919) % 101) as f64 / 101.0).collect();
    let step = 0.037;
    for shape in [
        Shape::Upper { b1: 1.3, b2: 0.7 },
        Shape::UpperSym { b1: 0.9, b2: 0.4 },
        Shape::Lower { b3: 2.0, b4: 0.5 },
    ] {
        let out = 40;
        let c = kernel_conv(&series, half, out, shape, step);
        for (n, ci) in c.iter().enumerate() {
            let i = n as i64 - out as i64;
            let direct: f64 = series
                .iter()
                .enumerate()
                .map(|(j, s)| s * shape.eval((i - (j as i64 - half as i64)) as f64 * step))
                .sum();
            assert!((ci - direct).abs() <= 1e-10 * direct.abs().max(1.0), "{shape:?} at {i}: {ci} vs {direct}");
        }
    }
}

#[test]
fn compound_eval_is_monotone_and_has_the_delta_term() {
    let m = cauchy();
    let dec = build(&m, 0.1).unwrap();
    let at = |b1, b2, m_max| {
        let p = CompoundKernelParams { sigma: dec.rho_t, shape: Shape::Upper { b1, b2 }, zeta: dec.rho_t, m_max };
        compound_eval(&m, &p, &dec, 0.3).unwrap()
    };
    let base = at(1.0, 1.0, 12);
    assert!(at(2.0, 1.0, 12) > base);
    assert!(at(1.0, 2.0, 12) < base);
    assert!(at(1.0, 1.0, 14) >= base);
    // the m = 0 term alone is ρ_t h(ρ_t x)
    assert!(base > dec.rho_t * (-dec.rho_t * 0.3f64).exp());

    let p = CompoundKernelParams { sigma: 1.0, shape: Shape::Upper { b1: 1.0, b2: 1.0 }, zeta: 1.0, m_max: 0 };
    assert!(matches!(compound_eval(&m, &p, &dec, 0.0), Err(LevyError::TruncationInsufficient { .. })));
}

#[test]
fn dyadic_lower_kernel_sees_the_atom() {
    let m = LevyMeasure::new(LevyMeasureSpec::dyadic(1.0, 1.0)).unwrap();
    let t = 2f64.powi(-6);
    let dec = build(&m, t).unwrap();
    let b3 = 0.7;
    let params = CompoundKernelParams::for_decomposition(&dec, 0, Shape::Lower { b3, b4: 0.5 }, 1e-10);
    for n in 0..3 {
        let x = 2f64.powi(-n);
        if x <= dec.cut {
            continue;
        }
        let v = compound_eval(&m, &params, &dec, x).unwrap();
        let atom = t * 2f64.powi(n);
        assert!(v >= dec.rho_t * b3 * atom * (1.0 - 1e-12), "n = {n}: {v}");
    }
}

#[test]
fn cauchy_density_precondition_gives_one_over_pi() {
    let m = cauchy();
    let pre = check_precondition(&m, &[1e-3, 1e-2, 0.1, 1.0], TailSpec::ParetoDensity { alpha: 1.0, scale: 1.0 }).unwrap();
    assert!((pre.c - 1.0 / std::f64::consts::PI).abs() < 1e-9, "{}", pre.c);
}

#[test]
fn degenerate_tail_fails_the_precondition() {
    let m = cauchy();
    let r = check_precondition(&m, &[0.1], TailSpec::Dirac);
    assert!(matches!(r, Err(LevyError::PreconditionFailed { .. })));
}

#[test]
fn too_light_tail_fails_the_precondition() {
    let m = LevyMeasure::new(LevyMeasureSpec::stable(1.5)).unwrap();
    let r = check_precondition(&m, &[0.1, 1.0], TailSpec::ParetoCdf { alpha: 2.0 });
    assert!(matches!(r, Err(LevyError::PreconditionFailed { .. })), "{r:?}");
}

#[test]
fn pareto_tails_pass_the_spot_checks() {
    for tail in [TailSpec::ParetoDensity { alpha: 1.0, scale: 1.0 }, TailSpec::ParetoCdf { alpha: 1.5 }] {
        let s = subexponential_spot_check(tail).unwrap();
        assert_eq!(s.verdict, Verdict::Pass, "{s:?}");
        let first = s.convolution[0].1;
        let last = s.convolution[2].1;
        assert!((last - 1.0).abs() < (first - 1.0).abs(), "{s:?}");
    }
    assert_eq!(subexponential_spot_check(TailSpec::Dirac).unwrap().verdict, Verdict::Fail);
}

#[test]
fn ik_for_cauchy_is_bounded() {
    let m = cauchy();
    let ts = crate::report::log_space(1e-4, 1.0, 9);
    let r = ik_diagnostic(&m, &ts, 0, 1.0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!((r.sup_refined - r.sup) / r.sup < 0.01);
}

#[test]
fn ik_comparison_bound() {
    // ψ^U(y) ≥ (2/π)|y| for Cauchy, so λ = π/2 makes λψ^U(y) ≥ |y| and I₀(1) ≤ 2
    let m = cauchy();
    let r = ik_diagnostic(&m, &[1.0], 0, std::f64::consts::FRAC_PI_2).unwrap();
    let rho1 = build(&m, 1.0).unwrap().rho_t;
    assert!(r.rows[0].1 * rho1 <= 2.0 + 1e-9, "{:?}", r.rows);
}

#[test]
fn small_cauchy_fits_pass() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap().options(DensityOptions { alias_tol: 1e-5, ..Default::default() });
    let mut cfg = BoundsConfig::new(0.01, 1.0, 3);
    cfg.x_per_cut = 10;
    cfg.x_span = 10.0;
    let needs = Needs { derivs: vec![1], lower: true, bar: false };
    let ctx = BoundsContext::build(&f, cfg, &needs).unwrap();
    let up = fit_compound_upper(&ctx, None).unwrap();
    assert_eq!(up.verdict, Verdict::Pass);
    assert!(up.min_margin >= -MARGIN_SLACK);
    // at x = 0 the envelope carries at least the peak 1/(πt)
    let row = up.margins.iter().find(|r| r.x == 0.0 && r.t == 1.0).unwrap();
    assert!(row.bound >= 1.0 / std::f64::consts::PI);
    let low = fit_compound_lower(&ctx, None).unwrap();
    assert_eq!(low.verdict, Verdict::Pass);
    assert!(low.constant("b3").unwrap() > 0.0);
    let d = fit_derivative_upper(&ctx, None, 1).unwrap();
    assert_eq!(d.verdict, Verdict::Pass);
    assert!(d.to_json().unwrap().contains("\"deriv_upper\""));
    assert!(up.margins_csv().starts_with("t,x,value,bound,margin\n"));
}

#[test]
fn on_diagonal_constants_for_cauchy() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let c = fit_on_diagonal(&f, &[0.01, 0.1, 1.0], true).unwrap();
    let pi = std::f64::consts::PI;
    assert!((c.constant("c").unwrap() - 1.0 / pi).abs() < 1e-6);
    assert!((c.constant("d").unwrap() - 1.0 / pi).abs() < 1e-6);
    assert_eq!(c.verdict, Verdict::Pass);
}

#[test]
fn refined_config_doubles_resolution() {
    let cfg = BoundsConfig::new(1e-3, 1.0, 4);
    let r = cfg.refined();
    assert_eq!(r.t_grid.len(), 7);
    assert_eq!(r.x_per_cut, 2 * cfg.x_per_cut);
    assert!((r.t_grid[1] - (cfg.t_grid[0] * cfg.t_grid[1]).sqrt()).abs() < 1e-15);
}
