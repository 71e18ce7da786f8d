use std::f64::consts::PI;

use super::*;
use crate::decomposition::build;
use crate::measure::LevyMeasureSpec;
use crate::quad::integrate_to_inf;
use crate::report::lin_space;

fn cauchy() -> LevyMeasure {
    LevyMeasure::new(LevyMeasureSpec::cauchy()).unwrap()
}

fn cauchy_density(t: f64, x: f64) -> f64 {
    t / (PI * (t * t + x * x))
}

#[test]
fn stretched_tail_matches_quadrature() {
    for &(a, q, k, xi) in &[(0.3, 1.0, 0usize, 2.0), (0.05, 0.7, 1, 10.0), (2.0, 2.0 / 3.0, 2, 1.0)] {
        let closed = stretched_exp_tail(a, q, k, xi);
        let f = |s: f64| s.powi(k as i32) * (-a * s.powf(q)).exp() / PI;
        let num = integrate_to_inf(f, xi, 1e-14, 1e-11, 2000).unwrap().value;
        assert!((closed - num).abs() <= 1e-9 * num, "{a} {q} {k}: {closed} vs {num}");
    }
}

#[test]
fn cauchy_point_values() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let g = f.density(0.1, &[0.0, 0.2], 0).unwrap();
    assert!((g.values[0] - 1.0 / (PI * 0.1)).abs() < 1e-6 * g.values[0]);
    assert!((g.values[1] - 0.1 / (PI * 0.05)).abs() < 1e-6 * g.values[1]);
    assert!(g.tail_bound <= 1e-10 * g.max_abs());
}

#[test]
fn cauchy_grid_closed_form() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let t = 0.1;
    let xs = lin_space(-20.0 * t, 20.0 * t, 401);
    let g = f.density(t, &xs, 0).unwrap();
    let worst = xs
        .iter()
        .zip(&g.values)
        .map(|(&x, &v)| ((v - cauchy_density(t, x)) / cauchy_density(t, x)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max relative error {worst:e}");
}

#[test]
fn derivatives_match_closed_form_and_differences() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let t = 0.1;
    let xs = lin_space(-1.0, 1.0, 201);
    let d1 = f.density(t, &xs, 1).unwrap();
    let d2 = f.density(t, &xs, 2).unwrap();
    assert!(d1.values[100].abs() <= 1e-10 * d1.max_abs());
    let exact1 = |x: f64| -2.0 * t * x / (PI * (t * t + x * x).powi(2));
    let exact2 = |x: f64| 2.0 * t * (3.0 * x * x - t * t) / (PI * (t * t + x * x).powi(3));
    for (i, &x) in xs.iter().enumerate() {
        if d1.values[i].abs() > 1e-3 * d1.max_abs() {
            assert!((d1.values[i] - exact1(x)).abs() <= 1e-5 * exact1(x).abs(), "k=1 at {x}");
        }
        if d2.values[i].abs() > 1e-3 * d2.max_abs() {
            assert!((d2.values[i] - exact2(x)).abs() <= 1e-5 * exact2(x).abs(), "k=2 at {x}");
        }
    }
    // central differences of the k = 0 output
    let hstep = 1e-4;
    let pts: Vec<f64> = xs.iter().flat_map(|&x| [x - hstep, x + hstep]).collect();
    let p = f.density(t, &pts, 0).unwrap();
    for (i, _) in xs.iter().enumerate().skip(1).take(199) {
        let fd = (p.values[2 * i + 1] - p.values[2 * i]) / (2.0 * hstep);
        if d1.values[i].abs() > 1e-3 * d1.max_abs() {
            assert!((fd - d1.values[i]).abs() <= 1e-4 * d1.values[i].abs());
        }
    }
}

#[test]
fn cauchy_cdf_and_mass() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let t = 0.1;
    let cdf = f.cdf(t, &[-5.0, -0.3, 0.0, 0.7]).unwrap();
    for (x, (v, err)) in [-5.0, -0.3, 0.0, 0.7f64].iter().zip(&cdf) {
        let exact = 0.5 + (x / t).atan() / PI;
        assert!((v - exact).abs() < 1e-10, "{x}: {v} vs {exact}");
        assert!(*err < 1e-9);
    }
    let xs = lin_space(-50.0 * t, 50.0 * t, 4001);
    let g = f.density(t, &xs, 0).unwrap();
    let mass = f.mass_with_tails(&g).unwrap();
    assert!((mass - 1.0).abs() <= 1e-8, "mass {mass}");
    assert!(g.values[0] <= 1e-2 * g.max_abs());
    assert!(g.values.iter().all(|&v| v >= -g.tail_bound - 1e-12 * g.max_abs()));
}

#[test]
fn dyadic_cdf_agrees_with_the_density() {
    let m = LevyMeasure::new(LevyMeasureSpec::dyadic(1.0, 1.0)).unwrap();
    let f = Fourier::new(&m).unwrap();
    let t = 0.1;
    let c = f.cdf(t, &[-1.5, 0.0, 1.5]).unwrap();
    assert!((c[1].0 - 0.5).abs() < 1e-10, "{:?}", c[1]);
    assert!((c[0].0 + c[2].0 - 1.0).abs() < 1e-9, "{c:?}");
    let g = f.density(t, &lin_space(-1.5, 1.5, 6001), 0).unwrap();
    let inner = g.grid_integral().unwrap();
    assert!((c[2].0 - c[0].0 - inner).abs() < 1e-8, "{} vs {inner}", c[2].0 - c[0].0);
    assert!((f.mass_with_tails(&g).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn bar_density_symmetric_and_normalized() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let dec = build(&m, 0.1).unwrap();
    let r = dec.cut;
    let xs = lin_space(-60.0 * r, 60.0 * r, 12001);
    let mut g = f.density_bar(&dec, &xs, 0).unwrap();
    let n = xs.len();
    for i in 0..n / 2 {
        assert!((g.values[i] - g.values[n - 1 - i]).abs() <= 1e-10 * g.max_abs());
    }
    let mass = g.grid_integral().unwrap();
    assert!((mass - 1.0).abs() <= 1e-8, "bar mass {mass}");
    let x_t = f.locate_xt(&dec, &mut g).unwrap();
    assert!(x_t.abs() <= 0.01 * r, "x_t = {x_t}");
    let peak = g.max_abs();
    assert!(peak > 0.1 * dec.rho_t && peak < dec.rho_t);
}

#[test]
fn max_on_boundary_detected() {
    let m = LevyMeasure::new(LevyMeasureSpec { drift_a: 5.0, ..LevyMeasureSpec::cauchy() }).unwrap();
    let f = Fourier::new(&m).unwrap();
    let dec = build(&m, 0.1).unwrap();
    let xs = lin_space(0.0, 0.5, 101);
    let mut g = f.density_bar(&dec, &xs, 0).unwrap();
    assert!(matches!(f.locate_xt(&dec, &mut g), Err(LevyError::MaxOnBoundary(_))));
}

#[test]
fn convolution_identity_cauchy() {
    let m = cauchy();
    let f = Fourier::new(&m).unwrap();
    let dec = build(&m, 0.1).unwrap();
    let m_max = crate::decomposition::m_max_for(dec.lambda_total, 1e-14);
    let c = convolution_check(&f, &dec, 20.0 * dec.cut, m_max).unwrap();
    assert!(c.rel_dev <= 1e-6, "deviation {:e}", c.rel_dev);
    let dropped = convolution_check(&f, &dec, 20.0 * dec.cut, 0).unwrap();
    assert!(dropped.rel_dev > 1e-3);
}

#[test]
fn convolution_identity_dyadic() {
    let m = LevyMeasure::new(LevyMeasureSpec::dyadic(1.0, 1.0)).unwrap();
    let f = Fourier::new(&m).unwrap();
    let dec = build(&m, 2f64.powi(-6)).unwrap();
    let m_max = crate::decomposition::m_max_for(dec.lambda_total, 1e-14);
    let c = convolution_check(&f, &dec, 20.0 * dec.cut, m_max).unwrap();
    assert!(c.rel_dev <= 1e-5, "deviation {:e}", c.rel_dev);
}

#[test]
fn csv_header() {
    let g = DensityGrid {
        t: 1.0,
        rho_t: 1.0,
        x_grid: vec![0.0],
        k: 0,
        values: vec![0.5],
        errors: vec![0.0],
        trunc_freq: 1.0,
        tail_bound: 0.0,
        step: 0.1,
        which: Which::FullDensity,
        x_t: None,
    };
    assert!(g.to_csv().starts_with("t,x,value,tail_bound\n"));
}
