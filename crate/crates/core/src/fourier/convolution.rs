//! Grid representation of `Λ_t` and `P_t`, and the check
//! `p_t = p̄_t * P_t * δ_{−a_t}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transform::{convolve, smooth_size, Transform};
use super::Fourier;
use crate::decomposition::{poisson_weights, Decomposition, LambdaRepr};
use crate::error::Result;
use crate::measure::{LevyMeasure, Side, URange};

/// `Λ_t` spread onto the nodes `j·dx`, `|j| ≤ half`, by linear (hat)
/// interpolation, which keeps the mass and first moment of every cell.
/// Index `j + half` holds node `j`; mass beyond the window is dropped.
pub fn hat_weights(m: &LevyMeasure, dec: &Decomposition, dx: f64, half: usize) -> Vec<f64> {
    let mut w = vec![0.0; 2 * half + 1];
    let put = |w: &mut [f64], u: f64, mass: f64| {
        let s = u / dx;
        if s.abs() > w.len() as f64 {
            return;
        }
        let j = s.floor();
        let frac = s - j;
        let i = j as i64 + half as i64;
        if i >= 0 && (i as usize) < w.len() {
            w[i as usize] += mass * (1.0 - frac);
        }
        if i + 1 >= 0 && ((i + 1) as usize) < w.len() && frac > 0.0 {
            w[(i + 1) as usize] += mass * frac;
        }
    };
    match &dec.lambda_repr {
        LambdaRepr::Atoms { atoms } => {
            for &(u, mass) in atoms {
                put(&mut w, u, mass);
            }
        }
        LambdaRepr::Density { .. } => {
            let r = dec.cut;
            let first = (r / dx).floor() as usize;
            let cells: Vec<(usize, f64, f64, f64, f64)> = (first..half)
                .into_par_iter()
                .map(|j| {
                    let (a, b) = (j as f64 * dx, (j + 1) as f64 * dx);
                    let range = URange::new(a.max(r), false, b, true);
                    let side = |s| (m.side_moment(s, 0.0, range), m.side_moment(s, 1.0, range));
                    let (p0, p1) = side(Side::Pos);
                    let (n0, n1) = side(Side::Neg);
                    (j, (b * p0 - p1) / dx, (p1 - a * p0) / dx, (b * n0 - n1) / dx, (n1 - a * n0) / dx)
                })
                .collect();
            let t = dec.t;
            for (j, pl, pr, nl, nr) in cells {
                w[half + j] += t * pl;
                w[half + j + 1] += t * pr;
                w[half - j] += t * nl;
                w[half - j - 1] += t * nr;
            }
        }
    }
    w
}

/// `Σ_{m ≤ m_max} Λ^{*m}/m!` on nodes `|j| ≤ out_half`, for hat weights of
/// half-width `half`. Circular wrap-around is pushed beyond four window widths.
pub fn series_on_grid(weights: &[f64], half: usize, m_max: usize, out_half: usize) -> Vec<f64> {
    let p = smooth_size(4 * (half + out_half) + 1);
    let mut v = vec![Complex64::new(0.0, 0.0); p];
    for (i, &x) in weights.iter().enumerate() {
        let j = i as i64 - half as i64;
        v[j.rem_euclid(p as i64) as usize].re = x;
    }
    let tr = Transform::new(p);
    tr.forward(&mut v);
    v.par_iter_mut().for_each(|l| {
        let mut s = Complex64::new(1.0, 0.0);
        for m in (1..=m_max).rev() {
            s = Complex64::new(1.0, 0.0) + *l * s / m as f64;
        }
        *l = s;
    });
    tr.inverse(&mut v);
    (-(out_half as i64)..=out_half as i64)
        .map(|j| v[j.rem_euclid(p as i64) as usize].re)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub t: f64,
    pub dx: f64,
    pub m_max: usize,
    pub lambda_total: f64,
    /// Poisson mass of the dropped terms `m > m_max`.
    pub series_tail: f64,
    pub x_grid: Vec<f64>,
    pub direct: Vec<f64>,
    pub convolved: Vec<f64>,
    pub max_dev: f64,
    pub max_p: f64,
    pub rel_dev: f64,
}

/// Builds `p̄_t * P_t * δ_{−a_t}` on `|x| ≤ x_half` and compares it with the
/// directly inverted `p_t`. `P_t` is discretized on two nested grids and
/// the results are Richardson-extrapolated.
pub fn convolution_check(f: &Fourier, dec: &Decomposition, x_half: f64, m_max: usize) -> Result<ConvolutionCheck> {
    let m = f.measure();
    let r = dec.cut;
    let mut dx = r / 200.0;
    if m.is_atomic() {
        dx = dx.log2().floor().exp2();
    }
    let coarse = 2.0 * dx;
    let out_coarse = (x_half / coarse).ceil() as usize;
    let out = 2 * out_coarse;
    let k_bar = 2 * (60.0 * r / coarse).ceil() as usize;
    let window = 2 * (2000.0 * r / coarse).ceil() as usize;

    let bar_x: Vec<f64> = (-(k_bar as i64)..=k_bar as i64).map(|i| i as f64 * dx + dec.a_t).collect();
    let bar = f.density_bar(dec, &bar_x, 0)?.values;
    let bar_coarse: Vec<f64> = bar.iter().step_by(2).copied().collect();

    let e = (-dec.lambda_total).exp();
    let rhs = |step: f64, half: usize, out: usize, bar: &[f64], kb: usize| -> Vec<f64> {
        let w = hat_weights(m, dec, step, half);
        let law: Vec<f64> = series_on_grid(&w, half, m_max, out + kb).into_iter().map(|s| e * s).collect();
        let c = convolve(&law, bar);
        (0..=2 * out).map(|i| c[i + 2 * kb]).collect()
    };
    let fine = rhs(dx, window, out, &bar, k_bar);
    let rough = rhs(coarse, window / 2, out_coarse, &bar_coarse, k_bar / 2);
    let convolved: Vec<f64> = (0..=2 * out_coarse).map(|i| (4.0 * fine[2 * i] - rough[i]) / 3.0).collect();

    let x_grid: Vec<f64> = (-(out_coarse as i64)..=out_coarse as i64).map(|j| j as f64 * coarse).collect();
    let direct = f.density(dec.t, &x_grid, 0)?.values;
    let max_p = direct.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let max_dev = direct.iter().zip(&convolved).fold(0.0, |a: f64, (p, q)| a.max((p - q).abs()));
    let series_tail = poisson_weights(dec.lambda_total, m_max).1;
    Ok(ConvolutionCheck {
        t: dec.t,
        dx,
        m_max,
        lambda_total: dec.lambda_total,
        series_tail,
        x_grid,
        direct,
        convolved,
        max_dev,
        max_p,
        rel_dev: max_dev / max_p,
    })
}
