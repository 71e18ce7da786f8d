//! Sums `Σ_j Re(z_j e^{−i x ξ_j})` over an arithmetic frequency grid
//! `ξ_j = j·h`, evaluated at many `x`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const REFRESH: usize = 1024;
const CHIRP_MIN_POINTS: usize = 32;

/// Direct summation with a rotation recurrence, re-anchored every
/// `REFRESH` terms.
pub fn direct_sum(z: &[Complex64], start: f64, step: f64, x: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -x * step);
    let mut acc = 0.0;
    for (c, chunk) in z.chunks(REFRESH).enumerate() {
        let first = start + (c * REFRESH) as f64 * step;
        let mut w = Complex64::from_polar(1.0, -x * first);
        for zj in chunk {
            acc += zj.re * w.re - zj.im * w.im;
            w *= rot;
        }
    }
    acc
}

/// `(x0, dx)` if `xs` is uniformly spaced.
pub fn uniform_spacing(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() - 1;
    let (x0, dx) = (xs[0], (xs[n] - xs[0]) / n as f64);
    if dx <= 0.0 {
        return None;
    }
    let scale = xs[0].abs().max(xs[n].abs());
    let ok = xs.iter().enumerate().all(|(m, &x)| (x - (x0 + m as f64 * dx)).abs() <= 1e-12 * scale);
    ok.then_some((x0, dx))
}

/// `Σ_j Re(z_j e^{−i x ξ_j})`, `ξ_j = start + j·step`, for every `x` in `xs`.
/// Uniform grids go through a chirp-z transform, others are summed directly.
pub fn arith_sum(z: &[Complex64], start: f64, step: f64, xs: &[f64]) -> Vec<f64> {
    match uniform_spacing(xs) {
        Some((x0, dx)) if xs.len() >= CHIRP_MIN_POINTS => chirp_sum(z, start, step, x0, dx, xs.len()),
        _ => xs.par_iter().map(|&x| direct_sum(z, start, step, x)).collect(),
    }
}

/// Smallest `2^a·3^b·5^c ≥ n`.
pub fn smooth_size(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

fn plan(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

/// Bluestein: `jm = (j² + m² − (m − j)²)/2` turns the sum into a convolution.
fn chirp_sum(z: &[Complex64], start: f64, step: f64, x0: f64, dx: f64, count: usize) -> Vec<f64> {
    let n = z.len();
    let p = smooth_size(n + count);
    let half_theta = 0.5 * step * dx;
    let chirp = |k: usize| {
        let kk = k as f64;
        Complex64::from_polar(1.0, -half_theta * kk * kk)
    };
    let mut a = vec![Complex64::new(0.0, 0.0); p];
    a[..n].par_iter_mut().enumerate().for_each(|(j, aj)| {
        *aj = z[j] * Complex64::from_polar(1.0, -x0 * (start + step * j as f64)) * chirp(j);
    });
    let mut b = vec![Complex64::new(0.0, 0.0); p];
    b.par_iter_mut().enumerate().for_each(|(i, bi)| {
        if i < count {
            *bi = chirp(i).conj();
        } else if i > p - n {
            *bi = chirp(p - i).conj();
        }
    });
    let (fwd, inv) = plan(p);
    fwd.process(&mut a);
    fwd.process(&mut b);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= y);
    inv.process(&mut a);
    let scale = 1.0 / p as f64;
    (0..count)
        .into_par_iter()
        .map(|m| (Complex64::from_polar(1.0, -(m as f64) * dx * start) * chirp(m) * a[m]).re * scale)
        .collect()
}

/// Linear convolution `c_k = Σ_j a_j b_{k−j}` of two real sequences.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let p = smooth_size(len);
    let lift = |v: &[f64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); p];
        for (o, &x) in out.iter_mut().zip(v) {
            o.re = x;
        }
        out
    };
    let (mut fa, mut fb) = (lift(a), lift(b));
    let (fwd, inv) = plan(p);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    fa.iter_mut().zip(&fb).for_each(|(x, y)| *x *= y);
    inv.process(&mut fa);
    fa[..len].iter().map(|c| c.re / p as f64).collect()
}

/// Forward and inverse FFT helpers on a fixed length.
pub struct Transform {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let (fwd, inv) = plan(len);
        Self { fwd, inv, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, v: &mut [Complex64]) {
        self.fwd.process(v);
    }

    /// Inverse transform including the `1/len` normalization.
    pub fn inverse(&self, v: &mut [Complex64]) {
        self.inv.process(v);
        let s = 1.0 / self.len as f64;
        v.iter_mut().for_each(|c| *c *= s);
    }
}
