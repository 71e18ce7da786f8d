//! Adaptive Gauss–Kronrod quadrature and the closed-form pieces used by the
//! oscillatory integrals against power-law densities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{LevyError, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of a quadrature: the value and an estimate of the absolute error.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        res_k += w * s;
        if j % 2 == 1 {
            res_g += WG[j / 2] * s;
        }
    }
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).abs();
    // QUADPACK-style rescaling of the raw Gauss/Kronrod difference.
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (&x, &w) in XGK[..10].iter().zip(&WGK[..10]) {
        let dx = half * x;
        res_asc += w * ((f(center - dx) - mean).abs() + (f(center + dx) - mean).abs());
    }
    res_asc *= half.abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    QuadResult { value, abs_err: err }
}

/// The 21 Kronrod nodes on `[a, b]` as `(node, Kronrod weight, Gauss weight)`;
/// the Gauss weight is zero off the embedded 10-point rule.
pub(crate) fn gk21_rule(a: f64, b: f64) -> [(f64, f64, f64); 21] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, half * WGK[10], 0.0); 21];
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let wg = if j % 2 == 1 { half * WG[j / 2] } else { 0.0 };
        out[2 * j + 1] = (center - half * x, half * w, wg);
        out[2 * j + 2] = (center + half * x, half * w, wg);
    }
    out
}

struct Segment {
    a: f64,
    b: f64,
    r: QuadResult,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.r.abs_err == other.r.abs_err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.abs_err.total_cmp(&other.r.abs_err)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// Fails with [`LevyError::QuadratureFailure`] when `max_segments` bisections
/// do not reach the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0 });
    }
    let first = gk21(&f, a, b);
    let mut total = first.value;
    let mut total_err = first.abs_err;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, r: first });
    let mut segments = 1;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if segments >= max_segments {
            return Err(LevyError::QuadratureFailure {
                what: "adaptive Gauss-Kronrod",
                at: 0.5 * (a + b),
                err: total_err,
                depth: segments,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval below floating point resolution
            heap.push(worst);
            break;
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        total += left.value + right.value - worst.r.value;
        total_err += left.abs_err + right.abs_err - worst.r.abs_err;
        heap.push(Segment { a: worst.a, b: mid, r: left });
        heap.push(Segment { a: mid, b: worst.b, r: right });
        segments += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let (value, abs_err) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.r.value, e + s.r.abs_err));
    Ok(QuadResult { value, abs_err })
}

/// `∫ₐᵇ f` with the upper limit possibly infinite, via `u = a + s/(1-s)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<QuadResult> {
    integrate(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let om = 1.0 - s;
            let u = a + s / om;
            let v = f(u) / (om * om);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        max_segments,
    )
}

/// `∫ₗʰ u^q du` for `0 ≤ l ≤ h`, stable when `q + 1` is near zero.
pub fn power_moment(q: f64, l: f64, h: f64) -> f64 {
    if h <= l {
        return 0.0;
    }
    let s = q + 1.0;
    if h.is_infinite() {
        return if s < 0.0 { -l.powf(s) / s } else { f64::INFINITY };
    }
    if l == 0.0 {
        return if s > 0.0 { h.powf(s) / s } else { f64::INFINITY };
    }
    let log_ratio = (h / l).ln();
    let z = s * log_ratio;
    if z.abs() < 1e-8 {
        l.powf(s) * log_ratio * (1.0 + 0.5 * z)
    } else if z.abs() <= 1.0 {
        l.powf(s) * z.exp_m1() / s
    } else {
        (h.powf(s) - l.powf(s)) / s
    }
}

/// Antiderivative of `e^{iv} v^p` by its asymptotic expansion, accurate for
/// `v ≥ 40`. Returns the branch that vanishes at `+∞` when `p < 0`.
pub fn oscillatory_antiderivative(p: f64, v: f64) -> Complex64 {
    let i = Complex64::i();
    let mut coef = -i;
    let mut sum = coef;
    let mut prev = coef.norm();
    for k in 1..200 {
        let next = coef * i * ((p - (k as f64) + 1.0) / v);
        let mag = next.norm();
        if mag > prev {
            break;
        }
        sum += next;
        coef = next;
        prev = mag;
        if mag < 1e-18 * sum.norm() {
            break;
        }
    }
    Complex64::from_polar(1.0, v) * v.powf(p) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14, 50).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ u^{-1/2} du = 2
        let r = integrate(|u| u.powf(-0.5), 0.0, 1.0, 1e-12, 1e-12, 2000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn infinite_range() {
        let r = integrate_to_inf(|u| (-u).exp(), 0.0, 1e-13, 1e-13, 500).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn moments() {
        assert!((power_moment(1.0, 1.0, 3.0) - 4.0).abs() < 1e-14);
        assert!((power_moment(-1.0, 1.0, std::f64::consts::E) - 1.0).abs() < 1e-14);
        assert!((power_moment(-2.0, 1.0, f64::INFINITY) - 1.0).abs() < 1e-14);
        assert!((power_moment(-0.5, 0.0, 4.0) - 4.0).abs() < 1e-14);
        // l^s underflows while (h/l)^s overflows
        assert!((power_moment(30.0, 1e-22, 1.0) - 1.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        for &p in &[-1.5, -2.7, -0.3, 0.4] {
            let (l, h) = (45.0, 61.3);
            let exact = oscillatory_antiderivative(p, h) - oscillatory_antiderivative(p, l);
            let re = integrate(|v| v.cos() * v.powf(p), l, h, 1e-15, 1e-13, 500).unwrap();
            let im = integrate(|v| v.sin() * v.powf(p), l, h, 1e-15, 1e-13, 500).unwrap();
            let scale = l.powf(p);
            assert!((exact.re - re.value).abs() < 1e-11 * scale, "p={p}");
            assert!((exact.im - im.value).abs() < 1e-11 * scale, "p={p}");
        }
    }
}
