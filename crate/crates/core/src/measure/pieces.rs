//! Half-line densities that are piecewise power laws, `m(u) = c·u^p` on each
//! piece. Log-log interpolated tables and pure power laws both fit this form,
//! which makes every moment exact and every oscillatory integral reducible to
//! a convergent series, a short Gauss–Kronrod stretch and an asymptotic tail.

use std::f64::consts::PI;

use crate::error::{LevyError, Result};
use crate::quad::{integrate, oscillatory_antiderivative, power_moment};

/// Beyond `ASYMPTOTIC_START / ξ` the oscillatory part is taken from the
/// asymptotic antiderivative.
const ASYMPTOTIC_START: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub c: f64,
    pub p: f64,
}

impl Piece {
    fn density(&self, u: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * u.powf(self.p)
        }
    }
}

/// Oscillatory functionals of the measure, integrated over a `u`-range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillatory {
    /// `∫ (1 − cos ξu) m(u) du`
    OneMinusCos,
    /// `∫ (ξu − sin ξu) m(u) du`
    XMinusSin,
    /// `∫ sin(ξu) m(u) du`
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePower {
    pieces: Vec<Piece>,
}

impl PiecewisePower {
    pub fn power_law(c: f64, p: f64) -> Self {
        Self {
            pieces: vec![Piece { lo: 0.0, hi: f64::INFINITY, c, p }],
        }
    }

    /// Log-log interpolation of `(u, m(u))` pairs on `(0, u_max]`, extended
    /// below the first point by the power law fitted over the first decade and
    /// beyond the last point by `u^{-1-κ}`; `κ` defaults to the slope fitted
    /// over the last decade.
    pub fn from_table(points: &[[f64; 2]], tail_exponent: Option<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(LevyError::InvalidParameters(
                "a tabulated density needs at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[0][0] > 0.0 && w[1][0] > w[0][0]) {
                return Err(LevyError::InvalidParameters(
                    "table abscissae must be positive and strictly increasing".into(),
                ));
            }
        }
        if points.iter().any(|p| !(p[1] >= 0.0) || !p[1].is_finite()) {
            return Err(LevyError::InvalidParameters(
                "table densities must be finite and non-negative".into(),
            ));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if !(first[1] > 0.0 && last[1] > 0.0) {
            return Err(LevyError::InvalidParameters(
                "first and last table densities must be positive".into(),
            ));
        }

        let decade_slope = |a: [f64; 2], b: [f64; 2]| (b[1] / a[1]).ln() / (b[0] / a[0]).ln();
        let head_partner = points
            .iter()
            .copied()
            .find(|p| p[0] >= 10.0 * first[0] && p[1] > 0.0)
            .unwrap_or(last);
        let p_head = decade_slope(first, head_partner);
        if !(p_head > -3.0) {
            return Err(LevyError::InvalidParameters(format!(
                "head exponent {p_head} makes the second moment diverge at 0"
            )));
        }
        let kappa = match tail_exponent {
            Some(k) => k,
            None => {
                let partner = points
                    .iter()
                    .rev()
                    .copied()
                    .find(|p| p[0] <= last[0] / 10.0 && p[1] > 0.0)
                    .unwrap_or(first);
                -1.0 - decade_slope(partner, last)
            }
        };
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(LevyError::InvalidParameters(format!(
                "tail exponent {kappa} must be positive for a finite tail mass"
            )));
        }

        let mut pieces = Vec::with_capacity(points.len() + 1);
        pieces.push(Piece {
            lo: 0.0,
            hi: first[0],
            c: first[1] / first[0].powf(p_head),
            p: p_head,
        });
        for w in points.windows(2) {
            let ([u0, m0], [u1, m1]) = (w[0], w[1]);
            let piece = if m0 > 0.0 && m1 > 0.0 {
                let p = (m1 / m0).ln() / (u1 / u0).ln();
                Piece { lo: u0, hi: u1, c: m0 / u0.powf(p), p }
            } else {
                Piece { lo: u0, hi: u1, c: 0.5 * (m0 + m1), p: 0.0 }
            };
            pieces.push(piece);
        }
        let p_tail = -1.0 - kappa;
        pieces.push(Piece {
            lo: last[0],
            hi: f64::INFINITY,
            c: last[1] / last[0].powf(p_tail),
            p: p_tail,
        });
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn head_exponent(&self) -> f64 {
        self.pieces[0].p
    }

    pub fn tail_exponent(&self) -> f64 {
        -1.0 - self.pieces[self.pieces.len() - 1].p
    }

    pub fn density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let idx = self.pieces.partition_point(|p| p.hi <= u);
        self.pieces[idx.min(self.pieces.len() - 1)].density(u)
    }

    fn clipped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (Piece, f64, f64)> + '_ {
        let start = self.pieces.partition_point(|p| p.hi <= lo);
        self.pieces[start..]
            .iter()
            .take_while(move |p| p.lo < hi)
            .filter_map(move |p| {
                let l = p.lo.max(lo);
                let h = p.hi.min(hi);
                (h > l && p.c != 0.0).then_some((*p, l, h))
            })
    }

    /// `∫_{lo}^{hi} u^q m(u) du`.
    pub fn moment(&self, q: f64, lo: f64, hi: f64) -> f64 {
        self.clipped(lo, hi)
            .map(|(p, l, h)| p.c * power_moment(p.p + q, l, h))
            .sum()
    }

    /// `∫_{lo}^{hi} g(ξu) m(u) du` for one of the oscillatory kernels, `ξ > 0`.
    pub fn oscillatory(&self, kind: Oscillatory, xi: f64, lo: f64, hi: f64) -> Result<f64> {
        if xi == 0.0 {
            return Ok(0.0);
        }
        debug_assert!(xi > 0.0);
        let mut total = 0.0;
        for (piece, l, h) in self.clipped(lo, hi) {
            total += piece_oscillatory(kind, piece, xi, l, h)?;
        }
        Ok(total)
    }
}

fn piece_oscillatory(kind: Oscillatory, piece: Piece, xi: f64, l: f64, h: f64) -> Result<f64> {
    let a1 = 1.0 / xi;
    let a2 = ASYMPTOTIC_START / xi;
    let mut total = 0.0;
    if l < a1 {
        total += series(kind, piece, xi, l, h.min(a1));
    }
    let (l2, h2) = (l.max(a1), h.min(a2));
    if h2 > l2 {
        total += kronrod(kind, piece, xi, l2, h2)?;
    }
    let l3 = l.max(a2);
    if h > l3 {
        total += asymptotic(kind, piece, xi, l3, h)?;
    }
    Ok(total)
}

/// Taylor expansion of the kernel, valid while `ξu ≤ 1`; moments are taken
/// in `v = ξu` so that no power of `u` overflows.
fn series(kind: Oscillatory, piece: Piece, xi: f64, l: f64, h: f64) -> f64 {
    let (first_power, mut coef) = match kind {
        Oscillatory::OneMinusCos => (2, 0.5),
        Oscillatory::XMinusSin => (3, 1.0 / 6.0),
        Oscillatory::Sin => (1, 1.0),
    };
    let (vl, vh) = (xi * l, xi * h);
    let mut sum = 0.0;
    let mut power = first_power;
    for _ in 0..40 {
        let term = coef * power_moment(piece.p + power as f64, vl, vh);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coef *= -1.0 / (((power + 1) * (power + 2)) as f64);
        power += 2;
    }
    piece.c * xi.powf(-piece.p - 1.0) * sum
}

impl Oscillatory {
    /// The kernel itself, evaluated without cancellation for small `x`.
    pub fn kernel(self, x: f64) -> f64 {
        match self {
            Oscillatory::OneMinusCos => {
                let s = (0.5 * x).sin();
                2.0 * s * s
            }
            Oscillatory::XMinusSin => {
                if x.abs() < 0.5 {
                    let x2 = x * x;
                    let mut term = x * x2 / 6.0;
                    let mut sum: f64 = 0.0;
                    let mut k = 3.0;
                    while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
                        sum += term;
                        term *= -x2 / ((k + 1.0) * (k + 2.0));
                        k += 2.0;
                    }
                    sum
                } else {
                    x - x.sin()
                }
            }
            Oscillatory::Sin => x.sin(),
        }
    }
}

fn kronrod(kind: Oscillatory, piece: Piece, xi: f64, l: f64, h: f64) -> Result<f64> {
    let half_period = PI / xi;
    let parts = ((h - l) / half_period).ceil().max(1.0) as usize;
    let step = (h - l) / parts as f64;
    let mut total = 0.0;
    for j in 0..parts {
        let a = l + j as f64 * step;
        let b = if j + 1 == parts { h } else { a + step };
        let r = integrate(
            |u| kind.kernel(xi * u) * piece.c * u.powf(piece.p),
            a,
            b,
            1e-300,
            1e-13,
            200,
        )?;
        total += r.value;
    }
    Ok(total)
}

fn asymptotic(kind: Oscillatory, piece: Piece, xi: f64, l: f64, h: f64) -> Result<f64> {
    let p = piece.p;
    let upper = if h.is_infinite() {
        if p >= 0.0 {
            return Err(LevyError::InvalidParameters(format!(
                "density exponent {p} is not integrable at infinity"
            )));
        }
        num_complex::Complex64::new(0.0, 0.0)
    } else {
        oscillatory_antiderivative(p, xi * h)
    };
    let osc = (upper - oscillatory_antiderivative(p, xi * l)) * (piece.c * xi.powf(-p - 1.0));
    Ok(match kind {
        Oscillatory::OneMinusCos => piece.c * power_moment(p, l, h) - osc.re,
        Oscillatory::XMinusSin => xi * piece.c * power_moment(p + 1.0, l, h) - osc.im,
        Oscillatory::Sin => osc.im,
    })
}
