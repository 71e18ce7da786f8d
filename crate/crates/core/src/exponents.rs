//! Characteristic exponent profiles, the condition-A constant and the growth
//! floor, with the inequalities that tie them together.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::LevyMeasure;
use crate::quad::integrate;
use crate::report::{log_grid, Verdict};

pub const CONDITION_A_CAVEAT: &str =
    "condition A is a statement over all real frequencies; beta_hat certifies it only on the (extended) grid";

/// Log-spaced magnitudes `|ξ| ∈ [1e-3, 1e6]`, 60 per decade.
pub fn default_xi_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 60)
}

/// `ψ^U(ξ)/ψ^L(ξ)`, infinite where `ψ^L` vanishes.
pub fn ratio(m: &LevyMeasure, xi: f64) -> f64 {
    let l = m.psi_l(xi);
    if l > 0.0 {
        m.psi_u(xi) / l
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    pub argmax_xi: f64,
    /// Grid actually scanned, after any extension.
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub extended_low: bool,
    pub extended_high: bool,
    pub verdict: Verdict,
    pub caveat: String,
}

fn scan(m: &LevyMeasure, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = grid.to_vec();
    if m.is_atomic() && !grid.is_empty() {
        // ψ^U/ψ^L decreases between breakpoints, so its sup sits on them
        xs.extend(m.breakpoints(grid[0], grid[grid.len() - 1]));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    xs.par_iter().map(|&x| (x, ratio(m, x))).collect()
}

fn argmax(values: &[(f64, f64)]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &(_, r))| if r > bv { (i, r) } else { (bi, bv) })
}

/// The outermost ten ratios increase toward the end by more than 1%.
fn grows_toward_end<'a>(mut it: impl Iterator<Item = &'a (f64, f64)>) -> bool {
    let tail: Vec<f64> = it.by_ref().take(10).map(|p| p.1).collect();
    tail.len() == 10
        && tail.windows(2).all(|w| w[0] > w[1])
        && tail[0] > 1.01 * tail[tail.len() - 1]
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid supremum of `ψ^U/ψ^L` over positive magnitudes.
///
/// A boundary value within 5% of the running maximum triggers a two-decade
/// extension on that side. If the extension raises the maximum by more than
/// 5% while the ratio keeps growing outward, the supremum is taken to be
/// infinite.
pub fn estimate_beta(m: &LevyMeasure, xi_grid: &[f64]) -> Result<BetaEstimate> {
    let mut grid: Vec<f64> = xi_grid.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.is_empty() {
        return Err(LevyError::InvalidParameters("empty frequency grid".into()));
    }
    let mut values = scan(m, &grid);
    let (_, base_max) = argmax(&values);
    let (mut ext_lo, mut ext_hi) = (false, false);
    let first = values[0].1;
    let last = values[values.len() - 1].1;
    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    if first >= 0.95 * base_max {
        let ext = scan(m, &log_grid(lo / 100.0, lo, 60));
        let (_, ext_max) = argmax(&ext);
        if ext_max > 1.05 * base_max && grows_toward_end(ext.iter()) {
            return Err(LevyError::ConditionAViolated { ratio: ext_max, xi: ext[0].0 });
        }
        values.splice(0..0, ext);
        ext_lo = true;
    }
    if last >= 0.95 * base_max {
        let ext = scan(m, &log_grid(hi, hi * 100.0, 60));
        let (_, ext_max) = argmax(&ext);
        if ext_max > 1.05 * base_max && grows_toward_end(ext.iter().rev()) {
            let x = ext[ext.len() - 1].0;
            return Err(LevyError::ConditionAViolated { ratio: ext_max, xi: x });
        }
        values.extend(ext);
        ext_hi = true;
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    values.dedup_by(|a, b| a.0 == b.0);
    let (i, mut best) = argmax(&values);
    let mut at = values[i].0;
    if !best.is_finite() {
        return Err(LevyError::ConditionAViolated { ratio: best, xi: at });
    }
    if !m.is_atomic() && i > 0 && i + 1 < values.len() {
        let (s, r) = golden_max(|s| ratio(m, s.exp()), values[i - 1].0.ln(), values[i + 1].0.ln());
        if r > best {
            best = r;
            at = s.exp();
        }
    }
    let growing_both = grows_toward_end(values.iter()) && grows_toward_end(values.iter().rev());
    Ok(BetaEstimate {
        beta_hat: best,
        argmax_xi: at,
        grid_lo: values[0].0,
        grid_hi: values[values.len() - 1].0,
        extended_low: ext_lo,
        extended_high: ext_hi,
        verdict: Verdict::from_bool(!growing_both),
        caveat: CONDITION_A_CAVEAT.into(),
    })
}

/// `min Reψ(ξ)/ξ^{2/β}` over grid magnitudes `≥ 1`.
pub fn growth_floor(m: &LevyMeasure, beta_hat: f64, xi_grid: &[f64]) -> Result<f64> {
    let q = 2.0 / beta_hat;
    let vals: Vec<f64> = xi_grid
        .par_iter()
        .map(|x| x.abs())
        .filter(|&x| x >= 1.0)
        .map(|x| Ok(m.re_psi(x)? / x.powf(q)))
        .collect::<Result<_>>()?;
    let c = vals.into_iter().fold(f64::INFINITY, f64::min);
    if !(c > 1e-12) || !c.is_finite() {
        return Err(LevyError::FloorViolated(c));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    /// Symmetric about 0: `-mags` (descending), 0, `mags`.
    pub xi_grid: Vec<f64>,
    pub re_psi: Vec<f64>,
    pub im_psi: Vec<f64>,
    pub psi_l: Vec<f64>,
    pub psi_u: Vec<f64>,
    pub beta: BetaEstimate,
    pub c_floor: f64,
}

impl ExponentProfile {
    pub fn compute(m: &LevyMeasure, mags: &[f64]) -> Result<Self> {
        let mut pos: Vec<f64> = mags.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        let mut xi_grid: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        xi_grid.push(0.0);
        xi_grid.extend(&pos);
        let rows: Vec<(f64, f64, f64, f64)> = xi_grid
            .par_iter()
            .map(|&x| Ok((m.re_psi(x)?, m.im_psi(x)?, m.psi_l(x), m.psi_u(x))))
            .collect::<Result<_>>()?;
        let beta = estimate_beta(m, &pos)?;
        let c_floor = growth_floor(m, beta.beta_hat, &pos)?;
        Ok(Self {
            xi_grid,
            re_psi: rows.iter().map(|r| r.0).collect(),
            im_psi: rows.iter().map(|r| r.1).collect(),
            psi_l: rows.iter().map(|r| r.2).collect(),
            psi_u: rows.iter().map(|r| r.3).collect(),
            beta,
            c_floor,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,re_psi,im_psi,psi_L,psi_U,ratio\n");
        for i in 0..self.xi_grid.len() {
            let ratio = if self.psi_l[i] > 0.0 { self.psi_u[i] / self.psi_l[i] } else { f64::NAN };
            out += &format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                self.xi_grid[i], self.re_psi[i], self.im_psi[i], self.psi_l[i], self.psi_u[i], ratio
            );
        }
        out
    }

    /// Grid points violating `ψ^L ≤ ψ^U` or `(1 − cos 1)ψ^L ≤ Reψ ≤ 2ψ^U`.
    pub fn sandwich_violations(&self) -> Vec<f64> {
        let k = 1.0 - 1f64.cos();
        let slack = |v: f64| 1e-12 * v.abs() + 1e-300;
        (0..self.xi_grid.len())
            .filter(|&i| {
                let (l, u, r) = (self.psi_l[i], self.psi_u[i], self.re_psi[i]);
                l > u + slack(u) || k * l > r + slack(r) || r > 2.0 * u + slack(u)
            })
            .map(|i| self.xi_grid[i])
            .collect()
    }

    /// Smallest `[ψ^U(ξ₂)/ψ^U(ξ₁)] / (ξ₂/ξ₁)^{2/β̂}` over consecutive positive
    /// grid points; `≥ 1` means `ψ^U(ξ)/ξ^{2/β̂}` is nondecreasing on the grid,
    /// which covers every pair.
    pub fn doubling_growth_min(&self) -> f64 {
        let q = 2.0 / self.beta.beta_hat;
        let pos: Vec<usize> = (0..self.xi_grid.len()).filter(|&i| self.xi_grid[i] > 0.0).collect();
        pos.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                (self.psi_u[b] / self.psi_u[a]) / (self.xi_grid[b] / self.xi_grid[a]).powf(q)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation from `Reψ` even, `Imψ` odd, and vanishing at 0,
    /// relative to the magnitude of the values involved.
    pub fn parity_defect(&self) -> f64 {
        let n = self.xi_grid.len();
        let mid = n / 2;
        let mut worst = [self.re_psi[mid], self.im_psi[mid], self.psi_l[mid], self.psi_u[mid]]
            .iter()
            .fold(0.0f64, |w, v| w.max(v.abs()));
        for j in 1..=mid {
            let (a, b) = (mid - j, mid + j);
            let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
            worst = worst
                .max(rel(self.re_psi[a], self.re_psi[b]))
                .max(if self.im_psi[b] == 0.0 && self.im_psi[a] == 0.0 {
                    0.0
                } else {
                    rel(self.im_psi[a], -self.im_psi[b])
                })
                .max(rel(self.psi_l[a], self.psi_l[b]))
                .max(rel(self.psi_u[a], self.psi_u[b]));
        }
        worst
    }
}

/// `(ψ^U(ξ₂) − ψ^U(ξ₁), ∫_{ξ₁}^{ξ₂} (2/η) ψ^L(η) dη)` for `0 < ξ₁ < ξ₂`, the
/// right side by quadrature in `ln η`, split at the jumps of `ψ^L`.
pub fn integral_relation(m: &LevyMeasure, xi1: f64, xi2: f64) -> Result<(f64, f64)> {
    let lhs = m.psi_u(xi2) - m.psi_u(xi1);
    let mut cuts = vec![xi1];
    cuts.extend(m.breakpoints(xi1, xi2).into_iter().filter(|&b| b > xi1 && b < xi2));
    cuts.push(xi2);
    let mut rhs = 0.0;
    for w in cuts.windows(2) {
        let r = integrate(|s| 2.0 * m.psi_l(s.exp()), w[0].ln(), w[1].ln(), 0.0, 1e-12, 2000)?;
        rhs += r.value;
    }
    Ok((lhs, rhs))
}
