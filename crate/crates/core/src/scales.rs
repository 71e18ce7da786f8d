//! Quasi-inverse scales `ρ_t`, `ρ_t^U`, `ρ_t^L` and their comparability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{LevyMeasure, URange};
use crate::report::{log_space, Verdict};

const XI_LO: f64 = 1e-8;
const CAP_DOUBLINGS: i32 = 200;
/// Relative bracket width at which bisection stops.
const REL_WIDTH: f64 = 1e-15;
const SCAN_PER_DECADE: usize = 200;

/// A solved quasi-inverse `inf{ξ > 0: f(ξ) ≥ target}` with its final bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solve {
    pub value: f64,
    pub bracket_width: f64,
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, target: f64, mut lo: f64, mut hi: f64) -> Result<Solve> {
    while hi - lo > REL_WIDTH * hi {
        let mut mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            mid = 0.5 * (lo + hi);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Solve { value: hi, bracket_width: hi - lo })
}

/// Upper bracket by doubling from 1, capped at `2^200`.
fn upper_bracket(f: &dyn Fn(f64) -> Result<f64>, target: f64) -> Result<f64> {
    let mut hi = 1.0;
    for _ in 0..=CAP_DOUBLINGS {
        if f(hi)? >= target {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(LevyError::BracketFailure { target, cap: 2f64.powi(CAP_DOUBLINGS) })
}

/// Quasi-inverse of a nondecreasing function.
fn monotone_inverse(f: &dyn Fn(f64) -> Result<f64>, target: f64) -> Result<Solve> {
    let hi = upper_bracket(f, target)?;
    let mut lo = XI_LO.min(hi / 2.0);
    while f(lo)? >= target {
        if lo < 1e-300 {
            return Ok(Solve { value: lo, bracket_width: lo });
        }
        lo *= 1e-4;
    }
    bisect(f, target, lo, hi)
}

/// First crossing of a possibly non-monotone function: a log-spaced scan
/// locates the first grid point at or above the target, then bisection.
fn first_crossing(f: &(dyn Fn(f64) -> Result<f64> + Sync), target: f64) -> Result<Solve> {
    let hi = upper_bracket(f, target)?;
    let lo = XI_LO.min(hi / 2.0);
    let n = ((hi / lo).log10() * SCAN_PER_DECADE as f64).ceil() as usize + 1;
    let grid = log_space(lo, hi, n);
    let vals: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let j = vals.iter().position(|&v| v >= target).expect("hi reaches the target");
    if j == 0 {
        return monotone_inverse(f, target);
    }
    bisect(f, target, grid[j - 1], grid[j])
}

/// `ρ_t = inf{ξ > 0: Reψ(ξ) ≥ 1/t}`
pub fn rho(m: &LevyMeasure, t: f64) -> Result<Solve> {
    check_t(t)?;
    let f = |x: f64| m.re_psi(x);
    if m.is_atomic() {
        first_crossing(&f, 1.0 / t)
    } else {
        monotone_inverse(&f, 1.0 / t)
    }
}

/// `ρ_t^U = inf{ξ > 0: ψ^U(ξ) ≥ 1/t}`
pub fn rho_u(m: &LevyMeasure, t: f64) -> Result<Solve> {
    check_t(t)?;
    monotone_inverse(&|x| Ok(m.psi_u(x)), 1.0 / t)
}

/// `ρ_t^L = inf{ξ > 0: ψ^L(ξ) ≥ 1/t}`
///
/// For atomic measures `ψ^L(ξ) = ξ² S_j` on each interval `[b_j, b_{j+1})`
/// between consecutive breakpoints, so the infimum is found exactly by
/// walking the intervals.
pub fn rho_l(m: &LevyMeasure, t: f64) -> Result<Solve> {
    check_t(t)?;
    let target = 1.0 / t;
    if !m.is_atomic() {
        return monotone_inverse(&|x| Ok(m.psi_l(x)), target);
    }
    let cap = 2f64.powi(CAP_DOUBLINGS);
    let mut starts = vec![XI_LO];
    starts.extend(m.breakpoints(XI_LO, cap).into_iter().filter(|&b| b > XI_LO));
    starts.push(cap);
    for w in starts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let s = m.abs_moment(2.0, URange::below(1.0 / a));
        if a * a * s >= target {
            return Ok(Solve { value: a, bracket_width: 0.0 });
        }
        if b * b * s > target {
            let x = (target / s).sqrt();
            // nudge up until the strict cut still holds the same atoms
            let x = if x * x * s >= target { x } else { x * (1.0 + f64::EPSILON) };
            return Ok(Solve { value: x.max(a), bracket_width: 0.0 });
        }
    }
    Err(LevyError::BracketFailure { target, cap })
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(LevyError::InvalidParameters(format!("time t = {t} must be positive")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub t_grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_u: Vec<f64>,
    pub rho_l: Vec<f64>,
    /// Widest of the three final brackets per entry.
    pub bracket_width: Vec<f64>,
}

impl ScaleTable {
    pub fn compute(m: &LevyMeasure, t_grid: &[f64]) -> Result<Self> {
        let mut ts = t_grid.to_vec();
        ts.sort_by(f64::total_cmp);
        let rows: Vec<(Solve, Solve, Solve)> = ts
            .par_iter()
            .map(|&t| Ok((rho(m, t)?, rho_u(m, t)?, rho_l(m, t)?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            t_grid: ts,
            rho: rows.iter().map(|r| r.0.value).collect(),
            rho_u: rows.iter().map(|r| r.1.value).collect(),
            rho_l: rows.iter().map(|r| r.2.value).collect(),
            bracket_width: rows
                .iter()
                .map(|r| r.0.bracket_width.max(r.1.bracket_width).max(r.2.bracket_width))
                .collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho,rho_U,rho_L,bracket_width\n");
        for i in 0..self.t_grid.len() {
            out += &format!(
                "{:e},{:e},{:e},{:e},{:e}\n",
                self.t_grid[i], self.rho[i], self.rho_u[i], self.rho_l[i], self.bracket_width[i]
            );
        }
        out
    }

    /// All three scales nonincreasing in `t` and `ρ^U ≤ ρ^L`.
    pub fn ordering_ok(&self) -> bool {
        let mono = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0]);
        mono(&self.rho)
            && mono(&self.rho_u)
            && mono(&self.rho_l)
            && self.rho_u.iter().zip(&self.rho_l).all(|(u, l)| u <= l)
    }

    /// Largest relative defect of `tReψ(ρ_t) = tψ^U(ρ_t^U) = tψ^L(ρ_t^L) = 1`;
    /// for atomic `ψ^L` only `tψ^L(ρ_t^L) ≥ 1` is required.
    pub fn identity_defect(&self, m: &LevyMeasure) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.t_grid.len() {
            let t = self.t_grid[i];
            worst = worst.max((t * m.re_psi(self.rho[i])? - 1.0).abs());
            worst = worst.max((t * m.psi_u(self.rho_u[i]) - 1.0).abs());
            let l = t * m.psi_l(self.rho_l[i]) - 1.0;
            worst = worst.max(if m.is_atomic() { (-l).max(0.0) } else { l.abs() });
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    /// `rho`, `rho_U` or `rho_L`, evaluated at `c·t` and divided by `ρ_t`.
    pub scale: String,
    pub c: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub bands: Vec<RatioBand>,
    pub verdict: Verdict,
}

/// Ranges over `t` of `f(ct)/ρ_t` for `f ∈ {ρ, ρ^U, ρ^L}` and each `c`.
pub fn comparability_report(m: &LevyMeasure, t_grid: &[f64], c_list: &[f64]) -> Result<ComparabilityReport> {
    let base: Vec<f64> = t_grid.par_iter().map(|&t| Ok(rho(m, t)?.value)).collect::<Result<_>>()?;
    let mut bands = Vec::new();
    type Scale = fn(&LevyMeasure, f64) -> Result<Solve>;
    let scales: [(&str, Scale); 3] = [("rho", rho), ("rho_U", rho_u), ("rho_L", rho_l)];
    for &c in c_list {
        for (name, f) in scales {
            let ratios: Vec<f64> = t_grid
                .par_iter()
                .zip(&base)
                .map(|(&t, &b)| Ok(f(m, c * t)?.value / b))
                .collect::<Result<_>>()?;
            let (min, max) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
            bands.push(RatioBand { scale: name.into(), c, min, max });
        }
    }
    let ok = bands.iter().all(|b| b.min > 0.0 && b.max.is_finite());
    Ok(ComparabilityReport { bands, verdict: Verdict::from_bool(ok) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::LevyMeasureSpec;
    use std::f64::consts::PI;

    fn measure(spec: LevyMeasureSpec) -> LevyMeasure {
        LevyMeasure::new(spec).unwrap()
    }

    #[test]
    fn cauchy_scales_closed_form() {
        let m = measure(LevyMeasureSpec::cauchy());
        let t = 0.01;
        assert!((rho(&m, t).unwrap().value / 100.0 - 1.0).abs() < 1e-12);
        assert!((rho_l(&m, t).unwrap().value / (50.0 * PI) - 1.0).abs() < 1e-12);
        // ψ^U = (4/π)ξ
        assert!((rho_u(&m, t).unwrap().value / (25.0 * PI) - 1.0).abs() < 1e-12);
        assert!((rho(&m, 1.0).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stable_scales_are_powers_of_t() {
        for &alpha in &[0.7, 1.5] {
            let m = measure(LevyMeasureSpec::stable(alpha));
            for &t in &log_space(1e-6, 1.0, 13) {
                let r = rho(&m, t).unwrap().value;
                assert!((r / t.powf(-1.0 / alpha) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dyadic_rho_l_matches_breakpoint_scan() {
        let m = measure(LevyMeasureSpec::dyadic(1.0, 1.0));
        for &t in &[0.3, 0.07, 1e-3, 2f64.powi(-8), 3e-5] {
            let target = 1.0 / t;
            let x = rho_l(&m, t).unwrap().value;
            assert!(m.psi_l(x) >= target * (1.0 - 1e-15));
            // oracle: dense scan of ψ^L below x never reaches the target
            let scan = log_space(1e-6, x * (1.0 - 1e-12), 20_000);
            assert!(scan.iter().all(|&y| m.psi_l(y) < target), "t={t}");
            assert!(m.psi_l(x * (1.0 - 1e-12)) < target);
        }
    }

    #[test]
    fn comparability_bands() {
        let m = measure(LevyMeasureSpec::cauchy());
        let ts = log_space(1e-4, 1.0, 9);
        let r = comparability_report(&m, &ts, &[1.0, 2.0]).unwrap();
        let band = |name: &str, c: f64| r.bands.iter().find(|b| b.scale == name && b.c == c).unwrap().clone();
        let b = band("rho", 1.0);
        assert!((b.min - 1.0).abs() < 1e-14 && (b.max - 1.0).abs() < 1e-14);
        let b = band("rho", 2.0);
        assert!((b.min - 0.5).abs() < 1e-12 && (b.max - 0.5).abs() < 1e-12);
        let m = measure(LevyMeasureSpec::stable(0.7));
        let r = comparability_report(&m, &ts, &[2.0]).unwrap();
        let b = &r.bands[0];
        let expect = 2f64.powf(-1.0 / 0.7);
        assert!((b.min / expect - 1.0).abs() < 1e-10 && (b.max / expect - 1.0).abs() < 1e-10);
        assert!((expect - 0.3715).abs() < 1e-4);
    }

    #[test]
    fn table_invariants() {
        for spec in [
            LevyMeasureSpec::cauchy(),
            LevyMeasureSpec::dyadic(1.0, 1.0),
            LevyMeasureSpec::oscillating(0.8, 1.6),
        ] {
            let m = measure(spec);
            let table = ScaleTable::compute(&m, &log_space(1e-6, 1.0, 25)).unwrap();
            assert!(table.ordering_ok());
            assert!(table.identity_defect(&m).unwrap() < 1e-8);
        }
    }

    #[test]
    fn bad_time_rejected() {
        let m = measure(LevyMeasureSpec::cauchy());
        assert!(rho(&m, 0.0).is_err());
        assert!(rho(&m, -1.0).is_err());
    }
}
