//! Compound kernel estimates, bell-type bounds and the integral `I_k`,
//! with all constants fitted on `(t, x)` grids.

mod bell;
mod context;
mod fit;
mod ik;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomposition::{poisson_law, Decomposition};
use crate::error::{LevyError, Result};
use crate::fourier::convolution::{hat_weights, series_on_grid};
use crate::fourier::transform::convolve;
use crate::measure::LevyMeasure;
use crate::report::Verdict;

pub use bell::{bell_upper, check_precondition, subexponential_spot_check, Precondition, SpotCheck, TailSpec};
pub use context::{BoundsConfig, BoundsContext, Needs, TimeSlice};
pub use fit::{
    compare_sharpening, fit_bar_upper, fit_compound_lower, fit_compound_upper, fit_derivative_upper, fit_on_diagonal,
    finalize, verify_on, AtomRow, DyadicAtomTable, Sharpening,
};
pub use ik::{ik_diagnostic, IkReport};

/// Absolute slack on margin signs.
pub const MARGIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `b₁ e^{−b₂|x|}`
    Upper { b1: f64, b2: f64 },
    /// `b₁ e^{−b₂|x| ln(1+|x|)}`
    UpperSym { b1: f64, b2: f64 },
    /// `b₃ 1_{|x| ≤ b₄}`
    Lower { b3: f64, b4: f64 },
}

impl Shape {
    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        match *self {
            Shape::Upper { b1, b2 } => b1 * (-b2 * a).exp(),
            Shape::UpperSym { b1, b2 } => b1 * (-b2 * a * a.ln_1p()).exp(),
            Shape::Lower { b3, b4 } => {
                if a <= b4 {
                    b3
                } else {
                    0.0
                }
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Shape::Upper { b1, .. } | Shape::UpperSym { b1, .. } => b1,
            Shape::Lower { b3, .. } => b3,
        }
    }

    /// Same shape with unit amplitude.
    pub fn unit(&self) -> Shape {
        match *self {
            Shape::Upper { b2, .. } => Shape::Upper { b1: 1.0, b2 },
            Shape::UpperSym { b2, .. } => Shape::UpperSym { b1: 1.0, b2 },
            Shape::Lower { b4, .. } => Shape::Lower { b3: 1.0, b4 },
        }
    }

    /// `|x|` beyond which the unit kernel is below `e^{−40}`.
    pub fn reach(&self) -> f64 {
        match *self {
            Shape::Upper { b2, .. } => 40.0 / b2,
            Shape::UpperSym { b2, .. } => {
                let mut u = 1.0;
                while b2 * u * u.ln_1p() < 40.0 {
                    u *= 1.1;
                }
                u
            }
            Shape::Lower { b4, .. } => b4,
        }
    }
}

/// `Σ_{m ≤ m_max} (1/m!) ∫ σ h((x − y)ζ) Λ^{*m}(dy)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundKernelParams {
    pub sigma: f64,
    pub shape: Shape,
    pub zeta: f64,
    pub m_max: usize,
}

impl CompoundKernelParams {
    /// `σ = ρ_t^{k+1}`, `ζ = ρ_t`, `m_max` from [`series_m_max`] at `tol`.
    pub fn for_decomposition(dec: &Decomposition, k: usize, shape: Shape, tol: f64) -> Self {
        Self { sigma: dec.rho_t.powi(k as i32 + 1), shape, zeta: dec.rho_t, m_max: series_m_max(dec.lambda_total, tol) }
    }
}

/// `Σ_{m > m_max} Λ^m/m!`, the bound on the dropped series terms relative
/// to the `m = 0` term.
pub fn series_tail(lambda: f64, m_max: usize) -> f64 {
    let mut term = 1.0;
    for m in 1..=m_max {
        term *= lambda / m as f64;
    }
    let mut tail = 0.0;
    let mut m = m_max;
    loop {
        m += 1;
        term *= lambda / m as f64;
        tail += term;
        if term <= 1e-17 * tail || term == 0.0 {
            return tail;
        }
    }
}

/// Smallest `m_max` with [`series_tail`] at most `tol`.
pub fn series_m_max(lambda: f64, tol: f64) -> usize {
    (0..).find(|&m| series_tail(lambda, m) <= tol).expect("factorial tail vanishes")
}

/// Compound kernel sum at `x`. Atomic `Λ_t` is convolved exactly (single
/// contributions pruned below `1e-14` relative weight); densities go
/// through a hat-weight grid of step `cut/200`.
pub fn compound_eval(m: &LevyMeasure, params: &CompoundKernelParams, dec: &Decomposition, x: f64) -> Result<f64> {
    let tail = series_tail(dec.lambda_total, params.m_max);
    if tail > 1e-10 {
        return Err(LevyError::TruncationInsufficient { tail, tol: 1e-10, m_max: params.m_max });
    }
    let k = |y: f64| params.sigma * params.shape.eval((x - y) * params.zeta);
    if m.is_atomic() {
        let law = poisson_law(dec, params.m_max, f64::INFINITY, 1e-14)?;
        let scale = dec.lambda_total.exp();
        let mut sum = 0.0;
        for term in &law.terms {
            for &(y, w) in term.atoms.as_deref().unwrap_or(&[]) {
                sum += scale * w * k(y);
            }
        }
        return Ok(sum);
    }
    let dx = dec.cut / 200.0;
    let reach = params.shape.unit().reach() / params.zeta;
    let half = ((x.abs() + reach) / dx).ceil() as usize + 1;
    let w = hat_weights(m, dec, dx, half);
    let s = series_on_grid(&w, half, params.m_max, half);
    Ok(s.iter().enumerate().map(|(i, &sj)| sj * k((i as f64 - half as f64) * dx)).sum())
}

/// `C_i = Σ_j S_j h((i − j)·step)` for `|i| ≤ out`, with `S` indexed on
/// `|j| ≤ half` and `step = ζ·dx` in kernel units.
pub fn kernel_conv(series: &[f64], half: usize, out: usize, shape: Shape, step: f64) -> Vec<f64> {
    let n = series.len();
    debug_assert_eq!(n, 2 * half + 1);
    let full: Vec<f64> = match shape {
        Shape::Upper { b1, b2 } => {
            let r = (-b2 * step).exp();
            let mut fwd = vec![0.0; n];
            let mut acc = 0.0;
            for (i, &s) in series.iter().enumerate() {
                acc = s + r * acc;
                fwd[i] = acc;
            }
            let mut acc = 0.0;
            for i in (0..n).rev() {
                acc = series[i] + r * acc;
                fwd[i] += acc - series[i];
            }
            fwd.into_iter().map(|v| b1 * v).collect()
        }
        Shape::UpperSym { .. } => {
            let reach = ((shape.unit().reach() / step).ceil() as usize).min(n);
            let kern: Vec<f64> = (0..=2 * reach).map(|d| shape.eval((d as f64 - reach as f64) * step)).collect();
            let c = convolve(series, &kern);
            c[reach..reach + n].to_vec()
        }
        Shape::Lower { b3, b4 } => {
            let w = (b4 / step * (1.0 + 1e-12)).floor() as usize;
            let mut prefix = vec![0.0; n + 1];
            for i in 0..n {
                prefix[i + 1] = prefix[i] + series[i];
            }
            (0..n).map(|i| b3 * (prefix[(i + w + 1).min(n)] - prefix[i.saturating_sub(w)])).collect()
        }
    };
    full[half - out..=half + out].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    OnDiag,
    CompoundUpper,
    CompoundLower,
    DerivUpper(usize),
    BellSubexpCdf,
    BellSubexpDensity,
    BarUpper,
    BarUpperSym,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub t_grid: Vec<f64>,
    /// Spatial nodes per cut `1/ρ_t` (before dyadic snapping).
    pub x_per_cut: usize,
    /// Half-width of the x-window in units of `1/ρ_t`.
    pub x_span: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub bound: f64,
    /// Signed so that a valid estimate has `margin ≥ 0`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub constants: BTreeMap<String, f64>,
    pub max_rel_change: f64,
    pub flips: usize,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub spec_hash: String,
    pub estimate: EstimateId,
    pub constants: BTreeMap<String, f64>,
    pub grid: GridSummary,
    pub min_margin: f64,
    /// Smallest margin divided by the local density scale `σ_t`.
    pub min_margin_rel: f64,
    /// Points whose value is within its error estimate; excluded from the fit.
    pub unresolved: usize,
    pub refinement: Option<Refinement>,
    pub verdict: Verdict,
    pub caveats: Vec<String>,
    #[serde(skip)]
    pub margins: Vec<MarginRow>,
}

impl BoundCertificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn margins_csv(&self) -> String {
        let mut s = String::from("t,x,value,bound,margin\n");
        for r in &self.margins {
            s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.t, r.x, r.value, r.bound, r.margin));
        }
        s
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }
}

#[cfg(test)]
mod tests;
