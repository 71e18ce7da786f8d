//! Lévy measures: declarative specs, validation and the primitive integrals
//! every other module is built on.

mod atoms;
mod oscillating;
mod pieces;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::gamma;

pub use atoms::DyadicHalf;
pub use oscillating::{build_oscillating_density, Modulator, OscillatingDensity, OscillationReport};
pub use pieces::{Oscillatory, Piece, PiecewisePower};

use crate::error::{LevyError, Result};

/// An interval of jump magnitudes `|u|` with explicit endpoint inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct URange {
    pub lo: f64,
    pub lo_incl: bool,
    pub hi: f64,
    pub hi_incl: bool,
}

impl URange {
    pub fn new(lo: f64, lo_incl: bool, hi: f64, hi_incl: bool) -> Self {
        Self { lo, lo_incl, hi, hi_incl }
    }
    pub fn all() -> Self {
        Self::new(0.0, false, f64::INFINITY, false)
    }
    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, false, hi, false)
    }
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, true, hi, true)
    }
    /// `|u| ≤ r`
    pub fn up_to(r: f64) -> Self {
        Self::new(0.0, false, r, true)
    }
    /// `|u| < r`
    pub fn below(r: f64) -> Self {
        Self::new(0.0, false, r, false)
    }
    /// `|u| > r`
    pub fn beyond(r: f64) -> Self {
        Self::new(r, false, f64::INFINITY, false)
    }
    /// `|u| ≥ r`
    pub fn from(r: f64) -> Self {
        Self::new(r, true, f64::INFINITY, false)
    }
    pub fn below_hi(&self, u: f64) -> bool {
        if self.hi_incl {
            u <= self.hi
        } else {
            u < self.hi
        }
    }
    pub fn above_lo(&self, u: f64) -> bool {
        if self.lo_incl {
            u >= self.lo
        } else {
            u > self.lo
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_n_min() -> i64 {
    -60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum MeasureKind {
    /// `m(u) = C_α |u|^{-α-1}`
    PowerLaw { alpha: f64, c_alpha: f64 },
    /// `Σ_n 2^{nγ}(δ_{2^{-nυ}} + δ_{-2^{-nυ}})`
    DyadicAtoms {
        gamma: f64,
        upsilon: f64,
        #[serde(default = "default_n_min")]
        n_min: i64,
        #[serde(default)]
        n_max: Option<i64>,
    },
    TabulatedDensity {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        symmetric_extension: bool,
        #[serde(default)]
        tail_exponent: Option<f64>,
    },
    OscillatingStable {
        alpha_minus: f64,
        alpha_plus: f64,
        #[serde(default)]
        modulator: Modulator,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    #[serde(flatten)]
    pub kind: MeasureKind,
    #[serde(default)]
    pub drift_a: f64,
    #[serde(default = "default_true")]
    pub symmetric: bool,
}

/// `∫₀^∞ (1 − cos v) v^{-1-α} dv = π / (2Γ(α+1) sin(πα/2))`.
pub fn stable_cos_integral(alpha: f64) -> f64 {
    PI / (2.0 * gamma(alpha + 1.0) * (0.5 * PI * alpha).sin())
}

/// The `C_α` making `Re ψ(ξ) = |ξ|^α`.
pub fn stable_normalization(alpha: f64) -> f64 {
    0.5 / stable_cos_integral(alpha)
}

impl LevyMeasureSpec {
    pub fn power_law(alpha: f64, c_alpha: f64) -> Self {
        Self { kind: MeasureKind::PowerLaw { alpha, c_alpha }, drift_a: 0.0, symmetric: true }
    }

    /// Cauchy process: `C = 1/π`, `Re ψ(ξ) = |ξ|`.
    pub fn cauchy() -> Self {
        Self::power_law(1.0, 1.0 / PI)
    }

    /// Symmetric α-stable normalized so that `ψ(ξ) = |ξ|^α`.
    pub fn stable(alpha: f64) -> Self {
        Self::power_law(alpha, stable_normalization(alpha))
    }

    pub fn dyadic(gamma: f64, upsilon: f64) -> Self {
        Self {
            kind: MeasureKind::DyadicAtoms { gamma, upsilon, n_min: default_n_min(), n_max: None },
            drift_a: 0.0,
            symmetric: true,
        }
    }

    pub fn oscillating(alpha_minus: f64, alpha_plus: f64) -> Self {
        Self {
            kind: MeasureKind::OscillatingStable {
                alpha_minus,
                alpha_plus,
                modulator: Modulator::default(),
            },
            drift_a: 0.0,
            symmetric: true,
        }
    }

    /// Built-in presets: `cauchy`, `stable`, `dyadic`, `oscillating`.
    /// Missing parameters take the defaults `α = 1.5`, `γ = υ = 1`,
    /// `α₋ = 0.8`, `α₊ = 1.6`.
    pub fn preset(name: &str, params: &[f64]) -> Result<Self> {
        let get = |i: usize, d: f64| params.get(i).copied().unwrap_or(d);
        Ok(match name {
            "cauchy" => Self::cauchy(),
            "stable" => Self::stable(get(0, 1.5)),
            "dyadic" => Self::dyadic(get(0, 1.0), get(1, 1.0)),
            "oscillating" => Self::oscillating(get(0, 0.8), get(1, 1.6)),
            other => {
                return Err(LevyError::InvalidParameters(format!("unknown preset `{other}`")))
            }
        })
    }

    /// Short stable hash of the canonical JSON form.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pos,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Half {
    Pieces(PiecewisePower),
    Atoms(DyadicHalf),
}

impl Half {
    fn moment(&self, q: f64, range: URange) -> f64 {
        match self {
            Half::Pieces(p) => p.moment(q, range.lo, range.hi),
            Half::Atoms(a) => a.moment(q, range),
        }
    }

    fn oscillatory(&self, kind: Oscillatory, xi: f64, range: URange) -> Result<f64> {
        match self {
            Half::Pieces(p) => p.oscillatory(kind, xi, range.lo, range.hi),
            Half::Atoms(a) => Ok(a.oscillatory(kind, xi, range)),
        }
    }
}

/// A validated Lévy measure with drift, ready for integration.
#[derive(Debug, Clone)]
pub struct LevyMeasure {
    spec: LevyMeasureSpec,
    pos: Half,
    /// Mirror image of the negative jumps; `None` when there are none.
    neg: Option<Half>,
    oscillation: Option<OscillationReport>,
}

impl LevyMeasure {
    pub fn new(spec: LevyMeasureSpec) -> Result<Self> {
        let bad = |m: String| Err(LevyError::InvalidParameters(m));
        let (pos, neg, oscillation) = match &spec.kind {
            &MeasureKind::PowerLaw { alpha, c_alpha } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return bad(format!("alpha = {alpha} outside (0, 2)"));
                }
                if !(c_alpha > 0.0) {
                    return bad(format!("C_alpha = {c_alpha} must be positive"));
                }
                let h = Half::Pieces(PiecewisePower::power_law(c_alpha, -1.0 - alpha));
                (h.clone(), Some(h), None)
            }
            &MeasureKind::DyadicAtoms { gamma, upsilon, n_min, n_max } => {
                if !(gamma > 0.0 && upsilon > 0.0) {
                    return bad("gamma and upsilon must be positive".into());
                }
                if !(gamma < 2.0 * upsilon) {
                    return bad(format!("need gamma < 2 upsilon, got {gamma} >= {}", 2.0 * upsilon));
                }
                if n_max.is_some_and(|m| m < n_min) {
                    return bad("n_max < n_min".into());
                }
                let h = Half::Atoms(DyadicHalf { gamma, upsilon, n_min, n_max });
                (h.clone(), Some(h), None)
            }
            MeasureKind::TabulatedDensity { points, symmetric_extension, tail_exponent } => {
                let h = Half::Pieces(PiecewisePower::from_table(points, *tail_exponent)?);
                let neg = symmetric_extension.then(|| h.clone());
                (h, neg, None)
            }
            MeasureKind::OscillatingStable { alpha_minus, alpha_plus, modulator } => {
                let built = build_oscillating_density(*alpha_minus, *alpha_plus, modulator)?;
                let h = Half::Pieces(PiecewisePower::from_table(&built.points, Some(built.tail_exponent))?);
                (h.clone(), Some(h), Some(built.report))
            }
        };
        Ok(Self { spec, pos, neg, oscillation })
    }

    pub fn spec(&self) -> &LevyMeasureSpec {
        &self.spec
    }

    pub fn drift(&self) -> f64 {
        self.spec.drift_a
    }

    pub fn positive_half(&self) -> &Half {
        &self.pos
    }

    pub fn negative_half(&self) -> Option<&Half> {
        self.neg.as_ref()
    }

    pub fn oscillation_report(&self) -> Option<&OscillationReport> {
        self.oscillation.as_ref()
    }

    /// The measure is symmetric (independent of the drift).
    pub fn is_symmetric(&self) -> bool {
        self.neg.as_ref() == Some(&self.pos)
    }

    /// The process is symmetric: symmetric measure and zero drift.
    pub fn is_symmetric_process(&self) -> bool {
        self.is_symmetric() && self.spec.drift_a == 0.0
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.pos, Half::Atoms(_))
    }

    fn power_law(&self) -> Option<(f64, f64)> {
        match self.spec.kind {
            MeasureKind::PowerLaw { alpha, c_alpha } => Some((alpha, c_alpha)),
            _ => None,
        }
    }

    fn even<F: Fn(&Half) -> f64>(&self, f: F) -> f64 {
        f(&self.pos) + self.neg.as_ref().map_or(0.0, &f)
    }

    fn odd<F: Fn(&Half) -> f64>(&self, f: F) -> f64 {
        if self.is_symmetric() {
            return 0.0;
        }
        f(&self.pos) - self.neg.as_ref().map_or(0.0, &f)
    }

    fn half(&self, side: Side) -> Option<&Half> {
        match side {
            Side::Pos => Some(&self.pos),
            Side::Neg => self.neg.as_ref(),
        }
    }

    /// `∫ |u|^q μ(du)` over jumps of one sign with `|u| ∈ range`.
    pub fn side_moment(&self, side: Side, q: f64, range: URange) -> f64 {
        self.half(side).map_or(0.0, |h| h.moment(q, range))
    }

    /// Atoms `(|u|, weight)` of one sign with `|u| ∈ range`, at most down to
    /// index `n_last`; empty for densities.
    pub fn side_atoms(&self, side: Side, range: URange, n_last: i64) -> Vec<(f64, f64)> {
        match self.half(side) {
            Some(Half::Atoms(a)) => a.atoms(range, n_last),
            _ => Vec::new(),
        }
    }

    /// Density of `μ` at a signed jump size (zero for atomic measures).
    pub fn density(&self, u: f64) -> f64 {
        let side = if u >= 0.0 { Side::Pos } else { Side::Neg };
        match self.half(side) {
            Some(Half::Pieces(p)) => p.density(u.abs()),
            _ => 0.0,
        }
    }

    /// `t ∫_{|u| > r} (1 − e^{iξu}) μ(du)`: the exponent of the big jumps.
    pub fn big_jump_exponent(&self, t: f64, r: f64, xi: f64) -> Result<Complex64> {
        let a = xi.abs();
        if a == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let range = URange::beyond(r);
        let mut re = self.pos.oscillatory(Oscillatory::OneMinusCos, a, range)?;
        let mut im = -self.pos.oscillatory(Oscillatory::Sin, a, range)?;
        if let Some(neg) = &self.neg {
            if neg == &self.pos {
                re *= 2.0;
                im = 0.0;
            } else {
                re += neg.oscillatory(Oscillatory::OneMinusCos, a, range)?;
                im += neg.oscillatory(Oscillatory::Sin, a, range)?;
            }
        }
        Ok(Complex64::new(t * re, t * xi.signum() * im))
    }

    /// `∫_{|u| ∈ range} |u|^q μ(du)`.
    pub fn abs_moment(&self, q: f64, range: URange) -> f64 {
        self.even(|h| h.moment(q, range))
    }

    /// `∫_{|u| ∈ range} u·|u|^{q-1} μ(du)`: the signed (odd) counterpart.
    pub fn signed_moment(&self, q: f64, range: URange) -> f64 {
        self.odd(|h| h.moment(q, range))
    }

    /// `∫_{|u| ≤ ε} u² μ(du)`
    pub fn truncated_second_moment(&self, eps: f64) -> f64 {
        if let Some((alpha, c)) = self.power_law() {
            return 2.0 * c * eps.powf(2.0 - alpha) / (2.0 - alpha);
        }
        self.abs_moment(2.0, URange::up_to(eps))
    }

    /// `μ({|u| > r})`
    pub fn tail_mass(&self, r: f64) -> f64 {
        if let Some((alpha, c)) = self.power_law() {
            return 2.0 * c * r.powf(-alpha) / alpha;
        }
        self.abs_moment(0.0, URange::beyond(r))
    }

    /// `ψ^L(ξ) = ∫_{|ξu|<1} (ξu)² μ(du)`
    pub fn psi_l(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a == 0.0 {
            return 0.0;
        }
        if let Some((alpha, c)) = self.power_law() {
            return 2.0 * c * a.powf(alpha) / (2.0 - alpha);
        }
        a * a * self.abs_moment(2.0, URange::below(1.0 / a))
    }

    /// `ψ^U(ξ) = ∫ ((ξu)² ∧ 1) μ(du)`
    pub fn psi_u(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a == 0.0 {
            return 0.0;
        }
        if let Some((alpha, c)) = self.power_law() {
            return 2.0 * c * a.powf(alpha) * (1.0 / (2.0 - alpha) + 1.0 / alpha);
        }
        self.psi_l(a) + self.abs_moment(0.0, URange::from(1.0 / a))
    }

    /// `Re ψ(ξ) = ∫ (1 − cos ξu) μ(du)`
    pub fn re_psi(&self, xi: f64) -> Result<f64> {
        let a = xi.abs();
        if a == 0.0 {
            return Ok(0.0);
        }
        if let Some((alpha, c)) = self.power_law() {
            return Ok(2.0 * c * stable_cos_integral(alpha) * a.powf(alpha));
        }
        let mut total = self.pos.oscillatory(Oscillatory::OneMinusCos, a, URange::all())?;
        if let Some(neg) = &self.neg {
            total += if neg == &self.pos {
                total
            } else {
                neg.oscillatory(Oscillatory::OneMinusCos, a, URange::all())?
            };
        }
        Ok(total)
    }

    /// `Im ψ(ξ) = aξ + ∫ (ξu 1_{|u|<1} − sin ξu) μ(du)`
    pub fn im_psi(&self, xi: f64) -> Result<f64> {
        let drift = self.spec.drift_a * xi;
        if xi == 0.0 || self.is_symmetric() {
            return Ok(drift);
        }
        let a = xi.abs();
        let side = |h: &Half| -> Result<f64> {
            Ok(h.oscillatory(Oscillatory::XMinusSin, a, URange::below(1.0))?
                - h.oscillatory(Oscillatory::Sin, a, URange::from(1.0))?)
        };
        let mut g = side(&self.pos)?;
        if let Some(neg) = &self.neg {
            g -= side(neg)?;
        }
        Ok(drift + xi.signum() * g)
    }

    pub fn psi(&self, xi: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.re_psi(xi)?, self.im_psi(xi)?))
    }

    /// `t ∫_{|u| ≤ r} (1 − e^{iξu} + iξu) μ(du)`: the exponent of the
    /// small-jump part at cut `r = 1/ρ_t`.
    pub fn psi_truncated(&self, t: f64, r: f64, xi: f64) -> Result<Complex64> {
        let a = xi.abs();
        if a == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let range = URange::up_to(r);
        let re_pos = self.pos.oscillatory(Oscillatory::OneMinusCos, a, range)?;
        let mut re = re_pos;
        let mut im = 0.0;
        if let Some(neg) = &self.neg {
            if neg == &self.pos {
                re += re_pos;
            } else {
                re += neg.oscillatory(Oscillatory::OneMinusCos, a, range)?;
                im -= neg.oscillatory(Oscillatory::XMinusSin, a, range)?;
            }
        }
        if !self.is_symmetric() {
            im += self.pos.oscillatory(Oscillatory::XMinusSin, a, range)?;
        }
        Ok(Complex64::new(t * re, t * xi.signum() * im))
    }

    /// `a_t = t(a + ∫ u (1_{|u|<1} − 1_{|u|≤r}) μ(du))` at cut `r = 1/ρ_t`.
    pub fn shift(&self, t: f64, r: f64) -> f64 {
        let inner = if r < 1.0 {
            self.signed_moment(1.0, URange::open(r, 1.0))
        } else {
            -self.signed_moment(1.0, URange::closed(1.0, r))
        };
        t * (self.spec.drift_a + inner)
    }

    /// Frequencies in `[lo, hi]` where `ψ^L` jumps (atomic measures only).
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match &self.pos {
            Half::Atoms(a) => a.breakpoints(lo, hi),
            Half::Pieces(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCertificate {
    /// `analytic` or `doubling`
    pub method: String,
    pub detail: String,
    /// Masses of successive refinements for the doubling test.
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub spec_hash: String,
    /// `∫ (1 ∧ u²) μ(du)`
    pub lower_integral: f64,
    pub divergence: DivergenceCertificate,
    pub symmetric: bool,
    pub declared_symmetric: bool,
    pub oscillation: Option<OscillationReport>,
}

/// Checks parameter ranges, integrability, infinite activity and symmetry.
pub fn validate(spec: &LevyMeasureSpec) -> Result<ValidationReport> {
    let measure = LevyMeasure::new(spec.clone())?;
    let symmetric = measure.is_symmetric();
    if symmetric != spec.symmetric {
        return Err(LevyError::InvalidParameters(format!(
            "declared symmetric = {} but the measure is {}symmetric",
            spec.symmetric,
            if symmetric { "" } else { "not " }
        )));
    }
    let lower_integral = measure.psi_u(1.0);
    if !lower_integral.is_finite() {
        return Err(LevyError::InvalidParameters("∫(1 ∧ u²)μ(du) diverges".into()));
    }
    let divergence = match &measure.pos {
        Half::Pieces(p) if matches!(spec.kind, MeasureKind::PowerLaw { .. }) => DivergenceCertificate {
            method: "analytic".into(),
            detail: format!("density ~ |u|^{} is not integrable at 0", p.head_exponent()),
            masses: Vec::new(),
        },
        Half::Pieces(p) => {
            let u0 = p.pieces()[0].hi;
            let masses: Vec<f64> = (0..8)
                .map(|k| {
                    let hi = u0 * (-(k as f64)).exp2();
                    measure.abs_moment(0.0, URange::open(hi / 2.0, hi))
                })
                .collect();
            let growing = masses.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
            if !growing {
                let mass = measure.abs_moment(0.0, URange::all());
                return Err(LevyError::FiniteActivity { mass });
            }
            DivergenceCertificate {
                method: "doubling".into(),
                detail: format!(
                    "mass of dyadic shells toward 0 is nondecreasing (head exponent {})",
                    p.head_exponent()
                ),
                masses,
            }
        }
        Half::Atoms(a) => match a.n_max {
            None => DivergenceCertificate {
                method: "analytic".into(),
                detail: format!("atom weights 2^(n·{}) diverge as n → ∞", a.gamma),
                masses: Vec::new(),
            },
            Some(n_max) => {
                let masses: Vec<f64> = [n_max, 2 * n_max.max(1), 4 * n_max.max(1)]
                    .iter()
                    .map(|&m| {
                        let d = DyadicHalf { n_max: Some(m), ..*a };
                        2.0 * d.moment(0.0, URange::all())
                    })
                    .collect();
                DivergenceCertificate {
                    method: "doubling".into(),
                    detail: "truncated atom mass grows without bound as n_max doubles".into(),
                    masses,
                }
            }
        },
    };
    Ok(ValidationReport {
        spec_hash: spec.hash_hex(),
        lower_integral,
        divergence,
        symmetric,
        declared_symmetric: spec.symmetric,
        oscillation: measure.oscillation.clone(),
    })
}

#[cfg(test)]
mod tests;
