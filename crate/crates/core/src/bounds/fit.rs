//! Grid-sup fits of the kernel constants and their certificates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bell::TailSpec;
use super::context::{BoundsContext, Sampled, TimeSlice};
use super::{BoundCertificate, EstimateId, GridSummary, MarginRow, Refinement, Shape, MARGIN_SLACK};
use crate::decomposition::build;
use crate::error::{LevyError, Result};
use crate::fourier::Fourier;
use crate::measure::{Side, URange};
use crate::report::Verdict;

/// Largest relative change of a constant under refinement still counted as stable.
const STABLE_CHANGE: f64 = 0.05;
/// Largest fraction of flipped points on the refined grid before FAIL.
const FLIP_FRACTION: f64 = 0.01;

/// Left-hand side of an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Lhs {
    Density,
    Deriv(usize),
    Shifted,
    Bar,
    Bell(TailSpec),
}

impl Lhs {
    fn order(self) -> usize {
        match self {
            Lhs::Deriv(k) => k,
            _ => 0,
        }
    }

    fn sampled(self, s: &TimeSlice) -> Result<&Sampled> {
        let missing = |what: &str| LevyError::InvalidParameters(format!("bounds context lacks {what}"));
        match self {
            Lhs::Density | Lhs::Bell(_) => Ok(&s.p),
            Lhs::Deriv(k) => s.derivs.get(&k).ok_or_else(|| missing(&format!("derivative {k}"))),
            Lhs::Shifted => s.p_lower.as_ref().ok_or_else(|| missing("the lower-bound grid")),
            Lhs::Bar => s.bar.as_ref().ok_or_else(|| missing("the bar density")),
        }
    }

    /// `σ_t` times the unit-amplitude kernel term on the slice nodes.
    fn unit_bound(self, s: &TimeSlice, shape: Shape) -> Vec<f64> {
        let sigma = s.rho.powi(self.order() as i32 + 1);
        let c = match self {
            Lhs::Bar => s.kernel_only(shape),
            Lhs::Bell(tail) => {
                let mut c = s.kernel_only(shape);
                for (c, x) in c.iter_mut().zip(&s.x) {
                    *c += tail.tail_term((x * s.rho).abs());
                }
                c
            }
            _ => s.compound(shape),
        };
        c.into_iter().map(|v| sigma * v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Direction {
    Upper,
    Lower,
}

/// `(values, errors, unit bounds)` per slice.
type Profile = Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>;

fn profile(ctx: &BoundsContext, lhs: Lhs, shape: Shape) -> Result<Profile> {
    ctx.slices
        .par_iter()
        .map(|s| {
            let d = lhs.sampled(s)?;
            let v = match lhs {
                Lhs::Deriv(_) => d.values.iter().map(|v| v.abs()).collect(),
                _ => d.values.clone(),
            };
            Ok((v, d.errors.clone(), lhs.unit_bound(s, shape)))
        })
        .collect()
}

/// Grid-sup amplitude for one kernel shape, or `None` if no finite amplitude exists.
fn amplitude(prof: &Profile, dir: Direction, safety: f64) -> Option<f64> {
    match dir {
        Direction::Upper => {
            let mut a: f64 = 0.0;
            for (v, e, u) in prof {
                for i in 0..v.len() {
                    if v[i] <= e[i] {
                        continue;
                    }
                    if u[i] <= 0.0 {
                        return None;
                    }
                    a = a.max((v[i] + e[i]) / u[i]);
                }
            }
            (a.is_finite() && a > 0.0).then_some(a * safety)
        }
        Direction::Lower => {
            let mut a = f64::INFINITY;
            for (v, e, u) in prof {
                let umax = u.iter().fold(0.0, |m: f64, x| m.max(*x));
                for i in 0..v.len() {
                    if u[i] <= 1e-12 * umax || v[i] <= e[i] {
                        continue;
                    }
                    a = a.min((v[i] - e[i]) / u[i]);
                }
            }
            (a.is_finite() && a > 0.0).then_some(a / safety)
        }
    }
}

fn with_amplitude(shape: Shape, a: f64) -> Shape {
    match shape {
        Shape::Upper { b2, .. } => Shape::Upper { b1: a, b2 },
        Shape::UpperSym { b2, .. } => Shape::UpperSym { b1: a, b2 },
        Shape::Lower { b4, .. } => Shape::Lower { b3: a, b4 },
    }
}

fn constants_of(shape: Shape) -> BTreeMap<String, f64> {
    let pairs = match shape {
        Shape::Upper { b1, b2 } | Shape::UpperSym { b1, b2 } => [("b1", b1), ("b2", b2)],
        Shape::Lower { b3, b4 } => [("b3", b3), ("b4", b4)],
    };
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Best shape over the configured width grid.
fn select(ctx: &BoundsContext, lhs: Lhs, dir: Direction, family: fn(f64) -> Shape) -> Result<Shape> {
    let cfg = &ctx.config;
    let widths = match dir {
        Direction::Upper => &cfg.b2_grid,
        Direction::Lower => &cfg.b4_grid,
    };
    let fits: Vec<Option<(Shape, f64)>> = widths
        .par_iter()
        .map(|&w| {
            let shape = family(w);
            let prof = profile(ctx, lhs, shape)?;
            Ok(amplitude(&prof, dir, cfg.safety).map(|a| {
                let score = match dir {
                    Direction::Upper => a * (1.0 + cfg.penalty / w.sqrt()),
                    Direction::Lower => -a * w,
                };
                (with_amplitude(shape, a), score)
            }))
        })
        .collect::<Result<_>>()?;
    fits.into_iter()
        .flatten()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
        .ok_or_else(|| {
            LevyError::NoFiniteConstants(match dir {
                Direction::Upper => "density exceeds every kernel envelope on the b2 grid".into(),
                Direction::Lower => "no positive lower amplitude on the b4 grid".into(),
            })
        })
}

/// Margins of a fixed shape over the context grid.
struct Check {
    rows: Vec<MarginRow>,
    violations: usize,
    unresolved: usize,
    min_margin: f64,
    min_margin_rel: f64,
}

fn check(ctx: &BoundsContext, lhs: Lhs, dir: Direction, shape: Shape, keep_rows: bool) -> Result<Check> {
    let prof = profile(ctx, lhs, shape.unit())?;
    let a = shape.amplitude();
    let mut c =
        Check { rows: Vec::new(), violations: 0, unresolved: 0, min_margin: f64::INFINITY, min_margin_rel: f64::INFINITY };
    for (s, (v, e, u)) in ctx.slices.iter().zip(&prof) {
        let sigma = s.rho.powi(lhs.order() as i32 + 1);
        for i in 0..v.len() {
            let bound = a * u[i];
            let margin = match dir {
                Direction::Upper => bound - v[i],
                Direction::Lower => v[i] - bound,
            };
            if v[i] <= e[i] {
                c.unresolved += 1;
            }
            if margin < -(MARGIN_SLACK + e[i]) {
                c.violations += 1;
            }
            c.min_margin = c.min_margin.min(margin);
            c.min_margin_rel = c.min_margin_rel.min(margin / sigma);
            if keep_rows {
                c.rows.push(MarginRow { t: s.t, x: s.x[i], value: v[i], bound, margin });
            }
        }
    }
    Ok(c)
}

fn grid_summary(ctx: &BoundsContext) -> GridSummary {
    GridSummary {
        t_grid: ctx.config.t_grid.clone(),
        x_per_cut: ctx.config.x_per_cut,
        x_span: ctx.config.x_span,
        points: ctx.points(),
    }
}

/// Margins of `shape` on a (finer) context: `(flips, checked)`.
pub fn verify_on(ctx: &BoundsContext, estimate: EstimateId, shape: Shape) -> Result<(usize, usize)> {
    let (lhs, dir) = kind(estimate)?;
    let c = check(ctx, lhs, dir, shape, false)?;
    Ok((c.violations, ctx.points()))
}

fn kind(estimate: EstimateId) -> Result<(Lhs, Direction)> {
    Ok(match estimate {
        EstimateId::CompoundUpper => (Lhs::Density, Direction::Upper),
        EstimateId::CompoundLower => (Lhs::Shifted, Direction::Lower),
        EstimateId::DerivUpper(k) => (Lhs::Deriv(k), Direction::Upper),
        EstimateId::BarUpper | EstimateId::BarUpperSym => (Lhs::Bar, Direction::Upper),
        other => return Err(LevyError::InvalidParameters(format!("{other:?} is not a kernel estimate"))),
    })
}

fn max_rel_change(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    a.iter()
        .filter_map(|(k, x)| b.get(k).map(|y| (x - y).abs() / x.abs().max(y.abs())))
        .fold(0.0, f64::max)
}

/// Combines the base check with the refinement outcome into a verdict.
pub fn finalize(mut cert: BoundCertificate, refinement: Option<Refinement>) -> BoundCertificate {
    if let Some(r) = &refinement {
        let frac = r.flips as f64 / r.checked.max(1) as f64;
        let v = if r.flips == 0 {
            if r.max_rel_change <= STABLE_CHANGE {
                Verdict::Pass
            } else {
                cert.caveats.push(format!("constants moved by {:.2}% under refinement", 100.0 * r.max_rel_change));
                Verdict::Marginal
            }
        } else if frac <= FLIP_FRACTION {
            cert.caveats.push(format!("{} of {} refined points flip sign", r.flips, r.checked));
            Verdict::Marginal
        } else {
            cert.caveats.push(format!("{} of {} refined points flip sign", r.flips, r.checked));
            Verdict::Fail
        };
        cert.verdict = cert.verdict.and(v);
    }
    cert.refinement = refinement;
    cert
}

fn kernel_fit(
    ctx: &BoundsContext,
    refined: Option<&BoundsContext>,
    estimate: EstimateId,
    (lhs, dir): (Lhs, Direction),
    family: fn(f64) -> Shape,
    fixed_width: Option<f64>,
) -> Result<BoundCertificate> {
    let fit = |c: &BoundsContext| match fixed_width {
        Some(w) => {
            let prof = profile(c, lhs, family(w))?;
            amplitude(&prof, dir, c.config.safety)
                .map(|a| with_amplitude(family(w), a))
                .ok_or_else(|| LevyError::NoFiniteConstants(format!("no finite amplitude at width {w}")))
        }
        None => select(c, lhs, dir, family),
    };
    let shape = fit(ctx)?;
    let base = check(ctx, lhs, dir, shape, true)?;
    let mut caveats = vec![format!("constants are grid-sup envelopes inflated by {}", ctx.config.safety)];
    if base.unresolved > 0 {
        caveats.push(format!(
            "{} points below their numerical error are excluded from the fit and checked within that error",
            base.unresolved
        ));
    }
    let cert = BoundCertificate {
        spec_hash: ctx.fourier.measure().spec().hash_hex(),
        estimate,
        constants: constants_of(shape),
        grid: grid_summary(ctx),
        min_margin: base.min_margin,
        min_margin_rel: base.min_margin_rel,
        unresolved: base.unresolved,
        refinement: None,
        verdict: Verdict::from_bool(base.violations == 0),
        caveats,
        margins: base.rows,
    };
    let refinement = match refined {
        Some(r) => {
            let flips = check(r, lhs, dir, shape, false)?.violations;
            let checked = r.points();
            let constants = constants_of(fit(r)?);
            Some(Refinement {
                max_rel_change: max_rel_change(&cert.constants, &constants),
                constants,
                flips,
                checked,
            })
        }
        None => None,
    };
    Ok(finalize(cert, refinement))
}

fn upper(b2: f64) -> Shape {
    Shape::Upper { b1: 1.0, b2 }
}

fn upper_sym(b2: f64) -> Shape {
    Shape::UpperSym { b1: 1.0, b2 }
}

fn lower(b4: f64) -> Shape {
    Shape::Lower { b3: 1.0, b4 }
}

/// `p_t(x + a_t) ≤ C₁ρ_t(e^{−b₂ρ_t|x|} + tail(ρ_t|x|))` with the tail term of `tail`.
pub(super) fn bell_fit(
    ctx: &BoundsContext,
    refined: Option<&BoundsContext>,
    tail: TailSpec,
) -> Result<BoundCertificate> {
    let estimate = if tail.is_density() { EstimateId::BellSubexpDensity } else { EstimateId::BellSubexpCdf };
    let mut cert = kernel_fit(ctx, refined, estimate, (Lhs::Bell(tail), Direction::Upper), upper, None)?;
    rename(&mut cert.constants);
    if let Some(r) = cert.refinement.as_mut() {
        rename(&mut r.constants);
    }
    Ok(cert)
}

fn rename(c: &mut BTreeMap<String, f64>) {
    if let Some(v) = c.remove("b1") {
        c.insert("C1".into(), v);
    }
}

/// `p_t(x + a_t) ≤ Σ_m (1/m!)∫ρ_t b₁e^{−b₂ρ_t|x−y|} Λ_t^{*m}(dy)`.
pub fn fit_compound_upper(ctx: &BoundsContext, refined: Option<&BoundsContext>) -> Result<BoundCertificate> {
    kernel_fit(ctx, refined, EstimateId::CompoundUpper, (Lhs::Density, Direction::Upper), upper, None)
}

/// `p_t(x + a_t − x_t) ≥ Σ_m (1/m!)∫ρ_t b₃1_{ρ_t|x−y| ≤ b₄} Λ_t^{*m}(dy)`.
pub fn fit_compound_lower(ctx: &BoundsContext, refined: Option<&BoundsContext>) -> Result<BoundCertificate> {
    let mut cert = kernel_fit(ctx, refined, EstimateId::CompoundLower, (Lhs::Shifted, Direction::Lower), lower, None)?;
    let xt = ctx.slices.iter().filter_map(|s| s.x_t.map(|x| (x * s.rho).abs())).fold(0.0, f64::max);
    cert.constants.insert("max_rho_xt".into(), xt);
    Ok(cert)
}

/// `|∂^k p_t(x + a_t)| ≤ Σ_m (1/m!)∫ρ_t^{k+1} b₁e^{−b₂ρ_t|x−y|} Λ_t^{*m}(dy)`.
pub fn fit_derivative_upper(ctx: &BoundsContext, refined: Option<&BoundsContext>, k: usize) -> Result<BoundCertificate> {
    kernel_fit(ctx, refined, EstimateId::DerivUpper(k), (Lhs::Deriv(k), Direction::Upper), upper, None)
}

/// `p̄_t(x + a_t) ≤ ρ_t h(ρ_t x)` with the exponential kernel (`sym = false`)
/// or `b₁e^{−b₂|x|ln(1+|x|)}`; `b2` fixes the width instead of searching.
pub fn fit_bar_upper(
    ctx: &BoundsContext,
    refined: Option<&BoundsContext>,
    sym: bool,
    b2: Option<f64>,
) -> Result<BoundCertificate> {
    if sym {
        kernel_fit(ctx, refined, EstimateId::BarUpperSym, (Lhs::Bar, Direction::Upper), upper_sym, b2)
    } else {
        kernel_fit(ctx, refined, EstimateId::BarUpper, (Lhs::Bar, Direction::Upper), upper, b2)
    }
}

/// Exponential and `x ln(1+x)` bar-density envelopes at a common `b₂`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sharpening {
    pub b2: f64,
    pub b1_exp: f64,
    pub b1_sym: f64,
    /// Points with `ρ_t|x| ≥ 5`.
    pub checked: usize,
    /// Points where the symmetric envelope exceeds the exponential one.
    pub violations: usize,
    /// `max bound_sym/bound_exp` over the checked points.
    pub max_ratio: f64,
    pub verdict: Verdict,
    pub exp: BoundCertificate,
    pub sym: BoundCertificate,
}

pub fn compare_sharpening(ctx: &BoundsContext, refined: Option<&BoundsContext>) -> Result<Sharpening> {
    let exp = fit_bar_upper(ctx, refined, false, None)?;
    let b2 = exp.constant("b2").expect("upper shape has b2");
    let sym = fit_bar_upper(ctx, refined, true, Some(b2))?;
    let (b1_exp, b1_sym) = (exp.constant("b1").expect("b1"), sym.constant("b1").expect("b1"));
    let (mut checked, mut violations, mut max_ratio) = (0, 0, 0.0f64);
    for (re, rs) in exp.margins.iter().zip(&sym.margins) {
        let s = ctx.slices.iter().find(|s| s.t == re.t).expect("slice of row");
        if (re.x * s.rho).abs() < 5.0 {
            continue;
        }
        checked += 1;
        if rs.margin > re.margin + MARGIN_SLACK {
            violations += 1;
        }
        if re.bound > 0.0 {
            max_ratio = max_ratio.max(rs.bound / re.bound);
        }
    }
    let verdict = Verdict::from_bool(violations == 0 && checked > 0).and(exp.verdict).and(sym.verdict);
    Ok(Sharpening { b2, b1_exp, b1_sym, checked, violations, max_ratio, verdict, exp, sym })
}

/// `max_x p_t(x) ∈ [cρ_t, dρ_t]` over `t_grid`; with `refine`, the grid
/// with geometric midpoints inserted must keep `d/c` within 5%.
pub fn fit_on_diagonal(f: &Fourier, t_grid: &[f64], refine: bool) -> Result<BoundCertificate> {
    let ratios = |ts: &[f64]| -> Result<Vec<(f64, f64, f64)>> {
        ts.iter()
            .map(|&t| {
                let rho = build(f.measure(), t)?.rho_t;
                let (x, v) = f.peak(t)?;
                Ok((t, x, v / rho))
            })
            .collect()
    };
    let cd = |r: &[(f64, f64, f64)]| {
        r.iter().fold((f64::INFINITY, 0.0f64), |(c, d), &(_, _, q)| (c.min(q), d.max(q)))
    };
    let base = ratios(t_grid)?;
    let (c, d) = cd(&base);
    let constants: BTreeMap<String, f64> = [("c".to_string(), c), ("d".to_string(), d)].into();
    let ok = c > 0.0 && c <= d && d.is_finite();
    let margins = base
        .iter()
        .map(|&(t, x, q)| MarginRow { t, x, value: q, bound: d, margin: (d - q).min(q - c) })
        .collect();
    let cert = BoundCertificate {
        spec_hash: f.measure().spec().hash_hex(),
        estimate: EstimateId::OnDiag,
        constants,
        grid: GridSummary { t_grid: t_grid.to_vec(), x_per_cut: 200, x_span: 10.0, points: t_grid.len() },
        min_margin: 0.0,
        min_margin_rel: 0.0,
        unresolved: 0,
        refinement: None,
        verdict: Verdict::from_bool(ok),
        caveats: vec!["values are max_x p_t(x)/ρ_t; the margins column is the distance to the nearer of c, d".into()],
        margins,
    };
    if !refine || t_grid.len() < 2 {
        return Ok(cert);
    }
    let mids: Vec<f64> = t_grid.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    let mid = ratios(&mids)?;
    let (c2, d2) = cd(&mid);
    let (c2, d2) = (c2.min(c), d2.max(d));
    let change = ((d2 / c2) - (d / c)).abs() / (d / c);
    let refinement = Refinement {
        constants: [("c".to_string(), c2), ("d".to_string(), d2)].into(),
        max_rel_change: change,
        flips: 0,
        checked: mids.len(),
    };
    Ok(finalize(cert, Some(refinement)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomRow {
    pub t: f64,
    pub n: i64,
    pub x: f64,
    pub density: f64,
    /// `p_t(x)/(tρ_t 2^{nγ})`
    pub ratio: f64,
}

/// `p_t(2^{−nυ}) / (tρ_t 2^{nγ})` for the atoms in `(1/ρ_t, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DyadicAtomTable {
    pub rows: Vec<AtomRow>,
    /// Smallest ratio, the constant `c`.
    pub c: f64,
    pub verdict: Verdict,
}

impl DyadicAtomTable {
    pub fn compute(f: &Fourier, t_grid: &[f64]) -> Result<Self> {
        let m = f.measure();
        if !m.is_atomic() {
            return Err(LevyError::InvalidParameters("the atom table needs an atomic measure".into()));
        }
        let (gamma, upsilon) = match m.spec().kind {
            crate::measure::MeasureKind::DyadicAtoms { gamma, upsilon, .. } => (gamma, upsilon),
            _ => return Err(LevyError::InvalidParameters("the atom table needs dyadic atoms".into())),
        };
        let mut rows = Vec::new();
        for &t in t_grid {
            let dec = build(m, t)?;
            let atoms = m.side_atoms(Side::Pos, URange::new(dec.cut, false, 1.0, true), i64::MAX);
            if atoms.is_empty() {
                continue;
            }
            let xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            let p = f.density(t, &xs, 0)?;
            for (&x, &v) in xs.iter().zip(&p.values) {
                let n = (-x.log2() / upsilon).round() as i64;
                let ratio = v / (t * dec.rho_t * 2f64.powf(n as f64 * gamma));
                rows.push(AtomRow { t, n, x, density: v, ratio });
            }
        }
        let c = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let verdict = Verdict::from_bool(!rows.is_empty() && c > 0.0 && c.is_finite());
        Ok(Self { rows, c, verdict })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,n,x,density,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{:e},{},{:e},{:e},{:e}\n", r.t, r.n, r.x, r.density, r.ratio));
        }
        s
    }
}
