//! Bell-type envelopes `C₁ρ_t(f_upper(ρ_t x) + tail(|ρ_t x|))` under a
//! sub-exponential tail hypothesis on the rescaled jump measure.

use serde::{Deserialize, Serialize};

use super::context::BoundsContext;
use super::fit::bell_fit;
use super::BoundCertificate;
use crate::decomposition::build;
use crate::error::{LevyError, Result};
use crate::measure::LevyMeasure;
use crate::quad::integrate;
use crate::report::{log_grid, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TailSpec {
    /// `1 − G(v) = v^{−α}` for `v ≥ 1`.
    ParetoCdf { alpha: f64 },
    /// `g(u) = scale·u^{−1−α}` for `u ≥ 1`.
    ParetoDensity { alpha: f64, scale: f64 },
    /// Point mass at zero.
    Dirac,
}

impl TailSpec {
    pub fn is_density(&self) -> bool {
        matches!(self, TailSpec::ParetoDensity { .. })
    }

    pub fn family(&self) -> &'static str {
        match self {
            TailSpec::ParetoCdf { .. } | TailSpec::ParetoDensity { .. } => "pareto",
            TailSpec::Dirac => "degenerate",
        }
    }

    /// `1 − G(v)` or `g(v)` for `v ≥ 0`; zero below 1 in density form.
    pub fn tail_term(&self, v: f64) -> f64 {
        match *self {
            TailSpec::ParetoCdf { alpha } => {
                if v >= 1.0 {
                    v.powf(-alpha)
                } else {
                    1.0
                }
            }
            TailSpec::ParetoDensity { alpha, scale } => {
                if v >= 1.0 {
                    scale * v.powf(-1.0 - alpha)
                } else {
                    0.0
                }
            }
            TailSpec::Dirac => 0.0,
        }
    }

    /// Left-hand side of the hypothesis at scale `ρ_t`: `tμ({|ρ_t u| > v})`
    /// in CDF form, `tρ_t^{−1}m(±v/ρ_t)` (larger side) in density form.
    fn measure_side(&self, m: &LevyMeasure, t: f64, rho: f64, v: f64) -> f64 {
        if self.is_density() {
            let u = v / rho;
            t / rho * m.density(u).max(m.density(-u))
        } else {
            t * m.tail_mass(v / rho)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Precondition {
    /// Smallest `C` with the hypothesis holding on the grid.
    pub c: f64,
    pub t_grid: Vec<f64>,
    pub v_grid: Vec<f64>,
    /// `(t, v)` where the ratio is largest.
    pub worst: (f64, f64),
    pub verdict: Verdict,
}

/// Checks `tμ({|ρ_t u| > v}) ≤ C(1 − G(v))` (or the density analogue with
/// `g`) for `v ∈ [1, 10⁴]`, ten points per decade. A ratio still growing
/// over the last decade counts as a violation.
pub fn check_precondition(m: &LevyMeasure, t_grid: &[f64], tail: TailSpec) -> Result<Precondition> {
    if tail.is_density() && m.is_atomic() {
        return Err(LevyError::InvalidParameters("density-form tail needs an absolutely continuous measure".into()));
    }
    let v_grid = log_grid(1.0, 1e4, 10);
    let head = v_grid.iter().filter(|&&v| v <= 1e3 * (1.0 + 1e-12)).count();
    let (mut c, mut worst) = (0.0f64, (t_grid[0], 1.0));
    for &t in t_grid {
        let rho = build(m, t)?.rho_t;
        let mut ratios = Vec::with_capacity(v_grid.len());
        for &v in &v_grid {
            let lhs = tail.measure_side(m, t, rho, v);
            let rhs = tail.tail_term(v);
            if rhs <= 0.0 {
                if lhs > 0.0 {
                    return Err(LevyError::PreconditionFailed {
                        t,
                        v,
                        detail: format!("tail term vanishes while the measure side is {lhs:e}"),
                    });
                }
                ratios.push(0.0);
                continue;
            }
            let r = lhs / rhs;
            if r > c {
                c = r;
                worst = (t, v);
            }
            ratios.push(r);
        }
        let early = ratios[..head].iter().cloned().fold(0.0, f64::max);
        let (late_at, late) =
            ratios[head..].iter().enumerate().fold((0, 0.0f64), |a, (i, &r)| if r > a.1 { (i, r) } else { a });
        if late > 1.25 * early {
            return Err(LevyError::PreconditionFailed {
                t,
                v: v_grid[head + late_at],
                detail: format!("ratio grows from {early:e} to {late:e} over the last decade"),
            });
        }
    }
    Ok(Precondition { c, t_grid: t_grid.to_vec(), v_grid, worst, verdict: Verdict::Pass })
}

/// `g(x − y)/g(x)` (or the tail analogue) and the self-convolution ratio
/// `g*g(x)/(2‖g‖g(x))`, both tending to 1 for sub-exponential tails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpotCheck {
    /// `(y, x, ratio)`
    pub shift: Vec<(f64, f64, f64)>,
    /// `(x, ratio)`
    pub convolution: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

pub fn subexponential_spot_check(tail: TailSpec) -> Result<SpotCheck> {
    let xs = [1e2, 1e3, 1e4];
    let h = |v: f64| tail.tail_term(v);
    let mut shift = Vec::new();
    for y in [1.0, 5.0] {
        for x in xs {
            let d = h(x);
            shift.push((y, x, if d > 0.0 { h(x - y) / d } else { f64::INFINITY }));
        }
    }
    let mut convolution = Vec::new();
    for x in xs {
        let r = match tail {
            TailSpec::ParetoDensity { alpha, scale } => {
                let g = |u: f64| scale * u.powf(-1.0 - alpha);
                let mass = scale / alpha;
                let half = integrate(|y| g(y) * g(x - y), 1.0, x / 2.0, 0.0, 1e-10, 2000)?.value;
                2.0 * half / (2.0 * mass * g(x))
            }
            TailSpec::ParetoCdf { alpha } => {
                // 1 − G*G(x) = 1 − G(x) + ∫ (1 − G(x − y)) dG(y)
                let dg = |y: f64| alpha * y.powf(-1.0 - alpha);
                let inner = integrate(|y| (x - y).powf(-alpha) * dg(y), 1.0, x - 1.0, 0.0, 1e-10, 2000)?.value;
                let outer = (x - 1.0).powf(-alpha) - x.powf(-alpha);
                (x.powf(-alpha) + inner + outer) / (2.0 * x.powf(-alpha))
            }
            TailSpec::Dirac => f64::INFINITY,
        };
        convolution.push((x, r));
    }
    let last_shift = shift.iter().filter(|s| s.1 == 1e4).all(|s| (s.2 - 1.0).abs() <= 0.05);
    let last_conv = convolution.last().is_some_and(|c| (c.1 - 1.0).abs() <= 0.1);
    Ok(SpotCheck { shift, convolution, verdict: Verdict::from_bool(last_shift && last_conv) })
}

/// Precondition, spot checks and the fitted envelope. A failed spot check
/// demotes the certificate to MARGINAL.
pub fn bell_upper(
    ctx: &BoundsContext,
    refined: Option<&BoundsContext>,
    tail: TailSpec,
) -> Result<(Precondition, BoundCertificate)> {
    let m = ctx.fourier.measure();
    let pre = check_precondition(m, &ctx.config.t_grid, tail)?;
    let spot = subexponential_spot_check(tail)?;
    let mut cert = bell_fit(ctx, refined, tail)?;
    cert.constants.insert("C".into(), pre.c);
    cert.caveats.push(format!("tail family {} checked for v ≥ 1 only", tail.family()));
    if spot.verdict != Verdict::Pass {
        cert.caveats.push("sub-exponential spot checks did not settle".into());
        cert.verdict = cert.verdict.and(Verdict::Marginal);
    }
    Ok((pre, cert))
}
