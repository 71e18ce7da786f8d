//! Transition densities `p_t`, `p̄_t` and their derivatives by Fourier
//! inversion of the characteristic function, with a certified bound on the
//! discarded high frequencies.

pub mod cache;
pub mod convolution;
pub mod transform;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::decomposition::{build, m_max_for, poisson_law, psi_t, Decomposition};
use crate::error::{LevyError, Result};
use crate::exponents::{default_xi_grid, estimate_beta, growth_floor};
use crate::measure::LevyMeasure;
use crate::quad::gk21_rule;
use crate::report::log_grid;
use crate::scales::rho;

pub use cache::{NodeGrid, PsiCache};
pub use convolution::{convolution_check, ConvolutionCheck};

const XI_CAP: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    FullDensity,
    TruncatedBar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOptions {
    /// Pointwise relative change allowed between successive step halvings.
    pub alias_tol: f64,
    /// Values below `rel_floor·max|values|` are compared in absolute terms.
    pub rel_floor: f64,
    /// Truncation target relative to `max|values|`.
    pub tail_rel: f64,
    pub max_nodes: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { alias_tol: 1e-7, rel_floor: 1e-3, tail_rel: 1e-10, max_nodes: 1 << 24 }
    }
}

/// `Re ψ(ξ) ≥ c_floor·ξ^{2/β̂}` for `ξ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub beta_hat: f64,
    pub c_floor: f64,
}

impl TailConstants {
    pub fn estimate(m: &LevyMeasure) -> Result<Self> {
        let grid = default_xi_grid();
        let beta = estimate_beta(m, &grid)?;
        let c_floor = growth_floor(m, beta.beta_hat, &grid)?;
        Ok(Self { beta_hat: beta.beta_hat, c_floor })
    }

    pub fn exponent(&self) -> f64 {
        2.0 / self.beta_hat
    }
}

/// `(1/π)∫_Ξ^∞ ξ^k e^{−a ξ^q} dξ` through the regularized upper incomplete gamma function.
pub fn stretched_exp_tail(a: f64, q: f64, k: usize, xi: f64) -> f64 {
    let p = (k + 1) as f64 / q;
    let upper = gamma_ur(p, a * xi.powf(q));
    if upper <= 0.0 {
        return 0.0;
    }
    (ln_gamma(p) - p * a.ln() - q.ln() + upper.ln()).exp() / PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub t: f64,
    pub rho_t: f64,
    pub x_grid: Vec<f64>,
    pub k: usize,
    pub values: Vec<f64>,
    /// Per-point error estimate: last halving change plus the truncation bound.
    pub errors: Vec<f64>,
    pub trunc_freq: f64,
    pub tail_bound: f64,
    /// Final frequency step.
    pub step: f64,
    pub which: Which,
    pub x_t: Option<f64>,
}

impl DensityGrid {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,value,tail_bound\n");
        for (x, v) in self.x_grid.iter().zip(&self.values) {
            s.push_str(&format!("{:e},{:e},{:e},{:e}\n", self.t, x, v, self.tail_bound));
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Integral over the grid: composite Boole, Simpson or trapezoid rule,
    /// whichever the point count allows (uniform grids only).
    pub fn grid_integral(&self) -> Result<f64> {
        let (_, dx) = transform::uniform_spacing(&self.x_grid)
            .ok_or_else(|| LevyError::InvalidParameters("grid integral needs a uniform grid".into()))?;
        Ok(integrate_samples(&self.values, dx))
    }

    /// Values with quadrature noise below zero clipped, for reports.
    pub fn clipped(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(0.0)).collect()
    }
}

/// `0.5 − (1/π)∫_0^Ξ Im(e^{−ixξ−Φ(ξ)})/ξ dξ` for all `xs` on one fixed
/// Gauss-Kronrod panel set: panels span half a period of the fastest
/// oscillation (`max |x|`, at least `scale`), and the first one is graded
/// geometrically towards `ξ = 0`. The error is the summed Kronrod/Gauss gap
/// plus `tail` and the ungraded sliver `[0, h·2^{−GRADING}]`.
fn gil_pelaez_fixed<E>(exponent: E, xi_max: f64, tail: f64, scale: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>>
where
    E: Fn(f64) -> Result<Complex64> + Sync,
{
    const GRADING: i32 = 100;
    let fastest = xs.iter().fold(scale, |m, x| m.max(x.abs()));
    let panels = (xi_max * fastest / PI).ceil().max(1.0) as usize;
    let width = xi_max / panels as f64;
    let mut bounds: Vec<(f64, f64)> = (0..GRADING).rev().map(|k| (width * 2f64.powi(-k - 1), width * 2f64.powi(-k))).collect();
    bounds.extend((1..panels).map(|i| (i as f64 * width, (i + 1) as f64 * width)));
    // (ξ, e^{−Φ(ξ)}/ξ, Kronrod weight, Gauss weight) per panel
    let nodes: Vec<Vec<(f64, Complex64, f64, f64)>> = bounds
        .par_iter()
        .map(|&(a, b)| gk21_rule(a, b).iter().map(|&(xi, wk, wg)| Ok((xi, (-exponent(xi)?).exp() / xi, wk, wg))).collect())
        .collect::<Result<_>>()?;
    let sliver = bounds[0].0;
    xs.par_iter()
        .map(|&x| {
            let (mut sum, mut err) = (0.0, 0.0);
            for panel in &nodes {
                let (mut k, mut g) = (0.0, 0.0);
                for &(xi, c, wk, wg) in panel {
                    let v = (Complex64::from_polar(1.0, -x * xi) * c).im;
                    k += wk * v;
                    g += wg * v;
                }
                sum += k;
                err += (k - g).abs();
            }
            // |integrand| on the sliver is at most about its value at the first node
            let first = nodes[0][0];
            err += sliver * 2.0 * (Complex64::from_polar(1.0, -x * first.0) * first.1).im.abs();
            if !sum.is_finite() {
                return Err(LevyError::QuadratureFailure { what: "Gil-Pelaez integral", at: x, err, depth: bounds.len() });
            }
            Ok(((0.5 - sum / PI).clamp(0.0, 1.0), (err + tail) / PI))
        })
        .collect()
}

/// Newton–Cotes integral of equispaced samples.
pub fn integrate_samples(v: &[f64], dx: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    if intervals % 4 == 0 {
        let mut s = 0.0;
        for i in (0..intervals).step_by(4) {
            s += 7.0 * v[i] + 32.0 * v[i + 1] + 12.0 * v[i + 2] + 32.0 * v[i + 3] + 7.0 * v[i + 4];
        }
        s * 2.0 * dx / 45.0
    } else if intervals % 2 == 0 {
        let mut s = 0.0;
        for i in (0..intervals).step_by(2) {
            s += v[i] + 4.0 * v[i + 1] + v[i + 2];
        }
        s * dx / 3.0
    } else {
        let inner: f64 = v[1..n - 1].iter().sum();
        dx * (inner + 0.5 * (v[0] + v[n - 1]))
    }
}

#[derive(Clone, Copy)]
enum Target<'d> {
    Full { t: f64 },
    Bar(&'d Decomposition),
}

impl Target<'_> {
    fn t(&self) -> f64 {
        match self {
            Target::Full { t } => *t,
            Target::Bar(d) => d.t,
        }
    }

    fn which(&self) -> Which {
        match self {
            Target::Full { .. } => Which::FullDensity,
            Target::Bar(_) => Which::TruncatedBar,
        }
    }
}

struct Inversion {
    values: Vec<f64>,
    errors: Vec<f64>,
    h: f64,
    xi_max: f64,
    tail: f64,
}

fn deriv_factor(xi: f64, k: usize) -> Complex64 {
    match k {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -xi),
        2 => Complex64::new(-xi * xi, 0.0),
        _ => Complex64::new(0.0, -xi).powu(k as u32),
    }
}

/// Fourier inverter bound to one measure.
pub struct Fourier<'a> {
    m: &'a LevyMeasure,
    consts: TailConstants,
    opts: DensityOptions,
    cache: PsiCache,
    floor_table: OnceLock<Vec<(f64, f64)>>,
}

impl<'a> Fourier<'a> {
    /// Inverter with tail constants estimated from the measure.
    pub fn new(m: &'a LevyMeasure) -> Result<Self> {
        Ok(Self::with_constants(m, TailConstants::estimate(m)?))
    }

    pub fn with_constants(m: &'a LevyMeasure, consts: TailConstants) -> Self {
        Self { m, consts, opts: DensityOptions::default(), cache: PsiCache::new(m), floor_table: OnceLock::new() }
    }

    pub fn options(mut self, opts: DensityOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn measure(&self) -> &'a LevyMeasure {
        self.m
    }

    pub fn constants(&self) -> TailConstants {
        self.consts
    }

    pub fn opts(&self) -> DensityOptions {
        self.opts
    }

    /// `∂^k p_t` on `xs`.
    pub fn density(&self, t: f64, xs: &[f64], k: usize) -> Result<DensityGrid> {
        let rho_t = rho(self.m, t)?.value;
        self.grid(Target::Full { t }, rho_t, xs, k)
    }

    /// `∂^k p̄_t` on `xs`.
    pub fn density_bar(&self, dec: &Decomposition, xs: &[f64], k: usize) -> Result<DensityGrid> {
        self.grid(Target::Bar(dec), dec.rho_t, xs, k)
    }

    fn grid(&self, target: Target, rho_t: f64, xs: &[f64], k: usize) -> Result<DensityGrid> {
        let inv = self.invert(target, rho_t, xs, k)?;
        Ok(DensityGrid {
            t: target.t(),
            rho_t,
            x_grid: xs.to_vec(),
            k,
            values: inv.values,
            errors: inv.errors,
            trunc_freq: inv.xi_max,
            tail_bound: inv.tail,
            step: inv.h,
            which: target.which(),
            x_t: None,
        })
    }

    /// `min Re ψ(ξ)/ξ^{2/β̂}` over `ξ ∈ [Ξ, 10⁶Ξ]` on a grid of ten points
    /// per decade (starting one grid point below `Ξ`), never below the
    /// global floor.
    fn local_floor(&self, from: f64) -> Result<f64> {
        let table = match self.floor_table.get() {
            Some(t) => t,
            None => {
                let q = self.consts.exponent();
                let rows = log_grid(1.0, 1e19, 10)
                    .into_par_iter()
                    .map(|xi| Ok((xi, self.m.re_psi(xi)? / xi.powf(q))))
                    .collect::<Result<Vec<_>>>()?;
                self.floor_table.get_or_init(|| rows)
            }
        };
        let lo = from.max(1.0);
        let first = table.partition_point(|r| r.0 <= lo).saturating_sub(1);
        let c = table[first..]
            .iter()
            .take_while(|r| r.0 <= 1e6 * lo)
            .fold(f64::INFINITY, |c, r| c.min(r.1));
        Ok(c.max(self.consts.c_floor))
    }

    fn tail_bound(&self, t: f64, k: usize, inflate: f64, xi: f64) -> Result<f64> {
        let c = self.local_floor(xi)?;
        Ok(inflate * stretched_exp_tail(t * c, self.consts.exponent(), k, xi))
    }

    /// Smallest cutoff `Ξ ≥ 1` (to 2% in log scale) with tail bound ≤ `goal`.
    fn cutoff(&self, t: f64, k: usize, inflate: f64, goal: f64) -> Result<(f64, f64)> {
        let mut hi = 1.0;
        let mut tail_hi = self.tail_bound(t, k, inflate, hi)?;
        if tail_hi <= goal {
            return Ok((hi, tail_hi));
        }
        while tail_hi > goal {
            hi *= 2.0;
            if hi > XI_CAP {
                return Err(LevyError::TruncationUnreachable { xi: hi, tail: tail_hi });
            }
            tail_hi = self.tail_bound(t, k, inflate, hi)?;
        }
        let mut lo = hi / 2.0;
        while hi / lo > 1.02 {
            let mid = (lo * hi).sqrt();
            let tm = self.tail_bound(t, k, inflate, mid)?;
            if tm <= goal {
                hi = mid;
                tail_hi = tm;
            } else {
                lo = mid;
            }
        }
        Ok((hi, tail_hi))
    }

    /// `e^{−tψ}` or `e^{−ψ_t}` on `start + j·step`.
    fn phi(&self, target: Target, grid: NodeGrid) -> Result<Vec<Complex64>> {
        match target {
            Target::Full { t } => {
                let psi = self.cache.samples(self.m, grid)?;
                Ok(psi[..grid.count].par_iter().map(|p| (-t * p).exp()).collect())
            }
            Target::Bar(dec) => (0..grid.count)
                .into_par_iter()
                .map(|j| Ok((-psi_t(self.m, dec, grid.node(j))?).exp()))
                .collect(),
        }
    }

    fn invert(&self, target: Target, rho_t: f64, xs: &[f64], k: usize) -> Result<Inversion> {
        let t = target.t();
        let inflate = match target {
            Target::Full { .. } => 1.0,
            Target::Bar(dec) => (2.0 * t * self.m.psi_u(dec.rho_t)).exp(),
        };
        let span = xs.iter().fold(1.0 / rho_t, |a, x| a.max(x.abs()));
        let mut scale = 0.01 * rho_t.powi(k as i32 + 1);
        for _ in 0..8 {
            let (xi_max, tail) = self.cutoff(t, k, inflate, self.opts.tail_rel * scale)?;
            let (values, diffs, h) = self.refine(target, xs, k, span, xi_max)?;
            let vmax = values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            if tail <= self.opts.tail_rel * vmax || vmax == 0.0 {
                let errors = diffs.iter().map(|d| d + tail).collect();
                return Ok(Inversion { values, errors, h, xi_max, tail });
            }
            scale = 0.5 * vmax;
        }
        Err(LevyError::TruncationUnreachable { xi: f64::NAN, tail: f64::NAN })
    }

    /// Halves the step until successive trapezoid sums agree pointwise; each
    /// halving only adds the new odd nodes to the running sums.
    fn refine(&self, target: Target, xs: &[f64], k: usize, span: f64, xi_max: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut h = (PI / (4.0 * span)).log2().floor().exp2();
        let mut n = (xi_max / h).ceil() as usize;
        let weigh = |phi: Vec<Complex64>, grid: NodeGrid| -> Vec<Complex64> {
            phi.into_par_iter()
                .enumerate()
                .map(|(j, p)| {
                    let xi = grid.node(j);
                    let w = if xi == 0.0 { 0.5 } else { 1.0 };
                    w * deriv_factor(xi, k) * p
                })
                .collect()
        };
        let grid = NodeGrid { start: 0.0, step: h, count: n + 1 };
        let z = weigh(self.phi(target, grid)?, grid);
        let mut sums = transform::arith_sum(&z, 0.0, h, xs);
        let mut prev: Option<Vec<f64>> = None;
        let mut level = 0;
        loop {
            let values: Vec<f64> = sums.iter().map(|s| s * h / PI).collect();
            if let Some(p) = prev {
                let vmax = values.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
                let diffs: Vec<f64> = values.iter().zip(&p).map(|(a, b)| (a - b).abs()).collect();
                let worst = values
                    .iter()
                    .zip(&diffs)
                    .map(|(v, d)| d / v.abs().max(self.opts.rel_floor * vmax))
                    .fold(0.0, f64::max);
                if worst <= self.opts.alias_tol || vmax == 0.0 {
                    return Ok((values, diffs, h));
                }
                if 2 * n > self.opts.max_nodes {
                    return Err(LevyError::QuadratureFailure {
                        what: "Fourier inversion step refinement",
                        at: h,
                        err: worst,
                        depth: level,
                    });
                }
            }
            prev = Some(values);
            let odd = NodeGrid { start: h / 2.0, step: h, count: n };
            let z = weigh(self.phi(target, odd)?, odd);
            for (s, o) in sums.iter_mut().zip(transform::arith_sum(&z, odd.start, h, xs)) {
                *s += o;
            }
            h /= 2.0;
            n *= 2;
            level += 1;
        }
    }

    /// `P(Z_t ≤ x)` with an absolute error estimate. Density measures use
    /// the Gil-Pelaez formula directly. The exponent of an atomic measure
    /// oscillates on every frequency scale, so there the Gil-Pelaez law of
    /// `Z̄_t` is mixed over the atoms of the big-jump law `P_t`.
    pub fn cdf(&self, t: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        if !self.m.is_atomic() {
            return self.gil_pelaez(t, xs);
        }
        let dec = build(self.m, t)?;
        let law = poisson_law(&dec, m_max_for(dec.lambda_total, 1e-14), 1e-13, 1e-14)?;
        let mut all: Vec<(f64, f64)> = law.terms.iter().flat_map(|term| term.atoms.iter().flatten().copied()).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (y, w) in all {
            match atoms.last_mut() {
                Some(last) if y - last.0 <= 1e-9 * dec.cut => last.1 += w,
                _ => atoms.push((y, w)),
            }
        }
        let mut below = Vec::with_capacity(atoms.len() + 1);
        below.push(0.0);
        for &(_, w) in &atoms {
            below.push(below.last().copied().unwrap_or(0.0) + w);
        }
        let reach = 60.0 * dec.cut;
        // atoms[lo..hi] lie within reach of x + a_t; those before lo count fully
        let windows: Vec<(usize, usize)> = xs
            .iter()
            .map(|&x| {
                let c = x + dec.a_t;
                (atoms.partition_point(|a| a.0 <= c - reach), atoms.partition_point(|a| a.0 < c + reach))
            })
            .collect();
        let mut zs = vec![-reach, reach];
        for (&x, &(lo, hi)) in xs.iter().zip(&windows) {
            zs.extend(atoms[lo..hi].iter().map(|a| x + dec.a_t - a.0));
        }
        let bar = self.bar_cdf(&dec, &zs)?;
        // far atoms contribute 0 or their full weight, off by at most this
        let outside = bar[0].0 + bar[0].1 + (1.0 - bar[1].0) + bar[1].1;
        let lost = law.pruned + law.tail_mass;
        let mut next = bar[2..].iter();
        Ok(windows
            .iter()
            .map(|&(lo, hi)| {
                let (mut sum, mut err) = (below[lo], outside + lost);
                for &(_, w) in &atoms[lo..hi] {
                    let (f, e) = next.next().expect("one value per near atom");
                    sum += w * f;
                    err += w * e;
                }
                (sum.clamp(0.0, 1.0), err)
            })
            .collect())
    }

    /// Cutoff `Ξ` with `∫_Ξ^∞ |φ|/ξ ≤ goal` and π times that bound.
    fn gil_pelaez_cutoff(&self, t: f64, inflate: f64) -> Result<(f64, f64)> {
        let goal = 1e-13;
        // ∫_Ξ^∞ |φ|/ξ ≤ (1/Ξ)∫_Ξ^∞ |φ|
        let mut xi_max = 1.0;
        let mut tail = self.tail_bound(t, 0, inflate, xi_max)?;
        while tail / xi_max > goal {
            xi_max *= 1.5;
            if xi_max > XI_CAP {
                return Err(LevyError::TruncationUnreachable { xi: xi_max, tail });
            }
            tail = self.tail_bound(t, 0, inflate, xi_max)?;
        }
        Ok((xi_max, PI * tail / xi_max))
    }

    /// `P(Z_t ≤ x)` by the Gil-Pelaez formula.
    fn gil_pelaez(&self, t: f64, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        let rho_t = rho(self.m, t)?.value;
        let (xi_max, tail) = self.gil_pelaez_cutoff(t, 1.0)?;
        gil_pelaez_fixed(|xi| self.m.psi(xi).map(|p| t * p), xi_max, tail, 1.0 / rho_t, xs)
    }

    /// `P(Z̄_t ≤ z)` by the Gil-Pelaez formula.
    fn bar_cdf(&self, dec: &Decomposition, zs: &[f64]) -> Result<Vec<(f64, f64)>> {
        let inflate = (2.0 * dec.t * self.m.psi_u(dec.rho_t)).exp();
        let (xi_max, tail) = self.gil_pelaez_cutoff(dec.t, inflate)?;
        gil_pelaez_fixed(|xi| psi_t(self.m, dec, xi), xi_max, tail, dec.cut, zs)
    }

    /// Grid mass plus the Gil-Pelaez tails outside the grid.
    pub fn mass_with_tails(&self, grid: &DensityGrid) -> Result<f64> {
        let inner = grid.grid_integral()?;
        let ends = [grid.x_grid[0], *grid.x_grid.last().expect("nonempty grid")];
        let f = self.cdf(grid.t, &ends)?;
        Ok(inner + f[0].0 + (1.0 - f[1].0))
    }

    /// `x_t = min argmax p̄_t`, refined by golden-section search on the
    /// cells next to the grid maximum; stored into the grid.
    pub fn locate_xt(&self, dec: &Decomposition, grid: &mut DensityGrid) -> Result<f64> {
        if grid.which != Which::TruncatedBar || grid.k != 0 {
            return Err(LevyError::InvalidParameters("locate_xt needs a k = 0 bar-density grid".into()));
        }
        let (x_t, _) = self.golden_max(Target::Bar(dec), grid)?;
        grid.x_t = Some(x_t);
        Ok(x_t)
    }

    /// Location and value of `max_x p_t(x)`: grid maximum over
    /// `|x| ≤ 10/ρ_t` (step `0.01/ρ_t`), refined by golden-section search.
    pub fn peak(&self, t: f64) -> Result<(f64, f64)> {
        let rho_t = rho(self.m, t)?.value;
        let xs = crate::report::lin_space(-10.0 / rho_t, 10.0 / rho_t, 2001);
        let grid = self.grid(Target::Full { t }, rho_t, &xs, 0)?;
        self.golden_max(Target::Full { t }, &grid)
    }

    fn golden_max(&self, target: Target, grid: &DensityGrid) -> Result<(f64, f64)> {
        let (mut best, mut vbest) = (0, f64::NEG_INFINITY);
        for (i, &v) in grid.values.iter().enumerate() {
            if v > vbest {
                best = i;
                vbest = v;
            }
        }
        let last = grid.x_grid.len() - 1;
        if best == 0 || best == last {
            return Err(LevyError::MaxOnBoundary(grid.x_grid[best]));
        }
        let h = grid.step;
        let n = (grid.trunc_freq / h).ceil() as usize;
        let mut z = self.phi(target, NodeGrid { start: 0.0, step: h, count: n + 1 })?;
        z[0] *= 0.5;
        let f = |x: f64| transform::direct_sum(&z, 0.0, h, x) * h / PI;
        let (mut a, mut b) = (grid.x_grid[best - 1], grid.x_grid[best + 1]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..50 {
            if fc >= fd {
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
        let x = 0.5 * (a + b);
        let v = f(x);
        let direct_best = f(grid.x_grid[best]);
        Ok(if v >= direct_best { (x, v) } else { (grid.x_grid[best], direct_best) })
    }
}

#[cfg(test)]
mod tests;
