//! Per-time data shared by all fits: decomposition, densities on the node
//! grid `x_j = j·dx`, and the compound series `Σ_m Λ_t^{*m}/m!` on the same
//! nodes.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kernel_conv, series_m_max, Shape};
use crate::decomposition::{build, Decomposition};
use crate::error::Result;
use crate::fourier::convolution::{hat_weights, series_on_grid};
use crate::fourier::Fourier;
use crate::report::{lin_space, log_space};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub t_grid: Vec<f64>,
    /// Nodes per cut `1/ρ_t`; atomic measures snap the step down to a power of two.
    pub x_per_cut: usize,
    /// Half-width of the x-window in units of `1/ρ_t`.
    pub x_span: f64,
    pub b2_grid: Vec<f64>,
    pub b4_grid: Vec<f64>,
    /// Relative tail allowed for the compound series.
    pub series_tol: f64,
    /// Multiplier applied to grid-sup constants.
    pub safety: f64,
    /// Weight of the small-`b₂` penalty `b₂^{−1/2}`.
    pub penalty: f64,
}

impl BoundsConfig {
    /// `n` log-spaced times on `[t_lo, t0]` and the standard constant grids.
    pub fn new(t_lo: f64, t0: f64, n: usize) -> Self {
        Self {
            t_grid: log_space(t_lo, t0, n),
            x_per_cut: 40,
            x_span: 50.0,
            b2_grid: (-6..=4).map(|e| 2f64.powi(e)).collect(),
            b4_grid: (-4..=2).map(|e| 2f64.powi(e)).collect(),
            series_tol: 1e-10,
            safety: 1.05,
            penalty: 1e-3,
        }
    }

    /// Twice as many times (geometric midpoints inserted) and half the x-step.
    pub fn refined(&self) -> Self {
        let mut t_grid = Vec::with_capacity(2 * self.t_grid.len());
        for w in self.t_grid.windows(2) {
            t_grid.push(w[0]);
            t_grid.push((w[0] * w[1]).sqrt());
        }
        t_grid.extend(self.t_grid.last());
        Self { t_grid, x_per_cut: 2 * self.x_per_cut, ..self.clone() }
    }
}

/// Which per-time quantities to compute.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Needs {
    pub derivs: Vec<usize>,
    pub lower: bool,
    pub bar: bool,
}

#[derive(Debug, Clone)]
pub struct Sampled {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl Sampled {
    fn from_grid(g: crate::fourier::DensityGrid) -> Self {
        Self { values: g.values, errors: g.errors }
    }
}

#[derive(Debug, Clone)]
pub struct TimeSlice {
    pub t: f64,
    pub rho: f64,
    pub dec: Decomposition,
    pub dx: f64,
    pub out: usize,
    /// `x_j = j·dx`, `|j| ≤ out`.
    pub x: Vec<f64>,
    /// `p_t(x + a_t)`
    pub p: Sampled,
    /// `∂^k p_t(x + a_t)`
    pub derivs: BTreeMap<usize, Sampled>,
    /// `p_t(x + a_t − x_t)`
    pub p_lower: Option<Sampled>,
    pub x_t: Option<f64>,
    /// `p̄_t(x + a_t)`
    pub bar: Option<Sampled>,
    pub m_max: usize,
    pub half: usize,
    /// `Σ_{m ≤ m_max} Λ_t^{*m}/m!` on `|j| ≤ half`.
    pub series: Vec<f64>,
}

impl TimeSlice {
    /// Unit-amplitude compound sum `Σ_m (1/m!)∫h((x − y)ρ_t)Λ^{*m}(dy)` on the nodes
    /// (without the prefactor `σ_t`).
    pub fn compound(&self, shape: Shape) -> Vec<f64> {
        kernel_conv(&self.series, self.half, self.out, shape.unit(), self.rho * self.dx)
    }

    /// Only the `m = 0` term: `h(xρ_t)` on the nodes.
    pub fn kernel_only(&self, shape: Shape) -> Vec<f64> {
        let u = shape.unit();
        self.x.iter().map(|&x| u.eval(x * self.rho)).collect()
    }
}

pub struct BoundsContext<'f, 'a> {
    pub fourier: &'f Fourier<'a>,
    pub config: BoundsConfig,
    pub slices: Vec<TimeSlice>,
}

impl<'f, 'a> BoundsContext<'f, 'a> {
    pub fn build(fourier: &'f Fourier<'a>, config: BoundsConfig, needs: &Needs) -> Result<Self> {
        let slices = config
            .t_grid
            .iter()
            .map(|&t| slice(fourier, &config, needs, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { fourier, config, slices })
    }

    pub fn points(&self) -> usize {
        self.slices.iter().map(|s| s.x.len()).sum()
    }
}

fn slice(f: &Fourier, cfg: &BoundsConfig, needs: &Needs, t: f64) -> Result<TimeSlice> {
    let m = f.measure();
    let dec = build(m, t)?;
    let cut = dec.cut;
    let mut dx = cut / cfg.x_per_cut as f64;
    if m.is_atomic() {
        dx = dx.log2().floor().exp2();
    }
    let out = (cfg.x_span * cut / dx).ceil() as usize;
    let x: Vec<f64> = (-(out as i64)..=out as i64).map(|j| j as f64 * dx).collect();
    let shifted: Vec<f64> = x.iter().map(|x| x + dec.a_t).collect();
    let p = Sampled::from_grid(f.density(t, &shifted, 0)?);
    let mut derivs = BTreeMap::new();
    for &k in &needs.derivs {
        derivs.insert(k, Sampled::from_grid(f.density(t, &shifted, k)?));
    }
    let (mut p_lower, mut x_t) = (None, None);
    if needs.lower {
        let xs = lin_space(dec.a_t - 10.0 * cut, dec.a_t + 10.0 * cut, 2001);
        let mut g = f.density_bar(&dec, &xs, 0)?;
        // the maximizer of p̄_t(· + a_t)
        let loc = f.locate_xt(&dec, &mut g)? - dec.a_t;
        x_t = Some(loc);
        p_lower = Some(if loc.abs() <= 1e-9 * cut {
            p.clone()
        } else {
            let pts: Vec<f64> = shifted.iter().map(|x| x - loc).collect();
            Sampled::from_grid(f.density(t, &pts, 0)?)
        });
    }
    let bar = if needs.bar { Some(Sampled::from_grid(f.density_bar(&dec, &shifted, 0)?)) } else { None };
    let b2_min = cfg.b2_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let reach = Shape::Upper { b1: 1.0, b2: b2_min }.reach();
    let half = out + (reach * cut / dx).ceil() as usize;
    let m_max = series_m_max(dec.lambda_total, cfg.series_tol);
    let w = hat_weights(m, &dec, dx, half);
    let mut series = series_on_grid(&w, half, m_max, half);
    // FFT round-off below this level is not a compound contribution
    let floor = 1e-15 * series.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    series.par_iter_mut().for_each(|v| {
        if v.abs() < floor {
            *v = 0.0;
        }
    });
    Ok(TimeSlice { t, rho: dec.rho_t, dec, dx, out, x, p, derivs, p_lower, x_t, bar, m_max, half, series })
}
