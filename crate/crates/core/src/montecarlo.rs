//! Sampling oracle: independent draws of `Z_t` assembled from big jumps,
//! compensated mid-range jumps and a Gaussian (or dropped) small-jump part,
//! compared with Fourier-inverted distributions.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{build, Decomposition};
use crate::error::{LevyError, Result};
use crate::fourier::DensityGrid;
use crate::measure::{LevyMeasure, Side, URange};

const MAGIC: &[u8; 8] = b"LKBMC001";
/// Quality gate `σ(δ)/δ` for the Gaussian substitution.
pub const MIN_SIGMA_OVER_DELTA: f64 = 5.0;
/// Target ratio when `δ` is chosen automatically.
const AUTO_SIGMA_OVER_DELTA: f64 = 6.0;
/// Tabulation density of the jump tails (points per decade of `|u|`).
const PER_DECADE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussianApprox,
    DropSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Small-jump cut in `(0, 1/ρ_t]`; `None` takes the largest `δ` with
    /// `σ(δ)/δ ≥ 6`.
    pub delta: Option<f64>,
    pub scheme: Scheme,
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, delta: None, scheme: Scheme::GaussianApprox }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub t: f64,
    pub delta: f64,
    /// Standard deviation of the jumps below `δ`.
    pub sigma: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn std(&self) -> f64 {
        let n = self.values.len() as f64;
        let mu = self.mean();
        (self.values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
    }

    /// `q`-quantile of the sorted sample.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let i = ((v.len() - 1) as f64 * q).round() as usize;
        v[i]
    }

    /// Binary dump: magic, spec hash (16 ASCII bytes), `t`, `δ`, `σ`, seed,
    /// scheme byte, count, then the values, all little-endian.
    pub fn write(&self, path: &Path, spec_hash: &str) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 8 * self.values.len());
        buf.extend_from_slice(MAGIC);
        let mut h = [b'0'; 16];
        for (d, s) in h.iter_mut().zip(spec_hash.bytes()) {
            *d = s;
        }
        buf.extend_from_slice(&h);
        for v in [self.t, self.delta, self.sigma] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.push(match self.scheme {
            Scheme::GaussianApprox => 0,
            Scheme::DropSmall => 1,
        });
        buf.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Reads a dump written by [`Samples::write`], returning the spec hash too.
    pub fn read(path: &Path) -> Result<(String, Self)> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let bad = || LevyError::InvalidParameters(format!("{} is not a sample dump", path.display()));
        if buf.len() < 65 || &buf[..8] != MAGIC {
            return Err(bad());
        }
        let f = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().expect("8 bytes"));
        let u = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().expect("8 bytes"));
        let hash = String::from_utf8_lossy(&buf[8..24]).into_owned();
        let scheme = match buf[56] {
            0 => Scheme::GaussianApprox,
            1 => Scheme::DropSmall,
            _ => return Err(bad()),
        };
        let n = u(57) as usize;
        if buf.len() != 65 + 8 * n {
            return Err(bad());
        }
        let values = (0..n).map(|i| f(65 + 8 * i)).collect();
        Ok((hash, Self { t: f(24), delta: f(32), sigma: f(40), seed: u(48), scheme, values }))
    }
}

/// Inverse-tail sampler for the jumps of one sign with `|u| ∈ (lo, hi]`.
#[derive(Debug, Clone)]
enum JumpTable {
    /// Cumulative weights and locations.
    Atoms { cum: Vec<f64>, loc: Vec<f64> },
    /// `tail[i] = μ_side((u[i], hi])` on a log grid, decreasing; beyond the
    /// last node the tail is continued as `tail_last·(u/u_last)^{−κ}`.
    Density { u: Vec<f64>, tail: Vec<f64>, kappa: f64 },
}

impl JumpTable {
    fn build(m: &LevyMeasure, side: Side, lo: f64, hi: f64) -> Self {
        if m.is_atomic() {
            let atoms = m.side_atoms(side, URange::new(lo, false, hi, true), 2000);
            let mut cum = Vec::with_capacity(atoms.len());
            let mut acc = 0.0;
            for &(_, w) in &atoms {
                acc += w;
                cum.push(acc);
            }
            return JumpTable::Atoms { cum, loc: atoms.iter().map(|a| a.0).collect() };
        }
        let top = if hi.is_finite() { hi } else { lo * 1e15 };
        let n = ((top / lo).log10() * PER_DECADE).ceil().max(2.0) as usize;
        let u: Vec<f64> = (0..=n).map(|i| lo * (top / lo).powf(i as f64 / n as f64)).collect();
        let tail: Vec<f64> = u.iter().map(|&x| m.side_moment(side, 0.0, URange::new(x, false, hi, true))).collect();
        let k = tail.len() - 1;
        let kappa = if hi.is_finite() || tail[k] <= 0.0 || tail[k - 1] <= tail[k] {
            0.0
        } else {
            (tail[k - 1] / tail[k]).ln() / (u[k] / u[k - 1]).ln()
        };
        JumpTable::Density { u, tail, kappa }
    }

    fn mass(&self) -> f64 {
        match self {
            JumpTable::Atoms { cum, .. } => cum.last().copied().unwrap_or(0.0),
            JumpTable::Density { tail, .. } => tail[0],
        }
    }

    /// `|u|` for a uniform `v ∈ [0, 1)`.
    fn draw(&self, v: f64) -> f64 {
        match self {
            JumpTable::Atoms { cum, loc } => {
                let target = v * cum[cum.len() - 1];
                let i = cum.partition_point(|&c| c <= target).min(loc.len() - 1);
                loc[i]
            }
            JumpTable::Density { u, tail, kappa } => {
                // tail is decreasing: find tail[i] ≥ s > tail[i + 1]
                let s = (1.0 - v) * tail[0];
                let k = tail.len() - 1;
                if s <= tail[k] {
                    if *kappa > 0.0 && s > 0.0 {
                        return u[k] * (tail[k] / s).powf(1.0 / kappa);
                    }
                    return u[k];
                }
                let i = tail.partition_point(|&x| x >= s).saturating_sub(1).min(k - 1);
                let w = (tail[i] - s) / (tail[i] - tail[i + 1]);
                (u[i].ln() + w * (u[i + 1] / u[i]).ln()).exp()
            }
        }
    }
}

/// Both signs of a jump range.
#[derive(Debug, Clone)]
struct TwoSided {
    pos: JumpTable,
    neg: JumpTable,
    /// Probability of a positive jump.
    p_pos: f64,
    /// `t·μ(|u| ∈ range)`
    rate: f64,
}

impl TwoSided {
    fn build(m: &LevyMeasure, t: f64, lo: f64, hi: f64) -> Self {
        let pos = JumpTable::build(m, Side::Pos, lo, hi);
        let neg = JumpTable::build(m, Side::Neg, lo, hi);
        let (a, b) = (pos.mass(), neg.mass());
        let p_pos = if a + b > 0.0 { a / (a + b) } else { 0.5 };
        Self { pos, neg, p_pos, rate: t * (a + b) }
    }

    fn jump(&self, rng: &mut ChaCha8Rng) -> f64 {
        let side: f64 = rng.random();
        let v: f64 = rng.random();
        if side < self.p_pos {
            self.pos.draw(v)
        } else {
            -self.neg.draw(v)
        }
    }

    fn sum(&self, rng: &mut ChaCha8Rng, count: &Option<Poisson<f64>>) -> f64 {
        let Some(p) = count else { return 0.0 };
        let n = p.sample(rng) as u64;
        (0..n).map(|_| self.jump(rng)).sum()
    }
}

/// `σ(δ) = (t ∫_{|u| ≤ δ} u² μ(du))^{1/2}`
pub fn small_jump_sigma(m: &LevyMeasure, t: f64, delta: f64) -> f64 {
    (t * m.truncated_second_moment(delta)).sqrt()
}

/// Largest `δ ≤ cut` with `σ(δ)/δ ≥ 6`, by bisection in `ln δ`.
pub fn auto_delta(m: &LevyMeasure, t: f64, cut: f64) -> f64 {
    let ok = |d: f64| small_jump_sigma(m, t, d) / d >= AUTO_SIGMA_OVER_DELTA;
    if ok(cut) {
        return cut;
    }
    let (mut lo, mut hi) = ((cut * 1e-15).ln(), cut.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

/// `n` i.i.d. draws of `Z_t = Ẑ_t + (mid jumps − mean) + small − a_t`.
/// Draw `i` uses the ChaCha8 stream `i` under `seed`, so the output does
/// not depend on thread scheduling.
pub fn sample_increments(m: &LevyMeasure, t: f64, cfg: &SamplerConfig) -> Result<Samples> {
    if cfg.n_samples == 0 {
        return Err(LevyError::InvalidParameters("n_samples must be at least 1".into()));
    }
    let dec = build(m, t)?;
    sample_with(m, &dec, cfg)
}

pub fn sample_with(m: &LevyMeasure, dec: &Decomposition, cfg: &SamplerConfig) -> Result<Samples> {
    let t = dec.t;
    let cut = dec.cut;
    let delta = cfg.delta.unwrap_or_else(|| auto_delta(m, t, cut));
    if !(delta > 0.0 && delta <= cut * (1.0 + 1e-12)) {
        return Err(LevyError::InvalidParameters(format!("delta = {delta} outside (0, {cut}]")));
    }
    let sigma = small_jump_sigma(m, t, delta);
    if cfg.scheme == Scheme::GaussianApprox && sigma / delta < MIN_SIGMA_OVER_DELTA {
        return Err(LevyError::DeltaTooCoarse { ratio: sigma / delta });
    }
    let big = TwoSided::build(m, t, cut, f64::INFINITY);
    let mid = TwoSided::build(m, t, delta, cut);
    let mid_mean = t * m.signed_moment(1.0, URange::new(delta, false, cut, true));
    let poisson = |rate: f64| -> Result<Option<Poisson<f64>>> {
        if rate <= 0.0 {
            return Ok(None);
        }
        Poisson::new(rate).map(Some).map_err(|e| LevyError::InvalidParameters(format!("Poisson rate {rate}: {e}")))
    };
    let (n_big, n_mid) = (poisson(big.rate)?, poisson(mid.rate)?);
    let shift = -dec.a_t - mid_mean;
    let gauss = cfg.scheme == Scheme::GaussianApprox;
    let values = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut z = shift + big.sum(&mut rng, &n_big) + mid.sum(&mut rng, &n_mid);
            if gauss {
                let g: f64 = StandardNormal.sample(&mut rng);
                z += sigma * g;
            }
            z
        })
        .collect();
    Ok(Samples { t, delta, sigma, scheme: cfg.scheme, seed: cfg.seed, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Samples inside the grid.
    pub n: usize,
    /// Fraction of all samples inside the grid.
    pub covered: f64,
    pub ks_stat: f64,
    pub cvm_stat: f64,
    /// `1.5·1.63/√n`
    pub threshold: f64,
    pub pass: bool,
}

/// KS and Cramér–von Mises statistics of the samples against the CDF
/// obtained by trapezoid integration of `grid`. Both sides are conditioned
/// on the grid range, which must hold at least 99.9% of the samples.
pub fn compare_to_density(samples: &[f64], grid: &DensityGrid) -> Result<Comparison> {
    let xs = &grid.x_grid;
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let mut inside: Vec<f64> = samples.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
    let covered = inside.len() as f64 / samples.len().max(1) as f64;
    if covered < 0.999 {
        return Err(LevyError::GridCoverageInsufficient { covered });
    }
    inside.sort_by(f64::total_cmp);
    let mut cdf = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (grid.values[i] + grid.values[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let total = cdf[cdf.len() - 1];
    let model = |x: f64| {
        let i = xs.partition_point(|&g| g <= x).clamp(1, xs.len() - 1);
        let (a, b) = (xs[i - 1], xs[i]);
        let w = ((x - a) / (b - a)).clamp(0.0, 1.0);
        // exact integral of the linear interpolant over [a, x]
        let (pa, pb) = (grid.values[i - 1], grid.values[i]);
        let part = (x - a).max(0.0) * (pa + 0.5 * w * (pb - pa));
        ((cdf[i - 1] + part) / total).clamp(0.0, 1.0)
    };
    let (ks, cvm) = ks_cvm(&inside, model);
    let n = inside.len();
    let threshold = 1.5 * 1.63 / (n as f64).sqrt();
    Ok(Comparison { n, covered, ks_stat: ks, cvm_stat: cvm, threshold, pass: ks <= threshold })
}

/// KS and Cramér–von Mises statistics of sorted samples against `cdf`.
pub fn ks_cvm<F: Fn(f64) -> f64 + Sync>(sorted: &[f64], cdf: F) -> (f64, f64) {
    let n = sorted.len() as f64;
    sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let d = (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs());
            let c = (f - (2 * i + 1) as f64 / (2.0 * n)).powi(2);
            (d, c)
        })
        .reduce(|| (0.0, 1.0 / (12.0 * n)), |a, b| (a.0.max(b.0), a.1 + b.1))
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Inverse-transform draws from the trapezoid CDF of `grid`.
pub fn sample_from_grid(grid: &DensityGrid, n: usize, seed: u64) -> Vec<f64> {
    let xs = &grid.x_grid;
    let mut cdf = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cdf[i] = cdf[i - 1] + 0.5 * (grid.values[i].max(0.0) + grid.values[i - 1].max(0.0)) * (xs[i] - xs[i - 1]);
    }
    let total = cdf[cdf.len() - 1];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let s = rng.random::<f64>() * total;
            let k = cdf.partition_point(|&c| c < s).clamp(1, xs.len() - 1);
            let (pa, pb) = (grid.values[k - 1].max(0.0), grid.values[k].max(0.0));
            let h = xs[k] - xs[k - 1];
            let r = s - cdf[k - 1];
            // solve pa·y + (pb − pa)y²/(2h) = r for y ∈ [0, h]
            let a = 0.5 * (pb - pa) / h;
            let y = if a.abs() < 1e-300 {
                if pa > 0.0 { r / pa } else { 0.5 * h }
            } else {
                let disc = (pa * pa + 4.0 * a * r).max(0.0);
                2.0 * r / (pa + disc.sqrt())
            };
            xs[k - 1] + y.clamp(0.0, h)
        })
        .collect()
}
