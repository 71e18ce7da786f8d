//! Atoms at `u = 2^{-nυ}` with weights `2^{nγ}`, `n ≥ n_min` (optionally
//! `n ≤ n_max`). Small atoms (large `n`) are summed in closed form.

use super::Oscillatory;
use super::URange;

/// Atoms with `ξu` below this are handled by the geometric-series tail.
const SMALL_ARGUMENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicHalf {
    pub gamma: f64,
    pub upsilon: f64,
    pub n_min: i64,
    pub n_max: Option<i64>,
}

impl DyadicHalf {
    pub fn location(&self, n: i64) -> f64 {
        (-(n as f64) * self.upsilon).exp2()
    }

    pub fn weight(&self, n: i64) -> f64 {
        ((n as f64) * self.gamma).exp2()
    }

    /// Index range `[first, last]` of atoms inside `range`; `last = None`
    /// means unbounded (all small atoms).
    pub fn index_range(&self, range: URange) -> Option<(i64, Option<i64>)> {
        // location decreases in n: u ≤ hi ⇔ n ≥ first
        let mut first = if range.hi.is_infinite() {
            self.n_min
        } else {
            let mut k = (-(range.hi.log2()) / self.upsilon).ceil() as i64;
            while range.below_hi(self.location(k - 1)) {
                k -= 1;
            }
            while !range.below_hi(self.location(k)) {
                k += 1;
            }
            k
        };
        first = first.max(self.n_min);
        let mut last = if range.lo <= 0.0 {
            None
        } else {
            let mut k = (-(range.lo.log2()) / self.upsilon).floor() as i64;
            while range.above_lo(self.location(k + 1)) {
                k += 1;
            }
            while !range.above_lo(self.location(k)) {
                k -= 1;
            }
            Some(k)
        };
        if let Some(cap) = self.n_max {
            last = Some(last.map_or(cap, |l| l.min(cap)));
        }
        match last {
            Some(l) if l < first => None,
            _ => Some((first, last)),
        }
    }

    /// `Σ_{n=a}^{b} 2^{n·e}`, with `b = None` meaning `+∞` (requires `e < 0`).
    fn geometric(a: i64, b: Option<i64>, e: f64) -> f64 {
        let head = ((a as f64) * e).exp2();
        let r = e.exp2();
        match b {
            None => {
                if e >= 0.0 {
                    f64::INFINITY
                } else {
                    head / (1.0 - r)
                }
            }
            Some(b) if b < a => 0.0,
            Some(b) => {
                let count = (b - a + 1) as f64;
                if e == 0.0 {
                    count
                } else {
                    // head·(r^count − 1)/(r − 1), stable for r near 1
                    let ln2 = std::f64::consts::LN_2;
                    head * (count * e * ln2).exp_m1() / (e * ln2).exp_m1()
                }
            }
        }
    }

    /// `Σ u^q w` over atoms in `range`.
    pub fn moment(&self, q: f64, range: URange) -> f64 {
        match self.index_range(range) {
            None => 0.0,
            Some((a, b)) => Self::geometric(a, b, self.gamma - self.upsilon * q),
        }
    }

    pub fn oscillatory(&self, kind: Oscillatory, xi: f64, range: URange) -> f64 {
        if xi == 0.0 {
            return 0.0;
        }
        let Some((a, b)) = self.index_range(range) else {
            return 0.0;
        };
        // first index where ξu is small enough for the series tail
        let cut = ((xi / SMALL_ARGUMENT).log2() / self.upsilon).ceil() as i64;
        let direct_end = match b {
            Some(b) => b.min(cut - 1),
            None => cut - 1,
        };
        let mut total = 0.0;
        for n in a..=direct_end {
            let x = xi * self.location(n);
            total += self.weight(n) * kind.kernel(x);
        }
        let tail_start = a.max(cut);
        if b.map_or(true, |b| b >= tail_start) {
            let (first_power, first_coef) = match kind {
                Oscillatory::OneMinusCos => (2, 0.5),
                Oscillatory::XMinusSin => (3, 1.0 / 6.0),
                Oscillatory::Sin => (1, 1.0),
            };
            let mut coef = first_coef;
            let mut power = first_power;
            for _ in 0..4 {
                let pw = power as f64;
                let s = Self::geometric(tail_start, b, self.gamma - self.upsilon * pw);
                total += coef * xi.powi(power) * s;
                coef *= -1.0 / (((power + 1) * (power + 2)) as f64);
                power += 2;
            }
        }
        total
    }

    /// Frequencies `1/u` of atoms with `1/u ∈ [lo, hi]`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let range = URange::closed(1.0 / hi, 1.0 / lo);
        match self.index_range(range) {
            None => Vec::new(),
            Some((a, b)) => {
                let b = b.unwrap_or(a + 4000);
                (a..=b).map(|n| 1.0 / self.location(n)).collect()
            }
        }
    }

    /// Atoms `(u, w)` in `range`, dropping indices past `n_last` when the
    /// range is unbounded below.
    pub fn atoms(&self, range: URange, n_last: i64) -> Vec<(f64, f64)> {
        match self.index_range(range) {
            None => Vec::new(),
            Some((a, b)) => {
                let b = b.unwrap_or(n_last).min(n_last);
                (a..=b).map(|n| (self.location(n), self.weight(n))).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DyadicHalf {
        DyadicHalf { gamma: 1.0, upsilon: 1.0, n_min: -60, n_max: None }
    }

    #[test]
    fn boundary_inclusion_is_exact() {
        let d = unit();
        // u ≤ 1/8 → n ≥ 3
        assert_eq!(d.index_range(URange::closed(0.0, 0.125)), Some((3, None)));
        // u < 1/8 → n ≥ 4
        assert_eq!(d.index_range(URange::open(0.0, 0.125)), Some((4, None)));
        // 1/4 < u ≤ 1 → n ∈ {0, 1}
        assert_eq!(d.index_range(URange::new(0.25, false, 1.0, true)), Some((0, Some(1))));
    }

    #[test]
    fn oscillatory_sum_matches_direct_summation() {
        let d = unit();
        for &xi in &[0.01, 1.0, 37.5, 1e4] {
            let fast = d.oscillatory(Oscillatory::OneMinusCos, xi, URange::all());
            let slow: f64 = (-60..200)
                .map(|n| d.weight(n) * 2.0 * (0.5 * xi * d.location(n)).sin().powi(2))
                .sum();
            assert!((fast - slow).abs() <= 1e-13 * slow.abs(), "{xi}: {fast} vs {slow}");
            let fast = d.oscillatory(Oscillatory::XMinusSin, xi, URange::open(0.0, 1.0));
            let slow: f64 = (1..200)
                .map(|n| {
                    let x = xi * d.location(n);
                    d.weight(n) * Oscillatory::XMinusSin.kernel(x)
                })
                .sum();
            assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1e-300), "{xi}: {fast} vs {slow}");
        }
    }
}
