//! Splitting `Z_t = Z̄_t + Ẑ_t − a_t` at the jump size `1/ρ_t`: the small-jump
//! exponent `ψ_t`, the big-jump intensity `Λ_t`, the shift `a_t` and the
//! compound Poisson law `P_t` of `Ẑ_t`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::measure::{LevyMeasure, Side, URange};
use crate::report::log_space;
use crate::scales::rho;

/// Atoms of `Λ_t` below this index are not enumerated (their weight
/// `2^{nγ}` sits far below double precision relative to the rest).
const ATOM_INDEX_LIMIT: i64 = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LambdaRepr {
    /// Signed atom locations and weights `t·w`.
    Atoms { atoms: Vec<(f64, f64)> },
    /// `t·m(u)` sampled on a log grid of `|u| > 1/ρ_t`, for each sign.
    Density { u: Vec<f64>, positive: Vec<f64>, negative: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub t: f64,
    pub rho_t: f64,
    /// Jump cut `1/ρ_t`: `Λ_t` lives on `|u| > cut`, `ψ_t` on `|u| ≤ cut`.
    pub cut: f64,
    pub lambda_total: f64,
    pub lambda_repr: LambdaRepr,
    pub a_t: f64,
}

impl Decomposition {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Decomposition at time `t`, with `ρ_t` from the scales module.
pub fn build(m: &LevyMeasure, t: f64) -> Result<Decomposition> {
    let rho_t = rho(m, t)?.value;
    build_at(m, t, rho_t)
}

/// Decomposition at time `t` with a given `ρ_t`.
pub fn build_at(m: &LevyMeasure, t: f64, rho_t: f64) -> Result<Decomposition> {
    let cut = 1.0 / rho_t;
    let lambda_total = t * m.tail_mass(cut);
    let a_t = m.shift(t, cut);
    let lambda_repr = if m.is_atomic() {
        let range = URange::beyond(cut);
        let mut atoms: Vec<(f64, f64)> = m
            .side_atoms(Side::Neg, range, ATOM_INDEX_LIMIT)
            .into_iter()
            .map(|(u, w)| (-u, t * w))
            .collect();
        atoms.extend(m.side_atoms(Side::Pos, range, ATOM_INDEX_LIMIT).into_iter().map(|(u, w)| (u, t * w)));
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        LambdaRepr::Atoms { atoms }
    } else {
        let u = log_space(cut * (1.0 + 1e-12), cut * 1e6, 121);
        LambdaRepr::Density {
            positive: u.iter().map(|&x| t * m.density(x)).collect(),
            negative: u.iter().map(|&x| t * m.density(-x)).collect(),
            u,
        }
    };
    Ok(Decomposition { t, rho_t, cut, lambda_total, lambda_repr, a_t })
}

/// `ψ_t(ξ) = t ∫_{|ρ_t u| ≤ 1} (1 − e^{iξu} + iξu) μ(du)`
pub fn psi_t(m: &LevyMeasure, dec: &Decomposition, xi: f64) -> Result<Complex64> {
    m.psi_truncated(dec.t, dec.cut, xi)
}

/// Characteristic function `∫ e^{iξy} P_t(dy) = exp(−t∫_{|u|>cut}(1 − e^{iξu})μ(du))`.
pub fn poisson_char(m: &LevyMeasure, dec: &Decomposition, xi: f64) -> Result<Complex64> {
    Ok((-m.big_jump_exponent(dec.t, dec.cut, xi)?).exp())
}

/// `e^{−Λ} Λ^m/m!` for `m = 0..=m_max` and the mass of the dropped terms.
pub fn poisson_weights(lambda: f64, m_max: usize) -> (Vec<f64>, f64) {
    let mut w = Vec::with_capacity(m_max + 1);
    let mut term = (-lambda).exp();
    for m in 0..=m_max {
        w.push(term);
        term *= lambda / (m + 1) as f64;
    }
    // the dropped tail, summed forward until negligible
    let mut tail = 0.0;
    let mut m = m_max + 1;
    while term > 1e-18 * tail || m < m_max + 3 {
        tail += term;
        term *= lambda / (m + 1) as f64;
        m += 1;
        if term == 0.0 {
            break;
        }
    }
    (w, tail)
}

/// Smallest `m_max` whose dropped Poisson tail is at most `tol`.
pub fn m_max_for(lambda: f64, tol: f64) -> usize {
    let mut m = 0;
    while poisson_weights(lambda, m).1 > tol {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonTerm {
    pub m: usize,
    /// `e^{−Λ}Λ(ℝ)^m/m!`, the mass of this term.
    pub mass: f64,
    /// Support of `e^{−Λ}Λ^{*m}/m!` for atomic `Λ`, with pruned weights
    /// accounted for in [`PoissonLaw::pruned`].
    pub atoms: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonLaw {
    pub terms: Vec<PoissonTerm>,
    /// `e^{−Λ} Σ_{m > m_max} Λ^m/m!`
    pub tail_mass: f64,
    /// Mass of atoms dropped by pruning.
    pub pruned: f64,
}

impl PoissonLaw {
    /// Total retained mass plus dropped tail.
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|t| t.mass).sum::<f64>() + self.tail_mass
    }
}

/// Truncated series `P_t = e^{−Λ} Σ_{m ≤ m_max} Λ^{*m}/m!`.
///
/// Convolution powers of atomic `Λ` are enumerated exactly; single
/// contributions below `prune` times the term mass are dropped and their
/// mass reported. For densities only the term masses are returned; their
/// convolution powers live on grids in the Fourier module.
pub fn poisson_law(dec: &Decomposition, m_max: usize, tol: f64, prune: f64) -> Result<PoissonLaw> {
    let (weights, tail) = poisson_weights(dec.lambda_total, m_max);
    if tail > tol {
        return Err(LevyError::TruncationInsufficient { tail, tol, m_max });
    }
    let mut terms = Vec::with_capacity(m_max + 1);
    let mut pruned = 0.0;
    match &dec.lambda_repr {
        LambdaRepr::Atoms { atoms } => {
            let lambda = dec.lambda_total;
            // normalized jump law
            let jump: Vec<(f64, f64)> = atoms.iter().map(|&(u, w)| (u, w / lambda)).collect();
            let mut current: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
            current.insert(key(0.0), (0.0, 1.0));
            for (m, &mass) in weights.iter().enumerate() {
                if m > 0 {
                    let mut next: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
                    let mut dropped = 0.0;
                    for &(x, p) in current.values() {
                        for &(u, q) in &jump {
                            let w = p * q;
                            if w < prune {
                                dropped += w;
                                continue;
                            }
                            let y = x + u;
                            let e = next.entry(key(y)).or_insert((y, 0.0));
                            e.1 += w;
                        }
                    }
                    pruned += mass * dropped;
                    current = next;
                }
                let mut atoms: Vec<(f64, f64)> = current.values().map(|&(x, p)| (x, mass * p)).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                terms.push(PoissonTerm { m, mass, atoms: Some(atoms) });
            }
        }
        LambdaRepr::Density { .. } => {
            for (m, &mass) in weights.iter().enumerate() {
                terms.push(PoissonTerm { m, mass, atoms: None });
            }
        }
    }
    Ok(PoissonLaw { terms, tail_mass: tail, pruned })
}

/// Merge key: sums of the same dyadic atoms in different orders agree to
/// the last few bits, so locations are bucketed after rounding.
fn key(x: f64) -> u64 {
    let r = if x == 0.0 { 0.0 } else { (x * 2f64.powi(40)).round() / 2f64.powi(40) };
    r.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{LevyMeasureSpec, MeasureKind};
    use std::f64::consts::PI;

    fn measure(spec: LevyMeasureSpec) -> LevyMeasure {
        LevyMeasure::new(spec).unwrap()
    }

    #[test]
    fn cauchy_lambda_total_is_constant() {
        let m = measure(LevyMeasureSpec::cauchy());
        for &t in &[1e-4, 0.01, 0.5] {
            let d = build(&m, t).unwrap();
            assert!((d.lambda_total - 2.0 / PI).abs() < 1e-9);
            assert_eq!(d.a_t, 0.0);
        }
    }

    #[test]
    fn dyadic_atoms_are_those_beyond_the_cut() {
        let m = measure(LevyMeasureSpec::dyadic(1.0, 1.0));
        let t = 2f64.powi(-6);
        let d = build(&m, t).unwrap();
        let k = d.rho_t.log2().floor() as i32;
        let LambdaRepr::Atoms { atoms } = &d.lambda_repr else { panic!() };
        // oracle: enumerate 2^{-n} > 1/ρ_t directly
        let expect: Vec<(f64, f64)> = (-60..=k)
            .filter(|&n| 2f64.powi(-n) > d.cut)
            .flat_map(|n| [(2f64.powi(-n), t * 2f64.powi(n)), (-2f64.powi(-n), t * 2f64.powi(n))])
            .collect();
        assert_eq!(atoms.len(), expect.len());
        for (u, w) in expect {
            assert!(atoms.iter().any(|&(a, b)| a == u && (b - w).abs() < 1e-15 * w));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        assert!((total - d.lambda_total).abs() < 1e-12 * total);
    }

    #[test]
    fn cut_atom_goes_to_small_jumps() {
        // ρ_t exactly 4: the atom at 1/4 belongs to ψ_t, not Λ_t
        let m = measure(LevyMeasureSpec::dyadic(1.0, 1.0));
        let d = build_at(&m, 0.1, 4.0).unwrap();
        let LambdaRepr::Atoms { atoms } = &d.lambda_repr else { panic!() };
        assert!(atoms.iter().all(|a| a.0.abs() > 0.25));
        assert!(atoms.iter().any(|a| a.0 == 0.5));
    }

    #[test]
    fn poisson_truncation_for_cauchy() {
        let lambda = 2.0 / PI;
        let m = m_max_for(lambda, 1e-12);
        assert_eq!(m, 12);
        // oracle: direct tail sum
        let direct = |mm: usize| {
            let mut s = 0.0;
            for j in (mm + 1)..60 {
                s += (-lambda).exp() * lambda.powi(j as i32) / (1..=j).map(|i| i as f64).product::<f64>();
            }
            s
        };
        assert!(direct(12) <= 1e-12 && direct(11) > 1e-12 && direct(14) <= 1e-12);
        assert!((poisson_weights(lambda, 12).1 / direct(12) - 1.0).abs() < 1e-10);
        let d = build(&measure(LevyMeasureSpec::cauchy()), 0.1).unwrap();
        assert!(matches!(poisson_law(&d, 3, 1e-12, 0.0), Err(LevyError::TruncationInsufficient { .. })));
        let law = poisson_law(&d, 14, 1e-12, 0.0).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-14);
        assert!((law.terms[0].mass - (-d.lambda_total).exp()).abs() < 1e-16);
    }

    #[test]
    fn two_atom_convolution_matches_brute_force() {
        // Λ with magnitudes 1 and 2 only: atoms n ∈ {-1, 0}
        let spec = LevyMeasureSpec {
            kind: MeasureKind::DyadicAtoms { gamma: 1.0, upsilon: 1.0, n_min: -1, n_max: Some(0) },
            drift_a: 0.0,
            symmetric: true,
        };
        let m = measure(spec);
        let d = build_at(&m, 0.3, 4.0).unwrap();
        let law = poisson_law(&d, 12, 1e-9, 0.0).unwrap();
        let LambdaRepr::Atoms { atoms } = &d.lambda_repr else { panic!() };
        assert_eq!(atoms.len(), 4);
        let lam = d.lambda_total;
        let mut brute: BTreeMap<i64, f64> = BTreeMap::new();
        for a in atoms {
            for b in atoms {
                *brute.entry((a.0 + b.0) as i64).or_default() += a.1 * b.1;
            }
        }
        let got = law.terms[2].atoms.as_ref().unwrap();
        assert_eq!(got.len(), brute.len());
        for &(x, w) in got {
            let expect = (-lam).exp() * brute[&(x as i64)] / 2.0;
            assert!((w - expect).abs() < 1e-15, "{x}: {w} vs {expect}");
        }
        let total: f64 = law.terms.iter().flat_map(|t| t.atoms.as_ref().unwrap().iter().map(|a| a.1)).sum();
        assert!((total + law.tail_mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn characteristic_function_factorizes() {
        let points = vec![[1e-4, 1e6], [1.0, 1.0]];
        let asym = LevyMeasureSpec {
            kind: MeasureKind::TabulatedDensity { points, symmetric_extension: false, tail_exponent: Some(0.5) },
            drift_a: 0.2,
            symmetric: false,
        };
        for spec in [LevyMeasureSpec::cauchy(), LevyMeasureSpec::dyadic(1.0, 1.0), asym] {
            let m = measure(spec.clone());
            for &t in &[0.3, 0.01] {
                let d = build(&m, t).unwrap();
                for j in 0..20 {
                    let xi = (j as f64 - 9.5) * 0.37 * d.rho_t;
                    let lhs = (-m.psi(xi).unwrap() * t).exp();
                    let rhs = (-psi_t(&m, &d, xi).unwrap()).exp()
                        * poisson_char(&m, &d, xi).unwrap()
                        * Complex64::from_polar(1.0, -xi * d.a_t);
                    assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm(), "{spec:?} t={t} xi={xi}: {lhs} {rhs}");
                }
            }
        }
    }

    #[test]
    fn atomic_poisson_char_matches_enumeration() {
        let spec = LevyMeasureSpec {
            kind: MeasureKind::DyadicAtoms { gamma: 1.0, upsilon: 1.0, n_min: -3, n_max: None },
            drift_a: 0.0,
            symmetric: true,
        };
        let m = measure(spec);
        let d = build(&m, 2f64.powi(-6)).unwrap();
        let law = poisson_law(&d, 30, 1e-15, 0.0).unwrap();
        for &xi in &[0.7, 3.0, 25.0] {
            let direct: Complex64 = law
                .terms
                .iter()
                .flat_map(|t| t.atoms.as_ref().unwrap().iter())
                .map(|&(x, w)| Complex64::from_polar(w, xi * x))
                .sum();
            let closed = poisson_char(&m, &d, xi).unwrap();
            assert!((direct - closed).norm() < 1e-12, "{xi}");
        }
    }

    #[test]
    fn truncated_exponent_dominates() {
        let m = measure(LevyMeasureSpec::stable(1.5));
        let d = build(&m, 0.05).unwrap();
        for &xi in &[0.1, 1.0, 20.0, 300.0] {
            let p = psi_t(&m, &d, xi).unwrap();
            let full = d.t * m.re_psi(xi).unwrap();
            assert!(p.re <= full * (1.0 + 1e-12));
            assert!(p.re >= full - 2.0 * d.t * m.psi_u(d.rho_t) - 1e-12);
        }
        assert_eq!(psi_t(&m, &d, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn json_dump_roundtrips() {
        let m = measure(LevyMeasureSpec::dyadic(1.0, 1.0));
        let d = build(&m, 0.1).unwrap();
        let back: Decomposition = serde_json::from_str(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
