//! The integral `I_k(t, λ) = ∫|y|^k e^{−λtψ^U(y)} dy` against `ρ_t^{k+1}`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::LevyMeasure;
use crate::quad::integrate_to_inf;
use crate::report::Verdict;
use crate::scales::rho;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IkReport {
    pub k: usize,
    pub lambda: f64,
    /// `(t, I_k(t, λ)/ρ_t^{k+1})`
    pub rows: Vec<(f64, f64)>,
    pub sup: f64,
    /// Sup over the grid with geometric midpoints added.
    pub sup_refined: f64,
    pub verdict: Verdict,
}

impl IkReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,ratio\n");
        for (t, r) in &self.rows {
            s.push_str(&format!("{t:e},{r:e}\n"));
        }
        s
    }
}

/// `I_k/ρ_t^{k+1} = 2∫_0^∞ u^k e^{−λtψ^U(ρ_t u)} du`.
fn ratio(m: &LevyMeasure, t: f64, k: usize, lambda: f64) -> Result<f64> {
    let r = rho(m, t)?.value;
    let q = integrate_to_inf(|u| u.powi(k as i32) * (-lambda * t * m.psi_u(r * u)).exp(), 0.0, 0.0, 1e-9, 4000)?;
    Ok(2.0 * q.value)
}

/// Sup of `I_k/ρ_t^{k+1}` over `t_grid`. PASS when the values are finite,
/// the sup moves by less than 1% once midpoints are added, and the smallest
/// quarter of the times does not exceed the rest by more than 25%.
pub fn ik_diagnostic(m: &LevyMeasure, t_grid: &[f64], k: usize, lambda: f64) -> Result<IkReport> {
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let rows = ts.iter().map(|&t| Ok((t, ratio(m, t, k, lambda)?))).collect::<Result<Vec<_>>>()?;
    let sup = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mids = ts.windows(2).map(|w| ratio(m, (w[0] * w[1]).sqrt(), k, lambda)).collect::<Result<Vec<_>>>()?;
    let sup_refined = mids.iter().cloned().fold(sup, f64::max);
    let quarter = (rows.len() / 4).max(1);
    let low = rows[..quarter].iter().map(|r| r.1).fold(0.0, f64::max);
    let rest = rows[quarter..].iter().map(|r| r.1).fold(0.0, f64::max);
    let finite = rows.iter().all(|r| r.1.is_finite() && r.1 > 0.0);
    let stable = (sup_refined - sup) / sup < 0.01;
    let flat = rows.len() < 2 || low <= 1.25 * rest;
    Ok(IkReport { k, lambda, rows, sup, sup_refined, verdict: Verdict::from_bool(finite && stable && flat) })
}
