use std::path::{Path, PathBuf};

use levykb_core::report::log_space;
use levykb_core::{LevyMeasureSpec, TailSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything a command needs; serialized into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec_source: String,
    pub spec: LevyMeasureSpec,
    pub t0: f64,
    pub t_grid: Vec<f64>,
    /// Points per `t` on `[−50/ρ_t, 50/ρ_t]`.
    pub x_points: usize,
    pub k: usize,
    pub tail: Option<TailSpec>,
    pub mc_n: usize,
    pub seed: u64,
    pub alias_tol: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Short SHA-256 of the canonical JSON form without the output directory.
    pub fn hash_hex(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("config is an object").remove("out");
        let json = v.to_string();
        Sha256::digest(json.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `name[:p1,p2,...]` for a built-in preset, otherwise a JSON file.
pub fn parse_spec(source: &str) -> Result<LevyMeasureSpec, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(serde_json::from_str(&text)?);
    }
    let (name, params) = source.split_once(':').unwrap_or((source, ""));
    let params = params
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::BadArgument { flag: "spec", detail: format!("{source}: {e}") })?;
    Ok(LevyMeasureSpec::preset(name, &params)?)
}

/// `a:b:n`, `n` log-spaced times from `a` to `b = t₀`.
pub fn parse_t_grid(text: &str) -> Result<(f64, Vec<f64>), CliError> {
    let bad = |detail: String| CliError::BadArgument { flag: "t-grid", detail };
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad(format!("expected a:b:n, got `{text}`")));
    };
    let a: f64 = a.parse().map_err(|e| bad(format!("{a}: {e}")))?;
    let b: f64 = b.parse().map_err(|e| bad(format!("{b}: {e}")))?;
    let n: usize = n.parse().map_err(|e| bad(format!("{n}: {e}")))?;
    if !(a > 0.0 && a <= b && b.is_finite() && n >= 1) || (n == 1 && a != b) {
        return Err(bad(format!("need 0 < a <= b and n >= 1 (n = 1 only with a = b), got `{text}`")));
    }
    Ok((b, log_space(a, b, n)))
}

/// `{"alpha": α}` for the CDF form, `{"alpha": α, "scale": c}` for densities.
pub fn parse_tail(json: &str, density: bool) -> Result<TailSpec, CliError> {
    let flag = if density { "tail-density" } else { "tail-cdf" };
    let bad = |detail: String| CliError::BadArgument { flag, detail };
    let v: Value = serde_json::from_str(json).map_err(|e| bad(e.to_string()))?;
    let num = |key: &str| v.get(key).and_then(Value::as_f64);
    let alpha = num("alpha").ok_or_else(|| bad("missing numeric `alpha`".into()))?;
    if !(alpha > 0.0) {
        return Err(bad(format!("alpha must be positive, got {alpha}")));
    }
    Ok(if density {
        TailSpec::ParetoDensity { alpha, scale: num("scale").unwrap_or(1.0) }
    } else {
        TailSpec::ParetoCdf { alpha }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_with_parameters() {
        assert_eq!(parse_spec("cauchy").unwrap(), LevyMeasureSpec::cauchy());
        assert_eq!(parse_spec("stable:0.7").unwrap(), LevyMeasureSpec::stable(0.7));
        assert_eq!(parse_spec("dyadic:1.5,1").unwrap(), LevyMeasureSpec::dyadic(1.5, 1.0));
        assert!(parse_spec("stable:x").is_err());
        assert!(parse_spec("gaussian").is_err());
    }

    #[test]
    fn t_grid_forms() {
        let (t0, g) = parse_t_grid("1e-4:1:5").unwrap();
        assert_eq!(t0, 1.0);
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1e-2).abs() < 1e-15);
        assert_eq!(parse_t_grid("0.5:0.5:1").unwrap().1, vec![0.5]);
        for bad in ["1:0.1:3", "0:1:3", "1e-3:1", "a:1:3", "0.1:1:1"] {
            assert!(parse_t_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tails() {
        assert_eq!(parse_tail(r#"{"alpha": 1.5}"#, false).unwrap(), TailSpec::ParetoCdf { alpha: 1.5 });
        assert_eq!(
            parse_tail(r#"{"alpha": 1, "scale": 2}"#, true).unwrap(),
            TailSpec::ParetoDensity { alpha: 1.0, scale: 2.0 }
        );
        assert!(parse_tail(r#"{"scale": 2}"#, true).is_err());
        assert!(parse_tail(r#"{"alpha": -1}"#, false).is_err());
    }
}
