//! Reading configuration files and command-line value lists.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::{CliError, Result};

/// Parses a JSON document, reporting `file:line:column` and the offending
/// key on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json(&text, &path.display().to_string())
}

/// Inclusive arithmetic grid written `start:stop:step`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Config(format!("grid `{spec}`: expected start:stop:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config(format!(
            "grid `{spec}`: need step > 0 and stop >= start"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Comma-separated list of reals, e.g. an ε-ladder.
pub fn parse_reals(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{p}` in `{spec}` is not a number")))
        })
        .collect()
}

/// Comma-separated census such as `2,0,0,7`.
pub fn parse_counts(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("`{p}` in `{spec}` is not a count")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use normsim_core::NormConfig;

    #[test]
    fn grid_is_inclusive() {
        let g = parse_grid("0.1:0.95:0.05").unwrap();
        assert_eq!(g.len(), 18);
        assert!((g[17] - 0.95).abs() < 1e-12);
        assert_eq!(parse_grid("1:1:1").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_counts("2, 0,0,7").unwrap(), vec![2, 0, 0, 7]);
        assert!(parse_counts("2,x").is_err());
        assert_eq!(parse_reals("1e-2,1e-3").unwrap(), vec![1e-2, 1e-3]);
    }

    #[test]
    fn unknown_key_names_the_key_and_line() {
        let text = "{\n \"N\": 5, \"L\": 3, \"b\": 3, \"c\": 1, \"delta\": 0.5,\n \"epsilon\": 0.1, \"gamma\": 1, \"h\": 1, \"bogus\": 2}";
        let err = parse_json::<NormConfig>(text, "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.starts_with("cfg.json:3:"), "{msg}");
        assert_eq!(err.exit_code(), crate::EXIT_CONFIG);
    }
}
