//! Parsing of grids, start and cut specifications, and `--config` merging.

use std::ffi::OsString;
use std::path::Path;

use potts_core::graphs::RegularGraph;
use potts_core::{Error, Result};
use serde_json::Value;

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Integer grid: `3`, `3..8` (inclusive), or a comma list of either.
pub fn int_grid(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| bad(format!("grid item {t:?}: {e}")));
        match item.split_once("..") {
            Some((a, b)) => out.extend(parse(a)?..=parse(b)?),
            None => out.push(parse(item)?),
        }
    }
    Ok(out)
}

/// Float grid: `lo:hi:n` (n evenly spaced points, endpoints included) or a comma list.
pub fn float_grid(s: &str) -> Result<Vec<f64>> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| bad(format!("grid item {t:?}: {e}")));
    if let [lo, hi, n] = s.split(':').collect::<Vec<_>>()[..] {
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        let n: usize = n.trim().parse().map_err(|e| bad(format!("grid count {n:?}: {e}")))?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse).collect()
}

pub fn float_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| bad(format!("number {t:?}: {e}")))).collect()
}

/// A 1-based color on the command line.
pub fn color(s: &str, q: usize) -> Result<usize> {
    let c: usize = s.trim().parse().map_err(|e| bad(format!("color {s:?}: {e}")))?;
    if c == 0 || c > q {
        return Err(bad(format!("color {c} outside 1..={q}")));
    }
    Ok(c - 1)
}

pub fn read_graph(path: &Path) -> Result<RegularGraph> {
    RegularGraph::from_text(&std::fs::read_to_string(path)?)
}

fn flag_value(v: &Value) -> Option<String> {
    match v {
        Value::Bool(_) | Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Array(a) => Some(a.iter().map(|x| flag_value(x).unwrap_or_default()).collect::<Vec<_>>().join(",")),
        other => Some(other.to_string()),
    }
}

/// Apply `--config FILE`: each key of the JSON object replaces the flag of the same
/// name (underscores become dashes); `true` sets a switch, `false` and `null` drop it.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(it.next().ok_or_else(|| bad("--config needs a file"))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path)?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(bad("config file must hold a JSON object"));
    };
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let mut kept = Vec::with_capacity(rest.len());
        let mut i = 0;
        while i < rest.len() {
            let s = rest[i].to_string_lossy();
            if s == flag {
                let takes_value = rest.get(i + 1).is_some_and(|n| !n.to_string_lossy().starts_with("--"));
                i += if takes_value { 2 } else { 1 };
                continue;
            }
            if s.starts_with(&format!("{flag}=")) {
                i += 1;
                continue;
            }
            kept.push(rest[i].clone());
            i += 1;
        }
        rest = kept;
        match (&value, flag_value(&value)) {
            (Value::Bool(true), _) => rest.push(flag.into()),
            (_, Some(v)) => {
                rest.push(flag.into());
                rest.push(v.into());
            }
            _ => {}
        }
    }
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn grids() {
        assert_eq!(int_grid("3..5,8").unwrap(), vec![3, 4, 5, 8]);
        assert!(int_grid("5..4").unwrap().is_empty());
        assert!(int_grid("").unwrap().is_empty());
        assert_eq!(float_grid("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(float_grid("2.5, 3").unwrap(), vec![2.5, 3.0]);
        assert!(float_grid("1:2:0").unwrap().is_empty());
        assert!(int_grid("x").is_err());
    }

    #[test]
    fn colors_are_one_based() {
        assert_eq!(color("1", 3).unwrap(), 0);
        assert!(color("0", 3).is_err());
        assert!(color("4", 3).is_err());
    }

    #[test]
    fn config_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(&p, r#"{"q": 4, "B": 2.5, "json": true, "alpha": [0.5, 0.5]}"#).unwrap();
        let args = os(&["potts-lab", "moments", "--q", "3", "--config", p.to_str().unwrap(), "--delta", "3"]);
        let merged: Vec<String> = merge_config(args).unwrap().iter().map(|s| s.to_string_lossy().into()).collect();
        assert_eq!(
            merged,
            ["potts-lab", "moments", "--delta", "3", "--B", "2.5", "--alpha", "0.5,0.5", "--json", "--q", "4"]
        );
    }
}
