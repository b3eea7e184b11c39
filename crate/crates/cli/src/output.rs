//! Tables, artifact rendering and atomic file writes.

use std::io::Write;
use std::path::Path;

use potts_core::{rng, Error, Result};
use serde_json::{json, Map, Value};

/// A CSV table with per-column units.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub units: Vec<(String, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { header, ..Self::default() }
    }

    pub fn unit(mut self, column: &str, unit: &'static str) -> Self {
        self.units.push((column.into(), unit));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form, in exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

/// Everything a command produces; the caller decides what is written where.
#[derive(Debug, Default)]
pub struct Report {
    pub value: Value,
    pub table: Option<Table>,
    /// Shown instead of `table` when the table itself goes to `--csv`.
    pub summary: Option<Table>,
    /// Native non-CSV rendering, such as graph text or verify lines.
    pub text: Option<String>,
    /// Extra graph files requested with `--save`.
    pub files: Vec<(std::path::PathBuf, String)>,
    /// The command ran but some part of it failed validation.
    pub failed: bool,
}

/// Resolved configuration embedded in every artifact.
pub struct Provenance {
    pub config: Value,
    pub seed: u64,
}

impl Provenance {
    fn json(&self) -> Value {
        json!({ "command": self.config, "seed": self.seed, "generator": rng::GENERATOR_NAME })
    }

    fn comment_lines(&self, units: &[(String, &'static str)]) -> String {
        let mut s = format!("# config {}\n# seed {}\n# generator {}\n", self.config, self.seed, rng::GENERATOR_NAME);
        if !units.is_empty() {
            let u: Vec<String> = units.iter().map(|(c, u)| format!("{c}={u}")).collect();
            s.push_str(&format!("# units {}\n", u.join(",")));
        }
        s
    }
}

pub fn render_csv(table: &Table, prov: &Provenance) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let mut s = prov.comment_lines(&table.units);
    s.push_str(&String::from_utf8(body).map_err(|e| Error::Parse(e.to_string()))?);
    Ok(s)
}

pub fn render_json(value: &Value, prov: &Provenance) -> Result<String> {
    let doc = match value {
        Value::Object(m) => {
            let mut m = m.clone();
            m.insert("config".into(), prov.json());
            Value::Object(m)
        }
        other => {
            let mut m = Map::new();
            m.insert("config".into(), prov.json());
            m.insert("result".into(), other.clone());
            Value::Object(m)
        }
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Insert the provenance comments after the `n delta` header of a graph file. A graph
/// that records its own sampler seed keeps that line instead of the master seed.
pub fn render_graph(text: &str, prov: &Provenance) -> String {
    let (head, rest) = text.split_once('\n').unwrap_or((text, ""));
    let mut s = format!("{head}\n# config {}\n", prov.config);
    if !rest.lines().any(|l| l.starts_with("# seed ")) {
        s.push_str(&format!("# seed {}\n", prov.seed));
    }
    s.push_str(&format!("# generator {}\n", rng::GENERATOR_NAME));
    s.push_str(rest);
    s
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance { config: json!({"thresholds": {"q": 3}}), seed: 7 }
    }

    #[test]
    fn csv_has_metadata_then_header() {
        let mut t = Table::new(&["a", "b"]).unit("a", "nats");
        t.push(vec!["1".into(), "x,y".into()]);
        let s = render_csv(&t, &prov()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], r#"# config {"thresholds":{"q":3}}"#);
        assert_eq!(lines[1], "# seed 7");
        assert_eq!(lines[2], "# generator chacha8");
        assert_eq!(lines[3], "# units a=nats");
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], r#"1,"x,y""#);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.5, 4.0, 6.661338147750939e-16, -3.2e-9, 2.5e20, 1e-5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(4.0), "4");
        assert_eq!(num(6.661338147750939e-16), "6.661338147750939e-16");
    }

    #[test]
    fn json_keeps_object_fields() {
        let s = render_json(&json!({"Bu": 1.5}), &prov()).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["Bu"], 1.5);
        assert_eq!(v["config"]["seed"], 7);
        let s = render_json(&json!([1, 2]), &prov()).unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["result"], json!([1, 2]));
    }

    #[test]
    fn graph_comments_follow_header() {
        let s = render_graph("2 1\n0 1\n", &prov());
        assert!(s.starts_with("2 1\n# config"));
        assert!(s.contains("# seed 7\n"));
        assert!(s.ends_with("0 1\n"));
        let s = render_graph("2 1\n# seed 3\n0 1\n", &prov());
        assert_eq!(s.matches("# seed").count(), 1);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
