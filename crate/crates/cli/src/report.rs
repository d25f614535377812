//! Machine-readable reports. The JSON layout is documented in
//! `docs/report-schema.md`; the CSV table has the columns
//! `scenario,quantity,value`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gaugecode::{Boundary, Lattice};
use serde::Serialize;

use crate::config::Config;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `value < threshold`
    Below,
    /// `value >= threshold`
    AtLeast,
    /// `value == threshold`
    Equal,
    /// Reported quantity without a pass criterion.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::Below => value < threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Equal => value == threshold,
            Relation::Info => true,
        };
        // `+ 0.0` folds -0 into +0 so reports do not print negative zeros.
        Self { name: name.into(), value: value + 0.0, relation, threshold, pass }
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::Below, threshold)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, threshold)
    }

    pub fn equal(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Relation::Equal, threshold)
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, Relation::Info, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeSummary {
    pub dims: Vec<usize>,
    pub boundary: Boundary,
    pub vertices: usize,
    pub links: usize,
    pub plaquettes: usize,
}

impl From<&Lattice> for LatticeSummary {
    fn from(l: &Lattice) -> Self {
        Self {
            dims: l.dims().to_vec(),
            boundary: l.boundary(),
            vertices: l.num_vertices(),
            links: l.num_links(),
            plaquettes: l.num_plaquettes(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    pub scenario: String,
    pub config: Config,
    pub lattice: LatticeSummary,
    #[serde(rename = "D")]
    pub d: u32,
    pub matter: bool,
    pub pass: bool,
    /// Largest value among `below` checks.
    pub max_deviation: f64,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(
        command: &str,
        suite: Option<&str>,
        config: &Config,
        lattice: &Lattice,
        checks: Vec<Check>,
        data: serde_json::Value,
    ) -> Self {
        let mut config = config.clone();
        config.output.dir = None;
        let max_deviation =
            checks.iter().filter(|c| c.relation == Relation::Below).map(|c| c.value).fold(0.0, f64::max);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            suite: suite.map(Into::into),
            scenario: config.scenario.clone(),
            d: config.truncation.d,
            matter: config.truncation.matter,
            config,
            lattice: lattice.into(),
            pass: checks.iter().all(|c| c.pass),
            max_deviation,
            checks,
            data,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "quantity", "value"]).map_err(io)?;
        let prefix = self.suite.as_deref().unwrap_or(&self.command);
        for c in &self.checks {
            w.write_record([&self.scenario, &format!("{prefix}.{}", c.name), &c.value.to_string()]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Human-readable summary table.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let title = match &self.suite {
            Some(s) => format!("{} {s}", self.command),
            None => self.command.clone(),
        };
        let _ = writeln!(
            out,
            "{title}  scenario={}  lattice={:?} {}  D={}  matter={}",
            self.scenario,
            self.lattice.dims,
            format!("{:?}", self.lattice.boundary).to_lowercase(),
            self.d,
            self.matter
        );
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let rel = match c.relation {
                Relation::Below => "<",
                Relation::AtLeast => ">=",
                Relation::Equal => "==",
                Relation::Info => {
                    let _ = writeln!(out, "  {:<width$}  {:>12}", c.name, c.value);
                    continue;
                }
            };
            let _ = writeln!(
                out,
                "  {:<width$}  {:>12.4e} {rel:>2} {:<10.3e} {}",
                c.name,
                c.value,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "{}", if self.pass { "PASS" } else { "FAIL" });
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let stem = match &self.suite {
            Some(s) => format!("{}-{s}", self.command),
            None => self.command.clone(),
        };
        let json = dir.join(format!("{stem}.json"));
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.to_json()).map_err(|e| CliError::Io(format!("{}: {e}", json.display())))?;
        std::fs::write(&csv, self.to_csv()?).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
        Ok((json, csv))
    }
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::below("x", 1e-12, 1e-10).pass);
        assert!(!Check::below("x", 1e-10, 1e-10).pass);
        assert!(Check::at_least("f", 1.0, 1.0 - 1e-9).pass);
        assert!(!Check::equal("d", 3.0, 4.0).pass);
        assert!(!Check::below("nan", f64::NAN, 1.0).pass);
    }

    #[test]
    fn csv_rows() {
        let cfg = Config::default();
        let lat = gaugecode::Lattice::new(&[2, 2], gaugecode::Boundary::Smooth).unwrap();
        let r = Report::new(
            "verify",
            Some("algebra"),
            &cfg,
            &lat,
            vec![Check::below("braiding", 0.0, 1e-10)],
            serde_json::Value::Null,
        );
        assert_eq!(r.to_csv().unwrap(), "scenario,quantity,value\ndefault,algebra.braiding,0\n");
        assert!(r.pass);
    }
}
