//! CSV reports: one summary of pass/fail checks, named parameters, `(x, y, ...)` series for
//! plotting and optional field dumps.
//!
//! Every file starts with a `#` line naming the pipeline, scenario and seed. Numbers are
//! written as `{:.12e}`, so identical inputs give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::numerics::{fmt_f, SampledField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Series { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub pipeline: String,
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub params: Vec<(String, f64)>,
    pub series: Vec<Series>,
    pub fields: Vec<SampledField>,
}

impl Report {
    pub fn new(pipeline: &str, scenario: &str, seed: u64) -> Self {
        Report {
            pipeline: pipeline.into(),
            scenario: scenario.into(),
            seed,
            checks: Vec::new(),
            params: Vec::new(),
            series: Vec::new(),
            fields: Vec::new(),
        }
    }

    /// Records `value <= threshold`.
    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value <= threshold;
        self.check(name, value, threshold, pass);
    }

    /// Records `value >= threshold`.
    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) {
        let pass = value >= threshold;
        self.check(name, value, threshold, pass);
    }

    pub fn check(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.checks.push(Check { name: name.into(), value, threshold, pass });
    }

    pub fn param(&mut self, name: &str, value: f64) {
        self.params.push((name.into(), value));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn header(&self) -> String {
        format!("# ccl pipeline={} scenario={} seed={}\n", self.pipeline, self.scenario, self.seed)
    }

    /// Writes `<pipeline>_summary.csv`, `<pipeline>_params.csv`, one `<pipeline>_<series>.csv`
    /// per series and one `<pipeline>_<field>.cclf` per field. Returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| vec![c.name.clone(), fmt_f(c.value), fmt_f(c.threshold), c.pass.to_string()])
            .collect();
        out.push(self.write_table(dir, "summary", &["check", "value", "threshold", "pass"], &rows)?);
        let rows: Vec<Vec<String>> = self.params.iter().map(|(n, v)| vec![n.clone(), fmt_f(*v)]).collect();
        out.push(self.write_table(dir, "params", &["name", "value"], &rows)?);
        for s in &self.series {
            let cols: Vec<&str> = s.columns.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = s.rows.iter().map(|r| r.iter().map(|v| fmt_f(*v)).collect()).collect();
            out.push(self.write_table(dir, &s.name, &cols, &rows)?);
        }
        for f in &self.fields {
            let path = dir.join(format!("{}_{}.cclf", self.pipeline, f.meta()));
            f.write_binary(&path)?;
            out.push(path);
        }
        Ok(out)
    }

    fn write_table(&self, dir: &Path, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = dir.join(format!("{}_{}.csv", self.pipeline, name));
        let mut file = fs::File::create(&path)?;
        file.write_all(self.header().as_bytes())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Human-readable summary lines.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {} {:.3e} (threshold {:.3e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    self.pipeline,
                    c.name,
                    c.value,
                    c.threshold
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_writes_header_only_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("density", "empty", 3);
        r.series.push(Series::new("series", &["n", "error"]));
        let paths = r.write(dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let text = fs::read_to_string(dir.path().join("density_series.csv")).unwrap();
        assert_eq!(text, "# ccl pipeline=density scenario=empty seed=3\nn,error\n");
        let summary = fs::read_to_string(dir.path().join("density_summary.csv")).unwrap();
        assert_eq!(summary.lines().nth(1), Some("check,value,threshold,pass"));
        assert!(r.passed());
    }

    #[test]
    fn rows_are_formatted_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("psh", "x", 1);
        r.at_most("gap", 0.5, 1.0);
        r.at_least("theta", 0.5, 1.0);
        let mut s = Series::new("bounds", &["abs_x", "lower_gap", "upper_gap"]);
        s.push(vec![1.0, -0.25, 1.0 / 3.0]);
        r.series.push(s);
        r.write(dir.path()).unwrap();
        let summary = fs::read_to_string(dir.path().join("psh_summary.csv")).unwrap();
        assert!(summary.contains("gap,5.000000000000e-1,1.000000000000e0,true"));
        assert!(summary.contains("theta,5.000000000000e-1,1.000000000000e0,false"));
        assert!(!r.passed());
        assert_eq!(r.lines()[1], "FAIL psh: theta 5.000e-1 (threshold 1.000e0)");
    }
}
