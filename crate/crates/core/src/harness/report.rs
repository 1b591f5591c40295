use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{ExperimentConfig, Format};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::Le => measured <= bound,
            Relation::Lt => measured < bound,
            Relation::Ge => measured >= bound,
            Relation::Gt => measured > bound,
        }
    }
}

/// One measured quantity compared against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CaseRecord {
    pub fn new(id: impl Into<String>) -> Self {
        CaseRecord {
            id: id.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn check(&mut self, name: &str, measured: f64, relation: Relation, bound: f64) -> &mut Self {
        let passed = relation.holds(measured, bound);
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            measured,
            relation,
            bound,
            passed,
        });
        self
    }

    pub fn le(&mut self, name: &str, measured: f64, bound: f64) -> &mut Self {
        self.check(name, measured, Relation::Le, bound)
    }

    pub fn ge(&mut self, name: &str, measured: f64, bound: f64) -> &mut Self {
        self.check(name, measured, Relation::Ge, bound)
    }

    pub fn gt(&mut self, name: &str, measured: f64, bound: f64) -> &mut Self {
        self.check(name, measured, Relation::Gt, bound)
    }

    /// Records a count that must be zero.
    pub fn none(&mut self, name: &str, count: usize) -> &mut Self {
        self.le(name, count as f64, 0.0)
    }

    /// Records a condition as a 0/1 measurement that must equal 1.
    pub fn holds(&mut self, name: &str, ok: bool) -> &mut Self {
        self.ge(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// A case that could not be run at all.
    pub fn errored(id: impl Into<String>, err: &crate::Error) -> Self {
        let mut c = CaseRecord::new(id).param("error", err.to_string());
        c.holds("completed", false);
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<CaseRecord>,
    pub pass: usize,
    pub total: usize,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
    pub config: ExperimentConfig,
}

impl Report {
    /// Sorts cases by id and tallies them.
    pub fn new(suite: &str, mut cases: Vec<CaseRecord>, config: &ExperimentConfig) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = cases.iter().filter(|c| c.passed).count();
        Report {
            suite: suite.into(),
            total: cases.len(),
            passed: pass == cases.len(),
            pass,
            cases,
            wall_clock_ms: None,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per case. Columns are the union of parameter names and check
    /// names over all cases, sorted; missing entries are left empty.
    pub fn to_csv(&self) -> Result<String> {
        let params: BTreeSet<&str> = self
            .cases
            .iter()
            .flat_map(|c| c.params.keys().map(String::as_str))
            .collect();
        let checks: BTreeSet<&str> = self
            .cases
            .iter()
            .flat_map(|c| c.checks.iter().map(|k| k.name.as_str()))
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["suite".to_string(), "id".into(), "passed".into()];
        header.extend(params.iter().map(|p| format!("param.{p}")));
        for k in &checks {
            header.extend([format!("{k}.measured"), format!("{k}.bound"), format!("{k}.passed")]);
        }
        w.write_record(&header)?;
        for case in &self.cases {
            let mut row = vec![self.suite.clone(), case.id.clone(), case.passed.to_string()];
            row.extend(params.iter().map(|p| match case.params.get(*p) {
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
                None => String::new(),
            }));
            for k in &checks {
                match case.checks.iter().find(|c| c.name == *k) {
                    Some(c) => row.extend([
                        format!("{:?}", c.measured),
                        format!("{:?}", c.bound),
                        c.passed.to_string(),
                    ]),
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Writes the report to `path`, or to stdout when no path is given.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut a = CaseRecord::new("b/1").param("n", 2).param("norm", "inf");
        a.le("quotient", 1.5, 2.0);
        let mut b = CaseRecord::new("a/0").param("n", 1);
        b.gt("margin", 0.1, 0.0).none("violations", 3);
        Report::new("demo", vec![a, b], &ExperimentConfig::default())
    }

    #[test]
    fn tallies_and_order() {
        let r = sample();
        assert_eq!(r.cases[0].id, "a/0");
        assert_eq!((r.pass, r.total, r.passed), (1, 2, false));
        for c in &r.cases {
            for k in &c.checks {
                assert_eq!(k.passed, k.relation.holds(k.measured, k.bound));
            }
            assert_eq!(c.passed, c.checks.iter().all(|k| k.passed));
        }
    }

    #[test]
    fn empty_json_shape() {
        let r = Report::new("flat", vec![], &ExperimentConfig::default());
        let s = r.to_json().unwrap();
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["suite"], "flat");
        assert_eq!(v["cases"], Value::Array(vec![]));
        assert_eq!(v["pass"], 0);
        assert!(s.find("\"suite\"").unwrap() < s.find("\"cases\"").unwrap());
        assert!(s.find("\"cases\"").unwrap() < s.find("\"pass\"").unwrap());
        assert!(v.get("wall_clock_ms").is_none());
    }

    #[test]
    fn emission_is_stable() {
        let r = sample();
        assert_eq!(r.to_json().unwrap(), r.to_json().unwrap());
        assert_eq!(r.to_csv().unwrap(), r.to_csv().unwrap());
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_rows() {
        let r = sample();
        let text = r.to_csv().unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header = rd.headers().unwrap().clone();
        assert_eq!(&header[0], "suite");
        assert!(header.iter().any(|h| h == "param.norm"));
        let rows: Vec<_> = rd.records().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(rows.len() + 1, text.lines().count());
        assert_eq!(rows.len(), r.cases.len());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("report.json");
        let err = emit_report(&sample(), Format::Json, Some(&bad)).unwrap_err();
        assert!(matches!(err, crate::Error::Io(_)));
    }
}
