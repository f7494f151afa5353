//! Report rows and their CSV/JSON renderings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CSV_HEADER: [&str; 8] = ["experiment", "params", "lhs", "lhs_se", "rhs", "rhs_se", "ratio", "pass"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// What is exercised, e.g. `maximal.sweep`.
    pub experiment: String,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(experiment: impl Into<String>, params: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            params: params.into(),
            lhs: 0.0,
            lhs_se: 0.0,
            rhs: 0.0,
            rhs_se: 0.0,
            ratio: f64::NAN,
            pass: false,
        }
    }

    pub fn lhs(mut self, value: f64, se: f64) -> Self {
        self.lhs = value;
        self.lhs_se = se;
        self
    }

    pub fn rhs(mut self, value: f64, se: f64) -> Self {
        self.rhs = value;
        self.rhs_se = se;
        self
    }

    /// Sets `ratio = lhs / rhs`.
    pub fn with_ratio(mut self) -> Self {
        self.ratio = self.lhs / self.rhs;
        self
    }

    pub fn ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

/// Builds `key=value;key=value` parameter strings.
#[derive(Clone, Default)]
pub struct Params(Vec<String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.0.push(format!("{key}={value}"));
        self
    }

    pub fn build(&self) -> String {
        self.0.join(";")
    }
}

impl std::fmt::Display for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.build())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub all_pass: bool,
}

impl Report {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        let all_pass = rows.iter().all(|r| r.pass);
        Self { rows, all_pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.params.clone(),
                num(r.lhs),
                num(r.lhs_se),
                num(r.rhs),
                num(r.rhs_se),
                num(r.ratio),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// JSON mirror of the CSV; non-finite numbers become `null`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
