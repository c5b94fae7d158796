//! Suite reports: one PASS/FAIL line per check, raw tables, and a
//! plot-ready extract.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub id: String,
    pub description: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl CheckLine {
    pub fn new(id: &str, description: &str, value: f64, threshold: String, pass: bool) -> Self {
        CheckLine { id: id.into(), description: description.into(), value, threshold, pass }
    }

    pub fn band(id: &str, description: &str, value: f64, lo: f64, hi: f64) -> Self {
        CheckLine::new(id, description, value, format!("[{lo}, {hi}]"), value >= lo && value <= hi)
    }

    pub fn at_most(id: &str, description: &str, value: f64, limit: f64) -> Self {
        CheckLine::new(id, description, value, format!("<= {limit}"), value <= limit)
    }

    pub fn render(&self) -> String {
        format!(
            "{}: {} | value {:.6e} threshold {} | {}",
            self.id,
            self.description,
            self.value,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Plot-ready columns: `x`, `y`, then one column per fitted model curve.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct PlotTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub models: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckLine>,
    pub pass: bool,
    /// `(file stem, CSV body)` raw measurement tables.
    pub tables: Vec<(String, String)>,
    pub plot: PlotTable,
    /// Seeds consumed by the suite, for the manifest.
    pub seeds: Vec<u64>,
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            checks: Vec::new(),
            pass: true,
            tables: Vec::new(),
            plot: PlotTable::default(),
            seeds: Vec::new(),
        }
    }

    pub fn push(&mut self, line: CheckLine) {
        self.pass &= line.pass;
        self.checks.push(line);
    }

    pub fn render_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.render());
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {}\n",
            self.suite,
            if self.pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}
