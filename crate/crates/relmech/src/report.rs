//! Run reports: named values, pass/fail checks and written artifacts.

use std::fmt::Write;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    /// Measured but never emitted, so reports stay byte-stable.
    pub wall_time: Duration,
    pub values: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn new(scenario: &str) -> Self {
        RunReport { scenario: scenario.to_string(), ..Default::default() }
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.values.push((name.to_string(), v));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
}

pub const CHECK_CSV_HEADER: &str = "check,value,tolerance,pass";

pub fn emit_report(r: &RunReport, format: Format) -> String {
    match format {
        Format::Text => emit_text(r),
        Format::Csv => emit_csv(r),
    }
}

fn emit_text(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario = {}", r.scenario);
    if !r.values.is_empty() {
        let w = r.values.iter().map(|v| v.0.len()).max().unwrap_or(0);
        let _ = writeln!(s, "\n[values]");
        for (k, v) in &r.values {
            let _ = writeln!(s, "{k:<w$} = {v:?}");
        }
    }
    if !r.checks.is_empty() {
        let w = r.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let _ = writeln!(s, "\n[checks]");
        for c in &r.checks {
            let _ = writeln!(s, "{:<w$}  value={:<24} tolerance={:<10} pass={}", c.name, format!("{:?}", c.value), format!("{:?}", c.tolerance), c.pass);
        }
        let _ = writeln!(s, "\nresult = {}", if r.passed() { "pass" } else { "fail" });
    }
    if !r.artifacts.is_empty() {
        let _ = writeln!(s, "\n[artifacts]");
        for a in &r.artifacts {
            let _ = writeln!(s, "{a}");
        }
    }
    s
}

fn emit_csv(r: &RunReport) -> String {
    let mut s = String::from(CHECK_CSV_HEADER);
    s.push('\n');
    for c in &r.checks {
        let _ = writeln!(s, "{},{:?},{:?},{}", c.name, c.value, c.tolerance, c.pass);
    }
    s
}
