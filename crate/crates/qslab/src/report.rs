//! Deterministic experiment reports.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

/// Where a threshold comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Theorem,
    DerivedTolerance,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub source: Source,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub precision_bits: u32,
    pub records: Vec<Value>,
    pub summary: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    /// Set when a search ran out of budget without contradicting anything.
    pub inconclusive: bool,
    pub passed: bool,
    #[serde(skip)]
    pub csv: String,
}

impl Report {
    pub fn new(experiment: &str, cfg: &ExperimentConfig) -> Report {
        Report {
            experiment: experiment.to_string(),
            config: cfg.clone(),
            seed: cfg.seed(),
            precision_bits: cfg.precision(),
            records: Vec::new(),
            summary: BTreeMap::new(),
            assertions: Vec::new(),
            inconclusive: false,
            passed: true,
            csv: String::new(),
        }
    }

    pub fn record(&mut self, v: impl Serialize) {
        self.records.push(serde_json::to_value(v).expect("serializable record"));
    }

    pub fn summarize(&mut self, key: &str, v: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(v).expect("serializable summary"));
    }

    pub fn check(&mut self, name: &str, passed: bool, source: Source, detail: impl Into<String>) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            source,
            detail: detail.into(),
        });
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    /// Writes `report.json` and `series.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json() + "\n")?;
        std::fs::write(dir.join("series.csv"), &self.csv)?;
        Ok(())
    }
}

/// Serializes rows of records into CSV with a header taken from the first row.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        k: u32,
        value: f64,
    }

    #[test]
    fn csv_rows() {
        let s = rows_to_csv(&[Row { k: 1, value: 0.5 }, Row { k: 2, value: 0.25 }]).unwrap();
        assert_eq!(s, "k,value\n1,0.5\n2,0.25\n");
    }

    #[test]
    fn failing_check_fails_report() {
        let mut r = Report::new("x", &ExperimentConfig::default());
        r.check("a", true, Source::Exact, "");
        assert!(r.passed);
        r.check("b", false, Source::Theorem, "too big");
        assert!(!r.passed);
        assert_eq!(r.failures().len(), 1);
    }
}
