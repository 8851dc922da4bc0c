//! Recorded maximum ratios of ratio-mode checks, keyed by test id and
//! parameters.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::report::{Mode, VerificationReport, REPORT_SCHEMA_VERSION, TOOL_VERSION};

/// Relative slack allowed over a recorded maximum.
pub const BASELINE_SLACK: f64 = 1.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct BaselineHeader {
    schema_version: u32,
    tool_version: String,
    suite: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Baseline {
    pub suite: String,
    pub entries: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BaselineOutcome {
    pub breaches: usize,
    pub unknown: usize,
}

fn malformed(e: impl std::fmt::Display) -> Error {
    Error::Malformed(format!("baseline: {e}"))
}

impl Baseline {
    /// Maximum finite ratio per ratio-mode key.
    pub fn from_reports(suite: &str, reports: &[VerificationReport]) -> Self {
        let mut entries = BTreeMap::new();
        for r in reports.iter().filter(|r| r.mode == Mode::Ratio && r.ratio.is_finite()) {
            let e = entries.entry(r.key()).or_insert(r.ratio);
            if r.ratio > *e {
                *e = r.ratio;
            }
        }
        Baseline {
            suite: suite.to_string(),
            entries,
        }
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut first = String::new();
        r.read_line(&mut first).map_err(malformed)?;
        let header: BaselineHeader = serde_json::from_str(first.trim()).map_err(malformed)?;
        let mut csv = csv::Reader::from_reader(r);
        let mut entries = BTreeMap::new();
        for row in csv.deserialize::<(String, f64)>() {
            let (key, v) = row.map_err(malformed)?;
            if !v.is_finite() {
                return Err(malformed(format!("non-finite ratio for {key}")));
            }
            entries.insert(key, v);
        }
        Ok(Baseline {
            suite: header.suite,
            entries,
        })
    }

    /// `Ok(None)` if the file does not exist.
    pub fn read(path: &Path) -> Result<Option<Self>> {
        match fs::File::open(path) {
            Ok(f) => Self::read_from(BufReader::new(f)).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(malformed(e)),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = BaselineHeader {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            suite: self.suite.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&header).map_err(malformed)?).map_err(malformed)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["check_key", "max_ratio"]).map_err(malformed)?;
        for (k, v) in &self.entries {
            csv.write_record([k.as_str(), &format!("{v:e}")]).map_err(malformed)?;
        }
        csv.flush().map_err(malformed)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(malformed)?;
        }
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf).map_err(malformed)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    /// Fails ratio rows above `baseline × BASELINE_SLACK`; rows whose key has
    /// no recorded maximum are marked warn.
    pub fn apply(&self, reports: &mut [VerificationReport]) -> BaselineOutcome {
        let mut out = BaselineOutcome::default();
        for r in reports.iter_mut().filter(|r| r.mode == Mode::Ratio) {
            match self.get(&r.key()) {
                None => {
                    out.unknown += 1;
                    r.warn("no baseline");
                }
                Some(max) => {
                    if r.ratio.is_finite() && r.ratio > max * BASELINE_SLACK {
                        out.breaches += 1;
                        r.fail(&format!("exceeds baseline {max:e}"));
                    }
                }
            }
        }
        out
    }
}
