//! One row per inequality check, written as CSV behind a JSON header line.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::SCHEMA_VERSION;
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Relative slack of exact-mode checks.
pub const EXACT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Constant-free inequality: passes iff `lhs ≤ rhs·(1+ε)`.
    Exact,
    /// Constant-bearing inequality: the ratio is recorded and compared with
    /// a baseline.
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Warn,
}

/// Where a check's input came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaseInfo {
    pub label: String,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub test_id: String,
    pub n: usize,
    pub p: String,
    pub q: String,
    pub r: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub mode: Mode,
    pub status: Status,
    pub case: String,
    pub note: String,
    pub tool_version: String,
    pub schema_version: u32,
}

/// `1.5`, `inf`, or `1.5;1.8` for per-axis values.
pub fn format_params(v: &[f64]) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        if x.is_infinite() {
            s.push_str("inf");
        } else {
            let _ = write!(s, "{x}");
        }
    }
    s
}

impl VerificationReport {
    fn blank(test_id: &str, lhs: f64, rhs: f64, mode: Mode) -> Self {
        VerificationReport {
            test_id: test_id.to_string(),
            n: 0,
            p: String::new(),
            q: String::new(),
            r: String::new(),
            seed: 0,
            lhs,
            rhs,
            ratio: f64::NAN,
            mode,
            status: Status::Pass,
            case: String::new(),
            note: String::new(),
            tool_version: TOOL_VERSION.to_string(),
            schema_version: SCHEMA_VERSION,
        }
    }

    fn raw_ratio(lhs: f64, rhs: f64) -> f64 {
        if lhs == 0.0 && rhs == 0.0 {
            f64::NAN
        } else {
            lhs / rhs
        }
    }

    /// `lhs ≤ rhs·(1+eps)`.
    pub fn exact(test_id: &str, lhs: f64, rhs: f64, eps: f64) -> Self {
        let mut r = Self::blank(test_id, lhs, rhs, Mode::Exact);
        r.ratio = Self::raw_ratio(lhs, rhs);
        if !(lhs.is_finite() && rhs.is_finite()) {
            r.status = Status::Fail;
            r.note = "non-finite side".into();
        } else if lhs > rhs * (1.0 + eps) {
            r.status = Status::Fail;
        }
        r
    }

    /// `|lhs - rhs| ≤ eps·max(|lhs|, |rhs|)`.
    pub fn exact_eq(test_id: &str, lhs: f64, rhs: f64, eps: f64) -> Self {
        let mut r = Self::blank(test_id, lhs, rhs, Mode::Exact);
        r.ratio = Self::raw_ratio(lhs, rhs);
        if !(lhs.is_finite() && rhs.is_finite()) || (lhs - rhs).abs() > eps * lhs.abs().max(rhs.abs()) {
            r.status = Status::Fail;
        }
        r
    }

    /// Records `lhs / rhs`; `0/0` is a warning, a positive `lhs` over a zero
    /// or non-finite side is a failure.
    pub fn ratio(test_id: &str, lhs: f64, rhs: f64) -> Self {
        let mut r = Self::blank(test_id, lhs, rhs, Mode::Ratio);
        r.ratio = Self::raw_ratio(lhs, rhs);
        if lhs.is_nan() || rhs.is_nan() || lhs.is_infinite() {
            r.status = Status::Fail;
            r.note = "non-finite side".into();
        } else if lhs == 0.0 && rhs == 0.0 {
            r.status = Status::Warn;
            r.note = "0/0 skipped".into();
        } else if !r.ratio.is_finite() {
            r.status = Status::Fail;
            r.note = "unbounded ratio".into();
        }
        r
    }

    pub fn with_params(mut self, p: &[f64], q: &[f64], r: Option<f64>) -> Self {
        self.p = format_params(p);
        self.q = format_params(q);
        self.r = r.map(|x| format_params(&[x])).unwrap_or_default();
        self
    }

    pub fn with_case(mut self, case: &CaseInfo) -> Self {
        self.case = case.label.clone();
        self.n = case.n;
        self.seed = case.seed;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.add_note(note);
        self
    }

    pub fn add_note(&mut self, note: &str) {
        if note.is_empty() {
            return;
        }
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(note);
    }

    /// Downgrades a pass to a warning with a note.
    pub fn warn(&mut self, note: &str) {
        if self.status == Status::Pass {
            self.status = Status::Warn;
        }
        self.add_note(note);
    }

    pub fn fail(&mut self, note: &str) {
        self.status = Status::Fail;
        self.add_note(note);
    }

    /// Identifies the check across corpus entries: test id and parameters.
    pub fn key(&self) -> String {
        format!("{}|{}|{}|{}", self.test_id, self.p, self.q, self.r)
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Metadata written as the first line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub schema_version: u32,
    pub tool_version: String,
    pub corpus_schema_version: u32,
    #[serde(default)]
    pub suite: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ReportHeader {
    pub fn new(suite: &str, parameters: serde_json::Value) -> Self {
        ReportHeader {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            corpus_schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            parameters,
            notes: Vec::new(),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Malformed(e.to_string())
}

/// Writes the JSON header line followed by the CSV rows.
pub fn write_report<W: Write>(mut w: W, header: &ReportHeader, reports: &[VerificationReport]) -> Result<()> {
    let line = serde_json::to_string(header).map_err(io_err)?;
    writeln!(w, "{line}").map_err(io_err)?;
    let mut csv = csv::Writer::from_writer(w);
    for r in reports {
        csv.serialize(r).map_err(io_err)?;
    }
    if reports.is_empty() {
        csv.write_record([
            "test_id",
            "n",
            "p",
            "q",
            "r",
            "seed",
            "lhs",
            "rhs",
            "ratio",
            "mode",
            "status",
            "case",
            "note",
            "tool_version",
            "schema_version",
        ])
        .map_err(io_err)?;
    }
    csv.flush().map_err(io_err)
}

/// Reads a report written by [`write_report`].
pub fn read_report<R: BufRead>(mut r: R) -> Result<(ReportHeader, Vec<VerificationReport>)> {
    let mut first = String::new();
    r.read_line(&mut first).map_err(io_err)?;
    let header: ReportHeader = serde_json::from_str(first.trim()).map_err(io_err)?;
    let mut csv = csv::Reader::from_reader(r);
    let rows = csv
        .deserialize()
        .collect::<std::result::Result<Vec<VerificationReport>, _>>()
        .map_err(io_err)?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_ratio_statuses() {
        assert_eq!(VerificationReport::exact("t", 1.0, 1.0, EXACT_EPS).status, Status::Pass);
        assert_eq!(
            VerificationReport::exact("t", 1.0 + 1e-13, 1.0, EXACT_EPS).status,
            Status::Pass
        );
        assert_eq!(
            VerificationReport::exact("t", 1.0 + 1e-9, 1.0, EXACT_EPS).status,
            Status::Fail
        );
        assert_eq!(VerificationReport::exact("t", 0.0, 0.0, EXACT_EPS).status, Status::Pass);
        assert_eq!(
            VerificationReport::exact_eq("t", 1.0, 1.0 - 1e-9, EXACT_EPS).status,
            Status::Fail
        );
        assert_eq!(VerificationReport::ratio("t", 0.0, 0.0).status, Status::Warn);
        assert_eq!(VerificationReport::ratio("t", 1.0, 0.0).status, Status::Fail);
        let r = VerificationReport::ratio("t", 3.0, 2.0);
        assert_eq!((r.status, r.ratio), (Status::Pass, 1.5));
    }

    #[test]
    fn csv_round_trip() {
        let case = CaseInfo {
            label: "gauss, \"quoted\"".into(),
            n: 2,
            seed: 7,
        };
        let rows = vec![
            VerificationReport::ratio("a", 2.0, 3.0)
                .with_params(&[1.5, 1.8], &[f64::INFINITY], Some(2.0))
                .with_case(&case),
            VerificationReport::ratio("b", 0.0, 0.0),
        ];
        let header = ReportHeader::new("stein", serde_json::json!({"pad": 2}));
        let mut buf = Vec::new();
        write_report(&mut buf, &header, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("test_id,n,p,q,r,seed,lhs,rhs,ratio,mode,status"));
        let (h, back) = read_report(&buf[..]).unwrap();
        assert_eq!(h, header);
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[0].p, "1.5;1.8");
        assert_eq!(back[0].q, "inf");
        assert!(back[1].ratio.is_nan());
        assert_eq!(back[0].key(), "a|1.5;1.8|inf|2");
    }
}
