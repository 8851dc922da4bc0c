//! Inequality checks, the Hardy and sharpness experiments, reports and
//! regression baselines.

pub mod baseline;
pub mod checks;
pub mod hardy;
pub mod report;
pub mod sharpness;
pub mod suite;

pub use baseline::{Baseline, BaselineOutcome, BASELINE_SLACK};
pub use checks::*;
pub use hardy::{check_hardy, DyadicSequence};
pub use report::{CaseInfo, Mode, ReportHeader, Status, VerificationReport};
pub use sharpness::{sharpness_experiment, SharpnessReport};
pub use suite::{run_suite, Suite, SuiteRun};
