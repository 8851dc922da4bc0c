//! Named collections of checks run over a corpus.

use std::fmt;
use std::str::FromStr;

use serde_json::json;

use crate::corpus::{generate, CorpusSpec, Generator};
use crate::dyadic::exp2i;
use crate::error::{Error, Result};
use crate::gridfn::RealGrid;
use crate::par::map_slice;

use super::checks::{CheckOptions, Prepared};
use super::hardy::{check_hardy, DyadicSequence};
use super::report::{CaseInfo, ReportHeader, VerificationReport, EXACT_EPS};

pub const HARDY_SEQUENCES: u64 = 100;
pub const DILATION_RANGE: std::ops::RangeInclusive<i64> = -3..=3;
/// Allowed `max/min` spread of a ratio across the dilation family.
pub const DILATION_TOLERANCE: f64 = 1.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Exact,
    Hardy,
    Stein,
    Dilation,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Exact, Suite::Hardy, Suite::Stein, Suite::Dilation, Suite::All];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Exact => "exact",
            Suite::Hardy => "hardy",
            Suite::Stein => "stein",
            Suite::Dilation => "dilation",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?} (exact, hardy, stein, dilation, all)")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub header: ReportHeader,
    pub reports: Vec<VerificationReport>,
}

impl SuiteRun {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| r.is_failure()).count()
    }
}

fn case_of(spec: &CorpusSpec) -> CaseInfo {
    CaseInfo {
        label: spec.label(),
        n: spec.dim(),
        seed: spec.seed,
    }
}

/// Constant-free checks on one function.
pub fn exact_reports(pr: &Prepared) -> Result<Vec<VerificationReport>> {
    let mut out = vec![pr.l2_identity()];
    for p in [1.0, 2.0, 3.0] {
        out.extend(pr.lp_preservation(p)?);
    }
    for k in pr.cross_levels() {
        out.extend(pr.cross(k)?);
    }
    for p in [1.5, 3.0] {
        for (q, q1) in [(1.0, 2.0), (2.0, 4.0), (2.0, f64::INFINITY)] {
            out.push(pr.q_embedding(p, q, q1)?);
        }
    }
    Ok(out)
}

/// Ratio-mode checks on one function.
pub fn stein_reports(pr: &Prepared) -> Result<Vec<VerificationReport>> {
    let n = pr.f.dim();
    let mut out = Vec::new();
    for p in [1.2, 1.5, 1.8] {
        out.push(pr.weighted_l2(p)?);
    }
    for p in [1.5, 3.0] {
        out.push(pr.space_embedding(p, 2.0)?);
        out.push(pr.block_equivalence(p, 2.0)?);
    }
    for q in [1.5, 2.0] {
        out.extend(pr.stein_blocks(1.5, q)?);
    }
    out.push(pr.maximal_blocks(1.5, 2.0, 2.0)?);
    let p: Vec<f64> = [1.5, 1.8].into_iter().cycle().take(n).collect();
    out.extend(pr.anisotropic(&p, &vec![2.0; n])?);
    out.extend(pr.frak_fourier(1.5, 2.0)?);
    out.extend(pr.classical(1.5, 2.0)?);
    Ok(out)
}

/// Runs `stein_reports` on `f` dilated by `2^j` for every `j` in the range
/// and reports, per check, whether the ratio spread stays within
/// `DILATION_TOLERANCE`.
pub fn dilation_reports(f: &RealGrid, case: &CaseInfo, opts: &CheckOptions) -> Result<Vec<VerificationReport>> {
    let js: Vec<i64> = DILATION_RANGE.collect();
    let family = map_slice(&js, |&j| -> Result<Vec<VerificationReport>> {
        let g = f.dilated(exp2i(j))?;
        stein_reports(&Prepared::new(g, case.clone(), opts)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let base = &family[0];
    let mut out = Vec::with_capacity(base.len());
    for (i, first) in base.iter().enumerate() {
        let ratios: Vec<f64> = family.iter().map(|rows| rows[i].ratio).collect();
        let id = format!("dilation_{}", first.test_id);
        let mut rep = if ratios.iter().all(|r| r.is_nan()) {
            let mut r = VerificationReport::exact(&id, 0.0, 0.0, EXACT_EPS);
            r.warn("0/0 across family");
            r
        } else {
            let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            VerificationReport::exact(&id, max, min * DILATION_TOLERANCE, EXACT_EPS)
        };
        rep.p.clone_from(&first.p);
        rep.q.clone_from(&first.q);
        rep.r.clone_from(&first.r);
        out.push(rep.with_case(case));
    }
    Ok(out)
}

/// `check_hardy` on `HARDY_SEQUENCES` seeded sequences for every
/// `α ∈ {1/2, 1}` and `q, h ∈ {1, 2, ∞}`.
pub fn hardy_reports() -> Result<Vec<VerificationReport>> {
    let seeds: Vec<u64> = (0..HARDY_SEQUENCES).collect();
    let per_seed = map_slice(&seeds, |&seed| -> Result<Vec<VerificationReport>> {
        let b = DyadicSequence::random(seed);
        let case = CaseInfo {
            label: format!("hardy-{seed}"),
            n: 1,
            seed,
        };
        let mut out = Vec::new();
        for alpha in [0.5, 1.0] {
            for q in [1.0, 2.0, f64::INFINITY] {
                for h in [1.0, 2.0, f64::INFINITY] {
                    out.extend(check_hardy(&b, alpha, q, h)?.map(|r| r.with_case(&case)));
                }
            }
        }
        Ok(out)
    });
    Ok(per_seed.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

fn per_entry(
    corpus: &[CorpusSpec],
    opts: &CheckOptions,
    run: impl Fn(&Prepared) -> Result<Vec<VerificationReport>> + Sync + Send,
) -> Result<Vec<VerificationReport>> {
    let rows = map_slice(corpus, |spec| -> Result<Vec<VerificationReport>> {
        let f = generate(spec)?.function;
        run(&Prepared::new(f, case_of(spec), opts)?)
    });
    Ok(rows.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// Runs a suite over the corpus. Rows come out in corpus order whatever the
/// degree of parallelism.
pub fn run_suite(suite: Suite, corpus: &[CorpusSpec], opts: &CheckOptions) -> Result<SuiteRun> {
    corpus.iter().try_for_each(CorpusSpec::validate)?;
    let reports = match suite {
        Suite::Exact => per_entry(corpus, opts, exact_reports)?,
        Suite::Hardy => hardy_reports()?,
        Suite::Stein => per_entry(corpus, opts, stein_reports)?,
        Suite::Dilation => {
            let gaussians: Vec<&CorpusSpec> = corpus
                .iter()
                .filter(|s| matches!(s.generator, Generator::Gaussian { .. }))
                .collect();
            let rows = map_slice(&gaussians, |spec| -> Result<Vec<VerificationReport>> {
                dilation_reports(&generate(spec)?.function, &case_of(spec), opts)
            });
            rows.into_iter().collect::<Result<Vec<_>>>()?.concat()
        }
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Exact, Suite::Hardy, Suite::Stein, Suite::Dilation] {
                all.extend(run_suite(s, corpus, opts)?.reports);
            }
            all
        }
    };
    let mut header = ReportHeader::new(
        suite.name(),
        json!({
            "pad": opts.pad,
            "depth": opts.depth,
            "maximal_mode": opts.maximal_mode,
            "corpus_entries": corpus.len(),
            "parallel": crate::par::is_parallel(),
        }),
    );
    header
        .notes
        .push("cross_shell integrates (f*)^2 from 2^(k-1)".to_string());
    Ok(SuiteRun { header, reports })
}
