mod source;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use steinlab::corpus::{default_corpus, generate, parse_corpus, SCHEMA_VERSION};
use steinlab::fourier::{fourier_transform, plancherel_defect, tail_warning};
use steinlab::gridfn::LorentzParams;
use steinlab::maximal::{box_maximal_average_with, maximal_function_grid, MaximalMode};
use steinlab::norms::{anisotropic_lorentz_norm, frak_norm, lorentz_norm, mixed_lorentz_norm};
use steinlab::rearrange::{decreasing_rearrangement, repeated_rearrangement};
use steinlab::verify::report::{write_report, TOOL_VERSION};
use steinlab::verify::{run_suite, sharpness_experiment, Baseline, CheckOptions, Suite};
use steinlab::{Error, GridFunction, RealGrid};

use source::SourceArgs;

#[derive(Parser, Debug)]
#[command(
    name = "steinlab",
    version,
    about = "Rearrangement norms, Fourier transforms and inequality checks on grids"
)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one norm of a generated function.
    Norm {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = NormKind::Lorentz)]
        norm: NormKind,
        /// Exponent p, or one per axis separated by commas.
        #[arg(long, value_delimiter = ',', value_parser = parse_exponent, default_value = "2")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_exponent, default_value = "2")]
        q: Vec<f64>,
    },
    /// Print the decreasing or repeated rearrangement as CSV.
    Rearrange {
        #[command(flatten)]
        source: SourceArgs,
        /// Repeated rearrangement on the grid instead of f*.
        #[arg(long)]
        repeated: bool,
    },
    /// Print the Fourier transform on the frequency grid as CSV.
    Fourier {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 2)]
        pad: usize,
    },
    /// Box maximal averages of a generated function.
    Maximal {
        #[command(flatten)]
        source: SourceArgs,
        /// Minimum side lengths; prints the full maximal grid when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_exponent)]
        t: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run a verification suite and write the CSV report.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Corpus file (default: built-in corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Baseline of ratio-mode maxima; written if missing.
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Overwrite the baseline with this run's maxima.
        #[arg(long, requires = "baseline")]
        update_baseline: bool,
        /// Report file (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        pad: usize,
        #[arg(long, default_value_t = 32)]
        depth: u32,
        #[arg(long, value_enum)]
        maximal_mode: Option<ModeArg>,
    },
    /// Block sums of hyperbolic-cross indicators and their growth in r.
    Sharpness {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        r_min: u32,
        #[arg(long, default_value_t = 24)]
        r_max: u32,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormKind {
    /// ‖f‖_{L_{p,q}}
    Lorentz,
    /// ‖f‖_{𝔏_{p,q}} of the repeated rearrangement
    Frak,
    /// ‖f‖_p
    Lp,
    /// Φ_{p,q} of the repeated rearrangement
    Anisotropic,
    /// iterated one-dimensional Lorentz norms
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exhaustive,
    Dyadic,
}

impl From<ModeArg> for MaximalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exhaustive => MaximalMode::Exhaustive,
            ModeArg::Dyadic => MaximalMode::Dyadic,
        }
    }
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")),
    }
}

/// A value that came out non-finite is a numeric failure.
fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergent(format!("{what} is {v}")).into())
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Divergent(_)) => 3,
        _ => 2,
    }
}

fn broadcast(v: &[f64], n: usize) -> Vec<f64> {
    if v.len() == 1 {
        vec![v[0]; n]
    } else {
        v.to_vec()
    }
}

fn out() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn grid_json(f: &RealGrid) -> serde_json::Value {
    json!({
        "origin": f.spec().origin(),
        "spacing": f.spec().spacing(),
        "count": f.spec().count(),
    })
}

fn cmd_norm(source: &SourceArgs, norm: NormKind, p: &[f64], q: &[f64]) -> Result<()> {
    let spec = source.resolve()?;
    let f = generate(&spec)?.function;
    let n = f.dim();
    let scalar = || -> Result<(f64, f64)> {
        match (p, q) {
            ([p], [q]) => Ok((*p, *q)),
            _ => Err(Error::InvalidParameter("this norm takes scalar p and q".into()).into()),
        }
    };
    let vector = || LorentzParams::vector(broadcast(p, n), broadcast(q, n));
    let value = match norm {
        NormKind::Lorentz => {
            let (p, q) = scalar()?;
            lorentz_norm(&decreasing_rearrangement(&f), p, q)?
        }
        NormKind::Frak => {
            let (p, q) = scalar()?;
            frak_norm(&repeated_rearrangement(&f), p, q)?
        }
        NormKind::Lp => {
            let (p, _) = scalar().or_else(|_| match p {
                [p] => Ok((*p, 0.0)),
                _ => Err(Error::InvalidParameter("lp takes a scalar p".into())),
            })?;
            if p.is_nan() || p <= 0.0 {
                return Err(Error::InvalidParameter(format!("p must be positive, got {p}")).into());
            }
            f.lp_norm(p)
        }
        NormKind::Anisotropic => anisotropic_lorentz_norm(&f, &vector()?)?,
        NormKind::Mixed => mixed_lorentz_norm(&f, &vector()?)?,
    };
    let value = finite(value, "norm")?;
    let row = json!({
        "id": spec.label(),
        "generator": spec.generator,
        "seed": spec.seed,
        "grid": grid_json(&f),
        "norm": format!("{norm:?}").to_lowercase(),
        "p": p,
        "q": q.iter().map(|x| if x.is_infinite() { json!("inf") } else { json!(x) }).collect::<Vec<_>>(),
        "value": value,
        "tool_version": TOOL_VERSION,
        "schema_version": SCHEMA_VERSION,
    });
    let mut w = out();
    writeln!(w, "{row}")?;
    Ok(w.flush()?)
}

fn write_grid_csv<W: Write>(w: &mut W, f: &GridFunction<impl steinlab::gridfn::Scalar>, cols: &[&str]) -> Result<()> {
    let spec = f.spec();
    let n = spec.dim();
    let names: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    writeln!(w, "{},{}", names.join(","), cols.join(","))?;
    let mut idx = vec![0usize; n];
    for (flat, v) in f.values().iter().enumerate() {
        spec.unravel(flat, &mut idx);
        for (j, &i) in idx.iter().enumerate() {
            write!(w, "{},", spec.center(j, i))?;
        }
        let c = v.to_complex();
        if cols.len() == 2 {
            writeln!(w, "{},{}", c.re, c.im)?;
        } else {
            writeln!(w, "{}", c.re)?;
        }
    }
    Ok(())
}

fn cmd_rearrange(source: &SourceArgs, repeated: bool) -> Result<()> {
    let f = generate(&source.resolve()?)?.function;
    let mut w = out();
    if repeated {
        write_grid_csv(&mut w, &repeated_rearrangement(&f), &["value"])?;
    } else {
        writeln!(w, "t_lo,t_hi,value")?;
        let mut lo = 0.0;
        for piece in decreasing_rearrangement(&f).pieces() {
            writeln!(w, "{},{},{}", lo, lo + piece.width, piece.value)?;
            lo += piece.width;
        }
    }
    Ok(w.flush()?)
}

fn cmd_fourier(source: &SourceArgs, pad: usize) -> Result<()> {
    let f = generate(&source.resolve()?)?.function;
    let g = fourier_transform(&f, pad)?;
    let defect = if f.values().iter().all(|v| *v == 0.0) {
        0.0
    } else {
        plancherel_defect(&f, pad)?
    };
    let header = json!({
        "tool_version": TOOL_VERSION,
        "pad": pad,
        "plancherel_defect": defect,
        "tail_warning": tail_warning(&f),
        "grid": {
            "origin": g.spec().origin(),
            "spacing": g.spec().spacing(),
            "count": g.spec().count(),
        },
    });
    let mut w = out();
    writeln!(w, "{header}")?;
    write_grid_csv(&mut w, &g, &["re", "im"])?;
    Ok(w.flush()?)
}

fn cmd_maximal(source: &SourceArgs, t: Option<&[f64]>, mode: Option<ModeArg>) -> Result<()> {
    let f = generate(&source.resolve()?)?.function;
    let mode = mode
        .map(MaximalMode::from)
        .unwrap_or_else(|| MaximalMode::auto(f.spec()));
    let mut w = out();
    match t {
        Some(t) => {
            let t = broadcast(t, f.dim());
            let v = finite(box_maximal_average_with(&f, &t, mode)?, "maximal average")?;
            writeln!(w, "{}", json!({ "t": t, "mode": mode, "value": v }))?;
        }
        None => {
            let m = maximal_function_grid(&f, mode)?;
            writeln!(w, "{}", json!({ "mode": m.mode, "tool_version": TOOL_VERSION }))?;
            write_grid_csv(&mut w, &m.grid, &["value"])?;
        }
    }
    Ok(w.flush()?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: Suite,
    corpus: Option<&PathBuf>,
    baseline: Option<&PathBuf>,
    update: bool,
    output: Option<&PathBuf>,
    opts: CheckOptions,
) -> Result<u8> {
    let corpus = match corpus {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_corpus(&text).with_context(|| format!("corpus {}", path.display()))?
        }
        None => default_corpus(),
    };
    let mut run = run_suite(suite, &corpus, &opts)?;
    let mut code = 0;
    if let Some(path) = baseline {
        let existing = Baseline::read(path)?;
        match existing {
            Some(b) if !update => {
                let outcome = b.apply(&mut run.reports);
                run.header.notes.push(format!(
                    "baseline {}: {} breaches, {} unrecorded checks",
                    path.display(),
                    outcome.breaches,
                    outcome.unknown
                ));
            }
            _ => {
                Baseline::from_reports(suite.name(), &run.reports).write(path)?;
                eprintln!("wrote baseline {}", path.display());
                run.header.notes.push(format!("baseline {} written", path.display()));
            }
        }
    }
    let failures = run.failures();
    if failures > 0 {
        eprintln!("{failures} failing checks");
        code = 1;
    }
    match output {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_report(BufWriter::new(f), &run.header, &run.reports)?;
        }
        None => write_report(out(), &run.header, &run.reports)?,
    }
    Ok(code)
}

fn cmd_sharpness(n: usize, p: f64, r_min: u32, r_max: u32) -> Result<()> {
    let rep = sharpness_experiment(n, p, r_min, r_max)?;
    let header = json!({
        "tool_version": TOOL_VERSION,
        "n": rep.n,
        "p": rep.p,
        "slope": rep.slope,
        "lp_slope": rep.lp_slope,
        "lp_conj_slope": rep.lp_conj_slope,
    });
    let mut w = out();
    writeln!(w, "{header}")?;
    write!(w, "{}", rep.to_csv())?;
    w.flush()?;
    eprintln!("slope {:.6}", rep.slope);
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;
    match &cli.command {
        Command::Norm { source, norm, p, q } => cmd_norm(source, *norm, p, q)?,
        Command::Rearrange { source, repeated } => cmd_rearrange(source, *repeated)?,
        Command::Fourier { source, pad } => cmd_fourier(source, *pad)?,
        Command::Maximal { source, t, mode } => cmd_maximal(source, t.as_deref(), *mode)?,
        Command::Verify {
            suite,
            corpus,
            baseline,
            update_baseline,
            output,
            pad,
            depth,
            maximal_mode,
        } => {
            let opts = CheckOptions {
                pad: *pad,
                depth: *depth,
                maximal_mode: maximal_mode.map(MaximalMode::from),
            };
            return cmd_verify(
                *suite,
                corpus.as_ref(),
                baseline.as_ref(),
                *update_baseline,
                output.as_ref(),
                opts,
            );
        }
        Command::Sharpness { n, p, r_min, r_max } => cmd_sharpness(*n, *p, *r_min, *r_max)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
