//! Building a corpus entry from command-line flags or a corpus file.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::{json, Value};
use steinlab::corpus::{parse_corpus, CorpusSpec, SCHEMA_VERSION};

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Generator name (gaussian, box_indicator, hyperbolic_cross_indicator,
    /// tensor_product, random_step, trig_poly, zero, or an alias).
    #[arg(long = "gen", conflicts_with = "corpus")]
    pub generator: Option<String>,
    /// Corpus file to take the function from.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Entry id within the corpus file (default: first entry).
    #[arg(long, requires = "corpus")]
    pub id: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Side length of the grid on every axis.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Cells per axis.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Level of the hyperbolic cross.
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub degree: Option<u32>,
    /// Place the grid on the positive orthant instead of centring it.
    #[arg(long)]
    pub orthant: bool,
}

fn canonical(name: &str) -> &str {
    match name {
        "gauss" => "gaussian",
        "box" => "box_indicator",
        "hyperbolic_cross" | "cross" => "hyperbolic_cross_indicator",
        "trig" => "trig_poly",
        "step" => "random_step",
        "tensor" => "tensor_product",
        other => other,
    }
}

impl SourceArgs {
    pub fn resolve(&self) -> Result<CorpusSpec> {
        if let Some(path) = &self.corpus {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let entries = parse_corpus(&text)?;
            let found = match &self.id {
                Some(id) => entries.into_iter().find(|e| &e.label() == id),
                None => entries.into_iter().next(),
            };
            return found.ok_or_else(|| {
                steinlab::Error::InvalidParameter(format!("no corpus entry {:?}", self.id.as_deref().unwrap_or("")))
                    .into()
            });
        }
        let name = self.generator.as_deref().unwrap_or("gaussian");
        let name = canonical(name);
        let n = self.dim;
        let placement = if self.orthant || name == "hyperbolic_cross_indicator" {
            "orthant"
        } else {
            "centered"
        };
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "generator": name,
            "seed": self.seed,
            "grid": {
                "extent": vec![self.extent.unwrap_or(32.0); n],
                "count": vec![self.count.unwrap_or(256); n],
                "placement": placement,
            },
        });
        let obj = v.as_object_mut().expect("object literal");
        let mut set = |k: &str, x: Value| {
            obj.insert(k.to_string(), x);
        };
        match name {
            "gaussian" => set("sigma", json!(self.sigma.unwrap_or(1.0))),
            "box_indicator" => {
                set("lower", json!(vec![-1.0; n]));
                set("upper", json!(vec![1.0; n]));
            }
            "hyperbolic_cross_indicator" => set("r", json!(self.level.unwrap_or(3))),
            "trig_poly" => set("degree", json!(self.degree.unwrap_or(3))),
            "tensor_product" => set(
                "factors",
                json!(vec![json!({"kind": "gaussian", "sigma": self.sigma.unwrap_or(1.0)}); n]),
            ),
            _ => {}
        }
        let text = serde_json::to_string(&Value::Array(vec![v]))?;
        Ok(parse_corpus(&text)?.remove(0))
    }
}
