//! Seeded test-function generators and their JSON description.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::{DomainKind, GridSpec, RealGrid};

pub const SCHEMA_VERSION: u32 = 1;

/// Generator names accepted in corpus documents (aliases excluded).
pub const GENERATORS: &[&str] = &[
    "gaussian",
    "box_indicator",
    "hyperbolic_cross_indicator",
    "tensor_product",
    "random_step",
    "trig_poly",
    "zero",
];

/// Where the requested box sits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// `∏[-L_j/2, L_j/2]`
    #[default]
    Centered,
    /// `∏[0, L_j]`
    Orthant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    pub extent: Vec<f64>,
    pub count: Vec<usize>,
    #[serde(default)]
    pub placement: Placement,
}

impl GridRequest {
    pub fn centered(extent: &[f64], count: &[usize]) -> Self {
        GridRequest {
            extent: extent.to_vec(),
            count: count.to_vec(),
            placement: Placement::Centered,
        }
    }

    pub fn orthant(extent: &[f64], count: &[usize]) -> Self {
        GridRequest {
            extent: extent.to_vec(),
            count: count.to_vec(),
            placement: Placement::Orthant,
        }
    }

    pub fn dim(&self) -> usize {
        self.count.len()
    }

    pub fn spec(&self) -> Result<GridSpec> {
        if self.extent.len() != self.count.len() {
            return Err(Error::DimensionMismatch {
                expected: self.count.len(),
                found: self.extent.len(),
            });
        }
        if let Some(j) = self.extent.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "extent on axis {j} must be positive and finite"
            )));
        }
        match self.placement {
            Placement::Centered => GridSpec::centered(&self.extent, &self.count),
            Placement::Orthant => {
                let h: Vec<f64> = self
                    .extent
                    .iter()
                    .zip(&self.count)
                    .map(|(l, &c)| l / c.max(1) as f64)
                    .collect();
                GridSpec::orthant(&h, &self.count)
            }
        }
    }

    fn domain(&self) -> DomainKind {
        match self.placement {
            Placement::Centered => DomainKind::FullLine,
            Placement::Orthant => DomainKind::PositiveOrthant,
        }
    }
}

/// One-dimensional factor of a tensor product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    #[serde(alias = "gauss")]
    Gaussian { sigma: f64 },
    #[serde(alias = "box")]
    BoxIndicator { lower: f64, upper: f64 },
    /// `e^{-|x|/scale}`
    Exponential { scale: f64 },
}

impl Factor {
    fn validate(&self) -> Result<()> {
        match *self {
            Factor::Gaussian { sigma: s } | Factor::Exponential { scale: s } if !(s > 0.0 && s.is_finite()) => {
                Err(Error::InvalidParameter(format!("width {s} must be positive")))
            }
            Factor::BoxIndicator { lower, upper } if !(lower < upper) => {
                Err(Error::InvalidParameter(format!("box [{lower}, {upper}] is empty")))
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            Factor::Gaussian { sigma } => (-0.5 * (x / sigma).powi(2)).exp(),
            Factor::BoxIndicator { lower, upper } => f64::from(u8::from(x >= lower && x <= upper)),
            Factor::Exponential { scale } => (-x.abs() / scale).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// `e^{-|x|²/(2σ²)}`
    #[serde(alias = "gauss")]
    Gaussian {
        sigma: f64,
    },
    /// Indicator of `∏[lower_j, upper_j]`, decided at cell centres.
    #[serde(alias = "box")]
    BoxIndicator {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// Indicator of `G_r^* = ∪_{m ≥ 0, Σm = r} ∏[0, 2^{m_j}]`, decided at the
    /// cell corner farthest from the origin.
    #[serde(alias = "hyperbolic_cross")]
    HyperbolicCrossIndicator {
        r: u32,
    },
    TensorProduct {
        factors: Vec<Factor>,
    },
    /// Independent cells, non-zero with probability `density`, values
    /// log-uniform on `[2^{-spread}, 2^{spread}]`.
    RandomStep {
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default = "default_spread")]
        spread: f64,
    },
    /// `Σ_{|k_j| ≤ degree} (a_k cos + b_k sin)(2π (k, x) / L)` with standard
    /// normal coefficients.
    TrigPoly {
        degree: u32,
    },
    Zero {},
}

fn default_density() -> f64 {
    0.5
}

fn default_spread() -> f64 {
    10.0
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Gaussian { .. } => "gaussian",
            Generator::BoxIndicator { .. } => "box_indicator",
            Generator::HyperbolicCrossIndicator { .. } => "hyperbolic_cross_indicator",
            Generator::TensorProduct { .. } => "tensor_product",
            Generator::RandomStep { .. } => "random_step",
            Generator::TrigPoly { .. } => "trig_poly",
            Generator::Zero {} => "zero",
        }
    }
}

/// A reproducible test function: generator, parameters, seed and grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub schema_version: u32,
    #[serde(default)]
    pub id: String,
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridRequest,
}

impl CorpusSpec {
    pub fn new(id: impl Into<String>, generator: Generator, seed: u64, grid: GridRequest) -> Self {
        CorpusSpec {
            schema_version: SCHEMA_VERSION,
            id: id.into(),
            generator,
            seed,
            grid,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// The id, or `generator-seed` when none was given.
    pub fn label(&self) -> String {
        if self.id.is_empty() {
            format!("{}-{}", self.generator.name(), self.seed)
        } else {
            self.id.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let n = self.dim();
        self.grid.spec()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match &self.generator {
            Generator::Gaussian { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                bad(format!("sigma must be positive, got {sigma}"))
            }
            Generator::BoxIndicator { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: lower.len().max(upper.len()),
                    });
                }
                match lower.iter().zip(upper).position(|(a, b)| !(a < b)) {
                    Some(j) => bad(format!("box is empty on axis {j}")),
                    None => Ok(()),
                }
            }
            Generator::HyperbolicCrossIndicator { r } if *r > 60 => bad(format!("r = {r} is too large")),
            Generator::TensorProduct { factors } => {
                if factors.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: factors.len(),
                    });
                }
                factors.iter().try_for_each(Factor::validate)
            }
            Generator::RandomStep { density, spread } => {
                if !(*density > 0.0 && *density <= 1.0) {
                    bad(format!("density must lie in (0, 1], got {density}"))
                } else if !(*spread >= 0.0 && *spread <= 500.0) {
                    bad(format!("spread must lie in [0, 500], got {spread}"))
                } else {
                    Ok(())
                }
            }
            Generator::TrigPoly { degree } if *degree > 64 => bad(format!("degree {degree} is too large")),
            _ => Ok(()),
        }
    }
}

/// A generated grid function with generator-specific metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub function: RealGrid,
    /// Exact measure of the continuous support when known in closed form.
    pub support_measure: Option<f64>,
}

/// `μ(G_r^*) = Σ_{a ∈ ℕⁿ, Σa ≤ r} ∏ w(a_j)` with `w(0) = 1`,
/// `w(a) = 2^{a-1}`: the measure of the dyadic cells `∏(2^{a_j - 1}, 2^{a_j}]`
/// (with `(0, 1]` for `a_j = 0`) that make up the set.
pub fn hyperbolic_cross_measure(r: u32, n: usize) -> f64 {
    let r = r as usize;
    let w: Vec<f64> = (0..=r)
        .map(|a| {
            if a == 0 {
                1.0
            } else {
                crate::dyadic::exp2i(a as i64 - 1)
            }
        })
        .collect();
    // poly[s] = Σ over the first axes of weight products with Σa = s
    let mut poly = vec![0.0; r + 1];
    poly[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; r + 1];
        for (s, &p) in poly.iter().enumerate() {
            for a in 0..=r - s {
                next[s + a] += p * w[a];
            }
        }
        poly = next;
    }
    poly.iter().sum()
}

/// `x ∈ G_r^*` for a point with non-negative coordinates.
pub fn in_hyperbolic_cross(x: &[f64], r: u32) -> bool {
    let mut total: i64 = 0;
    for &t in x {
        if t > 1.0 {
            total += t.log2().ceil() as i64;
        }
    }
    total <= r as i64
}

pub fn generate(spec: &CorpusSpec) -> Result<Generated> {
    spec.validate()?;
    let grid = spec.grid.spec()?;
    let domain = spec.grid.domain();
    let n = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut support_measure = None;
    let function = match &spec.generator {
        Generator::Gaussian { sigma } => {
            let c = -0.5 / (sigma * sigma);
            RealGrid::from_fn(grid, domain, |x| (c * x.iter().map(|t| t * t).sum::<f64>()).exp())?
        }
        Generator::BoxIndicator { lower, upper } => {
            support_measure = Some(lower.iter().zip(upper).map(|(a, b)| b - a).product());
            RealGrid::from_fn(grid, domain, |x| {
                let inside = (0..n).all(|j| x[j] >= lower[j] && x[j] <= upper[j]);
                f64::from(u8::from(inside))
            })?
        }
        Generator::HyperbolicCrossIndicator { r } => {
            support_measure = Some(hyperbolic_cross_measure(*r, n));
            let h = grid.spacing().to_vec();
            RealGrid::from_fn(grid, domain, |x| {
                let far: Vec<f64> = (0..n).map(|j| x[j].abs() + 0.5 * h[j]).collect();
                f64::from(u8::from(in_hyperbolic_cross(&far, *r)))
            })?
        }
        Generator::TensorProduct { factors } => RealGrid::from_fn(grid, domain, |x| {
            factors.iter().zip(x).map(|(f, &t)| f.eval(t)).product()
        })?,
        Generator::RandomStep { density, spread } => {
            let values = (0..grid.len())
                .map(|_| {
                    let keep = rng.gen_bool(*density);
                    let e: f64 = rng.gen_range(-1.0..=1.0);
                    if keep {
                        (e * spread).exp2()
                    } else {
                        0.0
                    }
                })
                .collect();
            RealGrid::new(grid, values, domain)?
        }
        Generator::TrigPoly { degree } => {
            let d = *degree as i64;
            let side = (2 * d + 1) as usize;
            let terms = side.pow(n as u32);
            let coeffs: Vec<(f64, f64)> = (0..terms)
                .map(|_| (standard_normal(&mut rng), standard_normal(&mut rng)))
                .collect();
            let scale: Vec<f64> = (0..n).map(|j| 2.0 * std::f64::consts::PI / grid.extent(j)).collect();
            RealGrid::from_fn(grid, domain, |x| {
                let mut acc = 0.0;
                for (t, &(a, b)) in coeffs.iter().enumerate() {
                    let mut rest = t;
                    let mut phase = 0.0;
                    for j in 0..n {
                        let k = (rest % side) as i64 - d;
                        rest /= side;
                        phase += k as f64 * scale[j] * x[j];
                    }
                    acc += a * phase.cos() + b * phase.sin();
                }
                acc
            })?
        }
        Generator::Zero {} => RealGrid::zeros(grid, domain),
    };
    Ok(Generated {
        function,
        support_measure,
    })
}

/// Box–Muller draw from `N(0, 1)`.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Parses a corpus document: a JSON array of [`CorpusSpec`] objects.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusSpec>> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let items = raw
        .as_array()
        .ok_or_else(|| Error::Malformed("corpus must be a JSON array".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let name = item
                .get("generator")
                .and_then(|g| g.as_str())
                .ok_or_else(|| Error::Malformed(format!("entry {i}: missing generator")))?;
            let known = GENERATORS.contains(&name) || matches!(name, "gauss" | "box" | "hyperbolic_cross");
            if !known {
                return Err(Error::UnknownGenerator(name.to_string()));
            }
            let spec: CorpusSpec =
                serde_json::from_value(item.clone()).map_err(|e| Error::Malformed(format!("entry {i}: {e}")))?;
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}

pub fn corpus_to_json(specs: &[CorpusSpec]) -> String {
    serde_json::to_string_pretty(specs).expect("corpus specs serialise")
}

/// The corpus used by the verification suites when no file is given.
pub fn default_corpus() -> Vec<CorpusSpec> {
    use Generator::*;
    let mut v = vec![
        CorpusSpec::new(
            "gauss-1d",
            Gaussian { sigma: 1.0 },
            0,
            GridRequest::centered(&[32.0], &[256]),
        ),
        CorpusSpec::new(
            "gauss-2d",
            Gaussian { sigma: 1.0 },
            0,
            GridRequest::centered(&[16.0, 16.0], &[32, 32]),
        ),
        CorpusSpec::new(
            "box-1d",
            BoxIndicator {
                lower: vec![-1.0],
                upper: vec![1.0],
            },
            0,
            GridRequest::centered(&[16.0], &[128]),
        ),
        CorpusSpec::new(
            "box-2d",
            BoxIndicator {
                lower: vec![-1.0, -0.5],
                upper: vec![1.0, 0.5],
            },
            0,
            GridRequest::centered(&[8.0, 8.0], &[32, 32]),
        ),
        CorpusSpec::new(
            "tensor-2d",
            TensorProduct {
                factors: vec![Factor::Gaussian { sigma: 0.75 }, Factor::Exponential { scale: 0.5 }],
            },
            0,
            GridRequest::centered(&[16.0, 16.0], &[32, 32]),
        ),
        CorpusSpec::new(
            "cross-2d",
            HyperbolicCrossIndicator { r: 3 },
            0,
            GridRequest::orthant(&[16.0, 16.0], &[32, 32]),
        ),
        CorpusSpec::new(
            "trig-1d",
            TrigPoly { degree: 3 },
            5,
            GridRequest::centered(&[8.0], &[64]),
        ),
        CorpusSpec::new(
            "trig-2d",
            TrigPoly { degree: 2 },
            6,
            GridRequest::centered(&[8.0, 8.0], &[16, 16]),
        ),
        CorpusSpec::new("zero-1d", Zero {}, 0, GridRequest::centered(&[4.0], &[16])),
    ];
    for seed in 1..=4 {
        v.push(CorpusSpec::new(
            format!("step-1d-{seed}"),
            RandomStep {
                density: 0.5,
                spread: 10.0,
            },
            seed,
            GridRequest::centered(&[8.0], &[32]),
        ));
        v.push(CorpusSpec::new(
            format!("step-2d-{seed}"),
            RandomStep {
                density: 0.5,
                spread: 10.0,
            },
            100 + seed,
            GridRequest::centered(&[4.0, 4.0], &[16, 16]),
        ));
    }
    v
}
