//! Sampled functions on uniform grids and exact non-increasing step functions.
//!
//! A [`GridFunction`] is piecewise constant: cell `i` on axis `j` is the
//! interval `[origin_j + i h_j, origin_j + (i+1) h_j]` and carries one value.
//! Values are stored flat with axis 0 varying fastest, so a 2-D function
//! written as nested rows `[[a, b], [c, d]]` (outer index = axis 1) is stored
//! as `[a, b, c, d]`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element type of a grid function.
pub trait Scalar:
    Copy + Default + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Whether a function lives in physical space or is a rearrangement on
/// `(0, ∞)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    FullLine,
    PositiveOrthant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawGridSpec {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    count: Vec<usize>,
}

/// Geometry of a uniform grid: per-axis origin (left edge of the first
/// cell), spacing and number of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec", into = "RawGridSpec")]
pub struct GridSpec {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    count: Vec<usize>,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGridSpec) -> Result<Self> {
        GridSpec::new(raw.origin, raw.spacing, raw.count)
    }
}

impl From<GridSpec> for RawGridSpec {
    fn from(g: GridSpec) -> Self {
        RawGridSpec {
            origin: g.origin,
            spacing: g.spacing,
            count: g.count,
        }
    }
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, count: Vec<usize>) -> Result<Self> {
        let dim = count.len();
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if origin.len() != dim || spacing.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin/spacing/count lengths differ ({}, {}, {})",
                origin.len(),
                spacing.len(),
                dim
            )));
        }
        for j in 0..dim {
            if !(spacing[j] > 0.0 && spacing[j].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "spacing on axis {j} must be positive and finite, got {}",
                    spacing[j]
                )));
            }
            if !origin[j].is_finite() {
                return Err(Error::InvalidGrid(format!("origin on axis {j} is not finite")));
            }
            if count[j] == 0 {
                return Err(Error::InvalidGrid(format!("count on axis {j} is zero")));
            }
        }
        count
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::InvalidGrid("too many cells".into()))?;
        let vol: f64 = spacing.iter().product();
        if !(vol > 0.0 && vol.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell volume {vol} is not a positive finite number"
            )));
        }
        Ok(GridSpec { origin, spacing, count })
    }

    /// Grid on the symmetric box `∏[-L_j/2, L_j/2]`.
    pub fn centered(extent: &[f64], count: &[usize]) -> Result<Self> {
        if extent.len() != count.len() {
            return Err(Error::DimensionMismatch {
                expected: count.len(),
                found: extent.len(),
            });
        }
        let spacing: Vec<f64> = extent.iter().zip(count).map(|(&l, &c)| l / c.max(1) as f64).collect();
        let origin = extent.iter().map(|&l| -0.5 * l).collect();
        GridSpec::new(origin, spacing, count.to_vec())
    }

    /// Grid anchored at the origin, covering `∏[0, count_j h_j]`.
    pub fn orthant(spacing: &[f64], count: &[usize]) -> Result<Self> {
        GridSpec::new(vec![0.0; count.len()], spacing.to_vec(), count.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.count.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn count(&self) -> &[usize] {
        &self.count
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.count.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Length of the grid along `axis`.
    pub fn extent(&self, axis: usize) -> f64 {
        self.spacing[axis] * self.count[axis] as f64
    }

    /// Distance between consecutive cells of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.count[..axis].iter().product()
    }

    /// Centre of cell `i` along `axis`.
    #[inline]
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.spacing[axis]
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for j in (0..self.dim()).rev() {
            flat = flat * self.count[j] + idx[j];
        }
        flat
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = flat % self.count[j];
            flat /= self.count[j];
        }
    }

    /// Geometry of `x ↦ f(λx)`: every length divided by `lambda`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        GridSpec::new(
            self.origin.iter().map(|o| o / lambda).collect(),
            self.spacing.iter().map(|h| h / lambda).collect(),
            self.count.clone(),
        )
    }

    /// Same counts and spacings, origin moved to 0.
    pub fn to_orthant(&self) -> GridSpec {
        GridSpec {
            origin: vec![0.0; self.dim()],
            spacing: self.spacing.clone(),
            count: self.count.clone(),
        }
    }
}

/// Product of the spacings.
pub fn cell_volume(spec: &GridSpec) -> f64 {
    spec.cell_volume()
}

/// Piecewise-constant function sampled on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar = f64> {
    spec: GridSpec,
    values: Vec<T>,
    domain: DomainKind,
}

pub type RealGrid = GridFunction<f64>;
pub type ComplexGrid = GridFunction<Complex64>;

impl<T: Scalar> GridFunction<T> {
    pub fn new(spec: GridSpec, values: Vec<T>, domain: DomainKind) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, found {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction { spec, values, domain })
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn<F>(spec: GridSpec, domain: DomainKind, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        let dim = spec.dim();
        let values = crate::par::map_range(spec.len(), |flat| {
            let mut idx = vec![0usize; dim];
            spec.unravel(flat, &mut idx);
            let x: Vec<f64> = (0..dim).map(|j| spec.center(j, idx[j])).collect();
            f(&x)
        });
        GridFunction::new(spec, values, domain)
    }

    pub fn zeros(spec: GridSpec, domain: DomainKind) -> Self {
        let values = vec![T::default(); spec.len()];
        GridFunction { spec, values, domain }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: &[usize]) -> T {
        self.values[self.spec.flat_index(idx)]
    }

    pub fn require_domain(&self, expected: DomainKind) -> Result<()> {
        if self.domain != expected {
            return Err(Error::DomainMismatch {
                expected,
                found: self.domain,
            });
        }
        Ok(())
    }

    /// `|f|` on the same grid.
    pub fn modulus(&self) -> RealGrid {
        GridFunction {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| v.modulus()).collect(),
            domain: self.domain,
        }
    }

    pub fn to_complex(&self) -> ComplexGrid {
        GridFunction {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| v.to_complex()).collect(),
            domain: self.domain,
        }
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        GridFunction {
            spec: self.spec.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
            domain: self.domain,
        }
    }

    /// `x ↦ f(λx)`: the same samples on a grid shrunk by `lambda`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        Ok(GridFunction {
            spec: self.spec.dilated(lambda)?,
            values: self.values.clone(),
            domain: self.domain,
        })
    }

    /// `(Σ |v|^p · cellvol)^{1/p}`; `p = ∞` gives the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| v.modulus().powf(p)).sum();
        (s * self.spec.cell_volume()).powf(1.0 / p)
    }

    /// Largest modulus over cells touching the boundary of the grid box.
    pub fn boundary_max(&self) -> f64 {
        let dim = self.dim();
        let mut idx = vec![0usize; dim];
        let mut m = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            self.spec.unravel(flat, &mut idx);
            if (0..dim).any(|j| idx[j] == 0 || idx[j] + 1 == self.spec.count[j]) {
                m = m.max(v.modulus());
            }
        }
        m
    }
}

/// One piece of a [`StepFunction`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub width: f64,
    pub value: f64,
}

/// Non-increasing, non-negative step function on `(0, ∞)`, stored as
/// consecutive `(width, value)` pieces and 0 after the last piece.
///
/// The canonical form has strictly decreasing positive values and positive
/// widths. On `[T_{i-1}, T_i)` the function equals the `i`-th value, where
/// `T_i` is the cumulative width.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pieces: Vec<Piece>,
}

impl StepFunction {
    /// Builds the canonical step function from arbitrary `(width, value)`
    /// pairs; negative values are replaced by their modulus.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut pieces = Vec::new();
        for (i, (width, value)) in pairs.into_iter().enumerate() {
            if !width.is_finite() || width < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "piece {i}: width {width} must be finite and non-negative"
                )));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            pieces.push(Piece {
                width,
                value: value.abs(),
            });
        }
        Ok(StepFunction { pieces }.canonicalize())
    }

    /// Sorts by decreasing value (stable), merges equal values and drops
    /// empty or zero-valued pieces.
    pub fn canonicalize(mut self) -> Self {
        self.pieces.retain(|p| p.width > 0.0 && p.value > 0.0);
        self.pieces.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces {
            match out.last_mut() {
                Some(last) if last.value == p.value => last.width += p.width,
                _ => out.push(p),
            }
        }
        StepFunction { pieces: out }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.pieces.iter().map(|p| p.width).sum()
    }

    /// Right endpoints `T_i` of the pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.pieces
            .iter()
            .map(|p| {
                t += p.width;
                t
            })
            .collect()
    }

    /// `f*(t)`, right-continuous.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut end = 0.0;
        for p in &self.pieces {
            end += p.width;
            if t < end {
                return p.value;
            }
        }
        0.0
    }

    pub fn max_value(&self) -> f64 {
        self.pieces.first().map_or(0.0, |p| p.value)
    }

    /// `c · f` for `c ≥ 0` (sign ignored).
    pub fn scaled(&self, c: f64) -> StepFunction {
        StepFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    width: p.width,
                    value: p.value * c.abs(),
                })
                .collect(),
        }
        .canonicalize()
    }

    /// `∫_lower^upper f(t)^exponent dt` in closed form.
    pub fn integral(&self, exponent: f64, lower: f64, upper: f64) -> Result<f64> {
        step_integral(self, exponent, lower, upper)
    }
}

/// `∫_lower^upper s(t)^exponent dt`, summed exactly over the pieces meeting
/// `[lower, upper]`. `upper` may be `f64::INFINITY`.
pub fn step_integral(s: &StepFunction, exponent: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponent {exponent} must be finite and ≥ 0"
        )));
    }
    if !(lower >= 0.0) || !lower.is_finite() || upper.is_nan() {
        return Err(Error::InvalidParameter(format!("invalid bounds [{lower}, {upper}]")));
    }
    if lower > upper {
        return Err(Error::InvalidParameter(format!(
            "lower bound {lower} exceeds upper bound {upper}"
        )));
    }
    if exponent == 0.0 {
        let total = s.total_measure();
        return Ok((upper.min(total) - lower).max(0.0));
    }
    let mut acc = 0.0;
    let mut start = 0.0;
    for p in &s.pieces {
        let end = start + p.width;
        if start >= upper {
            break;
        }
        let overlap = end.min(upper) - start.max(lower);
        if overlap > 0.0 {
            acc += p.value.powf(exponent) * overlap;
        }
        start = end;
    }
    Ok(acc)
}

/// Exponent pair `(p, q)`, scalar or one entry per axis; `f64::INFINITY`
/// encodes `∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl LorentzParams {
    pub fn scalar(p: f64, q: f64) -> Result<Self> {
        Self::vector(vec![p], vec![q])
    }

    pub fn vector(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::InvalidParameter(format!(
                "p and q must be non-empty and of equal length ({} vs {})",
                p.len(),
                q.len()
            )));
        }
        for (j, (&pj, &qj)) in p.iter().zip(&q).enumerate() {
            validate_pair(pj, qj).map_err(|e| match e {
                Error::InvalidParameter(m) => Error::InvalidParameter(format!("axis {j}: {m}")),
                other => other,
            })?;
        }
        Ok(LorentzParams { p, q })
    }

    /// Number of stored entries (1 for scalar parameters).
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.p.len() == 1
    }

    /// `p_j`; scalar parameters broadcast to every axis.
    pub fn p(&self, axis: usize) -> f64 {
        self.p[if self.is_scalar() { 0 } else { axis }]
    }

    pub fn q(&self, axis: usize) -> f64 {
        self.q[if self.is_scalar() { 0 } else { axis }]
    }

    /// Checks that these parameters can be applied to an `n`-dimensional
    /// function.
    pub fn require_dim(&self, n: usize) -> Result<()> {
        if self.is_scalar() || self.p.len() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                found: self.p.len(),
            })
        }
    }

    /// `p′_j` with `1/p + 1/p′ = 1`, defined for `1 < p_j < ∞`.
    pub fn p_conjugate(&self, axis: usize) -> Option<f64> {
        conjugate_exponent(self.p(axis)).ok()
    }

    /// Parameters `(p′, q)` with the same `q`.
    pub fn conjugated(&self) -> Result<Self> {
        let p = self
            .p
            .iter()
            .map(|&p| conjugate_exponent(p))
            .collect::<Result<Vec<_>>>()?;
        LorentzParams::vector(p, self.q.clone())
    }
}

fn validate_pair(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0, ∞]")));
    }
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must lie in (0, ∞]")));
    }
    if q.is_finite() && p.is_infinite() {
        return Err(Error::InvalidParameter("p = ∞ requires q = ∞".into()));
    }
    Ok(())
}

/// `p / (p - 1)` for `1 < p < ∞`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if p > 1.0 && p.is_finite() {
        Ok(p / (p - 1.0))
    } else {
        Err(Error::InvalidParameter(format!(
            "conjugate exponent needs 1 < p < ∞, got {p}"
        )))
    }
}
