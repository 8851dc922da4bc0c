//! Non-increasing rearrangements of grid data.

use serde::{Deserialize, Serialize};

use crate::dyadic::{exp2i, DyadicWindow};
use crate::error::{Error, Result};
use crate::gridfn::{DomainKind, GridFunction, RealGrid, Scalar, StepFunction};

/// `f*` of a grid function of any dimension: the cell moduli sorted in
/// decreasing order, each carrying one cell volume.
pub fn decreasing_rearrangement<T: Scalar>(f: &GridFunction<T>) -> StepFunction {
    let vol = f.spec().cell_volume();
    // grid values are finite by construction
    StepFunction::from_pairs(f.values().iter().map(|v| (vol, v.modulus()))).expect("grid values are finite")
}

/// `f*` of a one-dimensional grid function.
pub fn rearrangement_1d<T: Scalar>(f: &GridFunction<T>) -> Result<StepFunction> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim(),
        });
    }
    Ok(decreasing_rearrangement(f))
}

/// `f*` of explicit `(measure, value)` pairs.
pub fn rearrangement_from_pairs(pairs: &[(f64, f64)]) -> Result<StepFunction> {
    StepFunction::from_pairs(pairs.iter().copied())
}

fn sort_desc(s: &mut [f64]) {
    s.sort_by(|a, b| b.total_cmp(a));
}

/// `f^{*₁…*ₙ}`: sorts `|f|` in decreasing order along axis 1 for every fixed
/// tail, then along axis 2 of the result, and so on. The output lives on the
/// positive orthant with the input's counts and spacings.
pub fn repeated_rearrangement<T: Scalar>(f: &GridFunction<T>) -> RealGrid {
    let spec = f.spec();
    let mut vals: Vec<f64> = f.values().iter().map(|v| v.modulus()).collect();
    for axis in 0..spec.dim() {
        let n = spec.count()[axis];
        if n == 1 {
            continue;
        }
        let stride = spec.stride(axis);
        if stride == 1 {
            crate::par::for_each_chunk_mut(&mut vals, n, |_, c| sort_desc(c));
            continue;
        }
        let block = stride * n;
        let nslices = vals.len() / n;
        let src = &vals;
        let sorted: Vec<Vec<f64>> = crate::par::map_range(nslices, |s| {
            let base = (s / stride) * block + s % stride;
            let mut line: Vec<f64> = (0..n).map(|i| src[base + i * stride]).collect();
            sort_desc(&mut line);
            line
        });
        for (s, line) in sorted.into_iter().enumerate() {
            let base = (s / stride) * block + s % stride;
            for (i, v) in line.into_iter().enumerate() {
                vals[base + i * stride] = v;
            }
        }
    }
    GridFunction::new(spec.to_orthant(), vals, DomainKind::PositiveOrthant).expect("rearrangement preserves finiteness")
}

/// Values `F(2^{m_1}, …, 2^{m_n})` on a window of multi-indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicProfile {
    window: DyadicWindow,
    values: Vec<f64>,
}

impl DyadicProfile {
    pub fn new(window: DyadicWindow, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "profile needs {} values, got {}",
                window.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite { index });
        }
        Ok(DyadicProfile { window, values })
    }

    /// Profile computed from a closure `m ↦ value`.
    pub fn from_fn<F: Fn(&[i32]) -> f64>(window: DyadicWindow, f: F) -> Result<Self> {
        let mut m = vec![0i32; window.dim()];
        let values = (0..window.len())
            .map(|flat| {
                window.unravel(flat, &mut m);
                f(&m)
            })
            .collect();
        DyadicProfile::new(window, values)
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn window(&self) -> &DyadicWindow {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `m`, 0 outside the window.
    pub fn get(&self, m: &[i32]) -> f64 {
        if self.window.contains(m) {
            self.values[self.window.flat_index(m)]
        } else {
            0.0
        }
    }

    /// `(m, value)` pairs in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i32>, f64)> + '_ {
        let dim = self.dim();
        self.values.iter().enumerate().map(move |(flat, &v)| {
            let mut m = vec![0i32; dim];
            self.window.unravel(flat, &mut m);
            (m, v)
        })
    }

    /// First index at which the profile increases along some axis.
    pub fn monotonicity_violation(&self) -> Option<(usize, usize)> {
        let dim = self.dim();
        let mut m = vec![0i32; dim];
        for flat in 0..self.values.len() {
            self.window.unravel(flat, &mut m);
            for j in 0..dim {
                if m[j] < self.window.hi()[j] {
                    m[j] += 1;
                    let next = self.values[self.window.flat_index(&m)];
                    m[j] -= 1;
                    if next > self.values[flat] {
                        return Some((j, flat));
                    }
                }
            }
        }
        None
    }
}

/// Index of the cell of length `h` containing the point `t > 0` under the
/// left-closed convention: cell `i` covers `(i h, (i+1) h]`.
#[inline]
pub(crate) fn cell_of_point(t: f64, h: f64) -> usize {
    let c = (t / h).ceil();
    if c <= 1.0 {
        0
    } else {
        c as usize - 1
    }
}

/// `F^⋆(2^m)` for every `m` in `window`, reading the piecewise-constant
/// extension of a positive-orthant function (0 beyond the grid).
pub fn dyadic_samples(f: &RealGrid, window: &DyadicWindow) -> Result<DyadicProfile> {
    f.require_domain(DomainKind::PositiveOrthant)?;
    let spec = f.spec();
    if window.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: window.dim(),
        });
    }
    let dim = spec.dim();
    // per-axis lookup m -> cell index
    let lookup: Vec<Vec<Option<usize>>> = (0..dim)
        .map(|j| {
            (window.lo()[j]..=window.hi()[j])
                .map(|m| {
                    let i = cell_of_point(exp2i(m as i64), spec.spacing()[j]);
                    (i < spec.count()[j]).then_some(i)
                })
                .collect()
        })
        .collect();
    let mut m = vec![0i32; dim];
    let mut idx = vec![0usize; dim];
    let values = (0..window.len())
        .map(|flat| {
            window.unravel(flat, &mut m);
            for j in 0..dim {
                match lookup[j][(m[j] - window.lo()[j]) as usize] {
                    Some(i) => idx[j] = i,
                    None => return 0.0,
                }
            }
            f.get(&idx)
        })
        .collect();
    DyadicProfile::new(window.clone(), values)
}
