//! Dyadic index geometry: diagonal sets `D_k`, shells `Λ_r` and stepped
//! hyperbolic crosses `G_k`, plus exact shell integrals of grid functions on
//! the positive orthant.
//!
//! `Λ_r` is the union of the dyadic cells `∏[2^{m_i}, 2^{m_i+1})` with
//! `m ∈ D_r`, and `G_k = ∪_{r ≤ k} Λ_r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::{DomainKind, RealGrid};

/// A multi-index `m ∈ ℤⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockIndex(pub Vec<i32>);

impl BlockIndex {
    /// `k = m_1 + … + m_n`.
    pub fn level(&self) -> i64 {
        self.0.iter().map(|&m| m as i64).sum()
    }

    /// Lebesgue measure `2^{m_1+…+m_n}` of the dyadic cell.
    pub fn cell_measure(&self) -> f64 {
        exp2i(self.level())
    }
}

/// Inclusive per-axis integer box `∏[lo_j, hi_j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicWindow {
    lo: Vec<i32>,
    hi: Vec<i32>,
}

impl DyadicWindow {
    pub fn new(lo: Vec<i32>, hi: Vec<i32>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(format!(
                "window bounds must be non-empty and of equal length ({} vs {})",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::EmptyWindow);
        }
        Ok(DyadicWindow { lo, hi })
    }

    /// `[lo, hi]ⁿ`.
    pub fn cube(dim: usize, lo: i32, hi: i32) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Window for sampling a function on `spec` at dyadic points: from
    /// `depth` octaves below the cell size up to the largest `2^m` inside the
    /// grid extent.
    pub fn for_grid(spec: &crate::gridfn::GridSpec, depth: u32) -> Result<Self> {
        let dim = spec.dim();
        let lo = (0..dim).map(|j| floor_log2(spec.spacing()[j]) - depth as i32).collect();
        let hi = (0..dim).map(|j| floor_log2(spec.extent(j))).collect();
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i32] {
        &self.lo
    }

    pub fn hi(&self) -> &[i32] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|j| self.width(j)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: &[i32]) -> bool {
        m.len() == self.dim() && (0..self.dim()).all(|j| self.lo[j] <= m[j] && m[j] <= self.hi[j])
    }

    /// Flat position of `m` (axis 0 fastest).
    pub fn flat_index(&self, m: &[i32]) -> usize {
        let mut flat = 0usize;
        for j in (0..self.dim()).rev() {
            flat = flat * self.width(j) + (m[j] - self.lo[j]) as usize;
        }
        flat
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [i32]) {
        for (j, o) in out.iter_mut().enumerate() {
            let w = self.width(j);
            *o = self.lo[j] + (flat % w) as i32;
            flat /= w;
        }
    }

    /// Window shifted by `s` on every axis.
    pub fn shifted(&self, s: i32) -> Self {
        DyadicWindow {
            lo: self.lo.iter().map(|l| l + s).collect(),
            hi: self.hi.iter().map(|h| h + s).collect(),
        }
    }

    /// Smallest and largest level `Σ m_j` inside the window.
    pub fn level_range(&self) -> (i64, i64) {
        (
            self.lo.iter().map(|&x| x as i64).sum(),
            self.hi.iter().map(|&x| x as i64).sum(),
        )
    }
}

/// All `m` in `window` with `m_1 + … + m_n = k`, in lexicographic order.
pub fn diag_set(k: i64, window: &DyadicWindow) -> Vec<BlockIndex> {
    let n = window.dim();
    // suffix bounds on the remaining coordinates
    let mut min_rest = vec![0i64; n + 1];
    let mut max_rest = vec![0i64; n + 1];
    for j in (0..n).rev() {
        min_rest[j] = min_rest[j + 1] + window.lo[j] as i64;
        max_rest[j] = max_rest[j + 1] + window.hi[j] as i64;
    }
    let mut out = Vec::new();
    let mut cur = vec![0i32; n];
    fn rec(
        j: usize,
        remaining: i64,
        w: &DyadicWindow,
        min_rest: &[i64],
        max_rest: &[i64],
        cur: &mut Vec<i32>,
        out: &mut Vec<BlockIndex>,
    ) {
        let n = w.dim();
        if j == n {
            if remaining == 0 {
                out.push(BlockIndex(cur.clone()));
            }
            return;
        }
        let lo = (w.lo[j] as i64).max(remaining - max_rest[j + 1]);
        let hi = (w.hi[j] as i64).min(remaining - min_rest[j + 1]);
        for m in lo..=hi {
            cur[j] = m as i32;
            rec(j + 1, remaining - m, w, min_rest, max_rest, cur, out);
        }
    }
    rec(0, k, window, &min_rest, &max_rest, &mut cur, &mut out);
    out
}

/// `μ(Λ_r ∩ window) = |D_r ∩ window| · 2^r`.
pub fn lambda_measure(r: i64, window: &DyadicWindow) -> f64 {
    diag_set(r, window).len() as f64 * exp2i(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    LambdaBlock(i64),
    Cross(i64),
}

/// A shell `Λ_r` or cross `G_k`, listed as its dyadic cells inside a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDescriptor {
    pub kind: RegionKind,
    pub cells: Vec<BlockIndex>,
}

impl RegionDescriptor {
    pub fn lambda_block(r: i64, window: &DyadicWindow) -> Self {
        RegionDescriptor {
            kind: RegionKind::LambdaBlock(r),
            cells: diag_set(r, window),
        }
    }

    pub fn cross(k: i64, window: &DyadicWindow) -> Self {
        let (lo, _) = window.level_range();
        let cells = (lo..=k).flat_map(|r| diag_set(r, window)).collect();
        RegionDescriptor {
            kind: RegionKind::Cross(k),
            cells,
        }
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().map(BlockIndex::cell_measure).sum()
    }
}

/// `2^e` for integer `e`.
#[inline]
pub fn exp2i(e: i64) -> f64 {
    (e as f64).exp2()
}

/// `⌊log₂ x⌋` for positive normal `x`, exact.
pub fn floor_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        // subnormal
        let mant = bits & ((1u64 << 52) - 1);
        -1074 + (63 - mant.leading_zeros() as i32)
    } else {
        exp - 1023
    }
}

/// Pieces of one grid cell along one axis, split at dyadic points.
#[derive(Clone, Debug)]
struct AxisCell {
    /// `(m, |cell ∩ [2^m, 2^{m+1})|)` for finitely many `m`.
    fixed: Vec<(i32, f64)>,
    /// The first cell `(0, h]` also contains every `[2^m, 2^{m+1})` with
    /// `m ≤ top`, each in full.
    tail_top: Option<i32>,
}

fn axis_cells(h: f64, count: usize) -> Vec<AxisCell> {
    let mut out = Vec::with_capacity(count);
    let m0 = floor_log2(h);
    let p0 = exp2i(m0 as i64);
    let mut first = AxisCell {
        fixed: Vec::new(),
        tail_top: Some(m0 - 1),
    };
    if h > p0 {
        first.fixed.push((m0, h - p0));
    }
    out.push(first);
    for i in 1..count {
        let lo = i as f64 * h;
        let hi = (i + 1) as f64 * h;
        let mut fixed = Vec::with_capacity(2);
        let mut m = floor_log2(lo);
        loop {
            let a = exp2i(m as i64);
            if a >= hi {
                break;
            }
            let b = 2.0 * a;
            let len = hi.min(b) - lo.max(a);
            if len > 0.0 {
                fixed.push((m, len));
            }
            m += 1;
        }
        out.push(AxisCell { fixed, tail_top: None });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct ShellGroup {
    /// number of axes running through their infinite first-cell tail
    tails: usize,
    /// level below which the group contributes to every shell
    tau: i64,
    weight: f64,
}

/// Exact shell masses of `|F|^e` for a function on the positive orthant.
///
/// Every grid cell is split into products of one-axis dyadic pieces. A piece
/// combination whose first-cell axes run through their infinite tails
/// contributes `W · C(τ - k + s - 1, s - 1)` to the normalised mass
/// `2^{-k} ∫_{Λ_k} |F|^e`, where `s` is the number of tail axes. Grouping by
/// `(s, τ)` makes every shell integral a finite sum, for every `k ∈ ℤ`.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    dim: usize,
    exponent: f64,
    /// combinations with no tail axis: level → Σ weight
    point: BTreeMap<i64, f64>,
    shells: Vec<ShellGroup>,
    total: f64,
}

const CHUNK: usize = 4096;

impl BlockDecomposition {
    /// Decomposes `|F|^exponent`. `F` must be a positive-orthant function
    /// (anchored at 0); physical-space grids are rejected as misaligned.
    pub fn new(f: &RealGrid, exponent: f64) -> Result<Self> {
        f.require_domain(DomainKind::PositiveOrthant)?;
        if f.spec().origin().iter().any(|&o| o != 0.0) {
            return Err(Error::InvalidGrid("positive-orthant grid must start at 0".into()));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidParameter(format!("exponent {exponent} must be positive")));
        }
        let spec = f.spec();
        let dim = spec.dim();
        let axes: Vec<Vec<AxisCell>> = (0..dim)
            .map(|j| axis_cells(spec.spacing()[j], spec.count()[j]))
            .collect();
        let values = f.values();
        let nchunks = values.len().div_ceil(CHUNK);

        type Partial = (BTreeMap<i64, f64>, BTreeMap<(usize, i64), f64>);
        let partials: Vec<Partial> = crate::par::map_range(nchunks, |c| {
            let mut point = BTreeMap::new();
            let mut shells = BTreeMap::new();
            let mut idx = vec![0usize; dim];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(values.len());
            for (flat, &v) in values.iter().enumerate().take(end).skip(start) {
                if v == 0.0 {
                    continue;
                }
                let w = v.abs().powf(exponent);
                spec.unravel(flat, &mut idx);
                let cells: Vec<&AxisCell> = (0..dim).map(|j| &axes[j][idx[j]]).collect();
                accumulate(&cells, w, &mut point, &mut shells);
            }
            (point, shells)
        });

        let mut point: BTreeMap<i64, f64> = BTreeMap::new();
        let mut grouped: BTreeMap<(usize, i64), f64> = BTreeMap::new();
        for (p, s) in partials {
            for (k, w) in p {
                *point.entry(k).or_insert(0.0) += w;
            }
            for (key, w) in s {
                *grouped.entry(key).or_insert(0.0) += w;
            }
        }
        point.retain(|_, w| *w > 0.0);
        let shells = grouped
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|((tails, tau), weight)| ShellGroup { tails, tau, weight })
            .collect();
        let total = values.iter().map(|v| v.abs().powf(exponent)).sum::<f64>() * spec.cell_volume();
        Ok(BlockDecomposition {
            dim,
            exponent,
            point,
            shells,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.point.is_empty() && self.shells.is_empty()
    }

    /// `∫ |F|^e` over the whole orthant.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `2^{-k} ∫_{Λ_k} |F|^e dt`.
    pub fn normalized_mass(&self, k: i64) -> f64 {
        let mut acc = self.point.get(&k).copied().unwrap_or(0.0);
        for g in &self.shells {
            if g.tau >= k {
                acc += g.weight * compositions((g.tau - k) as u64, g.tails);
            }
        }
        acc
    }

    /// `∫_{Λ_k} |F|^e dt`.
    pub fn block_integral(&self, k: i64) -> f64 {
        exp2i(k) * self.normalized_mass(k)
    }

    /// Largest level with a possibly non-zero shell; `None` for `F ≡ 0`.
    pub fn k_max(&self) -> Option<i64> {
        let a = self.point.keys().next_back().copied();
        let b = self.shells.iter().map(|g| g.tau).max();
        a.max(b)
    }

    /// Level at and below which every group is active and the normalised
    /// mass is a polynomial in `k`.
    pub fn k_poly(&self) -> Option<i64> {
        let a = self.point.keys().next().map(|k| k - 1);
        let b = self.shells.iter().map(|g| g.tau).min();
        match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn max_tails(&self) -> usize {
        self.shells.iter().map(|g| g.tails).max().unwrap_or(0)
    }

    /// Upper bound on `mass(k-1)/mass(k)` once `k ≤ k_poly`.
    fn growth_bound(&self, k: i64) -> f64 {
        let kp = self.k_poly().unwrap_or(k);
        let v = (kp - k).max(0) as f64;
        let s = self.max_tails() as f64;
        1.0 + (s - 1.0).max(0.0) / (v + 1.0)
    }

    /// `Σ_{k ≤ k_top} 2^{kβ} mass(k)^γ`, summed downward until the geometric
    /// tail bound falls below `1e-17` of the partial sum.
    pub fn lower_series(&self, k_top: i64, beta: f64, gamma: f64) -> Result<f64> {
        let Some(k_max) = self.k_max() else {
            return Ok(0.0);
        };
        let k_poly = self.k_poly().unwrap_or(k_max);
        let mut k = k_top.min(k_max);
        let mut sum = 0.0;
        let mut steps = 0u32;
        loop {
            let m = self.normalized_mass(k);
            let term = if m > 0.0 {
                (k as f64 * beta).exp2() * m.powf(gamma)
            } else {
                0.0
            };
            sum += term;
            if k <= k_poly {
                if self.shells.is_empty() || m == 0.0 {
                    break;
                }
                let rho = (-beta).exp2() * self.growth_bound(k).powf(gamma);
                if rho < 1.0 && term * rho / (1.0 - rho) <= 1e-17 * sum {
                    break;
                }
                if beta <= 0.0 && self.max_tails() >= 1 && rho >= 1.0 && steps > 64 {
                    return Err(Error::Divergent(format!(
                        "lower tail Σ 2^(kβ) mass^γ diverges for β = {beta}"
                    )));
                }
            }
            steps += 1;
            if steps > 200_000 {
                return Err(Error::Divergent("lower tail did not settle".into()));
            }
            k -= 1;
        }
        Ok(sum)
    }

    /// `sup_{k ≤ k_top} 2^{kβ} mass(k)^γ`; infinite when the tail grows.
    pub fn lower_sup(&self, k_top: i64, beta: f64, gamma: f64) -> Result<f64> {
        let Some(k_max) = self.k_max() else {
            return Ok(0.0);
        };
        let k_poly = self.k_poly().unwrap_or(k_max);
        let mut k = k_top.min(k_max);
        let mut best = 0.0f64;
        let mut steps = 0u32;
        loop {
            let m = self.normalized_mass(k);
            let term = if m > 0.0 {
                (k as f64 * beta).exp2() * m.powf(gamma)
            } else {
                0.0
            };
            best = best.max(term);
            if k <= k_poly {
                if self.shells.is_empty() || m == 0.0 {
                    break;
                }
                let rho = (-beta).exp2() * self.growth_bound(k).powf(gamma);
                if rho <= 1.0 {
                    break;
                }
                if beta <= 0.0 {
                    return Ok(f64::INFINITY);
                }
            }
            steps += 1;
            if steps > 200_000 {
                return Err(Error::Divergent("lower tail did not settle".into()));
            }
            k -= 1;
        }
        Ok(best)
    }

    /// `∫_{G_k} |F|^e dt = Σ_{r ≤ k} ∫_{Λ_r} |F|^e dt`.
    pub fn cross_integral(&self, k: i64) -> Result<f64> {
        self.lower_series(k, 1.0, 1.0)
    }
}

fn accumulate(cells: &[&AxisCell], w: f64, point: &mut BTreeMap<i64, f64>, shells: &mut BTreeMap<(usize, i64), f64>) {
    // odometer over per-axis choices: fixed piece index, or the tail
    let n = cells.len();
    let opts: Vec<usize> = cells
        .iter()
        .map(|c| c.fixed.len() + usize::from(c.tail_top.is_some()))
        .collect();
    if opts.contains(&0) {
        return;
    }
    let mut choice = vec![0usize; n];
    loop {
        let mut tails = 0usize;
        let mut sigma = 0i64;
        let mut top = 0i64;
        let mut len = 1.0;
        for j in 0..n {
            let c = cells[j];
            if choice[j] < c.fixed.len() {
                let (m, l) = c.fixed[choice[j]];
                sigma += m as i64;
                len *= l;
            } else {
                tails += 1;
                top += c.tail_top.unwrap() as i64;
            }
        }
        let weight = w * len * exp2i(-sigma);
        if tails == 0 {
            *point.entry(sigma).or_insert(0.0) += weight;
        } else {
            *shells.entry((tails, top + sigma)).or_insert(0.0) += weight;
        }
        // advance
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            choice[j] += 1;
            if choice[j] < opts[j] {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

/// Number of `s`-tuples of non-negative integers summing to `v`:
/// `C(v + s - 1, s - 1)`.
fn compositions(v: u64, s: usize) -> f64 {
    let mut c = 1.0;
    for i in 1..s {
        c = c * (v + i as u64) as f64 / i as f64;
    }
    c
}

/// `∫_{Λ_r} F(t)^exponent dt` for a positive-orthant function.
pub fn block_integral(f: &RealGrid, r: i64, exponent: f64) -> Result<f64> {
    Ok(BlockDecomposition::new(f, exponent)?.block_integral(r))
}
