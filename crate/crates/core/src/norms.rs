//! Quasinorms and functionals on rearrangements. Every `t`-integral is
//! evaluated in closed form per cell; nothing here uses quadrature.

use std::collections::BTreeMap;

use crate::dyadic::BlockDecomposition;
use crate::error::{Error, Result};
use crate::gridfn::{DomainKind, GridFunction, LorentzParams, RealGrid, Scalar, StepFunction};
use crate::rearrange::{repeated_rearrangement, DyadicProfile};

/// `b^β - a^β` for `0 ≤ a < b`, without cancellation when `b - a ≪ a`.
#[inline]
fn pow_diff(a: f64, width: f64, beta: f64) -> f64 {
    if a == 0.0 {
        width.powf(beta)
    } else {
        a.powf(beta) * (beta * (width / a).ln_1p()).exp_m1()
    }
}

fn check_lorentz_pair(p: f64, q: f64) -> Result<()> {
    LorentzParams::scalar(p, q).map(|_| ())
}

/// `‖f‖_{L_{p,q}} = (∫₀^∞ (t^{1/p} f*(t))^q dt/t)^{1/q}`, or
/// `sup_t t^{1/p} f*(t)` for `q = ∞`.
pub fn lorentz_norm(s: &StepFunction, p: f64, q: f64) -> Result<f64> {
    check_lorentz_pair(p, q)?;
    if s.is_zero() {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(s.max_value());
    }
    let mut start = 0.0;
    if q.is_infinite() {
        let mut best = 0.0f64;
        for piece in s.pieces() {
            start += piece.width;
            best = best.max(piece.value * start.powf(1.0 / p));
        }
        return Ok(best);
    }
    let beta = q / p;
    let mut acc = 0.0;
    for piece in s.pieces() {
        acc += piece.value.powf(q) * pow_diff(start, piece.width, beta);
        start += piece.width;
    }
    Ok((acc * p / q).powf(1.0 / q))
}

/// `a_k(f, Λ)` for every `k` in a range.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockCoefficients {
    k_lo: i64,
    values: Vec<f64>,
}

impl BlockCoefficients {
    pub fn range(&self) -> std::ops::RangeInclusive<i64> {
        self.k_lo..=self.k_lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        let i = k - self.k_lo;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `a_k = (2^{-k} ∫_{Λ_k} F²)^{1/2}` of a repeated rearrangement.
pub fn a_coefficient(f: &RealGrid, k: i64) -> Result<f64> {
    Ok(BlockDecomposition::new(f, 2.0)?.normalized_mass(k).sqrt())
}

pub fn block_coefficients(f: &RealGrid, k_lo: i64, k_hi: i64) -> Result<BlockCoefficients> {
    if k_lo > k_hi {
        return Err(Error::EmptyWindow);
    }
    let d = BlockDecomposition::new(f, 2.0)?;
    Ok(BlockCoefficients {
        k_lo,
        values: (k_lo..=k_hi).map(|k| d.normalized_mass(k).sqrt()).collect(),
    })
}

/// `‖F‖_{𝔏_{p,q}(Λ)} = (Σ_k (2^{k/p} a_k)^q)^{1/q}` from a prepared
/// decomposition of `F²`.
pub fn frak_norm_from(d: &BlockDecomposition, p: f64, q: f64) -> Result<f64> {
    check_lorentz_pair(p, q)?;
    if d.exponent() != 2.0 {
        return Err(Error::InvalidParameter("decomposition must be of F²".into()));
    }
    let Some(k_max) = d.k_max() else {
        return Ok(0.0);
    };
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if q.is_infinite() {
        d.lower_sup(k_max, inv_p, 0.5)
    } else {
        Ok(d.lower_series(k_max, q * inv_p, 0.5 * q)?.powf(1.0 / q))
    }
}

/// `‖F‖_{𝔏_{p,q}(Λ)}` of a repeated rearrangement `F`.
pub fn frak_norm(f: &RealGrid, p: f64, q: f64) -> Result<f64> {
    frak_norm_from(&BlockDecomposition::new(f, 2.0)?, p, q)
}

/// `Σ_{m ∈ D_k ∩ window} v(m)^inner` for every level `k` of the window.
pub fn level_sums(profile: &DyadicProfile, inner: f64) -> BTreeMap<i64, f64> {
    let mut out = BTreeMap::new();
    for (m, v) in profile.iter() {
        let k: i64 = m.iter().map(|&x| x as i64).sum();
        let e = out.entry(k).or_insert(0.0);
        if v > 0.0 {
            *e += v.powf(inner);
        }
    }
    out
}

/// `Σ_k 2^{kq/s} (Σ_{m∈D_k} v(m)^inner)^{q/inner}` over the profile window;
/// for `q = ∞` the supremum `sup_k 2^{k/s} (Σ v^inner)^{1/inner}`.
pub fn dyadic_block_sum_with(profile: &DyadicProfile, s: f64, q: f64, inner: f64) -> Result<f64> {
    if !(s > 0.0) || !(q > 0.0) || !(inner > 0.0 && inner.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need s > 0, q > 0 and finite inner > 0 (got {s}, {q}, {inner})"
        )));
    }
    let inv_s = if s.is_infinite() { 0.0 } else { 1.0 / s };
    let levels = level_sums(profile, inner);
    if q.is_infinite() {
        Ok(levels
            .iter()
            .filter(|(_, &m)| m > 0.0)
            .map(|(&k, &m)| (k as f64 * inv_s).exp2() * m.powf(1.0 / inner))
            .fold(0.0, f64::max))
    } else {
        Ok(levels
            .iter()
            .filter(|(_, &m)| m > 0.0)
            .map(|(&k, &m)| (k as f64 * q * inv_s).exp2() * m.powf(q / inner))
            .sum())
    }
}

/// `Σ_k 2^{kq/s} (Σ_{m∈D_k} F^⋆(2^m)²)^{q/2}`.
pub fn dyadic_block_sum(profile: &DyadicProfile, s: f64, q: f64) -> Result<f64> {
    dyadic_block_sum_with(profile, s, q, 2.0)
}

/// Collapses the leading axis of a flat array (axis 0 fastest) by applying
/// `reduce` to every contiguous line.
fn reduce_leading_axis<F>(values: &[f64], n: usize, reduce: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let lines = values.len() / n;
    crate::par::map_range(lines, |l| reduce(&values[l * n..(l + 1) * n]))
}

/// One-axis weighted norm `‖t^{1/p} φ(t)‖_{L^q(dt/t)}` of a function that is
/// constant on the cells `(ih, (i+1)h]`.
struct AxisFunctional {
    p: f64,
    q: f64,
    /// `∫_{ih}^{(i+1)h} t^{q/p-1} dt` (finite `q`) or `((i+1)h)^{1/p}` (`q = ∞`)
    weights: Vec<f64>,
}

impl AxisFunctional {
    fn new(p: f64, q: f64, h: f64, n: usize) -> Self {
        let weights = if q.is_infinite() {
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            (0..n).map(|i| ((i + 1) as f64 * h).powf(inv_p)).collect()
        } else {
            let beta = q / p;
            let scale = h.powf(beta) * p / q;
            (0..n).map(|i| scale * pow_diff(i as f64, 1.0, beta)).collect()
        };
        AxisFunctional { p, q, weights }
    }

    fn apply(&self, line: &[f64]) -> f64 {
        if self.q.is_infinite() {
            line.iter()
                .zip(&self.weights)
                .map(|(v, w)| v.abs() * w)
                .fold(0.0, f64::max)
        } else {
            let s: f64 = line
                .iter()
                .zip(&self.weights)
                .filter(|(v, _)| **v != 0.0)
                .map(|(v, w)| v.abs().powf(self.q) * w)
                .sum();
            s.powf(1.0 / self.q)
        }
    }
}

/// `Φ_{p,q}(φ)`: iterated weighted integrals of a positive-orthant function,
/// innermost over axis 1, outermost over axis n. `q_j = ∞` replaces the
/// `j`-th integral by a supremum.
pub fn phi_functional(f: &RealGrid, params: &LorentzParams) -> Result<f64> {
    f.require_domain(DomainKind::PositiveOrthant)?;
    let spec = f.spec();
    params.require_dim(spec.dim())?;
    if let Some(j) = (0..spec.dim()).find(|&j| params.p(j).is_infinite() && params.q(j).is_finite()) {
        return Err(Error::InvalidParameter(format!("axis {j}: p = ∞ requires q = ∞")));
    }
    let mut current: Vec<f64> = f.values().to_vec();
    for j in 0..spec.dim() {
        let n = spec.count()[j];
        let functional = AxisFunctional::new(params.p(j), params.q(j), spec.spacing()[j], n);
        debug_assert!(functional.p > 0.0);
        current = reduce_leading_axis(&current, n, |line| functional.apply(line));
    }
    Ok(current[0])
}

/// `‖f‖_{L*_{p,q}} = Φ_{p,q}(f^{*₁…*ₙ})`.
pub fn anisotropic_lorentz_norm<T: Scalar>(f: &GridFunction<T>, params: &LorentzParams) -> Result<f64> {
    phi_functional(&repeated_rearrangement(f), params)
}

/// Checks that a positive-orthant function is non-increasing along every
/// axis.
pub fn require_monotone(f: &RealGrid) -> Result<()> {
    let spec = f.spec();
    let vals = f.values();
    for j in 0..spec.dim() {
        let stride = spec.stride(j);
        let n = spec.count()[j];
        for (flat, &v) in vals.iter().enumerate() {
            let i = (flat / stride) % n;
            if i + 1 < n && vals[flat + stride] > v {
                return Err(Error::NotMonotone { axis: j, index: flat });
            }
        }
    }
    Ok(())
}

/// `‖f‖_{N_{p,q}(M)} = Φ_{p,q}(\bar f(·; M))` from the maximal function on a
/// positive-orthant grid (see [`crate::maximal::maximal_function_grid`]).
pub fn n_norm(fbar: &RealGrid, params: &LorentzParams) -> Result<f64> {
    fbar.require_domain(DomainKind::PositiveOrthant)?;
    require_monotone(fbar)?;
    phi_functional(fbar, params)
}

/// `‖f‖_{A_{p,σ}}`: one-dimensional Lorentz `L_{p_1,σ_1}` norms along axis 1
/// for every fixed tail, then `L_{p_2,σ_2}` along axis 2 of the result, and
/// so on.
pub fn mixed_lorentz_norm<T: Scalar>(f: &GridFunction<T>, params: &LorentzParams) -> Result<f64> {
    let spec = f.spec();
    params.require_dim(spec.dim())?;
    for j in 0..spec.dim() {
        check_lorentz_pair(params.p(j), params.q(j))?;
    }
    let mut current: Vec<f64> = f.values().iter().map(|v| v.modulus()).collect();
    for j in 0..spec.dim() {
        let n = spec.count()[j];
        let h = spec.spacing()[j];
        let (p, q) = (params.p(j), params.q(j));
        current = reduce_leading_axis(&current, n, |line| {
            let s = StepFunction::from_pairs(line.iter().map(|&v| (h, v))).expect("finite");
            lorentz_norm(&s, p, q).expect("validated parameters")
        });
    }
    Ok(current[0])
}
