//! Discrete Hardy inequalities on finitely supported sequences `(b_k)_{k∈ℤ}`.
//! Sums over all of `ℤ` are evaluated as a finite window plus the exact
//! geometric tail beyond the support.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::report::VerificationReport;

/// `b_k` for `k = start, …, start + values.len() - 1`, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSequence {
    pub start: i64,
    pub values: Vec<f64>,
}

impl DyadicSequence {
    pub fn new(start: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sequence needs at least one entry".into()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(DyadicSequence { start, values })
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    /// Seeded sequence: random start in `[-8, 8]`, length `1..=16`, entries
    /// zero with probability 0.3 and otherwise of modulus in `[2^-8, 2^8]`
    /// with random sign.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = rng.gen_range(-8i64..=8);
        let len = rng.gen_range(1usize..=16);
        let values = (0..len)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    let m = rng.gen_range(-8.0f64..=8.0).exp2();
                    if rng.gen_bool(0.5) {
                        -m
                    } else {
                        m
                    }
                }
            })
            .collect();
        DyadicSequence { start, values }
    }
}

/// `(Σ x^h)^{1/h}` accumulated one term at a time; `h = ∞` keeps the max.
struct PowerSum {
    h: f64,
    acc: f64,
}

impl PowerSum {
    fn new(h: f64) -> Self {
        PowerSum { h, acc: 0.0 }
    }

    fn push(&mut self, x: f64) {
        if self.h.is_infinite() {
            self.acc = self.acc.max(x);
        } else if x > 0.0 {
            self.acc += x.powf(self.h);
        }
    }

    fn value(&self) -> f64 {
        if self.h.is_infinite() {
            self.acc
        } else {
            self.acc.powf(1.0 / self.h)
        }
    }
}

/// `ℓ_q` norm of `terms` with an extra tail `Σ_{j≥0} (tail·ρ^j)^q`,
/// `ρ = 2^{-α}`; for `q = ∞` the tail contributes `tail`.
fn lq_with_tail(terms: &[f64], tail: f64, alpha: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return terms.iter().copied().fold(tail, f64::max);
    }
    let s: f64 = terms.iter().filter(|&&t| t > 0.0).map(|t| t.powf(q)).sum();
    let tail_sum = if tail > 0.0 {
        tail.powf(q) / (1.0 - (-alpha * q).exp2())
    } else {
        0.0
    };
    (s + tail_sum).powf(1.0 / q)
}

fn check_args(alpha: f64, q: f64, h: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) || !(q > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need α > 0, q > 0, h > 0 (got {alpha}, {q}, {h})"
        )));
    }
    Ok(())
}

/// Both sides of the lower-cumulative form
/// `‖2^{-αk}(Σ_{r≤k}|b_r|^h)^{1/h}‖_{ℓ_q} ≤ c‖2^{-αk} b_k‖_{ℓ_q}`.
pub fn hardy_lower_sides(b: &DyadicSequence, alpha: f64, q: f64, h: f64) -> Result<(f64, f64)> {
    check_args(alpha, q, h)?;
    let w = |k: i64| (-alpha * k as f64).exp2();
    let mut cum = PowerSum::new(h);
    let mut lhs_terms = Vec::with_capacity(b.values.len());
    let mut rhs_terms = Vec::with_capacity(b.values.len());
    for (i, &v) in b.values.iter().enumerate() {
        let k = b.start + i as i64;
        cum.push(v.abs());
        lhs_terms.push(w(k) * cum.value());
        rhs_terms.push(w(k) * v.abs());
    }
    let tail = w(b.end() + 1) * cum.value();
    Ok((
        lq_with_tail(&lhs_terms, tail, alpha, q),
        lq_with_tail(&rhs_terms, 0.0, alpha, q),
    ))
}

/// Both sides of the upper-cumulative form
/// `‖2^{αk}(Σ_{r≥k}|b_r|^h)^{1/h}‖_{ℓ_q} ≤ c‖2^{αk} b_k‖_{ℓ_q}`.
pub fn hardy_upper_sides(b: &DyadicSequence, alpha: f64, q: f64, h: f64) -> Result<(f64, f64)> {
    check_args(alpha, q, h)?;
    let w = |k: i64| (alpha * k as f64).exp2();
    let mut cum = PowerSum::new(h);
    let mut lhs_terms = Vec::with_capacity(b.values.len());
    let mut rhs_terms = Vec::with_capacity(b.values.len());
    for (i, &v) in b.values.iter().enumerate().rev() {
        let k = b.start + i as i64;
        cum.push(v.abs());
        lhs_terms.push(w(k) * cum.value());
        rhs_terms.push(w(k) * v.abs());
    }
    let tail = w(b.start - 1) * cum.value();
    Ok((
        lq_with_tail(&lhs_terms, tail, alpha, q),
        lq_with_tail(&rhs_terms, 0.0, alpha, q),
    ))
}

/// Ratio reports `hardy_lower` and `hardy_upper`.
pub fn check_hardy(b: &DyadicSequence, alpha: f64, q: f64, h: f64) -> Result<[VerificationReport; 2]> {
    let (l1, r1) = hardy_lower_sides(b, alpha, q, h)?;
    let (l2, r2) = hardy_upper_sides(b, alpha, q, h)?;
    Ok([
        VerificationReport::ratio("hardy_lower", l1, r1).with_params(&[alpha], &[q], Some(h)),
        VerificationReport::ratio("hardy_upper", l2, r2).with_params(&[alpha], &[q], Some(h)),
    ])
}
