//! Growth of the diagonal block sums of `χ_{G_r^*}` against the classical
//! one-term bounds.

use serde::{Deserialize, Serialize};

use crate::corpus::in_hyperbolic_cross;
use crate::dyadic::exp2i;
use crate::error::{Error, Result};
use crate::gridfn::conjugate_exponent;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub r: u32,
    /// `(Σ_{m∈D_r, m≥0} χ^⋆(2^m)²)^{1/2}`
    pub b: f64,
    /// `2^{r/p'} B(r)`, the level-`r` term of the Fourier-side block sum
    pub block_term: f64,
    /// the same lattice points in `ℓ^p`
    pub lp_block: f64,
    /// the same lattice points in `ℓ^{p'}`
    pub lp_conj_block: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub n: usize,
    pub p: f64,
    pub rows: Vec<SharpnessRow>,
    /// least-squares slope of `log B(r)` against `log r`
    pub slope: f64,
    pub lp_slope: f64,
    pub lp_conj_slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("slope fit needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("slope fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Calls `visit` with every `m ∈ ℕⁿ` with `Σ m = r`.
fn for_each_composition(r: u32, n: usize, visit: &mut impl FnMut(&[u32])) {
    fn rec(rest: u32, m: &mut Vec<u32>, n: usize, visit: &mut impl FnMut(&[u32])) {
        if m.len() + 1 == n {
            m.push(rest);
            visit(m);
            m.pop();
            return;
        }
        for a in 0..=rest {
            m.push(a);
            rec(rest - a, m, n, visit);
            m.pop();
        }
    }
    let mut m = Vec::with_capacity(n);
    rec(r, &mut m, n, visit);
}

/// `Σ_{m∈D_r, m≥0} χ_{G_r^*}(2^m)^s`; the indicator of a down-set equals
/// its own repeated rearrangement.
fn lattice_mass(r: u32, n: usize, s: f64) -> f64 {
    let mut total = 0.0;
    let mut point = vec![0.0; n];
    for_each_composition(r, n, &mut |m| {
        for (x, &a) in point.iter_mut().zip(m) {
            *x = exp2i(a as i64);
        }
        let v = f64::from(u8::from(in_hyperbolic_cross(&point, r)));
        total += v.powf(s);
    });
    total
}

pub fn sharpness_experiment(n: usize, p: f64, r_min: u32, r_max: u32) -> Result<SharpnessReport> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidParameter(format!("dimension {n} outside 1..=6")));
    }
    if r_min == 0 || r_max < r_min + 4 || r_max > 60 {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ r_min and r_min + 4 ≤ r_max ≤ 60 (got {r_min}..{r_max})"
        )));
    }
    let pc = conjugate_exponent(p)?;
    let rows: Vec<SharpnessRow> = (r_min..=r_max)
        .map(|r| {
            let b = lattice_mass(r, n, 2.0).sqrt();
            SharpnessRow {
                r,
                b,
                block_term: (r as f64 / pc).exp2() * b,
                lp_block: lattice_mass(r, n, p).powf(1.0 / p),
                lp_conj_block: lattice_mass(r, n, pc).powf(1.0 / pc),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|row| row.r as f64).collect();
    let fit = |f: fn(&SharpnessRow) -> f64| loglog_slope(&xs, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(SharpnessReport {
        n,
        p,
        slope: fit(|row| row.b)?,
        lp_slope: fit(|row| row.lp_block)?,
        lp_conj_slope: fit(|row| row.lp_conj_block)?,
        rows,
    })
}

impl SharpnessReport {
    /// One CSV row per `r`, with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,b,block_term,lp_block,lp_conj_block\n");
        for row in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                row.r, row.b, row.block_term, row.lp_block, row.lp_conj_block
            ));
        }
        s
    }
}
