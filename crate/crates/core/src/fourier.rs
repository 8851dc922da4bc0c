//! Riemann-sum Fourier transforms of grid functions.
//!
//! Convention: `\hat f(y) = ∫ f(x) e^{-i(y,x)} dx` and
//! `F^{-1} g(x) = (2π)^{-n} ∫ g(y) e^{i(x,y)} dy`, so that
//! `‖\hat f‖₂² = (2π)ⁿ ‖f‖₂²`. Samples sit at cell centres.
//!
//! Along one axis with input centres `x_j = x_0 + j h` and output centres
//! `y_k = y_0 + k Δ`, the sum `Σ_j f_j e^{∓i y_k x_j}` equals
//! `e^{∓i y_k x_0} · DFT_L(f_j e^{∓i y_0 j h})[k mod L]` whenever
//! `L = 2π / (hΔ)` is an integer; inputs longer than `L` are folded.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dyadic::{exp2i, DyadicWindow};
use crate::error::{Error, Result};
use crate::gridfn::{ComplexGrid, DomainKind, GridFunction, GridSpec, Scalar};

/// `(2π)ⁿ`, the Plancherel factor of the transform convention.
pub fn plancherel_factor(n: usize) -> f64 {
    (2.0 * PI).powi(n as i32)
}

/// Largest transform length accepted for a single axis.
pub const MAX_FFT_LEN: usize = 1 << 26;

/// Relative boundary magnitude above which a truncation warning is raised.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Minimum number of frequency samples per dyadic cell of a profile window.
pub const MIN_SAMPLES_PER_CELL: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// `e^{2πi·sign·c}` with `c` reduced modulo 1 before scaling.
#[inline]
fn cycles(sign: f64, c: f64) -> Complex64 {
    let r = c.rem_euclid(1.0);
    Complex64::from_polar(1.0, sign * 2.0 * PI * r)
}

struct AxisPlan {
    n_in: usize,
    n_out: usize,
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl AxisPlan {
    #[allow(clippy::too_many_arguments)]
    fn new(
        planner: &mut FftPlanner<f64>,
        dir: Direction,
        x0: f64,
        h: f64,
        n_in: usize,
        y0: f64,
        dy: f64,
        n_out: usize,
    ) -> Result<Self> {
        let ratio = 2.0 * PI / (h * dy);
        let len = ratio.round();
        if !(len >= 1.0) || (ratio - len).abs() > 1e-9 * len || len > MAX_FFT_LEN as f64 {
            return Err(Error::InvalidParameter(format!(
                "2π/(h·Δy) = {ratio} must be a whole number of at most {MAX_FFT_LEN}"
            )));
        }
        let len = len as usize;
        let s = dir.sign();
        // phases in cycles: y0·h/(2π) per input index, x0/(2π) per output frequency
        let a = y0 * h / (2.0 * PI);
        let pre = (0..n_in).map(|j| cycles(s, a * j as f64)).collect();
        let post = (0..n_out)
            .map(|k| cycles(s, (y0 + k as f64 * dy) * x0 / (2.0 * PI)))
            .collect();
        let fft = match dir {
            Direction::Forward => planner.plan_fft_forward(len),
            Direction::Inverse => planner.plan_fft_inverse(len),
        };
        Ok(AxisPlan {
            n_in,
            n_out,
            len,
            fft,
            pre,
            post,
        })
    }

    fn apply(&self, line: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (j, (&v, &w)) in line.iter().zip(&self.pre).enumerate() {
            buf[j % self.len] += v * w;
        }
        self.fft.process(&mut buf);
        (0..self.n_out).map(|k| buf[k % self.len] * self.post[k]).collect()
    }
}

/// Applies one axis plan to every line of `axis`, changing that axis' count
/// from `plan.n_in` to `plan.n_out`.
fn transform_axis(values: &[Complex64], counts: &[usize], axis: usize, plan: &AxisPlan) -> Vec<Complex64> {
    debug_assert_eq!(counts[axis], plan.n_in);
    let inner: usize = counts[..axis].iter().product();
    let outer: usize = counts[axis + 1..].iter().product();
    let (n_in, n_out) = (plan.n_in, plan.n_out);
    let lines = crate::par::map_range(inner * outer, |l| {
        let (i, o) = (l % inner, l / inner);
        let base = o * inner * n_in + i;
        let line: Vec<Complex64> = (0..n_in).map(|j| values[base + j * inner]).collect();
        plan.apply(&line)
    });
    let mut out = vec![Complex64::new(0.0, 0.0); inner * outer * n_out];
    for (l, line) in lines.into_iter().enumerate() {
        let (i, o) = (l % inner, l / inner);
        let base = o * inner * n_out + i;
        for (k, v) in line.into_iter().enumerate() {
            out[base + k * inner] = v;
        }
    }
    out
}

fn check_target(source: &GridSpec, target: &GridSpec) -> Result<()> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: source.dim(),
            found: target.dim(),
        });
    }
    Ok(())
}

fn separable<T: Scalar>(f: &GridFunction<T>, target: &GridSpec, dir: Direction) -> Result<ComplexGrid> {
    let src = f.spec();
    check_target(src, target)?;
    let mut planner = FftPlanner::new();
    let mut counts = src.count().to_vec();
    let mut values: Vec<Complex64> = f.values().iter().map(|v| v.to_complex()).collect();
    for j in 0..src.dim() {
        let plan = AxisPlan::new(
            &mut planner,
            dir,
            src.center(j, 0),
            src.spacing()[j],
            src.count()[j],
            target.center(j, 0),
            target.spacing()[j],
            target.count()[j],
        )?;
        values = transform_axis(&values, &counts, j, &plan);
        counts[j] = target.count()[j];
    }
    let scale = match dir {
        Direction::Forward => src.cell_volume(),
        Direction::Inverse => src.cell_volume() / plancherel_factor(src.dim()),
    };
    for v in &mut values {
        *v *= scale;
    }
    GridFunction::new(target.clone(), values, DomainKind::FullLine)
}

/// Frequency grid of [`fourier_transform`]: `pad·N_j` points per axis at
/// `y_k = (k - pad·N_j/2)·Δ_j`, `Δ_j = 2π / (pad·N_j·h_j)`.
pub fn frequency_grid(spec: &GridSpec, pad: usize) -> Result<GridSpec> {
    if pad == 0 {
        return Err(Error::InvalidParameter("padding factor must be at least 1".into()));
    }
    let dim = spec.dim();
    let count: Vec<usize> = (0..dim).map(|j| pad * spec.count()[j]).collect();
    let spacing: Vec<f64> = (0..dim)
        .map(|j| 2.0 * PI / (count[j] as f64 * spec.spacing()[j]))
        .collect();
    // centre of cell k is y_k, so the origin sits half a cell below y_0
    let origin = (0..dim).map(|j| -((count[j] / 2) as f64 + 0.5) * spacing[j]).collect();
    GridSpec::new(origin, spacing, count)
}

/// Spatial grid of [`inverse_fourier_transform`], the counterpart of
/// [`frequency_grid`] with `pad = 1`.
pub fn spatial_grid(freq: &GridSpec) -> Result<GridSpec> {
    frequency_grid(freq, 1)
}

/// `\hat f` on [`frequency_grid`]`(spec, pad)`, zero-padding the input by
/// the factor `pad` on every axis.
pub fn fourier_transform<T: Scalar>(f: &GridFunction<T>, pad: usize) -> Result<ComplexGrid> {
    let target = frequency_grid(f.spec(), pad)?;
    separable(f, &target, Direction::Forward)
}

/// `\hat f` sampled at the cell centres of `target`.
pub fn fourier_transform_onto<T: Scalar>(f: &GridFunction<T>, target: &GridSpec) -> Result<ComplexGrid> {
    separable(f, target, Direction::Forward)
}

/// `F^{-1} g` on [`spatial_grid`] of the input.
pub fn inverse_fourier_transform<T: Scalar>(g: &GridFunction<T>) -> Result<ComplexGrid> {
    let target = spatial_grid(g.spec())?;
    separable(g, &target, Direction::Inverse)
}

/// `F^{-1} g` sampled at the cell centres of `target`, e.g. the grid a
/// forward transform started from.
pub fn inverse_fourier_transform_onto<T: Scalar>(g: &GridFunction<T>, target: &GridSpec) -> Result<ComplexGrid> {
    separable(g, target, Direction::Inverse)
}

/// `|‖\hat f‖₂² - (2π)ⁿ‖f‖₂²| / ((2π)ⁿ‖f‖₂²)` with `\hat f` from
/// [`fourier_transform`] at padding `pad`.
pub fn plancherel_defect<T: Scalar>(f: &GridFunction<T>, pad: usize) -> Result<f64> {
    let l2 = f.lp_norm(2.0);
    if l2 == 0.0 {
        return Err(Error::InvalidParameter("Plancherel defect of the zero function".into()));
    }
    let fhat = fourier_transform(f, pad)?;
    let expect = plancherel_factor(f.dim()) * l2 * l2;
    let got = fhat.lp_norm(2.0).powi(2);
    Ok((got - expect).abs() / expect)
}

/// Warning text when `f` has not decayed below [`TAIL_TOLERANCE`] (relative
/// to its maximum) on the boundary cells.
pub fn tail_warning<T: Scalar>(f: &GridFunction<T>) -> Option<String> {
    let max = f.lp_norm(f64::INFINITY);
    let edge = f.boundary_max();
    (max > 0.0 && edge > TAIL_TOLERANCE * max)
        .then(|| format!("boundary magnitude {edge:.3e} exceeds {TAIL_TOLERANCE:e} of the maximum {max:.3e}"))
}

/// Warning text when the smallest dyadic cells `2^{lo_j}` of `window` hold
/// fewer than [`MIN_SAMPLES_PER_CELL`] frequency samples, or the largest
/// exceed the grid.
pub fn resolution_warning(freq: &GridSpec, window: &DyadicWindow) -> Option<String> {
    let mut issues = Vec::new();
    for j in 0..freq.dim().min(window.dim()) {
        let h = freq.spacing()[j];
        let smallest = exp2i(window.lo()[j] as i64);
        if smallest < MIN_SAMPLES_PER_CELL * h {
            issues.push(format!(
                "axis {j}: 2^{} spans {:.3} samples",
                window.lo()[j],
                smallest / h
            ));
        }
        if exp2i(window.hi()[j] as i64) > freq.extent(j) {
            issues.push(format!("axis {j}: 2^{} exceeds the grid extent", window.hi()[j]));
        }
    }
    (!issues.is_empty()).then(|| issues.join("; "))
}

/// Smallest window with every cell resolved by at least
/// [`MIN_SAMPLES_PER_CELL`] samples, up to the grid extent.
pub fn resolved_window(freq: &GridSpec) -> Result<DyadicWindow> {
    let dim = freq.dim();
    let lo = (0..dim)
        .map(|j| (MIN_SAMPLES_PER_CELL * freq.spacing()[j]).log2().ceil() as i32)
        .collect();
    let hi = (0..dim).map(|j| crate::dyadic::floor_log2(freq.extent(j))).collect();
    DyadicWindow::new(lo, hi)
}
