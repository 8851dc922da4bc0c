//! Box-maximal averages `\bar f(t; M) = sup |∫_Q f| / |Q|` over grid-aligned
//! boxes `Q` with side lengths at least `t_j`.

use serde::{Deserialize, Serialize};

use crate::dyadic::{exp2i, DyadicWindow};
use crate::error::{Error, Result};
use crate::gridfn::{DomainKind, GridFunction, GridSpec, RealGrid, Scalar};
use crate::rearrange::{dyadic_samples, DyadicProfile};

/// Exhaustive enumeration is used while `∏ N_j²` stays below this bound
/// (64 cells per axis in two dimensions).
pub const EXHAUSTIVE_LIMIT: u128 = 64u128.pow(4);

/// How box sizes and positions are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalMode {
    /// Every index box.
    Exhaustive,
    /// Side lengths `2^a` cells (and the full axis), positions on a lattice of
    /// half the side length.
    Dyadic,
}

impl MaximalMode {
    /// Exhaustive when affordable, dyadic otherwise.
    pub fn auto(spec: &GridSpec) -> Self {
        let work = spec
            .count()
            .iter()
            .fold(1u128, |acc, &n| acc.saturating_mul((n as u128).pow(2)));
        if work <= EXHAUSTIVE_LIMIT {
            MaximalMode::Exhaustive
        } else {
            MaximalMode::Dyadic
        }
    }
}

/// Prefix sums of `value × cell volume` with a zero layer at index 0 of every
/// axis.
#[derive(Clone, Debug)]
pub struct SummedAreaTable<T: Scalar = f64> {
    count: Vec<usize>,
    strides: Vec<usize>,
    sums: Vec<T>,
}

impl<T: Scalar> SummedAreaTable<T> {
    pub fn new(f: &GridFunction<T>) -> Self {
        let spec = f.spec();
        let dim = spec.dim();
        let count = spec.count().to_vec();
        let mut strides = vec![1usize; dim];
        for j in 1..dim {
            strides[j] = strides[j - 1] * (count[j - 1] + 1);
        }
        let total = strides[dim - 1] * (count[dim - 1] + 1);
        let mut sums = vec![T::default(); total];
        let vol = spec.cell_volume();
        let mut idx = vec![0usize; dim];
        for (flat, &v) in f.values().iter().enumerate() {
            spec.unravel(flat, &mut idx);
            let padded: usize = idx.iter().zip(&strides).map(|(i, s)| (i + 1) * s).sum();
            sums[padded] = v * vol;
        }
        for j in 0..dim {
            let s = strides[j];
            let n = count[j] + 1;
            for flat in 0..total {
                if !(flat / s).is_multiple_of(n) {
                    sums[flat] = sums[flat] + sums[flat - s];
                }
            }
        }
        SummedAreaTable { count, strides, sums }
    }

    pub fn dim(&self) -> usize {
        self.count.len()
    }

    pub fn count(&self) -> &[usize] {
        &self.count
    }

    /// `∫_Q f` over the half-open index box `∏[lo_j, hi_j)`.
    pub fn box_integral(&self, lo: &[usize], hi: &[usize]) -> Result<T> {
        let dim = self.dim();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: lo.len().max(hi.len()),
            });
        }
        for j in 0..dim {
            if lo[j] > hi[j] || hi[j] > self.count[j] {
                return Err(Error::OutOfRange {
                    axis: j,
                    lo: lo[j],
                    hi: hi[j],
                    count: self.count[j],
                });
            }
        }
        if (0..dim).any(|j| lo[j] == hi[j]) {
            return Ok(T::default());
        }
        let base: usize = lo.iter().zip(&self.strides).map(|(l, s)| l * s).sum();
        let size: Vec<usize> = (0..dim).map(|j| hi[j] - lo[j]).collect();
        let corners = self.corners(&size);
        Ok(self.eval(base, &corners))
    }

    /// `(offset, sign)` of the `2ⁿ` corners of a box with the given side
    /// lengths, relative to its lower corner.
    fn corners(&self, size: &[usize]) -> Vec<(usize, bool)> {
        let dim = self.dim();
        (0..1usize << dim)
            .map(|mask| {
                let mut off = 0;
                let mut lower = 0;
                for (j, (&len, &stride)) in size.iter().zip(&self.strides).enumerate() {
                    if mask & (1 << j) != 0 {
                        off += len * stride;
                    } else {
                        lower += 1;
                    }
                }
                (off, lower % 2 == 0)
            })
            .collect()
    }

    #[inline]
    fn eval(&self, base: usize, corners: &[(usize, bool)]) -> T {
        let mut pos = T::default();
        let mut neg = T::default();
        for &(off, plus) in corners {
            if plus {
                pos = pos + self.sums[base + off];
            } else {
                neg = neg + self.sums[base + off];
            }
        }
        pos - neg
    }

    /// `max |∫_Q f|` over boxes of side lengths `size` (in cells) whose
    /// lower corners lie on the lattice `step_j ℕ`.
    fn max_abs_integral(&self, size: &[usize], step: &[usize]) -> f64 {
        let dim = self.dim();
        let corners = self.corners(size);
        let npos: Vec<usize> = (0..dim).map(|j| (self.count[j] - size[j]) / step[j] + 1).collect();
        let total: usize = npos.iter().product();
        let mut p = vec![0usize; dim];
        let mut best = 0.0f64;
        for flat in 0..total {
            let mut rest = flat;
            for j in 0..dim {
                p[j] = rest % npos[j];
                rest /= npos[j];
            }
            let base: usize = (0..dim).map(|j| p[j] * step[j] * self.strides[j]).sum();
            best = best.max(self.eval(base, &corners).modulus());
        }
        best
    }
}

/// Per-axis candidate side lengths (in cells) for a mode, all `≥ min`.
fn size_lists(count: &[usize], min: &[usize], mode: MaximalMode) -> Vec<Vec<usize>> {
    count
        .iter()
        .zip(min)
        .map(|(&n, &c)| match mode {
            MaximalMode::Exhaustive => (c..=n).collect(),
            MaximalMode::Dyadic => {
                let mut v: Vec<usize> = (0..usize::BITS)
                    .map(|a| 1usize << a)
                    .take_while(|&s| s < n)
                    .filter(|&s| s >= c)
                    .collect();
                v.push(n);
                v
            }
        })
        .collect()
}

fn step_for(size: usize, mode: MaximalMode) -> usize {
    match mode {
        MaximalMode::Exhaustive => 1,
        MaximalMode::Dyadic => (size / 2).max(1),
    }
}

/// `max_Q |∫_Q f| / |Q|` for every combination of the listed side lengths,
/// axis 0 fastest.
fn size_maxima<T: Scalar>(
    sat: &SummedAreaTable<T>,
    spec: &GridSpec,
    sizes: &[Vec<usize>],
    mode: MaximalMode,
) -> Vec<f64> {
    let dim = spec.dim();
    let lens: Vec<usize> = sizes.iter().map(Vec::len).collect();
    let total: usize = lens.iter().product();
    let vol = spec.cell_volume();
    crate::par::map_range(total, |flat| {
        let mut rest = flat;
        let mut size = vec![0usize; dim];
        let mut step = vec![0usize; dim];
        for j in 0..dim {
            size[j] = sizes[j][rest % lens[j]];
            rest /= lens[j];
            step[j] = step_for(size[j], mode);
        }
        let cells: f64 = size.iter().map(|&s| s as f64).product();
        sat.max_abs_integral(&size, &step) / (cells * vol)
    })
}

/// Smallest admissible side length in cells for each threshold.
fn threshold_cells(spec: &GridSpec, t: &[f64]) -> Result<Vec<usize>> {
    if t.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: t.len(),
        });
    }
    (0..spec.dim())
        .map(|j| {
            let tj = t[j];
            if !(tj >= 0.0 && tj.is_finite()) {
                return Err(Error::InvalidParameter(format!("threshold {tj} on axis {j}")));
            }
            let c = ((tj / spec.spacing()[j]).ceil() as usize).max(1);
            if c > spec.count()[j] {
                return Err(Error::NoAdmissibleBox {
                    axis: j,
                    threshold: tj,
                    extent: spec.extent(j),
                });
            }
            Ok(c)
        })
        .collect()
}

/// `\bar f(t; M)` by enumeration of every admissible index box. Thresholds
/// are rounded up to whole cells.
pub fn box_maximal_average<T: Scalar>(f: &GridFunction<T>, t: &[f64]) -> Result<f64> {
    box_maximal_average_with(f, t, MaximalMode::Exhaustive)
}

pub fn box_maximal_average_with<T: Scalar>(f: &GridFunction<T>, t: &[f64], mode: MaximalMode) -> Result<f64> {
    let spec = f.spec();
    let c = threshold_cells(spec, t)?;
    let sat = SummedAreaTable::new(f);
    let sizes = size_lists(spec.count(), &c, mode);
    Ok(size_maxima(&sat, spec, &sizes, mode).into_iter().fold(0.0, f64::max))
}

/// `t ↦ \bar f(t; M)` on the positive orthant: cell `i` of axis `j` holds the
/// value for thresholds in `(i h_j, (i+1) h_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalFunction {
    pub grid: RealGrid,
    pub mode: MaximalMode,
}

pub fn maximal_function_grid<T: Scalar>(f: &GridFunction<T>, mode: MaximalMode) -> Result<MaximalFunction> {
    let spec = f.spec();
    let dim = spec.dim();
    let count = spec.count();
    let sat = SummedAreaTable::new(f);
    let sizes = size_lists(count, &vec![1; dim], mode);
    let mut m = size_maxima(&sat, spec, &sizes, mode);
    let lens: Vec<usize> = sizes.iter().map(Vec::len).collect();
    // suffix maxima over the size lattice
    let mut stride = 1;
    for &n in &lens {
        for flat in (0..m.len()).rev() {
            if (flat / stride) % n + 1 < n {
                m[flat] = m[flat].max(m[flat + stride]);
            }
        }
        stride *= n;
    }
    // cell c-1 takes the entry of the smallest listed size ≥ c
    let pick: Vec<Vec<usize>> = (0..dim)
        .map(|j| (1..=count[j]).map(|c| sizes[j].partition_point(|&s| s < c)).collect())
        .collect();
    let out_spec = spec.to_orthant();
    let mut idx = vec![0usize; dim];
    let values = (0..out_spec.len())
        .map(|flat| {
            out_spec.unravel(flat, &mut idx);
            let mut at = 0;
            let mut s = 1;
            for j in 0..dim {
                at += pick[j][idx[j]] * s;
                s *= lens[j];
            }
            m[at]
        })
        .collect();
    Ok(MaximalFunction {
        grid: RealGrid::new(out_spec, values, DomainKind::PositiveOrthant)?,
        mode,
    })
}

/// `\bar f(2^m; M)` on a window whose largest points lie inside the grid.
pub fn dyadic_maximal_profile<T: Scalar>(
    f: &GridFunction<T>,
    window: &DyadicWindow,
    mode: MaximalMode,
) -> Result<(DyadicProfile, MaximalMode)> {
    let spec = f.spec();
    if window.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: window.dim(),
        });
    }
    for j in 0..spec.dim() {
        let t = exp2i(window.hi()[j] as i64);
        if t > spec.extent(j) {
            return Err(Error::NoAdmissibleBox {
                axis: j,
                threshold: t,
                extent: spec.extent(j),
            });
        }
    }
    let mf = maximal_function_grid(f, mode)?;
    Ok((dyadic_samples(&mf.grid, window)?, mf.mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthant(spacing: &[f64], count: &[usize], values: Vec<f64>) -> RealGrid {
        RealGrid::new(GridSpec::orthant(spacing, count).unwrap(), values, DomainKind::FullLine).unwrap()
    }

    /// Direct summation over every box with at least `c` cells per axis (2-D).
    fn brute_2d(f: &RealGrid, c: [usize; 2]) -> f64 {
        let [n1, n2] = [f.spec().count()[0], f.spec().count()[1]];
        let (h1, h2) = (f.spec().spacing()[0], f.spec().spacing()[1]);
        let mut best = 0.0f64;
        for a1 in 0..n1 {
            for b1 in a1 + c[0]..=n1 {
                for a2 in 0..n2 {
                    for b2 in a2 + c[1]..=n2 {
                        let mut s = 0.0;
                        for i2 in a2..b2 {
                            for i1 in a1..b1 {
                                s += f.get(&[i1, i2]) * h1 * h2;
                            }
                        }
                        let vol = (b1 - a1) as f64 * h1 * (b2 - a2) as f64 * h2;
                        best = best.max(s.abs() / vol);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn box_integral_examples() {
        let f = orthant(&[1.0, 1.0], &[3, 4], vec![1.0; 12]);
        let sat = SummedAreaTable::new(&f);
        assert_eq!(sat.box_integral(&[0, 0], &[3, 4]).unwrap(), 12.0);
        assert_eq!(sat.box_integral(&[1, 2], &[1, 4]).unwrap(), 0.0);
        assert!(matches!(
            sat.box_integral(&[0, 0], &[4, 1]),
            Err(Error::OutOfRange { axis: 0, .. })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let spec = GridSpec::new(vec![0.0; 3], vec![0.5, 0.25, 2.0], vec![5, 6, 4]).unwrap();
        let vals: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = RealGrid::new(spec.clone(), vals, DomainKind::FullLine).unwrap();
        let sat = SummedAreaTable::new(&f);
        for _ in 0..100 {
            let mut lo = [0; 3];
            let mut hi = [0; 3];
            for j in 0..3 {
                let a = rng.gen_range(0..=spec.count()[j]);
                let b = rng.gen_range(0..=spec.count()[j]);
                (lo[j], hi[j]) = (a.min(b), a.max(b));
            }
            let mut direct = 0.0;
            let mut idx = [0; 3];
            for flat in 0..spec.len() {
                spec.unravel(flat, &mut idx);
                if (0..3).all(|j| idx[j] >= lo[j] && idx[j] < hi[j]) {
                    direct += f.values()[flat] * spec.cell_volume();
                }
            }
            assert!((sat.box_integral(&lo, &hi).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_square_examples() {
        // indicator of [0,1]² on a 1/2-grid of [0,2]²
        let mut v = vec![0.0; 16];
        for i2 in 0..2 {
            for i1 in 0..2 {
                v[i1 + 4 * i2] = 1.0;
            }
        }
        let f = orthant(&[0.5, 0.5], &[4, 4], v);
        assert_eq!(box_maximal_average(&f, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(box_maximal_average(&f, &[2.0, 1.0]).unwrap(), 0.5);
        assert!(matches!(
            box_maximal_average(&f, &[2.5, 1.0]),
            Err(Error::NoAdmissibleBox { axis: 0, .. })
        ));
        assert!(box_maximal_average(&f, &[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let vals: Vec<f64> = (0..36).map(|_| rng.gen_range(-8i32..=8) as f64).collect();
            let f = orthant(&[0.5, 1.0], &[6, 6], vals);
            let grid = maximal_function_grid(&f, MaximalMode::Exhaustive).unwrap();
            for c1 in 1..=6 {
                for c2 in 1..=6 {
                    let expect = brute_2d(&f, [c1, c2]);
                    let t = [c1 as f64 * 0.5, c2 as f64];
                    assert_eq!(box_maximal_average(&f, &t).unwrap(), expect);
                    assert_eq!(grid.grid.get(&[c1 - 1, c2 - 1]), expect);
                }
            }
        }
    }

    #[test]
    fn dyadic_mode_is_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = orthant(&[1.0, 1.0], &[10, 10], vals);
        let ex = maximal_function_grid(&f, MaximalMode::Exhaustive).unwrap().grid;
        let dy = maximal_function_grid(&f, MaximalMode::Dyadic).unwrap().grid;
        crate::norms::require_monotone(&ex).unwrap();
        crate::norms::require_monotone(&dy).unwrap();
        for (a, b) in dy.values().iter().zip(ex.values()) {
            assert!(a <= b);
        }
        // the full box is always a candidate
        assert_eq!(dy.values()[99], ex.values()[99]);
    }

    #[test]
    fn mode_selection() {
        let small = GridSpec::orthant(&[1.0, 1.0], &[64, 64]).unwrap();
        let big = GridSpec::orthant(&[1.0, 1.0], &[65, 64]).unwrap();
        assert_eq!(MaximalMode::auto(&small), MaximalMode::Exhaustive);
        assert_eq!(MaximalMode::auto(&big), MaximalMode::Dyadic);
    }

    #[test]
    fn profile_of_constant_and_zero() {
        let f = orthant(&[0.25, 0.25], &[8, 8], vec![1.0; 64]);
        let w = DyadicWindow::cube(2, -6, 1).unwrap();
        let (p, mode) = dyadic_maximal_profile(&f, &w, MaximalMode::Exhaustive).unwrap();
        assert_eq!(mode, MaximalMode::Exhaustive);
        assert!(p.values().iter().all(|&v| v == 1.0));
        let z = orthant(&[0.25, 0.25], &[8, 8], vec![0.0; 64]);
        let (p, _) = dyadic_maximal_profile(&z, &w, MaximalMode::Exhaustive).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        let too_far = DyadicWindow::cube(2, -6, 2).unwrap();
        assert!(dyadic_maximal_profile(&f, &too_far, MaximalMode::Exhaustive).is_err());
    }
}
