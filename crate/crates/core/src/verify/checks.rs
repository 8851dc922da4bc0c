//! Inequality checks on one grid function. Constant-free statements produce
//! exact-mode reports; statements with unspecified constants produce
//! ratio-mode reports.

use std::ops::RangeInclusive;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dyadic::{exp2i, floor_log2, BlockDecomposition, DyadicWindow};
use crate::error::{Error, Result};
use crate::fourier::{fourier_transform, tail_warning};
use crate::gridfn::{conjugate_exponent, ComplexGrid, GridFunction, LorentzParams, RealGrid, Scalar, StepFunction};
use crate::maximal::{maximal_function_grid, MaximalFunction, MaximalMode};
use crate::norms::{
    anisotropic_lorentz_norm, dyadic_block_sum, dyadic_block_sum_with, frak_norm_from, lorentz_norm,
    mixed_lorentz_norm, n_norm, phi_functional,
};
use crate::rearrange::{decreasing_rearrangement, dyadic_samples, repeated_rearrangement, DyadicProfile};

use super::report::{CaseInfo, VerificationReport, EXACT_EPS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Zero-padding factor of the Fourier transform.
    pub pad: usize,
    /// Octaves below the cell size covered by dyadic profile windows.
    pub depth: u32,
    /// Forced maximal-function mode; `None` picks by grid size.
    pub maximal_mode: Option<MaximalMode>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            pad: 2,
            depth: 32,
            maximal_mode: None,
        }
    }
}

/// `f*`, `f^{*₁…*ₙ}` and the shell decomposition of its square.
#[derive(Clone, Debug)]
pub struct Rearranged {
    pub star: StepFunction,
    pub repeated: RealGrid,
    pub blocks: BlockDecomposition,
}

impl Rearranged {
    pub fn new<T: Scalar>(f: &GridFunction<T>) -> Result<Self> {
        let repeated = repeated_rearrangement(f);
        let blocks = BlockDecomposition::new(&repeated, 2.0)?;
        Ok(Rearranged {
            star: decreasing_rearrangement(f),
            repeated,
            blocks,
        })
    }

    pub fn frak(&self, p: f64, q: f64) -> Result<f64> {
        frak_norm_from(&self.blocks, p, q)
    }

    pub fn profile(&self, depth: u32) -> Result<DyadicProfile> {
        let w = DyadicWindow::for_grid(self.repeated.spec(), depth)?;
        dyadic_samples(&self.repeated, &w)
    }

    /// `‖f‖_{L_{p,q}}^q`, or the norm itself for `q = ∞`.
    pub fn lorentz_pow(&self, p: f64, q: f64) -> Result<f64> {
        let v = lorentz_norm(&self.star, p, q)?;
        Ok(if q.is_infinite() { v } else { v.powf(q) })
    }
}

/// `\hat f` with its rearrangements and (on demand) maximal function.
#[derive(Debug)]
pub struct FourierSide {
    pub transform: ComplexGrid,
    pub rearranged: Rearranged,
    maximal: OnceLock<Result<MaximalFunction>>,
    mode: Option<MaximalMode>,
}

impl FourierSide {
    pub fn new(f: &RealGrid, opts: &CheckOptions) -> Result<Self> {
        let transform = fourier_transform(f, opts.pad)?;
        let rearranged = Rearranged::new(&transform)?;
        Ok(FourierSide {
            transform,
            rearranged,
            maximal: OnceLock::new(),
            mode: opts.maximal_mode,
        })
    }

    /// `t ↦ \bar{\hat f}(t; M)` on the frequency grid.
    pub fn maximal(&self) -> Result<&MaximalFunction> {
        self.maximal
            .get_or_init(|| {
                let mode = self.mode.unwrap_or_else(|| MaximalMode::auto(self.transform.spec()));
                maximal_function_grid(&self.transform, mode)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn pow_or_sup(v: f64, q: f64) -> f64 {
    if q.is_infinite() {
        v
    } else {
        v.powf(q)
    }
}

fn require_stein_range(p: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("need 1 < p < 2, got {p}")));
    }
    conjugate_exponent(p)
}

/// A grid function prepared for every check.
#[derive(Debug)]
pub struct Prepared {
    pub f: RealGrid,
    pub case: CaseInfo,
    pub spatial: Rearranged,
    opts: CheckOptions,
    fourier: OnceLock<Result<FourierSide>>,
}

impl Prepared {
    pub fn new(f: RealGrid, case: CaseInfo, opts: &CheckOptions) -> Result<Self> {
        let spatial = Rearranged::new(&f)?;
        Ok(Prepared {
            f,
            case,
            spatial,
            opts: opts.clone(),
            fourier: OnceLock::new(),
        })
    }

    pub fn fourier(&self) -> Result<&FourierSide> {
        self.fourier
            .get_or_init(|| FourierSide::new(&self.f, &self.opts))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn tag(&self, r: VerificationReport) -> VerificationReport {
        r.with_case(&self.case)
    }

    /// Tags a Fourier-side report and attaches the truncation warning.
    fn tag_fourier(&self, r: VerificationReport) -> VerificationReport {
        let mut r = self.tag(r);
        if let Some(w) = tail_warning(&self.f) {
            r.warn(&format!("tail: {w}"));
        }
        r
    }

    /// Levels from well below one cell up to the total measure of the grid.
    pub fn cross_levels(&self) -> RangeInclusive<i64> {
        let spec = self.f.spec();
        let lo = floor_log2(spec.cell_volume()) as i64 - 4;
        let total = spec.cell_volume() * spec.len() as f64;
        let hi = floor_log2(total) as i64 + 2;
        lo..=hi
    }

    /// `∫₀^{2^k} (f*)² ≤ ∫_{G_k} F²` and `∫_{Λ_k} F² ≤ ∫_{2^{k-1}}^∞ (f*)²`.
    pub fn cross(&self, k: i64) -> Result<[VerificationReport; 2]> {
        let s = &self.spatial;
        let lower = s.star.integral(2.0, 0.0, exp2i(k))?;
        let cross = s.blocks.cross_integral(k)?;
        let shell = s.blocks.block_integral(k);
        let tail = s.star.integral(2.0, exp2i(k - 1), f64::INFINITY)?;
        let kk = Some(k as f64);
        Ok([
            self.tag(VerificationReport::exact("cross_lower", lower, cross, EXACT_EPS).with_params(&[], &[], kk)),
            self.tag(VerificationReport::exact("cross_shell", shell, tail, EXACT_EPS).with_params(&[], &[], kk)),
        ])
    }

    /// `∫ (f*)² = ∫ (f^{*₁…*ₙ})²`.
    pub fn l2_identity(&self) -> VerificationReport {
        let a = self.spatial.star.integral(2.0, 0.0, f64::INFINITY).unwrap_or(f64::NAN);
        self.tag(VerificationReport::exact_eq(
            "l2_identity",
            a,
            self.spatial.blocks.total(),
            EXACT_EPS,
        ))
    }

    /// `‖f*‖_p = ‖f‖_p` and `‖f^{*₁…*ₙ}‖_p = ‖f‖_p`.
    pub fn lp_preservation(&self, p: f64) -> Result<[VerificationReport; 2]> {
        let direct = self.f.lp_norm(p);
        let star = self.spatial.star.integral(p, 0.0, f64::INFINITY)?.powf(1.0 / p);
        let rep = self.spatial.repeated.lp_norm(p);
        Ok([
            self.tag(
                VerificationReport::exact_eq("lp_rearranged", star, direct, EXACT_EPS).with_params(&[p], &[], None),
            ),
            self.tag(VerificationReport::exact_eq("lp_repeated", rep, direct, EXACT_EPS).with_params(&[p], &[], None)),
        ])
    }

    /// `‖f‖_{𝔏_{p,q₁}} ≤ ‖f‖_{𝔏_{p,q}}` for `q ≤ q₁`.
    pub fn q_embedding(&self, p: f64, q: f64, q1: f64) -> Result<VerificationReport> {
        if q > q1 {
            return Err(Error::InvalidParameter(format!("need q ≤ q₁, got {q} > {q1}")));
        }
        let lhs = self.spatial.frak(p, q1)?;
        let rhs = self.spatial.frak(p, q)?;
        Ok(self.tag(VerificationReport::exact("q_embedding", lhs, rhs, EXACT_EPS).with_params(&[p], &[q, q1], None)))
    }

    /// `‖f‖_{𝔏_{p,q}} ≲ ‖f‖_{L_{p,q}}` for `1 < p < 2`, the reverse for
    /// `2 < p < ∞`.
    pub fn space_embedding(&self, p: f64, q: f64) -> Result<VerificationReport> {
        let frak = self.spatial.frak(p, q)?;
        let lor = lorentz_norm(&self.spatial.star, p, q)?;
        let r = if p > 1.0 && p < 2.0 {
            VerificationReport::ratio("embed_lorentz_frak", frak, lor)
        } else if p > 2.0 && p.is_finite() {
            VerificationReport::ratio("embed_frak_lorentz", lor, frak)
        } else {
            return Err(Error::InvalidParameter(format!("need 1 < p < 2 or 2 < p < ∞, got {p}")));
        };
        Ok(self.tag(r.with_params(&[p], &[q], None)))
    }

    /// `Φ_{p',2}(g^{*₁…*ₙ}) ≲ Φ_{p',p}(g^{*₁…*ₙ})`, the weighted `L²` norm
    /// against `(∫ (t₁…tₙ)^{p-2} (g^{*₁…*ₙ})^p)^{1/p}`.
    pub fn weighted_l2(&self, p: f64) -> Result<VerificationReport> {
        let pc = require_stein_range(p)?;
        let g = &self.spatial.repeated;
        let lhs = phi_functional(g, &LorentzParams::scalar(pc, 2.0)?)?;
        let rhs = phi_functional(g, &LorentzParams::scalar(pc, p)?)?;
        Ok(self.tag(VerificationReport::ratio("weighted_l2", lhs, rhs).with_params(&[p], &[], None)))
    }

    /// Fourier-side diagonal block sum against `‖f‖^q_{L_{p,q}}`, and
    /// `‖\hat f‖^q_{L_{p',q}}` against the block sum of `f`.
    pub fn stein_blocks(&self, p: f64, q: f64) -> Result<[VerificationReport; 2]> {
        let pc = require_stein_range(p)?;
        let fs = self.fourier()?;
        let depth = self.opts.depth;
        let hat_blocks = dyadic_block_sum(&fs.rearranged.profile(depth)?, pc, q)?;
        let f_lor = self.spatial.lorentz_pow(p, q)?;
        let hat_lor = fs.rearranged.lorentz_pow(pc, q)?;
        let f_blocks = dyadic_block_sum(&self.spatial.profile(depth)?, p, q)?;
        Ok([
            self.tag_fourier(VerificationReport::ratio("stein_block", hat_blocks, f_lor).with_params(&[p], &[q], None)),
            self.tag_fourier(
                VerificationReport::ratio("stein_block_dual", hat_lor, f_blocks).with_params(&[p], &[q], None),
            ),
        ])
    }

    /// Block sum of `\bar{\hat f}(2^m; M)` in `ℓ^r` within levels against
    /// `‖f‖^q_{L_{p,q}}`, `1 < p < r`.
    pub fn maximal_blocks(&self, p: f64, r: f64, q: f64) -> Result<VerificationReport> {
        let pc = require_stein_range(p)?;
        if !(r > p && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("need p < r < ∞, got p = {p}, r = {r}")));
        }
        let fs = self.fourier()?;
        let mf = fs.maximal()?;
        let w = DyadicWindow::for_grid(mf.grid.spec(), self.opts.depth)?;
        let prof = dyadic_samples(&mf.grid, &w)?;
        let lhs = dyadic_block_sum_with(&prof, pc, q, r)?;
        let rhs = self.spatial.lorentz_pow(p, q)?;
        let mut rep =
            self.tag_fourier(VerificationReport::ratio("maximal_block", lhs, rhs).with_params(&[p], &[q], Some(r)));
        if mf.mode == MaximalMode::Dyadic {
            rep.add_note("dyadic maximal");
        }
        Ok(rep)
    }

    /// `‖\hat f‖_{N_{p',q}(M)} ≲ ‖f‖_{L*_{p,q}}` and the weak form
    /// `‖\hat f‖_{N_{p',∞}(M)} ≲ ‖f‖_{A_{p,1}}`.
    pub fn anisotropic(&self, p: &[f64], q: &[f64]) -> Result<[VerificationReport; 2]> {
        let n = self.f.dim();
        let params = LorentzParams::vector(p.to_vec(), q.to_vec())?;
        params.require_dim(n)?;
        let pv: Vec<f64> = (0..n).map(|j| params.p(j)).collect();
        let qv: Vec<f64> = (0..n).map(|j| params.q(j)).collect();
        let pc = pv.iter().map(|&x| conjugate_exponent(x)).collect::<Result<Vec<_>>>()?;
        let fs = self.fourier()?;
        let mf = fs.maximal()?;
        let lhs = n_norm(&mf.grid, &LorentzParams::vector(pc.clone(), qv.clone())?)?;
        let rhs = anisotropic_lorentz_norm(&self.f, &LorentzParams::vector(pv.clone(), qv.clone())?)?;
        let weak_lhs = n_norm(&mf.grid, &LorentzParams::vector(pc, vec![f64::INFINITY; n])?)?;
        let weak_rhs = mixed_lorentz_norm(&self.f, &LorentzParams::vector(pv.clone(), vec![1.0; n])?)?;
        let mut out = [
            self.tag_fourier(VerificationReport::ratio("anisotropic_maximal", lhs, rhs).with_params(&pv, &qv, None)),
            self.tag_fourier(
                VerificationReport::ratio("anisotropic_maximal_weak", weak_lhs, weak_rhs).with_params(
                    &pv,
                    &[f64::INFINITY],
                    None,
                ),
            ),
        ];
        if mf.mode == MaximalMode::Dyadic {
            out.iter_mut().for_each(|r| r.add_note("dyadic maximal"));
        }
        Ok(out)
    }

    /// `‖\hat f‖_{𝔏_{p',q}} ≲ ‖f‖_{L_{p,q}}`, `‖\hat f‖_{L_{p',q}} ≲
    /// ‖f‖_{𝔏_{p,q}}` and `‖\hat f‖_{𝔏_{p',∞}} ≲ ‖f‖_p`.
    pub fn frak_fourier(&self, p: f64, q: f64) -> Result<[VerificationReport; 3]> {
        let pc = require_stein_range(p)?;
        let fs = self.fourier()?;
        let hat = &fs.rearranged;
        let a = VerificationReport::ratio(
            "frak_of_fourier",
            hat.frak(pc, q)?,
            lorentz_norm(&self.spatial.star, p, q)?,
        );
        let b = VerificationReport::ratio(
            "fourier_of_frak",
            lorentz_norm(&hat.star, pc, q)?,
            self.spatial.frak(p, q)?,
        );
        let c = VerificationReport::ratio("frak_of_fourier_weak", hat.frak(pc, f64::INFINITY)?, self.f.lp_norm(p));
        Ok([
            self.tag_fourier(a.with_params(&[p], &[q], None)),
            self.tag_fourier(b.with_params(&[p], &[q], None)),
            self.tag_fourier(c.with_params(&[p], &[f64::INFINITY], None)),
        ])
    }

    /// `‖\hat f‖_{L_{p',q}} ≲ ‖f‖_{L_{p,q}}`,
    /// `∫ t^{p-2} (\hat f*)^p ≲ ‖f‖_p^p` and
    /// `(∫ (t₁…tₙ)^{p-2} (\hat f^{*₁…*ₙ})^p)^{1/p} ≲ ‖f‖_p`.
    pub fn classical(&self, p: f64, q: f64) -> Result<[VerificationReport; 3]> {
        let pc = require_stein_range(p)?;
        let fs = self.fourier()?;
        let hat = &fs.rearranged;
        let lp = self.f.lp_norm(p);
        let a = VerificationReport::ratio(
            "fourier_lorentz",
            lorentz_norm(&hat.star, pc, q)?,
            lorentz_norm(&self.spatial.star, p, q)?,
        );
        let b = VerificationReport::ratio("fourier_weighted", lorentz_norm(&hat.star, pc, p)?.powf(p), lp.powf(p));
        let c = VerificationReport::ratio(
            "fourier_repeated_weighted",
            phi_functional(&hat.repeated, &LorentzParams::scalar(pc, p)?)?,
            lp,
        );
        Ok([
            self.tag_fourier(a.with_params(&[p], &[q], None)),
            self.tag_fourier(b.with_params(&[p], &[p], None)),
            self.tag_fourier(c.with_params(&[p], &[p], None)),
        ])
    }

    /// `‖f‖^q_{𝔏_{p,q}}` against the diagonal block sum of `f` with
    /// weights `2^{kq/p}`.
    pub fn block_equivalence(&self, p: f64, q: f64) -> Result<VerificationReport> {
        let lhs = pow_or_sup(self.spatial.frak(p, q)?, q);
        let rhs = dyadic_block_sum(&self.spatial.profile(self.opts.depth)?, p, q)?;
        Ok(self.tag(VerificationReport::ratio("frak_block_equivalence", lhs, rhs).with_params(&[p], &[q], None)))
    }
}

fn prepare<T: Scalar>(f: &GridFunction<T>) -> Result<Prepared> {
    let case = CaseInfo {
        n: f.dim(),
        ..CaseInfo::default()
    };
    Prepared::new(f.modulus(), case, &CheckOptions::default())
}

fn prepare_with(f: &RealGrid, opts: &CheckOptions) -> Result<Prepared> {
    let case = CaseInfo {
        n: f.dim(),
        ..CaseInfo::default()
    };
    Prepared::new(f.clone(), case, opts)
}

/// Exact-mode reports for both cross inequalities at level `k`.
pub fn check_cross_inequalities<T: Scalar>(f: &GridFunction<T>, k: i64) -> Result<[VerificationReport; 2]> {
    prepare(f)?.cross(k)
}

pub fn check_q_embedding<T: Scalar>(f: &GridFunction<T>, p: f64, q: f64, q1: f64) -> Result<VerificationReport> {
    prepare(f)?.q_embedding(p, q, q1)
}

pub fn check_space_embeddings<T: Scalar>(f: &GridFunction<T>, p: f64, q: f64) -> Result<VerificationReport> {
    prepare(f)?.space_embedding(p, q)
}

pub fn check_weighted_l2<T: Scalar>(g: &GridFunction<T>, p: f64) -> Result<VerificationReport> {
    prepare(g)?.weighted_l2(p)
}

pub fn check_stein_blocks(f: &RealGrid, p: f64, q: f64, opts: &CheckOptions) -> Result<[VerificationReport; 2]> {
    prepare_with(f, opts)?.stein_blocks(p, q)
}

pub fn check_maximal_blocks(f: &RealGrid, p: f64, r: f64, q: f64, opts: &CheckOptions) -> Result<VerificationReport> {
    prepare_with(f, opts)?.maximal_blocks(p, r, q)
}

pub fn check_anisotropic_stein(
    f: &RealGrid,
    p: &[f64],
    q: &[f64],
    opts: &CheckOptions,
) -> Result<[VerificationReport; 2]> {
    prepare_with(f, opts)?.anisotropic(p, q)
}

pub fn check_frak_fourier(f: &RealGrid, p: f64, q: f64, opts: &CheckOptions) -> Result<[VerificationReport; 3]> {
    prepare_with(f, opts)?.frak_fourier(p, q)
}

pub fn check_classical_fourier(f: &RealGrid, p: f64, q: f64, opts: &CheckOptions) -> Result<[VerificationReport; 3]> {
    prepare_with(f, opts)?.classical(p, q)
}

pub fn check_block_equivalence<T: Scalar>(f: &GridFunction<T>, p: f64, q: f64) -> Result<VerificationReport> {
    prepare(f)?.block_equivalence(p, q)
}
