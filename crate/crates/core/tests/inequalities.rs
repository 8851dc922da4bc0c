mod common;

use common::{rel_err, seeded_grid};
use steinlab::corpus::{generate, CorpusSpec, Factor, Generator, GridRequest};
use steinlab::dyadic::DyadicWindow;
use steinlab::fourier::{fourier_transform_onto, inverse_fourier_transform};
use steinlab::gridfn::conjugate_exponent;
use steinlab::norms::{dyadic_block_sum, level_sums};
use steinlab::rearrange::{dyadic_samples, repeated_rearrangement};
use steinlab::verify::hardy::{hardy_lower_sides, hardy_upper_sides};
use steinlab::verify::{
    check_anisotropic_stein, check_classical_fourier, check_cross_inequalities, check_frak_fourier, check_hardy,
    check_maximal_blocks, check_q_embedding, check_space_embeddings, check_stein_blocks, check_weighted_l2,
    CheckOptions, DyadicSequence, Mode, Status,
};
use steinlab::{DomainKind, GridSpec, RealGrid};

fn unit_cube(n: usize, cells: usize) -> RealGrid {
    let h = 2.0 / cells as f64;
    let spec = GridSpec::orthant(&vec![h; n], &vec![cells; n]).unwrap();
    RealGrid::from_fn(spec, DomainKind::PositiveOrthant, |x| {
        f64::from(u8::from(x.iter().all(|&t| t < 1.0)))
    })
    .unwrap()
}

fn gaussian(n: usize, sigma: f64) -> RealGrid {
    let spec = CorpusSpec::new(
        "g",
        Generator::Gaussian { sigma },
        0,
        GridRequest::centered(&vec![16.0; n], &vec![64; n]),
    );
    generate(&spec).unwrap().function
}

#[test]
fn cross_inequalities_at_the_unit_cube() {
    for n in [1, 2] {
        let f = unit_cube(n, 8);
        let [lower, shell] = check_cross_inequalities(&f, 0).unwrap();
        assert_eq!(lower.lhs, 1.0);
        assert!(rel_err(lower.rhs, 1.0) <= 1e-15);
        assert_eq!(lower.status, Status::Pass);
        assert_eq!(shell.status, Status::Pass);
    }
    let z = RealGrid::zeros(
        GridSpec::orthant(&[0.5, 0.5], &[4, 4]).unwrap(),
        DomainKind::PositiveOrthant,
    );
    for k in -3..3 {
        for r in check_cross_inequalities(&z, k).unwrap() {
            assert_eq!((r.lhs, r.rhs, r.status), (0.0, 0.0, Status::Pass));
        }
    }
}

#[test]
fn cross_inequalities_on_random_grids() {
    let mut checked = 0;
    for seed in 0..200 {
        let f = seeded_grid(seed, 32, DomainKind::FullLine);
        for k in -12..=14 {
            for r in check_cross_inequalities(&f, k).unwrap() {
                assert_eq!(r.mode, Mode::Exact);
                assert_ne!(
                    r.status,
                    Status::Fail,
                    "seed {seed} k {k}: {} {} > {}",
                    r.test_id,
                    r.lhs,
                    r.rhs
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 200 * 27 * 2);
}

#[test]
fn q_embedding_equality_and_order() {
    for seed in 0..20 {
        let f = seeded_grid(seed, 16, DomainKind::FullLine);
        for p in [1.5, 3.0] {
            let same = check_q_embedding(&f, p, 2.0, 2.0).unwrap();
            assert_eq!(same.lhs, same.rhs);
            for (q, q1) in [(1.0, 2.0), (2.0, 4.0), (1.0, f64::INFINITY)] {
                assert_eq!(check_q_embedding(&f, p, q, q1).unwrap().status, Status::Pass);
            }
        }
    }
    let f = seeded_grid(3, 8, DomainKind::FullLine);
    assert!(check_q_embedding(&f, 1.5, 4.0, 2.0).is_err());
}

/// `Σ_{k ≥ k₀} (2^{-αk}|c|)^q` summed term by term until it stops changing.
fn brute_geometric_tail(first: f64, alpha: f64, q: f64) -> f64 {
    let mut s = 0.0;
    let mut term = first.powf(q);
    while term > s * 1e-18 && term > 0.0 {
        s += term;
        term *= (-alpha * q).exp2();
    }
    s
}

#[test]
fn hardy_one_term_closed_form() {
    for alpha in [0.5, 1.0, 2.0] {
        for q in [0.5, 1.0, 2.0, f64::INFINITY] {
            for h in [1.0, 2.0, f64::INFINITY] {
                let b = DyadicSequence::new(3, vec![0.0, -1.75, 0.0]).unwrap();
                let expect = if q.is_infinite() {
                    1.0
                } else {
                    (1.0 - (-alpha * q).exp2()).powf(-1.0 / q)
                };
                for r in check_hardy(&b, alpha, q, h).unwrap() {
                    assert!(rel_err(r.ratio, expect) <= 1e-12, "{} α={alpha} q={q} h={h}", r.test_id);
                }
            }
        }
    }
}

#[test]
fn hardy_geometric_sequences() {
    // b_k = β^k on [s, e], h = 1: the cumulative sums are geometric series
    let (s, e) = (-4i64, 6i64);
    for beta in [0.5f64, 1.5, 3.0] {
        for alpha in [0.5, 1.0] {
            for q in [1.0, 2.0] {
                let values: Vec<f64> = (s..=e).map(|k| beta.powi(k as i32)).collect();
                let b = DyadicSequence::new(s, values).unwrap();
                let geo = |from: i64, to: i64| {
                    beta.powi(from as i32) * (beta.powi((to - from + 1) as i32) - 1.0) / (beta - 1.0)
                };

                let w = |k: i64| (-alpha * k as f64).exp2();
                let mut lhs: f64 = (s..=e).map(|k| (w(k) * geo(s, k)).powf(q)).sum();
                lhs += brute_geometric_tail(w(e + 1) * geo(s, e), alpha, q);
                let rhs: f64 = (s..=e).map(|k| (w(k) * beta.powi(k as i32)).powf(q)).sum();
                let (l, r) = hardy_lower_sides(&b, alpha, q, 1.0).unwrap();
                assert!(rel_err(l, lhs.powf(1.0 / q)) <= 1e-12);
                assert!(rel_err(r, rhs.powf(1.0 / q)) <= 1e-12);

                let w = |k: i64| (alpha * k as f64).exp2();
                let mut lhs: f64 = (s..=e).map(|k| (w(k) * geo(k, e)).powf(q)).sum();
                lhs += brute_geometric_tail(w(s - 1) * geo(s, e), alpha, q);
                let rhs: f64 = (s..=e).map(|k| (w(k) * beta.powi(k as i32)).powf(q)).sum();
                let (l, r) = hardy_upper_sides(&b, alpha, q, 1.0).unwrap();
                assert!(rel_err(l, lhs.powf(1.0 / q)) <= 1e-12);
                assert!(rel_err(r, rhs.powf(1.0 / q)) <= 1e-12);
            }
        }
    }
}

#[test]
fn hardy_zero_sequence_warns() {
    let b = DyadicSequence::new(-2, vec![0.0; 5]).unwrap();
    for r in check_hardy(&b, 1.0, 2.0, 2.0).unwrap() {
        assert_eq!((r.lhs, r.rhs, r.status), (0.0, 0.0, Status::Warn));
    }
}

#[test]
fn space_embeddings_are_dilation_stable_in_one_dimension() {
    let f = gaussian(1, 1.0);
    for p in [1.5, 3.0] {
        let ratios: Vec<f64> = (-3..=3)
            .map(|j| {
                check_space_embeddings(&f.dilated((j as f64).exp2()).unwrap(), p, 2.0)
                    .unwrap()
                    .ratio
            })
            .collect();
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.01, "p = {p}: {ratios:?}");
        assert!(min > 0.0 && max.is_finite());
    }
    let z = RealGrid::zeros(f.spec().clone(), DomainKind::FullLine);
    assert_eq!(check_space_embeddings(&z, 1.5, 2.0).unwrap().status, Status::Warn);
    assert!(check_space_embeddings(&f, 2.0, 2.0).is_err());
}

#[test]
fn weighted_l2_of_the_unit_cube() {
    // Φ_{s,q}(χ_{(0,1]ⁿ}) = (s/q)^{n/q}
    for n in [1usize, 2] {
        for p in [1.2, 1.5, 1.8] {
            let pc = conjugate_exponent(p).unwrap();
            let r = check_weighted_l2(&unit_cube(n, 16), p).unwrap();
            let lhs = (pc / 2.0).powf(n as f64 / 2.0);
            let rhs = (pc / p).powf(n as f64 / p);
            assert!(
                rel_err(r.lhs, lhs) <= 1e-12 && rel_err(r.rhs, rhs) <= 1e-12,
                "n {n} p {p}"
            );
        }
    }
    let z = RealGrid::zeros(GridSpec::orthant(&[1.0], &[4]).unwrap(), DomainKind::PositiveOrthant);
    assert_eq!(check_weighted_l2(&z, 1.5).unwrap().status, Status::Warn);
}

#[test]
fn stein_blocks_for_a_gaussian() {
    let opts = CheckOptions::default();
    for n in [1, 2] {
        let f = gaussian(n, 1.0);
        for r in check_stein_blocks(&f, 1.5, 1.5, &opts).unwrap() {
            assert_eq!(r.mode, Mode::Ratio);
            assert!(r.ratio.is_finite() && r.ratio > 0.0, "{}", r.test_id);
            assert_eq!(r.status, Status::Pass);
        }
    }
}

#[test]
fn cross_indicator_block_sum_contains_the_level_r_term() {
    // \hat f = χ_{G_r^*} for f = F^{-1} χ_{G_r^*}; the level-r diagonal holds
    // r + 1 lattice points in two dimensions
    let (p, q) = (1.5, 2.0);
    let pc = conjugate_exponent(p).unwrap();
    for r in [3u32, 5] {
        let side = (r as f64).exp2();
        let spec = CorpusSpec::new(
            "c",
            Generator::HyperbolicCrossIndicator { r },
            0,
            GridRequest::orthant(&[side, side], &[4 << r, 4 << r]),
        );
        let chi = generate(&spec).unwrap().function;
        let f = inverse_fourier_transform(&chi).unwrap();
        let fhat = fourier_transform_onto(&f, chi.spec()).unwrap();
        let err = fhat
            .values()
            .iter()
            .zip(chi.values())
            .map(|(a, &b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);

        let g = repeated_rearrangement(&fhat);
        let window = DyadicWindow::for_grid(g.spec(), 8).unwrap();
        let profile = dyadic_samples(&g, &window).unwrap();
        let level = level_sums(&profile, 2.0)[&(r as i64)];
        assert!(rel_err(level, (r + 1) as f64) <= 1e-9);
        let term = (r as f64 * q / pc).exp2() * level.powf(q / 2.0);
        assert!(dyadic_block_sum(&profile, pc, q).unwrap() >= term);
    }
}

#[test]
fn maximal_blocks_for_a_box() {
    let spec = CorpusSpec::new(
        "b",
        Generator::BoxIndicator {
            lower: vec![-1.0],
            upper: vec![1.0],
        },
        0,
        GridRequest::centered(&[16.0], &[128]),
    );
    let f = generate(&spec).unwrap().function;
    let opts = CheckOptions::default();
    let r = check_maximal_blocks(&f, 1.5, 2.0, 2.0, &opts).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    assert!(check_maximal_blocks(&f, 1.5, 1.2, 2.0, &opts).is_err());
    let z = RealGrid::zeros(f.spec().clone(), DomainKind::FullLine);
    assert_eq!(
        check_maximal_blocks(&z, 1.5, 2.0, 2.0, &opts).unwrap().status,
        Status::Warn
    );
}

fn tensor(factors: Vec<Factor>, extent: &[f64], count: &[usize]) -> RealGrid {
    let spec = CorpusSpec::new(
        "t",
        Generator::TensorProduct { factors },
        0,
        GridRequest::centered(extent, count),
    );
    generate(&spec).unwrap().function
}

#[test]
fn anisotropic_sides_factor_for_separable_boxes() {
    let opts = CheckOptions::default();
    let a = Factor::BoxIndicator {
        lower: -1.0,
        upper: 1.0,
    };
    let b = Factor::BoxIndicator {
        lower: -0.5,
        upper: 1.5,
    };
    let (p, q) = ([1.5, 1.8], [2.0, 1.5]);
    let both = check_anisotropic_stein(
        &tensor(vec![a.clone(), b.clone()], &[8.0, 8.0], &[16, 32]),
        &p,
        &q,
        &opts,
    )
    .unwrap();
    let one = check_anisotropic_stein(&tensor(vec![a], &[8.0], &[16]), &p[..1], &q[..1], &opts).unwrap();
    let two = check_anisotropic_stein(&tensor(vec![b], &[8.0], &[32]), &p[1..], &q[1..], &opts).unwrap();
    for i in 0..2 {
        assert!(
            rel_err(both[i].lhs, one[i].lhs * two[i].lhs) <= 1e-10,
            "{}",
            both[i].test_id
        );
        assert!(
            rel_err(both[i].rhs, one[i].rhs * two[i].rhs) <= 1e-10,
            "{}",
            both[i].test_id
        );
        assert!(rel_err(both[i].ratio, one[i].ratio * two[i].ratio) <= 1e-10);
    }
}

#[test]
fn anisotropic_for_a_tensor_gaussian() {
    let f = tensor(
        vec![Factor::Gaussian { sigma: 1.0 }, Factor::Gaussian { sigma: 0.5 }],
        &[16.0, 16.0],
        &[32, 32],
    );
    for r in check_anisotropic_stein(&f, &[1.5, 1.8], &[2.0, 2.0], &CheckOptions::default()).unwrap() {
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert_eq!(r.status, Status::Pass);
    }
    assert!(check_anisotropic_stein(&f, &[1.5, 1.8, 1.2], &[2.0; 3], &CheckOptions::default()).is_err());
}

#[test]
fn frak_and_classical_ratios_are_finite() {
    let opts = CheckOptions::default();
    let f = gaussian(2, 1.0);
    let rows: Vec<_> = check_frak_fourier(&f, 1.5, 2.0, &opts)
        .unwrap()
        .into_iter()
        .chain(check_classical_fourier(&f, 1.5, 2.0, &opts).unwrap())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r.ratio.is_finite() && r.ratio > 0.0, "{}", r.test_id);
    }
    assert!(check_frak_fourier(&f, 2.5, 2.0, &opts).is_err());
}
