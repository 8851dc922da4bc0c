mod common;

use common::{centered_grid, rel_err};
use proptest::prelude::*;
use steinlab::norms::require_monotone;
use steinlab::rearrange::{decreasing_rearrangement, rearrangement_from_pairs, repeated_rearrangement};
use steinlab::{DomainKind, GridSpec, RealGrid};

fn brute_distribution(f: &RealGrid, s: f64) -> f64 {
    f.values().iter().filter(|v| v.abs() > s).count() as f64 * f.spec().cell_volume()
}

proptest! {
    #[test]
    fn rearrangements_preserve_lp(f in centered_grid(2, 12), p in prop::sample::select(vec![1.0, 2.0, 3.0, 0.5])) {
        let direct = f.lp_norm(p);
        let star = decreasing_rearrangement(&f).integral(p, 0.0, f64::INFINITY).unwrap().powf(1.0 / p);
        let rep = repeated_rearrangement(&f).lp_norm(p);
        prop_assert!(rel_err(star, direct) <= 1e-12);
        prop_assert!(rel_err(rep, direct) <= 1e-12);
    }

    #[test]
    fn star_is_equimeasurable(f in centered_grid(2, 10)) {
        let star = decreasing_rearrangement(&f);
        let mut levels: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        levels.push(0.0);
        for &s in &levels {
            let from_star: f64 = {
                let mut t = 0.0;
                for piece in star.pieces() {
                    if piece.value > s {
                        t += piece.width;
                    }
                }
                t
            };
            prop_assert!(rel_err(from_star, brute_distribution(&f, s)) <= 1e-12);
        }
    }

    #[test]
    fn star_is_non_increasing(f in centered_grid(2, 10)) {
        let star = decreasing_rearrangement(&f);
        for w in star.pieces().windows(2) {
            prop_assert!(w[0].value > w[1].value);
        }
        prop_assert!(star.pieces().iter().all(|p| p.value > 0.0 && p.width > 0.0));
        prop_assert_eq!(star.max_value(), f.lp_norm(f64::INFINITY));
    }

    #[test]
    fn repeated_is_monotone_on_each_axis(f in centered_grid(2, 10)) {
        let g = repeated_rearrangement(&f);
        prop_assert_eq!(g.domain(), DomainKind::PositiveOrthant);
        prop_assert!(require_monotone(&g).is_ok());
        // same multiset of moduli
        let mut a: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        let mut b = g.values().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn star_is_homogeneous(f in centered_grid(2, 8), c in -5.0..5.0f64) {
        let lhs = decreasing_rearrangement(&f.scaled(c));
        let rhs = decreasing_rearrangement(&f).scaled(c.abs());
        prop_assert!(rel_err(lhs.integral(1.0, 0.0, f64::INFINITY).unwrap(), rhs.integral(1.0, 0.0, f64::INFINITY).unwrap()) <= 1e-12);
        prop_assert_eq!(lhs.pieces().len(), rhs.pieces().len());
    }

    #[test]
    fn star_ignores_cell_order(f in centered_grid(1, 16), rot in 0usize..16) {
        let mut v = f.values().to_vec();
        let k = rot % v.len();
        v.rotate_left(k);
        let g = RealGrid::new(f.spec().clone(), v, DomainKind::FullLine).unwrap();
        prop_assert_eq!(decreasing_rearrangement(&f), decreasing_rearrangement(&g));
    }
}

#[test]
fn hand_computed_example() {
    let spec = GridSpec::centered(&[4.0], &[4]).unwrap();
    let f = RealGrid::new(spec, vec![1.0, -3.0, 0.0, 3.0], DomainKind::FullLine).unwrap();
    let star = decreasing_rearrangement(&f);
    let pieces: Vec<(f64, f64)> = star.pieces().iter().map(|p| (p.width, p.value)).collect();
    assert_eq!(pieces, vec![(2.0, 3.0), (1.0, 1.0)]);
    assert_eq!(star.value_at(1.5), 3.0);
    assert_eq!(star.value_at(2.5), 1.0);
    assert_eq!(star.value_at(3.5), 0.0);
}

#[test]
fn repeated_two_dimensional_example() {
    // axis 0 fastest: rows are [1, 4], [3, 2]
    let spec = GridSpec::orthant(&[1.0, 1.0], &[2, 2]).unwrap();
    let f = RealGrid::new(spec, vec![1.0, 4.0, 3.0, 2.0], DomainKind::PositiveOrthant).unwrap();
    let g = repeated_rearrangement(&f);
    // sort along axis 0: [4, 1], [3, 2]; then along axis 1: [4, 2], [3, 1]
    assert_eq!(g.values(), &[4.0, 2.0, 3.0, 1.0]);
}

#[test]
fn from_pairs_merges_equal_values() {
    let s = rearrangement_from_pairs(&[(1.0, 2.0), (0.5, 5.0), (2.0, 2.0), (3.0, 0.0)]).unwrap();
    let pieces: Vec<(f64, f64)> = s.pieces().iter().map(|p| (p.width, p.value)).collect();
    assert_eq!(pieces, vec![(0.5, 5.0), (3.0, 2.0)]);
    assert!(rearrangement_from_pairs(&[(1.0, f64::NAN)]).is_err());
}
