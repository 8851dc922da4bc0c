#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steinlab::{DomainKind, GridSpec, RealGrid};

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Seeded grid function: `n ∈ {1, 2}`, up to `max_side` cells per axis,
/// dyadic spacing, about a third of the cells zero.
pub fn seeded_grid(seed: u64, max_side: usize, domain: DomainKind) -> RealGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=2);
    let count: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_side)).collect();
    let spacing: Vec<f64> = (0..n).map(|_| (rng.gen_range(-3..=2) as f64).exp2()).collect();
    let spec = match domain {
        DomainKind::PositiveOrthant => GridSpec::orthant(&spacing, &count).unwrap(),
        DomainKind::FullLine => {
            let extent: Vec<f64> = spacing.iter().zip(&count).map(|(h, &c)| h * c as f64).collect();
            GridSpec::centered(&extent, &count).unwrap()
        }
    };
    let values = (0..spec.len())
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(-4.0..4.0f64) * rng.gen_range(-3.0..3.0f64).exp2()
            }
        })
        .collect();
    RealGrid::new(spec, values, domain).unwrap()
}

/// Small signed grid functions on the positive orthant with dyadic spacing.
pub fn orthant_grid(max_dim: usize, max_side: usize) -> impl Strategy<Value = RealGrid> {
    (1..=max_dim)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(1..=max_side, n),
                prop::collection::vec(-2i32..=2, n),
            )
        })
        .prop_flat_map(|(count, exps)| {
            let len: usize = count.iter().product();
            let values = prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => -8.0..8.0f64], len);
            (Just(count), Just(exps), values)
        })
        .prop_map(|(count, exps, values)| {
            let spacing: Vec<f64> = exps.iter().map(|&e| (e as f64).exp2()).collect();
            let spec = GridSpec::orthant(&spacing, &count).unwrap();
            RealGrid::new(spec, values, DomainKind::PositiveOrthant).unwrap()
        })
}

/// Small centred grid functions.
pub fn centered_grid(max_dim: usize, max_side: usize) -> impl Strategy<Value = RealGrid> {
    orthant_grid(max_dim, max_side).prop_map(|g| {
        let spec = g.spec();
        let extent: Vec<f64> = (0..spec.dim()).map(|j| spec.extent(j)).collect();
        let centred = GridSpec::centered(&extent, spec.count()).unwrap();
        RealGrid::new(centred, g.values().to_vec(), DomainKind::FullLine).unwrap()
    })
}
