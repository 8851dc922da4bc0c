use proptest::prelude::*;
use steinlab::corpus::{
    corpus_to_json, default_corpus, generate, hyperbolic_cross_measure, parse_corpus, CorpusSpec, Generator,
    GridRequest,
};
use steinlab::Error;

fn step(seed: u64) -> CorpusSpec {
    CorpusSpec::new(
        "s",
        Generator::RandomStep {
            density: 0.4,
            spread: 10.0,
        },
        seed,
        GridRequest::centered(&[4.0, 4.0], &[16, 16]),
    )
}

proptest! {
    #[test]
    fn same_seed_same_function(seed in any::<u64>()) {
        let a = generate(&step(seed)).unwrap().function;
        let b = generate(&step(seed)).unwrap().function;
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.values().iter().all(|&v| v == 0.0 || (v >= 2f64.powi(-10) && v <= 2f64.powi(10))));
    }

    #[test]
    fn cross_indicator_measure_is_exact(r in 0u32..7, n in 1usize..=3) {
        let side = (r as f64).exp2();
        let spec = CorpusSpec::new("c", Generator::HyperbolicCrossIndicator { r }, 0, GridRequest::orthant(&vec![side; n], &vec![1usize << r; n]));
        let g = generate(&spec).unwrap();
        let mu = hyperbolic_cross_measure(r, n);
        prop_assert_eq!(g.support_measure, Some(mu));
        prop_assert_eq!(g.function.lp_norm(1.0), mu);
    }
}

#[test]
fn seeds_matter() {
    let a = generate(&step(1)).unwrap().function;
    let b = generate(&step(2)).unwrap().function;
    assert_ne!(a.values(), b.values());
}

#[test]
fn small_crosses() {
    assert_eq!(hyperbolic_cross_measure(0, 2), 1.0);
    assert_eq!(hyperbolic_cross_measure(2, 2), 8.0);
    // a point counts at level r iff Σ ceil(log₂ x_j)⁺ ≤ r
    let spec = CorpusSpec::new(
        "c",
        Generator::HyperbolicCrossIndicator { r: 2 },
        0,
        GridRequest::orthant(&[4.0, 4.0], &[4, 4]),
    );
    let g = generate(&spec).unwrap().function;
    let inside: Vec<u8> = g.values().iter().map(|&v| v as u8).collect();
    // axis 0 fastest; rows are x₂ ∈ (0,1], (1,2], (2,3], (3,4]
    assert_eq!(inside, vec![1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]);
}

#[test]
fn gaussian_is_normalised_at_the_origin() {
    let spec = CorpusSpec::new(
        "g",
        Generator::Gaussian { sigma: 1.0 },
        0,
        GridRequest::centered(&[2.0], &[3]),
    );
    let f = generate(&spec).unwrap().function;
    assert_eq!(f.values()[1], 1.0);
}

#[test]
fn default_corpus_round_trips() {
    let corpus = default_corpus();
    let back = parse_corpus(&corpus_to_json(&corpus)).unwrap();
    assert_eq!(back, corpus);
    for spec in &corpus {
        let f = generate(spec).unwrap().function;
        assert!(f.values().iter().all(|v| v.is_finite()), "{}", spec.label());
    }
}

#[test]
fn malformed_documents() {
    let ok = r#"[{"schema_version": 1, "generator": "gauss", "sigma": 0.5, "grid": {"extent": [8], "count": [32]}}]"#;
    assert_eq!(parse_corpus(ok).unwrap().len(), 1);
    let cases = [
        r#"{"generator": "gaussian"}"#,
        r#"[{"schema_version": 1, "generator": "gaussian", "sigma": NaN, "grid": {"extent": [8], "count": [32]}}]"#,
        r#"[{"schema_version": 2, "generator": "gaussian", "sigma": 1, "grid": {"extent": [8], "count": [32]}}]"#,
        r#"[{"schema_version": 1, "generator": "gaussian", "sigma": -1, "grid": {"extent": [8], "count": [32]}}]"#,
        r#"[{"schema_version": 1, "generator": "box_indicator", "lower": [0], "upper": [1, 2], "grid": {"extent": [8], "count": [32]}}]"#,
        r#"[{"schema_version": 1, "generator": "gaussian", "sigma": 1, "grid": {"extent": [8], "count": [0]}}]"#,
    ];
    for c in cases {
        assert!(parse_corpus(c).is_err(), "{c}");
    }
    let unknown = r#"[{"schema_version": 1, "generator": "wavelet", "grid": {"extent": [8], "count": [32]}}]"#;
    assert!(matches!(parse_corpus(unknown), Err(Error::UnknownGenerator(_))));
}
