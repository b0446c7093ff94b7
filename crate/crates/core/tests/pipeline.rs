use mtweight::corpus::{build_corpus, estimate_c0, CorpusSpec};
use mtweight::format::{parse_profiles, write_ball, Profile};
use mtweight::functionals::{i_functional, j_functional, j_over_i};
use mtweight::profiles::{from_halfline, to_halfline};
use mtweight::verify::with_estimated_c0;
use mtweight::{build_constants, QuadratureConfig, WeightParams};

#[test]
fn corpus_survives_text_roundtrip() {
    let k = build_constants(WeightParams::new(0.5, 1.0).unwrap(), 1.0, 1.0).unwrap();
    for m in build_corpus(&k, &CorpusSpec::default()).unwrap() {
        let text = write_ball(&m.profile, &k.params);
        let recs = parse_profiles(&text).unwrap();
        assert_eq!(recs.len(), 1);
        match &recs[0].profile {
            Profile::Ball(u) => assert_eq!(u, &m.profile, "{}", m.name),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn j_is_at_most_one_with_estimated_c0() {
    let cfg = QuadratureConfig::default();
    let spec = CorpusSpec::default();
    let base = build_constants(WeightParams::new(0.0, 0.5).unwrap(), 1.0, 1.0).unwrap();
    let k = with_estimated_c0(&base, &spec, &cfg).unwrap();
    let est = estimate_c0(&base, &spec, &cfg).unwrap();
    assert_eq!(k.c_zero, est.c_zero);
    for m in build_corpus(&k, &spec).unwrap().iter().filter(|m| m.r0.is_none()) {
        let j = j_functional(&m.profile, &k, &cfg).unwrap().j_value;
        assert!(j <= 1.0 + 1e-9, "{}: {j}", m.name);
        // J agrees with the half-line form
        let i = i_functional(&to_halfline(&m.profile, &k), k.b_alpha, &cfg).unwrap().i;
        assert!((j - j_over_i(&k) * i).abs() <= 1e-7 * j.max(1e-3), "{}", m.name);
    }
}

#[test]
fn halfline_map_roundtrip() {
    let k = build_constants(WeightParams::new(1.0, 0.0).unwrap(), 1.0, 1.0).unwrap();
    for m in build_corpus(&k, &CorpusSpec::default()).unwrap() {
        let back = from_halfline(&to_halfline(&m.profile, &k), &k, 1.0).unwrap();
        for r in [0.0, 0.1, 0.37, 0.8, 0.999] {
            assert!((back.eval(r) - m.profile.eval(r)).abs() < 1e-9, "{} at {r}", m.name);
        }
    }
}
