//! Generator examples and ground-truth checks at full scale.

use mol_core::analysis::{fixpoint_analyze, oracle_classify, AnalysisOptions, NullabilityClass};
use mol_core::corpus::{generate_corpus, write_corpus, ClassMix, CorpusSpec};
use mol_core::ir::validate_program;

#[test]
fn pure_deref_mix_is_all_definite() {
    let spec = CorpusSpec {
        method_count: 3,
        class_mix: ClassMix {
            definite: 1.0,
            possible: 0.0,
            not_required: 0.0,
            forwarding: 0.0,
            recursive: 0.0,
        },
        loop_density: 0.0,
        seed: 1,
        ..CorpusSpec::default()
    };
    let c = generate_corpus(&spec).unwrap();
    assert_eq!(c.truth.abstraction_count, 3);
    let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
    assert!(!r.classes.is_empty());
    assert!(r.classes.values().all(|&c| c == NullabilityClass::DefinitelyRequired));
}

#[test]
fn default_corpus_matches_ground_truth() {
    let c = generate_corpus(&CorpusSpec::default()).unwrap();
    assert!(validate_program(&c.program).is_empty());
    let r = fixpoint_analyze(&c.program, AnalysisOptions::default()).unwrap();
    assert!(r.path_budget_exceeded.is_empty());
    assert_eq!(r.classes, c.truth.expected_class);
    // The ground truth itself, against the brute-force oracle on a sample.
    let loop_free: Vec<_> = c
        .truth
        .expected_class
        .iter()
        .filter(|((k, _), _)| c.truth.loop_free.contains(k))
        .step_by(37)
        .take(50)
        .collect();
    assert_eq!(loop_free.len(), 50);
    for ((key, i), class) in loop_free {
        assert_eq!(oracle_classify(&c.program, key, *i, 1).unwrap(), *class, "{key} #{i}");
    }
}

#[test]
fn written_corpus_is_byte_identical() {
    let spec = CorpusSpec {
        method_count: 200,
        seed: 9,
        ..CorpusSpec::default()
    };
    let dirs = [
        std::env::temp_dir().join("mol-corpus-a"),
        std::env::temp_dir().join("mol-corpus-b"),
    ];
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
        write_corpus(&generate_corpus(&spec).unwrap(), d).unwrap();
    }
    for f in [
        "corpus.mol",
        "ground_truth.csv",
        "expected_definite.csv",
        "expected_possible.csv",
        "manifest.txt",
    ] {
        let a = std::fs::read(dirs[0].join(f)).unwrap();
        assert!(!a.is_empty(), "{f}");
        assert_eq!(a, std::fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
    for d in &dirs {
        let _ = std::fs::remove_dir_all(d);
    }
}
