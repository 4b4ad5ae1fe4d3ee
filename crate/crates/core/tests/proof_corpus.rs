use std::fs;
use std::path::{Path, PathBuf};

use mucalc_core::proof::{
    check_derivation, dualize, mutations, read_derivation, soundness_sample, Derivation, Violation,
};
use mucalc_core::{parse_formula, Formula};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(dir: &Path) -> Vec<(String, Derivation)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "drv"))
        .map(|p| {
            let d = read_derivation(&fs::read_to_string(&p).unwrap()).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), d)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn shipped_derivations_check() {
    let all = load(&corpus());
    assert!(all.len() >= 10);
    let mut rules = std::collections::BTreeSet::new();
    for (name, d) in &all {
        let t = check_derivation(d).unwrap_or_else(|e| panic!("{name}: {e}"));
        for s in &d.steps {
            rules.insert(match &s.rule {
                mucalc_core::proof::Rule::Axiom { schema, .. } => schema.name().to_string(),
                r => r.name().to_string(),
            });
        }
        let r = soundness_sample(&t, 500, 4, 42);
        assert!(r.sound(), "{name}: {:?}", r.refutations.first());
    }
    for rule in [
        "normality",
        "additivity",
        "additivity-dual",
        "prefixpoint",
        "postfixpoint",
        "taut",
        "mp",
        "mono",
        "mono-box",
        "subst",
        "lfp",
        "gfp",
        "extension",
    ] {
        assert!(rules.contains(rule), "no corpus derivation uses {rule}");
    }
}

#[test]
fn diamond_prefix_theorem() {
    let text = fs::read_to_string(corpus().join("diamond_prefix.drv")).unwrap();
    let t = check_derivation(&read_derivation(&text).unwrap()).unwrap();
    let want: Formula = parse_formula("<>p -> mu x.(p | <>x)").unwrap();
    assert!(t.formula().alpha_eq(&want));
}

#[test]
fn rejected_derivations_fail_where_expected() {
    let expected = [
        ("bad_instance.drv", 0),
        ("box_lfp.drv", 1),
        ("box_prefixpoint.drv", 0),
        ("forward_mp.drv", 0),
        ("four_in_k.drv", 0),
        ("not_tautology.drv", 0),
    ];
    let all = load(&corpus().join("rejected"));
    assert_eq!(all.len(), expected.len());
    for ((name, d), (want, step)) in all.iter().zip(expected) {
        assert_eq!(name, want);
        let err = check_derivation(d).unwrap_err();
        assert_eq!(err.step, step, "{name}: {err}");
        if name.starts_with("box_") {
            assert!(
                matches!(err.violation, Violation::NotContinuous { .. }),
                "{name}: {err}"
            );
        }
    }
}

#[test]
fn every_mutation_is_rejected() {
    for (name, d) in load(&corpus()) {
        for m in mutations(&d) {
            let err = check_derivation(&m.derivation)
                .err()
                .unwrap_or_else(|| panic!("{name}: {} at step {} accepted", m.kind, m.step));
            assert_eq!(err.step, m.step, "{name}: {} rejected late: {err}", m.kind);
        }
    }
}

#[test]
fn dual_derivations_check() {
    for (name, d) in load(&corpus()) {
        let t = check_derivation(&dualize(&d)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(soundness_sample(&t, 100, 3, 5).sound(), "{name}");
    }
}
