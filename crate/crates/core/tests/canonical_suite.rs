use std::fs;
use std::path::Path;

use mucalc_core::canonical::{
    build_canonical, completeness_pipeline, distinctness_check, enumerate_atoms, existence_check,
    name_expansion, sat_search, sigma_of, truth_lemma_check, CanonicalModel, Oracle, OracleConfig,
    OracleVerdict, PipelineOutcome, UnknownPolicy,
};
use mucalc_core::filtration::{fmp_search, Strategy};
use mucalc_core::formula::fl_closure;
use mucalc_core::generator::FormulaGenerator;
use mucalc_core::proof::{check_derivation, read_derivation};
use mucalc_core::semantics::eval_algebraic;
use mucalc_core::{parse_formula, Formula, FrameClass};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn oracle() -> Oracle {
    Oracle::new(OracleConfig::default())
}

fn canonical(s: &str, logic: FrameClass) -> CanonicalModel {
    let sigma = sigma_of(&[f(s)]).unwrap();
    build_canonical(
        &sigma,
        logic,
        Strategy::for_class(logic),
        &oracle(),
        UnknownPolicy::Fail,
    )
    .unwrap()
}

fn atom_with(m: &CanonicalModel, members: &[&str]) -> usize {
    let ids: Vec<usize> = members
        .iter()
        .map(|s| m.sigma.id_of(&f(s)).unwrap())
        .collect();
    (0..m.len())
        .find(|&a| ids.iter().all(|&i| m.atoms[a].members.contains(i)))
        .unwrap()
}

#[test]
fn diamond_p_atoms() {
    let sigma = sigma_of(&[f("<>p")]).unwrap();
    assert_eq!(sigma.len(), 4);
    let (atoms, warnings) =
        enumerate_atoms(&sigma, FrameClass::K, &oracle(), UnknownPolicy::Fail).unwrap();
    assert_eq!(atoms.len(), 4);
    assert!(warnings.is_empty());
    assert!(atoms.iter().all(|a| a.verdict.is_sat()));
    let (atoms, _) = enumerate_atoms(
        &sigma_of(&[f("p")]).unwrap(),
        FrameClass::K,
        &oracle(),
        UnknownPolicy::Fail,
    )
    .unwrap();
    assert_eq!(atoms.len(), 2);
}

#[test]
fn diamond_p_relation() {
    let m = canonical("<>p", FrameClass::K);
    let p = m.sigma.id_of(&f("p")).unwrap();
    let boxed = atom_with(&m, &["p", "[]!p"]);
    assert!(m
        .model
        .successors(boxed)
        .iter()
        .all(|&b| !m.atoms[b].members.contains(p)));
    let dia = atom_with(&m, &["p", "<>p"]);
    assert!(m.r_min.contains(dia, dia));
    let edge = m.edge_verdicts[boxed * m.len() + dia].clone();
    assert_eq!(edge, OracleVerdict::UnsatCertified { method: "refuter" });

    let t = canonical("<>p", FrameClass::T);
    for a in 0..t.len() {
        assert!(t.model.has_edge(a, a));
        assert!(t.r_max.contains(a, a));
    }
}

#[test]
fn lemma_checks_on_small_sigmas() {
    for s in ["p", "<>p", "mu x.(p | <>x)"] {
        for logic in [FrameClass::K, FrameClass::T, FrameClass::KB] {
            let m = canonical(s, logic);
            assert!(m.atoms.iter().all(|a| !a.verdict.is_unknown()));
            assert!(
                m.edge_verdicts.iter().all(|v| !v.is_unknown()),
                "{s} {logic}"
            );
            assert!(logic.contains(&m.model));
            let e = existence_check(&m);
            assert!(e.holds(), "{s} {logic}: {:?}", e.failures);
            let d = distinctness_check(&m.atoms, &m.sigma, logic, &oracle());
            assert!(d.holds(), "{s} {logic}: {:?}", d.failures);
            let t = truth_lemma_check(&m).unwrap();
            assert!(t.holds(), "{s} {logic}: {:?}", t.failures);
            assert_eq!(t.checked, m.len() * m.sigma.len());
        }
    }
}

#[test]
fn deleting_a_needed_edge_breaks_existence() {
    let m = canonical("<>p", FrameClass::K);
    let a = atom_with(&m, &["!p", "<>p"]);
    let mut broken = m.clone();
    let p = m.sigma.id_of(&f("p")).unwrap();
    let mut relation = m.model.relation().clone();
    for &b in m.model.successors(a) {
        if m.atoms[b].members.contains(p) {
            relation.remove(a, b);
        }
    }
    broken.model = mucalc_core::KripkeModel::new(
        m.model.names().to_vec(),
        relation,
        m.model.valuation().clone(),
    )
    .unwrap();
    assert!(!existence_check(&broken).holds());
}

#[test]
fn name_expansion_examples() {
    let xi = f("mu x.(p | <>x)");
    let m = canonical("p", FrameClass::K);
    assert!(name_expansion(&xi, &f("p | <>x"), &m).unwrap() != f("p | <>x"));
    let full = name_expansion(&xi, &f("x"), &m).unwrap();
    let psi_s =
        Formula::disjunction((0..m.len()).map(|a| m.sigma.conjunction(&m.atoms[a].members)));
    assert_eq!(full, psi_s);
    assert_eq!(name_expansion(&xi, &f("p"), &m).unwrap(), f("p"));
    let empty = name_expansion(&f("mu x. <>x"), &f("<>x"), &m).unwrap();
    assert_eq!(empty, f("<>false"));
}

#[test]
fn pipeline_examples() {
    let PipelineOutcome::Model { model, state } =
        completeness_pipeline(&f("<>p"), FrameClass::K, &oracle()).unwrap()
    else {
        panic!()
    };
    let p = model.value("p").unwrap();
    assert!(model.successors(state).iter().any(|&t| p.contains(t)));
    assert_eq!(
        completeness_pipeline(&f("p & !p"), FrameClass::K, &oracle()).unwrap(),
        PipelineOutcome::Inconsistent
    );
    let PipelineOutcome::Model { model, .. } =
        completeness_pipeline(&f("<>p"), FrameClass::KB, &oracle()).unwrap()
    else {
        panic!()
    };
    assert!(FrameClass::KB.contains(&model));
}

#[test]
fn oracle_verdicts_are_sound_on_generated_formulas() {
    let gen = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let config = OracleConfig {
        elimination_pairs: 0,
        ..OracleConfig::default()
    };
    let exhaustive = OracleConfig {
        max_states: 2,
        budget: u128::MAX,
        refuter_steps: 0,
        elimination_pairs: 0,
        ..OracleConfig::default()
    };
    for _ in 0..150 {
        let phi = gen.formula(&mut rng);
        for class in [FrameClass::K, FrameClass::T, FrameClass::K4] {
            let v = sat_search(&phi, class, &config);
            assert!(v.replays(&phi, class), "{phi}");
            if v == (OracleVerdict::UnsatCertified { method: "refuter" }) {
                assert!(
                    !sat_search(&phi, class, &exhaustive).is_sat(),
                    "refuter wrong on {phi} in {class}"
                );
            }
        }
    }
    // a refuted formula small enough for the exhaustive bound
    let phi = f("false");
    assert!(1usize << fl_closure([&phi], false).len() <= 3);
    let v = sat_search(
        &phi,
        FrameClass::K,
        &OracleConfig {
            refuter_steps: 0,
            ..exhaustive
        },
    );
    assert_eq!(
        v,
        OracleVerdict::UnsatCertified {
            method: "exhaustive"
        }
    );
}

#[test]
fn elimination_agrees_with_enumeration() {
    let gen = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let elim_only = OracleConfig {
        max_states: 0,
        refuter_steps: 0,
        ..OracleConfig::default()
    };
    let enumerate = OracleConfig {
        max_states: 2,
        elimination_pairs: 0,
        ..OracleConfig::default()
    };
    for _ in 0..150 {
        let phi = gen.formula(&mut rng);
        for class in FrameClass::ALL {
            let e = sat_search(&phi, class, &elim_only);
            assert!(e.replays(&phi, class));
            if sat_search(&phi, class, &enumerate).is_sat() {
                assert!(
                    e.is_sat(),
                    "elimination misses a model of {phi} in {class}: {e:?}"
                );
            }
        }
    }
}

#[test]
fn pipeline_and_filtration_cohere() {
    let gen = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut models = 0;
    for _ in 0..40 {
        let phi = gen.formula(&mut rng);
        let PipelineOutcome::Model { model, state } =
            completeness_pipeline(&phi, FrameClass::K, &oracle()).unwrap()
        else {
            continue;
        };
        models += 1;
        let neg = phi.negate();
        assert!(!eval_algebraic(&neg, &model).unwrap().contains(state));
        let fmp = fmp_search(&neg, FrameClass::K, &model).unwrap();
        assert!(fmp.holds(), "{phi}");
    }
    assert!(models > 10);
}

#[test]
fn theorems_have_no_countermodels() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "drv") {
            continue;
        }
        let t = check_derivation(&read_derivation(&fs::read_to_string(&path).unwrap()).unwrap())
            .unwrap();
        let out = completeness_pipeline(&t.formula().negate(), t.logic(), &oracle()).unwrap();
        assert!(
            !matches!(out, PipelineOutcome::Model { .. }),
            "{}",
            path.display()
        );
        seen += 1;
    }
    assert!(seen >= 10);
}
