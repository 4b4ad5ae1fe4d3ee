use std::collections::BTreeSet;

use mucalc_core::formula::FixKind;
use mucalc_core::generator::FormulaGenerator;
use mucalc_core::kripke::{random_model, FrameClass, StateSet};
use mucalc_core::semantics::{
    eval_algebraic, eval_with_stats, model_check_equiv, trace_property_check,
};
use mucalc_core::{parse_formula, Formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn atoms() -> Vec<String> {
    ["p", "q", "r"].iter().map(|s| s.to_string()).collect()
}

#[test]
fn game_and_algebra_agree_on_random_pairs() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let xi = g.formula(&mut rng);
        let m = random_model(&mut rng, 6, &atoms(), FrameClass::K);
        let r = model_check_equiv(&xi, &m).unwrap();
        assert!(r.agrees(), "{xi}: {:?}", r.mismatches);
    }
}

#[test]
fn kleene_rounds_are_bounded_and_negation_complements() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let phi = g.formula(&mut rng);
        let m = random_model(&mut rng, 5, &atoms(), FrameClass::K);
        let (set, stats) = eval_with_stats(&phi, &m).unwrap();
        assert!(stats.max_rounds <= m.len() + 1);
        assert_eq!(
            eval_algebraic(&phi.negate(), &m).unwrap(),
            set.complement(),
            "{phi}"
        );
    }
}

#[test]
fn continuous_bodies_are_monotone() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let phi = g.formula_in(&mut rng, FixKind::Mu, "w");
        let m = random_model(&mut rng, 5, &atoms(), FrameClass::K);
        let n = m.len();
        let small = StateSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.3)));
        let big = small.union(&StateSet::from_indices(
            n,
            (0..n).filter(|_| rng.random_bool(0.5)),
        ));
        let lo = eval_algebraic(&phi, &m.update_valuation("w", small).unwrap()).unwrap();
        let hi = eval_algebraic(&phi, &m.update_valuation("w", big).unwrap()).unwrap();
        assert!(lo.is_subset(&hi), "{phi}");
    }
}

#[test]
fn trace_properties_hold_on_generated_formulas() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..500 {
        let xi = g.formula(&mut rng);
        let r = trace_property_check(&xi).unwrap();
        assert!(r.holds(), "{xi}: {r:?}");
    }
    assert!(!trace_property_check(&parse_formula("mu x.[]x").unwrap())
        .unwrap()
        .holds());
}

#[test]
fn dependent_variables_share_their_type() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..500 {
        let xi: Formula = g.formula(&mut rng);
        let idx = mucalc_core::formula::SubformulaIndex::new(&xi).unwrap();
        let names: BTreeSet<_> = idx.binders().iter().map(|b| b.name.clone()).collect();
        for a in &names {
            for b in &names {
                if idx.depends(a, b) {
                    assert_eq!(
                        idx.binder(a).unwrap().kind,
                        idx.binder(b).unwrap().kind,
                        "{xi}"
                    );
                    assert!(idx.rank(a) < idx.rank(b));
                }
            }
        }
    }
}
