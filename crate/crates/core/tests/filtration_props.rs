use mucalc_core::filtration::{build_filtration, filtration_agreement_check, Strategy};
use mucalc_core::formula::fl_closure;
use mucalc_core::generator::FormulaGenerator;
use mucalc_core::kripke::{random_model, FrameClass};
use mucalc_core::model_io::read_model;
use mucalc_core::parse_formula;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn atoms() -> Vec<String> {
    ["p", "q", "r"].iter().map(|s| s.to_string()).collect()
}

fn sweep(strategy: Strategy, negations: bool, seed: u64) -> usize {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..200 {
        let xi = g.formula(&mut rng);
        let sigma = fl_closure([&xi], negations);
        if sigma.len() > 24 {
            continue;
        }
        let m = random_model(&mut rng, 7, &atoms(), FrameClass::K);
        let fr = build_filtration(&m, &sigma, strategy).unwrap();
        bad += filtration_agreement_check(&fr).unwrap().disagreements.len();
    }
    bad
}

#[test]
fn finest_filtration_agrees_on_plain_closure() {
    assert_eq!(sweep(Strategy::Min, false, 21), 0);
}

#[test]
fn coarsest_filtration_agrees_on_negation_closed_closure() {
    assert_eq!(sweep(Strategy::Max, true, 22), 0);
}

// Without the negations no box constrains the coarsest relation, so it
// becomes universal and the dead end sees a successor.
#[test]
fn coarsest_filtration_breaks_diamonds_on_plain_closure() {
    let m = read_model(r#"{"states":["s0"],"edges":[],"valuation":{}}"#).unwrap();
    let xi = parse_formula("<>true").unwrap();
    let fr = build_filtration(&m, &fl_closure([&xi], false), Strategy::Max).unwrap();
    let report = filtration_agreement_check(&fr).unwrap();
    assert_eq!(report.disagreements.len(), 1);
    let d = &report.disagreements[0];
    assert_eq!(
        (d.formula.as_str(), d.in_source, d.in_quotient),
        ("<>true", false, true)
    );

    let fr = build_filtration(&m, &fl_closure([&xi], true), Strategy::Max).unwrap();
    assert!(filtration_agreement_check(&fr).unwrap().agrees());
}

#[test]
fn min_relation_sits_inside_max() {
    let g = FormulaGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let xi = g.formula(&mut rng);
        let sigma = fl_closure([&xi], true);
        let m = random_model(&mut rng, 6, &atoms(), FrameClass::K);
        let fr = build_filtration(&m, &sigma, Strategy::Min).unwrap();
        assert!(
            fr.r_min.pairs().all(|(a, b)| fr.r_max.contains(a, b)),
            "{xi}"
        );
        assert!(fr.quotient.len() <= 1 << sigma.len().min(20));
    }
}
