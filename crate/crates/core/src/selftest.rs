//! The acceptance suite as a library call, shared by `mucalc selftest` and
//! the test targets. Reports hold counts and failure notes but no timings,
//! so for a fixed seed they are byte-identical whatever the thread count.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::canonical::{
    build_canonical, completeness_pipeline, distinctness_check, existence_check, sigma_of,
    truth_lemma_check, Oracle, OracleConfig, PipelineOutcome, UnknownPolicy,
};
use crate::filtration::{
    build_filtration, filtration_agreement_check, fmp_search, ml_translation, Disagreement,
    Strategy,
};
use crate::formula::{classify_fragment, fl_closure, Formula};
use crate::generator::FormulaGenerator;
use crate::kripke::{random_model, FrameClass, KripkeModel, Relation, StateSet};
use crate::model_io::{model_json, read_model};
use crate::proof::{check_derivation, mutations, read_derivation, soundness_sample, Rule};
use crate::semantics::{eval_algebraic, model_check_equiv, satisfies};
use crate::syntax::parse_formula;

pub const DERIVATIONS: &[(&str, &str)] = &[
    (
        "additivity.drv",
        include_str!("../../../corpus/additivity.drv"),
    ),
    (
        "box_additivity.drv",
        include_str!("../../../corpus/box_additivity.drv"),
    ),
    (
        "diamond_prefix.drv",
        include_str!("../../../corpus/diamond_prefix.drv"),
    ),
    (
        "euclidean.drv",
        include_str!("../../../corpus/euclidean.drv"),
    ),
    (
        "gfp_weaken.drv",
        include_str!("../../../corpus/gfp_weaken.drv"),
    ),
    (
        "lfp_unfold.drv",
        include_str!("../../../corpus/lfp_unfold.drv"),
    ),
    (
        "lfp_weaken.drv",
        include_str!("../../../corpus/lfp_weaken.drv"),
    ),
    ("mono_box.drv", include_str!("../../../corpus/mono_box.drv")),
    (
        "normality.drv",
        include_str!("../../../corpus/normality.drv"),
    ),
    (
        "reflexive.drv",
        include_str!("../../../corpus/reflexive.drv"),
    ),
    ("s4.drv", include_str!("../../../corpus/s4.drv")),
    (
        "symmetric.drv",
        include_str!("../../../corpus/symmetric.drv"),
    ),
    (
        "taut_subst.drv",
        include_str!("../../../corpus/taut_subst.drv"),
    ),
    (
        "transitive.drv",
        include_str!("../../../corpus/transitive.drv"),
    ),
];

/// Derivations that must fail, with the step that fails.
pub const REJECTED: &[(&str, &str, usize)] = &[
    (
        "bad_instance.drv",
        include_str!("../../../corpus/rejected/bad_instance.drv"),
        0,
    ),
    (
        "box_lfp.drv",
        include_str!("../../../corpus/rejected/box_lfp.drv"),
        1,
    ),
    (
        "box_prefixpoint.drv",
        include_str!("../../../corpus/rejected/box_prefixpoint.drv"),
        0,
    ),
    (
        "forward_mp.drv",
        include_str!("../../../corpus/rejected/forward_mp.drv"),
        0,
    ),
    (
        "four_in_k.drv",
        include_str!("../../../corpus/rejected/four_in_k.drv"),
        0,
    ),
    (
        "not_tautology.drv",
        include_str!("../../../corpus/rejected/not_tautology.drv"),
        0,
    ),
];

pub const COMPLETENESS: &str = include_str!("../../../corpus/formulas/completeness.tsv");
const FMP_INSTANCES: &str = include_str!("../../../corpus/fmp/instances.tsv");
const MODELS: &[(&str, &str)] = &[
    (
        "one_state.kmj",
        include_str!("../../../corpus/models/one_state.kmj"),
    ),
    (
        "one_loop.kmj",
        include_str!("../../../corpus/models/one_loop.kmj"),
    ),
    (
        "two_chain.kmj",
        include_str!("../../../corpus/models/two_chain.kmj"),
    ),
    (
        "two_cycle.kmj",
        include_str!("../../../corpus/models/two_cycle.kmj"),
    ),
    (
        "three_chain.kmj",
        include_str!("../../../corpus/models/three_chain.kmj"),
    ),
    (
        "four_chain.kmj",
        include_str!("../../../corpus/models/four_chain.kmj"),
    ),
    (
        "four_chain_p_until_end.kmj",
        include_str!("../../../corpus/models/four_chain_p_until_end.kmj"),
    ),
    (
        "reflexive_chain.kmj",
        include_str!("../../../corpus/models/reflexive_chain.kmj"),
    ),
];

/// The fragment-boundary report for `mu x.[]x` on the 2-chain.
pub const PINNED_BOUNDARY: &str = r#"{"continuous":false,"disagreements":[{"class":"{s0,s1}","formula":"<>nu x. <>x","in_quotient":true,"in_source":false,"state":"s0"},{"class":"{s0,s1}","formula":"<>nu x. <>x","in_quotient":true,"in_source":false,"state":"s1"},{"class":"{s0,s1}","formula":"[]mu x. []x","in_quotient":false,"in_source":true,"state":"s0"},{"class":"{s0,s1}","formula":"[]mu x. []x","in_quotient":false,"in_source":true,"state":"s1"},{"class":"{s0,s1}","formula":"mu x. []x","in_quotient":false,"in_source":true,"state":"s0"},{"class":"{s0,s1}","formula":"mu x. []x","in_quotient":false,"in_source":true,"state":"s1"},{"class":"{s0,s1}","formula":"nu x. <>x","in_quotient":true,"in_source":false,"state":"s0"},{"class":"{s0,s1}","formula":"nu x. <>x","in_quotient":true,"in_source":false,"state":"s1"}],"formula":"mu x. []x","quotient":{"edges":[["{s0,s1}","{s0,s1}"]],"states":["{s0,s1}"],"valuation":{}},"quotient_truth":[],"source":{"edges":[["s0","s1"]],"states":["s0","s1"],"valuation":{"p":[]}},"source_truth":["s0","s1"]}"#;

const RULES: &[&str] = &[
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
];

/// Notes kept per criterion; the counts stay exact.
const MAX_NOTES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    /// Named counts for criteria that report more than pass or fail.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub breakdown: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

pub const CRITERIA: &[(u8, &str)] = &[
    (1, "game and algebraic semantics agree"),
    (2, "filtration preserves clean members"),
    (3, "fragment boundary regression"),
    (4, "finite model bound"),
    (5, "translation conditions"),
    (6, "proof kernel"),
    (7, "canonical model lemmas"),
    (8, "completeness pipeline"),
];

/// Run criteria 1 to 8 on a pool of `jobs` threads.
pub fn run_selftest(seed: u64, jobs: usize) -> Result<SelftestReport, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    let criteria: Vec<CriterionReport> = pool.install(|| {
        CRITERIA
            .iter()
            .map(|&(id, _)| run_criterion(id, seed))
            .collect()
    });
    Ok(SelftestReport {
        seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

/// Run one criterion on the current rayon pool.
///
/// # Panics
/// On an id outside 1..=8.
pub fn run_criterion(id: u8, seed: u64) -> CriterionReport {
    let rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(u64::from(id)));
    let mut breakdown = BTreeMap::new();
    let outcomes = match id {
        1 => semantics_agreement(rng),
        2 => filtration_theorem(rng, &mut breakdown),
        3 => fragment_boundary(),
        4 => fmp_bound(rng),
        5 => translation(rng),
        6 => proof_kernel(seed),
        7 => canonical_lemmas(),
        8 => completeness(),
        _ => panic!("no criterion {id}"),
    };
    let name = CRITERIA.iter().find(|c| c.0 == id).unwrap().1;
    let failures: Vec<String> = outcomes.iter().filter_map(|o| o.clone().err()).collect();
    CriterionReport {
        id,
        name,
        passed: failures.is_empty(),
        checked: outcomes.len(),
        violations: failures.len(),
        breakdown,
        notes: failures.into_iter().take(MAX_NOTES).collect(),
    }
}

type Outcome = Result<(), String>;

fn atoms() -> Vec<String> {
    FormulaGenerator::default().config().atoms.clone()
}

fn semantics_agreement(mut rng: ChaCha8Rng) -> Vec<Outcome> {
    let g = FormulaGenerator::default();
    let pairs: Vec<(Formula, KripkeModel)> = (0..1000)
        .map(|_| {
            let xi = g.formula(&mut rng);
            (xi, random_model(&mut rng, 6, &atoms(), FrameClass::K))
        })
        .collect();
    pairs
        .par_iter()
        .map(|(xi, m)| match model_check_equiv(xi, m) {
            Ok(r) if r.agrees() => Ok(()),
            Ok(r) => {
                let m = &r.mismatches[0];
                Err(format!(
                    "{xi}: `{}` at {}: game {}, algebraic {}",
                    m.subformula, m.state, m.game, m.algebraic
                ))
            }
            Err(e) => Err(format!("{xi}: {e}")),
        })
        .collect()
}

/// Min and max filtrations through the plain FL-closure. Max filtrations
/// are also run through the negation-closed closure, which is what the
/// backward direction of the theorem needs once `R^max` only looks at boxes.
fn filtration_theorem(
    mut rng: ChaCha8Rng,
    breakdown: &mut BTreeMap<String, usize>,
) -> Vec<Outcome> {
    let g = FormulaGenerator::default();
    let mut pairs = Vec::new();
    while pairs.len() < 500 {
        let xi = g.formula(&mut rng);
        if fl_closure([&xi], false).len() > 24 {
            continue;
        }
        pairs.push((xi, random_model(&mut rng, 8, &atoms(), FrameClass::K)));
    }
    let run = |xi: &Formula, m: &KripkeModel, strategy: Strategy, negations: bool| {
        let sigma = fl_closure([xi], negations);
        let fr = build_filtration(m, &sigma, strategy).map_err(|e| format!("{xi}: {e}"))?;
        let r = filtration_agreement_check(&fr).map_err(|e| format!("{xi}: {e}"))?;
        Ok::<_, String>(r.disagreements)
    };
    let results: Vec<[Result<Vec<Disagreement>, String>; 3]> = pairs
        .par_iter()
        .map(|(xi, m)| {
            [
                run(xi, m, Strategy::Min, false),
                run(xi, m, Strategy::Max, false),
                run(xi, m, Strategy::Max, true),
            ]
        })
        .collect();
    let mut count = |key: &str, n: usize| *breakdown.entry(key.to_string()).or_insert(0) += n;
    let mut outcomes = Vec::new();
    for ((xi, _), [min, max, max_neg]) in pairs.iter().zip(results) {
        for (strategy, r) in [("min", min), ("max", max)] {
            outcomes.push(match r {
                Ok(ds) if ds.is_empty() => Ok(()),
                Ok(ds) => {
                    count(&format!("{strategy}_disagreements"), ds.len());
                    count(
                        &format!("{strategy}_source_only"),
                        ds.iter().filter(|d| d.in_source).count(),
                    );
                    let d = &ds[0];
                    Err(format!(
                        "{xi} ({strategy}): `{}` is {} at {} but {} at {}",
                        d.formula, d.in_source, d.state, d.in_quotient, d.class
                    ))
                }
                Err(e) => {
                    count("errors", 1);
                    Err(e)
                }
            });
        }
        match max_neg {
            Ok(ds) => count("max_negation_closed_disagreements", ds.len()),
            Err(_) => count("errors", 1),
        }
    }
    for key in [
        "min_disagreements",
        "max_disagreements",
        "max_source_only",
        "max_negation_closed_disagreements",
    ] {
        count(key, 0);
    }
    outcomes
}

/// The report compared against [`PINNED_BOUNDARY`].
pub fn boundary_report() -> String {
    let xi = parse_formula("mu x.[]x").expect("literal parses");
    let chain = KripkeModel::numbered(
        Relation::from_pairs(2, [(0, 1)]),
        BTreeMap::from([("p".to_string(), StateSet::empty(2))]),
    );
    let sigma = fl_closure([&xi], true);
    let fr = build_filtration(&chain, &sigma, Strategy::Min).expect("closure is closed");
    let agreement = filtration_agreement_check(&fr).expect("closed formulas evaluate");
    let fragment = classify_fragment(&xi, &BTreeSet::new());
    let truth = |m: &KripkeModel| -> Vec<String> {
        let set = eval_algebraic(&xi, m).expect("closed formula");
        set.iter().map(|s| m.name(s).to_string()).collect()
    };
    json!({
        "formula": xi.to_string(),
        "continuous": fragment.mucml,
        "source": model_json(&chain),
        "source_truth": truth(&chain),
        "quotient": model_json(&fr.quotient),
        "quotient_truth": truth(&fr.quotient),
        "disagreements": agreement.boundary_disagreements,
    })
    .to_string()
}

fn fragment_boundary() -> Vec<Outcome> {
    let got = boundary_report();
    if got == PINNED_BOUNDARY {
        vec![Ok(())]
    } else {
        vec![Err(format!("boundary report changed: {got}"))]
    }
}

fn fmp_instance(phi: &Formula, class: FrameClass, witness: &KripkeModel) -> Outcome {
    let r = fmp_search(phi, class, witness).map_err(|e| format!("{phi} in {class}: {e}"))?;
    if r.holds() {
        Ok(())
    } else {
        Err(format!(
            "{phi} in {class}: refutes={} in_class={} within_bound={}",
            r.refutes, r.in_class, r.within_bound
        ))
    }
}

fn fmp_bound(mut rng: ChaCha8Rng) -> Vec<Outcome> {
    let mut instances: Vec<(Formula, FrameClass, KripkeModel)> = FMP_INSTANCES
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let model = MODELS
                .iter()
                .find(|m| m.0 == cols[2])
                .expect("witness is shipped")
                .1;
            (
                parse_formula(cols[0]).expect("corpus formula parses"),
                cols[1].parse().expect("corpus class parses"),
                read_model(model).expect("corpus model reads"),
            )
        })
        .collect();
    // seeded instances in the classes whose strategies stay inside R^max
    let g = FormulaGenerator::default();
    let classes = [FrameClass::K, FrameClass::T, FrameClass::KB];
    while instances.len() < 110 {
        let phi = g.formula(&mut rng);
        let class = classes[rng.random_range(0..classes.len())];
        let m = random_model(&mut rng, 5, &atoms(), class);
        if eval_algebraic(&phi, &m).is_ok_and(|set| set.len() < m.len()) {
            instances.push((phi, class, m));
        }
    }
    instances
        .par_iter()
        .map(|(phi, class, m)| fmp_instance(phi, *class, m))
        .collect()
}

fn translation(mut rng: ChaCha8Rng) -> Vec<Outcome> {
    let g = FormulaGenerator::default();
    let mut instances = Vec::new();
    while instances.len() < 100 {
        let xi = g.formula(&mut rng);
        if xi.binder_count() == 0 {
            continue;
        }
        instances.push((xi, random_model(&mut rng, 6, &atoms(), FrameClass::K)));
    }
    instances
        .par_iter()
        .map(|(xi, m)| {
            let tr =
                ml_translation(m, &fl_closure([xi], false)).map_err(|e| format!("{xi}: {e}"))?;
            if tr.conditions.all_hold() {
                Ok(())
            } else {
                Err(format!("{xi}: {}", tr.conditions.failures.join("; ")))
            }
        })
        .collect()
}

fn rule_label(rule: &Rule) -> String {
    match rule {
        Rule::Axiom { schema, .. } => schema.name().to_string(),
        r => r.name().to_string(),
    }
}

fn proof_kernel(seed: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    let mut used = BTreeSet::new();
    let mut theorems = Vec::new();
    for (name, text) in DERIVATIONS {
        let d = match read_derivation(text) {
            Ok(d) => d,
            Err(e) => {
                out.push(Err(format!("{name}: {e}")));
                continue;
            }
        };
        used.extend(d.steps.iter().map(|s| rule_label(&s.rule)));
        match check_derivation(&d) {
            Ok(t) => {
                out.push(Ok(()));
                theorems.push((*name, t));
            }
            Err(e) => out.push(Err(format!("{name}: {e}"))),
        }
        for m in mutations(&d) {
            out.push(match check_derivation(&m.derivation) {
                Err(e) if e.step == m.step => Ok(()),
                Err(e) => Err(format!(
                    "{name}: {} at step {} rejected at step {}",
                    m.kind, m.step, e.step
                )),
                Ok(_) => Err(format!("{name}: {} at step {} accepted", m.kind, m.step)),
            });
        }
    }
    out.push(if DERIVATIONS.len() >= 10 {
        Ok(())
    } else {
        Err(format!("only {} derivations", DERIVATIONS.len()))
    });
    for rule in RULES {
        out.push(if used.contains(*rule) {
            Ok(())
        } else {
            Err(format!("no derivation uses {rule}"))
        });
    }
    for (name, text, step) in REJECTED {
        out.push(match read_derivation(text).map(|d| check_derivation(&d)) {
            Ok(Err(e)) if e.step == *step => Ok(()),
            Ok(Err(e)) => Err(format!(
                "{name}: rejected at step {} instead of {step}",
                e.step
            )),
            Ok(Ok(_)) => Err(format!("{name}: accepted")),
            Err(e) => Err(format!("{name}: {e}")),
        });
    }
    let sampled: Vec<Outcome> = theorems
        .par_iter()
        .map(|(name, t)| {
            let r = soundness_sample(t, 500, 4, seed);
            match r.refutations.first() {
                None => Ok(()),
                Some((m, s)) => Err(format!("{name}: refuted at {s} in {m}")),
            }
        })
        .collect();
    out.extend(sampled);
    out
}

fn canonical_lemmas() -> Vec<Outcome> {
    let oracle = Oracle::new(OracleConfig::default());
    let cases: Vec<(&str, FrameClass)> = ["p", "<>p", "mu x.(p | <>x)"]
        .into_iter()
        .flat_map(|s| [FrameClass::K, FrameClass::T, FrameClass::KB].map(|c| (s, c)))
        .collect();
    cases
        .iter()
        .flat_map(|&(s, logic)| {
            let label = format!("~FL({s}) in {logic}");
            let phi = parse_formula(s).expect("literal parses");
            let sigma = match sigma_of(&[phi]) {
                Ok(sigma) => sigma,
                Err(e) => return vec![Err(format!("{label}: {e}"))],
            };
            let m = match build_canonical(
                &sigma,
                logic,
                Strategy::for_class(logic),
                &oracle,
                UnknownPolicy::Fail,
            ) {
                Ok(m) => m,
                Err(e) => return vec![Err(format!("{label}: {e}"))],
            };
            let lemma = |what: &str, failures: Vec<String>| match failures.first() {
                None => Ok(()),
                Some(f) => Err(format!("{label} {what}: {f}")),
            };
            let decisive = m.atoms.iter().all(|a| !a.verdict.is_unknown())
                && m.edge_verdicts.iter().all(|v| !v.is_unknown());
            vec![
                if decisive {
                    Ok(())
                } else {
                    Err(format!("{label}: UNKNOWN verdict"))
                },
                match logic.check(&m.model) {
                    Ok(()) => Ok(()),
                    Err(v) => Err(format!("{label}: {}", v.describe(&m.model))),
                },
                lemma("existence", existence_check(&m).failures),
                lemma(
                    "distinctness",
                    distinctness_check(&m.atoms, &m.sigma, logic, &oracle).failures,
                ),
                match truth_lemma_check(&m) {
                    Ok(r) => lemma("truth lemma", r.failures),
                    Err(e) => Err(format!("{label}: {e}")),
                },
            ]
        })
        .collect()
}

/// `(formula, SAT in K, SAT in KB)` rows of the completeness corpus.
pub fn completeness_corpus() -> Vec<(String, bool, bool)> {
    COMPLETENESS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            (cols[0].to_string(), cols[1] == "SAT", cols[2] == "SAT")
        })
        .collect()
}

fn completeness() -> Vec<Outcome> {
    let oracle = Oracle::new(OracleConfig::default());
    let cases: Vec<(String, FrameClass, bool)> = completeness_corpus()
        .into_iter()
        .flat_map(|(s, k, kb)| [(s.clone(), FrameClass::K, k), (s, FrameClass::KB, kb)])
        .collect();
    cases
        .par_iter()
        .map(|(s, class, sat)| {
            let phi = parse_formula(s).map_err(|e| format!("{s}: {e}"))?;
            match completeness_pipeline(&phi, *class, &oracle)
                .map_err(|e| format!("{s} in {class}: {e}"))?
            {
                PipelineOutcome::Model { model, state } => {
                    let verified =
                        class.contains(&model) && satisfies(&model, state, &phi).unwrap_or(false);
                    match (sat, verified) {
                        (true, true) => Ok(()),
                        (true, false) => Err(format!("{s} in {class}: model does not verify")),
                        (false, _) => Err(format!("{s} in {class}: model for an UNSAT label")),
                    }
                }
                PipelineOutcome::Inconsistent if !sat => Ok(()),
                PipelineOutcome::Inconsistent => {
                    Err(format!("{s} in {class}: INCONSISTENT for a SAT label"))
                }
                PipelineOutcome::Unknown(r) => Err(format!("{s} in {class}: UNKNOWN ({r})")),
            }
        })
        .collect()
}
