//! Checks around the kernel: semantic sampling of theorems, single-step
//! mutations, and the dual of a derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{as_implication, Derivation, Rule, Step, Theorem};
use crate::formula::Formula;
use crate::kripke::{enumerate_models, random_model, KripkeModel, DEFAULT_ENUMERATION_BUDGET};
use crate::model_io::write_model;
use crate::semantics::eval_algebraic;

/// Models larger than this are not enumerated exhaustively.
const ENUMERATED_STATES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub models_checked: usize,
    pub enumerated: usize,
    /// Each refuting model as a `.kmj` document with the refuted state.
    pub refutations: Vec<(String, String)>,
}

impl SoundnessReport {
    pub fn sound(&self) -> bool {
        self.refutations.is_empty()
    }
}

/// Evaluate `formula` on `n` models of `class`: first every model with at
/// most two states (as far as `n` allows), then random models with up to
/// `max_states` states.
pub fn sample_formula(
    formula: &Formula,
    class: crate::kripke::FrameClass,
    n: usize,
    max_states: usize,
    seed: u64,
) -> SoundnessReport {
    let atoms: Vec<String> = formula.free_vars().into_iter().collect();
    let mut report = SoundnessReport {
        models_checked: 0,
        enumerated: 0,
        refutations: Vec::new(),
    };
    let check = |m: &KripkeModel, report: &mut SoundnessReport| {
        report.models_checked += 1;
        let truth = eval_algebraic(formula, m).expect("atoms are valuated");
        if let Some(s) = (0..m.len()).find(|&s| !truth.contains(s)) {
            report
                .refutations
                .push((write_model(m), m.name(s).to_string()));
        }
    };
    if let Ok(stream) = enumerate_models(
        ENUMERATED_STATES.min(max_states),
        &atoms,
        class,
        DEFAULT_ENUMERATION_BUDGET,
    ) {
        for m in stream.take(n) {
            check(&m, &mut report);
            report.enumerated += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while report.models_checked < n {
        let m = random_model(&mut rng, max_states, &atoms, class);
        check(&m, &mut report);
    }
    report
}

/// Evaluate a theorem on `n` models of its logic's frame class. Any
/// refutation is a kernel bug.
pub fn soundness_sample(t: &Theorem, n: usize, max_states: usize, seed: u64) -> SoundnessReport {
    sample_formula(t.formula(), t.logic(), n, max_states, seed)
}

#[derive(Debug, Clone)]
pub struct Mutation {
    pub step: usize,
    pub kind: &'static str,
    pub derivation: Derivation,
}

/// The fixed mutation set: for every step, conjoin `false` to its formula,
/// swap its root connective, and point its first premise at itself or at
/// the next step.
pub fn mutations(d: &Derivation) -> Vec<Mutation> {
    let mut out = Vec::new();
    for k in 0..d.steps.len() {
        let mut push = |kind, edit: &dyn Fn(&mut Step)| {
            let mut m = d.clone();
            edit(&mut m.steps[k]);
            out.push(Mutation {
                step: k,
                kind,
                derivation: m,
            });
        };
        push("conjoin-false", &|s| {
            s.formula = Formula::and(s.formula.clone(), Formula::Bottom)
        });
        match &d.steps[k].formula {
            Formula::Or(a, b) => {
                let f = Formula::and((**a).clone(), (**b).clone());
                push("swap-root", &|s| s.formula = f.clone());
            }
            Formula::And(a, b) => {
                let f = Formula::or((**a).clone(), (**b).clone());
                push("swap-root", &|s| s.formula = f.clone());
            }
            _ => {}
        }
        if !d.steps[k].rule.premises().is_empty() {
            push("self-reference", &|s| *s.rule.premises_mut()[0] = k);
            if k + 1 < d.steps.len() {
                push("forward-reference", &|s| *s.rule.premises_mut()[0] = k + 1);
            }
        }
    }
    out
}

/// Extend a derivation of `a -> b` to one of its dual `dual(b) -> dual(a)`:
/// substitute `!p` for every free atom, then swap the disjuncts by a
/// tautology and modus ponens. A theorem that is not a disjunction is read
/// as `true -> theorem`.
pub fn dualize(d: &Derivation) -> Derivation {
    let mut out = d.clone();
    let Some(last) = d.steps.last() else {
        return out;
    };
    let theorem = last.formula.clone();
    let mut current = theorem.clone();
    for atom in theorem.free_vars() {
        let by = Formula::neg_atom(atom.clone());
        current = current.substitute(&atom, &by);
        out.steps.push(Step {
            rule: Rule::Substitution {
                premise: out.steps.len() - 1,
                atom,
                by,
            },
            formula: current.clone(),
        });
    }
    let (a, b) = as_implication(&theorem).unwrap_or((Formula::Top, theorem));
    let dual = Formula::implies(b.dual(), a.dual());
    let flipped = out.steps.len() - 1;
    out.steps.push(Step {
        rule: Rule::Taut,
        formula: Formula::implies(current, dual.clone()),
    });
    out.steps.push(Step {
        rule: Rule::ModusPonens {
            implication: out.steps.len() - 1,
            antecedent: flipped,
        },
        formula: dual,
    });
    out
}
