//! Filtrations of Kripke models through finite closed formula sets, the
//! translation of fixpoint formulas into fresh atoms, and the finite model
//! pipeline built on top of both.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::formula::{fl_closure, fresh_name, is_mucml, ClosureSet, Formula};
use crate::kripke::{FrameClass, KripkeModel, Relation, StateSet};
use crate::model_io::model_json;
use crate::semantics::{eval_algebraic, EvalError};

/// Which relation between `R^min` and `R^max` a filtration uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Min,
    Max,
    Reflexive,
    Symmetric,
    Transitive,
    ReflTrans,
    Equivalence,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Min,
        Strategy::Max,
        Strategy::Reflexive,
        Strategy::Symmetric,
        Strategy::Transitive,
        Strategy::ReflTrans,
        Strategy::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Min => "min",
            Strategy::Max => "max",
            Strategy::Reflexive => "reflexive",
            Strategy::Symmetric => "symmetric",
            Strategy::Transitive => "transitive",
            Strategy::ReflTrans => "refl-trans",
            Strategy::Equivalence => "equivalence",
        }
    }

    /// Default strategy for a frame class.
    pub fn for_class(class: FrameClass) -> Strategy {
        match class {
            FrameClass::K => Strategy::Min,
            FrameClass::T => Strategy::Reflexive,
            FrameClass::KB => Strategy::Symmetric,
            FrameClass::K4 => Strategy::Transitive,
            FrameClass::S4 => Strategy::ReflTrans,
            FrameClass::S5 => Strategy::Equivalence,
        }
    }

    /// The relation this strategy picks given the two bounds.
    pub fn apply(self, r_min: &Relation, r_max: &Relation) -> Relation {
        match self {
            Strategy::Min => r_min.clone(),
            Strategy::Max => r_max.clone(),
            Strategy::Reflexive => r_min.reflexive_closure(),
            Strategy::Symmetric => r_min.symmetric_closure(),
            Strategy::Transitive => r_min.transitive_closure(),
            Strategy::ReflTrans => r_min.reflexive_closure().transitive_closure(),
            Strategy::Equivalence => r_min.equivalence_closure(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy `{0}`")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiltrationError {
    #[error("sigma is not FL-closed: `{missing}` is missing (needed by `{member}`)")]
    NotClosed { member: String, missing: String },
    #[error("strategy {strategy} leaves R^max at ({from},{to})")]
    EscapesMax {
        strategy: Strategy,
        from: String,
        to: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("`{0}` is not a clean formula of the continuous fragment")]
    NotContinuous(String),
    #[error("the witness is not a {class} model: {reason}")]
    WitnessOutsideClass { class: FrameClass, reason: String },
    #[error("the witness does not refute `{0}`")]
    WitnessSatisfies(String),
}

/// Truth sets of every member of Σ on a model, in Σ order.
fn truth_table(model: &KripkeModel, sigma: &ClosureSet) -> Result<Vec<StateSet>, EvalError> {
    sigma.iter().map(|phi| eval_algebraic(phi, model)).collect()
}

fn check_closed(sigma: &ClosureSet) -> Result<(), FiltrationError> {
    match sigma.missing_successor() {
        Some((member, missing)) => Err(FiltrationError::NotClosed {
            member: member.to_string(),
            missing: missing.to_string(),
        }),
        None => Ok(()),
    }
}

/// `∼_Σ` classes, ordered by smallest member.
fn partition(model: &KripkeModel, truth: &[StateSet]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut signatures: Vec<Vec<bool>> = Vec::new();
    let mut class_of = vec![0; model.len()];
    for s in model.states() {
        let sig: Vec<bool> = truth.iter().map(|set| set.contains(s)).collect();
        match signatures.iter().position(|g| *g == sig) {
            Some(c) => {
                classes[c].push(s);
                class_of[s] = c;
            }
            None => {
                class_of[s] = classes.len();
                classes.push(vec![s]);
                signatures.push(sig);
            }
        }
    }
    (classes, class_of)
}

fn bounds(
    model: &KripkeModel,
    sigma: &ClosureSet,
    truth: &[StateSet],
    classes: &[Vec<usize>],
    class_of: &[usize],
) -> (Relation, Relation) {
    let k = classes.len();
    let r_min = Relation::from_pairs(
        k,
        model
            .relation()
            .pairs()
            .map(|(s, t)| (class_of[s], class_of[t])),
    );
    let members: Vec<&Formula> = sigma.iter().collect();
    let position = |phi: &Formula| members.iter().position(|m| *m == phi);
    // (truth of []φ, truth of φ) for every box in Σ
    let boxes: Vec<(usize, usize)> = sigma
        .boxes()
        .filter_map(|(b, body)| Some((position(b)?, position(body)?)))
        .collect();
    let mut r_max = Relation::empty(k);
    for (c, cs) in classes.iter().enumerate() {
        for (d, ds) in classes.iter().enumerate() {
            let (s, t) = (cs[0], ds[0]);
            if boxes
                .iter()
                .all(|&(b, body)| !truth[b].contains(s) || truth[body].contains(t))
            {
                r_max.insert(c, d);
            }
        }
    }
    (r_min, r_max)
}

fn class_name(model: &KripkeModel, members: &[usize]) -> String {
    let names: Vec<&str> = members.iter().map(|&s| model.name(s)).collect();
    format!("{{{}}}", names.join(","))
}

/// Atoms occurring as members of Σ.
fn sigma_atoms(sigma: &ClosureSet) -> BTreeSet<String> {
    sigma
        .iter()
        .filter_map(|f| match f {
            Formula::Atom(p) => Some(p.clone()),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FiltrationResult {
    pub source: KripkeModel,
    pub sigma: ClosureSet,
    pub strategy: Strategy,
    /// Source states of each class.
    pub classes: Vec<Vec<usize>>,
    /// Class of each source state.
    pub class_of: Vec<usize>,
    pub quotient: KripkeModel,
    pub r_min: Relation,
    pub r_max: Relation,
}

pub fn build_filtration(
    model: &KripkeModel,
    sigma: &ClosureSet,
    strategy: Strategy,
) -> Result<FiltrationResult, FiltrationError> {
    check_closed(sigma)?;
    let truth = truth_table(model, sigma)?;
    let (classes, class_of) = partition(model, &truth);
    let (r_min, r_max) = bounds(model, sigma, &truth, &classes, &class_of);
    let relation = strategy.apply(&r_min, &r_max);
    let names: Vec<String> = classes.iter().map(|c| class_name(model, c)).collect();
    if let Some((a, b)) = relation.pairs().find(|&(a, b)| !r_max.contains(a, b)) {
        return Err(FiltrationError::EscapesMax {
            strategy,
            from: names[a].clone(),
            to: names[b].clone(),
        });
    }
    let k = classes.len();
    let valuation = sigma_atoms(sigma)
        .into_iter()
        .map(|p| {
            let set = StateSet::from_indices(
                k,
                classes
                    .iter()
                    .enumerate()
                    .filter(|(_, cs)| model.value(&p).is_some_and(|v| v.contains(cs[0])))
                    .map(|(c, _)| c),
            );
            (p, set)
        })
        .collect();
    let quotient = KripkeModel::new(names, relation, valuation).expect("quotient is well formed");
    Ok(FiltrationResult {
        source: model.clone(),
        sigma: sigma.clone(),
        strategy,
        classes,
        class_of,
        quotient,
        r_min,
        r_max,
    })
}

impl FiltrationResult {
    pub fn to_json(&self) -> serde_json::Value {
        let name = |c: usize| self.quotient.name(c).to_string();
        let edges = |r: &Relation| -> Vec<[String; 2]> {
            r.pairs().map(|(a, b)| [name(a), name(b)]).collect()
        };
        json!({
            "strategy": self.strategy,
            "sigma": self.sigma.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "partition": self.classes.iter().enumerate().map(|(c, cs)| {
                json!({
                    "class": name(c),
                    "members": cs.iter().map(|&s| self.source.name(s)).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
            "quotient": model_json(&self.quotient),
            "r_min": edges(&self.r_min),
            "r_max": edges(&self.r_max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Check the three filtration conditions for `candidate`, whose states are
/// reached from the source by `class_map`.
pub fn validate_filtration(
    model: &KripkeModel,
    sigma: &ClosureSet,
    candidate: &KripkeModel,
    class_map: &[usize],
) -> Result<ValidationReport, FiltrationError> {
    let truth = truth_table(model, sigma)?;
    let mut violations = Vec::new();
    let sig = |s: usize| -> Vec<bool> { truth.iter().map(|set| set.contains(s)).collect() };
    // (i) the state set is the quotient
    if class_map.len() != model.len() || class_map.iter().any(|&c| c >= candidate.len()) {
        violations
            .push("class map does not send every source state to a candidate state".to_string());
        return Ok(ValidationReport {
            valid: false,
            violations,
        });
    }
    for s in model.states() {
        for t in model.states() {
            let same = class_map[s] == class_map[t];
            if same != (sig(s) == sig(t)) {
                violations.push(format!(
                    "(i) {} and {} are {} but {}",
                    model.name(s),
                    model.name(t),
                    if same { "merged" } else { "separated" },
                    if same {
                        "disagree on sigma"
                    } else {
                        "agree on sigma"
                    },
                ));
            }
        }
    }
    let hit: BTreeSet<usize> = class_map.iter().copied().collect();
    for c in candidate.states().filter(|c| !hit.contains(c)) {
        violations.push(format!(
            "(i) state {} represents no source state",
            candidate.name(c)
        ));
    }
    if !violations.is_empty() {
        return Ok(ValidationReport {
            valid: false,
            violations,
        });
    }
    // (ii) bounds, computed on representatives
    let k = candidate.len();
    let mut classes = vec![Vec::new(); k];
    for s in model.states() {
        classes[class_map[s]].push(s);
    }
    let (r_min, r_max) = bounds(model, sigma, &truth, &classes, class_map);
    for (a, b) in r_min.pairs() {
        if !candidate.has_edge(a, b) {
            violations.push(format!(
                "(ii) R^min edge ({},{}) missing",
                candidate.name(a),
                candidate.name(b)
            ));
        }
    }
    for (a, b) in candidate.relation().pairs() {
        if !r_max.contains(a, b) {
            violations.push(format!(
                "(ii) edge ({},{}) outside R^max",
                candidate.name(a),
                candidate.name(b)
            ));
        }
    }
    // (iii) valuation
    for p in sigma_atoms(sigma) {
        let expected = StateSet::from_indices(
            k,
            (0..k).filter(|&c| model.value(&p).is_some_and(|v| v.contains(classes[c][0]))),
        );
        if candidate.value(&p) != Some(&expected) {
            violations.push(format!(
                "(iii) valuation of `{p}` differs from the quotient valuation"
            ));
        }
    }
    Ok(ValidationReport {
        valid: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub formula: String,
    pub state: String,
    pub class: String,
    pub in_source: bool,
    pub in_quotient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    /// Members of the continuous fragment that were compared.
    pub checked: Vec<String>,
    /// Members outside the fragment; compared, but not covered by the
    /// theorem.
    pub skipped: Vec<String>,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
    /// Disagreements on skipped members.
    pub boundary_disagreements: Vec<Disagreement>,
}

impl AgreementReport {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compare truth in the source and in the quotient for every Σ member at
/// every state.
pub fn filtration_agreement_check(
    fr: &FiltrationResult,
) -> Result<AgreementReport, FiltrationError> {
    let mut report = AgreementReport {
        checked: Vec::new(),
        skipped: Vec::new(),
        agreements: 0,
        disagreements: Vec::new(),
        boundary_disagreements: Vec::new(),
    };
    for phi in fr.sigma.iter() {
        let inside = is_mucml(phi);
        if inside {
            report.checked.push(phi.to_string());
        } else {
            report.skipped.push(phi.to_string());
        }
        let source = eval_algebraic(phi, &fr.source)?;
        let quotient = eval_algebraic(phi, &fr.quotient)?;
        for s in fr.source.states() {
            let c = fr.class_of[s];
            let (a, b) = (source.contains(s), quotient.contains(c));
            if a == b {
                if inside {
                    report.agreements += 1;
                }
                continue;
            }
            let d = Disagreement {
                formula: phi.to_string(),
                state: fr.source.name(s).to_string(),
                class: fr.quotient.name(c).to_string(),
                in_source: a,
                in_quotient: b,
            };
            if inside {
                report.disagreements.push(d);
            } else {
                report.boundary_disagreements.push(d);
            }
        }
    }
    Ok(report)
}

/// Fixpoint members of Σ replaced by fresh atoms.
#[derive(Debug, Clone)]
pub struct TranslationResult {
    pub model: KripkeModel,
    /// `(p_i, φ_i)` in Σ order.
    pub fresh: Vec<(String, Formula)>,
    /// `(ξ, τ(ξ))` for every ξ ∈ Σ.
    pub translation: Vec<(Formula, Formula)>,
    pub conditions: TranslationConditions,
}

/// The five conditions of the sufficient condition for admitting filtration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationConditions {
    /// The new valuation agrees with the old one on Σ's atoms.
    pub valuation_preserved: bool,
    /// The frame is unchanged, so the new model is in every frame class the
    /// old one is in.
    pub same_frame: bool,
    /// `τ[Σ]` is FL-closed.
    pub image_closed: bool,
    /// `τ([]φ) = []τ(φ)`.
    pub commutes_with_box: bool,
    /// `S, s ⊩ ξ` iff `S', s ⊩ τ(ξ)`.
    pub truth_preserved: bool,
    pub failures: Vec<String>,
}

impl TranslationConditions {
    pub fn all_hold(&self) -> bool {
        self.valuation_preserved
            && self.same_frame
            && self.image_closed
            && self.commutes_with_box
            && self.truth_preserved
    }
}

fn translate(phi: &Formula, table: &BTreeMap<Formula, String>) -> Result<Formula, FiltrationError> {
    let missing = |f: &Formula| FiltrationError::NotClosed {
        member: phi.to_string(),
        missing: f.to_string(),
    };
    Ok(match phi {
        Formula::Mu(..) | Formula::Nu(..) => {
            let key = phi.canonical();
            Formula::Atom(table.get(&key).ok_or_else(|| missing(&key))?.clone())
        }
        Formula::Or(a, b) => Formula::or(translate(a, table)?, translate(b, table)?),
        Formula::And(a, b) => Formula::and(translate(a, table)?, translate(b, table)?),
        Formula::Diamond(a) => Formula::diamond(translate(a, table)?),
        Formula::Box(a) => Formula::boxed(translate(a, table)?),
        _ => phi.clone(),
    })
}

pub fn ml_translation(
    model: &KripkeModel,
    sigma: &ClosureSet,
) -> Result<TranslationResult, FiltrationError> {
    check_closed(sigma)?;
    let mut avoid: BTreeSet<String> = sigma.iter().flat_map(|f| f.all_names()).collect();
    avoid.extend(model.valuation().keys().cloned());
    let mut fresh = Vec::new();
    let mut table = BTreeMap::new();
    let mut valuation = model.valuation().clone();
    for phi in sigma.iter().filter(|f| f.is_fixpoint()) {
        let p = fresh_name("p", &avoid);
        avoid.insert(p.clone());
        valuation.insert(p.clone(), eval_algebraic(phi, model)?);
        table.insert(phi.clone(), p.clone());
        fresh.push((p, phi.clone()));
    }
    let translated = model.with_valuation(valuation).expect("same state space");
    let translation: Vec<(Formula, Formula)> = sigma
        .iter()
        .map(|f| Ok((f.clone(), translate(f, &table)?)))
        .collect::<Result<_, FiltrationError>>()?;

    let mut failures = Vec::new();
    let atoms = sigma_atoms(sigma);
    let mut sigma_names: BTreeSet<String> = sigma.iter().flat_map(|f| f.free_vars()).collect();
    sigma_names.extend(atoms);
    let valuation_preserved = sigma_names.iter().all(|p| {
        let ok = translated.value(p) == model.value(p);
        if !ok {
            failures.push(format!("(1) valuation of `{p}` changed"));
        }
        ok
    });
    let same_frame = translated.relation() == model.relation();
    let image = ClosureSet::from_formulas(translation.iter().map(|(_, t)| t.clone()));
    let image_closed = image.is_fl_closed();
    if !image_closed {
        failures.push("(3) the translated set is not FL-closed".to_string());
    }
    let lookup: BTreeMap<&Formula, &Formula> = translation.iter().map(|(a, b)| (a, b)).collect();
    let mut commutes_with_box = true;
    for (b, body) in sigma.boxes() {
        let tb = lookup[b];
        let ok = lookup
            .get(body)
            .is_some_and(|tbody| *tb == Formula::boxed((*tbody).clone()));
        if !ok {
            commutes_with_box = false;
            failures.push(format!("(4) translation of `{b}` is `{tb}`"));
        }
    }
    let mut truth_preserved = true;
    for (xi, t) in &translation {
        let a = eval_algebraic(xi, model)?;
        let b = eval_algebraic(t, &translated)?;
        if a != b {
            truth_preserved = false;
            failures.push(format!("(5) `{xi}` and `{t}` differ"));
        }
    }
    Ok(TranslationResult {
        model: translated,
        fresh,
        translation,
        conditions: TranslationConditions {
            valuation_preserved,
            same_frame,
            image_closed,
            commutes_with_box,
            truth_preserved,
            failures,
        },
    })
}

#[derive(Debug, Clone)]
pub struct FmpResult {
    pub filtration: FiltrationResult,
    pub closure_size: usize,
    pub bound: u128,
    /// A quotient state refuting φ.
    pub refuting_state: usize,
    pub refutes: bool,
    pub in_class: bool,
    pub within_bound: bool,
}

impl FmpResult {
    pub fn holds(&self) -> bool {
        self.refutes && self.in_class && self.within_bound
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "closure_size": self.closure_size,
            "bound": self.bound.to_string(),
            "states": self.filtration.quotient.len(),
            "refuting_state": self.filtration.quotient.name(self.refuting_state),
            "refutes": self.refutes,
            "in_class": self.in_class,
            "within_bound": self.within_bound,
            "countermodel": model_json(&self.filtration.quotient),
        })
    }
}

/// Filtrate a refuting witness through `Cl(φ)` with the class's strategy.
pub fn fmp_search(
    phi: &Formula,
    class: FrameClass,
    witness: &KripkeModel,
) -> Result<FmpResult, FiltrationError> {
    if !phi.is_clean() || !is_mucml(phi) {
        return Err(FiltrationError::NotContinuous(phi.to_string()));
    }
    if let Err(v) = class.check(witness) {
        return Err(FiltrationError::WitnessOutsideClass {
            class,
            reason: v.describe(witness),
        });
    }
    let truth = eval_algebraic(phi, witness)?;
    let Some(state) = witness.states().find(|&s| !truth.contains(s)) else {
        return Err(FiltrationError::WitnessSatisfies(phi.to_string()));
    };
    let sigma = fl_closure([phi], false);
    let fr = build_filtration(witness, &sigma, Strategy::for_class(class))?;
    let refuting_state = fr.class_of[state];
    let refutes = !eval_algebraic(phi, &fr.quotient)?.contains(refuting_state);
    let in_class = class.contains(&fr.quotient);
    let bound = 1u128.checked_shl(sigma.len() as u32).unwrap_or(u128::MAX);
    let within_bound = (fr.quotient.len() as u128) <= bound;
    Ok(FmpResult {
        closure_size: sigma.len(),
        bound,
        refuting_state,
        refutes,
        in_class,
        within_bound,
        filtration: fr,
    })
}
