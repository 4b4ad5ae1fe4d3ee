use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::oracle::{Oracle, OracleVerdict};
use super::sigma::{SigmaError, SigmaTable, TypeSet};
use crate::filtration::Strategy;
use crate::formula::{
    expansion, fl_closure, is_mucml, ClosureSet, Formula, IndexError, SubformulaIndex,
};
use crate::kripke::{FrameClass, KripkeModel, Relation, StateSet};
use crate::model_io::model_json;
use crate::semantics::{eval_algebraic, EvalError};
use crate::syntax::print_formula;

/// What to do with an UNKNOWN verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownPolicy {
    #[default]
    Fail,
    Exclude,
    Include,
}

impl FromStr for UnknownPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fail" => Ok(UnknownPolicy::Fail),
            "exclude" => Ok(UnknownPolicy::Exclude),
            "include" => Ok(UnknownPolicy::Include),
            _ => Err(format!(
                "unknown policy `{s}` (expected fail, exclude or include)"
            )),
        }
    }
}

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownPolicy::Fail => "fail",
            UnknownPolicy::Exclude => "exclude",
            UnknownPolicy::Include => "include",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error("oracle returned UNKNOWN for `{query}`: {reason}")]
    Unknown { query: String, reason: String },
    #[error("strategy {strategy} leaves the bounds at ({from},{to})")]
    EscapesBounds {
        strategy: Strategy,
        from: String,
        to: String,
    },
    #[error("strategy {strategy} leaves class {class}: {detail}")]
    OutsideClass {
        strategy: Strategy,
        class: FrameClass,
        detail: String,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("`{0}` is not in the continuous fragment")]
    NotContinuous(String),
}

/// A locally coherent subset of Σ with the oracle's verdict on its
/// characteristic conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaAtom {
    pub members: TypeSet,
    pub verdict: OracleVerdict,
}

/// Every locally coherent subset of Σ together with its verdict, in
/// enumeration order.
pub fn atom_candidates(
    sigma: &SigmaTable,
    logic: FrameClass,
    oracle: &Oracle,
) -> Result<Vec<SigmaAtom>, CanonicalError> {
    let sets = sigma.coherent_sets(24)?;
    Ok(sets
        .into_par_iter()
        .map(|members| {
            let verdict = oracle.query(&sigma.conjunction(&members), logic);
            SigmaAtom { members, verdict }
        })
        .collect())
}

/// The Σ-atoms: coherent subsets whose conjunction is satisfiable in the
/// logic's frames. UNKNOWN verdicts follow `policy`; the returned strings
/// are warnings.
pub fn enumerate_atoms(
    sigma: &SigmaTable,
    logic: FrameClass,
    oracle: &Oracle,
    policy: UnknownPolicy,
) -> Result<(Vec<SigmaAtom>, Vec<String>), CanonicalError> {
    let mut atoms = Vec::new();
    let mut warnings = Vec::new();
    for atom in atom_candidates(sigma, logic, oracle)? {
        match &atom.verdict {
            OracleVerdict::Sat { .. } => atoms.push(atom),
            OracleVerdict::UnsatCertified { .. } => {}
            OracleVerdict::Unknown { reason } => {
                let query = print_formula(&sigma.conjunction(&atom.members));
                match policy {
                    UnknownPolicy::Fail => {
                        return Err(CanonicalError::Unknown {
                            query,
                            reason: reason.clone(),
                        })
                    }
                    UnknownPolicy::Exclude => {
                        warnings.push(format!("excluded atom with unknown verdict: {query}"))
                    }
                    UnknownPolicy::Include => {
                        warnings.push(format!("included atom with unknown verdict: {query}"));
                        atoms.push(atom);
                    }
                }
            }
        }
    }
    Ok((atoms, warnings))
}

#[derive(Debug, Clone)]
pub struct CanonicalModel {
    pub logic: FrameClass,
    pub strategy: Strategy,
    pub sigma: SigmaTable,
    pub atoms: Vec<SigmaAtom>,
    /// Verdicts on `psi_A & <>psi_B`, row-major over atoms.
    pub edge_verdicts: Vec<OracleVerdict>,
    pub r_min: Relation,
    pub r_max: Relation,
    /// States named `a0`, `a1`, ... in atom order; `V(p)` is the set of
    /// atoms containing `p`.
    pub model: KripkeModel,
    pub warnings: Vec<String>,
}

/// Whether `a` and `b` satisfy the box clause: `[]phi ∈ a` implies `phi ∈ b`.
fn box_clause(sigma: &SigmaTable, a: &TypeSet, b: &TypeSet) -> bool {
    sigma
        .boxes()
        .iter()
        .all(|&(bx, d)| !a.contains(bx) || b.contains(d))
}

pub fn build_canonical(
    sigma: &SigmaTable,
    logic: FrameClass,
    strategy: Strategy,
    oracle: &Oracle,
    policy: UnknownPolicy,
) -> Result<CanonicalModel, CanonicalError> {
    let (atoms, mut warnings) = enumerate_atoms(sigma, logic, oracle, policy)?;
    let n = atoms.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let edge_verdicts: Vec<OracleVerdict> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let q = Formula::and(
                sigma.conjunction(&atoms[i].members),
                Formula::diamond(sigma.conjunction(&atoms[j].members)),
            );
            oracle.query(&q, logic)
        })
        .collect();
    let mut r_min = Relation::empty(n);
    let mut r_max = Relation::empty(n);
    for (&(i, j), v) in pairs.iter().zip(&edge_verdicts) {
        if box_clause(sigma, &atoms[i].members, &atoms[j].members) {
            r_max.insert(i, j);
        }
        let edge = match v {
            OracleVerdict::Sat { .. } => true,
            OracleVerdict::UnsatCertified { .. } => false,
            OracleVerdict::Unknown { reason } => {
                let query = format!("a{i} R a{j}");
                match policy {
                    UnknownPolicy::Fail => {
                        return Err(CanonicalError::Unknown {
                            query,
                            reason: reason.clone(),
                        })
                    }
                    UnknownPolicy::Exclude => {
                        warnings.push(format!("excluded edge with unknown verdict: {query}"));
                        false
                    }
                    UnknownPolicy::Include => {
                        warnings.push(format!("included edge with unknown verdict: {query}"));
                        true
                    }
                }
            }
        };
        if edge {
            r_min.insert(i, j);
        }
    }
    let relation = strategy.apply(&r_min, &r_max);
    if let Some((a, b)) = relation.pairs().find(|&(a, b)| !r_max.contains(a, b)) {
        return Err(CanonicalError::EscapesBounds {
            strategy,
            from: format!("a{a}"),
            to: format!("a{b}"),
        });
    }
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut valuation = std::collections::BTreeMap::new();
    for i in 0..sigma.len() {
        if let Formula::Atom(p) = sigma.member(i) {
            valuation.insert(
                p.clone(),
                StateSet::from_indices(n, (0..n).filter(|&a| atoms[a].members.contains(i))),
            );
        }
    }
    if n == 0 {
        // no consistent atom: an empty model cannot be represented, report
        // the inconsistency through the caller
        return Ok(CanonicalModel {
            logic,
            strategy,
            sigma: sigma.clone(),
            atoms,
            edge_verdicts,
            r_min,
            r_max,
            model: KripkeModel::numbered(Relation::empty(1), Default::default()),
            warnings,
        });
    }
    let model = KripkeModel::new(names, relation, valuation).expect("atoms name distinct states");
    if let Err(v) = logic.check(&model) {
        return Err(CanonicalError::OutsideClass {
            strategy,
            class: logic,
            detail: v.describe(&model),
        });
    }
    Ok(CanonicalModel {
        logic,
        strategy,
        sigma: sigma.clone(),
        atoms,
        edge_verdicts,
        r_min,
        r_max,
        model,
        warnings,
    })
}

impl CanonicalModel {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atom index whose member set contains `phi`.
    pub fn atoms_containing(&self, phi: &Formula) -> Vec<usize> {
        match self.sigma.id_of(phi) {
            Some(id) => (0..self.len())
                .filter(|&a| self.atoms[a].members.contains(id))
                .collect(),
            None => Vec::new(),
        }
    }

    /// The atoms sidecar: atom id to member list, verdict and witness.
    pub fn sidecar(&self) -> Value {
        let atoms: serde_json::Map<String, Value> = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let members: Vec<String> = self
                    .sigma
                    .set_members(&a.members)
                    .map(print_formula)
                    .collect();
                (
                    format!("a{i}"),
                    json!({"members": members, "verdict": a.verdict.to_json()}),
                )
            })
            .collect();
        json!({
            "logic": self.logic.name(),
            "strategy": self.strategy.name(),
            "sigma": self.sigma.members().iter().map(print_formula).collect::<Vec<_>>(),
            "atoms": atoms,
            "r_min": self.r_min.pairs().map(|(a, b)| [format!("a{a}"), format!("a{b}")]).collect::<Vec<_>>(),
            "r_max": self.r_max.pairs().map(|(a, b)| [format!("a{a}"), format!("a{b}")]).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }

    pub fn model_json(&self) -> Value {
        model_json(&self.model)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `<>phi ∈ A` iff some `R`-successor of `A` contains `phi`, for every
/// diamond in Σ and every atom.
pub fn existence_check(m: &CanonicalModel) -> LemmaReport {
    let mut report = LemmaReport {
        checked: 0,
        failures: Vec::new(),
    };
    for (d, g) in m.sigma.diamonds() {
        for a in 0..m.len() {
            report.checked += 1;
            let member = m.atoms[a].members.contains(d);
            let witnessed = m
                .model
                .successors(a)
                .iter()
                .any(|&b| m.atoms[b].members.contains(g));
            if member != witnessed {
                report.failures.push(format!(
                    "a{a}: {} {} but {}",
                    print_formula(m.sigma.member(d)),
                    if member {
                        "is a member"
                    } else {
                        "is not a member"
                    },
                    if witnessed {
                        "a successor contains its body"
                    } else {
                        "no successor contains its body"
                    },
                ));
            }
        }
    }
    report
}

/// `psi_A & psi_B` is consistent iff `A = B`, over all pairs of atoms.
pub fn distinctness_check(
    atoms: &[SigmaAtom],
    sigma: &SigmaTable,
    logic: FrameClass,
    oracle: &Oracle,
) -> LemmaReport {
    let n = atoms.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let verdicts: Vec<OracleVerdict> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let q = Formula::and(
                sigma.conjunction(&atoms[i].members),
                sigma.conjunction(&atoms[j].members),
            );
            oracle.query(&q, logic)
        })
        .collect();
    let mut report = LemmaReport {
        checked: pairs.len(),
        failures: Vec::new(),
    };
    for (&(i, j), v) in pairs.iter().zip(&verdicts) {
        let ok = if i == j { v.is_sat() } else { v.is_unsat() };
        if !ok {
            report.failures.push(format!("a{i} & a{j}: {}", v.tag()));
        }
    }
    report
}

/// For every clean member `xi` of Σ in the continuous fragment and every
/// atom `A`: `xi ∈ A` iff `A` satisfies `xi` in the canonical model.
pub fn truth_lemma_check(m: &CanonicalModel) -> Result<LemmaReport, CanonicalError> {
    let mut report = LemmaReport {
        checked: 0,
        failures: Vec::new(),
    };
    if m.is_empty() {
        return Ok(report);
    }
    for (id, xi) in m.sigma.members().iter().enumerate() {
        if !xi.is_clean() || !is_mucml(xi) {
            continue;
        }
        let truth = eval_algebraic(xi, &m.model)?;
        for a in 0..m.len() {
            report.checked += 1;
            let member = m.atoms[a].members.contains(id);
            if member != truth.contains(a) {
                let replay = match &m.atoms[a].verdict {
                    OracleVerdict::Sat { model, state } => {
                        let ok =
                            eval_algebraic(xi, model).is_ok_and(|s| s.contains(*state)) == member;
                        if ok {
                            "oracle witness agrees with membership: construction fault"
                        } else {
                            "oracle witness disagrees with membership: oracle fault"
                        }
                    }
                    _ => "no oracle witness",
                };
                report.failures.push(format!(
                    "a{a}: {} {} but {} ({replay})",
                    print_formula(xi),
                    if member {
                        "is a member"
                    } else {
                        "is not a member"
                    },
                    if truth.contains(a) { "holds" } else { "fails" },
                ));
            }
        }
    }
    Ok(report)
}

/// Replace each bound variable `x_i` free in `phi` by the disjunction of the
/// characteristic conjunctions of the atoms in `U_i`, the meaning of the
/// expansion of `x_i`'s fixpoint body in the canonical model.
pub fn name_expansion(
    xi: &Formula,
    phi: &Formula,
    m: &CanonicalModel,
) -> Result<Formula, CanonicalError> {
    let index = SubformulaIndex::new(xi)?;
    let mut out = phi.clone();
    for b in index.binders() {
        if !phi.occurs_free(&b.name) {
            continue;
        }
        let delta = index.node(b.body_node).clone();
        let set = eval_algebraic(&expansion(&index, &delta)?, &m.model)?;
        let psi_u =
            Formula::disjunction(set.iter().map(|a| m.sigma.conjunction(&m.atoms[a].members)));
        out = out.substitute(&b.name, &psi_u);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineOutcome {
    Model { model: KripkeModel, state: usize },
    Inconsistent,
    Unknown(String),
}

impl PipelineOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            PipelineOutcome::Model { .. } => "MODEL",
            PipelineOutcome::Inconsistent => "INCONSISTENT",
            PipelineOutcome::Unknown(_) => "UNKNOWN",
        }
    }
}

/// Build the canonical model over the negation-closed closure of `phi`
/// and return a verified model of `phi` from it, or report that no atom
/// contains `phi`.
pub fn completeness_pipeline(
    phi: &Formula,
    logic: FrameClass,
    oracle: &Oracle,
) -> Result<PipelineOutcome, CanonicalError> {
    if !is_mucml(phi) {
        return Err(CanonicalError::NotContinuous(print_formula(phi)));
    }
    let sigma = SigmaTable::new(&fl_closure([phi], true))?;
    let m = match build_canonical(
        &sigma,
        logic,
        Strategy::for_class(logic),
        oracle,
        UnknownPolicy::Fail,
    ) {
        Ok(m) => m,
        Err(CanonicalError::Unknown { query, reason }) => {
            return Ok(PipelineOutcome::Unknown(format!("{query}: {reason}")))
        }
        Err(e) => return Err(e),
    };
    let Some(&state) = m.atoms_containing(phi).first() else {
        return Ok(PipelineOutcome::Inconsistent);
    };
    let holds = eval_algebraic(phi, &m.model)?.contains(state);
    if !holds || !logic.contains(&m.model) {
        return Ok(PipelineOutcome::Unknown(format!(
            "atom a{state} contains the formula but the canonical model does not verify it"
        )));
    }
    Ok(PipelineOutcome::Model {
        model: m.model,
        state,
    })
}

/// Negation-closed closure of a list of formulas, as a table.
pub fn sigma_of(formulas: &[Formula]) -> Result<SigmaTable, SigmaError> {
    SigmaTable::new(&fl_closure(formulas, true))
}

/// Table for a closure set given explicitly.
pub fn sigma_table(set: &ClosureSet) -> Result<SigmaTable, SigmaError> {
    SigmaTable::new(set)
}
