//! Hilbert-style derivation checking for the continuous modal μ-calculus
//! and its extensions by frame axioms.
//!
//! A derivation is a list of steps. Each step names the rule it uses,
//! refers to earlier steps by index and states the formula it derives. The
//! checker recomputes that formula from the rule and compares up to
//! renaming of bound variables.

mod drv;
mod harness;
mod taut;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{classify_fragment, is_mucml, FixKind, Formula, Fragment};
use crate::kripke::FrameClass;
use crate::syntax::print_formula;

pub use drv::{derivation_hash, read_derivation, write_derivation, DrvError};
pub use harness::{dualize, mutations, soundness_sample, Mutation, SoundnessReport};
pub use taut::{is_tautology, MAX_SKELETON_VARS};

/// Axiom schemas of the base logic and their duals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomSchema {
    /// `!<>false`
    Normality,
    /// `<>(p | q) <-> <>p | <>q`
    Additivity,
    /// `[](p & q) <-> []p & []q`
    AdditivityDual,
    /// `phi[mu x.phi/x] -> mu x.phi` for `phi` continuous in `x`
    Prefixpoint,
    /// `nu x.phi -> phi[nu x.phi/x]` for `phi` cocontinuous in `x`
    Postfixpoint,
}

impl AxiomSchema {
    pub const ALL: [AxiomSchema; 5] = [
        AxiomSchema::Normality,
        AxiomSchema::Additivity,
        AxiomSchema::AdditivityDual,
        AxiomSchema::Prefixpoint,
        AxiomSchema::Postfixpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomSchema::Normality => "normality",
            AxiomSchema::Additivity => "additivity",
            AxiomSchema::AdditivityDual => "additivity-dual",
            AxiomSchema::Prefixpoint => "prefixpoint",
            AxiomSchema::Postfixpoint => "postfixpoint",
        }
    }

    /// Parameters the instantiation map may bind.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            AxiomSchema::Normality => &[],
            AxiomSchema::Additivity | AxiomSchema::AdditivityDual => &["p", "q"],
            AxiomSchema::Prefixpoint | AxiomSchema::Postfixpoint => &["x", "phi"],
        }
    }
}

impl FromStr for AxiomSchema {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AxiomSchema::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axiom schema `{s}`"))
    }
}

/// Frame axioms that extend the base logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExtensionAxiom {
    /// `[]p -> p`
    T,
    /// `p -> []<>p`
    B,
    /// `[]p -> [][]p`
    Four,
    /// `<>p -> []<>p`
    Five,
}

impl ExtensionAxiom {
    pub const ALL: [ExtensionAxiom; 4] = [
        ExtensionAxiom::T,
        ExtensionAxiom::B,
        ExtensionAxiom::Four,
        ExtensionAxiom::Five,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExtensionAxiom::T => "T",
            ExtensionAxiom::B => "B",
            ExtensionAxiom::Four => "4",
            ExtensionAxiom::Five => "5",
        }
    }

    /// The extension axioms available in each logic.
    pub fn allowed_in(self, logic: FrameClass) -> bool {
        use ExtensionAxiom::*;
        match logic {
            FrameClass::K => false,
            FrameClass::T => self == T,
            FrameClass::KB => self == B,
            FrameClass::K4 => self == Four,
            FrameClass::S4 => matches!(self, T | Four),
            FrameClass::S5 => true,
        }
    }

    /// The instance of the axiom at `phi`.
    pub fn instance(self, phi: &Formula) -> Formula {
        let p = phi.clone();
        match self {
            ExtensionAxiom::T => Formula::implies(Formula::boxed(p.clone()), p),
            ExtensionAxiom::B => Formula::implies(p.clone(), Formula::boxed(Formula::diamond(p))),
            ExtensionAxiom::Four => {
                Formula::implies(Formula::boxed(p.clone()), Formula::boxed(Formula::boxed(p)))
            }
            ExtensionAxiom::Five => Formula::implies(
                Formula::diamond(p.clone()),
                Formula::boxed(Formula::diamond(p)),
            ),
        }
    }

    /// Recover the instantiating formula from an instance, if it is one.
    pub fn matches(self, f: &Formula) -> Option<Formula> {
        let Formula::Or(l, r) = f else { return None };
        let phi = match (self, &**l, &**r) {
            (ExtensionAxiom::T, Formula::Diamond(a), _) => a.negate(),
            (ExtensionAxiom::B, _, _) => l.negate(),
            (ExtensionAxiom::Four, Formula::Diamond(a), _) => a.negate(),
            (ExtensionAxiom::Five, Formula::Box(a), _) => a.negate(),
            _ => return None,
        };
        self.instance(&phi).alpha_eq(f).then_some(phi)
    }
}

impl FromStr for ExtensionAxiom {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ExtensionAxiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown extension axiom `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Diamond,
    Box,
}

/// How a step is justified. Indices refer to earlier steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// Instance of an axiom schema. `params` binds the schema's parameters;
    /// unbound `p`/`q` default to the atoms of the same name.
    Axiom {
        schema: AxiomSchema,
        params: Vec<(String, Formula)>,
    },
    /// Substitution instance of a propositional tautology.
    Taut,
    /// From `phi -> psi` (first) and `phi` (second) infer `psi`.
    ModusPonens {
        implication: usize,
        antecedent: usize,
    },
    /// From `phi -> psi` infer `<>phi -> <>psi` (or the box version).
    Monotonicity {
        premise: usize,
        modality: Modality,
    },
    /// From `phi` infer `phi[psi/atom]`.
    Substitution {
        premise: usize,
        atom: String,
        by: Formula,
    },
    /// From `phi[g/x] -> g` infer `mu x.phi -> g` for continuous `phi`;
    /// dually from `g -> phi[g/x]` infer `g -> nu x.phi`.
    Fixpoint {
        kind: FixKind,
        premise: usize,
        var: String,
        body: Formula,
        goal: Formula,
    },
    Extension(ExtensionAxiom),
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Axiom { .. } => "axiom",
            Rule::Taut => "taut",
            Rule::ModusPonens { .. } => "mp",
            Rule::Monotonicity {
                modality: Modality::Diamond,
                ..
            } => "mono",
            Rule::Monotonicity {
                modality: Modality::Box,
                ..
            } => "mono-box",
            Rule::Substitution { .. } => "subst",
            Rule::Fixpoint {
                kind: FixKind::Mu, ..
            } => "lfp",
            Rule::Fixpoint {
                kind: FixKind::Nu, ..
            } => "gfp",
            Rule::Extension(_) => "extension",
        }
    }

    pub fn premises(&self) -> Vec<usize> {
        match self {
            Rule::ModusPonens {
                implication,
                antecedent,
            } => vec![*implication, *antecedent],
            Rule::Monotonicity { premise, .. }
            | Rule::Substitution { premise, .. }
            | Rule::Fixpoint { premise, .. } => {
                vec![*premise]
            }
            Rule::Axiom { .. } | Rule::Taut | Rule::Extension(_) => Vec::new(),
        }
    }

    pub(crate) fn premises_mut(&mut self) -> Vec<&mut usize> {
        match self {
            Rule::ModusPonens {
                implication,
                antecedent,
            } => vec![implication, antecedent],
            Rule::Monotonicity { premise, .. }
            | Rule::Substitution { premise, .. }
            | Rule::Fixpoint { premise, .. } => {
                vec![premise]
            }
            Rule::Axiom { .. } | Rule::Taut | Rule::Extension(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub logic: FrameClass,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("step refers to step {0}, which does not come before it")]
    DanglingReference(usize),
    #[error("stated formula does not match; the rule yields {expected}")]
    Mismatch { expected: String },
    #[error("premise {premise} has the wrong shape: expected {expected}")]
    PremiseShape { premise: usize, expected: String },
    #[error("`{body}` is not continuous in `{var}`")]
    NotContinuous { var: String, body: String },
    #[error("`{body}` is not cocontinuous in `{var}`")]
    NotCocontinuous { var: String, body: String },
    #[error("not a tautology")]
    NotTautology,
    #[error("propositional skeleton exceeds {MAX_SKELETON_VARS} variables")]
    SkeletonTooLarge,
    #[error("missing or unexpected schema parameter `{0}`")]
    BadParameter(String),
    #[error("not an instance of axiom {0}")]
    NotAnInstance(&'static str),
    #[error("axiom {axiom} is not part of logic {logic}")]
    ExtensionNotAllowed {
        axiom: &'static str,
        logic: FrameClass,
    },
    #[error("`{0}` is bound in the premise and cannot be substituted")]
    SubstitutesBoundName(String),
    #[error("formula leaves the continuous fragment")]
    NotContinuousFormula,
    #[error("derivation has no steps")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step} ({rule}): {violation}")]
pub struct ProofError {
    pub step: usize,
    pub rule: &'static str,
    pub violation: Violation,
}

/// A formula derived by a checked derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem {
    #[serde(serialize_with = "ser_formula")]
    formula: Formula,
    logic: FrameClass,
    hash: String,
}

fn ser_formula<S: serde::Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&print_formula(f))
}

impl Theorem {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn logic(&self) -> FrameClass {
        self.logic
    }

    /// SHA-256 of the derivation's canonical document.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {}", self.logic, print_formula(&self.formula))
    }
}

fn same(a: &Formula, b: &Formula) -> bool {
    a.alpha_eq(b)
}

fn expect(stated: &Formula, expected: Formula) -> Result<(), Violation> {
    if same(stated, &expected) {
        Ok(())
    } else {
        Err(Violation::Mismatch {
            expected: print_formula(&expected),
        })
    }
}

/// Split `a | b` read as `~a -> b`.
fn as_implication(f: &Formula) -> Option<(Formula, Formula)> {
    match f {
        Formula::Or(a, b) => Some((a.negate(), (**b).clone())),
        _ => None,
    }
}

fn side_condition(kind: FixKind, var: &str, body: &Formula) -> Result<(), Violation> {
    let report = classify_fragment(body, &BTreeSet::from([var.to_string()]));
    let ok = match kind {
        FixKind::Mu => matches!(report.fragment, Fragment::InConX | Fragment::InBoth),
        FixKind::Nu => matches!(report.fragment, Fragment::InCoconX | Fragment::InBoth),
    };
    if ok {
        return Ok(());
    }
    let (var, body) = (var.to_string(), print_formula(body));
    Err(match kind {
        FixKind::Mu => Violation::NotContinuous { var, body },
        FixKind::Nu => Violation::NotCocontinuous { var, body },
    })
}

fn axiom_instance(schema: AxiomSchema, params: &[(String, Formula)]) -> Result<Formula, Violation> {
    for (name, _) in params {
        if !schema.params().contains(&name.as_str()) {
            return Err(Violation::BadParameter(name.clone()));
        }
    }
    let get = |name: &str| {
        params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f.clone())
    };
    let atom_or = |name: &str| get(name).unwrap_or_else(|| Formula::atom(name));
    Ok(match schema {
        AxiomSchema::Normality => Formula::boxed(Formula::Top),
        AxiomSchema::Additivity => {
            let (p, q) = (atom_or("p"), atom_or("q"));
            Formula::iff(
                Formula::diamond(Formula::or(p.clone(), q.clone())),
                Formula::or(Formula::diamond(p), Formula::diamond(q)),
            )
        }
        AxiomSchema::AdditivityDual => {
            let (p, q) = (atom_or("p"), atom_or("q"));
            Formula::iff(
                Formula::boxed(Formula::and(p.clone(), q.clone())),
                Formula::and(Formula::boxed(p), Formula::boxed(q)),
            )
        }
        AxiomSchema::Prefixpoint | AxiomSchema::Postfixpoint => {
            let x = match get("x") {
                Some(Formula::Atom(x)) => x,
                _ => return Err(Violation::BadParameter("x".into())),
            };
            let phi = get("phi").ok_or_else(|| Violation::BadParameter("phi".into()))?;
            let kind = if schema == AxiomSchema::Prefixpoint {
                FixKind::Mu
            } else {
                FixKind::Nu
            };
            side_condition(kind, &x, &phi)?;
            let fix = Formula::fixpoint(kind, x.clone(), phi.clone());
            let unfolded = phi.substitute(&x, &fix);
            match kind {
                FixKind::Mu => Formula::implies(unfolded, fix),
                FixKind::Nu => Formula::implies(fix, unfolded),
            }
        }
    })
}

/// Check step `k` against the steps before it.
pub fn check_step(d: &Derivation, k: usize) -> Result<(), ProofError> {
    let step = &d.steps[k];
    check_local(d, k).map_err(|violation| ProofError {
        step: k,
        rule: step.rule.name(),
        violation,
    })
}

fn check_local(d: &Derivation, k: usize) -> Result<(), Violation> {
    let step = &d.steps[k];
    for p in step.rule.premises() {
        if p >= k {
            return Err(Violation::DanglingReference(p));
        }
    }
    let premise = |i: usize| &d.steps[i].formula;
    match &step.rule {
        Rule::Axiom { schema, params } => expect(&step.formula, axiom_instance(*schema, params)?)?,
        Rule::Taut => match is_tautology(&step.formula) {
            Some(true) => {}
            Some(false) => return Err(Violation::NotTautology),
            None => return Err(Violation::SkeletonTooLarge),
        },
        Rule::ModusPonens {
            implication,
            antecedent,
        } => {
            let imp = premise(*implication);
            let wanted = Formula::implies(premise(*antecedent).clone(), step.formula.clone());
            if !same(imp, &wanted) {
                return Err(Violation::PremiseShape {
                    premise: *implication,
                    expected: print_formula(&wanted),
                });
            }
        }
        Rule::Monotonicity {
            premise: i,
            modality,
        } => {
            let (a, b) = as_implication(premise(*i)).ok_or_else(|| Violation::PremiseShape {
                premise: *i,
                expected: "an implication".into(),
            })?;
            let wrap = |f: Formula| match modality {
                Modality::Diamond => Formula::diamond(f),
                Modality::Box => Formula::boxed(f),
            };
            expect(&step.formula, Formula::implies(wrap(a), wrap(b)))?;
        }
        Rule::Substitution {
            premise: i,
            atom,
            by,
        } => {
            let phi = premise(*i);
            if phi.bound_vars().contains(atom) {
                return Err(Violation::SubstitutesBoundName(atom.clone()));
            }
            expect(&step.formula, phi.substitute(atom, by))?;
        }
        Rule::Fixpoint {
            kind,
            premise: i,
            var,
            body,
            goal,
        } => {
            side_condition(*kind, var, body)?;
            let unfolded = body.substitute(var, goal);
            let fix = Formula::fixpoint(*kind, var.clone(), body.clone());
            let (wanted, result) = match kind {
                FixKind::Mu => (
                    Formula::implies(unfolded, goal.clone()),
                    Formula::implies(fix, goal.clone()),
                ),
                FixKind::Nu => (
                    Formula::implies(goal.clone(), unfolded),
                    Formula::implies(goal.clone(), fix),
                ),
            };
            if !same(premise(*i), &wanted) {
                return Err(Violation::PremiseShape {
                    premise: *i,
                    expected: print_formula(&wanted),
                });
            }
            expect(&step.formula, result)?;
        }
        Rule::Extension(axiom) => {
            if !axiom.allowed_in(d.logic) {
                return Err(Violation::ExtensionNotAllowed {
                    axiom: axiom.name(),
                    logic: d.logic,
                });
            }
            axiom
                .matches(&step.formula)
                .ok_or(Violation::NotAnInstance(axiom.name()))?;
        }
    }
    if !is_mucml(&step.formula) {
        return Err(Violation::NotContinuousFormula);
    }
    Ok(())
}

/// Check every step in order; the theorem is the last step's formula.
pub fn check_derivation(d: &Derivation) -> Result<Theorem, ProofError> {
    if d.steps.is_empty() {
        return Err(ProofError {
            step: 0,
            rule: "none",
            violation: Violation::Empty,
        });
    }
    for k in 0..d.steps.len() {
        check_step(d, k)?;
    }
    Ok(Theorem {
        formula: d.steps.last().unwrap().formula.clone(),
        logic: d.logic,
        hash: derivation_hash(d),
    })
}
