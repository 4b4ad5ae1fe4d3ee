//! `.drv` documents: derivations as JSON.
//!
//! ```json
//! {"logic":"K","steps":[
//!   {"rule":"taut","formula":"p -> p"},
//!   {"rule":"subst","premise":0,"atom":"p","by":"<>q","formula":"<>q -> <>q"}]}
//! ```
//!
//! Rules: `axiom` (`schema`, optional `params`), `taut`, `mp` (`premises`:
//! implication then antecedent), `mono` and `mono-box` (`premise`), `subst`
//! (`premise`, `atom`, `by`), `lfp` and `gfp` (`premise`, `var`, `body`,
//! `goal`), `extension` (`schema` one of T, B, 4, 5). Step indices start at 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{AxiomSchema, Derivation, ExtensionAxiom, Modality, Rule, Step};
use crate::formula::{FixKind, Formula};
use crate::kripke::FrameClass;
use crate::syntax::{parse_formula, print_formula, ParseError};

#[derive(Debug, Error)]
pub enum DrvError {
    #[error("malformed derivation document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown logic `{0}`")]
    Logic(String),
    #[error("step {step}: {message}")]
    Schema { step: usize, message: String },
    #[error("step {step}, field `{field}`: {error}")]
    Formula {
        step: usize,
        field: &'static str,
        error: ParseError,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrvDoc {
    logic: String,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
enum StepDoc {
    Axiom {
        schema: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, String>,
        formula: String,
    },
    Taut {
        formula: String,
    },
    Mp {
        premises: [usize; 2],
        formula: String,
    },
    Mono {
        premise: usize,
        formula: String,
    },
    MonoBox {
        premise: usize,
        formula: String,
    },
    Subst {
        premise: usize,
        atom: String,
        by: String,
        formula: String,
    },
    Lfp {
        premise: usize,
        var: String,
        body: String,
        goal: String,
        formula: String,
    },
    Gfp {
        premise: usize,
        var: String,
        body: String,
        goal: String,
        formula: String,
    },
    Extension {
        schema: String,
        formula: String,
    },
}

pub fn read_derivation(text: &str) -> Result<Derivation, DrvError> {
    let doc: DrvDoc = serde_json::from_str(text)?;
    let logic: FrameClass = doc
        .logic
        .parse()
        .map_err(|_| DrvError::Logic(doc.logic.clone()))?;
    let steps = doc
        .steps
        .into_iter()
        .enumerate()
        .map(|(k, s)| step_from_doc(k, s))
        .collect::<Result<_, _>>()?;
    Ok(Derivation { logic, steps })
}

fn step_from_doc(step: usize, doc: StepDoc) -> Result<Step, DrvError> {
    let parse = |field: &'static str, text: &str| {
        parse_formula(text).map_err(|error| DrvError::Formula { step, field, error })
    };
    let schema_err = |message: String| DrvError::Schema { step, message };
    let (rule, formula) = match doc {
        StepDoc::Axiom {
            schema,
            params,
            formula,
        } => {
            let schema: AxiomSchema = schema.parse().map_err(schema_err)?;
            let mut parsed = Vec::new();
            for (name, value) in params {
                let f = if name == "x" {
                    Formula::atom(value)
                } else {
                    parse("params", &value)?
                };
                parsed.push((name, f));
            }
            (
                Rule::Axiom {
                    schema,
                    params: parsed,
                },
                formula,
            )
        }
        StepDoc::Taut { formula } => (Rule::Taut, formula),
        StepDoc::Mp { premises, formula } => (
            Rule::ModusPonens {
                implication: premises[0],
                antecedent: premises[1],
            },
            formula,
        ),
        StepDoc::Mono { premise, formula } => (
            Rule::Monotonicity {
                premise,
                modality: Modality::Diamond,
            },
            formula,
        ),
        StepDoc::MonoBox { premise, formula } => (
            Rule::Monotonicity {
                premise,
                modality: Modality::Box,
            },
            formula,
        ),
        StepDoc::Subst {
            premise,
            atom,
            by,
            formula,
        } => (
            Rule::Substitution {
                premise,
                atom,
                by: parse("by", &by)?,
            },
            formula,
        ),
        StepDoc::Lfp {
            premise,
            var,
            body,
            goal,
            formula,
        } => (
            fixpoint_rule(
                FixKind::Mu,
                premise,
                var,
                parse("body", &body)?,
                parse("goal", &goal)?,
            ),
            formula,
        ),
        StepDoc::Gfp {
            premise,
            var,
            body,
            goal,
            formula,
        } => (
            fixpoint_rule(
                FixKind::Nu,
                premise,
                var,
                parse("body", &body)?,
                parse("goal", &goal)?,
            ),
            formula,
        ),
        StepDoc::Extension { schema, formula } => {
            let axiom: ExtensionAxiom = schema.parse().map_err(schema_err)?;
            (Rule::Extension(axiom), formula)
        }
    };
    Ok(Step {
        rule,
        formula: parse("formula", &formula)?,
    })
}

fn fixpoint_rule(kind: FixKind, premise: usize, var: String, body: Formula, goal: Formula) -> Rule {
    Rule::Fixpoint {
        kind,
        premise,
        var,
        body,
        goal,
    }
}

fn step_to_doc(step: &Step) -> StepDoc {
    let formula = print_formula(&step.formula);
    match &step.rule {
        Rule::Axiom { schema, params } => StepDoc::Axiom {
            schema: schema.name().to_string(),
            params: params
                .iter()
                .map(|(n, f)| (n.clone(), print_formula(f)))
                .collect(),
            formula,
        },
        Rule::Taut => StepDoc::Taut { formula },
        Rule::ModusPonens {
            implication,
            antecedent,
        } => StepDoc::Mp {
            premises: [*implication, *antecedent],
            formula,
        },
        Rule::Monotonicity { premise, modality } => match modality {
            Modality::Diamond => StepDoc::Mono {
                premise: *premise,
                formula,
            },
            Modality::Box => StepDoc::MonoBox {
                premise: *premise,
                formula,
            },
        },
        Rule::Substitution { premise, atom, by } => StepDoc::Subst {
            premise: *premise,
            atom: atom.clone(),
            by: print_formula(by),
            formula,
        },
        Rule::Fixpoint {
            kind,
            premise,
            var,
            body,
            goal,
        } => {
            let (premise, var, body, goal) = (
                *premise,
                var.clone(),
                print_formula(body),
                print_formula(goal),
            );
            match kind {
                FixKind::Mu => StepDoc::Lfp {
                    premise,
                    var,
                    body,
                    goal,
                    formula,
                },
                FixKind::Nu => StepDoc::Gfp {
                    premise,
                    var,
                    body,
                    goal,
                    formula,
                },
            }
        }
        Rule::Extension(axiom) => StepDoc::Extension {
            schema: axiom.name().to_string(),
            formula,
        },
    }
}

/// Canonical document: compact JSON, one object per step, formulas printed.
pub fn write_derivation(d: &Derivation) -> String {
    let doc = DrvDoc {
        logic: d.logic.name().to_string(),
        steps: d.steps.iter().map(step_to_doc).collect(),
    };
    serde_json::to_string(&doc).expect("derivations serialise")
}

pub fn derivation_hash(d: &Derivation) -> String {
    hex::encode(Sha256::digest(write_derivation(d).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{"logic":"K","steps":[{"rule":"taut","formula":"p -> p"},{"rule":"subst","premise":0,"atom":"p","by":"<>q","formula":"<>q -> <>q"}]}"#;

    #[test]
    fn round_trip() {
        let d = read_derivation(SAMPLE).unwrap();
        assert_eq!(d.steps.len(), 2);
        let again = read_derivation(&write_derivation(&d)).unwrap();
        assert_eq!(again, d);
        assert_eq!(derivation_hash(&again), derivation_hash(&d));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            read_derivation("[").unwrap_err(),
            DrvError::Json(_)
        ));
        let bad_logic = SAMPLE.replace(r#""K""#, r#""GL""#);
        assert!(matches!(
            read_derivation(&bad_logic).unwrap_err(),
            DrvError::Logic(_)
        ));
        let bad_formula = SAMPLE.replace("p -> p", "p ->");
        assert!(matches!(
            read_derivation(&bad_formula).unwrap_err(),
            DrvError::Formula {
                step: 0,
                field: "formula",
                ..
            }
        ));
        let extra = SAMPLE.replace(r#""rule":"taut","#, r#""rule":"taut","note":1,"#);
        assert!(read_derivation(&extra).is_err());
    }
}
