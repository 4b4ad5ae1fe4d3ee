//! `.kmj` documents: Kripke models as JSON.
//!
//! ```json
//! {"states":["s0","s1"],"edges":[["s0","s1"]],"valuation":{"p":["s1"]}}
//! ```
//!
//! [`write_model`] emits the canonical form: compact, states in model order,
//! edges sorted by source then target index, atoms sorted by name.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{KripkeModel, ModelError, Relation, StateSet};

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("undeclared state `{state}` in {place}")]
    UndeclaredState { state: String, place: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: Vec<String>,
    edges: Vec<(String, String)>,
    valuation: BTreeMap<String, Vec<String>>,
}

pub fn read_model(text: &str) -> Result<KripkeModel, ModelIoError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    let mut index = HashMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if index.insert(s.as_str(), i).is_some() {
            return Err(ModelError::DuplicateState(s.clone()).into());
        }
    }
    let n = doc.states.len();
    let lookup = |s: &str, place: &str| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| ModelIoError::UndeclaredState {
                state: s.to_string(),
                place: place.to_string(),
            })
    };
    let mut relation = Relation::empty(n);
    for (a, b) in &doc.edges {
        let place = format!("edge [\"{a}\",\"{b}\"]");
        relation.insert(lookup(a, &place)?, lookup(b, &place)?);
    }
    let mut valuation = BTreeMap::new();
    for (atom, states) in &doc.valuation {
        let mut set = StateSet::empty(n);
        for s in states {
            set.insert(lookup(s, &format!("valuation of `{atom}`"))?);
        }
        valuation.insert(atom.clone(), set);
    }
    Ok(KripkeModel::new(doc.states, relation, valuation)?)
}

pub fn write_model(model: &KripkeModel) -> String {
    serde_json::to_string(&to_doc(model)).expect("model documents serialise")
}

/// The document as a JSON value, for embedding in larger reports.
pub fn model_json(model: &KripkeModel) -> serde_json::Value {
    serde_json::to_value(to_doc(model)).expect("model documents serialise")
}

fn to_doc(model: &KripkeModel) -> ModelDoc {
    let name = |s: usize| model.name(s).to_string();
    ModelDoc {
        states: model.names().to_vec(),
        edges: model
            .relation()
            .pairs()
            .map(|(a, b)| (name(a), name(b)))
            .collect(),
        valuation: model
            .valuation()
            .iter()
            .map(|(p, set)| (p.clone(), set.iter().map(name).collect()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_state_model() {
        let m = read_model(r#"{"states":["s0"],"edges":[],"valuation":{}}"#).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.relation().edge_count(), 0);
    }

    #[test]
    fn two_chain_round_trips() {
        let text = r#"{"states":["s0","s1"],"edges":[["s0","s1"]],"valuation":{"p":["s1"]}}"#;
        let m = read_model(text).unwrap();
        assert!(m.has_edge(0, 1));
        assert_eq!(m.value("p"), Some(&StateSet::from_indices(2, [1])));
        assert_eq!(write_model(&m), text);
    }

    #[test]
    fn errors() {
        let err =
            read_model(r#"{"states":["s0"],"edges":[["s0","s9"]],"valuation":{}}"#).unwrap_err();
        assert!(err.to_string().contains("undeclared state"), "{err}");
        let err = read_model(r#"{"states":["s0","s0"],"edges":[],"valuation":{}}"#).unwrap_err();
        assert!(err.to_string().contains("duplicate state"), "{err}");
        let err =
            read_model(r#"{"states":["s0"],"edges":[],"valuation":{"p":["t"]}}"#).unwrap_err();
        assert!(err.to_string().contains("undeclared state"), "{err}");
        assert!(read_model(r#"{"states":[],"edges":[],"valuation":{}}"#).is_err());
        assert!(read_model("{").is_err());
    }
}
