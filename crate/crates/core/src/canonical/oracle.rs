//! The satisfiability oracle behind the canonical construction: a sound
//! refuter, bounded model enumeration, the exhaustive bound, and type
//! elimination. SAT answers always carry a replayable witness.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::eliminate::{Elimination, TypeSpace};
use super::refuter::Refuter;
use crate::formula::{fl_closure, is_mucml, Formula};
use crate::kripke::{enumerate_models, model_space_size, FrameClass, KripkeModel};
use crate::model_io::{model_json, read_model};
use crate::semantics::eval_algebraic;
use crate::syntax::print_formula;

/// Environment variable naming the verdict cache directory.
pub const CACHE_ENV: &str = "MUCALC_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat { model: KripkeModel, state: usize },
    UnsatCertified { method: &'static str },
    Unknown { reason: String },
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleVerdict::Sat { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, OracleVerdict::UnsatCertified { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, OracleVerdict::Unknown { .. })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            OracleVerdict::Sat { .. } => "SAT",
            OracleVerdict::UnsatCertified { .. } => "UNSAT_CERTIFIED",
            OracleVerdict::Unknown { .. } => "UNKNOWN",
        }
    }

    /// Model-check `phi` at the witness; `true` for non-SAT verdicts.
    pub fn replays(&self, phi: &Formula, class: FrameClass) -> bool {
        match self {
            OracleVerdict::Sat { model, state } => {
                class.contains(model)
                    && eval_algebraic(phi, model).is_ok_and(|set| set.contains(*state))
            }
            _ => true,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            OracleVerdict::Sat { model, state } => json!({
                "verdict": "SAT",
                "model": model_json(model),
                "state": model.name(*state),
            }),
            OracleVerdict::UnsatCertified { method } => {
                json!({"verdict": "UNSAT_CERTIFIED", "method": method})
            }
            OracleVerdict::Unknown { reason } => json!({"verdict": "UNKNOWN", "reason": reason}),
        }
    }

    fn from_json(v: &Value) -> Option<OracleVerdict> {
        match v.get("verdict")?.as_str()? {
            "SAT" => {
                let model = read_model(&v.get("model")?.to_string()).ok()?;
                let state = model.index_of(v.get("state")?.as_str()?)?;
                Some(OracleVerdict::Sat { model, state })
            }
            "UNSAT_CERTIFIED" => {
                let method = match v.get("method")?.as_str()? {
                    "refuter" => "refuter",
                    "exhaustive" => "exhaustive",
                    "elimination" => "elimination",
                    _ => return None,
                };
                Some(OracleVerdict::UnsatCertified { method })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest models enumerated.
    pub max_states: usize,
    /// Fixpoint unfoldings per world in the refuter.
    pub depth: usize,
    /// Most labelled models enumeration may visit.
    pub budget: u128,
    /// Work bound for the refuter.
    pub refuter_steps: usize,
    /// Independent pairs allowed in type elimination; 0 disables it.
    pub elimination_pairs: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_states: 2,
            depth: 2,
            budget: 1 << 16,
            refuter_steps: 200_000,
            elimination_pairs: 18,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Oracle {
    config: OracleConfig,
    cache: Option<PathBuf>,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Self {
        Oracle {
            config,
            cache: None,
        }
    }

    /// Like [`Oracle::new`], caching verdicts in `$MUCALC_CACHE_DIR` if set.
    pub fn from_env(config: OracleConfig) -> Self {
        let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        Oracle { config, cache }
    }

    pub fn with_cache(mut self, dir: Option<PathBuf>) -> Self {
        self.cache = dir;
        self
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn query(&self, phi: &Formula, class: FrameClass) -> OracleVerdict {
        let key = self.cache_key(phi, class);
        if let Some(v) = self.cached(&key, phi, class) {
            return v;
        }
        let v = sat_search(phi, class, &self.config);
        self.store(&key, &v);
        v
    }

    fn cache_key(&self, phi: &Formula, class: FrameClass) -> String {
        let c = &self.config;
        let text = format!(
            "{}|{}|{}|{}|{}|{}|{}",
            print_formula(&phi.canonical()),
            class,
            c.max_states,
            c.depth,
            c.budget,
            c.refuter_steps,
            c.elimination_pairs
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn cached(&self, key: &str, phi: &Formula, class: FrameClass) -> Option<OracleVerdict> {
        let path = self.cache.as_ref()?.join(format!("{key}.json"));
        let text = fs::read_to_string(path).ok()?;
        let v = OracleVerdict::from_json(&serde_json::from_str(&text).ok()?)?;
        v.replays(phi, class).then_some(v)
    }

    fn store(&self, key: &str, v: &OracleVerdict) {
        let Some(dir) = &self.cache else { return };
        if v.is_unknown() || fs::create_dir_all(dir).is_err() {
            return;
        }
        let tmp = dir.join(format!("{key}.json.{}", std::process::id()));
        if fs::write(&tmp, v.to_json().to_string()).is_ok() {
            let _ = fs::rename(&tmp, dir.join(format!("{key}.json")));
        }
    }
}

/// Decide satisfiability of `phi` in `class` as far as the bounds allow.
pub fn sat_search(phi: &Formula, class: FrameClass, config: &OracleConfig) -> OracleVerdict {
    if Refuter::new(class, config.depth, config.refuter_steps).refute(phi) {
        return OracleVerdict::UnsatCertified { method: "refuter" };
    }

    let atoms: Vec<String> = phi.free_vars().into_iter().collect();
    let reachable = (0..=config.max_states)
        .rev()
        .find(|&n| model_space_size(n, atoms.len()).is_some_and(|s| s <= config.budget))
        .unwrap_or(0);
    if reachable > 0 {
        let stream = enumerate_models(reachable, &atoms, class, config.budget)
            .expect("size checked against budget");
        for model in stream {
            let Ok(set) = eval_algebraic(phi, &model) else {
                return OracleVerdict::Unknown {
                    reason: "formula cannot be evaluated".into(),
                };
            };
            let first = set.iter().next();
            if let Some(state) = first {
                return OracleVerdict::Sat { model, state };
            }
        }
    }

    let closure = fl_closure([phi], false).len();
    let bound = u32::try_from(closure)
        .ok()
        .and_then(|c| 1usize.checked_shl(c));
    if reachable == config.max_states && bound.is_some_and(|b| reachable >= b) {
        return OracleVerdict::UnsatCertified {
            method: "exhaustive",
        };
    }

    let mut reason = format!("no model with at most {reachable} states");
    if reachable < config.max_states {
        reason.push_str(&format!(
            " (enumeration budget stops short of {})",
            config.max_states
        ));
    }
    if config.elimination_pairs == 0 || !is_mucml(phi) {
        return OracleVerdict::Unknown { reason };
    }
    match TypeSpace::new(phi, class, config.elimination_pairs).map(|space| space.run(phi)) {
        Ok(Some(Elimination::Unsat)) => OracleVerdict::UnsatCertified {
            method: "elimination",
        },
        Ok(Some(Elimination::Candidate(model, state))) => {
            let v = OracleVerdict::Sat { model, state };
            if v.replays(phi, class) {
                v
            } else {
                OracleVerdict::Unknown {
                    reason: format!("{reason}; elimination candidate fails replay"),
                }
            }
        }
        Ok(None) => OracleVerdict::Unknown {
            reason: format!("{reason}; elimination could not evaluate the closure"),
        },
        Err(e) => OracleVerdict::Unknown {
            reason: format!("{reason}; elimination skipped: {e}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn search(class: FrameClass, s: &str) -> OracleVerdict {
        sat_search(&parse_formula(s).unwrap(), class, &OracleConfig::default())
    }

    #[test]
    fn literal_clash_is_refuted() {
        assert_eq!(
            search(FrameClass::K, "p & !p"),
            OracleVerdict::UnsatCertified { method: "refuter" }
        );
    }

    #[test]
    fn single_state_witness() {
        let v = search(FrameClass::K, "p & []!p");
        let OracleVerdict::Sat { model, state } = &v else {
            panic!("{v:?}")
        };
        assert_eq!(model.len(), 1);
        assert_eq!(model.relation().edge_count(), 0);
        assert_eq!(*state, 0);
    }

    #[test]
    fn modal_rule_refutes() {
        assert_eq!(
            search(FrameClass::K, "p & [] !p & <>(p & <>p)"),
            OracleVerdict::UnsatCertified { method: "refuter" }
        );
    }

    #[test]
    fn well_foundedness_needs_more_than_the_refuter() {
        let phi = parse_formula("mu x. <>x").unwrap();
        let tiny = OracleConfig {
            elimination_pairs: 0,
            ..OracleConfig::default()
        };
        assert!(sat_search(&phi, FrameClass::K, &tiny).is_unknown());
        let exhaustive = OracleConfig {
            max_states: 4,
            budget: 1 << 17,
            ..tiny
        };
        assert_eq!(
            sat_search(&phi, FrameClass::K, &exhaustive),
            OracleVerdict::UnsatCertified {
                method: "exhaustive"
            }
        );
        assert_eq!(
            search(FrameClass::K, "mu x. <>x"),
            OracleVerdict::UnsatCertified {
                method: "elimination"
            }
        );
    }

    #[test]
    fn elimination_respects_the_frame_class() {
        let phi = "p & [](nu x. !p & []x) & <>true";
        assert!(search(FrameClass::K, phi).is_sat());
        assert_eq!(
            search(FrameClass::KB, phi),
            OracleVerdict::UnsatCertified {
                method: "elimination"
            }
        );
        let v = search(FrameClass::KB, "p & <>(q & <>(q & []!p))");
        assert!(
            v.is_sat()
                && v.replays(
                    &parse_formula("p & <>(q & <>(q & []!p))").unwrap(),
                    FrameClass::KB
                )
        );
    }

    #[test]
    fn verdicts_round_trip_through_json() {
        for s in ["p & []!p", "p & !p"] {
            let v = search(FrameClass::K, s);
            assert_eq!(OracleVerdict::from_json(&v.to_json()), Some(v));
        }
    }
}
