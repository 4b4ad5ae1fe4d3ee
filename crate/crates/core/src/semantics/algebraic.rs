use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{KripkeModel, StateSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("name `{0}` is neither bound nor in the valuation")]
    UnboundName(String),
    #[error("fixpoint iteration for `{var}` did not stabilise within {rounds} rounds")]
    NonMonotone { var: String, rounds: usize },
}

/// Counters from one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Fixpoint iterations run (nested ones count every time they restart).
    pub fixpoint_runs: usize,
    /// Most rounds any single iteration needed to stabilise.
    pub max_rounds: usize,
}

/// `[[phi]]` on `model`.
pub fn eval_algebraic(phi: &Formula, model: &KripkeModel) -> Result<StateSet, EvalError> {
    eval_with_stats(phi, model).map(|(set, _)| set)
}

/// `[[phi]]` together with iteration counters. Fixpoints are computed by
/// Kleene iteration from the empty set (μ) or the full set (ν); on an
/// n-state model a monotone operator stabilises within n + 1 rounds.
pub fn eval_with_stats(
    phi: &Formula,
    model: &KripkeModel,
) -> Result<(StateSet, EvalStats), EvalError> {
    let mut ev = Evaluator {
        model,
        env: Vec::new(),
        stats: EvalStats::default(),
    };
    let set = ev.eval(phi)?;
    Ok((set, ev.stats))
}

/// Does `state` satisfy `phi`?
pub fn satisfies(model: &KripkeModel, state: usize, phi: &Formula) -> Result<bool, EvalError> {
    Ok(eval_algebraic(phi, model)?.contains(state))
}

struct Evaluator<'m> {
    model: &'m KripkeModel,
    env: Vec<(String, StateSet)>,
    stats: EvalStats,
}

impl Evaluator<'_> {
    fn lookup(&self, name: &str) -> Result<StateSet, EvalError> {
        if let Some((_, set)) = self.env.iter().rev().find(|(n, _)| n == name) {
            return Ok(set.clone());
        }
        self.model
            .value(name)
            .cloned()
            .ok_or_else(|| EvalError::UnboundName(name.to_string()))
    }

    fn eval(&mut self, phi: &Formula) -> Result<StateSet, EvalError> {
        Ok(match phi {
            Formula::Atom(p) => self.lookup(p)?,
            Formula::NegAtom(p) => self.lookup(p)?.complement(),
            Formula::Top => self.model.full_set(),
            Formula::Bottom => self.model.empty_set(),
            Formula::Or(a, b) => self.eval(a)?.union(&self.eval(b)?),
            Formula::And(a, b) => self.eval(a)?.intersection(&self.eval(b)?),
            Formula::Diamond(a) => self.model.diamond(&self.eval(a)?),
            Formula::Box(a) => self.model.boxed(&self.eval(a)?),
            Formula::Mu(x, body) => self.iterate(x, body, self.model.empty_set())?,
            Formula::Nu(x, body) => self.iterate(x, body, self.model.full_set())?,
        })
    }

    fn iterate(&mut self, x: &str, body: &Formula, start: StateSet) -> Result<StateSet, EvalError> {
        let limit = self.model.len() + 1;
        self.stats.fixpoint_runs += 1;
        let mut current = start;
        for round in 1..=limit {
            self.env.push((x.to_string(), current.clone()));
            let next = self.eval(body);
            self.env.pop();
            let next = next?;
            if next == current {
                self.stats.max_rounds = self.stats.max_rounds.max(round);
                return Ok(current);
            }
            current = next;
        }
        Err(EvalError::NonMonotone {
            var: x.to_string(),
            rounds: limit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::Relation;
    use crate::syntax::parse_formula;
    use std::collections::BTreeMap;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn chain_with_p_at_end(n: usize) -> KripkeModel {
        let r = Relation::from_pairs(n, (1..n).map(|i| (i - 1, i)));
        KripkeModel::numbered(
            r,
            BTreeMap::from([("p".to_string(), StateSet::from_indices(n, [n - 1]))]),
        )
    }

    #[test]
    fn least_fixpoint_of_diamond_is_empty() {
        let loop1 = KripkeModel::numbered(Relation::from_pairs(1, [(0, 0)]), BTreeMap::new());
        assert!(eval_algebraic(&f("mu x.<>x"), &loop1).unwrap().is_empty());
        assert_eq!(
            eval_algebraic(&f("nu x.<>x"), &loop1).unwrap(),
            StateSet::full(1)
        );
    }

    #[test]
    fn reachability_on_chain() {
        let m = chain_with_p_at_end(3);
        let (set, stats) = eval_with_stats(&f("mu x.(p | <>x)"), &m).unwrap();
        assert_eq!(set, StateSet::full(3));
        // {}, {s2}, {s1,s2}, {s0,s1,s2}, then stable
        assert_eq!(stats.max_rounds, 4);
    }

    #[test]
    fn unbound_names_are_errors() {
        let m = chain_with_p_at_end(2);
        assert_eq!(
            eval_algebraic(&f("q"), &m),
            Err(EvalError::UnboundName("q".into()))
        );
    }

    #[test]
    fn non_monotone_body_is_reported() {
        // mu x. !x flips forever
        let m = chain_with_p_at_end(1);
        let phi = Formula::mu("x", Formula::neg_atom("x"));
        assert!(matches!(
            eval_algebraic(&phi, &m),
            Err(EvalError::NonMonotone { .. })
        ));
    }
}
