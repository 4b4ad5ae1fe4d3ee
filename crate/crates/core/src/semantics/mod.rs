//! Algebraic semantics by fixpoint iteration, the evaluation game with a
//! parity solver, and their cross-check.
//!
//! Infinite plays are decided by max-parity. Priorities follow the fixed
//! enumeration of bound variables, which only linearises the dependency
//! order; this is harmless for alternation-free formulas, where all
//! variables unfolded infinitely often in a play have the same type.

mod algebraic;
mod game;
mod trace;

use serde::Serialize;
use thiserror::Error;

pub use algebraic::{eval_algebraic, eval_with_stats, satisfies, EvalError, EvalStats};
pub use game::{build_arena, solve_arena, GameArena, GameError, Player, WinningRegions};
pub use trace::{trace_property_check, TraceReport, TraceWitness};

use crate::formula::{expansion, Formula, IndexError};
use crate::kripke::KripkeModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub subformula: String,
    pub state: String,
    pub game: bool,
    pub algebraic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub positions: usize,
    pub mismatches: Vec<Mismatch>,
}

impl EquivReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compare ∃'s winning region at every `(φ, s)` with the truth of the
/// expansion of φ at s.
pub fn model_check_equiv(xi: &Formula, model: &KripkeModel) -> Result<EquivReport, SemanticsError> {
    let arena = build_arena(xi, model)?;
    let win = solve_arena(&arena);
    let index = arena.index();
    let mut mismatches = Vec::new();
    for node in 0..index.len() {
        let phi = index.node(node);
        let truth = eval_algebraic(&expansion(index, phi)?, model)?;
        for s in model.states() {
            let game = win.exists_wins(arena.position(node, s));
            let algebraic = truth.contains(s);
            if game != algebraic {
                mismatches.push(Mismatch {
                    subformula: phi.to_string(),
                    state: model.name(s).to_string(),
                    game,
                    algebraic,
                });
            }
        }
    }
    Ok(EquivReport {
        positions: arena.len(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{Relation, StateSet};
    use crate::syntax::parse_formula;
    use std::collections::BTreeMap;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn atom_agrees_with_valuation() {
        let m = KripkeModel::numbered(
            Relation::from_pairs(2, [(0, 1)]),
            BTreeMap::from([("p".to_string(), StateSet::from_indices(2, [1]))]),
        );
        let r = model_check_equiv(&f("p"), &m).unwrap();
        assert!(r.agrees());
        assert_eq!(r.positions, 2);
    }

    #[test]
    fn reachability_on_three_chain() {
        let m = KripkeModel::numbered(
            Relation::from_pairs(3, [(0, 1), (1, 2)]),
            BTreeMap::from([("p".to_string(), StateSet::from_indices(3, [2]))]),
        );
        let xi = f("mu x.(p | <>x)");
        assert!(model_check_equiv(&xi, &m).unwrap().agrees());
        let arena = build_arena(&xi, &m).unwrap();
        let win = solve_arena(&arena);
        assert!((0..3).all(|s| win.exists_wins(arena.position(0, s))));
    }

    #[test]
    fn invariance_on_two_cycle() {
        let m = KripkeModel::numbered(
            Relation::from_pairs(2, [(0, 1), (1, 0)]),
            BTreeMap::from([("p".to_string(), StateSet::full(2))]),
        );
        let xi = f("nu x.(p & []x)");
        assert!(model_check_equiv(&xi, &m).unwrap().agrees());
        assert_eq!(eval_algebraic(&xi, &m).unwrap(), StateSet::full(2));
    }
}
