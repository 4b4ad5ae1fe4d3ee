use serde::Serialize;
use thiserror::Error;

use crate::formula::{FixKind, Formula, IndexError, SubformulaIndex};
use crate::kripke::KripkeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    /// The player who wins plays whose highest recurring priority is `p`.
    fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("name `{0}` is free in the formula but has no valuation")]
    UnboundName(String),
    #[error("bound variable `{0}` occurs negated")]
    NegatedBoundVariable(String),
}

/// The evaluation game of a clean formula on a model.
///
/// Position `(φ, s)` has id `node(φ) * |S| + s`. Binder and bound-variable
/// positions have exactly one move and are given to ∃.
#[derive(Debug, Clone)]
pub struct GameArena {
    index: SubformulaIndex,
    states: usize,
    owner: Vec<Player>,
    moves: Vec<Vec<usize>>,
    priority: Vec<u32>,
    deterministic: Vec<bool>,
}

pub fn build_arena(xi: &Formula, model: &KripkeModel) -> Result<GameArena, GameError> {
    let index = SubformulaIndex::new(xi)?;
    let n = model.len();
    let total = index.len() * n;
    let mut owner = vec![Player::Exists; total];
    let mut moves = vec![Vec::new(); total];
    let mut priority = vec![0; total];
    let mut deterministic = vec![false; total];
    for node in 0..index.len() {
        let phi = index.node(node).clone();
        let kids = index.children(node).to_vec();
        for s in 0..n {
            let pos = node * n + s;
            match &phi {
                Formula::Or(..) => {
                    moves[pos] = kids.iter().map(|&k| k * n + s).collect();
                }
                Formula::And(..) => {
                    owner[pos] = Player::Forall;
                    moves[pos] = kids.iter().map(|&k| k * n + s).collect();
                }
                Formula::Diamond(_) => {
                    moves[pos] = model
                        .successors(s)
                        .iter()
                        .map(|&t| kids[0] * n + t)
                        .collect();
                }
                Formula::Box(_) => {
                    owner[pos] = Player::Forall;
                    moves[pos] = model
                        .successors(s)
                        .iter()
                        .map(|&t| kids[0] * n + t)
                        .collect();
                }
                Formula::Mu(..) | Formula::Nu(..) => {
                    deterministic[pos] = true;
                    moves[pos] = vec![kids[0] * n + s];
                }
                Formula::Atom(x) if index.is_bound_var(x) => {
                    let b = index.binder(x).unwrap();
                    deterministic[pos] = true;
                    moves[pos] = vec![b.body_node * n + s];
                    let rank = index.rank(x).unwrap() as u32;
                    priority[pos] = match b.kind {
                        FixKind::Nu => 2 * rank,
                        FixKind::Mu => 2 * rank + 1,
                    };
                }
                Formula::NegAtom(x) if index.is_bound_var(x) => {
                    return Err(GameError::NegatedBoundVariable(x.clone()));
                }
                Formula::Atom(p) | Formula::NegAtom(p) => {
                    let holds = model
                        .value(p)
                        .ok_or_else(|| GameError::UnboundName(p.clone()))?
                        .contains(s);
                    let positive = matches!(phi, Formula::Atom(_));
                    // the owner is stuck, so a true literal belongs to ∀
                    if holds == positive {
                        owner[pos] = Player::Forall;
                    }
                }
                Formula::Top => owner[pos] = Player::Forall,
                Formula::Bottom => {}
            }
        }
    }
    Ok(GameArena {
        index,
        states: n,
        owner,
        moves,
        priority,
        deterministic,
    })
}

impl GameArena {
    pub fn index(&self) -> &SubformulaIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn position(&self, node: usize, state: usize) -> usize {
        node * self.states + state
    }

    /// `(node, state)` of a position id.
    pub fn split(&self, pos: usize) -> (usize, usize) {
        (pos / self.states, pos % self.states)
    }

    pub fn owner(&self, pos: usize) -> Player {
        self.owner[pos]
    }

    pub fn moves(&self, pos: usize) -> &[usize] {
        &self.moves[pos]
    }

    pub fn priority(&self, pos: usize) -> u32 {
        self.priority[pos]
    }

    pub fn is_deterministic(&self, pos: usize) -> bool {
        self.deterministic[pos]
    }
}

/// Winning regions and positional winning strategies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinningRegions {
    exists_wins: Vec<bool>,
    /// For each position whose owner wins it and has a move: the chosen
    /// successor.
    strategy: Vec<Option<usize>>,
}

impl WinningRegions {
    pub fn winner(&self, pos: usize) -> Player {
        if self.exists_wins[pos] {
            Player::Exists
        } else {
            Player::Forall
        }
    }

    pub fn exists_wins(&self, pos: usize) -> bool {
        self.exists_wins[pos]
    }

    pub fn strategy(&self, pos: usize) -> Option<usize> {
        self.strategy[pos]
    }
}

/// Node sets over the arena, with attractor computations restricted to a
/// sub-arena.
struct Solver<'a> {
    arena: &'a GameArena,
    preds: Vec<Vec<usize>>,
    exists_wins: Vec<bool>,
    strategy: Vec<Option<usize>>,
}

pub fn solve_arena(arena: &GameArena) -> WinningRegions {
    let n = arena.len();
    let mut preds = vec![Vec::new(); n];
    for v in 0..n {
        for &w in arena.moves(v) {
            preds[w].push(v);
        }
    }
    let mut solver = Solver {
        arena,
        preds,
        exists_wins: vec![false; n],
        strategy: vec![None; n],
    };
    let all = vec![true; n];
    // A player who is stuck loses.
    let stuck = |p: Player, g: &[bool]| -> Vec<usize> {
        (0..n)
            .filter(|&v| g[v] && arena.owner(v) == p && arena.moves(v).is_empty())
            .collect()
    };
    let a1 = solver.attractor(&all, Player::Exists, &stuck(Player::Forall, &all));
    solver.assign(&a1, Player::Exists);
    let rest = minus(&all, &a1);
    let a2 = solver.attractor(&rest, Player::Forall, &stuck(Player::Exists, &rest));
    solver.assign(&a2, Player::Forall);
    let core = minus(&rest, &a2);
    let (w_exists, w_forall) = solver.zielonka(&core);
    solver.assign(&w_exists, Player::Exists);
    solver.assign(&w_forall, Player::Forall);
    WinningRegions {
        exists_wins: solver.exists_wins,
        strategy: solver.strategy,
    }
}

fn minus(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(&x, &y)| x && !y).collect()
}

impl Solver<'_> {
    fn assign(&mut self, region: &[bool], player: Player) {
        for (v, &inside) in region.iter().enumerate() {
            if inside {
                self.exists_wins[v] = player == Player::Exists;
            }
        }
    }

    /// Attractor of `target` for `player` inside the sub-arena `g`. Records
    /// attracting moves for `player`'s positions as strategy entries.
    fn attractor(&mut self, g: &[bool], player: Player, target: &[usize]) -> Vec<bool> {
        let arena = self.arena;
        let mut inside = vec![false; g.len()];
        let mut remaining: Vec<usize> = (0..g.len())
            .map(|v| arena.moves(v).iter().filter(|&&w| g[w]).count())
            .collect();
        let mut queue = Vec::new();
        for &t in target {
            if g[t] && !inside[t] {
                inside[t] = true;
                queue.push(t);
            }
        }
        while let Some(w) = queue.pop() {
            for &v in &self.preds[w] {
                if !g[v] || inside[v] {
                    continue;
                }
                if arena.owner(v) == player {
                    inside[v] = true;
                    self.strategy[v] = Some(w);
                    queue.push(v);
                } else {
                    remaining[v] -= 1;
                    if remaining[v] == 0 {
                        inside[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        inside
    }

    /// Any move that stays in `g`.
    fn stay(&mut self, g: &[bool], v: usize) {
        self.strategy[v] = self.arena.moves(v).iter().copied().find(|&w| g[w]);
    }

    /// Max-parity Zielonka on a dead-end-free sub-arena `g`. Returns the
    /// regions of ∃ and ∀.
    fn zielonka(&mut self, g: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let empty = vec![false; g.len()];
        let Some(p) = (0..g.len())
            .filter(|&v| g[v])
            .map(|v| self.arena.priority(v))
            .max()
        else {
            return (empty.clone(), empty);
        };
        let alpha = Player::of_priority(p);
        let top: Vec<usize> = (0..g.len())
            .filter(|&v| g[v] && self.arena.priority(v) == p)
            .collect();
        let a = self.attractor(g, alpha, &top);
        for &v in &top {
            if self.arena.owner(v) == alpha {
                self.stay(g, v);
            }
        }
        let (w1_exists, w1_forall) = self.zielonka(&minus(g, &a));
        let w1_opp = if alpha == Player::Exists {
            &w1_forall
        } else {
            &w1_exists
        };
        if !w1_opp.iter().any(|&b| b) {
            // alpha wins everything
            let all = g.to_vec();
            return if alpha == Player::Exists {
                (all, empty)
            } else {
                (empty, all)
            };
        }
        let opp_targets: Vec<usize> = (0..g.len()).filter(|&v| w1_opp[v]).collect();
        let b = self.attractor(g, alpha.opponent(), &opp_targets);
        let (w2_exists, w2_forall) = self.zielonka(&minus(g, &b));
        let union = |x: &[bool], y: &[bool]| -> Vec<bool> {
            x.iter().zip(y).map(|(&a, &b)| a || b).collect()
        };
        if alpha == Player::Exists {
            (w2_exists, union(&w2_forall, &b))
        } else {
            (union(&w2_exists, &b), w2_forall)
        }
    }
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

    fn loop1() -> KripkeModel {
        KripkeModel::numbered(
            Relation::from_pairs(1, [(0, 0)]),
            BTreeMap::from([("p".to_string(), StateSet::full(1))]),
        )
    }

    #[test]
    fn or_and_box_rows() {
        let m = KripkeModel::numbered(
            Relation::from_pairs(2, [(0, 1), (0, 0)]),
            BTreeMap::from([
                ("p".to_string(), StateSet::from_indices(2, [1])),
                ("q".to_string(), StateSet::empty(2)),
            ]),
        );
        let a = build_arena(&f("(p | q) & []p"), &m).unwrap();
        let idx = a.index();
        let or = idx.id_of(&f("p | q")).unwrap();
        let pos = a.position(or, 0);
        assert_eq!(a.owner(pos), Player::Exists);
        let p = idx.id_of(&f("p")).unwrap();
        let q = idx.id_of(&f("q")).unwrap();
        assert_eq!(a.moves(pos), &[a.position(p, 0), a.position(q, 0)]);
        let bx = idx.id_of(&f("[]p")).unwrap();
        assert_eq!(a.owner(a.position(bx, 0)), Player::Forall);
        assert_eq!(
            a.moves(a.position(bx, 0)),
            &[a.position(p, 0), a.position(p, 1)]
        );
        assert_eq!(a.owner(a.position(0, 0)), Player::Forall);
    }

    #[test]
    fn literal_rows() {
        let m = loop1();
        let a = build_arena(&f("p | !p"), &m).unwrap();
        let p = a.index().id_of(&f("p")).unwrap();
        let np = a.index().id_of(&f("!p")).unwrap();
        // true atom: ∀ stuck; false negated atom: ∃ stuck
        assert_eq!(a.owner(a.position(p, 0)), Player::Forall);
        assert_eq!(a.owner(a.position(np, 0)), Player::Exists);
        assert!(a.moves(a.position(p, 0)).is_empty());
        let w = solve_arena(&a);
        assert!(w.exists_wins(a.position(p, 0)));
        assert!(!w.exists_wins(a.position(np, 0)));
        assert!(w.exists_wins(0));
    }

    #[test]
    fn priorities_follow_enumeration() {
        let m = loop1();
        let a = build_arena(&f("mu x. mu y. (<>x | <>y)"), &m).unwrap();
        let idx = a.index();
        let x = idx.id_of(&f("x")).unwrap();
        let y = idx.id_of(&f("y")).unwrap();
        // y comes first: rank 1, x rank 2, both mu
        assert_eq!(a.priority(a.position(y, 0)), 3);
        assert_eq!(a.priority(a.position(x, 0)), 5);
        assert_eq!(a.priority(0), 0);
        assert!(a.is_deterministic(a.position(x, 0)));
    }

    #[test]
    fn mu_loop_is_lost_nu_loop_is_won() {
        let m = loop1();
        let a = build_arena(&f("mu x.<>x"), &m).unwrap();
        let w = solve_arena(&a);
        assert!((0..a.len()).all(|v| !w.exists_wins(v)));
        let a = build_arena(&f("nu x.<>x"), &m).unwrap();
        let w = solve_arena(&a);
        assert!((0..a.len()).all(|v| w.exists_wins(v)));
    }

    #[test]
    fn strategies_stay_in_winning_region() {
        let m = KripkeModel::numbered(
            Relation::from_pairs(3, [(0, 1), (1, 0), (1, 2), (2, 2)]),
            BTreeMap::from([("p".to_string(), StateSet::from_indices(3, [2]))]),
        );
        for s in [
            "mu x.(p | <>x)",
            "nu x.(!p & []x)",
            "nu x. <>x & mu y. p | <>y",
        ] {
            let a = build_arena(&f(s), &m).unwrap();
            let w = solve_arena(&a);
            for v in 0..a.len() {
                let mine = (a.owner(v) == Player::Exists) == w.exists_wins(v);
                if mine && !a.moves(v).is_empty() {
                    let t = w.strategy(v).expect("winning owner has a move");
                    assert!(a.moves(v).contains(&t));
                    assert_eq!(w.exists_wins(t), w.exists_wins(v), "{s} at {v}");
                }
                if !mine {
                    for &t in a.moves(v) {
                        assert_eq!(w.exists_wins(t), w.exists_wins(v), "{s} at {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn missing_valuation_is_an_error() {
        assert_eq!(
            build_arena(&f("q"), &loop1()).unwrap_err(),
            GameError::UnboundName("q".into())
        );
    }
}
