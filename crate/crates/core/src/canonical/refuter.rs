//! A sound, incomplete refuter: tableau expansion with literal and
//! complementary-formula clashes, fixpoint unfolding to a bounded depth,
//! and the one-step modal rule. Every closed tableau is a proof of
//! unsatisfiability in the frame class.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::kripke::FrameClass;

pub struct Refuter {
    depth: usize,
    class: FrameClass,
    steps: usize,
}

impl Refuter {
    /// `depth` bounds the unfoldings of each fixpoint per world; `steps`
    /// bounds the total work.
    pub fn new(class: FrameClass, depth: usize, steps: usize) -> Self {
        Refuter {
            depth,
            class,
            steps,
        }
    }

    /// `true` if `phi` is shown unsatisfiable in the frame class.
    pub fn refute(&mut self, phi: &Formula) -> bool {
        let worlds = modal_depth(phi) * (self.depth + 1) + 1;
        self.closed(
            vec![phi.canonical()],
            Vec::new(),
            BTreeSet::new(),
            BTreeMap::new(),
            worlds,
        )
    }

    fn closed(
        &mut self,
        mut todo: Vec<Formula>,
        mut deferred: Vec<Formula>,
        mut done: BTreeSet<Formula>,
        mut unfolds: BTreeMap<Formula, usize>,
        worlds: usize,
    ) -> bool {
        let reflexive = self.class.reflexive();
        let transitive = self.class.transitive();
        loop {
            if self.steps == 0 {
                return false;
            }
            self.steps -= 1;
            let f = match todo.pop() {
                Some(f) => f,
                None => match deferred.pop() {
                    // disjunctions wait until everything else is expanded
                    Some(Formula::Or(a, b)) => {
                        let (a, b) = (a.canonical(), b.canonical());
                        if done.contains(&a) || done.contains(&b) {
                            continue;
                        }
                        if done.contains(&a.negate().canonical()) {
                            todo.push(b);
                            continue;
                        }
                        if done.contains(&b.negate().canonical()) {
                            todo.push(a);
                            continue;
                        }
                        if !self.closed(
                            vec![a],
                            deferred.clone(),
                            done.clone(),
                            unfolds.clone(),
                            worlds,
                        ) {
                            return false;
                        }
                        todo.push(b);
                        continue;
                    }
                    Some(_) => unreachable!("only disjunctions are deferred"),
                    None => break,
                },
            };
            if done.contains(&f) {
                continue;
            }
            if done.contains(&f.negate().canonical()) {
                return true;
            }
            match &f {
                Formula::Top => continue,
                Formula::Bottom => return true,
                Formula::And(a, b) => {
                    todo.push(a.canonical());
                    todo.push(b.canonical());
                    continue;
                }
                Formula::Or(..) => {
                    deferred.push(f);
                    continue;
                }
                Formula::Mu(..) | Formula::Nu(..) => {
                    let count = unfolds.entry(f.clone()).or_insert(0);
                    if *count < self.depth {
                        *count += 1;
                        todo.push(f.unfold().unwrap().canonical());
                    }
                }
                Formula::Box(a) if reflexive => todo.push(a.canonical()),
                _ => {}
            }
            done.insert(f);
        }
        if worlds == 0 {
            return false;
        }
        let mut carried: Vec<Formula> = Vec::new();
        for f in &done {
            if let Formula::Box(a) = f {
                carried.push(a.canonical());
                if transitive {
                    carried.push(f.clone());
                }
            }
        }
        let diamonds: Vec<Formula> = done
            .iter()
            .filter_map(|f| match f {
                Formula::Diamond(a) => Some(a.canonical()),
                _ => None,
            })
            .collect();
        diamonds.into_iter().any(|g| {
            let mut succ = carried.clone();
            succ.push(g);
            self.closed(
                succ,
                Vec::new(),
                BTreeSet::new(),
                BTreeMap::new(),
                worlds - 1,
            )
        })
    }
}

fn modal_depth(phi: &Formula) -> usize {
    match phi {
        Formula::Diamond(a) | Formula::Box(a) => 1 + modal_depth(a),
        _ => phi
            .children()
            .into_iter()
            .map(modal_depth)
            .max()
            .unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn refutes(class: FrameClass, s: &str) -> bool {
        Refuter::new(class, 2, 100_000).refute(&parse_formula(s).unwrap())
    }

    #[test]
    fn clashes() {
        assert!(refutes(FrameClass::K, "p & !p"));
        assert!(refutes(FrameClass::K, "false"));
        assert!(!refutes(FrameClass::K, "p & []!p"));
        assert!(refutes(FrameClass::K, "(mu x. p | <>x) & (nu x. !p & []x)"));
    }

    #[test]
    fn one_step_modal_rule() {
        assert!(refutes(FrameClass::K, "p & []!p & <>(p & <>p)"));
        assert!(refutes(FrameClass::K, "<>p & []!p"));
        assert!(!refutes(FrameClass::K, "<>p & <>!p"));
    }

    #[test]
    fn branching() {
        assert!(refutes(FrameClass::K, "(p | q) & !p & !q"));
        assert!(!refutes(FrameClass::K, "(p | q) & !p"));
    }

    #[test]
    fn frame_extras() {
        assert!(!refutes(FrameClass::K, "[]p & !p"));
        assert!(refutes(FrameClass::T, "[]p & !p"));
        assert!(!refutes(FrameClass::K, "[]p & <><>!p"));
        assert!(refutes(FrameClass::K4, "[]p & <><>!p"));
    }

    #[test]
    fn unfolding_finds_deeper_clashes() {
        assert!(refutes(FrameClass::K, "(nu x. p & []x) & <><>!p"));
        // needs well-foundedness, out of reach
        assert!(!refutes(FrameClass::K, "mu x. <>x"));
    }
}
