//! Propositional tautology check on the skeleton of a formula: every
//! modal or fixpoint subformula becomes a propositional variable, with a
//! formula and its negation sharing one variable.

use std::collections::BTreeMap;

use crate::formula::Formula;

/// More variables than this makes the truth table too large to enumerate.
pub const MAX_SKELETON_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Prop {
    Var(usize, bool),
    Const(bool),
    Or(Box<Prop>, Box<Prop>),
    And(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn eval(&self, row: u32) -> bool {
        match self {
            Prop::Var(i, positive) => (row >> i & 1 == 1) == *positive,
            Prop::Const(b) => *b,
            Prop::Or(a, b) => a.eval(row) || b.eval(row),
            Prop::And(a, b) => a.eval(row) && b.eval(row),
        }
    }
}

#[derive(Default)]
struct Skeleton {
    vars: BTreeMap<Formula, usize>,
}

impl Skeleton {
    fn var(&mut self, key: Formula, positive: bool) -> Prop {
        let next = self.vars.len();
        let i = *self.vars.entry(key).or_insert(next);
        Prop::Var(i, positive)
    }

    fn build(&mut self, phi: &Formula) -> Prop {
        match phi {
            Formula::Top => Prop::Const(true),
            Formula::Bottom => Prop::Const(false),
            Formula::Or(a, b) => Prop::Or(Box::new(self.build(a)), Box::new(self.build(b))),
            Formula::And(a, b) => Prop::And(Box::new(self.build(a)), Box::new(self.build(b))),
            Formula::Atom(p) => self.var(Formula::Atom(p.clone()), true),
            Formula::NegAtom(p) => self.var(Formula::Atom(p.clone()), false),
            _ => {
                let pos = phi.canonical();
                let neg = phi.negate().canonical();
                if pos <= neg {
                    self.var(pos, true)
                } else {
                    self.var(neg, false)
                }
            }
        }
    }
}

/// `Some(true)` for a tautology, `Some(false)` otherwise, `None` if the
/// skeleton has too many variables.
pub fn is_tautology(phi: &Formula) -> Option<bool> {
    let mut sk = Skeleton::default();
    let prop = sk.build(phi);
    let n = sk.vars.len();
    if n > MAX_SKELETON_VARS {
        return None;
    }
    Some((0..1u32 << n).all(|row| prop.eval(row)))
}
