//! Type elimination over the negation-closed closure of a formula.
//!
//! Start from every locally coherent set that fits the frame class, relate
//! sets by the box clause adapted to the class, and repeatedly remove sets
//! with an unwitnessed diamond or an unfulfilled least fixpoint. The sets
//! realised by any model of the class survive every round, so if no set
//! containing the formula survives, the formula is unsatisfiable. A
//! surviving set yields a candidate model, which the caller replays.

use std::collections::BTreeMap;

use super::sigma::{SigmaTable, TypeSet};
use crate::formula::{fl_closure, Formula};
use crate::kripke::{FrameClass, KripkeModel, Relation, StateSet};

pub enum Elimination {
    /// The formula belongs to no surviving set.
    Unsat,
    /// A model over the surviving sets and a state whose set contains the
    /// formula (not yet replayed).
    Candidate(KripkeModel, usize),
}

pub struct TypeSpace {
    sigma: SigmaTable,
    types: Vec<TypeSet>,
    succ: Vec<Vec<usize>>,
}

impl TypeSpace {
    pub fn new(phi: &Formula, class: FrameClass, max_pairs: usize) -> Result<Self, String> {
        let sigma = SigmaTable::new(&fl_closure([phi], true)).map_err(|e| e.to_string())?;
        let boxes = sigma.boxes();
        let reflexive_ok =
            |t: &TypeSet| boxes.iter().all(|&(b, d)| !t.contains(b) || t.contains(d));
        let types: Vec<TypeSet> = sigma
            .coherent_sets(max_pairs)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|t| !class.reflexive() || reflexive_ok(t))
            .collect();
        // the box clause, strengthened so that the relation lies in the class
        let related = |a: &TypeSet, b: &TypeSet| {
            boxes.iter().all(|&(bx, d)| {
                let fwd = !a.contains(bx) || b.contains(d);
                let back = !class.symmetric() || !b.contains(bx) || a.contains(d);
                let keep = !class.transitive() || !a.contains(bx) || b.contains(bx);
                let same = class != FrameClass::S5 || a.contains(bx) == b.contains(bx);
                fwd && back && keep && same
            })
        };
        let succ = types
            .iter()
            .map(|a| {
                (0..types.len())
                    .filter(|&j| related(a, &types[j]))
                    .collect()
            })
            .collect();
        Ok(TypeSpace { sigma, types, succ })
    }

    pub fn run(&self, phi: &Formula) -> Option<Elimination> {
        let target = self.sigma.id_of(phi)?;
        let mut alive = vec![true; self.types.len()];
        let diamonds = self.sigma.diamonds();
        let mus: Vec<usize> = (0..self.sigma.len())
            .filter(|&i| matches!(self.sigma.member(i), Formula::Mu(..)))
            .collect();
        loop {
            let mut changed = false;
            for a in 0..self.types.len() {
                if !alive[a] {
                    continue;
                }
                let witnessed = diamonds.iter().all(|&(d, g)| {
                    !self.types[a].contains(d)
                        || self.succ[a]
                            .iter()
                            .any(|&b| alive[b] && self.types[b].contains(g))
                });
                if !witnessed {
                    alive[a] = false;
                    changed = true;
                }
            }
            for &m in &mus {
                let ful = self.fulfilled(m, &alive)?;
                for a in 0..self.types.len() {
                    if alive[a] && self.types[a].contains(m) && !ful[a] {
                        alive[a] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let states: Vec<usize> = (0..self.types.len()).filter(|&a| alive[a]).collect();
        let Some(pos) = states.iter().position(|&a| self.types[a].contains(target)) else {
            return Some(Elimination::Unsat);
        };
        let n = states.len();
        let mut relation = Relation::empty(n);
        for (i, &a) in states.iter().enumerate() {
            for (j, &b) in states.iter().enumerate() {
                if self.succ[a].contains(&b) {
                    relation.insert(i, j);
                }
            }
        }
        let valuation = phi
            .free_vars()
            .into_iter()
            .map(|p| {
                let id = self.sigma.id_of(&Formula::atom(p.clone()));
                let set = StateSet::from_indices(
                    n,
                    (0..n).filter(|&i| id.is_some_and(|id| self.types[states[i]].contains(id))),
                );
                (p, set)
            })
            .collect();
        let names = (0..n).map(|i| format!("t{i}")).collect();
        let model = KripkeModel::new(names, relation, valuation).ok()?;
        Some(Elimination::Candidate(model, pos))
    }

    /// Sets at which the least fixpoint `m` is reached in finitely many
    /// unfoldings, trusting membership for subformulas that do not mention
    /// `m`.
    fn fulfilled(&self, m: usize, alive: &[bool]) -> Option<Vec<bool>> {
        let fix = self.sigma.member(m);
        let unfolded = fix.unfold()?;
        let mut z = vec![false; self.types.len()];
        loop {
            let body = self.eval(&unfolded, fix, &z, &mut BTreeMap::new(), alive)?;
            let next: Vec<bool> = (0..self.types.len())
                .map(|a| alive[a] && self.types[a].contains(m) && body[a])
                .collect();
            if next == z {
                return Some(z);
            }
            z = next;
        }
    }

    fn eval(
        &self,
        chi: &Formula,
        fix: &Formula,
        z: &[bool],
        env: &mut BTreeMap<String, Vec<bool>>,
        alive: &[bool],
    ) -> Option<Vec<bool>> {
        let n = self.types.len();
        let member = |id: usize| -> Vec<bool> {
            (0..n)
                .map(|a| alive[a] && self.types[a].contains(id))
                .collect()
        };
        let closed_here = env.keys().all(|x| !chi.occurs_free(x));
        if closed_here {
            let c = chi.canonical();
            if &c == fix {
                return Some(z.to_vec());
            }
            if !mentions(chi, fix) {
                if let Some(id) = self.sigma.id_of_canonical(&c) {
                    return Some(member(id));
                }
            }
        }
        Some(match chi {
            Formula::Atom(x) if env.contains_key(x) => env[x].clone(),
            Formula::Atom(_) | Formula::NegAtom(_) => member(self.sigma.id_of(chi)?),
            Formula::Top => alive.to_vec(),
            Formula::Bottom => vec![false; n],
            Formula::Or(a, b) => {
                let (l, r) = (
                    self.eval(a, fix, z, env, alive)?,
                    self.eval(b, fix, z, env, alive)?,
                );
                l.iter().zip(&r).map(|(&x, &y)| x || y).collect()
            }
            Formula::And(a, b) => {
                let (l, r) = (
                    self.eval(a, fix, z, env, alive)?,
                    self.eval(b, fix, z, env, alive)?,
                );
                l.iter().zip(&r).map(|(&x, &y)| x && y).collect()
            }
            Formula::Diamond(a) => {
                let s = self.eval(a, fix, z, env, alive)?;
                (0..n)
                    .map(|x| alive[x] && self.succ[x].iter().any(|&y| alive[y] && s[y]))
                    .collect()
            }
            Formula::Box(a) => {
                let s = self.eval(a, fix, z, env, alive)?;
                (0..n)
                    .map(|x| alive[x] && self.succ[x].iter().all(|&y| !alive[y] || s[y]))
                    .collect()
            }
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                let mut cur = if matches!(chi, Formula::Mu(..)) {
                    vec![false; n]
                } else {
                    alive.to_vec()
                };
                let saved = env.insert(x.clone(), cur.clone());
                loop {
                    env.insert(x.clone(), cur.clone());
                    let next = self.eval(body, fix, z, env, alive)?;
                    if next == cur {
                        break;
                    }
                    cur = next;
                }
                match saved {
                    Some(v) => env.insert(x.clone(), v),
                    None => env.remove(x),
                };
                cur
            }
        })
    }
}

fn mentions(chi: &Formula, fix: &Formula) -> bool {
    let mut found = false;
    chi.visit(&mut |f| {
        if !found && f.is_fixpoint() && &f.canonical() == fix {
            found = true;
        }
    });
    found
}
