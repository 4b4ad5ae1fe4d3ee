//! An indexed, negation-closed closure set and the locally coherent subsets
//! of it: one formula from every `{phi, ~phi}` pair, with disjunctions,
//! conjunctions and fixpoints agreeing with their parts.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::{ClosureSet, Formula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("closure set lacks `{missing}`, the negation of `{member}`")]
    NotNegClosed { member: String, missing: String },
    #[error("closure set lacks `{missing}`, required by `{member}`")]
    NotClosed { member: String, missing: String },
    #[error("{pairs} independent pairs exceed the limit of {limit}")]
    TooLarge { pairs: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Top,
    Bottom,
    Literal,
    Or(usize, usize),
    And(usize, usize),
    Diamond(usize),
    Box(usize),
    /// A fixpoint formula and its unfolding.
    Fix(usize),
}

/// A set of formulas `⊆ Σ`, as membership bits over [`SigmaTable`] ids.
pub type TypeSet = FixedBitSet;

#[derive(Debug, Clone)]
pub struct SigmaTable {
    members: Vec<Formula>,
    index: HashMap<Formula, usize>,
    neg: Vec<usize>,
    nodes: Vec<Node>,
}

impl SigmaTable {
    pub fn new(sigma: &ClosureSet) -> Result<Self, SigmaError> {
        let members: Vec<Formula> = sigma.iter().cloned().collect();
        let index: HashMap<Formula, usize> = members
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        let lookup = |member: &Formula, g: Formula, negation: bool| {
            let g = g.canonical();
            index.get(&g).copied().ok_or_else(|| {
                let (member, missing) = (member.to_string(), g.to_string());
                if negation {
                    SigmaError::NotNegClosed { member, missing }
                } else {
                    SigmaError::NotClosed { member, missing }
                }
            })
        };
        let mut neg = Vec::with_capacity(members.len());
        let mut nodes = Vec::with_capacity(members.len());
        for f in &members {
            neg.push(lookup(f, f.negate(), true)?);
            nodes.push(match f {
                Formula::Top => Node::Top,
                Formula::Bottom => Node::Bottom,
                Formula::Atom(_) | Formula::NegAtom(_) => Node::Literal,
                Formula::Or(a, b) => Node::Or(
                    lookup(f, (**a).clone(), false)?,
                    lookup(f, (**b).clone(), false)?,
                ),
                Formula::And(a, b) => Node::And(
                    lookup(f, (**a).clone(), false)?,
                    lookup(f, (**b).clone(), false)?,
                ),
                Formula::Diamond(a) => Node::Diamond(lookup(f, (**a).clone(), false)?),
                Formula::Box(a) => Node::Box(lookup(f, (**a).clone(), false)?),
                Formula::Mu(..) | Formula::Nu(..) => {
                    Node::Fix(lookup(f, f.unfold().unwrap(), false)?)
                }
            });
        }
        Ok(SigmaTable {
            members,
            index,
            neg,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, id: usize) -> &Formula {
        &self.members[id]
    }

    pub fn members(&self) -> &[Formula] {
        &self.members
    }

    /// Id of a formula, compared up to renaming of bound variables.
    pub fn id_of(&self, phi: &Formula) -> Option<usize> {
        self.index.get(&phi.canonical()).copied()
    }

    pub(crate) fn id_of_canonical(&self, phi: &Formula) -> Option<usize> {
        self.index.get(phi).copied()
    }

    pub fn neg(&self, id: usize) -> usize {
        self.neg[id]
    }

    /// `(box id, body id)` for every member `[]phi`.
    pub(crate) fn boxes(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|i| match self.nodes[i] {
                Node::Box(b) => Some((i, b)),
                _ => None,
            })
            .collect()
    }

    /// `(diamond id, body id)` for every member `<>phi`.
    pub(crate) fn diamonds(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|i| match self.nodes[i] {
                Node::Diamond(b) => Some((i, b)),
                _ => None,
            })
            .collect()
    }

    /// Pairs whose choice is not forced by other members: literals, modal
    /// formulas and fixpoints. Each pair is represented by its smaller id.
    fn free_pairs(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| i < self.neg[i])
            .filter(|&i| {
                matches!(
                    self.nodes[i],
                    Node::Literal | Node::Diamond(_) | Node::Box(_) | Node::Fix(_)
                )
            })
            .collect()
    }

    /// All locally coherent sets, in the order of the bitmask over free
    /// pairs (bit set = the smaller-id member is chosen).
    pub fn coherent_sets(&self, max_pairs: usize) -> Result<Vec<TypeSet>, SigmaError> {
        let free = self.free_pairs();
        if free.len() > max_pairs {
            return Err(SigmaError::TooLarge {
                pairs: free.len(),
                limit: max_pairs,
            });
        }
        let mut out = Vec::new();
        for mask in 0u64..1 << free.len() {
            let mut known = vec![None; self.len()];
            for (bit, &i) in free.iter().enumerate() {
                let chosen = mask >> bit & 1 == 1;
                known[i] = Some(chosen);
                known[self.neg[i]] = Some(!chosen);
            }
            let values: Vec<bool> = (0..self.len()).map(|i| self.value(i, &mut known)).collect();
            let coherent = (0..self.len()).all(|i| match self.nodes[i] {
                Node::Fix(u) => values[i] == values[u],
                _ => true,
            });
            if coherent {
                let mut set = TypeSet::with_capacity(self.len());
                for (i, &v) in values.iter().enumerate() {
                    set.set(i, v);
                }
                out.push(set);
            }
        }
        Ok(out)
    }

    fn value(&self, i: usize, known: &mut [Option<bool>]) -> bool {
        if let Some(v) = known[i] {
            return v;
        }
        let v = match self.nodes[i] {
            Node::Top => true,
            Node::Bottom => false,
            Node::Or(a, b) => self.value(a, known) || self.value(b, known),
            Node::And(a, b) => self.value(a, known) && self.value(b, known),
            _ => unreachable!("free pairs are assigned first"),
        };
        known[i] = Some(v);
        v
    }

    /// The characteristic conjunction of a set, members in id order.
    pub fn conjunction(&self, set: &TypeSet) -> Formula {
        Formula::conjunction(set.ones().map(|i| self.members[i].clone()))
    }

    pub fn set_members<'a>(&'a self, set: &'a TypeSet) -> impl Iterator<Item = &'a Formula> + 'a {
        set.ones().map(|i| &self.members[i])
    }
}
