use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{FixKind, Formula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("formula is not clean: {0}")]
    NotClean(String),
    #[error("`{0}` is not a subformula of `{1}`")]
    NotSubformula(String, String),
}

/// A bound variable of a clean formula with its unique binder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binder {
    pub name: String,
    pub kind: FixKind,
    /// Node id of `eta x. delta`.
    pub binder_node: usize,
    /// Node id of `delta`.
    pub body_node: usize,
    /// Node id of the variable `x` itself, if it occurs.
    pub var_node: Option<usize>,
    /// Pre-order position of the binder in the formula.
    pub position: usize,
}

/// Subformulas, bound variables and the dependency order of a clean formula.
///
/// Nodes are the distinct subformulas, numbered in pre-order of first
/// occurrence, so node 0 is the formula itself.
#[derive(Debug, Clone)]
pub struct SubformulaIndex {
    nodes: Vec<Formula>,
    ids: HashMap<Formula, usize>,
    children: Vec<Vec<usize>>,
    binders: Vec<Binder>,
    by_name: HashMap<String, usize>,
    /// `order[i][j]` iff binder i is strictly below binder j in the
    /// dependency order.
    order: Vec<Vec<bool>>,
    /// Binder indices, listed so that smaller variables come first.
    enumeration: Vec<usize>,
    root_free: BTreeSet<String>,
}

impl SubformulaIndex {
    pub fn new(xi: &Formula) -> Result<Self, IndexError> {
        if !xi.is_clean() {
            return Err(IndexError::NotClean(xi.to_string()));
        }
        let mut index = SubformulaIndex {
            nodes: Vec::new(),
            ids: HashMap::new(),
            children: Vec::new(),
            binders: Vec::new(),
            by_name: HashMap::new(),
            order: Vec::new(),
            enumeration: Vec::new(),
            root_free: xi.free_vars(),
        };
        let mut position = 0;
        index.insert(xi, &mut position);
        for b in &mut index.binders {
            b.var_node = index.ids.get(&Formula::Atom(b.name.clone())).copied();
        }
        index.compute_order();
        index.compute_enumeration();
        Ok(index)
    }

    fn insert(&mut self, phi: &Formula, position: &mut usize) -> usize {
        if let Some(&id) = self.ids.get(phi) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(phi.clone());
        self.ids.insert(phi.clone(), id);
        self.children.push(Vec::new());
        let binder_slot = phi.as_fixpoint().map(|(kind, name, _)| {
            let slot = self.binders.len();
            self.binders.push(Binder {
                name: name.to_string(),
                kind,
                binder_node: id,
                body_node: usize::MAX,
                var_node: None,
                position: *position,
            });
            self.by_name.insert(name.to_string(), slot);
            slot
        });
        *position += 1;
        let kids: Vec<usize> = match phi {
            Formula::NegAtom(p) => vec![self.insert(&Formula::Atom(p.clone()), position)],
            _ => phi
                .children()
                .into_iter()
                .map(|c| self.insert(c, position))
                .collect(),
        };
        if let Some(slot) = binder_slot {
            self.binders[slot].body_node = kids[0];
        }
        self.children[id] = kids;
        id
    }

    fn is_strict_subformula(&self, small: usize, big: usize) -> bool {
        let mut stack = self.children[big].clone();
        let mut seen = vec![false; self.nodes.len()];
        while let Some(n) = stack.pop() {
            if n == small {
                return true;
            }
            if !std::mem::replace(&mut seen[n], true) {
                stack.extend(self.children[n].iter().copied());
            }
        }
        false
    }

    #[allow(clippy::needless_range_loop)]
    fn compute_order(&mut self) {
        let n = self.binders.len();
        let mut order = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (bi, bj) = (&self.binders[i], &self.binders[j]);
                let var_j_in_body_i = bj.var_node.is_some_and(|v| {
                    v == bi.body_node || self.is_strict_subformula(v, bi.body_node)
                });
                if var_j_in_body_i && self.is_strict_subformula(bi.body_node, bj.body_node) {
                    order[i][j] = true;
                }
            }
        }
        // transitive closure
        for k in 0..n {
            for i in 0..n {
                if order[i][k] {
                    for j in 0..n {
                        if order[k][j] {
                            order[i][j] = true;
                        }
                    }
                }
            }
        }
        self.order = order;
    }

    /// Topological sort of the dependency order, ties broken by leftmost
    /// binder.
    fn compute_enumeration(&mut self) {
        let n = self.binders.len();
        let mut placed = vec![false; n];
        for _ in 0..n {
            let next = (0..n)
                .filter(|&j| !placed[j])
                .filter(|&j| (0..n).all(|i| !self.order[i][j] || placed[i]))
                .min_by_key(|&j| self.binders[j].position)
                .expect("dependency order is acyclic");
            placed[next] = true;
            self.enumeration.push(next);
        }
    }

    pub fn root(&self) -> &Formula {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &Formula {
        &self.nodes[id]
    }

    pub fn id_of(&self, phi: &Formula) -> Option<usize> {
        self.ids.get(phi).copied()
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    /// Sf(ξ), in node order.
    pub fn subformulas(&self) -> impl Iterator<Item = &Formula> {
        self.nodes.iter()
    }

    pub fn binders(&self) -> &[Binder] {
        &self.binders
    }

    pub fn binder(&self, name: &str) -> Option<&Binder> {
        self.by_name.get(name).map(|&i| &self.binders[i])
    }

    pub fn is_bound_var(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// `x <_ξ y`.
    pub fn depends(&self, x: &str, y: &str) -> bool {
        match (self.by_name.get(x), self.by_name.get(y)) {
            (Some(&i), Some(&j)) => self.order[i][j],
            _ => false,
        }
    }

    /// Bound variables `x_1 .. x_n` in the fixed enumeration.
    pub fn enumeration(&self) -> impl Iterator<Item = &Binder> {
        self.enumeration.iter().map(|&i| &self.binders[i])
    }

    /// 1-based index of a bound variable in the enumeration.
    pub fn rank(&self, name: &str) -> Option<usize> {
        let slot = *self.by_name.get(name)?;
        self.enumeration
            .iter()
            .position(|&i| i == slot)
            .map(|p| p + 1)
    }

    /// `φ ⊴_f ξ`: every free variable of φ is free in ξ.
    pub fn is_free_subformula(&self, id: usize) -> bool {
        self.nodes[id]
            .free_vars()
            .iter()
            .all(|v| self.root_free.contains(v))
    }

    pub fn root_free_vars(&self) -> &BTreeSet<String> {
        &self.root_free
    }
}

/// `exp_ξ(φ)`: substitute each bound variable by its fixpoint formula,
/// following the enumeration.
pub fn expansion(index: &SubformulaIndex, phi: &Formula) -> Result<Formula, IndexError> {
    if index.id_of(phi).is_none() {
        return Err(IndexError::NotSubformula(
            phi.to_string(),
            index.root().to_string(),
        ));
    }
    let mut out = phi.clone();
    for b in index.enumeration() {
        out = out.substitute(&b.name, index.node(b.binder_node));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn subformulas_of_reachability() {
        let idx = SubformulaIndex::new(&f("mu x.(p | <>x)")).unwrap();
        let sf: BTreeSet<String> = idx.subformulas().map(|g| g.to_string()).collect();
        assert_eq!(sf.len(), 5);
        assert!(sf.contains("<>x"));
        assert_eq!(idx.binders().len(), 1);
        assert_eq!(idx.rank("x"), Some(1));
    }

    #[test]
    fn rejects_unclean() {
        assert!(matches!(
            SubformulaIndex::new(&f("mu x.<>x & nu x.[]x")),
            Err(IndexError::NotClean(_))
        ));
    }

    #[test]
    fn dependency_order_inner_before_outer() {
        // y's body mentions x, and sits inside x's body: y <_ξ x
        let idx = SubformulaIndex::new(&f("mu x. mu y. (<>x | <>y)")).unwrap();
        assert!(idx.depends("y", "x"));
        assert!(!idx.depends("x", "y"));
        let names: Vec<&str> = idx.enumeration().map(|b| b.name.as_str()).collect();
        assert_eq!(names, vec!["y", "x"]);
        assert_eq!(idx.rank("x"), Some(2));
    }

    #[test]
    fn independent_variables_follow_binder_position() {
        let idx = SubformulaIndex::new(&f("mu x. (mu y. <>y) | <>x")).unwrap();
        // y's body does not mention x
        assert!(!idx.depends("y", "x"));
        let names: Vec<&str> = idx.enumeration().map(|b| b.name.as_str()).collect();
        assert_eq!(names, vec!["x", "y"]);
    }

    #[test]
    fn expansion_examples() {
        let xi = f("mu x.<>x");
        let idx = SubformulaIndex::new(&xi).unwrap();
        assert_eq!(expansion(&idx, &f("x")).unwrap(), xi);
        assert_eq!(expansion(&idx, &f("<>x")).unwrap(), f("<>mu x.<>x"));
        assert_eq!(expansion(&idx, &xi).unwrap(), xi);
        assert!(expansion(&idx, &f("q")).is_err());
    }

    #[test]
    fn expansion_closes_nested_variables() {
        let xi = f("mu x. mu y. (<>x | <>y)");
        let idx = SubformulaIndex::new(&xi).unwrap();
        for phi in idx.subformulas() {
            let e = expansion(&idx, phi).unwrap();
            assert!(e.is_sentence(), "{phi} -> {e}");
        }
    }

    #[test]
    fn free_subformulas() {
        let idx = SubformulaIndex::new(&f("p & mu x.(q | <>x)")).unwrap();
        let id = idx.id_of(&f("q | <>x")).unwrap();
        assert!(!idx.is_free_subformula(id));
        assert!(idx.is_free_subformula(idx.id_of(&f("q")).unwrap()));
        assert!(idx.is_free_subformula(0));
    }
}
