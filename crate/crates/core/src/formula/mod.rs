//! Formulas of the modal μ-calculus in negation normal form, together with
//! the purely syntactic machinery: free/bound variables, capture-avoiding
//! substitution, the negation operator, α-canonical forms, fragment
//! classification and Fischer–Ladner closure.
//!
//! Propositional atoms and fixpoint variables share one name space. A name is
//! a variable of a formula when it is bound by an enclosing `mu`/`nu`.

mod closure;
mod fragment;
mod index;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use closure::{closure_identity_check, fl_closure, ClosureIdentityReport, ClosureSet};
pub use fragment::{classify_fragment, is_mucml, Fragment, FragmentReport};
pub use index::{expansion, Binder, IndexError, SubformulaIndex};

/// Least or greatest fixpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum FixKind {
    Mu,
    Nu,
}

impl FixKind {
    pub fn dual(self) -> FixKind {
        match self {
            FixKind::Mu => FixKind::Nu,
            FixKind::Nu => FixKind::Mu,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            FixKind::Mu => "mu",
            FixKind::Nu => "nu",
        }
    }
}

/// A formula in negation normal form. Negation is only applied to names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    NegAtom(String),
    Top,
    Bottom,
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn neg_atom(name: impl Into<String>) -> Formula {
        Formula::NegAtom(name.into())
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn diamond(body: Formula) -> Formula {
        Formula::Diamond(Box::new(body))
    }

    pub fn boxed(body: Formula) -> Formula {
        Formula::Box(Box::new(body))
    }

    pub fn mu(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Mu(var.into(), Box::new(body))
    }

    pub fn nu(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Nu(var.into(), Box::new(body))
    }

    pub fn fixpoint(kind: FixKind, var: impl Into<String>, body: Formula) -> Formula {
        match kind {
            FixKind::Mu => Formula::mu(var, body),
            FixKind::Nu => Formula::nu(var, body),
        }
    }

    /// `left -> right`, i.e. `~left | right`.
    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::or(left.negate(), right)
    }

    /// `(left -> right) & (right -> left)`.
    pub fn iff(left: Formula, right: Formula) -> Formula {
        Formula::and(
            Formula::implies(left.clone(), right.clone()),
            Formula::implies(right, left),
        )
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bottom)
    }

    pub fn as_fixpoint(&self) -> Option<(FixKind, &str, &Formula)> {
        match self {
            Formula::Mu(x, body) => Some((FixKind::Mu, x, body)),
            Formula::Nu(x, body) => Some((FixKind::Nu, x, body)),
            _ => None,
        }
    }

    pub fn is_fixpoint(&self) -> bool {
        self.as_fixpoint().is_some()
    }

    /// Immediate syntactic children. `!p` has `p` as its child so that the
    /// subformula relation agrees with closure rule (i).
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(a, b) | Formula::And(a, b) => vec![a, b],
            Formula::Diamond(a) | Formula::Box(a) | Formula::Mu(_, a) | Formula::Nu(_, a) => {
                vec![a]
            }
            _ => Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Number of binders.
    pub fn binder_count(&self) -> usize {
        let own = usize::from(self.is_fixpoint());
        own + self
            .children()
            .iter()
            .map(|c| c.binder_count())
            .sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(n) | Formula::NegAtom(n) => {
                if !bound.contains(&n.as_str()) {
                    out.insert(n.clone());
                }
            }
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                bound.push(x);
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn occurs_free(&self, name: &str) -> bool {
        match self {
            Formula::Atom(n) | Formula::NegAtom(n) => n == name,
            Formula::Mu(x, body) | Formula::Nu(x, body) => x != name && body.occurs_free(name),
            _ => self.children().iter().any(|c| c.occurs_free(name)),
        }
    }

    /// Names of all binders.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Some((_, x, _)) = f.as_fixpoint() {
                out.insert(x.to_string());
            }
        });
        out
    }

    /// Every name occurring anywhere, free or bound.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Atom(n) | Formula::NegAtom(n) | Formula::Mu(n, _) | Formula::Nu(n, _) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Free and bound names are disjoint.
    pub fn is_tidy(&self) -> bool {
        self.free_vars().is_disjoint(&self.bound_vars())
    }

    /// Tidy, and every bound name has exactly one binder.
    pub fn is_clean(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut unique = true;
        self.visit(&mut |f| {
            if let Some((_, x, _)) = f.as_fixpoint() {
                unique &= seen.insert(x.to_string());
            }
        });
        unique && self.is_tidy()
    }

    /// Does `x` occur under a negation somewhere it is bound? Such formulas
    /// are not monotone in `x` and have no fixpoint semantics.
    pub fn has_negated_bound_var(&self) -> bool {
        fn go<'a>(f: &'a Formula, bound: &mut Vec<&'a str>) -> bool {
            match f {
                Formula::NegAtom(n) => bound.contains(&n.as_str()),
                Formula::Mu(x, b) | Formula::Nu(x, b) => {
                    bound.push(x);
                    let r = go(b, bound);
                    bound.pop();
                    r
                }
                _ => f.children().into_iter().any(|c| go(c, bound)),
            }
        }
        go(self, &mut Vec::new())
    }

    /// Capture-avoiding substitution `self[psi/x]`. A negated occurrence
    /// `!x` is replaced by the negation of `psi`, keeping the result in
    /// negation normal form.
    pub fn substitute(&self, x: &str, psi: &Formula) -> Formula {
        let psi_free = psi.free_vars();
        self.subst_inner(x, psi, &psi_free)
    }

    fn subst_inner(&self, x: &str, psi: &Formula, psi_free: &BTreeSet<String>) -> Formula {
        match self {
            Formula::Atom(n) if n == x => psi.clone(),
            Formula::NegAtom(n) if n == x => psi.negate(),
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Top | Formula::Bottom => self.clone(),
            Formula::Or(a, b) => Formula::or(
                a.subst_inner(x, psi, psi_free),
                b.subst_inner(x, psi, psi_free),
            ),
            Formula::And(a, b) => Formula::and(
                a.subst_inner(x, psi, psi_free),
                b.subst_inner(x, psi, psi_free),
            ),
            Formula::Diamond(a) => Formula::diamond(a.subst_inner(x, psi, psi_free)),
            Formula::Box(a) => Formula::boxed(a.subst_inner(x, psi, psi_free)),
            Formula::Mu(y, body) | Formula::Nu(y, body) => {
                let kind = self.as_fixpoint().map(|(k, _, _)| k).unwrap();
                if y == x || !body.occurs_free(x) {
                    return self.clone();
                }
                if psi_free.contains(y) {
                    let mut avoid = psi_free.clone();
                    avoid.extend(body.all_names());
                    avoid.insert(x.to_string());
                    let fresh = fresh_name(y, &avoid);
                    let renamed = body.substitute(y, &Formula::Atom(fresh.clone()));
                    Formula::fixpoint(kind, fresh, renamed.subst_inner(x, psi, psi_free))
                } else {
                    Formula::fixpoint(kind, y.clone(), body.subst_inner(x, psi, psi_free))
                }
            }
        }
    }

    /// The negation operator: De Morgan duals throughout, with
    /// `~(eta x. phi) = dual-eta x. ~phi[!x/x]`. Occurrences of bound
    /// variables therefore keep their polarity.
    pub fn negate(&self) -> Formula {
        self.negate_under(&mut Vec::new())
    }

    fn negate_under<'a>(&'a self, bound: &mut Vec<&'a str>) -> Formula {
        match self {
            Formula::Atom(n) => {
                if bound.contains(&n.as_str()) {
                    self.clone()
                } else {
                    Formula::NegAtom(n.clone())
                }
            }
            Formula::NegAtom(n) => {
                if bound.contains(&n.as_str()) {
                    self.clone()
                } else {
                    Formula::Atom(n.clone())
                }
            }
            Formula::Top => Formula::Bottom,
            Formula::Bottom => Formula::Top,
            Formula::Or(a, b) => Formula::and(a.negate_under(bound), b.negate_under(bound)),
            Formula::And(a, b) => Formula::or(a.negate_under(bound), b.negate_under(bound)),
            Formula::Diamond(a) => Formula::boxed(a.negate_under(bound)),
            Formula::Box(a) => Formula::diamond(a.negate_under(bound)),
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                let kind = self.as_fixpoint().map(|(k, _, _)| k).unwrap();
                bound.push(x);
                let nb = body.negate_under(bound);
                bound.pop();
                Formula::fixpoint(kind.dual(), x.clone(), nb)
            }
        }
    }

    /// Swap every connective for its dual but keep literals: the formula
    /// `~(self[~p/p])` computed syntactically.
    pub fn dual(&self) -> Formula {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => self.clone(),
            Formula::Top => Formula::Bottom,
            Formula::Bottom => Formula::Top,
            Formula::Or(a, b) => Formula::and(a.dual(), b.dual()),
            Formula::And(a, b) => Formula::or(a.dual(), b.dual()),
            Formula::Diamond(a) => Formula::boxed(a.dual()),
            Formula::Box(a) => Formula::diamond(a.dual()),
            Formula::Mu(x, b) => Formula::nu(x.clone(), b.dual()),
            Formula::Nu(x, b) => Formula::mu(x.clone(), b.dual()),
        }
    }

    /// Unfold a fixpoint formula once: `phi[eta x.phi / x]`.
    pub fn unfold(&self) -> Option<Formula> {
        let (_, x, body) = self.as_fixpoint()?;
        Some(body.substitute(x, self))
    }

    /// The α-canonical representative: every binder is renamed, in pre-order,
    /// to the next name of `x, y, z, u, v, w, x1, y1, ...` that is not free in
    /// the formula. The result is clean, and two formulas are α-equivalent
    /// iff their canonical forms are equal.
    pub fn canonical(&self) -> Formula {
        let free = self.free_vars();
        let mut supply = NameSupply::new(&free);
        self.rename_binders(&mut Vec::new(), &mut supply)
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    fn rename_binders(&self, env: &mut Vec<(String, String)>, supply: &mut NameSupply) -> Formula {
        let lookup = |env: &Vec<(String, String)>, n: &String| {
            env.iter()
                .rev()
                .find(|(old, _)| old == n)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| n.clone())
        };
        match self {
            Formula::Atom(n) => Formula::Atom(lookup(env, n)),
            Formula::NegAtom(n) => Formula::NegAtom(lookup(env, n)),
            Formula::Top | Formula::Bottom => self.clone(),
            Formula::Or(a, b) => {
                let a = a.rename_binders(env, supply);
                Formula::or(a, b.rename_binders(env, supply))
            }
            Formula::And(a, b) => {
                let a = a.rename_binders(env, supply);
                Formula::and(a, b.rename_binders(env, supply))
            }
            Formula::Diamond(a) => Formula::diamond(a.rename_binders(env, supply)),
            Formula::Box(a) => Formula::boxed(a.rename_binders(env, supply)),
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                let kind = self.as_fixpoint().map(|(k, _, _)| k).unwrap();
                let new = supply.next();
                env.push((x.clone(), new.clone()));
                let body = body.rename_binders(env, supply);
                env.pop();
                Formula::fixpoint(kind, new, body)
            }
        }
    }

    /// A clean alphabetic variant that keeps the original binder names where
    /// possible. Returns the variant and the renamings applied, in binder
    /// pre-order, as `(old, new)` pairs.
    pub fn cleaned(&self) -> (Formula, Vec<(String, String)>) {
        let free = self.free_vars();
        let mut taken: BTreeSet<String> = self.all_names();
        let mut used: BTreeSet<String> = free.clone();
        let mut renamings = Vec::new();
        let f = self.clean_inner(&mut Vec::new(), &mut used, &mut taken, &mut renamings);
        (f, renamings)
    }

    fn clean_inner(
        &self,
        env: &mut Vec<(String, String)>,
        used: &mut BTreeSet<String>,
        taken: &mut BTreeSet<String>,
        renamings: &mut Vec<(String, String)>,
    ) -> Formula {
        let lookup = |env: &Vec<(String, String)>, n: &String| {
            env.iter()
                .rev()
                .find(|(old, _)| old == n)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| n.clone())
        };
        match self {
            Formula::Atom(n) => Formula::Atom(lookup(env, n)),
            Formula::NegAtom(n) => Formula::NegAtom(lookup(env, n)),
            Formula::Top | Formula::Bottom => self.clone(),
            Formula::Or(a, b) => {
                let a = a.clean_inner(env, used, taken, renamings);
                Formula::or(a, b.clean_inner(env, used, taken, renamings))
            }
            Formula::And(a, b) => {
                let a = a.clean_inner(env, used, taken, renamings);
                Formula::and(a, b.clean_inner(env, used, taken, renamings))
            }
            Formula::Diamond(a) => Formula::diamond(a.clean_inner(env, used, taken, renamings)),
            Formula::Box(a) => Formula::boxed(a.clean_inner(env, used, taken, renamings)),
            Formula::Mu(x, body) | Formula::Nu(x, body) => {
                let kind = self.as_fixpoint().map(|(k, _, _)| k).unwrap();
                let new = if used.contains(x) {
                    let fresh = fresh_name(x, taken);
                    renamings.push((x.clone(), fresh.clone()));
                    fresh
                } else {
                    x.clone()
                };
                used.insert(new.clone());
                taken.insert(new.clone());
                env.push((x.clone(), new.clone()));
                let body = body.clean_inner(env, used, taken, renamings);
                env.pop();
                Formula::fixpoint(kind, new, body)
            }
        }
    }

    /// Rename free occurrences according to `map` (no capture checks; the
    /// targets must not be bound in `self`).
    pub fn rename_free(&self, map: &BTreeMap<String, String>) -> Formula {
        let mut out = self.clone();
        for (old, new) in map {
            out = out.substitute(old, &Formula::Atom(new.clone()));
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_formula(self))
    }
}

/// `base_1`, `base_2`, ... : the first such name not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

struct NameSupply<'a> {
    avoid: &'a BTreeSet<String>,
    next: usize,
}

impl<'a> NameSupply<'a> {
    const BASES: [&'static str; 6] = ["x", "y", "z", "u", "v", "w"];

    fn new(avoid: &'a BTreeSet<String>) -> Self {
        NameSupply { avoid, next: 0 }
    }

    fn next(&mut self) -> String {
        loop {
            let i = self.next;
            self.next += 1;
            let base = Self::BASES[i % Self::BASES.len()];
            let round = i / Self::BASES.len();
            let name = if round == 0 {
                base.to_string()
            } else {
                format!("{base}{round}")
            };
            if !self.avoid.contains(&name) {
                return name;
            }
        }
    }
}
