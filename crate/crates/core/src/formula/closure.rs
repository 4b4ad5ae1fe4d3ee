use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{expansion, Formula, IndexError, SubformulaIndex};

/// A finite set of formulas stored in α-canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClosureSet {
    members: BTreeSet<Formula>,
    neg_closed: bool,
}

impl ClosureSet {
    /// Canonicalise and collect; no closure is applied.
    pub fn from_formulas<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let members = items.into_iter().map(|f| f.canonical()).collect();
        let mut set = ClosureSet {
            members,
            neg_closed: false,
        };
        set.neg_closed = set.is_neg_closed();
        set
    }

    pub fn contains(&self, phi: &Formula) -> bool {
        self.members.contains(&phi.canonical())
    }

    /// Membership test for a formula already in canonical form.
    pub fn contains_canonical(&self, phi: &Formula) -> bool {
        self.members.contains(phi)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter()
    }

    pub fn members(&self) -> &BTreeSet<Formula> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Flag recorded at construction: every member's negation is a member.
    pub fn neg_closed(&self) -> bool {
        self.neg_closed
    }

    fn is_neg_closed(&self) -> bool {
        self.members
            .iter()
            .all(|f| self.members.contains(&f.negate().canonical()))
    }

    /// Closed under the four closure rules.
    pub fn is_fl_closed(&self) -> bool {
        self.members.iter().all(|f| {
            closure_successors(f)
                .iter()
                .all(|g| self.members.contains(g))
        })
    }

    /// A member together with a formula one closure step adds that is not a
    /// member, if there is one.
    pub fn missing_successor(&self) -> Option<(&Formula, Formula)> {
        self.members.iter().find_map(|f| {
            closure_successors(f)
                .into_iter()
                .find(|g| !self.members.contains(g))
                .map(|g| (f, g))
        })
    }

    /// Names occurring free in some member.
    pub fn free_names(&self) -> BTreeSet<String> {
        self.members.iter().flat_map(|f| f.free_vars()).collect()
    }

    /// Members of the form `[]phi`.
    pub fn boxes(&self) -> impl Iterator<Item = (&Formula, &Formula)> {
        self.members.iter().filter_map(|f| match f {
            Formula::Box(b) => Some((f, b.as_ref())),
            _ => None,
        })
    }
}

/// The formulas one closure step adds for `phi` (canonicalised).
fn closure_successors(phi: &Formula) -> Vec<Formula> {
    match phi {
        Formula::NegAtom(p) => vec![Formula::Atom(p.clone())],
        Formula::Or(a, b) | Formula::And(a, b) => vec![a.canonical(), b.canonical()],
        Formula::Diamond(a) | Formula::Box(a) => vec![a.canonical()],
        Formula::Mu(..) | Formula::Nu(..) => vec![phi.unfold().unwrap().canonical()],
        _ => Vec::new(),
    }
}

/// Least superset of `phis` closed under the Fischer–Ladner rules; with
/// `with_negations` also closed under the negation operator.
pub fn fl_closure<'a, I>(phis: I, with_negations: bool) -> ClosureSet
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut members = BTreeSet::new();
    let mut queue: VecDeque<Formula> = phis.into_iter().map(|f| f.canonical()).collect();
    while let Some(f) = queue.pop_front() {
        if members.contains(&f) {
            continue;
        }
        queue.extend(closure_successors(&f));
        if with_negations {
            queue.push_back(f.negate().canonical());
        }
        members.insert(f);
    }
    ClosureSet {
        members,
        neg_closed: with_negations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureIdentityReport {
    pub equal: bool,
    pub closure_size: usize,
    pub expansion_size: usize,
    /// In the closure but not an expansion of any subformula.
    pub only_in_closure: Vec<String>,
    /// An expansion that the closure misses.
    pub only_in_expansions: Vec<String>,
}

/// Compare the closure of a clean formula with the set of expansions of its
/// subformulas.
pub fn closure_identity_check(xi: &Formula) -> Result<ClosureIdentityReport, IndexError> {
    let index = SubformulaIndex::new(xi)?;
    let closure = fl_closure([xi], false);
    let mut expansions = BTreeSet::new();
    for phi in index.subformulas() {
        expansions.insert(expansion(&index, phi)?.canonical());
    }
    let only_in_closure: Vec<String> = closure
        .iter()
        .filter(|f| !expansions.contains(*f))
        .map(|f| f.to_string())
        .collect();
    let only_in_expansions: Vec<String> = expansions
        .iter()
        .filter(|f| !closure.contains_canonical(f))
        .map(|f| f.to_string())
        .collect();
    Ok(ClosureIdentityReport {
        equal: only_in_closure.is_empty() && only_in_expansions.is_empty(),
        closure_size: closure.len(),
        expansion_size: expansions.len(),
        only_in_closure,
        only_in_expansions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Formula> {
        items.iter().map(|s| f(s).canonical()).collect()
    }

    #[test]
    fn closure_of_atom() {
        assert_eq!(fl_closure([&f("p")], false).members(), &set(&["p"]));
    }

    #[test]
    fn closure_of_simple_fixpoint() {
        let c = fl_closure([&f("mu x.<>x")], false);
        assert_eq!(c.members(), &set(&["mu x.<>x", "<>(mu x.<>x)"]));
        assert!(c.is_fl_closed());
    }

    #[test]
    fn negation_closure_of_diamond() {
        let c = fl_closure([&f("<>p")], true);
        assert_eq!(c.members(), &set(&["<>p", "p", "!p", "[]!p"]));
        assert!(c.neg_closed());
    }

    #[test]
    fn closure_of_reachability() {
        let c = fl_closure([&f("mu x.(p | <>x)")], false);
        assert_eq!(
            c.members(),
            &set(&[
                "mu x.(p | <>x)",
                "p | <>mu x.(p | <>x)",
                "p",
                "<>mu x.(p | <>x)"
            ])
        );
        let n = fl_closure([&f("mu x.(p | <>x)")], true);
        assert_eq!(n.len(), 8);
    }

    #[test]
    fn negated_atom_brings_its_atom() {
        assert_eq!(fl_closure([&f("!q")], false).members(), &set(&["!q", "q"]));
    }

    #[test]
    fn closure_identity_examples() {
        for (s, size) in [("p", 1), ("mu x.<>x", 2), ("mu x.(p | <>x)", 4)] {
            let r = closure_identity_check(&f(s)).unwrap();
            assert!(r.equal, "{s}: {r:?}");
            assert_eq!(r.closure_size, size, "{s}");
        }
    }

    #[test]
    fn closure_identity_nested() {
        let r = closure_identity_check(&f("mu x. (p & <>x) | nu y. (q & []y) | <>mu z.(x | <>z)"))
            .unwrap();
        assert!(r.equal, "{r:?}");
    }
}
