//! Finite Kripke models, frame classes and model generators.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// A subset of the states of a model.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        StateSet(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, items: I) -> Self {
        let mut s = StateSet::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    /// Size of the underlying state space.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, s: usize) {
        self.0.insert(s);
    }

    pub fn remove(&mut self, s: usize) {
        self.0.set(s, false);
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(s)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn complement(&self) -> StateSet {
        let mut out = self.clone();
        out.0.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A binary relation on `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Relation {
    n: usize,
    bits: FixedBitSet,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation {
            n,
            bits: FixedBitSet::with_capacity(n * n),
        }
    }

    /// Bit `i * n + j` of `bitmap` is the pair `(i, j)`.
    pub fn from_bitmap(n: usize, bitmap: u64) -> Self {
        let mut r = Relation::empty(n);
        for k in 0..n * n {
            if bitmap >> k & 1 == 1 {
                r.bits.insert(k);
            }
        }
        r
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Self {
        let mut r = Relation::empty(n);
        for (i, j) in pairs {
            r.insert(i, j);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits.contains(i * self.n + j)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.bits.insert(i * self.n + j);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.bits.set(i * self.n + j, false);
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.ones().map(|k| (k / self.n, k % self.n))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &Relation) -> Relation {
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn reflexive_closure(&self) -> Relation {
        let mut out = self.clone();
        for i in 0..self.n {
            out.insert(i, i);
        }
        out
    }

    pub fn symmetric_closure(&self) -> Relation {
        let mut out = self.clone();
        for (i, j) in self.pairs() {
            out.insert(j, i);
        }
        out
    }

    pub fn transitive_closure(&self) -> Relation {
        let mut out = self.clone();
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                if out.contains(i, k) {
                    for j in 0..n {
                        if out.contains(k, j) {
                            out.insert(i, j);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn equivalence_closure(&self) -> Relation {
        self.reflexive_closure()
            .symmetric_closure()
            .transitive_closure()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one state")]
    NoStates,
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("undeclared state `{0}`")]
    UndeclaredState(String),
    #[error("subset is not over the model's {expected} states (got universe {found})")]
    ForeignSubset { expected: usize, found: usize },
}

/// A finite Kripke model `(S, R, V)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KripkeModel {
    names: Vec<String>,
    relation: Relation,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    valuation: BTreeMap<String, StateSet>,
}

impl KripkeModel {
    pub fn new(
        names: Vec<String>,
        relation: Relation,
        valuation: BTreeMap<String, StateSet>,
    ) -> Result<Self, ModelError> {
        if names.is_empty() {
            return Err(ModelError::NoStates);
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(ModelError::DuplicateState(n.clone()));
            }
        }
        let n = names.len();
        if relation.size() != n {
            return Err(ModelError::ForeignSubset {
                expected: n,
                found: relation.size(),
            });
        }
        for set in valuation.values() {
            if set.universe() != n {
                return Err(ModelError::ForeignSubset {
                    expected: n,
                    found: set.universe(),
                });
            }
        }
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (i, j) in relation.pairs() {
            succ[i].push(j);
            pred[j].push(i);
        }
        Ok(KripkeModel {
            names,
            relation,
            succ,
            pred,
            valuation,
        })
    }

    /// States named `s0, s1, ...`.
    pub fn numbered(relation: Relation, valuation: BTreeMap<String, StateSet>) -> Self {
        let names = (0..relation.size()).map(|i| format!("s{i}")).collect();
        KripkeModel::new(names, relation, valuation).expect("numbered model is well formed")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn states(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn predecessors(&self, s: usize) -> &[usize] {
        &self.pred[s]
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.relation.contains(s, t)
    }

    pub fn valuation(&self) -> &BTreeMap<String, StateSet> {
        &self.valuation
    }

    pub fn value(&self, atom: &str) -> Option<&StateSet> {
        self.valuation.get(atom)
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.len())
    }

    pub fn full_set(&self) -> StateSet {
        StateSet::full(self.len())
    }

    /// States with some successor in `x`.
    pub fn diamond(&self, x: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for t in x.iter() {
            for &s in &self.pred[t] {
                out.insert(s);
            }
        }
        out
    }

    /// States all of whose successors are in `x`.
    pub fn boxed(&self, x: &StateSet) -> StateSet {
        let mut out = self.empty_set();
        for s in self.states() {
            if self.succ[s].iter().all(|&t| x.contains(t)) {
                out.insert(s);
            }
        }
        out
    }

    /// `V[x ↦ X]`.
    pub fn update_valuation(&self, atom: &str, set: StateSet) -> Result<KripkeModel, ModelError> {
        if set.universe() != self.len() {
            return Err(ModelError::ForeignSubset {
                expected: self.len(),
                found: set.universe(),
            });
        }
        let mut out = self.clone();
        out.valuation.insert(atom.to_string(), set);
        Ok(out)
    }

    /// Same frame, different valuation.
    pub fn with_valuation(
        &self,
        valuation: BTreeMap<String, StateSet>,
    ) -> Result<KripkeModel, ModelError> {
        KripkeModel::new(self.names.clone(), self.relation.clone(), valuation)
    }

    /// The submodel on the states reachable from `root`, with `root` first.
    /// Returns the model and the original index of each new state.
    pub fn generated_submodel(&self, root: usize) -> (KripkeModel, Vec<usize>) {
        let mut order = vec![root];
        let mut seen = vec![false; self.len()];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            for &t in &self.succ[order[i]] {
                if !std::mem::replace(&mut seen[t], true) {
                    order.push(t);
                }
            }
            i += 1;
        }
        let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let m = order.len();
        let relation = Relation::from_pairs(
            m,
            order
                .iter()
                .flat_map(|&s| self.succ[s].iter().map(move |&t| (s, t)))
                .map(|(s, t)| (pos[&s], pos[&t])),
        );
        let valuation = self
            .valuation
            .iter()
            .map(|(p, set)| {
                let sub =
                    StateSet::from_indices(m, set.iter().filter_map(|s| pos.get(&s).copied()));
                (p.clone(), sub)
            })
            .collect();
        let names = order.iter().map(|&s| self.names[s].clone()).collect();
        let model = KripkeModel::new(names, relation, valuation).expect("submodel is well formed");
        (model, order)
    }
}

/// Frame classes of the six logics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FrameClass {
    K,
    T,
    KB,
    K4,
    S4,
    S5,
}

impl FrameClass {
    pub const ALL: [FrameClass; 6] = [
        FrameClass::K,
        FrameClass::T,
        FrameClass::KB,
        FrameClass::K4,
        FrameClass::S4,
        FrameClass::S5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::K => "K",
            FrameClass::T => "T",
            FrameClass::KB => "KB",
            FrameClass::K4 => "K4",
            FrameClass::S4 => "S4",
            FrameClass::S5 => "S5",
        }
    }

    pub fn reflexive(self) -> bool {
        matches!(self, FrameClass::T | FrameClass::S4 | FrameClass::S5)
    }

    pub fn symmetric(self) -> bool {
        matches!(self, FrameClass::KB | FrameClass::S5)
    }

    pub fn transitive(self) -> bool {
        matches!(self, FrameClass::K4 | FrameClass::S4 | FrameClass::S5)
    }

    pub fn check(self, model: &KripkeModel) -> Result<(), FrameViolation> {
        self.check_relation(model.relation())
    }

    pub fn check_relation(self, r: &Relation) -> Result<(), FrameViolation> {
        let n = r.size();
        if self.reflexive() {
            if let Some(s) = (0..n).find(|&s| !r.contains(s, s)) {
                return Err(FrameViolation::NotReflexive(s));
            }
        }
        if self.symmetric() {
            if let Some((s, t)) = r.pairs().find(|&(s, t)| !r.contains(t, s)) {
                return Err(FrameViolation::NotSymmetric(s, t));
            }
        }
        if self.transitive() {
            for (s, t) in r.pairs() {
                for u in 0..n {
                    if r.contains(t, u) && !r.contains(s, u) {
                        return Err(FrameViolation::NotTransitive(s, t, u));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(self, model: &KripkeModel) -> bool {
        self.check(model).is_ok()
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown frame class `{0}` (expected K, T, KB, K4, S4 or S5)")]
pub struct UnknownClass(pub String);

impl FromStr for FrameClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// A state, pair or triple witnessing that a relation misses a frame property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameViolation {
    NotReflexive(usize),
    NotSymmetric(usize, usize),
    NotTransitive(usize, usize, usize),
}

impl FrameViolation {
    pub fn describe(&self, model: &KripkeModel) -> String {
        match *self {
            FrameViolation::NotReflexive(s) => format!("not reflexive at ({})", model.name(s)),
            FrameViolation::NotSymmetric(s, t) => {
                format!("not symmetric at ({},{})", model.name(s), model.name(t))
            }
            FrameViolation::NotTransitive(s, t, u) => format!(
                "not transitive at ({},{},{})",
                model.name(s),
                model.name(t),
                model.name(u)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("model space of {required} candidates exceeds the budget of {budget}")]
pub struct BudgetExceeded {
    pub required: String,
    pub budget: u128,
}

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 24;

/// Number of labelled models with at most `max_states` states over `atoms`
/// atoms, before frame-class filtering; `None` on overflow.
pub fn model_space_size(max_states: usize, atoms: usize) -> Option<u128> {
    let mut total: u128 = 0;
    for n in 1..=max_states {
        let bits = n.checked_mul(n)?.checked_add(n.checked_mul(atoms)?)?;
        let count = 1u128.checked_shl(u32::try_from(bits).ok()?)?;
        if bits >= 128 {
            return None;
        }
        total = total.checked_add(count)?;
    }
    Some(total)
}

/// Exhaustive stream of all models with `1..=max_states` states in `class`.
///
/// Order: state count, then relation bitmap (bit `i*n+j` is the edge
/// `(s_i, s_j)`), then valuation bitmap (bit `k*n+i` puts state `s_i` in the
/// `k`-th atom).
pub fn enumerate_models(
    max_states: usize,
    atoms: &[String],
    class: FrameClass,
    budget: u128,
) -> Result<ModelStream, BudgetExceeded> {
    match model_space_size(max_states, atoms.len()) {
        Some(size) if size <= budget => {}
        other => {
            return Err(BudgetExceeded {
                required: other.map_or_else(|| "more than 2^128".to_string(), |s| s.to_string()),
                budget,
            })
        }
    }
    Ok(ModelStream {
        max_states,
        atoms: atoms.to_vec(),
        class,
        n: 1,
        relation: None,
        relation_bits: 0,
        valuation_bits: 0,
    })
}

pub struct ModelStream {
    max_states: usize,
    atoms: Vec<String>,
    class: FrameClass,
    n: usize,
    relation: Option<Relation>,
    relation_bits: u64,
    valuation_bits: u64,
}

impl ModelStream {
    /// Advance to the next relation in the class, starting at
    /// `relation_bits`.
    fn seek_relation(&mut self) -> bool {
        while self.n <= self.max_states {
            let limit = 1u64 << (self.n * self.n);
            while self.relation_bits < limit {
                let r = Relation::from_bitmap(self.n, self.relation_bits);
                if self.class.check_relation(&r).is_ok() {
                    self.relation = Some(r);
                    self.valuation_bits = 0;
                    return true;
                }
                self.relation_bits += 1;
            }
            self.n += 1;
            self.relation_bits = 0;
        }
        false
    }
}

impl Iterator for ModelStream {
    type Item = KripkeModel;

    fn next(&mut self) -> Option<KripkeModel> {
        if self.relation.is_none() && !self.seek_relation() {
            return None;
        }
        let n = self.n;
        let relation = self.relation.clone().unwrap();
        let bits = self.valuation_bits;
        let valuation = self
            .atoms
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let set =
                    StateSet::from_indices(n, (0..n).filter(|i| bits >> (k * n + i) & 1 == 1));
                (p.clone(), set)
            })
            .collect();
        self.valuation_bits += 1;
        if self.valuation_bits >= 1u64 << (n * self.atoms.len()) {
            self.relation = None;
            self.relation_bits += 1;
        }
        Some(KripkeModel::numbered(relation, valuation))
    }
}

/// Largest size at which transitive classes are sampled by rejection.
const REJECTION_LIMIT: usize = 5;

/// A random model with `1..=max_states` states in `class`.
///
/// For K, T and KB the relation is uniform among the class's relations of the
/// chosen size. K4 and S4 use rejection sampling up to five states and the
/// transitive closure of a uniform relation above that; S5 picks a random
/// block label per state. Valuations are uniform.
pub fn random_model<R: Rng>(
    rng: &mut R,
    max_states: usize,
    atoms: &[String],
    class: FrameClass,
) -> KripkeModel {
    let n = rng.random_range(1..=max_states.max(1));
    let relation = random_relation(rng, n, class);
    let valuation = atoms
        .iter()
        .map(|p| {
            let set = StateSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)));
            (p.clone(), set)
        })
        .collect();
    KripkeModel::numbered(relation, valuation)
}

fn uniform_relation<R: Rng>(rng: &mut R, n: usize) -> Relation {
    Relation::from_pairs(
        n,
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|_| rng.random_bool(0.5))
            .collect::<Vec<_>>(),
    )
}

fn random_relation<R: Rng>(rng: &mut R, n: usize, class: FrameClass) -> Relation {
    match class {
        FrameClass::K => uniform_relation(rng, n),
        FrameClass::T => uniform_relation(rng, n).reflexive_closure(),
        FrameClass::KB => {
            let mut r = Relation::empty(n);
            for i in 0..n {
                for j in i..n {
                    if rng.random_bool(0.5) {
                        r.insert(i, j);
                        r.insert(j, i);
                    }
                }
            }
            r
        }
        FrameClass::K4 | FrameClass::S4 => {
            let base = |rng: &mut R| {
                let r = uniform_relation(rng, n);
                if class == FrameClass::S4 {
                    r.reflexive_closure()
                } else {
                    r
                }
            };
            if n <= REJECTION_LIMIT {
                loop {
                    let r = base(rng);
                    if class.check_relation(&r).is_ok() {
                        return r;
                    }
                }
            }
            base(rng).transitive_closure()
        }
        FrameClass::S5 => {
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Relation::from_pairs(
                n,
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| labels[i] == labels[j])
                    .collect::<Vec<_>>(),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn chain(n: usize) -> KripkeModel {
        KripkeModel::numbered(
            Relation::from_pairs(n, (1..n).map(|i| (i - 1, i))),
            BTreeMap::new(),
        )
    }

    fn atoms(k: usize) -> Vec<String> {
        ["p", "q", "r"][..k].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn update_valuation_keeps_last() {
        let m = chain(2);
        let a = StateSet::from_indices(2, [0]);
        let b = StateSet::from_indices(2, [1]);
        let m2 = m
            .update_valuation("x", a)
            .unwrap()
            .update_valuation("x", b.clone())
            .unwrap();
        assert_eq!(m2.value("x"), Some(&b));
        let m3 = m2.update_valuation("x", b).unwrap();
        assert_eq!(m3, m2);
        assert!(m.update_valuation("x", StateSet::empty(3)).is_err());
    }

    #[test]
    fn reflexive_point_is_in_every_class() {
        let m = KripkeModel::numbered(Relation::from_pairs(1, [(0, 0)]), BTreeMap::new());
        for c in FrameClass::ALL {
            assert!(c.contains(&m), "{c}");
        }
    }

    #[test]
    fn chain_is_not_reflexive() {
        let m = chain(2);
        assert!(FrameClass::K.contains(&m));
        assert_eq!(
            FrameClass::T.check(&m),
            Err(FrameViolation::NotReflexive(0))
        );
    }

    #[test]
    fn two_cycle_is_symmetric_not_transitive() {
        let m = KripkeModel::numbered(Relation::from_pairs(2, [(0, 1), (1, 0)]), BTreeMap::new());
        assert!(FrameClass::KB.contains(&m));
        let err = FrameClass::K4.check(&m).unwrap_err();
        assert_eq!(err, FrameViolation::NotTransitive(0, 1, 0));
        assert_eq!(err.describe(&m), "not transitive at (s0,s1,s0)");
    }

    #[test]
    fn s5_is_reflexive_symmetric_transitive() {
        for m in enumerate_models(3, &[], FrameClass::K, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            let all = FrameClass::T.contains(&m)
                && FrameClass::KB.contains(&m)
                && FrameClass::K4.contains(&m);
            assert_eq!(FrameClass::S5.contains(&m), all);
        }
    }

    #[test]
    fn enumeration_counts() {
        let count = |n, a, c| {
            enumerate_models(n, &atoms(a), c, DEFAULT_ENUMERATION_BUDGET)
                .unwrap()
                .count()
        };
        assert_eq!(count(1, 1, FrameClass::K), 4);
        assert_eq!(count(1, 0, FrameClass::T), 1);
        assert_eq!(count(2, 0, FrameClass::K), 16 + 2);
        // 3 transitive relations... on 2 states there are 13 transitive relations
        assert_eq!(count(2, 0, FrameClass::K4), 2 + 13);
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let models: Vec<KripkeModel> =
            enumerate_models(2, &atoms(2), FrameClass::K, DEFAULT_ENUMERATION_BUDGET)
                .unwrap()
                .collect();
        let distinct: HashSet<_> = models
            .iter()
            .map(|m| (m.len(), m.relation().clone(), m.valuation().clone()))
            .collect();
        assert_eq!(distinct.len(), models.len());
        assert_eq!(models.len(), 2 * 4 + 16 * 16);
    }

    #[test]
    fn enumeration_refuses_large_spaces() {
        assert!(enumerate_models(6, &atoms(3), FrameClass::K, DEFAULT_ENUMERATION_BUDGET).is_err());
        assert!(enumerate_models(40, &atoms(3), FrameClass::K, u128::MAX).is_err());
    }

    #[test]
    fn random_models_lie_in_their_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for c in FrameClass::ALL {
            for _ in 0..50 {
                let m = random_model(&mut rng, 7, &atoms(2), c);
                assert!(c.contains(&m), "{c}");
                assert!((1..=7).contains(&m.len()));
            }
        }
    }

    #[test]
    fn generated_submodel_keeps_reachable_part() {
        let mut m = chain(3);
        m = m
            .update_valuation("p", StateSet::from_indices(3, [0, 2]))
            .unwrap();
        let (sub, map) = m.generated_submodel(1);
        assert_eq!(map, vec![1, 2]);
        assert_eq!(sub.names(), &["s1".to_string(), "s2".to_string()]);
        assert_eq!(sub.value("p"), Some(&StateSet::from_indices(2, [1])));
        assert!(sub.has_edge(0, 1));
    }
}
