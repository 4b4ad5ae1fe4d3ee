//! The completeness corpus labels, rederived by a separate model finder and
//! refuter that share nothing with the library's oracle beyond syntax.

use std::collections::{BTreeMap, BTreeSet};

use mucalc_core::canonical::{completeness_pipeline, Oracle, OracleConfig, PipelineOutcome};
use mucalc_core::formula::fl_closure;
use mucalc_core::{parse_formula, Formula, FrameClass};

const CORPUS: &str = include_str!("../../../corpus/formulas/completeness.tsv");

fn corpus() -> Vec<(String, bool, bool)> {
    CORPUS
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            (cols[0].to_string(), cols[1] == "SAT", cols[2] == "SAT")
        })
        .collect()
}

struct Frame {
    n: usize,
    succ: Vec<Vec<usize>>,
    val: BTreeMap<String, Vec<bool>>,
}

fn eval(f: &Formula, m: &Frame, env: &mut BTreeMap<String, Vec<bool>>) -> Vec<bool> {
    match f {
        Formula::Top => vec![true; m.n],
        Formula::Bottom => vec![false; m.n],
        Formula::Atom(p) => env
            .get(p)
            .or(m.val.get(p))
            .cloned()
            .unwrap_or(vec![false; m.n]),
        Formula::NegAtom(p) => m
            .val
            .get(p)
            .map_or(vec![true; m.n], |v| v.iter().map(|b| !b).collect()),
        Formula::Or(a, b) => {
            let (x, y) = (eval(a, m, env), eval(b, m, env));
            x.iter().zip(&y).map(|(a, b)| *a || *b).collect()
        }
        Formula::And(a, b) => {
            let (x, y) = (eval(a, m, env), eval(b, m, env));
            x.iter().zip(&y).map(|(a, b)| *a && *b).collect()
        }
        Formula::Diamond(a) => {
            let x = eval(a, m, env);
            (0..m.n).map(|s| m.succ[s].iter().any(|&t| x[t])).collect()
        }
        Formula::Box(a) => {
            let x = eval(a, m, env);
            (0..m.n).map(|s| m.succ[s].iter().all(|&t| x[t])).collect()
        }
        Formula::Mu(v, body) | Formula::Nu(v, body) => {
            let mut cur = vec![matches!(f, Formula::Nu(..)); m.n];
            loop {
                let saved = env.insert(v.clone(), cur.clone());
                let next = eval(body, m, env);
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
    }
}

/// Every model with up to `max` states, symmetric ones only if asked.
fn satisfiable_up_to(phi: &Formula, max: usize, symmetric: bool) -> bool {
    let atoms: Vec<String> = phi.free_vars().into_iter().collect();
    for n in 1..=max {
        for rel in 0u64..(1 << (n * n)) {
            let edge = |i: usize, j: usize| rel >> (i * n + j) & 1 == 1;
            if symmetric && (0..n).any(|i| (0..n).any(|j| edge(i, j) != edge(j, i))) {
                continue;
            }
            for bits in 0u64..(1 << (n * atoms.len())) {
                let m = Frame {
                    n,
                    succ: (0..n)
                        .map(|i| (0..n).filter(|&j| edge(i, j)).collect())
                        .collect(),
                    val: atoms
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            (
                                p.clone(),
                                (0..n).map(|i| bits >> (k * n + i) & 1 == 1).collect(),
                            )
                        })
                        .collect(),
                };
                if eval(phi, &m, &mut BTreeMap::new()).into_iter().any(|b| b) {
                    return true;
                }
            }
        }
    }
    false
}

/// Tableau with bounded unfolding. In symmetric frames every `[]d` at a
/// successor forces `d` back at its parent.
struct Tableau {
    symmetric: bool,
    unfold: usize,
}

impl Tableau {
    fn closes(&self, set: Vec<Formula>, worlds: usize) -> bool {
        self.branch(set, BTreeSet::new(), &BTreeMap::new(), worlds)
    }

    fn branch(
        &self,
        mut todo: Vec<Formula>,
        mut seen: BTreeSet<Formula>,
        unfolded: &BTreeMap<Formula, usize>,
        worlds: usize,
    ) -> bool {
        let mut unfolded = unfolded.clone();
        while let Some(f) = todo.pop() {
            let f = f.canonical();
            if seen.contains(&f) {
                continue;
            }
            if f == Formula::Bottom || seen.contains(&f.negate().canonical()) {
                return true;
            }
            match &f {
                Formula::And(a, b) => {
                    todo.push((**a).clone());
                    todo.push((**b).clone());
                    continue;
                }
                Formula::Or(a, b) => {
                    let mut left = todo.clone();
                    left.push((**a).clone());
                    let mut right = todo;
                    right.push((**b).clone());
                    return self.branch(left, seen.clone(), &unfolded, worlds)
                        && self.branch(right, seen, &unfolded, worlds);
                }
                Formula::Mu(..) | Formula::Nu(..) => {
                    let k = unfolded.entry(f.clone()).or_insert(0);
                    if *k < self.unfold {
                        *k += 1;
                        todo.push(f.unfold().unwrap());
                    }
                }
                _ => {}
            }
            seen.insert(f);
        }
        if worlds == 0 {
            return false;
        }
        let boxes: Vec<Formula> = seen
            .iter()
            .filter_map(|f| {
                if let Formula::Box(a) = f {
                    Some((**a).clone())
                } else {
                    None
                }
            })
            .collect();
        let parent: Vec<Formula> = seen.iter().cloned().collect();
        seen.iter().any(|f| {
            let Formula::Diamond(g) = f else { return false };
            let mut child = boxes.clone();
            child.push((**g).clone());
            self.child_closes(child, &parent, worlds - 1)
        })
    }

    /// Like `branch`, but in symmetric frames each open saturation of the
    /// child is also closed when one of its boxes contradicts the parent.
    fn child_closes(&self, start: Vec<Formula>, parent: &[Formula], worlds: usize) -> bool {
        if !self.symmetric {
            return self.closes(start, worlds);
        }
        self.saturations(start).into_iter().all(|sat| match sat {
            None => true,
            Some(set) => {
                let back = set.iter().any(|f| {
                    let Formula::Box(d) = f else { return false };
                    let mut p = parent.to_vec();
                    p.push((**d).clone());
                    self.closes(p, worlds)
                });
                back || self.branch(
                    set.into_iter().collect(),
                    BTreeSet::new(),
                    &BTreeMap::new(),
                    worlds,
                )
            }
        })
    }

    /// Propositional saturations, each fixpoint unfolded once; `None` marks a
    /// closed one.
    fn saturations(&self, start: Vec<Formula>) -> Vec<Option<BTreeSet<Formula>>> {
        let mut out = Vec::new();
        let mut stack = vec![(start, BTreeSet::new())];
        while let Some((mut todo, mut seen)) = stack.pop() {
            let mut closed = false;
            while let Some(f) = todo.pop() {
                let f = f.canonical();
                if seen.contains(&f) {
                    continue;
                }
                if f == Formula::Bottom || seen.contains(&f.negate().canonical()) {
                    closed = true;
                    break;
                }
                match &f {
                    Formula::And(a, b) => {
                        todo.push((**a).clone());
                        todo.push((**b).clone());
                        continue;
                    }
                    Formula::Or(a, b) => {
                        let mut right = todo.clone();
                        right.push((**b).clone());
                        stack.push((right, seen.clone()));
                        todo.push((**a).clone());
                        continue;
                    }
                    Formula::Mu(..) | Formula::Nu(..) => todo.push(f.unfold().unwrap()),
                    _ => {}
                }
                seen.insert(f);
            }
            out.push(if closed { None } else { Some(seen) });
        }
        out
    }
}

fn depth(f: &Formula) -> usize {
    match f {
        Formula::Diamond(a) | Formula::Box(a) => 1 + depth(a),
        _ => f.children().into_iter().map(depth).max().unwrap_or(0),
    }
}

fn label(phi: &Formula, class: FrameClass) -> &'static str {
    let symmetric = class == FrameClass::KB;
    if satisfiable_up_to(phi, 3, symmetric) {
        return "SAT";
    }
    let t = Tableau {
        symmetric,
        unfold: 2,
    };
    if t.closes(vec![phi.clone()], 3 * depth(phi) + 1) {
        return "UNSAT";
    }
    // small-model property: 2^|Cl| states suffice
    let bound = 1usize << fl_closure([phi], false).len();
    if bound <= 4 && !satisfiable_up_to(phi, bound, symmetric) {
        return "UNSAT";
    }
    "UNDETERMINED"
}

#[test]
fn corpus_has_twenty_formulas_with_both_verdicts() {
    let c = corpus();
    assert_eq!(c.len(), 20);
    for column in [
        |r: &(String, bool, bool)| r.1,
        |r: &(String, bool, bool)| r.2,
    ] {
        assert!(c.iter().any(column) && !c.iter().all(column));
    }
}

#[test]
fn labels_match_independent_oracle() {
    for (text, k, kb) in corpus() {
        let phi = parse_formula(&text).unwrap();
        let want = |b: bool| if b { "SAT" } else { "UNSAT" };
        assert_eq!(label(&phi, FrameClass::K), want(k), "{text} in K");
        assert_eq!(label(&phi, FrameClass::KB), want(kb), "{text} in KB");
    }
}

#[test]
fn pipeline_agrees_with_labels() {
    let oracle = Oracle::new(OracleConfig::default()).with_cache(None);
    for (text, k, kb) in corpus() {
        let phi = parse_formula(&text).unwrap();
        for (class, sat) in [(FrameClass::K, k), (FrameClass::KB, kb)] {
            match completeness_pipeline(&phi, class, &oracle).unwrap() {
                PipelineOutcome::Model { model, state } => {
                    assert!(sat, "{text} in {class:?}: unexpected model");
                    assert!(class.contains(&model));
                    assert!(mucalc_core::semantics::satisfies(&model, state, &phi).unwrap());
                }
                PipelineOutcome::Inconsistent => {
                    assert!(!sat, "{text} in {class:?}: unexpected INCONSISTENT")
                }
                PipelineOutcome::Unknown(r) => panic!("{text} in {class:?}: UNKNOWN ({r})"),
            }
        }
    }
}
