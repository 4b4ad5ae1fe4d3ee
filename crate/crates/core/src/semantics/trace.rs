use std::collections::VecDeque;

use serde::Serialize;

use crate::formula::{FixKind, Formula, IndexError, SubformulaIndex};

/// Trace properties of plays, checked on the closure graph of a clean formula
/// (arena moves with states forgotten).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    /// No cycle unfolds both a μ- and a ν-variable.
    pub single_type_cycles: bool,
    /// Paths from a binder to a binder of the other kind pass a free
    /// subformula.
    pub binder_paths_guarded: bool,
    /// Paths from a μ-binder to a box pass a free subformula.
    pub box_paths_guarded: bool,
    /// Each violation as a list of printed nodes.
    pub witnesses: Vec<TraceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceWitness {
    pub property: u8,
    pub path: Vec<String>,
}

impl TraceReport {
    pub fn holds(&self) -> bool {
        self.single_type_cycles && self.binder_paths_guarded && self.box_paths_guarded
    }
}

fn graph(index: &SubformulaIndex) -> Vec<Vec<usize>> {
    (0..index.len())
        .map(|v| match index.node(v) {
            Formula::Atom(x) if index.is_bound_var(x) => vec![index.binder(x).unwrap().body_node],
            Formula::Atom(_) | Formula::NegAtom(_) => Vec::new(),
            _ => index.children(v).to_vec(),
        })
        .collect()
}

pub fn trace_property_check(xi: &Formula) -> Result<TraceReport, IndexError> {
    let index = SubformulaIndex::new(xi)?;
    let succ = graph(&index);
    let n = index.len();
    let mut witnesses = Vec::new();

    // (1) strongly connected components mixing variable kinds
    let comp = scc(&succ);
    let mut single_type_cycles = true;
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    for c in 0..count {
        let members: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
        let kinds: Vec<(FixKind, usize)> = members
            .iter()
            .filter_map(|&v| match index.node(v) {
                Formula::Atom(x) => index.binder(x).map(|b| (b.kind, v)),
                _ => None,
            })
            .collect();
        let mu = kinds.iter().find(|(k, _)| *k == FixKind::Mu);
        let nu = kinds.iter().find(|(k, _)| *k == FixKind::Nu);
        if let (Some(&(_, a)), Some(&(_, b))) = (mu, nu) {
            single_type_cycles = false;
            let mut path = shortest_path(&succ, a, |v| v == b, |_| false).unwrap_or_default();
            path.extend(
                shortest_path(&succ, b, |v| v == a, |_| false)
                    .unwrap_or_default()
                    .into_iter()
                    .skip(1),
            );
            witnesses.push(TraceWitness {
                property: 1,
                path: path.iter().map(|&v| index.node(v).to_string()).collect(),
            });
        }
    }

    // (2) and (3): searches that stop at free subformulas
    let free: Vec<bool> = (0..n).map(|v| index.is_free_subformula(v)).collect();
    let mut binder_paths_guarded = true;
    let mut box_paths_guarded = true;
    for b in index.binders() {
        let start = b.binder_node;
        let other = b.kind.dual();
        let is_other_binder =
            |v: usize| matches!(index.node(v).as_fixpoint(), Some((k, _, _)) if k == other);
        if let Some(path) = shortest_path(
            &succ,
            start,
            |v| is_other_binder(v) && !free[v],
            |v| free[v],
        ) {
            binder_paths_guarded = false;
            witnesses.push(TraceWitness {
                property: 2,
                path: path.iter().map(|&v| index.node(v).to_string()).collect(),
            });
        }
        if b.kind == FixKind::Mu {
            let is_box = |v: usize| matches!(index.node(v), Formula::Box(_));
            if let Some(path) = shortest_path(&succ, start, |v| is_box(v) && !free[v], |v| free[v])
            {
                box_paths_guarded = false;
                witnesses.push(TraceWitness {
                    property: 3,
                    path: path.iter().map(|&v| index.node(v).to_string()).collect(),
                });
            }
        }
    }
    Ok(TraceReport {
        single_type_cycles,
        binder_paths_guarded,
        box_paths_guarded,
        witnesses,
    })
}

/// Shortest path of length ≥ 1 from `start` to a node satisfying `goal`,
/// never expanding nodes that satisfy `block` (other than `start`).
fn shortest_path(
    succ: &[Vec<usize>],
    start: usize,
    goal: impl Fn(usize) -> bool,
    block: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; succ.len()];
    let mut seen = vec![false; succ.len()];
    let mut queue = VecDeque::new();
    for &w in &succ[start] {
        if !seen[w] {
            seen[w] = true;
            parent[w] = start;
            queue.push_back(w);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
                if path.len() > succ.len() + 1 {
                    break;
                }
            }
            path.reverse();
            return Some(path);
        }
        if block(v) {
            continue;
        }
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Tarjan's algorithm; returns a component number per node.
fn scc(succ: &[Vec<usize>]) -> Vec<usize> {
    struct State<'a> {
        succ: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        comp: Vec<usize>,
        comps: usize,
    }
    fn visit(st: &mut State, v: usize) {
        st.index[v] = Some(st.next);
        st.low[v] = st.next;
        st.next += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for i in 0..st.succ[v].len() {
            let w = st.succ[v][i];
            match st.index[w] {
                None => {
                    visit(st, w);
                    st.low[v] = st.low[v].min(st.low[w]);
                }
                Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                _ => {}
            }
        }
        if Some(st.low[v]) == st.index[v] {
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w] = false;
                st.comp[w] = st.comps;
                if w == v {
                    break;
                }
            }
            st.comps += 1;
        }
    }
    let n = succ.len();
    let mut st = State {
        succ,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        comp: vec![0; n],
        comps: 0,
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn check(s: &str) -> TraceReport {
        trace_property_check(&parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn reachability_satisfies_all() {
        assert!(check("mu x.(p | <>x)").holds());
    }

    #[test]
    fn clean_conjunction_satisfies_all() {
        let r = check("mu x.(p | <>x) & nu y.(q & []y)");
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn nested_free_nu_is_guarded() {
        assert!(check("mu x. <>x | nu y. []y").holds());
    }

    #[test]
    fn box_under_mu_fails_property_three() {
        let r = check("mu x.[]x");
        assert!(!r.box_paths_guarded);
        assert!(r.single_type_cycles);
        assert_eq!(r.witnesses[0].property, 3);
        assert_eq!(
            r.witnesses[0].path,
            vec!["mu x. []x".to_string(), "[]x".to_string()]
        );
    }

    #[test]
    fn alternation_fails_property_one() {
        let r = check("nu y. mu x. (<>x | []y)");
        assert!(!r.single_type_cycles);
        assert!(!r.binder_paths_guarded);
    }
}
