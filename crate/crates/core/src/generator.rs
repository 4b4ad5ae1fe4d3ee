//! Seeded generation of clean continuous μ-calculus formulas.
//!
//! Formulas are built directly from the fragment grammars: a μ-body is
//! generated in continuous mode for the enclosing variables, a ν-body in
//! cocontinuous mode, and switching mode only happens through a subformula
//! that mentions none of the variables in scope.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Deserialize;

use crate::formula::{FixKind, Formula};

#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct GeneratorConfig {
    pub max_depth: usize,
    pub atoms: Vec<String>,
    pub bound_names: Vec<String>,
    pub leaf_bias: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        toml::from_str(include_str!("generator.toml")).expect("embedded generator config parses")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Free,
    Fixpoint(FixKind),
}

pub struct FormulaGenerator {
    config: GeneratorConfig,
}

impl Default for FormulaGenerator {
    fn default() -> Self {
        FormulaGenerator::new(GeneratorConfig::default())
    }
}

impl FormulaGenerator {
    pub fn new(config: GeneratorConfig) -> Self {
        FormulaGenerator { config }
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// A clean μc-ML formula whose free names are configured atoms.
    pub fn formula<R: Rng>(&self, rng: &mut R) -> Formula {
        let mut names = self.config.bound_names.clone();
        names.reverse();
        self.gen(rng, self.config.max_depth, Mode::Free, &[], &mut names)
    }

    /// A clean formula in `Con_{x}` (`FixKind::Mu`) or `Cocon_{x}`
    /// (`FixKind::Nu`) with `x` free. `x` must not be a configured bound name.
    pub fn formula_in<R: Rng>(&self, rng: &mut R, kind: FixKind, x: &str) -> Formula {
        let mut names = self.config.bound_names.clone();
        names.reverse();
        let scope = [x.to_string()];
        self.gen(
            rng,
            self.config.max_depth,
            Mode::Fixpoint(kind),
            &scope,
            &mut names,
        )
    }

    fn leaf<R: Rng>(&self, rng: &mut R, scope: &[String]) -> Formula {
        if !scope.is_empty() && rng.random_bool(0.5) {
            return Formula::Atom(scope.choose(rng).unwrap().clone());
        }
        match rng.random_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            k => {
                let p = self.config.atoms.choose(rng).unwrap().clone();
                if k % 2 == 0 {
                    Formula::Atom(p)
                } else {
                    Formula::NegAtom(p)
                }
            }
        }
    }

    fn gen<R: Rng>(
        &self,
        rng: &mut R,
        depth: usize,
        mode: Mode,
        scope: &[String],
        names: &mut Vec<String>,
    ) -> Formula {
        if depth == 0 || rng.random_bool(self.config.leaf_bias) {
            return self.leaf(rng, scope);
        }
        let d = depth - 1;
        let choice = rng.random_range(0..7);
        match (choice, mode) {
            (0, _) => Formula::or(
                self.gen(rng, d, mode, scope, names),
                self.gen(rng, d, mode, scope, names),
            ),
            (1, _) => Formula::and(
                self.gen(rng, d, mode, scope, names),
                self.gen(rng, d, mode, scope, names),
            ),
            (2, Mode::Free | Mode::Fixpoint(FixKind::Mu)) => {
                Formula::diamond(self.gen(rng, d, mode, scope, names))
            }
            (2, Mode::Fixpoint(FixKind::Nu)) => {
                Formula::boxed(self.gen(rng, d, mode, scope, names))
            }
            (3, Mode::Free) => {
                if rng.random_bool(0.5) {
                    Formula::diamond(self.gen(rng, d, mode, scope, names))
                } else {
                    Formula::boxed(self.gen(rng, d, mode, scope, names))
                }
            }
            (3 | 4, _) => {
                let Some(x) = names.pop() else {
                    return self.leaf(rng, scope);
                };
                let kind = match mode {
                    Mode::Fixpoint(k) => k,
                    Mode::Free => {
                        if rng.random_bool(0.5) {
                            FixKind::Mu
                        } else {
                            FixKind::Nu
                        }
                    }
                };
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                let body = self.gen(rng, d, Mode::Fixpoint(kind), &inner, names);
                Formula::fixpoint(kind, x, body)
            }
            (5, Mode::Fixpoint(_)) => {
                // a subformula free of every variable in scope
                self.gen(rng, d, Mode::Free, &[], names)
            }
            _ => self.leaf(rng, scope),
        }
    }
}
