//! The continuous modal μ-calculus at desk scale: syntax, Kripke models,
//! algebraic and game semantics, filtrations, a Hilbert-style proof checker
//! and finitary canonical models.

pub mod canonical;
pub mod filtration;
pub mod formula;
pub mod generator;
pub mod kripke;
pub mod model_io;
pub mod proof;
pub mod selftest;
pub mod semantics;
pub mod syntax;

pub use formula::{FixKind, Formula};
pub use kripke::{FrameClass, KripkeModel, StateSet};
pub use syntax::{parse_formula, print_formula, ParseError, SourceSpan};
