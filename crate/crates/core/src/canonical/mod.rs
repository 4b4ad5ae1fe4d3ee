//! Finitary canonical models over a negation-closed closure set, built on
//! a semantic consistency oracle.

mod eliminate;
mod model;
mod oracle;
mod refuter;
mod sigma;

pub use model::{
    atom_candidates, build_canonical, completeness_pipeline, distinctness_check, enumerate_atoms,
    existence_check, name_expansion, sigma_of, sigma_table, truth_lemma_check, CanonicalError,
    CanonicalModel, LemmaReport, PipelineOutcome, SigmaAtom, UnknownPolicy,
};
pub use oracle::{sat_search, Oracle, OracleConfig, OracleVerdict, CACHE_ENV};
pub use refuter::Refuter;
pub use sigma::{SigmaError, SigmaTable, TypeSet};
