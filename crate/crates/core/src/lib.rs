//! Relational first-order logic with second-order predicate quantifiers:
//! syntax, fragment classifiers, formula constructions and bounded
//! finite-model checking.

pub mod classify;
pub mod corpus;
pub mod formula;
pub mod gallery;
pub mod laws;
pub mod rewrite;
pub mod semantics;
pub mod structure;
pub mod suite;
pub mod syntax;
pub mod transform;

pub use classify::{
    classify_all, classify_one, ff_level, fl_level, fragment_membership, is_member,
    ClassificationReport, ClassifyError, FragmentId, LevelSet, MembershipResult, Verdict,
};
pub use formula::{x, Formula, FormulaError, SelfGuard, Signature, Var};
pub use gallery::{paper_formula, GalleryItem, UnknownId};
pub use rewrite::{
    cleanify, rename_free_vars, rename_predicates, substitute_atoms, FreshNamePool,
    PredicateRenaming, Replacement, Substitution, VariableRenaming,
};
pub use semantics::{
    entails_upto, equiv_upto, eval, sandwich_check, Budget, CheckOutcome, SandwichReport,
    SemanticsError,
};
pub use structure::{Assignment, Structure, StructureError};
pub use suite::{verify_paper, SuiteConfig, SuiteReport};
pub use syntax::{parse, print, ParseError};
pub use transform::{Sandwich, TransformError};
