//! Polyadic Boolean modal logic: relation terms, tables, Kripke models, model
//! checking, bounded satisfiability search and two satisfiability-preserving
//! reductions into polyadic modal logic with the global diamond.

pub mod check;
pub mod formula;
pub mod model;
pub mod reduce_neg;
pub mod reduce_tables;
pub mod sat;
pub mod term;
