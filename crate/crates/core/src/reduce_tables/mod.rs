//! Reduction from polyadic modal logic with permutations, negation and
//! intersection on relations to polyadic modal logic with the global diamond
//! over one relation symbol per table.
//!
//! [`table_normal_form`] rewrites every modality term into a single table,
//! [`reduce_tables`] translates tables into symbols and adds the axioms `ξ₁`,
//! `ξ₂`, `ξ₃`, and [`forward_model_tbl`] / [`backward_model_tbl`] carry models
//! across.

mod construct;
mod normal_form;
mod theta;

use std::collections::HashMap;

use thiserror::Error;

use crate::check::CheckError;
use crate::formula::{eliminate_window, Formula, FormulaError};
use crate::model::{ModelError, Tuple, World};
use crate::term::{enumerate_tables, RelationSymbol, Table, TermError, Vocabulary};

pub use construct::{
    backward_model_tbl, forward_model_tbl, layered_world, with_fresh_props, LayerMode, TableBackward, TransferReport,
};
pub use normal_form::{is_table_shaped, table_normal_form, StarForm};
pub use theta::xi1_conjunct_count;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("the vocabulary has no binary symbol")]
    NoBinarySymbol,
    #[error("the vocabulary has {found} symbols; at most {cap} are supported")]
    TooManySymbols { found: usize, cap: usize },
    #[error("`{0}` is not in the vocabulary")]
    UnknownSymbol(String),
    #[error("ξ₁ would have {conjuncts} conjuncts, above the cap of {cap}")]
    Xi1TooLarge { conjuncts: u128, cap: u64 },
    #[error("the formula does not hold at world {0} of the given model")]
    Precondition(World),
    #[error("no table satisfies the completion conditions for tuple {0:?}")]
    MainLemma(Tuple),
    #[error("tuple {tuple:?} is assigned both table {first} and table {second}")]
    Claim { tuple: Tuple, first: usize, second: usize },
    #[error("no table of the base tuple of {0:?} is fixed by its stabilizer")]
    Stabilizer(Tuple),
    #[error("depth bound {given} is below the required {needed}")]
    DepthBound { needed: usize, given: usize },
    #[error("{given} layers are fewer than the required {needed}")]
    LayerCount { needed: usize, given: usize },
    #[error("the layered model would have {0} worlds")]
    TooLarge(u128),
    #[error("construction check failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Resource caps for the reduction.
#[derive(Clone, Debug)]
pub struct TableConfig {
    pub max_symbols: usize,
    pub max_xi1_conjuncts: u64,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { max_symbols: 2, max_xi1_conjuncts: 1 << 20 }
    }
}

/// All tables of one arity and their symbols in the table vocabulary.
#[derive(Clone, Debug)]
pub struct TableFamily {
    pub arity: usize,
    /// In canonical order, so `tables[i].index() == i + 1`.
    pub tables: Vec<Table>,
    pub symbols: Vec<RelationSymbol>,
}

impl TableFamily {
    pub fn symbol(&self, rho: &Table) -> &RelationSymbol {
        &self.symbols[rho.index() - 1]
    }
}

/// The tables over a vocabulary, grouped by the arities its symbols use.
#[derive(Clone, Debug)]
pub struct TableVocabulary {
    pub families: Vec<TableFamily>,
    pub vocab: Vocabulary,
    by_name: HashMap<String, (usize, usize)>,
}

impl TableVocabulary {
    pub fn new(source: &Vocabulary) -> Result<Self, TableError> {
        let mut prefix = String::from("TAB");
        while source.iter().any(|s| s.name().starts_with(&prefix)) {
            prefix.push('X');
        }
        let mut families = Vec::new();
        let mut by_name = HashMap::new();
        let mut symbols_all = Vec::new();
        for k in source.arities() {
            let tables = enumerate_tables(source, k)?;
            let symbols: Vec<RelationSymbol> = tables
                .iter()
                .map(|t| RelationSymbol::new(format!("{prefix}{k}_{}", t.index()), k))
                .collect::<Result<_, _>>()?;
            for (i, s) in symbols.iter().enumerate() {
                by_name.insert(s.name().to_string(), (families.len(), i));
            }
            symbols_all.extend(symbols.iter().cloned());
            families.push(TableFamily { arity: k, tables, symbols });
        }
        Ok(Self { families, vocab: Vocabulary::new(symbols_all)?, by_name })
    }

    pub fn family(&self, arity: usize) -> Option<&TableFamily> {
        self.families.iter().find(|f| f.arity == arity)
    }

    pub fn symbol(&self, rho: &Table) -> Option<&RelationSymbol> {
        self.family(rho.arity()).map(|f| f.symbol(rho))
    }

    pub fn table(&self, symbol_name: &str) -> Option<&Table> {
        self.by_name.get(symbol_name).map(|&(f, i)| &self.families[f].tables[i])
    }

    pub fn max_arity(&self) -> usize {
        self.families.iter().map(|f| f.arity).max().unwrap_or(0)
    }

    /// The largest table index over all arities.
    pub fn max_index(&self) -> usize {
        self.families.iter().map(|f| f.tables.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct TableReduction {
    /// The input with window operators eliminated.
    pub source: Formula,
    pub star: StarForm,
    pub source_vocab: Vocabulary,
    pub tables: TableVocabulary,
    /// `t(φ*)`.
    pub translated: Formula,
    /// The desugared subformulas of `t(φ*)` that the axioms range over.
    pub subformulas: Vec<Formula>,
    pub xi1: Formula,
    pub xi2: Formula,
    pub xi3: Formula,
    pub theta: Formula,
    /// Maximum arity `m`.
    pub max_arity: usize,
}

impl TableReduction {
    /// `t(ψ)` for a formula whose modality terms are tables.
    pub fn translate(&self, psi: &Formula) -> Result<Formula, TableError> {
        theta::translate(psi, &self.source_vocab, &self.tables, &mut HashMap::new())
    }
}

/// Builds `φ*` and `Θ = t(φ*) ∧ ξ₁ ∧ ξ₂ ∧ ξ₃`. Without a vocabulary the
/// symbols of `phi` are used.
pub fn reduce_tables(
    phi: &Formula,
    vocab: Option<&Vocabulary>,
    config: &TableConfig,
) -> Result<TableReduction, TableError> {
    let star = table_normal_form(phi, vocab, config)?;
    theta::build(eliminate_window(phi), star, config)
}
