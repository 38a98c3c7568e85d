//! Kripke models over polyadic vocabularies.

mod encode;
mod random;
mod text;
mod tuples;
mod worlds;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::term::{RelationSymbol, TermError, Vocabulary};

pub use encode::{encode_list, EncodedModel};
pub use random::{random_model, random_sparse_model};
pub use tuples::{all_tuples, Tuple, TupleSet};
pub use worlds::WorldSet;

pub type World = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: tuple of length {found} for `{symbol}` of arity {expected}")]
    TupleArity { line: usize, symbol: String, expected: usize, found: usize },
    #[error("line {line}, column {column}: world {world} out of range for {worlds} worlds")]
    WorldOutOfRange { line: usize, column: usize, world: u64, worlds: usize },
    #[error("relation `{0}` declared twice")]
    DuplicateRelation(String),
    #[error("proposition `{0}` declared twice")]
    DuplicateProp(String),
    #[error("relation symbol `{0}` is not interpreted in the model")]
    UnknownSymbol(String),
    #[error("relation `{name}` has arity {found} in the model but {expected} in the formula")]
    SymbolArity { name: String, expected: usize, found: usize },
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A finite Kripke model: worlds `0..world_count`, one tuple set per relation
/// symbol and a valuation of propositions. Propositions without an entry are
/// false everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    world_count: usize,
    vocab: Vocabulary,
    relations: Vec<TupleSet>,
    valuation: BTreeMap<String, WorldSet>,
}

impl KripkeModel {
    /// A model with every relation empty and every proposition false.
    pub fn new(world_count: usize, vocab: Vocabulary) -> Result<Self, ModelError> {
        if world_count == 0 {
            return Err(ModelError::NoWorlds);
        }
        let relations = vocab.iter().map(|s| TupleSet::empty(s.arity())).collect();
        Ok(Self { world_count, vocab, relations, valuation: BTreeMap::new() })
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        text::parse_model(text)
    }

    pub fn render(&self) -> String {
        text::render_model(self)
    }

    pub fn world_count(&self) -> usize {
        self.world_count
    }

    pub fn worlds(&self) -> impl Iterator<Item = World> {
        0..self.world_count as World
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// The interpretation of `symbol`; the name and arity must match.
    pub fn relation(&self, symbol: &RelationSymbol) -> Result<&TupleSet, ModelError> {
        let i = self.index_of(symbol)?;
        Ok(&self.relations[i])
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&TupleSet> {
        self.vocab.position(name).map(|i| &self.relations[i])
    }

    fn index_of(&self, symbol: &RelationSymbol) -> Result<usize, ModelError> {
        let i =
            self.vocab.position(symbol.name()).ok_or_else(|| ModelError::UnknownSymbol(symbol.name().to_string()))?;
        let found = self.vocab.iter().nth(i).unwrap().arity();
        if found != symbol.arity() {
            return Err(ModelError::SymbolArity { name: symbol.name().to_string(), expected: symbol.arity(), found });
        }
        Ok(i)
    }

    pub fn set_relation(&mut self, symbol: &RelationSymbol, tuples: TupleSet) -> Result<(), ModelError> {
        let i = self.index_of(symbol)?;
        if tuples.arity() != symbol.arity() {
            return Err(ModelError::SymbolArity {
                name: symbol.name().to_string(),
                expected: symbol.arity(),
                found: tuples.arity(),
            });
        }
        if let Some(t) = tuples.iter().find(|t| t.iter().any(|&w| w as usize >= self.world_count)) {
            let world = *t.iter().max().unwrap() as u64;
            return Err(ModelError::WorldOutOfRange { line: 0, column: 0, world, worlds: self.world_count });
        }
        self.relations[i] = tuples;
        Ok(())
    }

    pub fn add_tuple(&mut self, symbol: &RelationSymbol, tuple: Tuple) -> Result<bool, ModelError> {
        let i = self.index_of(symbol)?;
        if tuple.len() != symbol.arity() {
            return Err(ModelError::TupleArity {
                line: 0,
                symbol: symbol.name().to_string(),
                expected: symbol.arity(),
                found: tuple.len(),
            });
        }
        if let Some(&w) = tuple.iter().find(|&&w| w as usize >= self.world_count) {
            return Err(ModelError::WorldOutOfRange { line: 0, column: 0, world: w as u64, worlds: self.world_count });
        }
        Ok(self.relations[i].insert(tuple))
    }

    pub fn set_prop(&mut self, name: impl Into<String>, worlds: WorldSet) {
        assert_eq!(worlds.capacity(), self.world_count, "world set sized for another model");
        self.valuation.insert(name.into(), worlds);
    }

    /// Truth set of a proposition; empty when the model does not mention it.
    pub fn prop(&self, name: &str) -> WorldSet {
        self.valuation.get(name).cloned().unwrap_or_else(|| WorldSet::empty(self.world_count))
    }

    pub fn props(&self) -> impl Iterator<Item = (&str, &WorldSet)> {
        self.valuation.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn relations(&self) -> impl Iterator<Item = (&RelationSymbol, &TupleSet)> {
        self.vocab.iter().zip(&self.relations)
    }

    /// The same model over `vocab`: shared symbols keep their tuples, new ones
    /// are empty and symbols outside `vocab` are dropped.
    pub fn over_vocabulary(&self, vocab: &Vocabulary) -> Result<Self, ModelError> {
        let mut out = Self::new(self.world_count, vocab.clone())?;
        for symbol in vocab {
            if self.vocab.position(symbol.name()).is_some() {
                out.set_relation(symbol, self.relation(symbol)?.clone())?;
            }
        }
        out.valuation = self.valuation.clone();
        Ok(out)
    }
}
