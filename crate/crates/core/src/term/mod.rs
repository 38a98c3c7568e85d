//! Relation-valued terms over the operators `p`, `s`, `¬`, `∩`, `\` and `∪`.
//!
//! A term denotes a set of world tuples in a Kripke model. The permutation
//! operators rearrange tuple positions, the Boolean operators act on tuple sets
//! of one fixed arity.

mod normalize;
mod perm;
mod table;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{KripkeModel, ModelError, TupleSet};

pub use normalize::{normalize_term, to_literal_form, NormalizedTerm};
pub use perm::{generator_word, word_to_string, Generator, Permutation};
pub use table::{enumerate_tables, table_action, table_entails, table_of_tuple, Literal, Table};

/// Reserved names that cannot be used as relation symbols since the formula
/// syntax uses them for the global modalities.
pub const RESERVED_SYMBOLS: [&str; 2] = ["E", "A"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("relation symbol `{name}` has arity {arity}; arity must be at least 2")]
    ArityTooSmall { name: String, arity: usize },
    #[error("relation symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("`{0}` is reserved and cannot name a relation symbol")]
    ReservedSymbol(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("operands of arity {left} and {right} cannot be combined")]
    ArityMismatch { left: usize, right: usize },
    #[error("permutation of size {0} is not defined; size must be at least 2")]
    PermutationTooSmall(usize),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("term `{0}` is not a Boolean combination of literals")]
    NotLiteralCombination(String),
    #[error("table of arity {table} cannot be combined with arity {other}")]
    TableArity { table: usize, other: usize },
}

/// A relation symbol with a fixed arity of at least two.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    name: Arc<str>,
    arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Result<Self, TermError> {
        let name = name.into();
        if arity < 2 {
            return Err(TermError::ArityTooSmall { name: name.to_string(), arity });
        }
        Ok(Self { name, arity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Debug for RelationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for RelationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// An ordered set of relation symbols with unique names.
///
/// Declaration order is kept: it fixes the relation order of the list encoding
/// and of rendered model files.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: Vec<RelationSymbol>,
}

impl Vocabulary {
    pub fn new(symbols: impl IntoIterator<Item = RelationSymbol>) -> Result<Self, TermError> {
        let mut vocab = Self::default();
        for symbol in symbols {
            vocab.push(symbol)?;
        }
        Ok(vocab)
    }

    /// Parses `R/2,S/3` style declarations.
    pub fn parse(spec: &str) -> Result<Self, TermError> {
        let mut vocab = Self::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, arity) = item.split_once('/').ok_or_else(|| TermError::UnknownSymbol(item.to_string()))?;
            let arity = arity.trim().parse::<usize>().map_err(|_| TermError::UnknownSymbol(item.to_string()))?;
            vocab.push(RelationSymbol::new(name.trim(), arity)?)?;
        }
        Ok(vocab)
    }

    pub fn push(&mut self, symbol: RelationSymbol) -> Result<(), TermError> {
        if RESERVED_SYMBOLS.contains(&symbol.name()) {
            return Err(TermError::ReservedSymbol(symbol.name().to_string()));
        }
        if self.get(symbol.name()).is_some() {
            return Err(TermError::DuplicateSymbol(symbol.name().to_string()));
        }
        self.symbols.push(symbol);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&RelationSymbol> {
        self.symbols.iter().find(|s| s.name() == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name() == name)
    }

    pub fn contains(&self, symbol: &RelationSymbol) -> bool {
        self.get(symbol.name()) == Some(symbol)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RelationSymbol> {
        self.symbols.iter()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The symbols of arity `k`, sorted by name.
    pub fn of_arity(&self, k: usize) -> Vec<RelationSymbol> {
        let mut out: Vec<_> = self.symbols.iter().filter(|s| s.arity() == k).cloned().collect();
        out.sort();
        out
    }

    /// The distinct arities in ascending order.
    pub fn arities(&self) -> Vec<usize> {
        let mut out: Vec<_> = self.symbols.iter().map(RelationSymbol::arity).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn max_arity(&self) -> Option<usize> {
        self.symbols.iter().map(RelationSymbol::arity).max()
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}/{}", s.name(), s.arity())?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Vocabulary {
    type Item = &'a RelationSymbol;
    type IntoIter = std::slice::Iter<'a, RelationSymbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.symbols.iter()
    }
}

/// A relation-valued term.
///
/// `Rot` is the cyclic permutation `p`, moving the last position to the front;
/// `Swap` is `s`, exchanging the last two positions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Symbol(RelationSymbol),
    Rot(Box<Term>),
    Swap(Box<Term>),
    Not(Box<Term>),
    Inter(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
    Union(Box<Term>, Box<Term>),
}

impl Term {
    pub fn symbol(symbol: RelationSymbol) -> Self {
        Term::Symbol(symbol)
    }

    pub fn rot(inner: Term) -> Self {
        Term::Rot(Box::new(inner))
    }

    pub fn swap(inner: Term) -> Self {
        Term::Swap(Box::new(inner))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Term) -> Self {
        Term::Not(Box::new(inner))
    }

    pub fn inter(left: Term, right: Term) -> Self {
        Term::Inter(Box::new(left), Box::new(right))
    }

    pub fn diff(left: Term, right: Term) -> Self {
        Term::Diff(Box::new(left), Box::new(right))
    }

    pub fn union(left: Term, right: Term) -> Self {
        Term::Union(Box::new(left), Box::new(right))
    }

    /// Applies a generator word, outermost generator first.
    pub fn permuted(word: &[Generator], inner: Term) -> Self {
        word.iter().rev().fold(inner, |acc, g| match g {
            Generator::Rot => Term::rot(acc),
            Generator::Swap => Term::swap(acc),
        })
    }

    /// The arity of a well-formed term.
    pub fn arity(&self) -> Result<usize, TermError> {
        match self {
            Term::Symbol(s) => Ok(s.arity()),
            Term::Rot(t) | Term::Swap(t) | Term::Not(t) => t.arity(),
            Term::Inter(a, b) | Term::Diff(a, b) | Term::Union(a, b) => {
                let (left, right) = (a.arity()?, b.arity()?);
                if left != right {
                    return Err(TermError::ArityMismatch { left, right });
                }
                Ok(left)
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Symbol(_) => 1,
            Term::Rot(t) | Term::Swap(t) | Term::Not(t) => 1 + t.size(),
            Term::Inter(a, b) | Term::Diff(a, b) | Term::Union(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn contains_negation(&self) -> bool {
        match self {
            Term::Symbol(_) => false,
            Term::Not(_) => true,
            Term::Rot(t) | Term::Swap(t) => t.contains_negation(),
            Term::Inter(a, b) | Term::Diff(a, b) | Term::Union(a, b) => a.contains_negation() || b.contains_negation(),
        }
    }

    /// Symbols occurring in the term, in order of first occurrence.
    pub fn symbols(&self) -> Vec<RelationSymbol> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut Vec<RelationSymbol>) {
        match self {
            Term::Symbol(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Term::Rot(t) | Term::Swap(t) | Term::Not(t) => t.collect_symbols(out),
            Term::Inter(a, b) | Term::Diff(a, b) | Term::Union(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Replaces every symbol leaf with the term returned by `f`.
    pub fn map_symbols(&self, f: &mut impl FnMut(&RelationSymbol) -> Term) -> Term {
        match self {
            Term::Symbol(s) => f(s),
            Term::Rot(t) => Term::rot(t.map_symbols(f)),
            Term::Swap(t) => Term::swap(t.map_symbols(f)),
            Term::Not(t) => Term::not(t.map_symbols(f)),
            Term::Inter(a, b) => Term::inter(a.map_symbols(f), b.map_symbols(f)),
            Term::Diff(a, b) => Term::diff(a.map_symbols(f), b.map_symbols(f)),
            Term::Union(a, b) => Term::union(a.map_symbols(f), b.map_symbols(f)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => f.write_str(s.name()),
            Term::Rot(t) => write!(f, "rot({t})"),
            Term::Swap(t) => write!(f, "swp({t})"),
            Term::Not(t) => write!(f, "!{t}"),
            Term::Inter(a, b) => write!(f, "({a} & {b})"),
            Term::Diff(a, b) => write!(f, "({a} \\ {b})"),
            Term::Union(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// Evaluates a term over a model, materializing complements within `W^k`.
pub fn eval_term(term: &Term, model: &KripkeModel) -> Result<TupleSet, ModelError> {
    term.arity()?;
    eval_rec(term, model)
}

fn eval_rec(term: &Term, model: &KripkeModel) -> Result<TupleSet, ModelError> {
    Ok(match term {
        Term::Symbol(s) => model.relation(s)?.clone(),
        Term::Rot(t) => {
            let inner = eval_rec(t, model)?;
            inner.permute(&Permutation::rot(inner.arity())?)
        }
        Term::Swap(t) => {
            let inner = eval_rec(t, model)?;
            inner.permute(&Permutation::swap(inner.arity())?)
        }
        Term::Not(t) => eval_rec(t, model)?.complement(model.world_count()),
        Term::Inter(a, b) => eval_rec(a, model)?.intersect(&eval_rec(b, model)?),
        Term::Diff(a, b) => eval_rec(a, model)?.difference(&eval_rec(b, model)?),
        Term::Union(a, b) => eval_rec(a, model)?.union(&eval_rec(b, model)?),
    })
}
