use std::fmt;
use std::sync::Arc;

use super::{generator_word, word_to_string, Permutation, RelationSymbol, Term, TermError, Vocabulary};
use crate::model::{KripkeModel, ModelError, World};

/// A literal `σR` or `¬σR`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub positive: bool,
    pub perm: Permutation,
    pub symbol: RelationSymbol,
}

impl Literal {
    pub fn new(positive: bool, perm: Permutation, symbol: RelationSymbol) -> Result<Self, TermError> {
        if perm.size() != symbol.arity() {
            return Err(TermError::ArityMismatch { left: perm.size(), right: symbol.arity() });
        }
        Ok(Self { positive, perm, symbol })
    }

    pub fn to_term(&self) -> Term {
        let word = generator_word(&self.perm).expect("literal arity is at least 2");
        let atom = Term::permuted(&word, Term::symbol(self.symbol.clone()));
        if self.positive {
            atom
        } else {
            Term::not(atom)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = generator_word(&self.perm).map_err(|_| fmt::Error)?;
        if !self.positive {
            f.write_str("¬")?;
        }
        write!(f, "{}{}", word_to_string(&word), self.symbol.name())
    }
}

/// A maximally consistent set of `k`-literals: one sign for every pair of a
/// permutation of `0..k` and a `k`-ary symbol.
///
/// Literals are ordered by symbol name, then by the permutation's one-line
/// notation; `signs` follows that order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Table {
    arity: usize,
    symbols: Arc<[RelationSymbol]>,
    signs: Vec<bool>,
}

impl Table {
    /// Builds a table from its position in the canonical enumeration order
    /// (0-based).
    fn from_ordinal(arity: usize, symbols: Arc<[RelationSymbol]>, ordinal: u64) -> Self {
        let n = symbols.len() * factorial(arity);
        let signs = (0..n).map(|i| (ordinal >> (n - 1 - i)) & 1 == 0).collect();
        Self { arity, symbols, signs }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    /// Position in the canonical order: a negative literal is a 1 bit, the
    /// first literal is the most significant bit.
    pub fn ordinal(&self) -> u64 {
        self.signs.iter().fold(0, |acc, &pos| (acc << 1) | u64::from(!pos))
    }

    /// 1-based index among all tables of this arity and vocabulary.
    pub fn index(&self) -> usize {
        self.ordinal() as usize + 1
    }

    fn slot(&self, perm: &Permutation, symbol: &RelationSymbol) -> Option<usize> {
        let s = self.symbols.iter().position(|x| x == symbol)?;
        Some(s * factorial(self.arity) + perm.rank())
    }

    /// The sign of `perm symbol` in this table, `None` if the symbol is not in
    /// the table's vocabulary or the arities differ.
    pub fn sign(&self, perm: &Permutation, symbol: &RelationSymbol) -> Option<bool> {
        if perm.size() != self.arity {
            return None;
        }
        self.slot(perm, symbol).map(|i| self.signs[i])
    }

    pub fn literals(&self) -> Vec<Literal> {
        let perms = Permutation::all(self.arity);
        let mut out = Vec::with_capacity(self.signs.len());
        for (s, symbol) in self.symbols.iter().enumerate() {
            for (p, perm) in perms.iter().enumerate() {
                out.push(Literal {
                    positive: self.signs[s * perms.len() + p],
                    perm: perm.clone(),
                    symbol: symbol.clone(),
                });
            }
        }
        out
    }

    /// The intersection of the table's literals, as a term.
    pub fn to_term(&self) -> Term {
        let mut terms = self.literals().into_iter().map(|l| l.to_term());
        let first = terms.next().expect("tables over an empty vocabulary have no term");
        terms.fold(first, Term::inter)
    }

    /// Recognizes a term that is an intersection of literals forming exactly one
    /// table over `vocab`.
    pub fn from_term(term: &Term, vocab: &Vocabulary) -> Option<Table> {
        let arity = term.arity().ok()?;
        let symbols: Arc<[RelationSymbol]> = vocab.of_arity(arity).into();
        let n = symbols.len() * factorial(arity);
        let mut signs: Vec<Option<bool>> = vec![None; n];
        let mut conjuncts = Vec::new();
        flatten_inter(term, &mut conjuncts);
        let probe = Table { arity, symbols: symbols.clone(), signs: vec![true; n] };
        for c in conjuncts {
            let (positive, perm, symbol) = literal_parts(c, arity)?;
            let slot = probe.slot(&perm, &symbol)?;
            if signs[slot].is_some_and(|s| s != positive) {
                return None;
            }
            signs[slot] = Some(positive);
        }
        let signs = signs.into_iter().collect::<Option<Vec<bool>>>()?;
        Some(Table { arity, symbols, signs })
    }
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.literals().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn factorial(k: usize) -> usize {
    (1..=k).product()
}

fn flatten_inter<'a>(term: &'a Term, out: &mut Vec<&'a Term>) {
    match term {
        Term::Inter(a, b) => {
            flatten_inter(a, out);
            flatten_inter(b, out);
        }
        other => out.push(other),
    }
}

/// Splits `¬? g₁ … gₙ R` into its sign, permutation and symbol.
fn literal_parts(term: &Term, arity: usize) -> Option<(bool, Permutation, RelationSymbol)> {
    let (positive, mut at) = match term {
        Term::Not(t) => (false, t.as_ref()),
        t => (true, t),
    };
    let mut perm = Permutation::identity(arity);
    loop {
        match at {
            Term::Symbol(s) => return Some((positive, perm, s.clone())),
            Term::Rot(t) => {
                perm = perm.compose(&Permutation::rot(arity).ok()?);
                at = t;
            }
            Term::Swap(t) => {
                perm = perm.compose(&Permutation::swap(arity).ok()?);
                at = t;
            }
            _ => return None,
        }
    }
}

/// All `k`-tables over the `k`-ary symbols of `vocab`, in canonical order.
///
/// There are `2^(k!·n)` of them for `n` symbols of arity `k`; an empty arity
/// yields the single empty table.
pub fn enumerate_tables(vocab: &Vocabulary, k: usize) -> Result<Vec<Table>, TermError> {
    if k < 2 {
        return Err(TermError::PermutationTooSmall(k));
    }
    let symbols: Arc<[RelationSymbol]> = vocab.of_arity(k).into();
    let bits = symbols.len() * factorial(k);
    assert!(bits < 63, "table enumeration over {bits} literals is out of reach");
    Ok((0..1u64 << bits).map(|ordinal| Table::from_ordinal(k, symbols.clone(), ordinal)).collect())
}

/// The group action `σ[ρ]`: every literal `σ'R` of `ρ` becomes `(σ∘σ')R`
/// with the same sign.
pub fn table_action(sigma: &Permutation, rho: &Table) -> Result<Table, TermError> {
    if sigma.size() != rho.arity {
        return Err(TermError::TableArity { table: rho.arity, other: sigma.size() });
    }
    let perms = Permutation::all(rho.arity);
    let per_symbol = perms.len();
    let mut signs = vec![false; rho.signs.len()];
    for s in 0..rho.symbols.len() {
        for (p, perm) in perms.iter().enumerate() {
            let target = sigma.compose(perm).rank();
            signs[s * per_symbol + target] = rho.signs[s * per_symbol + p];
        }
    }
    Ok(Table { arity: rho.arity, symbols: rho.symbols.clone(), signs })
}

/// The table realized by `tuple` over the model's symbols of the tuple's arity.
pub fn table_of_tuple(tuple: &[World], model: &KripkeModel) -> Result<Table, ModelError> {
    let k = tuple.len();
    if k < 2 {
        return Err(TermError::PermutationTooSmall(k).into());
    }
    let symbols: Arc<[RelationSymbol]> = model.vocab().of_arity(k).into();
    let perms = Permutation::all(k);
    let mut signs = Vec::with_capacity(symbols.len() * perms.len());
    for symbol in symbols.iter() {
        let rel = model.relation(symbol)?;
        for perm in &perms {
            // tuple ∈ ⟦σR⟧  iff  σ⁻¹(tuple) ∈ R
            signs.push(rel.contains(&perm.inverse().apply(tuple)));
        }
    }
    Ok(Table { arity: k, symbols, signs })
}

/// Whether `rho` entails a Boolean combination of literals.
pub fn table_entails(rho: &Table, term: &Term) -> Result<bool, TermError> {
    let k = term.arity()?;
    if k != rho.arity {
        return Err(TermError::TableArity { table: rho.arity, other: k });
    }
    entails_rec(rho, term)
}

fn entails_rec(rho: &Table, term: &Term) -> Result<bool, TermError> {
    let shape_error = || TermError::NotLiteralCombination(term.to_string());
    Ok(match term {
        Term::Not(t) => !entails_rec(rho, t)?,
        Term::Inter(a, b) => entails_rec(rho, a)? && entails_rec(rho, b)?,
        Term::Union(a, b) => entails_rec(rho, a)? || entails_rec(rho, b)?,
        Term::Diff(a, b) => entails_rec(rho, a)? && !entails_rec(rho, b)?,
        Term::Symbol(_) | Term::Rot(_) | Term::Swap(_) => {
            let (_, perm, symbol) = literal_parts(term, rho.arity).ok_or_else(shape_error)?;
            rho.sign(&perm, &symbol).ok_or_else(|| TermError::UnknownSymbol(symbol.to_string()))?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_term;

    fn vocab_r() -> Vocabulary {
        Vocabulary::parse("R/2").unwrap()
    }

    fn table_named(tables: &[Table], text: &str) -> Table {
        tables.iter().find(|t| t.to_string() == text).unwrap().clone()
    }

    #[test]
    fn binary_tables_in_canonical_order() {
        let tables = enumerate_tables(&vocab_r(), 2).unwrap();
        let shown: Vec<String> = tables.iter().map(Table::to_string).collect();
        // with p < s the binary swap literal is spelled pR
        assert_eq!(shown, ["{R, pR}", "{R, ¬pR}", "{¬R, pR}", "{¬R, ¬pR}"]);
        let indices: Vec<usize> = tables.iter().map(Table::index).collect();
        assert_eq!(indices, [1, 2, 3, 4]);
    }

    #[test]
    fn swap_fixes_the_symmetric_table() {
        let tables = enumerate_tables(&vocab_r(), 2).unwrap();
        let rho = table_named(&tables, "{R, pR}");
        assert_eq!(table_action(&Permutation::swap(2).unwrap(), &rho).unwrap(), rho);
        let rho2 = table_named(&tables, "{R, ¬pR}");
        let moved = table_action(&Permutation::swap(2).unwrap(), &rho2).unwrap();
        assert_eq!(moved.to_string(), "{¬R, pR}");
    }

    #[test]
    fn identity_action_is_trivial() {
        for rho in enumerate_tables(&Vocabulary::parse("T/3").unwrap(), 3).unwrap() {
            assert_eq!(table_action(&Permutation::identity(3), &rho).unwrap(), rho);
        }
    }

    #[test]
    fn action_rejects_arity_mismatch() {
        let rho = enumerate_tables(&vocab_r(), 2).unwrap().remove(0);
        assert!(table_action(&Permutation::identity(3), &rho).is_err());
    }

    #[test]
    fn table_round_trips_through_term() {
        let vocab = Vocabulary::parse("R/2,S/2").unwrap();
        for rho in enumerate_tables(&vocab, 2).unwrap() {
            assert_eq!(Table::from_term(&rho.to_term(), &vocab), Some(rho));
        }
        // a partial intersection is not a table
        let partial = parse_term("(R & S)", &vocab).unwrap();
        assert_eq!(Table::from_term(&partial, &vocab), None);
    }

    #[test]
    fn tuple_tables_in_two_world_model() {
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\n").unwrap();
        assert_eq!(table_of_tuple(&[0, 1], &m).unwrap().to_string(), "{R, ¬pR}");
        assert_eq!(table_of_tuple(&[0, 0], &m).unwrap().to_string(), "{¬R, ¬pR}");
        assert_eq!(table_of_tuple(&[1, 0], &m).unwrap().to_string(), "{¬R, pR}");
    }

    #[test]
    fn entailment_of_literal_combinations() {
        let vocab = vocab_r();
        let tables = enumerate_tables(&vocab, 2).unwrap();
        let both = parse_term("(R & swp(R))", &vocab).unwrap();
        assert!(table_entails(&table_named(&tables, "{R, pR}"), &both).unwrap());
        assert!(!table_entails(&table_named(&tables, "{R, ¬pR}"), &both).unwrap());
    }

    #[test]
    fn entailment_rejects_non_literal_shapes() {
        let vocab = vocab_r();
        let rho = enumerate_tables(&vocab, 2).unwrap().remove(0);
        let t = parse_term("rot((R & R))", &vocab).unwrap();
        assert!(matches!(table_entails(&rho, &t), Err(TermError::NotLiteralCombination(_))));
    }
}
