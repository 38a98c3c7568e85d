//! Seeded generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use pml_core::check::check_naive;
use pml_core::formula::{Formula, Node};
use pml_core::model::KripkeModel;
use pml_core::reduce_neg::{backward_model_neg, doubled_world};
use pml_core::reduce_neg::{reduce_neg, NegReduction};
use pml_core::reduce_tables::{reduce_tables, TableConfig, TableError, TableReduction};
use pml_core::sat::{sat_bounded_with, sat_witnesses, SatBudget};
use pml_core::term::{RelationSymbol, Term, Vocabulary};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which term operators a generator may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terms {
    /// `p`, `s`, `¬`, `∩`, `\`, `∪`.
    Full,
    /// `p`, `s`, `¬`, `∩`.
    Tables,
    /// A symbol or its complement.
    Negation,
}

pub struct Gen {
    pub rng: ChaCha8Rng,
    pub terms: Terms,
    pub windows: bool,
    pub global: bool,
}

impl Gen {
    pub fn new(seed: u64, terms: Terms) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), terms, windows: false, global: false }
    }

    pub fn term(&mut self, symbols: &[RelationSymbol], depth: usize) -> Term {
        let s = symbols.choose(&mut self.rng).expect("a symbol").clone();
        if self.terms == Terms::Negation {
            let atom = Term::symbol(s);
            return if self.rng.gen_bool(0.5) { Term::not(atom) } else { atom };
        }
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Term::symbol(s);
        }
        let binary = if self.terms == Terms::Full { 6 } else { 4 };
        match self.rng.gen_range(0..binary) {
            0 => Term::rot(self.term(symbols, depth - 1)),
            1 => Term::swap(self.term(symbols, depth - 1)),
            2 => Term::not(self.term(symbols, depth - 1)),
            3 => Term::inter(self.term(symbols, depth - 1), self.term(symbols, depth - 1)),
            4 => Term::diff(self.term(symbols, depth - 1), self.term(symbols, depth - 1)),
            _ => Term::union(self.term(symbols, depth - 1), self.term(symbols, depth - 1)),
        }
    }

    fn leaf(&mut self, props: &[&str]) -> Formula {
        match self.rng.gen_range(0..10) {
            0 => Formula::top(),
            1 => Formula::bottom(),
            _ => Formula::prop(*props.choose(&mut self.rng).expect("a proposition")),
        }
    }

    pub fn formula(&mut self, vocab: &Vocabulary, props: &[&str], depth: usize, term_depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(props);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..12) {
            0 | 1 => Formula::not(self.formula(vocab, props, d, term_depth)),
            2 | 3 => Formula::and(self.formula(vocab, props, d, term_depth), self.formula(vocab, props, d, term_depth)),
            4 => Formula::or(self.formula(vocab, props, d, term_depth), self.formula(vocab, props, d, term_depth)),
            5 if self.global => Formula::exists(self.formula(vocab, props, d, term_depth)),
            6 if self.global => Formula::forall(self.formula(vocab, props, d, term_depth)),
            7 if self.windows => {
                let s = vocab.iter().collect::<Vec<_>>().choose(&mut self.rng).map(|s| (*s).clone()).expect("a symbol");
                let args = (1..s.arity()).map(|_| self.formula(vocab, props, d, term_depth)).collect();
                Formula::window(s, args).expect("arity matches")
            }
            8 => self.modality(vocab, props, d, term_depth, false),
            _ => self.modality(vocab, props, d, term_depth, true),
        }
    }

    fn modality(&mut self, vocab: &Vocabulary, props: &[&str], d: usize, term_depth: usize, diamond: bool) -> Formula {
        let arity = *vocab.arities().choose(&mut self.rng).expect("an arity");
        let term = self.term(&vocab.of_arity(arity), term_depth);
        let args = (1..arity).map(|_| self.formula(vocab, props, d, term_depth)).collect();
        if diamond {
            Formula::diamond(term, args).expect("arity matches")
        } else {
            Formula::boxed(term, args).expect("arity matches")
        }
    }
}

/// Number of relational modalities.
pub fn modalities(phi: &Formula) -> usize {
    fn count(f: &Formula) -> usize {
        let own = usize::from(matches!(f.node(), Node::Diamond(..) | Node::Box(..) | Node::Window(..)));
        own + f.children().into_iter().map(count).sum::<usize>()
    }
    count(phi)
}

/// `|Subf| ≤ 8` over one binary symbol means at most `16 · 8⁴` conjuncts.
pub fn desk_config() -> TableConfig {
    TableConfig { max_xi1_conjuncts: 16 * 8u64.pow(4), ..TableConfig::default() }
}

/// Satisfiable formulas over one binary symbol with at most two modalities
/// whose translation has at most eight subformulas, with a witness.
pub fn desk_corpus(seed: u64, wanted: usize) -> Vec<(TableReduction, KripkeModel, u32)> {
    let vocab = Vocabulary::parse("R/2").unwrap();
    let mut gen = Gen::new(seed, Terms::Tables);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..20_000 {
        if out.len() == wanted {
            break;
        }
        let phi = gen.formula(&vocab, &["q", "r"], 3, 2);
        if !(1..=2).contains(&modalities(&phi)) || phi.symbols().is_empty() || !seen.insert(phi.to_string()) {
            continue;
        }
        let red = match reduce_tables(&phi, None, &desk_config()) {
            Ok(red) => red,
            Err(TableError::Xi1TooLarge { .. }) => continue,
            Err(e) => panic!("{phi}: {e}"),
        };
        assert!(red.subformulas.len() <= 8);
        let verdict = sat_bounded_with(&phi, 3, &SatBudget::unlimited()).unwrap();
        if let Some((m, w)) = verdict.witness() {
            out.push((red, m.clone(), w));
        }
    }
    out
}

/// Satisfiable formulas over `R` and `¬R` with a minimal witness.
pub fn neg_corpus(seed: u64, wanted: usize) -> Vec<(NegReduction, KripkeModel, u32)> {
    let vocab = Vocabulary::parse("R/2").unwrap();
    let mut gen = Gen::new(seed, Terms::Negation);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..20_000 {
        if out.len() == wanted {
            break;
        }
        let phi = gen.formula(&vocab, &["q"], 4, 0);
        if phi.symbols().is_empty() || !seen.insert(phi.to_string()) {
            continue;
        }
        let verdict = sat_bounded_with(&phi, 3, &SatBudget::unlimited()).unwrap();
        if let Some((m, w)) = verdict.witness() {
            out.push((reduce_neg(&phi).unwrap(), m.clone(), w));
        }
    }
    out
}

/// Runs the backward construction on every `θ`-model with at most two worlds
/// and on the first `cap` with three; returns how many were rebuilt.
pub fn neg_backward_on_witnesses(red: &NegReduction, cap: usize) -> usize {
    let (mut done, mut big) = (0, 0);
    sat_witnesses(&red.theta, 3, &SatBudget::unlimited(), &mut |m, truth| {
        if m.world_count() == 3 {
            big += 1;
        }
        for w in truth.iter() {
            let back = backward_model_neg(red, m, w).unwrap_or_else(|e| panic!("{}: {e}", red.source));
            assert_eq!(back.world, doubled_world(w, 0));
            assert!(check_naive(&back.doubled, &red.source).unwrap().contains(back.world));
            done += 1;
        }
        big < cap
    })
    .unwrap();
    done
}
