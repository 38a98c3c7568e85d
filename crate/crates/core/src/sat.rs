//! Bounded satisfiability search: enumerate every model up to a domain size,
//! one per isomorphism class, and evaluate the formula on bitmasks.
//!
//! The search shares no evaluation code with the checkers; every witness is
//! confirmed with [`check_naive`] before it is returned.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::check::{check_naive, CheckError};
use crate::formula::{DagNode, Formula, FormulaDag};
use crate::model::{KripkeModel, TupleSet, World, WorldSet};
use crate::term::{Permutation, RelationSymbol, Term, TermError, Vocabulary};

/// Environment variable capping the search time in milliseconds.
pub const BUDGET_ENV: &str = "PML_BUDGET_MS";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("search budget exhausted after {explored} candidate models")]
    Budget { explored: u64 },
    #[error("{worlds} worlds need {bits} bits per model; the search handles at most 62")]
    TooLarge { worlds: usize, bits: usize },
    #[error("witness rejected by the semantic checker")]
    Unconfirmed,
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Limits on a search. Exceeding one yields [`SatError::Budget`], never a
/// verdict.
#[derive(Clone, Debug, Default)]
pub struct SatBudget {
    pub max_models: Option<u64>,
    pub time: Option<Duration>,
}

impl SatBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    /// Reads a time cap from `PML_BUDGET_MS` when set.
    pub fn from_env() -> Self {
        let time = std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse::<u64>().ok()).map(Duration::from_millis);
        Self { max_models: None, time }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    /// The formula holds at `world` in `model`; `model` is the first witness
    /// in enumeration order, so its size is the least possible.
    Satisfiable { model: KripkeModel, world: World },
    /// No model with at most `bound` worlds satisfies the formula.
    Exhausted { bound: usize },
}

impl SatVerdict {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, SatVerdict::Satisfiable { .. })
    }

    pub fn witness(&self) -> Option<(&KripkeModel, World)> {
        match self {
            SatVerdict::Satisfiable { model, world } => Some((model, *world)),
            SatVerdict::Exhausted { .. } => None,
        }
    }
}

/// Searches models with `1..=max_worlds` worlds over the symbols and
/// propositions of `phi`.
pub fn sat_bounded(phi: &Formula, max_worlds: usize) -> Result<SatVerdict, SatError> {
    sat_bounded_with(phi, max_worlds, &SatBudget::from_env())
}

pub fn sat_bounded_with(phi: &Formula, max_worlds: usize, budget: &SatBudget) -> Result<SatVerdict, SatError> {
    let mut found = None;
    search(phi, max_worlds, budget, &mut |model, truth| {
        let world = truth.iter().next().expect("nonempty truth set");
        found = Some((model.clone(), world));
        false
    })?;
    Ok(match found {
        Some((model, world)) => SatVerdict::Satisfiable { model, world },
        None => SatVerdict::Exhausted { bound: max_worlds },
    })
}

/// Calls `visit` with every canonical model of at most `max_worlds` worlds in
/// which `phi` holds somewhere, together with its truth set. Models are
/// unique up to renaming worlds. Returning false from `visit` stops the
/// search.
pub fn sat_witnesses(
    phi: &Formula,
    max_worlds: usize,
    budget: &SatBudget,
    visit: &mut dyn FnMut(&KripkeModel, &WorldSet) -> bool,
) -> Result<(), SatError> {
    search(phi, max_worlds, budget, visit)
}

fn search(
    phi: &Formula,
    max_worlds: usize,
    budget: &SatBudget,
    visit: &mut dyn FnMut(&KripkeModel, &WorldSet) -> bool,
) -> Result<(), SatError> {
    assert!(max_worlds >= 1, "the bound must allow one world");
    let vocab = Vocabulary::new(phi.symbols())?;
    let props: Vec<Arc<str>> = phi.props();
    let program = Program::compile(phi, &vocab, &props);
    let start = Instant::now();
    let mut explored = 0u64;
    for n in 1..=max_worlds {
        let layout = Layout::new(n, &vocab, props.len())?;
        let perms = world_permutations(n, &layout);
        let total = 1u64 << layout.bits;
        for mask in 0..total {
            explored += 1;
            if budget.max_models.is_some_and(|m| explored > m)
                || (explored.is_multiple_of(4096) && budget.time.is_some_and(|t| start.elapsed() > t))
            {
                return Err(SatError::Budget { explored });
            }
            if !is_canonical(mask, &perms) {
                continue;
            }
            let truth = program.eval(mask, &layout);
            if truth == 0 {
                continue;
            }
            let model = layout.model(mask, &vocab, &props);
            let confirmed = check_naive(&model, phi)?;
            let truth_set = WorldSet::from_worlds(n, (0..n as World).filter(|&w| truth >> w & 1 == 1));
            if confirmed != truth_set {
                return Err(SatError::Unconfirmed);
            }
            if !visit(&model, &truth_set) {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Bit positions of a model with `n` worlds: each relation takes `n^k` bits,
/// one per tuple in lexicographic order, then each proposition takes `n`.
struct Layout {
    n: usize,
    bits: usize,
    /// (offset, arity, bit count) per relation.
    rel_offsets: Vec<(usize, usize, usize)>,
    prop_offset: usize,
    tables: HashMap<usize, ArityTables>,
}

/// Per arity: tuple digits and the index maps of `p` and `s`.
struct ArityTables {
    digits: Vec<Vec<World>>,
    rot: Vec<usize>,
    swap: Vec<usize>,
    full: u64,
}

fn tuple_index(t: &[World], n: usize) -> usize {
    t.iter().fold(0, |acc, &w| acc * n + w as usize)
}

impl ArityTables {
    fn new(n: usize, k: usize) -> Self {
        let size = n.pow(k as u32);
        let digits: Vec<Vec<World>> = crate::model::all_tuples(k, n).collect();
        let map =
            |perm: &Permutation| -> Vec<usize> { digits.iter().map(|t| tuple_index(&perm.apply(t), n)).collect() };
        let rot = map(&Permutation::rot(k).expect("k >= 2"));
        let swap = map(&Permutation::swap(k).expect("k >= 2"));
        let full = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        Self { digits, rot, swap, full }
    }
}

impl Layout {
    fn new(n: usize, vocab: &Vocabulary, props: usize) -> Result<Self, SatError> {
        let mut bits = 0usize;
        let mut rel_offsets = Vec::new();
        let mut tables = HashMap::new();
        for s in vocab {
            let size = n.checked_pow(s.arity() as u32).unwrap_or(usize::MAX);
            if size > 64 {
                return Err(SatError::TooLarge { worlds: n, bits: size });
            }
            rel_offsets.push((bits, s.arity(), size));
            bits += size;
            tables.entry(s.arity()).or_insert_with(|| ArityTables::new(n, s.arity()));
        }
        let prop_offset = bits;
        bits += props * n;
        if bits > 62 {
            return Err(SatError::TooLarge { worlds: n, bits });
        }
        Ok(Self { n, bits, rel_offsets, prop_offset, tables })
    }

    fn relation(&self, mask: u64, r: usize) -> u64 {
        let (off, _, size) = self.rel_offsets[r];
        (mask >> off) & if size == 64 { u64::MAX } else { (1u64 << size) - 1 }
    }

    fn prop(&self, mask: u64, j: usize) -> u64 {
        (mask >> (self.prop_offset + j * self.n)) & ((1u64 << self.n) - 1)
    }

    fn model(&self, mask: u64, vocab: &Vocabulary, props: &[Arc<str>]) -> KripkeModel {
        let mut model = KripkeModel::new(self.n, vocab.clone()).expect("n >= 1");
        for (r, s) in vocab.iter().enumerate() {
            let bits = self.relation(mask, r);
            let digits = &self.tables[&s.arity()].digits;
            let tuples = (0..digits.len()).filter(|&i| bits >> i & 1 == 1).map(|i| digits[i].clone());
            model
                .set_relation(s, TupleSet::from_tuples(s.arity(), tuples.collect::<Vec<_>>()))
                .expect("symbol of the vocabulary");
        }
        for (j, p) in props.iter().enumerate() {
            let bits = self.prop(mask, j);
            model.set_prop(
                p.to_string(),
                WorldSet::from_worlds(self.n, (0..self.n as World).filter(|&w| bits >> w & 1 == 1)),
            );
        }
        model
    }
}

/// For every non-identity renaming of worlds, the image position of each bit.
fn world_permutations(n: usize, layout: &Layout) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for pi in Permutation::all(n).into_iter().filter(|p| !p.is_identity()) {
        let mut map = vec![0usize; layout.bits];
        for &(off, k, _) in &layout.rel_offsets {
            for (i, t) in layout.tables[&k].digits.iter().enumerate() {
                let renamed: Vec<World> = t.iter().map(|&w| pi.image(w as usize) as World).collect();
                map[off + i] = off + tuple_index(&renamed, n);
            }
        }
        let props = (layout.bits - layout.prop_offset) / n;
        for j in 0..props {
            for w in 0..n {
                map[layout.prop_offset + j * n + w] = layout.prop_offset + j * n + pi.image(w);
            }
        }
        out.push(map);
    }
    out
}

/// A model is kept when its mask is the least among all renamings.
fn is_canonical(mask: u64, perms: &[Vec<usize>]) -> bool {
    perms.iter().all(|map| {
        let mut image = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            image |= 1u64 << map[i];
        }
        image >= mask
    })
}

/// The formula as straight-line bitmask code over the desugared DAG.
struct Program {
    ops: Vec<Op>,
    terms: Vec<TermOp>,
    root: usize,
}

enum Op {
    Top,
    Bottom,
    Prop(usize),
    Not(usize),
    And(usize, usize),
    Exists(usize),
    Diamond { term: usize, arity: usize, args: Vec<usize> },
}

enum TermOp {
    Rel(usize),
    Rot(usize, usize),
    Swap(usize, usize),
    Not(usize, usize),
    Inter(usize, usize),
    Diff(usize, usize),
    Union(usize, usize),
}

impl Program {
    fn compile(phi: &Formula, vocab: &Vocabulary, props: &[Arc<str>]) -> Self {
        let mut dag = FormulaDag::desugaring();
        let root = dag.intern(phi).index();
        let mut terms = Vec::new();
        let mut term_ids: HashMap<Term, usize> = HashMap::new();
        let ops = dag
            .nodes()
            .iter()
            .map(|node| match node {
                DagNode::Top => Op::Top,
                DagNode::Bottom => Op::Bottom,
                DagNode::Prop(p) => match props.iter().position(|q| q == p) {
                    Some(j) => Op::Prop(j),
                    None => Op::Bottom,
                },
                DagNode::Not(a) => Op::Not(a.index()),
                DagNode::And(a, b) => Op::And(a.index(), b.index()),
                DagNode::Exists(a) => Op::Exists(a.index()),
                DagNode::Diamond(t, args) => Op::Diamond {
                    term: compile_term(t, vocab, &mut terms, &mut term_ids),
                    arity: args.len() + 1,
                    args: args.iter().map(|a| a.index()).collect(),
                },
                DagNode::Or(..) | DagNode::Box(..) | DagNode::Forall(..) | DagNode::Window(..) => {
                    unreachable!("desugared away")
                }
            })
            .collect();
        Self { ops, terms, root }
    }

    fn eval(&self, mask: u64, layout: &Layout) -> u64 {
        let n = layout.n;
        let all = (1u64 << n) - 1;
        let mut term_vals: Vec<u64> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let v = match *t {
                TermOp::Rel(r) => layout.relation(mask, r),
                TermOp::Rot(a, k) => permute(term_vals[a], &layout.tables[&k].rot),
                TermOp::Swap(a, k) => permute(term_vals[a], &layout.tables[&k].swap),
                TermOp::Not(a, k) => !term_vals[a] & layout.tables[&k].full,
                TermOp::Inter(a, b) => term_vals[a] & term_vals[b],
                TermOp::Diff(a, b) => term_vals[a] & !term_vals[b],
                TermOp::Union(a, b) => term_vals[a] | term_vals[b],
            };
            term_vals.push(v);
        }
        let mut vals: Vec<u64> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Top => all,
                Op::Bottom => 0,
                Op::Prop(j) => layout.prop(mask, *j),
                Op::Not(a) => !vals[*a] & all,
                Op::And(a, b) => vals[*a] & vals[*b],
                Op::Exists(a) => {
                    if vals[*a] != 0 {
                        all
                    } else {
                        0
                    }
                }
                Op::Diamond { term, arity, args } => {
                    let digits = &layout.tables[arity].digits;
                    let mut rest = term_vals[*term];
                    let mut out = 0u64;
                    while rest != 0 {
                        let i = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        let t = &digits[i];
                        if args.iter().zip(&t[1..]).all(|(&a, &w)| vals[a] >> w & 1 == 1) {
                            out |= 1u64 << t[0];
                        }
                    }
                    out
                }
            };
            vals.push(v);
        }
        vals[self.root]
    }
}

fn permute(set: u64, map: &[usize]) -> u64 {
    let mut out = 0u64;
    let mut rest = set;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= 1u64 << map[i];
    }
    out
}

fn compile_term(t: &Term, vocab: &Vocabulary, terms: &mut Vec<TermOp>, ids: &mut HashMap<Term, usize>) -> usize {
    if let Some(&id) = ids.get(t) {
        return id;
    }
    let k = t.arity().expect("well-formed diamond term");
    let mut sub = |x: &Term, terms: &mut Vec<TermOp>| compile_term(x, vocab, terms, ids);
    let op = match t {
        Term::Symbol(s) => TermOp::Rel(position(vocab, s)),
        Term::Rot(a) => TermOp::Rot(sub(a, terms), k),
        Term::Swap(a) => TermOp::Swap(sub(a, terms), k),
        Term::Not(a) => TermOp::Not(sub(a, terms), k),
        Term::Inter(a, b) => {
            let (a, b) = (sub(a, terms), sub(b, terms));
            TermOp::Inter(a, b)
        }
        Term::Diff(a, b) => {
            let (a, b) = (sub(a, terms), sub(b, terms));
            TermOp::Diff(a, b)
        }
        Term::Union(a, b) => {
            let (a, b) = (sub(a, terms), sub(b, terms));
            TermOp::Union(a, b)
        }
    };
    terms.push(op);
    let id = terms.len() - 1;
    ids.insert(t.clone(), id);
    id
}

fn position(vocab: &Vocabulary, s: &RelationSymbol) -> usize {
    vocab.position(s.name()).expect("vocabulary built from the formula")
}

/// Outcome of searching two formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquisatOutcome {
    BothSatisfiable,
    BothExhausted,
    OnlyFirstSatisfiable,
    OnlySecondSatisfiable,
}

#[derive(Clone, Debug)]
pub struct EquisatReport {
    pub first: SatVerdict,
    pub second: SatVerdict,
}

impl EquisatReport {
    pub fn outcome(&self) -> EquisatOutcome {
        match (self.first.is_satisfiable(), self.second.is_satisfiable()) {
            (true, true) => EquisatOutcome::BothSatisfiable,
            (false, false) => EquisatOutcome::BothExhausted,
            (true, false) => EquisatOutcome::OnlyFirstSatisfiable,
            (false, true) => EquisatOutcome::OnlySecondSatisfiable,
        }
    }
}

/// Searches both formulas under their own bounds. A one-sided outcome is
/// evidence only: bounded search cannot refute satisfiability.
pub fn equisat_check(
    phi: &Formula,
    psi: &Formula,
    bound_phi: usize,
    bound_psi: usize,
    budget: &SatBudget,
) -> Result<EquisatReport, SatError> {
    Ok(EquisatReport {
        first: sat_bounded_with(phi, bound_phi, budget)?,
        second: sat_bounded_with(psi, bound_psi, budget)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula_infer;

    fn f(src: &str) -> Formula {
        parse_formula_infer(src).unwrap().0
    }

    #[test]
    fn diamond_is_satisfiable_in_one_world() {
        let v = sat_bounded_with(&f("<R>(p)"), 3, &SatBudget::unlimited()).unwrap();
        let (m, w) = v.witness().unwrap();
        assert_eq!(m.world_count(), 1);
        assert!(check_naive(m, &f("<R>(p)")).unwrap().contains(w));
    }

    #[test]
    fn contradiction_is_exhausted() {
        let v = sat_bounded_with(&f("(p & ~p)"), 3, &SatBudget::unlimited()).unwrap();
        assert_eq!(v, SatVerdict::Exhausted { bound: 3 });
    }

    #[test]
    fn two_worlds_needed_when_reflexivity_is_excluded() {
        let phi = f("(<R>(p) & ~p)");
        let (m, _) = sat_bounded_with(&phi, 3, &SatBudget::unlimited()).unwrap().witness().unwrap().clone_pair();
        assert_eq!(m.world_count(), 2);
    }

    #[test]
    fn model_budget_is_reported() {
        let err = sat_bounded_with(&f("(p & ~p)"), 3, &SatBudget { max_models: Some(5), time: None }).unwrap_err();
        assert_eq!(err, SatError::Budget { explored: 6 });
    }

    #[test]
    fn canonical_models_are_one_per_isomorphism_class() {
        // unlabeled digraphs with loops on 2 vertices: 10 classes
        let phi = f("(<R>(true) | ~<R>(true))");
        let mut count = 0;
        sat_witnesses(&phi, 2, &SatBudget::unlimited(), &mut |m, _| {
            if m.world_count() == 2 {
                count += 1;
            }
            true
        })
        .unwrap();
        assert_eq!(count, 10);
    }

    #[test]
    fn equisat_report_outcomes() {
        let contradiction = f("(p & ~p)");
        let r = equisat_check(&contradiction, &contradiction, 2, 2, &SatBudget::unlimited()).unwrap();
        assert_eq!(r.outcome(), EquisatOutcome::BothExhausted);
        let r = equisat_check(&f("<R>(p)"), &contradiction, 1, 1, &SatBudget::unlimited()).unwrap();
        assert_eq!(r.outcome(), EquisatOutcome::OnlyFirstSatisfiable);
    }

    trait ClonePair {
        fn clone_pair(self) -> (KripkeModel, World);
    }

    impl ClonePair for (&KripkeModel, World) {
        fn clone_pair(self) -> (KripkeModel, World) {
            (self.0.clone(), self.1)
        }
    }
}
