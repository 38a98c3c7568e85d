//! Reduction from polyadic modal logic with negated relations to polyadic
//! modal logic with the global diamond.
//!
//! Each symbol `R` gets two fresh symbols `R₁` (for `⟨R⟩`) and `R₂` (for
//! `⟨¬R⟩`); the axiom `η` guarantees that any model of the translation can be
//! completed so that `R₁ ∪ R₂` covers every tuple, after which a doubled copy
//! of the model interprets `R` itself.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::check::{check_labeling, CheckError, CompiledFormula};
use crate::formula::{eliminate_window, DagNode, Formula, FormulaDag, FormulaError, Node, NodeId};
use crate::model::{all_tuples, KripkeModel, ModelError, Tuple, TupleSet, World, WorldSet};
use crate::term::{RelationSymbol, Term, TermError, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NegError {
    #[error("`{0}` is outside the fragment: modalities may only use `R` or `!R`")]
    Fragment(String),
    #[error("the formula does not hold at world {0} of the given model")]
    Precondition(World),
    #[error("no side of the covering lemma accepts tuple {tuple:?} of `{symbol}`")]
    Covering { symbol: String, tuple: Tuple },
    #[error("doubling rules conflict on tuple {0:?}")]
    RuleConflict(Tuple),
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

/// Which of the two fresh symbols a translated modality uses.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    Positive = 1,
    Negative = 2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPair {
    pub source: RelationSymbol,
    pub positive: RelationSymbol,
    pub negative: RelationSymbol,
}

#[derive(Clone, Debug)]
pub struct NegReduction {
    /// The input with window operators eliminated.
    pub source: Formula,
    pub translated: Formula,
    pub eta: Formula,
    pub theta: Formula,
    pub symbols: Vec<SymbolPair>,
    pub source_vocab: Vocabulary,
    pub target_vocab: Vocabulary,
    /// Number of conjuncts of `η`.
    pub eta_conjuncts: usize,
}

impl NegReduction {
    /// `t(ψ)` for a window-free formula over the source symbols.
    pub fn translate(&self, psi: &Formula) -> Result<Formula, NegError> {
        translate(psi, &self.symbols, &mut HashMap::new())
    }
}

fn fragment_side(t: &Term) -> Option<(&RelationSymbol, Side)> {
    match t {
        Term::Symbol(s) => Some((s, Side::Positive)),
        Term::Not(inner) => match inner.as_ref() {
            Term::Symbol(s) => Some((s, Side::Negative)),
            _ => None,
        },
        _ => None,
    }
}

fn fresh_pair(source: &RelationSymbol, taken: &mut HashSet<String>) -> Result<SymbolPair, TermError> {
    let mut n = 1;
    loop {
        let a = format!("{}_{}", source.name(), n);
        let b = format!("{}_{}", source.name(), n + 1);
        if !taken.contains(&a) && !taken.contains(&b) {
            taken.insert(a.clone());
            taken.insert(b.clone());
            return Ok(SymbolPair {
                source: source.clone(),
                positive: RelationSymbol::new(a, source.arity())?,
                negative: RelationSymbol::new(b, source.arity())?,
            });
        }
        n += 2;
    }
}

fn translate(
    phi: &Formula,
    pairs: &[SymbolPair],
    memo: &mut HashMap<*const Node, Formula>,
) -> Result<Formula, NegError> {
    if let Some(done) = memo.get(&phi.as_ptr()) {
        return Ok(done.clone());
    }
    let args = |xs: &[Formula], memo: &mut HashMap<_, _>| -> Result<Vec<Formula>, NegError> {
        xs.iter().map(|x| translate(x, pairs, memo)).collect()
    };
    let modal_term = |t: &Term| -> Result<Term, NegError> {
        let (s, side) = fragment_side(t).ok_or_else(|| NegError::Fragment(t.to_string()))?;
        let pair = pairs.iter().find(|p| &p.source == s).expect("pair for every symbol");
        Ok(Term::symbol(match side {
            Side::Positive => pair.positive.clone(),
            Side::Negative => pair.negative.clone(),
        }))
    };
    let out = match phi.node() {
        Node::Top | Node::Bottom | Node::Prop(_) => phi.clone(),
        Node::Not(a) => Formula::not(translate(a, pairs, memo)?),
        Node::And(a, b) => Formula::and(translate(a, pairs, memo)?, translate(b, pairs, memo)?),
        Node::Or(a, b) => Formula::or(translate(a, pairs, memo)?, translate(b, pairs, memo)?),
        Node::Exists(a) => Formula::exists(translate(a, pairs, memo)?),
        Node::Forall(a) => Formula::forall(translate(a, pairs, memo)?),
        Node::Diamond(t, xs) => Formula::diamond(modal_term(t)?, args(xs, memo)?)?,
        Node::Box(t, xs) => Formula::boxed(modal_term(t)?, args(xs, memo)?)?,
        Node::Window(..) => unreachable!("windows are eliminated first"),
    };
    memo.insert(phi.as_ptr(), out.clone());
    Ok(out)
}

/// Builds `θ = t(φ) ∧ η`.
pub fn reduce_neg(phi: &Formula) -> Result<NegReduction, NegError> {
    let source = eliminate_window(phi);
    let source_symbols = source.symbols();
    let mut bad = None;
    source.visit(&mut |f| {
        if let Node::Diamond(t, _) | Node::Box(t, _) = f.node() {
            if fragment_side(t).is_none() && bad.is_none() {
                bad = Some(t.to_string());
            }
        }
    });
    if let Some(t) = bad {
        return Err(NegError::Fragment(t));
    }
    let source_vocab = Vocabulary::new(source_symbols.clone())?;
    let mut taken: HashSet<String> = source_symbols.iter().map(|s| s.name().to_string()).collect();
    let symbols = source_symbols.iter().map(|s| fresh_pair(s, &mut taken)).collect::<Result<Vec<_>, _>>()?;
    let target_vocab = Vocabulary::new(symbols.iter().flat_map(|p| [p.positive.clone(), p.negative.clone()]))?;
    let translated = translate(&source, &symbols, &mut HashMap::new())?;

    let mut dag = FormulaDag::desugaring();
    let root = dag.intern(&translated);
    let diamonds = diamonds_by_side(&dag, root, &symbols);
    let mut conjuncts = Vec::new();
    for (pair_index, _) in symbols.iter().enumerate() {
        let pos: Vec<NodeId> = diamonds.iter().filter(|d| d.1 == (pair_index, Side::Positive)).map(|d| d.0).collect();
        let neg: Vec<NodeId> = diamonds.iter().filter(|d| d.1 == (pair_index, Side::Negative)).map(|d| d.0).collect();
        for &a in &pos {
            for &b in &neg {
                let (da, db) = (dag.to_formula(a), dag.to_formula(b));
                let (psis, chis) = (diamond_args(&da), diamond_args(&db));
                let premise = Formula::exists(Formula::and(Formula::not(da.clone()), Formula::not(db.clone())));
                let options = psis.iter().zip(chis).map(|(psi, chi)| {
                    Formula::forall(Formula::or(Formula::not(psi.clone()), Formula::not(chi.clone())))
                });
                conjuncts.push(Formula::implies(premise, Formula::disj(options)));
            }
        }
    }
    let eta_conjuncts = conjuncts.len();
    let eta = Formula::conj(conjuncts);
    let theta = Formula::and(translated.clone(), eta.clone());
    Ok(NegReduction { source, translated, eta, theta, symbols, source_vocab, target_vocab, eta_conjuncts })
}

fn diamond_args(f: &Formula) -> Vec<Formula> {
    match f.node() {
        Node::Diamond(_, xs) => xs.clone(),
        _ => unreachable!("diamond node"),
    }
}

/// The diamonds of the desugared DAG below `root`, tagged with their symbol
/// pair and side.
fn diamonds_by_side(dag: &FormulaDag, root: NodeId, pairs: &[SymbolPair]) -> Vec<(NodeId, (usize, Side))> {
    dag.reachable(root)
        .into_iter()
        .filter_map(|id| match dag.node(id) {
            DagNode::Diamond(Term::Symbol(s), _) => pairs.iter().enumerate().find_map(|(i, p)| {
                if &p.positive == s {
                    Some((id, (i, Side::Positive)))
                } else if &p.negative == s {
                    Some((id, (i, Side::Negative)))
                } else {
                    None
                }
            }),
            _ => None,
        })
        .collect()
}

/// Interprets `R₁` as `R` and `R₂` as its complement; asserts `θ` at `w`.
pub fn forward_model_neg(red: &NegReduction, model: &KripkeModel, w: World) -> Result<KripkeModel, NegError> {
    let model = &model.over_vocabulary(&red.source_vocab)?;
    if !check_labeling(model, &red.source)?.contains(w) {
        return Err(NegError::Precondition(w));
    }
    let mut out = KripkeModel::new(model.world_count(), red.target_vocab.clone())?;
    for pair in &red.symbols {
        let rel = model.relation(&pair.source)?;
        out.set_relation(&pair.positive, rel.clone())?;
        out.set_relation(&pair.negative, rel.complement(model.world_count()))?;
    }
    copy_valuation(model, &mut out);
    if !check_labeling(&out, &red.theta)?.contains(w) {
        return Err(NegError::Construction(format!("θ fails at {w} in the forward model")));
    }
    Ok(out)
}

fn copy_valuation(from: &KripkeModel, to: &mut KripkeModel) {
    for (p, set) in from.props() {
        to.set_prop(p, set.clone());
    }
}

/// The result of the backward construction.
#[derive(Clone, Debug)]
pub struct NegBackward {
    /// The `θ`-model after completing `R₁ ∪ R₂` to all tuples.
    pub completed: KripkeModel,
    /// The model over the source symbols with worlds `W × {0,1}`, world
    /// `(w,i)` numbered `2w+i`.
    pub doubled: KripkeModel,
    /// `(w,0)`.
    pub world: World,
    /// Tuples added to `R₁` and to `R₂` during completion.
    pub added: (usize, usize),
}

pub fn doubled_world(w: World, i: u32) -> World {
    2 * w + i
}

/// Completes a `θ`-model so that `R₁ ∪ R₂` covers every tuple, preferring
/// `R₁`; truth values of `t(φ)`'s subformulas are taken from the given model.
pub fn complete_neg(red: &NegReduction, model: &KripkeModel) -> Result<(KripkeModel, (usize, usize)), NegError> {
    let compiled = CompiledFormula::new(&red.translated)?;
    let labels = compiled.label(model)?;
    let dag = compiled.dag();
    let diamonds = diamonds_by_side(dag, compiled.roots()[0], &red.symbols);
    let mut out = model.clone();
    let mut added = (0, 0);
    for (pair_index, pair) in red.symbols.iter().enumerate() {
        let r1 = model.relation(&pair.positive)?;
        let r2 = model.relation(&pair.negative)?;
        let accepts = |side: Side, t: &[World]| {
            diamonds.iter().filter(|d| d.1 == (pair_index, side)).all(|(id, _)| {
                let DagNode::Diamond(_, args) = dag.node(*id) else { unreachable!() };
                labels.get(*id).contains(t[0]) || !args.iter().zip(&t[1..]).all(|(a, &w)| labels.get(*a).contains(w))
            })
        };
        for t in all_tuples(pair.source.arity(), model.world_count()) {
            if r1.contains(&t) || r2.contains(&t) {
                continue;
            }
            if accepts(Side::Positive, &t) {
                out.add_tuple(&pair.positive, t)?;
                added.0 += 1;
            } else if accepts(Side::Negative, &t) {
                out.add_tuple(&pair.negative, t)?;
                added.1 += 1;
            } else {
                return Err(NegError::Covering { symbol: pair.source.name().to_string(), tuple: t });
            }
        }
    }
    Ok((out, added))
}

/// Doubles a completed model: `R₁` tuples yield successors in the other copy,
/// `R₂` tuples exclude the same-copy tuple, and everything else is in `R`
/// unless its base tuple is in `R₂`.
pub fn double_neg(red: &NegReduction, completed: &KripkeModel) -> Result<KripkeModel, NegError> {
    let n = completed.world_count();
    let mut out = KripkeModel::new(2 * n, red.source_vocab.clone())?;
    for pair in &red.symbols {
        let r1 = completed.relation(&pair.positive)?;
        let r2 = completed.relation(&pair.negative)?;
        let k = pair.source.arity();
        let mut tuples = Vec::new();
        for lifted in all_tuples(k, 2 * n) {
            let base: Vec<World> = lifted.iter().map(|&x| x / 2).collect();
            let copy: Vec<u32> = lifted.iter().map(|&x| x % 2).collect();
            let mixed = copy[1..].iter().all(|&i| i != copy[0]);
            let uniform = copy[1..].iter().all(|&i| i == copy[0]);
            let rule1 = mixed && r1.contains(&base);
            let rule2 = uniform && r2.contains(&base);
            if rule1 && rule2 {
                return Err(NegError::RuleConflict(lifted));
            }
            let include = if rule1 {
                true
            } else if rule2 {
                false
            } else {
                !r2.contains(&base)
            };
            if include {
                tuples.push(lifted);
            }
        }
        out.set_relation(&pair.source, TupleSet::from_tuples(k, tuples))?;
    }
    for (p, set) in completed.props() {
        let lifted = WorldSet::from_worlds(2 * n, set.iter().flat_map(|w| [2 * w, 2 * w + 1]));
        out.set_prop(p, lifted);
    }
    Ok(out)
}

/// Checks `𝔑,(w,i) ⊩ ψ ⟺ 𝔐,w ⊩ t(ψ)` for every subformula `ψ` of the source
/// and every doubled world; returns the number of comparisons.
pub fn transfer_check(red: &NegReduction, completed: &KripkeModel, doubled: &KripkeModel) -> Result<usize, NegError> {
    let subs = crate::formula::subformula_order(&red.source);
    let translated: Vec<Formula> = subs.iter().map(|s| red.translate(s)).collect::<Result<_, _>>()?;
    let on_doubled = CompiledFormula::many(&subs)?.label(doubled)?;
    let on_completed = CompiledFormula::many(&translated)?.label(completed)?;
    let mut checks = 0;
    for (i, psi) in subs.iter().enumerate() {
        for w in completed.worlds() {
            for copy in 0..2 {
                checks += 1;
                let left = on_doubled.root(i).contains(doubled_world(w, copy));
                let right = on_completed.root(i).contains(w);
                if left != right {
                    return Err(NegError::Construction(format!("transfer fails for `{psi}` at ({w},{copy})")));
                }
            }
        }
    }
    Ok(checks)
}

/// Completion, doubling, transfer check, and `φ` at `(w,0)`.
pub fn backward_model_neg(red: &NegReduction, model: &KripkeModel, w: World) -> Result<NegBackward, NegError> {
    let model = &model.over_vocabulary(&red.target_vocab)?;
    if !check_labeling(model, &red.theta)?.contains(w) {
        return Err(NegError::Precondition(w));
    }
    let (completed, added) = complete_neg(red, model)?;
    if !check_labeling(&completed, &red.translated)?.contains(w) {
        return Err(NegError::Construction(format!("t(φ) fails at {w} after completion")));
    }
    let doubled = double_neg(red, &completed)?;
    transfer_check(red, &completed, &doubled)?;
    let world = doubled_world(w, 0);
    if !check_labeling(&doubled, &red.source)?.contains(world) {
        return Err(NegError::Construction(format!("φ fails at ({w},0) in the doubled model")));
    }
    Ok(NegBackward { completed, doubled, world, added })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_naive;
    use crate::formula::parse_formula_infer;

    fn reduce(src: &str) -> NegReduction {
        reduce_neg(&parse_formula_infer(src).unwrap().0).unwrap()
    }

    #[test]
    fn negated_diamond_only_has_trivial_eta() {
        let red = reduce("<!R>(p)");
        assert_eq!(red.translated.to_string(), "<R_2>(p)");
        assert_eq!(red.eta, Formula::top());
        assert_eq!(red.theta.to_string(), "(<R_2>(p) & true)");
    }

    #[test]
    fn one_pair_gives_one_eta_conjunct() {
        let red = reduce("(<R>(p) & <!R>(q))");
        assert_eq!(red.eta_conjuncts, 1);
        assert_eq!(red.eta.to_string(), "(~<E> (~<R_1>(p) & ~<R_2>(q)) | [A] (~p | ~q))");
    }

    #[test]
    fn richer_terms_are_rejected() {
        let phi = parse_formula_infer("<(R & swp(R))>(p)").unwrap().0;
        assert_eq!(reduce_neg(&phi).unwrap_err(), NegError::Fragment("(R & swp(R))".into()));
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let red = reduce("(<R>(p) & <R_1>(p))");
        let names: Vec<String> = red.target_vocab.iter().map(|s| s.name().to_string()).collect();
        assert_eq!(names, ["R_3", "R_4", "R_1_1", "R_1_2"]);
    }

    #[test]
    fn forward_on_one_world_model() {
        let red = reduce("<!R>(p)");
        let m = KripkeModel::parse("worlds 1\nrel R/2\nprop p : 0\n").unwrap();
        let n = forward_model_neg(&red, &m, 0).unwrap();
        assert!(n.relation_by_name("R_1").unwrap().is_empty());
        assert_eq!(n.relation_by_name("R_2").unwrap().to_vec(), vec![vec![0, 0]]);
        assert!(check_naive(&n, &red.theta).unwrap().contains(0));
    }

    #[test]
    fn round_trip_through_doubling() {
        let red = reduce("<!R>(p)");
        let m = KripkeModel::parse("worlds 1\nrel R/2\nprop p : 0\n").unwrap();
        let n = forward_model_neg(&red, &m, 0).unwrap();
        let back = backward_model_neg(&red, &n, 0).unwrap();
        assert_eq!(back.added, (0, 0));
        assert_eq!(back.completed, n);
        assert!(check_naive(&back.doubled, &red.source).unwrap().contains(0));
    }

    #[test]
    fn completion_fills_uncovered_tuples() {
        let red = reduce("(<R>(p) & <!R>(q))");
        // R_1 and R_2 both empty except what θ needs
        let m = KripkeModel::parse("worlds 2\nrel R_1/2 : (0,0)\nrel R_2/2 : (0,1)\nprop p : 0\nprop q : 1\n").unwrap();
        assert!(check_naive(&m, &red.theta).unwrap().contains(0));
        let back = backward_model_neg(&red, &m, 0).unwrap();
        assert_eq!(back.added.0 + back.added.1, 2);
        assert!(check_naive(&back.doubled, &red.source).unwrap().contains(back.world));
    }
}
