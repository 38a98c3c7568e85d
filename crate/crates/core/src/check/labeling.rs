use std::cmp::Ordering;
use std::collections::HashMap;

use crate::formula::{DagNode, Formula, FormulaDag, NodeId};
use crate::model::{KripkeModel, TupleSet, World, WorldSet};
use crate::term::{eval_term, normalize_term, NormalizedTerm, Term};

use super::CheckError;

/// Counters of the negated-diamond loop.
///
/// For a diamond `⟨¬ℛ″⟩` and a world `w` the loop probes product tuples until
/// one lies outside `⟦ℛ″⟧`; every probe that does not stop it matches a
/// distinct tuple of `⟦ℛ″⟧` starting with `w`, so probes never exceed that
/// row count plus one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProbeStats {
    pub total_probes: u64,
    pub max_probes_per_world: u64,
    /// Largest `|⟦ℛ″⟧|` over the negated diamonds.
    pub max_relation_size: u64,
    /// Number of (diamond, world) pairs whose probes exceeded the rows of
    /// `⟦ℛ″⟧` at that world plus one.
    pub bound_violations: u64,
}

impl ProbeStats {
    pub fn bound_holds(&self) -> bool {
        self.bound_violations == 0
    }
}

/// A formula (or several) prepared for labeling: desugared to `⊤`, `⊥`,
/// propositions, `¬`, `∧`, diamonds and `⟨E⟩`, hash-consed, and with every
/// diamond term normalized to `ℛ″` or `¬ℛ″`.
pub struct CompiledFormula {
    dag: FormulaDag,
    roots: Vec<NodeId>,
    terms: HashMap<NodeId, NormalizedTerm>,
}

/// Truth sets of all nodes of a compiled formula, by node id.
#[derive(Clone, Debug)]
pub struct Labeling {
    sets: Vec<WorldSet>,
    roots: Vec<NodeId>,
    pub stats: ProbeStats,
}

impl Labeling {
    pub fn get(&self, id: NodeId) -> &WorldSet {
        &self.sets[id.index()]
    }

    /// The truth set of the `i`-th compiled root.
    pub fn root(&self, i: usize) -> &WorldSet {
        &self.sets[self.roots[i].index()]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

impl CompiledFormula {
    pub fn new(phi: &Formula) -> Result<Self, CheckError> {
        Self::many(std::slice::from_ref(phi))
    }

    /// Compiles several formulas into one shared DAG.
    pub fn many(formulas: &[Formula]) -> Result<Self, CheckError> {
        let mut dag = FormulaDag::desugaring();
        let roots: Vec<NodeId> = formulas.iter().map(|f| dag.intern(f)).collect();
        let mut terms = HashMap::new();
        let mut by_term: HashMap<Term, NormalizedTerm> = HashMap::new();
        for (i, node) in dag.nodes().iter().enumerate() {
            if let DagNode::Diamond(t, _) = node {
                let n = match by_term.get(t) {
                    Some(n) => n.clone(),
                    None => {
                        let n = normalize_term(t)?;
                        by_term.insert(t.clone(), n.clone());
                        n
                    }
                };
                terms.insert(NodeId::from_index(i), n);
            }
        }
        Ok(Self { dag, roots, terms })
    }

    pub fn dag(&self) -> &FormulaDag {
        &self.dag
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    /// The truth set of the first root.
    pub fn eval(&self, model: &KripkeModel) -> Result<WorldSet, CheckError> {
        Ok(self.label(model)?.root(0).clone())
    }

    /// Labels every node in dependency order.
    pub fn label(&self, model: &KripkeModel) -> Result<Labeling, CheckError> {
        let n = model.world_count();
        let mut sets: Vec<WorldSet> = Vec::with_capacity(self.dag.len());
        let mut stats = ProbeStats::default();
        let mut materialized: HashMap<&Term, TupleSet> = HashMap::new();
        for (i, node) in self.dag.nodes().iter().enumerate() {
            let set = match node {
                DagNode::Top => WorldSet::full(n),
                DagNode::Bottom => WorldSet::empty(n),
                DagNode::Prop(p) => model.prop(p),
                DagNode::Not(a) => sets[a.index()].complement(),
                DagNode::And(a, b) => sets[a.index()].intersect(&sets[b.index()]),
                DagNode::Exists(a) => {
                    if sets[a.index()].is_empty() {
                        WorldSet::empty(n)
                    } else {
                        WorldSet::full(n)
                    }
                }
                DagNode::Diamond(_, args) => {
                    let term = &self.terms[&NodeId::from_index(i)];
                    if !materialized.contains_key(&term.body) {
                        materialized.insert(&term.body, eval_term(&term.body, model)?);
                    }
                    let body = &materialized[&term.body];
                    let args: Vec<&WorldSet> = args.iter().map(|a| &sets[a.index()]).collect();
                    if term.negated {
                        negated_diamond(n, body, &args, &mut stats)
                    } else {
                        positive_diamond(n, body, &args)
                    }
                }
                DagNode::Or(..) | DagNode::Box(..) | DagNode::Forall(..) | DagNode::Window(..) => {
                    unreachable!("desugared away")
                }
            };
            sets.push(set);
        }
        Ok(Labeling { sets, roots: self.roots.clone(), stats })
    }
}

/// `⟨ℛ″⟧`: scan the materialized relation once.
fn positive_diamond(n: usize, body: &TupleSet, args: &[&WorldSet]) -> WorldSet {
    let mut out = WorldSet::empty(n);
    for t in body {
        if args.iter().zip(&t[1..]).all(|(set, &w)| set.contains(w)) {
            out.insert(t[0]);
        }
    }
    out
}

/// `⟨¬ℛ″⟩`: for each world walk the argument product in lexicographic order
/// with one cursor per argument, alongside the sorted rows of `⟦ℛ″⟧` at that
/// world, and stop at the first product tuple missing from the rows.
fn negated_diamond(n: usize, body: &TupleSet, args: &[&WorldSet], stats: &mut ProbeStats) -> WorldSet {
    let mut out = WorldSet::empty(n);
    stats.max_relation_size = stats.max_relation_size.max(body.len() as u64);
    let lists: Vec<Vec<World>> = args.iter().map(|s| s.to_vec()).collect();
    if lists.iter().any(Vec::is_empty) {
        return out;
    }
    let k = lists.len();
    let mut cursors = vec![0usize; k];
    for w in 0..n as World {
        let rows = body.starting_with(w);
        let mut row = 0usize;
        let mut probes = 0u64;
        cursors.iter_mut().for_each(|c| *c = 0);
        let found = loop {
            probes += 1;
            // skip rows below the current product tuple
            let cmp = loop {
                match rows.get(row) {
                    None => break Ordering::Less,
                    Some(r) => {
                        let ord = compare_row(&r[1..], &lists, &cursors);
                        if ord == Ordering::Less {
                            row += 1;
                        } else {
                            break ord;
                        }
                    }
                }
            };
            if cmp != Ordering::Equal {
                break true;
            }
            row += 1;
            if !advance_cursors(&mut cursors, &lists) {
                break false;
            }
        };
        if found {
            out.insert(w);
        }
        stats.total_probes += probes;
        stats.max_probes_per_world = stats.max_probes_per_world.max(probes);
        if probes > rows.len() as u64 + 1 {
            stats.bound_violations += 1;
        }
    }
    out
}

fn compare_row(row: &[World], lists: &[Vec<World>], cursors: &[usize]) -> Ordering {
    for (i, &w) in row.iter().enumerate() {
        match w.cmp(&lists[i][cursors[i]]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn advance_cursors(cursors: &mut [usize], lists: &[Vec<World>]) -> bool {
    for i in (0..cursors.len()).rev() {
        cursors[i] += 1;
        if cursors[i] < lists[i].len() {
            return true;
        }
        cursors[i] = 0;
    }
    false
}

/// The truth set of `phi` by the labeling algorithm.
pub fn check_labeling(model: &KripkeModel, phi: &Formula) -> Result<WorldSet, CheckError> {
    CompiledFormula::new(phi)?.eval(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_naive;
    use crate::formula::parse_formula;
    use crate::model::random_model;
    use crate::term::Vocabulary;

    fn model() -> KripkeModel {
        KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\nprop p : 1\n").unwrap()
    }

    fn both(m: &KripkeModel, src: &str) -> (Vec<World>, Vec<World>) {
        let phi = parse_formula(src, m.vocab()).unwrap();
        (check_labeling(m, &phi).unwrap().to_vec(), check_naive(m, &phi).unwrap().to_vec())
    }

    #[test]
    fn agrees_with_the_oracle_on_the_small_model() {
        let m = model();
        for src in ["<R>(p)", "<!R>(p)", "<E> p", "[A] p", "[R](~p)", "win_R(p)", "(p | ~<!R>(p))"] {
            let (lab, naive) = both(&m, src);
            assert_eq!(lab, naive, "{src}");
        }
    }

    #[test]
    fn total_relation_sentence_holds_on_reflexive_singleton() {
        let m = KripkeModel::parse("worlds 1\nrel R/2 : (0,0)\n").unwrap();
        let (lab, naive) = both(&m, "([R]([!R](false)) & [!R]([!R](false)))");
        assert_eq!(naive, vec![0]);
        assert_eq!(lab, naive);
    }

    #[test]
    fn negated_intersection_on_random_model() {
        let vocab = Vocabulary::parse("R/2").unwrap();
        let m = random_model(11, 3, &vocab, 0.5, &["p"]);
        let (lab, naive) = both(&m, "<!(R & swp(R))>(p)");
        assert_eq!(lab, naive);
    }

    #[test]
    fn probe_bound_holds_on_dense_relation() {
        let vocab = Vocabulary::parse("T/3").unwrap();
        let m = random_model(5, 4, &vocab, 0.9, &["p", "q"]);
        let phi = parse_formula("<!T>(p, q)", &vocab).unwrap();
        let lab = CompiledFormula::new(&phi).unwrap().label(&m).unwrap();
        assert!(lab.stats.bound_holds());
        assert!(lab.stats.max_probes_per_world <= lab.stats.max_relation_size + 1);
        assert_eq!(lab.root(0), &check_naive(&m, &phi).unwrap());
    }

    #[test]
    fn several_roots_share_one_pass() {
        let m = model();
        let phis = [parse_formula("<R>(p)", m.vocab()).unwrap(), parse_formula("~<R>(p)", m.vocab()).unwrap()];
        let lab = CompiledFormula::many(&phis).unwrap().label(&m).unwrap();
        assert_eq!(lab.root(0).to_vec(), vec![0]);
        assert_eq!(lab.root(1).to_vec(), vec![1]);
    }
}
