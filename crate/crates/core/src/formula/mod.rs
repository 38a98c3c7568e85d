//! Modal formulas: AST, concrete syntax, subformulas and window elimination.

mod dag;
mod parse;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{RelationSymbol, Term, TermError, Vocabulary};

pub use dag::{DagNode, FormulaDag, NodeId};
pub use parse::{parse_formula, parse_formula_infer, parse_term, MAX_NESTING};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("column {column}: undeclared relation symbol `{name}`")]
    UndeclaredSymbol { column: usize, name: String },
    #[error("column {column}: modality over `{term}` has arity {arity} but binds {args} formulas")]
    ModalityArity { column: usize, term: String, arity: usize, args: usize },
    #[error("relation symbol `{name}` used with arities {first} and {second}")]
    ConflictingArity { name: String, first: usize, second: usize },
    #[error("column {column}: nesting deeper than {limit}")]
    TooDeep { column: usize, limit: usize },
    #[error("modality over `{term}` of arity {arity} cannot bind {args} formulas")]
    Arity { term: String, arity: usize, args: usize },
    #[error(transparent)]
    Term(#[from] TermError),
}

/// A modal formula. Cloning is cheap: subtrees are shared.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Top,
    Bottom,
    Prop(Arc<str>),
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    /// `⟨ℛ⟩(ψ₁,…,ψ_k)` with `ℛ` of arity `k+1`.
    Diamond(Term, Vec<Formula>),
    /// `[ℛ](ψ₁,…,ψ_k)`, short for `¬⟨ℛ⟩(¬ψ₁,…,¬ψ_k)`.
    Box(Term, Vec<Formula>),
    /// `⟨E⟩ψ`: ψ holds somewhere.
    Exists(Formula),
    /// `[A]ψ`: ψ holds everywhere.
    Forall(Formula),
    /// `∇_R(ψ₁,…,ψ_k)`: every tuple of worlds satisfying the arguments is an
    /// `R`-successor tuple.
    Window(RelationSymbol, Vec<Formula>),
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Formula {}

impl std::hash::Hash for Formula {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

fn check_modal_arity(term: &Term, args: usize) -> Result<(), FormulaError> {
    let arity = term.arity()?;
    if arity != args + 1 {
        return Err(FormulaError::Arity { term: term.to_string(), arity, args });
    }
    Ok(())
}

impl Formula {
    fn from_node(node: Node) -> Self {
        Formula(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn as_ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn top() -> Self {
        Self::from_node(Node::Top)
    }

    pub fn bottom() -> Self {
        Self::from_node(Node::Bottom)
    }

    pub fn prop(name: impl Into<Arc<str>>) -> Self {
        Self::from_node(Node::Prop(name.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Self::from_node(Node::Not(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Self::from_node(Node::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Self::from_node(Node::Or(a, b))
    }

    /// `a → b` as `¬a ∨ b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::or(Self::not(a), b)
    }

    /// `a ↔ b` as `(a → b) ∧ (b → a)`.
    pub fn iff(a: Formula, b: Formula) -> Self {
        Self::and(Self::implies(a.clone(), b.clone()), Self::implies(b, a))
    }

    pub fn diamond(term: Term, args: Vec<Formula>) -> Result<Self, FormulaError> {
        check_modal_arity(&term, args.len())?;
        Ok(Self::from_node(Node::Diamond(term, args)))
    }

    pub fn boxed(term: Term, args: Vec<Formula>) -> Result<Self, FormulaError> {
        check_modal_arity(&term, args.len())?;
        Ok(Self::from_node(Node::Box(term, args)))
    }

    pub fn exists(f: Formula) -> Self {
        Self::from_node(Node::Exists(f))
    }

    pub fn forall(f: Formula) -> Self {
        Self::from_node(Node::Forall(f))
    }

    pub fn window(symbol: RelationSymbol, args: Vec<Formula>) -> Result<Self, FormulaError> {
        if symbol.arity() != args.len() + 1 {
            return Err(FormulaError::Arity {
                term: symbol.name().to_string(),
                arity: symbol.arity(),
                args: args.len(),
            });
        }
        Ok(Self::from_node(Node::Window(symbol, args)))
    }

    /// Balanced conjunction; `⊤` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Self {
        let items: Vec<Formula> = items.into_iter().collect();
        balanced(&items, Self::and).unwrap_or_else(Self::top)
    }

    /// Balanced disjunction; `⊥` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Self {
        let items: Vec<Formula> = items.into_iter().collect();
        balanced(&items, Self::or).unwrap_or_else(Self::bottom)
    }

    /// Number of nodes of the formula tree, counting term nodes.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Top | Node::Bottom | Node::Prop(_) => 1,
            Node::Not(f) | Node::Exists(f) | Node::Forall(f) => 1 + f.size(),
            Node::And(a, b) | Node::Or(a, b) => 1 + a.size() + b.size(),
            Node::Diamond(t, args) | Node::Box(t, args) => 1 + t.size() + args.iter().map(Formula::size).sum::<usize>(),
            Node::Window(_, args) => 2 + args.iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Nesting depth of relational modalities; `⟨E⟩` and `[A]` do not count.
    pub fn modal_depth(&self) -> usize {
        match self.node() {
            Node::Top | Node::Bottom | Node::Prop(_) => 0,
            Node::Not(f) | Node::Exists(f) | Node::Forall(f) => f.modal_depth(),
            Node::And(a, b) | Node::Or(a, b) => a.modal_depth().max(b.modal_depth()),
            Node::Diamond(_, args) | Node::Box(_, args) | Node::Window(_, args) => {
                1 + args.iter().map(Formula::modal_depth).max().unwrap_or(0)
            }
        }
    }

    /// Proposition names in order of first occurrence.
    pub fn props(&self) -> Vec<Arc<str>> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.visit(&mut |f| {
            if let Node::Prop(p) = f.node() {
                if seen.insert(p.clone()) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    /// Relation symbols in order of first occurrence, including those of
    /// window operators.
    pub fn symbols(&self) -> Vec<RelationSymbol> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f.node() {
            Node::Diamond(t, _) | Node::Box(t, _) => t.collect_symbols(&mut out),
            Node::Window(s, _) if !out.contains(s) => out.push(s.clone()),
            _ => {}
        });
        out
    }

    /// Calls `f` once per distinct shared node, children first.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        let mut seen = HashSet::new();
        self.visit_rec(&mut seen, f);
    }

    fn visit_rec(&self, seen: &mut HashSet<*const Node>, f: &mut impl FnMut(&Formula)) {
        if !seen.insert(self.as_ptr()) {
            return;
        }
        for child in self.children() {
            child.visit_rec(seen, f);
        }
        f(self);
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self.node() {
            Node::Top | Node::Bottom | Node::Prop(_) => Vec::new(),
            Node::Not(f) | Node::Exists(f) | Node::Forall(f) => vec![f],
            Node::And(a, b) | Node::Or(a, b) => vec![a, b],
            Node::Diamond(_, args) | Node::Box(_, args) | Node::Window(_, args) => args.iter().collect(),
        }
    }

    pub fn contains_window(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f.node(), Node::Window(..)));
        found
    }
}

fn balanced(items: &[Formula], join: fn(Formula, Formula) -> Formula) -> Option<Formula> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (l, r) = items.split_at(n / 2);
            Some(join(balanced(l, join)?, balanced(r, join)?))
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Formula]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Top => f.write_str("true"),
            Node::Bottom => f.write_str("false"),
            Node::Prop(p) => f.write_str(p),
            Node::Not(a) => write!(f, "~{a}"),
            Node::And(a, b) => write!(f, "({a} & {b})"),
            Node::Or(a, b) => write!(f, "({a} | {b})"),
            Node::Diamond(t, args) => {
                write!(f, "<{t}>")?;
                write_args(f, args)
            }
            Node::Box(t, args) => {
                write!(f, "[{t}]")?;
                write_args(f, args)
            }
            Node::Exists(a) => write!(f, "<E> {a}"),
            Node::Forall(a) => write!(f, "[A] {a}"),
            Node::Window(s, args) => {
                write!(f, "win_{}", s.name())?;
                write_args(f, args)
            }
        }
    }
}

/// All distinct subformulas, every proper subformula before the formulas
/// containing it.
pub fn subformula_order(phi: &Formula) -> Vec<Formula> {
    let mut dag = FormulaDag::new();
    let root = dag.intern(phi);
    (0..=root.index()).map(|i| dag.to_formula(NodeId::from_index(i))).collect()
}

/// Replaces every `∇_R(ψ⃗)` with `[¬R](¬ψ⃗)`.
pub fn eliminate_window(phi: &Formula) -> Formula {
    let mut memo = std::collections::HashMap::new();
    eliminate_rec(phi, &mut memo)
}

fn eliminate_rec(phi: &Formula, memo: &mut std::collections::HashMap<*const Node, Formula>) -> Formula {
    if let Some(done) = memo.get(&phi.as_ptr()) {
        return done.clone();
    }
    let map =
        |args: &[Formula], memo: &mut _| -> Vec<Formula> { args.iter().map(|a| eliminate_rec(a, memo)).collect() };
    let out = match phi.node() {
        Node::Top | Node::Bottom | Node::Prop(_) => phi.clone(),
        Node::Not(a) => Formula::not(eliminate_rec(a, memo)),
        Node::And(a, b) => Formula::and(eliminate_rec(a, memo), eliminate_rec(b, memo)),
        Node::Or(a, b) => Formula::or(eliminate_rec(a, memo), eliminate_rec(b, memo)),
        Node::Exists(a) => Formula::exists(eliminate_rec(a, memo)),
        Node::Forall(a) => Formula::forall(eliminate_rec(a, memo)),
        Node::Diamond(t, args) => Formula::from_node(Node::Diamond(t.clone(), map(args, memo))),
        Node::Box(t, args) => Formula::from_node(Node::Box(t.clone(), map(args, memo))),
        Node::Window(s, args) => {
            let negated = map(args, memo).into_iter().map(Formula::not).collect();
            Formula::from_node(Node::Box(Term::not(Term::symbol(s.clone())), negated))
        }
    };
    memo.insert(phi.as_ptr(), out.clone());
    out
}

/// Whether every symbol of the formula is declared in `vocab` with its arity.
pub fn check_vocabulary(phi: &Formula, vocab: &Vocabulary) -> Result<(), TermError> {
    for s in phi.symbols() {
        match vocab.get(s.name()) {
            Some(d) if d.arity() == s.arity() => {}
            Some(d) => return Err(TermError::ArityMismatch { left: d.arity(), right: s.arity() }),
            None => return Err(TermError::UnknownSymbol(s.name().to_string())),
        }
    }
    Ok(())
}
