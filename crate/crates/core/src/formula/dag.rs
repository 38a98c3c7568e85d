use std::collections::HashMap;
use std::sync::Arc;

use crate::term::{RelationSymbol, Term};

use super::{Formula, Node};

/// Index of a node in a [`FormulaDag`]. Children always have smaller indices
/// than their parents.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("formula DAG exceeds u32 nodes"))
    }
}

/// A hash-consed formula node whose children are node ids.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum DagNode {
    Top,
    Bottom,
    Prop(Arc<str>),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Diamond(Term, Vec<NodeId>),
    Box(Term, Vec<NodeId>),
    Exists(NodeId),
    Forall(NodeId),
    Window(RelationSymbol, Vec<NodeId>),
}

/// Interns formulas into a DAG of structurally distinct nodes in dependency
/// order.
///
/// In desugaring mode `∨`, `[ℛ]`, `[A]` and `∇_R` are rewritten on the fly to
/// `¬`, `∧`, `⟨ℛ⟩` and `⟨E⟩`, so only `⊤`, `⊥`, propositions, `¬`, `∧`,
/// diamonds and `⟨E⟩` remain.
#[derive(Default)]
pub struct FormulaDag {
    nodes: Vec<DagNode>,
    index: HashMap<DagNode, NodeId>,
    by_ptr: HashMap<*const Node, NodeId>,
    // keeps interned formulas alive so cached pointers stay unique
    pinned: Vec<Formula>,
    rebuilt: Vec<Option<Formula>>,
    desugar: bool,
}

impl FormulaDag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn desugaring() -> Self {
        Self { desugar: true, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &DagNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn add(&mut self, node: DagNode) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId::from_index(self.nodes.len());
        self.nodes.push(node.clone());
        self.rebuilt.push(None);
        self.index.insert(node, id);
        id
    }

    pub fn intern(&mut self, phi: &Formula) -> NodeId {
        if let Some(&id) = self.by_ptr.get(&phi.as_ptr()) {
            return id;
        }
        let id = self.intern_node(phi);
        self.by_ptr.insert(phi.as_ptr(), id);
        self.pinned.push(phi.clone());
        id
    }

    fn not(&mut self, a: NodeId) -> NodeId {
        self.add(DagNode::Not(a))
    }

    fn intern_node(&mut self, phi: &Formula) -> NodeId {
        let args = |dag: &mut Self, args: &[Formula]| -> Vec<NodeId> { args.iter().map(|a| dag.intern(a)).collect() };
        match phi.node() {
            Node::Top => self.add(DagNode::Top),
            Node::Bottom => self.add(DagNode::Bottom),
            Node::Prop(p) => self.add(DagNode::Prop(p.clone())),
            Node::Not(a) => {
                let a = self.intern(a);
                self.not(a)
            }
            Node::And(a, b) => {
                let (a, b) = (self.intern(a), self.intern(b));
                self.add(DagNode::And(a, b))
            }
            Node::Or(a, b) => {
                let (a, b) = (self.intern(a), self.intern(b));
                if self.desugar {
                    let (na, nb) = (self.not(a), self.not(b));
                    let both = self.add(DagNode::And(na, nb));
                    self.not(both)
                } else {
                    self.add(DagNode::Or(a, b))
                }
            }
            Node::Diamond(t, xs) => {
                let xs = args(self, xs);
                self.add(DagNode::Diamond(t.clone(), xs))
            }
            Node::Box(t, xs) => {
                let xs = args(self, xs);
                if self.desugar {
                    let negated = xs.into_iter().map(|x| self.not(x)).collect();
                    let d = self.add(DagNode::Diamond(t.clone(), negated));
                    self.not(d)
                } else {
                    self.add(DagNode::Box(t.clone(), xs))
                }
            }
            Node::Exists(a) => {
                let a = self.intern(a);
                self.add(DagNode::Exists(a))
            }
            Node::Forall(a) => {
                let a = self.intern(a);
                if self.desugar {
                    let na = self.not(a);
                    let e = self.add(DagNode::Exists(na));
                    self.not(e)
                } else {
                    self.add(DagNode::Forall(a))
                }
            }
            Node::Window(s, xs) => {
                let xs = args(self, xs);
                if self.desugar {
                    // ∇_R(ψ⃗) = [¬R](¬ψ⃗) = ¬⟨¬R⟩(¬¬ψ⃗)
                    let inner = xs
                        .into_iter()
                        .map(|x| {
                            let n = self.not(x);
                            self.not(n)
                        })
                        .collect();
                    let d = self.add(DagNode::Diamond(Term::not(Term::symbol(s.clone())), inner));
                    self.not(d)
                } else {
                    self.add(DagNode::Window(s.clone(), xs))
                }
            }
        }
    }

    /// Rebuilds the formula of a node; shared nodes give shared subtrees.
    pub fn to_formula(&mut self, id: NodeId) -> Formula {
        if let Some(f) = &self.rebuilt[id.index()] {
            return f.clone();
        }
        let node = self.nodes[id.index()].clone();
        let args =
            |dag: &mut Self, ids: &[NodeId]| -> Vec<Formula> { ids.iter().map(|&i| dag.to_formula(i)).collect() };
        let f = match &node {
            DagNode::Top => Formula::top(),
            DagNode::Bottom => Formula::bottom(),
            DagNode::Prop(p) => Formula::prop(p.clone()),
            DagNode::Not(a) => Formula::not(self.to_formula(*a)),
            DagNode::And(a, b) => Formula::and(self.to_formula(*a), self.to_formula(*b)),
            DagNode::Or(a, b) => Formula::or(self.to_formula(*a), self.to_formula(*b)),
            DagNode::Exists(a) => Formula::exists(self.to_formula(*a)),
            DagNode::Forall(a) => Formula::forall(self.to_formula(*a)),
            DagNode::Diamond(t, xs) => Formula::from_node(Node::Diamond(t.clone(), args(self, xs))),
            DagNode::Box(t, xs) => Formula::from_node(Node::Box(t.clone(), args(self, xs))),
            DagNode::Window(s, xs) => Formula::from_node(Node::Window(s.clone(), args(self, xs))),
        };
        self.rebuilt[id.index()] = Some(f.clone());
        f
    }

    /// The ids of `root` and everything below it, in dependency order.
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut mark = vec![false; root.index() + 1];
        mark[root.index()] = true;
        for i in (0..=root.index()).rev() {
            if !mark[i] {
                continue;
            }
            for c in children(&self.nodes[i]) {
                mark[c.index()] = true;
            }
        }
        (0..=root.index()).filter(|&i| mark[i]).map(NodeId::from_index).collect()
    }
}

pub(crate) fn children(node: &DagNode) -> Vec<NodeId> {
    match node {
        DagNode::Top | DagNode::Bottom | DagNode::Prop(_) => Vec::new(),
        DagNode::Not(a) | DagNode::Exists(a) | DagNode::Forall(a) => vec![*a],
        DagNode::And(a, b) | DagNode::Or(a, b) => vec![*a, *b],
        DagNode::Diamond(_, xs) | DagNode::Box(_, xs) | DagNode::Window(_, xs) => xs.clone(),
    }
}
