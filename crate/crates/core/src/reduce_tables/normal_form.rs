use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::formula::{check_vocabulary, eliminate_window, Formula, Node};
use crate::term::{enumerate_tables, table_entails, to_literal_form, Table, Term, Vocabulary};

use super::{TableConfig, TableError};

/// A formula in table normal form together with its fresh propositions.
#[derive(Clone, Debug)]
pub struct StarForm {
    /// `φ*`: the rewritten body conjoined with one guard per fresh
    /// proposition.
    pub formula: Formula,
    /// The rewritten body alone.
    pub body: Formula,
    /// `(p_ψ, ψ)` in creation order; every `ψ` only mentions earlier fresh
    /// propositions.
    pub fresh: Vec<(Arc<str>, Formula)>,
    pub vocab: Vocabulary,
}

/// Rewrites every modality into a disjunction (or for boxes, conjunction) of
/// modalities over single tables. Non-propositional arguments are replaced by
/// fresh propositions `_f<N>`, each tied to its formula by
/// `⋀_ρ [ρ](p ↔ ψ)` over the binary tables; propositional arguments are kept.
pub fn table_normal_form(
    phi: &Formula,
    vocab: Option<&Vocabulary>,
    config: &TableConfig,
) -> Result<StarForm, TableError> {
    let phi = eliminate_window(phi);
    let vocab = match vocab {
        Some(v) => {
            check_vocabulary(&phi, v).map_err(|e| match e {
                crate::term::TermError::UnknownSymbol(s) => TableError::UnknownSymbol(s),
                other => TableError::Term(other),
            })?;
            v.clone()
        }
        None => Vocabulary::new(phi.symbols())?,
    };
    if vocab.len() > config.max_symbols {
        return Err(TableError::TooManySymbols { found: vocab.len(), cap: config.max_symbols });
    }
    if vocab.of_arity(2).is_empty() {
        return Err(TableError::NoBinarySymbol);
    }
    let taken: HashSet<Arc<str>> = phi.props().into_iter().collect();
    let mut state = State {
        vocab: &vocab,
        tables: HashMap::new(),
        fresh: Vec::new(),
        fresh_of: HashMap::new(),
        taken,
        next: 0,
        memo: HashMap::new(),
    };
    let body = state.rewrite(&phi)?;
    let binary = state.tables_of(2)?;
    let mut guards = Vec::new();
    for (p, psi) in &state.fresh {
        for rho in &binary {
            let link = Formula::iff(Formula::prop(p.clone()), psi.clone());
            guards.push(Formula::boxed(rho.to_term(), vec![link])?);
        }
    }
    let formula = if guards.is_empty() { body.clone() } else { Formula::and(body.clone(), Formula::conj(guards)) };
    Ok(StarForm { formula, body, fresh: state.fresh, vocab })
}

struct State<'a> {
    vocab: &'a Vocabulary,
    tables: HashMap<usize, Vec<Table>>,
    fresh: Vec<(Arc<str>, Formula)>,
    fresh_of: HashMap<Formula, Arc<str>>,
    taken: HashSet<Arc<str>>,
    next: usize,
    memo: HashMap<*const Node, Formula>,
}

impl State<'_> {
    fn tables_of(&mut self, k: usize) -> Result<Vec<Table>, TableError> {
        if let Some(t) = self.tables.get(&k) {
            return Ok(t.clone());
        }
        let t = enumerate_tables(self.vocab, k)?;
        self.tables.insert(k, t.clone());
        Ok(t)
    }

    fn wrap(&mut self, psi: Formula) -> Formula {
        if let Node::Prop(_) = psi.node() {
            return psi;
        }
        if let Some(p) = self.fresh_of.get(&psi) {
            return Formula::prop(p.clone());
        }
        let name: Arc<str> = loop {
            let candidate: Arc<str> = format!("_f{}", self.next).into();
            self.next += 1;
            if !self.taken.contains(&candidate) {
                break candidate;
            }
        };
        self.fresh.push((name.clone(), psi.clone()));
        self.fresh_of.insert(psi, name.clone());
        Formula::prop(name)
    }

    fn entailing(&mut self, term: &Term) -> Result<Vec<Table>, TableError> {
        let literal = to_literal_form(term)?;
        let mut out = Vec::new();
        for rho in self.tables_of(term.arity()?)? {
            if table_entails(&rho, &literal)? {
                out.push(rho);
            }
        }
        Ok(out)
    }

    fn rewrite(&mut self, phi: &Formula) -> Result<Formula, TableError> {
        if let Some(done) = self.memo.get(&phi.as_ptr()) {
            return Ok(done.clone());
        }
        let out = match phi.node() {
            Node::Top | Node::Bottom | Node::Prop(_) => phi.clone(),
            Node::Not(a) => Formula::not(self.rewrite(a)?),
            Node::And(a, b) => Formula::and(self.rewrite(a)?, self.rewrite(b)?),
            Node::Or(a, b) => Formula::or(self.rewrite(a)?, self.rewrite(b)?),
            Node::Exists(a) => Formula::exists(self.rewrite(a)?),
            Node::Forall(a) => Formula::forall(self.rewrite(a)?),
            Node::Diamond(t, args) | Node::Box(t, args) => {
                let mut wrapped = Vec::with_capacity(args.len());
                for a in args {
                    let a = self.rewrite(a)?;
                    wrapped.push(self.wrap(a));
                }
                let tables = self.entailing(t)?;
                if let Node::Diamond(..) = phi.node() {
                    let parts = tables
                        .iter()
                        .map(|rho| Formula::diamond(rho.to_term(), wrapped.clone()))
                        .collect::<Result<Vec<_>, _>>()?;
                    Formula::disj(parts)
                } else {
                    let parts = tables
                        .iter()
                        .map(|rho| Formula::boxed(rho.to_term(), wrapped.clone()))
                        .collect::<Result<Vec<_>, _>>()?;
                    Formula::conj(parts)
                }
            }
            Node::Window(..) => unreachable!("windows are eliminated first"),
        };
        self.memo.insert(phi.as_ptr(), out.clone());
        Ok(out)
    }
}

/// Whether every modality term of `phi` is a single table over `vocab`.
pub fn is_table_shaped(phi: &Formula, vocab: &Vocabulary) -> bool {
    let mut ok = true;
    phi.visit(&mut |f| match f.node() {
        Node::Diamond(t, _) | Node::Box(t, _) => ok &= Table::from_term(t, vocab).is_some(),
        Node::Window(..) => ok = false,
        _ => {}
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula_infer;

    fn star(src: &str) -> StarForm {
        let phi = parse_formula_infer(src).unwrap().0;
        table_normal_form(&phi, None, &TableConfig::default()).unwrap()
    }

    #[test]
    fn intersection_with_swap_keeps_one_table() {
        let s = star("<(R & swp(R))>(q)");
        assert_eq!(s.formula.to_string(), "<(R & rot(R))>(q)");
        assert!(s.fresh.is_empty());
        assert!(is_table_shaped(&s.formula, &s.vocab));
    }

    #[test]
    fn plain_symbol_splits_into_two_tables() {
        let s = star("<R>(q)");
        assert_eq!(s.formula.to_string(), "(<(R & rot(R))>(q) | <(R & !rot(R))>(q))");
    }

    #[test]
    fn compound_argument_gets_a_guarded_fresh_prop() {
        let s = star("<R>((q & r))");
        assert_eq!(s.fresh.len(), 1);
        assert_eq!(&*s.fresh[0].0, "_f0");
        assert_eq!(s.fresh[0].1.to_string(), "(q & r)");
        // one guard per binary table
        let Node::And(_, guards) = s.formula.node() else { panic!() };
        let mut boxes = 0;
        guards.visit(&mut |f| boxes += usize::from(matches!(f.node(), Node::Box(..))));
        assert_eq!(boxes, 4);
        assert!(is_table_shaped(&s.formula, &s.vocab));
    }

    #[test]
    fn fresh_names_skip_existing_props() {
        let s = star("<R>((_f0 & q))");
        assert_eq!(&*s.fresh[0].0, "_f1");
    }

    #[test]
    fn unsatisfiable_term_gives_bottom() {
        let s = star("<(R & !R)>(q)");
        assert_eq!(s.formula, Formula::bottom());
        let s = star("[(R & !R)](q)");
        assert_eq!(s.formula, Formula::top());
    }

    #[test]
    fn vocabulary_preconditions() {
        let phi = parse_formula_infer("<T>(q, q)").unwrap().0;
        let err = table_normal_form(&phi, None, &TableConfig::default()).unwrap_err();
        assert_eq!(err, TableError::NoBinarySymbol);
        let phi = parse_formula_infer("(<R>(q) & (<S>(q) & <U>(q)))").unwrap().0;
        let err = table_normal_form(&phi, None, &TableConfig::default()).unwrap_err();
        assert_eq!(err, TableError::TooManySymbols { found: 3, cap: 2 });
    }
}
