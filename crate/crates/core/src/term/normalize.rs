use std::fmt;

use super::{generator_word, Permutation, Term, TermError};

/// A term with all negations pulled to the root: either `body` or `¬body`
/// where `body` is built from symbols, permutations, `∩`, `\` and `∪` only.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NormalizedTerm {
    pub negated: bool,
    pub body: Term,
}

impl NormalizedTerm {
    fn pos(body: Term) -> Self {
        Self { negated: false, body }
    }

    fn neg(body: Term) -> Self {
        Self { negated: true, body }
    }

    pub fn into_term(self) -> Term {
        if self.negated {
            Term::not(self.body)
        } else {
            self.body
        }
    }

    pub fn size(&self) -> usize {
        self.body.size() + usize::from(self.negated)
    }
}

impl fmt::Display for NormalizedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!{}", self.body)
        } else {
            write!(f, "{}", self.body)
        }
    }
}

/// Moves every negation to the root using the elementary identities
/// `¬¬A = A`, `σ¬A = ¬σA`, the De Morgan laws, `A ∩ ¬B = A \ B` and
/// `A ∪ ¬B = ¬(B \ A)`.
///
/// Every binary node maps to exactly one binary node and permutations are kept
/// in place, so the output never has more nodes than the input plus one.
pub fn normalize_term(term: &Term) -> Result<NormalizedTerm, TermError> {
    term.arity()?;
    Ok(push_negations(term))
}

fn push_negations(term: &Term) -> NormalizedTerm {
    use NormalizedTerm as N;
    match term {
        Term::Symbol(_) => N::pos(term.clone()),
        Term::Not(t) => {
            let inner = push_negations(t);
            N { negated: !inner.negated, body: inner.body }
        }
        Term::Rot(t) => {
            let inner = push_negations(t);
            N { negated: inner.negated, body: Term::rot(inner.body) }
        }
        Term::Swap(t) => {
            let inner = push_negations(t);
            N { negated: inner.negated, body: Term::swap(inner.body) }
        }
        Term::Inter(a, b) => {
            let (a, b) = (push_negations(a), push_negations(b));
            match (a.negated, b.negated) {
                (false, false) => N::pos(Term::inter(a.body, b.body)),
                (false, true) => N::pos(Term::diff(a.body, b.body)),
                (true, false) => N::pos(Term::diff(b.body, a.body)),
                (true, true) => N::neg(Term::union(a.body, b.body)),
            }
        }
        Term::Union(a, b) => {
            let (a, b) = (push_negations(a), push_negations(b));
            match (a.negated, b.negated) {
                (false, false) => N::pos(Term::union(a.body, b.body)),
                (false, true) => N::neg(Term::diff(b.body, a.body)),
                (true, false) => N::neg(Term::diff(a.body, b.body)),
                (true, true) => N::neg(Term::inter(a.body, b.body)),
            }
        }
        Term::Diff(a, b) => {
            // A \ B = A ∩ ¬B
            let (a, b) = (push_negations(a), push_negations(b));
            match (a.negated, b.negated) {
                (false, false) => N::pos(Term::diff(a.body, b.body)),
                (false, true) => N::pos(Term::inter(a.body, b.body)),
                (true, false) => N::neg(Term::union(a.body, b.body)),
                (true, true) => N::pos(Term::diff(b.body, a.body)),
            }
        }
    }
}

/// Rewrites a term into a Boolean combination of literals `σR` by
/// distributing permutations over `∩`, `\` and `∪` and commuting them with
/// `¬`. Each literal's permutation is spelled with its canonical generator
/// word.
pub fn to_literal_form(term: &Term) -> Result<Term, TermError> {
    let k = term.arity()?;
    push_permutations(term, &Permutation::identity(k))
}

fn push_permutations(term: &Term, outer: &Permutation) -> Result<Term, TermError> {
    let k = outer.size();
    Ok(match term {
        Term::Symbol(_) => Term::permuted(&generator_word(outer)?, term.clone()),
        Term::Rot(t) => push_permutations(t, &outer.compose(&Permutation::rot(k)?))?,
        Term::Swap(t) => push_permutations(t, &outer.compose(&Permutation::swap(k)?))?,
        Term::Not(t) => Term::not(push_permutations(t, outer)?),
        Term::Inter(a, b) => Term::inter(push_permutations(a, outer)?, push_permutations(b, outer)?),
        Term::Diff(a, b) => Term::diff(push_permutations(a, outer)?, push_permutations(b, outer)?),
        Term::Union(a, b) => Term::union(push_permutations(a, outer)?, push_permutations(b, outer)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_term;
    use crate::term::Vocabulary;

    fn vocab() -> Vocabulary {
        Vocabulary::parse("R/2,S/2").unwrap()
    }

    fn norm(src: &str) -> String {
        normalize_term(&parse_term(src, &vocab()).unwrap()).unwrap().to_string()
    }

    #[test]
    fn double_negation_cancels() {
        assert_eq!(norm("!!R"), "R");
    }

    #[test]
    fn negation_commutes_with_swap() {
        assert_eq!(norm("swp(!R)"), "!swp(R)");
    }

    #[test]
    fn intersection_with_negation_becomes_difference() {
        assert_eq!(norm("!(R & !S)"), "!(R \\ S)");
    }

    #[test]
    fn union_cases() {
        assert_eq!(norm("(R | !S)"), "!(S \\ R)");
        assert_eq!(norm("(!R | !S)"), "!(R & S)");
        assert_eq!(norm("!(!R | !S)"), "(R & S)");
    }

    #[test]
    fn difference_cases() {
        assert_eq!(norm("(!R \\ S)"), "!(R | S)");
        assert_eq!(norm("(!R \\ !S)"), "(S \\ R)");
        assert_eq!(norm("(R \\ !S)"), "(R & S)");
    }

    #[test]
    fn literal_form_pushes_permutations_to_symbols() {
        let t = parse_term("rot((R & !swp(S)))", &vocab()).unwrap();
        let lit = to_literal_form(&t).unwrap();
        // binary: rot∘swp is the identity
        assert_eq!(lit.to_string(), "(rot(R) & !S)");
    }
}
