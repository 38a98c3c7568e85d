//! Recursive-descent parser for formulas and terms.
//!
//! ```text
//! formula := true | false | prop | ~formula | (formula & formula) | (formula | formula)
//!          | <term>(formula, ...) | [term](formula, ...) | <E> formula | [A] formula
//!          | win_SYM(formula, ...)
//! term    := SYM | rot(term) | swp(term) | !term | (term & term) | (term | term) | (term \ term)
//! ```
//!
//! Propositions start with a lowercase letter or `_`, relation symbols with an
//! uppercase letter.

use crate::term::{RelationSymbol, Term, Vocabulary};

use super::{Formula, FormulaError};

/// Maximum nesting of formula and term constructors.
pub const MAX_NESTING: usize = 256;

enum Raw {
    Sym(String, usize),
    Rot(Box<Raw>),
    Swap(Box<Raw>),
    Not(Box<Raw>),
    Inter(Box<Raw>, Box<Raw>),
    Diff(Box<Raw>, Box<Raw>),
    Union(Box<Raw>, Box<Raw>),
}

enum Symbols<'v> {
    Fixed(&'v Vocabulary),
    Infer(Vocabulary),
}

struct Parser<'v> {
    chars: Vec<char>,
    pos: usize,
    depth: usize,
    symbols: Symbols<'v>,
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'v> Parser<'v> {
    fn new(src: &str, symbols: Symbols<'v>) -> Self {
        Self { chars: src.chars().collect(), pos: 0, depth: 0, symbols }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { column: self.column(), message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(format!("expected `{c}`, found `{found}`")),
                None => self.err(format!("expected `{c}`, found end of input")),
            }
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|&c| is_ident(c)) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    /// Looks ahead for `<E>` / `[A]` without consuming.
    fn global_ahead(&mut self, open: char, name: char, close: char) -> bool {
        self.skip_ws();
        let mut i = self.pos;
        let next = |i: &mut usize| {
            while self.chars.get(*i).is_some_and(|c| c.is_whitespace()) {
                *i += 1;
            }
            let c = self.chars.get(*i).copied();
            *i += 1;
            c
        };
        next(&mut i) == Some(open)
            && next(&mut i) == Some(name)
            && {
                // `E` must be a whole token
                !self.chars.get(i).is_some_and(|&c| is_ident(c))
            }
            && next(&mut i) == Some(close)
    }

    fn enter(&mut self) -> Result<(), FormulaError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(FormulaError::TooDeep { column: self.column(), limit: MAX_NESTING });
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), FormulaError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected `{c}` after the end of the input")),
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        self.enter()?;
        let f = self.formula_inner()?;
        self.depth -= 1;
        Ok(f)
    }

    fn formula_inner(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            None => self.err("expected a formula, found end of input"),
            Some('~') => {
                self.pos += 1;
                Ok(Formula::not(self.formula()?))
            }
            Some('(') => {
                self.pos += 1;
                let a = self.formula()?;
                let join = match self.peek() {
                    Some('&') => Formula::and,
                    Some('|') => Formula::or,
                    _ => return self.err("expected `&` or `|` in a parenthesized formula"),
                };
                self.pos += 1;
                let b = self.formula()?;
                self.expect(')')?;
                Ok(join(a, b))
            }
            Some('<') if self.global_ahead('<', 'E', '>') => {
                self.global_prefix();
                Ok(Formula::exists(self.formula()?))
            }
            Some('[') if self.global_ahead('[', 'A', ']') => {
                self.global_prefix();
                Ok(Formula::forall(self.formula()?))
            }
            Some(open @ ('<' | '[')) => {
                self.pos += 1;
                let column = self.column();
                let raw = self.raw_term()?;
                self.expect(if open == '<' { '>' } else { ']' })?;
                let args = self.args()?;
                let term = self.resolve(&raw, Some(args.len() + 1), column)?;
                let f = if open == '<' { Formula::diamond(term, args) } else { Formula::boxed(term, args) };
                f.map_err(|e| self.at(e, column))
            }
            Some(c) if is_ident(c) => {
                let column = self.column();
                let name = self.ident().expect("identifier start was seen");
                match name.as_str() {
                    "true" => Ok(Formula::top()),
                    "false" => Ok(Formula::bottom()),
                    _ if name.starts_with("win_") && self.peek() == Some('(') => {
                        let sym_name = &name[4..];
                        let args = self.args()?;
                        let raw = Raw::Sym(sym_name.to_string(), column + 4);
                        let term = self.resolve(&raw, Some(args.len() + 1), column)?;
                        let Term::Symbol(symbol) = term else { unreachable!() };
                        Formula::window(symbol, args).map_err(|e| self.at(e, column))
                    }
                    _ if name.starts_with(|c: char| c.is_ascii_lowercase() || c == '_') => Ok(Formula::prop(name)),
                    _ => Err(FormulaError::Syntax {
                        column,
                        message: format!(
                            "`{name}` is not a proposition; propositions start with a lowercase letter or `_`"
                        ),
                    }),
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn global_prefix(&mut self) {
        for _ in 0..3 {
            self.peek();
            self.pos += 1;
        }
    }

    fn at(&self, e: FormulaError, column: usize) -> FormulaError {
        match e {
            FormulaError::Arity { term, arity, args } => FormulaError::ModalityArity { column, term, arity, args },
            other => other,
        }
    }

    fn args(&mut self) -> Result<Vec<Formula>, FormulaError> {
        self.expect('(')?;
        let mut out = vec![self.formula()?];
        while self.eat(',') {
            out.push(self.formula()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn raw_term(&mut self) -> Result<Raw, FormulaError> {
        self.enter()?;
        let t = self.raw_term_inner()?;
        self.depth -= 1;
        Ok(t)
    }

    fn raw_term_inner(&mut self) -> Result<Raw, FormulaError> {
        match self.peek() {
            None => self.err("expected a term, found end of input"),
            Some('!') => {
                self.pos += 1;
                Ok(Raw::Not(Box::new(self.raw_term()?)))
            }
            Some('(') => {
                self.pos += 1;
                let a = Box::new(self.raw_term()?);
                let op = self.peek();
                if !matches!(op, Some('&' | '|' | '\\')) {
                    return self.err("expected `&`, `|` or `\\` in a parenthesized term");
                }
                self.pos += 1;
                let b = Box::new(self.raw_term()?);
                self.expect(')')?;
                Ok(match op {
                    Some('&') => Raw::Inter(a, b),
                    Some('|') => Raw::Union(a, b),
                    _ => Raw::Diff(a, b),
                })
            }
            Some(c) if is_ident(c) => {
                let column = self.column();
                let name = self.ident().expect("identifier start was seen");
                match name.as_str() {
                    "rot" | "swp" => {
                        self.expect('(')?;
                        let inner = Box::new(self.raw_term()?);
                        self.expect(')')?;
                        Ok(if name == "rot" { Raw::Rot(inner) } else { Raw::Swap(inner) })
                    }
                    _ if name.starts_with(|c: char| c.is_ascii_uppercase()) => Ok(Raw::Sym(name, column)),
                    _ => Err(FormulaError::Syntax {
                        column,
                        message: format!("`{name}` is not a relation symbol; symbols start with an uppercase letter"),
                    }),
                }
            }
            Some(c) => self.err(format!("unexpected `{c}` in a term")),
        }
    }

    /// Resolves symbol names. With a fixed vocabulary the declared arities
    /// are used; otherwise every symbol gets `arity`.
    fn resolve(&mut self, raw: &Raw, arity: Option<usize>, column: usize) -> Result<Term, FormulaError> {
        let term = self.resolve_rec(raw, arity)?;
        let found = term.arity()?;
        if let Some(expected) = arity {
            if found != expected {
                return Err(FormulaError::ModalityArity {
                    column,
                    term: term.to_string(),
                    arity: found,
                    args: expected - 1,
                });
            }
        }
        Ok(term)
    }

    fn resolve_rec(&mut self, raw: &Raw, arity: Option<usize>) -> Result<Term, FormulaError> {
        Ok(match raw {
            Raw::Sym(name, column) => Term::symbol(self.symbol(name, *column, arity)?),
            Raw::Rot(t) => Term::rot(self.resolve_rec(t, arity)?),
            Raw::Swap(t) => Term::swap(self.resolve_rec(t, arity)?),
            Raw::Not(t) => Term::not(self.resolve_rec(t, arity)?),
            Raw::Inter(a, b) => Term::inter(self.resolve_rec(a, arity)?, self.resolve_rec(b, arity)?),
            Raw::Diff(a, b) => Term::diff(self.resolve_rec(a, arity)?, self.resolve_rec(b, arity)?),
            Raw::Union(a, b) => Term::union(self.resolve_rec(a, arity)?, self.resolve_rec(b, arity)?),
        })
    }

    fn symbol(&mut self, name: &str, column: usize, arity: Option<usize>) -> Result<RelationSymbol, FormulaError> {
        match &mut self.symbols {
            Symbols::Fixed(vocab) => vocab
                .get(name)
                .cloned()
                .ok_or_else(|| FormulaError::UndeclaredSymbol { column, name: name.to_string() }),
            Symbols::Infer(vocab) => {
                let arity = arity.expect("inference needs a modality arity");
                if let Some(s) = vocab.get(name) {
                    if s.arity() != arity {
                        return Err(FormulaError::ConflictingArity {
                            name: name.to_string(),
                            first: s.arity(),
                            second: arity,
                        });
                    }
                    return Ok(s.clone());
                }
                let s = RelationSymbol::new(name, arity)?;
                vocab.push(s.clone())?;
                Ok(s)
            }
        }
    }
}

/// Parses a formula whose relation symbols must be declared in `vocab`.
pub fn parse_formula(src: &str, vocab: &Vocabulary) -> Result<Formula, FormulaError> {
    let mut p = Parser::new(src, Symbols::Fixed(vocab));
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a formula and infers each symbol's arity from the modalities using
/// it. Symbols are declared in order of first occurrence.
pub fn parse_formula_infer(src: &str) -> Result<(Formula, Vocabulary), FormulaError> {
    let mut p = Parser::new(src, Symbols::Infer(Vocabulary::default()));
    let f = p.formula()?;
    p.finish()?;
    let Symbols::Infer(vocab) = p.symbols else { unreachable!() };
    Ok((f, vocab))
}

/// Parses a term over `vocab`.
pub fn parse_term(src: &str, vocab: &Vocabulary) -> Result<Term, FormulaError> {
    let mut p = Parser::new(src, Symbols::Fixed(vocab));
    let raw = p.raw_term()?;
    p.finish()?;
    p.resolve(&raw, None, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Node;

    fn vocab() -> Vocabulary {
        Vocabulary::parse("R/2,S/2,T/3").unwrap()
    }

    fn round_trip(src: &str) {
        let f = parse_formula(src, &vocab()).unwrap();
        assert_eq!(f.to_string(), src);
        assert_eq!(parse_formula(&f.to_string(), &vocab()).unwrap(), f);
    }

    #[test]
    fn diamond_over_symbol() {
        let f = parse_formula("<R>(q)", &vocab()).unwrap();
        let Node::Diamond(t, args) = f.node() else { panic!("not a diamond") };
        assert_eq!(t.to_string(), "R");
        assert_eq!(args, &[Formula::prop("q")]);
    }

    #[test]
    fn diamond_over_negated_symbol() {
        let f = parse_formula("<!R>(q)", &vocab()).unwrap();
        let Node::Diamond(t, _) = f.node() else { panic!("not a diamond") };
        assert_eq!(*t, Term::not(Term::symbol(vocab().get("R").unwrap().clone())));
    }

    #[test]
    fn ternary_diamond_round_trip() {
        round_trip("<(T & swp(T))>(q, r)");
    }

    #[test]
    fn every_constructor_round_trips() {
        round_trip("((true | false) & ~p)");
        round_trip("[(R \\ rot(S))](~_f3)");
        round_trip("<E> [A] (p | <R>(q))");
        round_trip("win_T(p, ~q)");
        round_trip("~~<!(R | S)>(p)");
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse_formula("  ( <R> ( p )&\n[A]q ) ", &vocab()).unwrap();
        assert_eq!(a.to_string(), "(<R>(p) & [A] q)");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("(p & q", &vocab()).unwrap_err();
        assert_eq!(e, FormulaError::Syntax { column: 7, message: "expected `)`, found end of input".into() });
        let e = parse_formula("<U>(p)", &vocab()).unwrap_err();
        assert_eq!(e, FormulaError::UndeclaredSymbol { column: 2, name: "U".into() });
    }

    #[test]
    fn diamond_arity_is_checked() {
        let e = parse_formula("<R>(p, q)", &vocab()).unwrap_err();
        assert!(matches!(e, FormulaError::ModalityArity { column: 2, arity: 2, args: 2, .. }));
        let e = parse_formula("win_T(p)", &vocab()).unwrap_err();
        assert!(matches!(e, FormulaError::ModalityArity { arity: 3, args: 1, .. }));
    }

    #[test]
    fn binary_connectives_take_exactly_two_operands() {
        assert!(parse_formula("(p & q & r)", &vocab()).is_err());
        assert!(parse_formula("p & q", &vocab()).is_err());
    }

    #[test]
    fn inference_assigns_arities() {
        let (f, v) = parse_formula_infer("(<R>(p) & <(S & rot(S))>(p, q))").unwrap();
        assert_eq!(v.to_string(), "R/2,S/3");
        assert_eq!(f.to_string(), "(<R>(p) & <(S & rot(S))>(p, q))");
        let e = parse_formula_infer("(<R>(p) & <R>(p, q))").unwrap_err();
        assert_eq!(e, FormulaError::ConflictingArity { name: "R".into(), first: 2, second: 3 });
    }

    #[test]
    fn reserved_names_are_not_symbols() {
        assert!(parse_formula_infer("<E>(p, q)").is_err());
    }

    #[test]
    fn nesting_is_limited() {
        let deep = "~".repeat(MAX_NESTING + 1) + "p";
        assert!(matches!(parse_formula(&deep, &vocab()), Err(FormulaError::TooDeep { .. })));
        let ok = "~".repeat(MAX_NESTING - 1) + "p";
        assert!(parse_formula(&ok, &vocab()).is_ok());
    }

    #[test]
    fn terms_parse_standalone() {
        let t = parse_term("!(rot(R) \\ swp(S))", &vocab()).unwrap();
        assert_eq!(t.to_string(), "!(rot(R) \\ swp(S))");
        assert!(parse_term("(R & T)", &vocab()).is_err());
    }
}
