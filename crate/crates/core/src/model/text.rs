//! Line-oriented model files:
//!
//! ```text
//! # comment
//! worlds 3
//! rel R/2 : (0,1) (1,2)
//! prop q : 1 2
//! ```

use std::fmt::Write as _;

use crate::term::{RelationSymbol, Vocabulary};

use super::{KripkeModel, ModelError, Tuple, TupleSet, WorldSet};

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Syntax { line: self.line, column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with([' ', '\t', '\r']) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ModelError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> Result<&'a str, ModelError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    /// Returns the number and the column it started at.
    fn number(&mut self) -> Result<(u64, usize), ModelError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a number"));
        }
        self.pos += len;
        let n = rest[..len].parse().map_err(|_| self.err("number too large"))?;
        Ok((n, start + 1))
    }
}

fn world(c: &mut Cursor<'_>, worlds: usize) -> Result<u32, ModelError> {
    let (n, column) = c.number()?;
    if n >= worlds as u64 {
        return Err(ModelError::WorldOutOfRange { line: c.line, column, world: n, worlds });
    }
    Ok(n as u32)
}

pub(super) fn parse_model(text: &str) -> Result<KripkeModel, ModelError> {
    let mut worlds: Option<usize> = None;
    let mut vocab = Vocabulary::default();
    let mut relations: Vec<TupleSet> = Vec::new();
    let mut props: Vec<(String, WorldSet)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let mut c = Cursor { line: i + 1, text: raw, pos: 0 };
        if c.at_end() || c.text[c.pos..].starts_with('#') {
            continue;
        }
        let keyword = c.word()?;
        match (keyword, worlds) {
            ("worlds", None) => {
                let (n, _) = c.number()?;
                if n == 0 {
                    return Err(ModelError::NoWorlds);
                }
                worlds = Some(n as usize);
            }
            ("worlds", Some(_)) => return Err(c.err("`worlds` declared twice")),
            (_, None) => return Err(c.err("the first declaration must be `worlds N`")),
            ("rel", Some(n)) => {
                let name = c.word()?;
                c.expect('/')?;
                let (arity, _) = c.number()?;
                let symbol = RelationSymbol::new(name, arity as usize)?;
                if vocab.get(name).is_some() {
                    return Err(ModelError::DuplicateRelation(name.to_string()));
                }
                vocab.push(symbol.clone())?;
                let mut tuples: Vec<Tuple> = Vec::new();
                if c.eat(':') {
                    while !c.at_end() {
                        c.expect('(')?;
                        let mut tuple = vec![world(&mut c, n)?];
                        while c.eat(',') {
                            tuple.push(world(&mut c, n)?);
                        }
                        c.expect(')')?;
                        if tuple.len() != symbol.arity() {
                            return Err(ModelError::TupleArity {
                                line: c.line,
                                symbol: name.to_string(),
                                expected: symbol.arity(),
                                found: tuple.len(),
                            });
                        }
                        tuples.push(tuple);
                    }
                }
                relations.push(TupleSet::from_tuples(symbol.arity(), tuples));
            }
            ("prop", Some(n)) => {
                let name = c.word()?;
                if props.iter().any(|(p, _)| p == name) {
                    return Err(ModelError::DuplicateProp(name.to_string()));
                }
                let mut set = WorldSet::empty(n);
                if c.eat(':') {
                    while !c.at_end() {
                        set.insert(world(&mut c, n)?);
                    }
                }
                props.push((name.to_string(), set));
            }
            (other, _) => return Err(c.err(format!("unknown declaration `{other}`"))),
        }
        if !c.at_end() {
            return Err(c.err("unexpected trailing input"));
        }
    }

    let worlds =
        worlds.ok_or(ModelError::Syntax { line: 1, column: 1, message: "missing `worlds N` declaration".into() })?;
    let mut model = KripkeModel::new(worlds, vocab.clone())?;
    for (symbol, tuples) in vocab.iter().zip(relations) {
        model.set_relation(symbol, tuples)?;
    }
    for (name, set) in props {
        model.set_prop(name, set);
    }
    Ok(model)
}

pub(super) fn render_model(model: &KripkeModel) -> String {
    let mut out = String::new();
    writeln!(out, "worlds {}", model.world_count()).unwrap();
    for (symbol, tuples) in model.relations() {
        write!(out, "rel {}/{} :", symbol.name(), symbol.arity()).unwrap();
        for t in tuples {
            out.push_str(" (");
            for (i, w) in t.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{w}").unwrap();
            }
            out.push(')');
        }
        out.push('\n');
    }
    for (name, set) in model.props() {
        write!(out, "prop {name} :").unwrap();
        for w in set.iter() {
            write!(out, " {w}").unwrap();
        }
        out.push('\n');
    }
    out
}
