use std::collections::HashMap;

use crate::formula::{Formula, FormulaDag, Node};
use crate::term::{table_action, Permutation, RelationSymbol, Table, Term, Vocabulary};

use super::{StarForm, TableConfig, TableError, TableFamily, TableReduction, TableVocabulary};

pub(super) fn translate(
    phi: &Formula,
    vocab: &Vocabulary,
    tables: &TableVocabulary,
    memo: &mut HashMap<*const Node, Formula>,
) -> Result<Formula, TableError> {
    if let Some(done) = memo.get(&phi.as_ptr()) {
        return Ok(done.clone());
    }
    let mut args = |xs: &[Formula]| -> Result<Vec<Formula>, TableError> {
        xs.iter().map(|x| translate(x, vocab, tables, memo)).collect()
    };
    let symbol = |t: &Term| -> Result<Term, TableError> {
        let rho =
            Table::from_term(t, vocab).ok_or_else(|| TableError::Construction(format!("`{t}` is not a table")))?;
        let s = tables.symbol(&rho).ok_or_else(|| TableError::Construction(format!("no symbol for table {rho}")))?;
        Ok(Term::symbol(s.clone()))
    };
    let out = match phi.node() {
        Node::Top | Node::Bottom | Node::Prop(_) => phi.clone(),
        Node::Not(a) => Formula::not(args(std::slice::from_ref(a))?.remove(0)),
        Node::And(a, b) => {
            let mut v = args(&[a.clone(), b.clone()])?;
            let b = v.pop().unwrap();
            Formula::and(v.pop().unwrap(), b)
        }
        Node::Or(a, b) => {
            let mut v = args(&[a.clone(), b.clone()])?;
            let b = v.pop().unwrap();
            Formula::or(v.pop().unwrap(), b)
        }
        Node::Exists(a) => Formula::exists(args(std::slice::from_ref(a))?.remove(0)),
        Node::Forall(a) => Formula::forall(args(std::slice::from_ref(a))?.remove(0)),
        Node::Diamond(t, xs) => Formula::diamond(symbol(t)?, args(xs)?)?,
        Node::Box(t, xs) => Formula::boxed(symbol(t)?, args(xs)?)?,
        Node::Window(..) => return Err(TableError::Construction("window operator left".into())),
    };
    memo.insert(phi.as_ptr(), out.clone());
    Ok(out)
}

/// Number of conjuncts of `ξ₁` for `n` subformulas:
/// `Σ_k |S_{k+1}|^{|𝔗_{k+1}|} · n^{k·|𝔗_{k+1}|}`, saturating.
pub fn xi1_conjunct_count(tables: &TableVocabulary, n: usize) -> u128 {
    tables.families.iter().fold(0u128, |acc, f| {
        let perms = (1..=f.arity as u128).product::<u128>();
        let t = f.tables.len() as u32;
        let g = perms.checked_pow(t);
        let h = (n as u128).checked_pow((f.arity as u32 - 1).saturating_mul(t));
        match (g, h) {
            (Some(g), Some(h)) => acc.saturating_add(g.saturating_mul(h)),
            _ => u128::MAX,
        }
    })
}

/// Calls `f` on every tuple in `0..base` of length `len`, last position
/// fastest.
fn for_each_digits(len: usize, base: usize, f: &mut impl FnMut(&[usize])) {
    if base == 0 && len > 0 {
        return;
    }
    let mut digits = vec![0usize; len];
    loop {
        f(&digits);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Shared pieces for one arity: the permutations and `σ[ρ]`'s symbol for
/// every table and permutation.
struct Family<'a> {
    family: &'a TableFamily,
    perms: Vec<Permutation>,
    acted: Vec<Vec<RelationSymbol>>,
}

impl<'a> Family<'a> {
    fn new(family: &'a TableFamily) -> Result<Self, TableError> {
        let perms = Permutation::all(family.arity);
        let acted = family
            .tables
            .iter()
            .map(|rho| {
                perms
                    .iter()
                    .map(|s| Ok(family.symbol(&table_action(s, rho)?).clone()))
                    .collect::<Result<Vec<_>, TableError>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { family, perms, acted })
    }

    fn k(&self) -> usize {
        self.family.arity - 1
    }
}

struct Builder<'a> {
    subs: &'a [Formula],
    negated: Vec<Formula>,
    diamonds: HashMap<(RelationSymbol, Vec<usize>), Formula>,
}

impl Builder<'_> {
    fn diamond(&mut self, s: &RelationSymbol, psi: &[usize]) -> Result<Formula, TableError> {
        let key = (s.clone(), psi.to_vec());
        if let Some(f) = self.diamonds.get(&key) {
            return Ok(f.clone());
        }
        let args = psi.iter().map(|&i| self.subs[i].clone()).collect();
        let f = Formula::diamond(Term::symbol(s.clone()), args)?;
        self.diamonds.insert(key, f.clone());
        Ok(f)
    }

    fn xi1(&mut self, fam: &Family) -> Result<Vec<Formula>, TableError> {
        let t = fam.family.tables.len();
        let k = fam.k();
        let n = self.subs.len();
        let mut out = Vec::new();
        let mut failure = None;
        for_each_digits(t, fam.perms.len(), &mut |g| {
            for_each_digits(t * k, n, &mut |h| {
                if failure.is_some() {
                    return;
                }
                match self.xi1_conjunct(fam, g, h) {
                    Ok(f) => out.push(f),
                    Err(e) => failure = Some(e),
                }
            });
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// The conjunct for `g` (a permutation per table) and `h` (`k`
    /// subformulas per table).
    fn xi1_conjunct(&mut self, fam: &Family, g: &[usize], h: &[usize]) -> Result<Formula, TableError> {
        let k = fam.k();
        let psi = |rho: usize| &h[rho * k..(rho + 1) * k];
        let sigma = |rho: usize| &fam.perms[g[rho]];
        let blocked = |b: &mut Self, rho: usize| -> Result<Formula, TableError> {
            Ok(Formula::not(b.diamond(&fam.acted[rho][g[rho]], psi(rho))?))
        };
        let t = fam.family.tables.len();
        let mut premise = Vec::new();
        for rho in 0..t {
            if sigma(rho).image(0) == 0 {
                premise.push(blocked(self, rho)?);
            }
        }
        for l in 1..=k {
            let mut here = Vec::new();
            for rho in 0..t {
                if sigma(rho).image(0) == l {
                    here.push(blocked(self, rho)?);
                } else {
                    here.push(self.subs[psi(rho)[sigma(rho).preimage(l) - 1]].clone());
                }
            }
            premise.push(Formula::exists(Formula::conj(here)));
        }
        let conclusion = Formula::disj(
            (0..t)
                .filter(|&rho| sigma(rho).image(0) != 0)
                .map(|rho| self.negated[psi(rho)[sigma(rho).preimage(0) - 1]].clone()),
        );
        Ok(Formula::implies(Formula::conj(premise), conclusion))
    }

    fn xi2(&mut self, fam: &Family) -> Result<Vec<Formula>, TableError> {
        let k = fam.k();
        let n = self.subs.len();
        let mut out = Vec::new();
        for (rho, symbol) in fam.family.symbols.iter().enumerate() {
            for (si, sigma) in fam.perms.iter().enumerate() {
                let moved = sigma.image(0);
                if moved == 0 {
                    continue;
                }
                let mut items = Vec::new();
                for_each_digits(k, n, &mut |psi| items.push(psi.to_vec()));
                for psi in items {
                    let inner = Formula::not(self.diamond(&fam.acted[rho][si], &psi)?);
                    let args = (1..=k)
                        .map(|j| if j == moved { inner.clone() } else { self.subs[psi[sigma.preimage(j) - 1]].clone() })
                        .collect();
                    let outer = Formula::diamond(Term::symbol(symbol.clone()), args)?;
                    out.push(Formula::or(self.negated[psi[sigma.preimage(0) - 1]].clone(), Formula::not(outer)));
                }
            }
        }
        Ok(out)
    }

    fn xi3(&mut self, fam: &Family) -> Result<Vec<Formula>, TableError> {
        let k = fam.k();
        let n = self.subs.len();
        let mut out = Vec::new();
        for (rho, symbol) in fam.family.symbols.iter().enumerate() {
            for (si, sigma) in fam.perms.iter().enumerate() {
                if sigma.image(0) != 0 {
                    continue;
                }
                let mut items = Vec::new();
                for_each_digits(k, n, &mut |psi| items.push(psi.to_vec()));
                for psi in items {
                    let permuted: Vec<usize> = (1..=k).map(|j| psi[sigma.preimage(j) - 1]).collect();
                    let from = self.diamond(symbol, &permuted)?;
                    let to = self.diamond(&fam.acted[rho][si], &psi)?;
                    out.push(Formula::implies(from, to));
                }
            }
        }
        Ok(out)
    }
}

/// The subformulas of `t(φ*)` after desugaring, children first.
fn desugared_subformulas(translated: &Formula) -> Vec<Formula> {
    let mut dag = FormulaDag::desugaring();
    let root = dag.intern(translated);
    let ids = dag.reachable(root);
    ids.into_iter().map(|id| dag.to_formula(id)).collect()
}

pub(super) fn build(source: Formula, star: StarForm, config: &TableConfig) -> Result<TableReduction, TableError> {
    let tables = TableVocabulary::new(&star.vocab)?;
    let translated = translate(&star.formula, &star.vocab, &tables, &mut HashMap::new())?;
    let subformulas = desugared_subformulas(&translated);
    let count = xi1_conjunct_count(&tables, subformulas.len());
    if count > u128::from(config.max_xi1_conjuncts) {
        return Err(TableError::Xi1TooLarge { conjuncts: count, cap: config.max_xi1_conjuncts });
    }
    let mut builder = Builder {
        subs: &subformulas,
        negated: subformulas.iter().cloned().map(Formula::not).collect(),
        diamonds: HashMap::new(),
    };
    let (mut c1, mut c2, mut c3) = (Vec::new(), Vec::new(), Vec::new());
    for family in &tables.families {
        let fam = Family::new(family)?;
        c1.extend(builder.xi1(&fam)?);
        c2.extend(builder.xi2(&fam)?);
        c3.extend(builder.xi3(&fam)?);
    }
    let xi1 = Formula::forall(Formula::conj(c1));
    let xi2 = Formula::forall(Formula::conj(c2));
    let xi3 = Formula::forall(Formula::conj(c3));
    let theta = Formula::conj([translated.clone(), xi1.clone(), xi2.clone(), xi3.clone()]);
    let max_arity = tables.max_arity();
    Ok(TableReduction {
        source,
        source_vocab: star.vocab.clone(),
        star,
        tables,
        translated,
        subformulas,
        xi1,
        xi2,
        xi3,
        theta,
        max_arity,
    })
}
