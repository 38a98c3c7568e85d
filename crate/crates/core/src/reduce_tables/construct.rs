use std::collections::{HashMap, HashSet};

use crate::check::{check_labeling, CompiledFormula};
use crate::formula::{subformula_order, Formula};
use crate::model::{all_tuples, KripkeModel, Tuple, TupleSet, World, WorldSet};
use crate::term::{table_action, table_of_tuple, Permutation, RelationSymbol};

use super::{StarForm, TableError, TableReduction};

/// How the third coordinate of the layered model is bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerMode {
    /// Layers `0..=D`; successors beyond `D` are dropped. `None` picks
    /// `D = modalDepth(φ*) · maxIndex`, the least bound accepted.
    Truncated { depth: Option<usize> },
    /// Layers taken modulo `L`. `None` picks `L = 2 · maxIndex + 1`, the least
    /// count accepted.
    Cyclic { layers: Option<usize> },
}

impl Default for LayerMode {
    fn default() -> Self {
        LayerMode::Truncated { depth: None }
    }
}

/// Counts of a transfer check between the layered model and the extended
/// table model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferReport {
    pub checked: usize,
    pub mismatches: usize,
}

#[derive(Clone, Debug)]
pub struct TableBackward {
    /// The table model after both extensions.
    pub extended: KripkeModel,
    /// The layered model over the source vocabulary.
    pub model: KripkeModel,
    /// `(w, 2, 0)`.
    pub world: World,
    /// Number of layers `L`; in truncated mode `D = L - 1`.
    pub layers: usize,
    pub cyclic: bool,
    /// Tuples added by the permutation closure and by completion.
    pub added: (usize, usize),
    /// Table assignments made by the layered construction, each checked
    /// against earlier ones.
    pub assignments: usize,
    /// Subformulas of `φ*` compared at every world whose layer leaves room
    /// for the subformula's depth (every world in cyclic mode).
    pub transfer: TransferReport,
}

/// World `(x, ℓ, r)` of the layered model with maximum arity `m` and `layers`
/// layers.
pub fn layered_world(x: World, l: usize, r: usize, m: usize, layers: usize) -> World {
    ((x as usize * (m - 1) + (l - 2)) * layers + r) as World
}

/// Adds the fresh propositions of `φ*` to a model of `φ`, each true where
/// its formula is.
pub fn with_fresh_props(star: &StarForm, model: &KripkeModel) -> Result<KripkeModel, TableError> {
    let mut out = model.clone();
    for (p, psi) in &star.fresh {
        let truth = check_labeling(&out, psi)?;
        out.set_prop(p.to_string(), truth);
    }
    Ok(out)
}

/// Interprets every table symbol as the set of tuples realizing the table and
/// asserts `t(φ*)`, `ξ₁`, `ξ₂` and `ξ₃` at `w`.
pub fn forward_model_tbl(red: &TableReduction, model: &KripkeModel, w: World) -> Result<KripkeModel, TableError> {
    let model = &model.over_vocabulary(&red.source_vocab)?;
    if !check_labeling(model, &red.star.formula)?.contains(w) {
        return Err(TableError::Precondition(w));
    }
    let n = model.world_count();
    let mut out = KripkeModel::new(n, red.tables.vocab.clone())?;
    for family in &red.tables.families {
        let mut parts: Vec<Vec<Tuple>> = vec![Vec::new(); family.tables.len()];
        for t in all_tuples(family.arity, n) {
            let rho = table_of_tuple(&t, model)?;
            if rho.symbols() != family.tables[0].symbols() {
                return Err(TableError::Construction("model vocabulary differs from the formula's".into()));
            }
            parts[rho.index() - 1].push(t);
        }
        for (symbol, tuples) in family.symbols.iter().zip(parts) {
            out.set_relation(symbol, TupleSet::from_tuples(family.arity, tuples))?;
        }
    }
    for (p, set) in model.props() {
        out.set_prop(p, set.clone());
    }
    let parts = [&red.translated, &red.xi1, &red.xi2, &red.xi3];
    let compiled = CompiledFormula::many(&parts.map(Formula::clone))?;
    let labels = compiled.label(&out)?;
    for (i, name) in ["t(φ*)", "ξ₁", "ξ₂", "ξ₃"].iter().enumerate() {
        if !labels.root(i).contains(w) {
            return Err(TableError::Construction(format!("{name} fails at {w} in the forward model")));
        }
    }
    Ok(out)
}

/// Per-arity working state: table relations as sets, and `σ[ρ]` by table
/// position and permutation position.
struct Family {
    arity: usize,
    perms: Vec<Permutation>,
    acted: Vec<Vec<usize>>,
    symbols: Vec<RelationSymbol>,
    members: Vec<HashSet<Tuple>>,
}

impl Family {
    fn covers(&self, t: &[World]) -> bool {
        self.members.iter().any(|m| m.contains(t))
    }

    /// Adds every permutation of `t` to the matching image of table `rho`;
    /// returns how many were new.
    fn add_orbit(&mut self, rho: usize, t: &[World]) -> usize {
        let mut added = 0;
        for (si, sigma) in self.perms.iter().enumerate() {
            if self.members[self.acted[rho][si]].insert(sigma.apply(t)) {
                added += 1;
            }
        }
        added
    }
}

/// Truth sets in the original table model: the subformulas, and diamonds over
/// arbitrary argument choices computed on demand.
struct Oracle<'a> {
    model: &'a KripkeModel,
    truth: Vec<WorldSet>,
    diamonds: HashMap<(RelationSymbol, Vec<usize>), WorldSet>,
}

impl Oracle<'_> {
    fn diamond(&mut self, symbol: &RelationSymbol, psi: &[usize]) -> Result<&WorldSet, TableError> {
        let key = (symbol.clone(), psi.to_vec());
        if !self.diamonds.contains_key(&key) {
            let mut out = WorldSet::empty(self.model.world_count());
            for t in self.model.relation(symbol)? {
                if psi.iter().zip(&t[1..]).all(|(&i, &w)| self.truth[i].contains(w)) {
                    out.insert(t[0]);
                }
            }
            self.diamonds.insert(key.clone(), out);
        }
        Ok(&self.diamonds[&key])
    }

    /// Whether table `rho` may be added at `t`: for every `σ` and arguments
    /// `ψ⃗` holding at the positions `σ(1..)`, `⟨σ[ρ]⟩(ψ⃗)` already holds at
    /// position `σ(0)`.
    fn accepts(&mut self, family: &Family, rho: usize, t: &[World]) -> Result<bool, TableError> {
        let k = family.arity - 1;
        for (si, sigma) in family.perms.iter().enumerate() {
            let lists: Vec<Vec<usize>> = (1..=k)
                .map(|l| {
                    let at = t[sigma.image(l)];
                    (0..self.truth.len()).filter(|&i| self.truth[i].contains(at)).collect()
                })
                .collect();
            if lists.iter().any(Vec::is_empty) {
                continue;
            }
            let target = t[sigma.image(0)];
            let symbol = &family.symbols[family.acted[rho][si]];
            let mut idx = vec![0usize; k];
            loop {
                let psi: Vec<usize> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
                if !self.diamond(symbol, &psi)?.contains(target) {
                    return Ok(false);
                }
                let mut j = k;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < lists[j].len() {
                        break;
                    }
                    idx[j] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        Ok(true)
    }
}

fn families(red: &TableReduction, model: &KripkeModel) -> Result<Vec<Family>, TableError> {
    red.tables
        .families
        .iter()
        .map(|f| {
            let perms = Permutation::all(f.arity);
            let acted = f
                .tables
                .iter()
                .map(|rho| perms.iter().map(|s| Ok(table_action(s, rho)?.index() - 1)).collect())
                .collect::<Result<Vec<Vec<usize>>, TableError>>()?;
            let members = f
                .symbols
                .iter()
                .map(|s| Ok(model.relation(s)?.iter().cloned().collect()))
                .collect::<Result<Vec<HashSet<Tuple>>, TableError>>()?;
            Ok(Family { arity: f.arity, perms, acted, symbols: f.symbols.clone(), members })
        })
        .collect()
}

/// Closes the table relations under permutations, then gives every uncovered
/// tuple the least table the completion conditions accept.
/// The families, the extended model and the tuples added by each step.
type Extension = (Vec<Family>, KripkeModel, (usize, usize));

fn extend(red: &TableReduction, model: &KripkeModel) -> Result<Extension, TableError> {
    let n = model.world_count();
    let truth: Vec<WorldSet> = {
        let lab = CompiledFormula::many(&red.subformulas)?.label(model)?;
        (0..red.subformulas.len()).map(|i| lab.root(i).clone()).collect()
    };
    let mut fams = families(red, model)?;
    let mut added = (0, 0);
    for fam in &mut fams {
        let original: Vec<Vec<Tuple>> = fam.members.iter().map(|m| m.iter().cloned().collect()).collect();
        for (rho, tuples) in original.iter().enumerate() {
            for t in tuples {
                added.0 += fam.add_orbit(rho, t);
            }
        }
    }
    let mut oracle = Oracle { model, truth: truth.clone(), diamonds: HashMap::new() };
    for fam in &mut fams {
        for t in all_tuples(fam.arity, n) {
            if fam.covers(&t) {
                continue;
            }
            let mut chosen = None;
            for rho in 0..fam.members.len() {
                if oracle.accepts(fam, rho, &t)? {
                    chosen = Some(rho);
                    break;
                }
            }
            let rho = chosen.ok_or_else(|| TableError::MainLemma(t.clone()))?;
            added.1 += fam.add_orbit(rho, &t);
        }
    }
    let mut extended = model.clone();
    for fam in &fams {
        for (rho, symbol) in fam.symbols.iter().enumerate() {
            let mut tuples: Vec<Tuple> = fam.members[rho].iter().cloned().collect();
            tuples.sort();
            extended.set_relation(symbol, TupleSet::from_tuples(fam.arity, tuples))?;
        }
    }
    // closure, and the subformulas keep their truth values
    for fam in &fams {
        for (rho, m) in fam.members.iter().enumerate() {
            for t in m {
                for (si, sigma) in fam.perms.iter().enumerate() {
                    if !fam.members[fam.acted[rho][si]].contains(&sigma.apply(t)) {
                        return Err(TableError::Construction(format!("extension is not closed at {t:?}")));
                    }
                }
            }
        }
    }
    let after = CompiledFormula::many(&red.subformulas)?.label(&extended)?;
    for (i, before) in truth.iter().enumerate() {
        if after.root(i) != before {
            return Err(TableError::Construction(format!(
                "`{}` changed truth value during extension",
                red.subformulas[i]
            )));
        }
    }
    Ok((fams, extended, added))
}

struct Layout {
    m: usize,
    layers: usize,
    cyclic: bool,
}

impl Layout {
    fn world(&self, x: World, l: usize, r: usize) -> World {
        layered_world(x, l, r, self.m, self.layers)
    }

    fn base(&self, v: World) -> World {
        (v as usize / (self.layers * (self.m - 1))) as World
    }

    fn layer(&self, v: World) -> usize {
        v as usize % self.layers
    }

    fn shift(&self, r: usize, by: usize) -> Option<usize> {
        if self.cyclic {
            Some((r + by) % self.layers)
        } else if r + by < self.layers {
            Some(r + by)
        } else {
            None
        }
    }
}

const MAX_LAYERED_TUPLES: u128 = 50_000_000;

/// Extends a `Θ`-model, builds the layered model over the source vocabulary
/// and checks it. Every assignment of a table to a layered tuple is checked
/// against earlier ones, and the derived relations must realize exactly the
/// assigned tables.
pub fn backward_model_tbl(
    red: &TableReduction,
    model: &KripkeModel,
    w: World,
    mode: LayerMode,
) -> Result<TableBackward, TableError> {
    let model = &model.over_vocabulary(&red.tables.vocab)?;
    if !check_labeling(model, &red.theta)?.contains(w) {
        return Err(TableError::Precondition(w));
    }
    let (fams, extended, added) = extend(red, model)?;
    if !check_labeling(&extended, &red.translated)?.contains(w) {
        return Err(TableError::Construction(format!("t(φ*) fails at {w} after extension")));
    }

    let max_index = red.tables.max_index();
    let depth = red.star.formula.modal_depth();
    let layout = match mode {
        LayerMode::Truncated { depth: given } => {
            let needed = depth * max_index;
            let d = given.unwrap_or(needed);
            if d < needed {
                return Err(TableError::DepthBound { needed, given: d });
            }
            Layout { m: red.max_arity, layers: d + 1, cyclic: false }
        }
        LayerMode::Cyclic { layers: given } => {
            let needed = 2 * max_index + 1;
            let l = given.unwrap_or(needed);
            if l < needed {
                return Err(TableError::LayerCount { needed, given: l });
            }
            Layout { m: red.max_arity, layers: l, cyclic: true }
        }
    };
    let n = model.world_count();
    let size = n * (layout.m - 1) * layout.layers;
    let tuples = (size as u128).saturating_pow(layout.m as u32);
    if tuples > MAX_LAYERED_TUPLES {
        return Err(TableError::TooLarge(size as u128));
    }

    // layered assignment
    let mut assigned: Vec<HashMap<Tuple, usize>> = vec![HashMap::new(); fams.len()];
    let mut assignments = 0;
    for (fi, fam) in fams.iter().enumerate() {
        let mut by_first: Vec<Vec<Vec<&Tuple>>> = vec![vec![Vec::new(); n]; fam.members.len()];
        for (rho, m) in fam.members.iter().enumerate() {
            let mut sorted: Vec<&Tuple> = m.iter().collect();
            sorted.sort();
            for t in sorted {
                by_first[rho][t[0] as usize].push(t);
            }
        }
        for x in 0..n as World {
            for l in 2..=layout.m {
                for r in 0..layout.layers {
                    for (rho, lists) in by_first.iter().enumerate() {
                        let Some(next) = layout.shift(r, rho + 1) else { continue };
                        for t in &lists[x as usize] {
                            let mut lifted = vec![layout.world(x, l, r)];
                            lifted.extend((1..fam.arity).map(|j| layout.world(t[j], j + 1, next)));
                            for (si, sigma) in fam.perms.iter().enumerate() {
                                let table = fam.acted[rho][si];
                                assignments += 1;
                                let key = sigma.apply(&lifted);
                                if let Some(&prev) = assigned[fi].get(&key) {
                                    if prev != table {
                                        return Err(TableError::Claim {
                                            tuple: key,
                                            first: prev + 1,
                                            second: table + 1,
                                        });
                                    }
                                } else {
                                    assigned[fi].insert(key, table);
                                }
                            }
                        }
                    }
                }
            }
        }
        // remaining tuples, one orbit at a time
        for t in all_tuples(fam.arity, size) {
            if assigned[fi].contains_key(&t) {
                continue;
            }
            let base: Tuple = t.iter().map(|&v| layout.base(v)).collect();
            let stabilizer: Vec<usize> = (0..fam.perms.len()).filter(|&si| fam.perms[si].apply(&t) == t).collect();
            let rho = (0..fam.members.len())
                .find(|&rho| fam.members[rho].contains(&base) && stabilizer.iter().all(|&si| fam.acted[rho][si] == rho))
                .ok_or_else(|| TableError::Stabilizer(t.clone()))?;
            for (si, sigma) in fam.perms.iter().enumerate() {
                assigned[fi].insert(sigma.apply(&t), fam.acted[rho][si]);
            }
        }
    }

    // relations from the assigned tables
    let mut out = KripkeModel::new(size, red.source_vocab.clone())?;
    for (fi, fam) in red.tables.families.iter().enumerate() {
        let identity = Permutation::identity(fam.arity);
        for symbol in red.source_vocab.of_arity(fam.arity) {
            let mut tuples: Vec<Tuple> = assigned[fi]
                .iter()
                .filter(|(_, &rho)| fam.tables[rho].sign(&identity, &symbol) == Some(true))
                .map(|(t, _)| t.clone())
                .collect();
            tuples.sort();
            out.set_relation(&symbol, TupleSet::from_tuples(fam.arity, tuples))?;
        }
    }
    for (p, set) in extended.props() {
        let lifted = (0..size as World).filter(|&v| set.contains(layout.base(v)));
        out.set_prop(p, WorldSet::from_worlds(size, lifted));
    }
    for (fi, fam) in red.tables.families.iter().enumerate() {
        for (t, &rho) in &assigned[fi] {
            if table_of_tuple(t, &out)? != fam.tables[rho] {
                return Err(TableError::Construction(format!("tuple {t:?} does not realize its table")));
            }
        }
    }

    let world = layout.world(w, 2, 0);
    let transfer = transfer_check(red, &extended, &out, &layout, max_index)?;
    if !check_labeling(&out, &red.star.formula)?.contains(world) {
        return Err(TableError::Construction(format!("φ* fails at ({w},2,0) in the layered model")));
    }
    if !check_labeling(&out, &red.source)?.contains(world) {
        return Err(TableError::Construction(format!("φ fails at ({w},2,0) in the layered model")));
    }
    if layout.cyclic && transfer.mismatches > 0 {
        return Err(TableError::Construction(format!(
            "transfer fails at {} of {} points",
            transfer.mismatches, transfer.checked
        )));
    }
    Ok(TableBackward {
        extended,
        model: out,
        world,
        layers: layout.layers,
        cyclic: layout.cyclic,
        added,
        assignments,
        transfer,
    })
}

/// Compares `ψ` at `(x,ℓ,r)` with `t(ψ)` at `x` for every subformula of `φ*`.
/// In truncated mode only layers `r` with `r + depth(ψ)·maxIndex` inside the
/// bound are compared.
fn transfer_check(
    red: &TableReduction,
    extended: &KripkeModel,
    layered: &KripkeModel,
    layout: &Layout,
    max_index: usize,
) -> Result<TransferReport, TableError> {
    let subs = subformula_order(&red.star.formula);
    let translated: Vec<Formula> = subs.iter().map(|s| red.translate(s)).collect::<Result<_, _>>()?;
    let on_layered = CompiledFormula::many(&subs)?.label(layered)?;
    let on_tables = CompiledFormula::many(&translated)?.label(extended)?;
    let mut report = TransferReport::default();
    for (i, psi) in subs.iter().enumerate() {
        let reach = psi.modal_depth() * max_index;
        for v in 0..layered.world_count() as World {
            if !layout.cyclic && layout.layer(v) + reach >= layout.layers {
                continue;
            }
            report.checked += 1;
            if on_layered.root(i).contains(v) != on_tables.root(i).contains(layout.base(v)) {
                report.mismatches += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_naive;
    use crate::formula::parse_formula_infer;
    use crate::reduce_tables::{reduce_tables, table_normal_form, TableConfig};

    fn reduce(src: &str) -> TableReduction {
        let phi = parse_formula_infer(src).unwrap().0;
        reduce_tables(&phi, None, &TableConfig::default()).unwrap()
    }

    #[test]
    fn forward_partitions_pairs_by_table() {
        let red = reduce("<(R & !rot(R))>(q)");
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\nprop q : 1\n").unwrap();
        let n = forward_model_tbl(&red, &m, 0).unwrap();
        let rel = |s: &str| n.relation_by_name(s).unwrap().to_vec();
        assert_eq!(rel("TAB2_1"), Vec::<Tuple>::new());
        assert_eq!(rel("TAB2_2"), vec![vec![0, 1]]);
        assert_eq!(rel("TAB2_3"), vec![vec![1, 0]]);
        assert_eq!(rel("TAB2_4"), vec![vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn empty_relation_realizes_the_all_negative_table() {
        let red = reduce("~<R>(q)");
        let m = KripkeModel::parse("worlds 2\nrel R/2\nprop q : 1\n").unwrap();
        let n = forward_model_tbl(&red, &m, 0).unwrap();
        assert_eq!(n.relation_by_name("TAB2_4").unwrap().len(), 4);
    }

    #[test]
    fn round_trip_in_both_layer_modes() {
        let red = reduce("(<(R & !rot(R))>(q) & ~q)");
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\nprop q : 1\n").unwrap();
        let n = forward_model_tbl(&red, &m, 0).unwrap();
        for mode in [LayerMode::Truncated { depth: None }, LayerMode::Cyclic { layers: None }] {
            let back = backward_model_tbl(&red, &n, 0, mode).unwrap();
            assert_eq!(back.added, (0, 0));
            assert!(check_naive(&back.model, &red.source).unwrap().contains(back.world));
        }
    }

    #[test]
    fn depth_bound_is_checked() {
        let red = reduce("<(R & !rot(R))>(q)");
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\nprop q : 1\n").unwrap();
        let n = forward_model_tbl(&red, &m, 0).unwrap();
        let err = backward_model_tbl(&red, &n, 0, LayerMode::Truncated { depth: Some(3) }).unwrap_err();
        assert_eq!(err, TableError::DepthBound { needed: 4, given: 3 });
        let err = backward_model_tbl(&red, &n, 0, LayerMode::Cyclic { layers: Some(8) }).unwrap_err();
        assert_eq!(err, TableError::LayerCount { needed: 9, given: 8 });
    }

    #[test]
    fn fresh_props_follow_their_formulas() {
        let phi = parse_formula_infer("<R>((q & r))").unwrap().0;
        let star = table_normal_form(&phi, None, &TableConfig::default()).unwrap();
        let m = KripkeModel::parse("worlds 2\nrel R/2 : (0,1)\nprop q : 1\nprop r : 1\n").unwrap();
        let m = with_fresh_props(&star, &m).unwrap();
        assert_eq!(m.prop("_f0").to_vec(), vec![1]);
        assert!(check_naive(&m, &star.formula).unwrap().contains(0));
    }

    #[test]
    fn layered_world_numbering() {
        assert_eq!(layered_world(0, 2, 0, 2, 5), 0);
        assert_eq!(layered_world(1, 2, 3, 2, 5), 8);
        assert_eq!(layered_world(1, 3, 0, 3, 5), 15);
    }
}
