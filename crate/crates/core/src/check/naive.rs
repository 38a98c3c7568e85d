use std::collections::HashMap;

use crate::formula::{Formula, Node};
use crate::model::{KripkeModel, World, WorldSet};
use crate::term::{eval_term, Term};

use super::CheckError;

/// The truth set of `phi`, computed clause by clause from the semantics.
/// Every modality is evaluated by its own definition and every diamond term is
/// materialized with [`eval_term`], complements included.
pub fn check_naive(model: &KripkeModel, phi: &Formula) -> Result<WorldSet, CheckError> {
    let mut memo = HashMap::new();
    eval(model, phi, &mut memo)
}

pub fn holds_naive(model: &KripkeModel, phi: &Formula, w: World) -> Result<bool, CheckError> {
    Ok(check_naive(model, phi)?.contains(w))
}

type Memo = HashMap<*const Node, WorldSet>;

fn eval(model: &KripkeModel, phi: &Formula, memo: &mut Memo) -> Result<WorldSet, CheckError> {
    if let Some(done) = memo.get(&phi.as_ptr()) {
        return Ok(done.clone());
    }
    let n = model.world_count();
    let out = match phi.node() {
        Node::Top => WorldSet::full(n),
        Node::Bottom => WorldSet::empty(n),
        Node::Prop(p) => model.prop(p),
        Node::Not(a) => eval(model, a, memo)?.complement(),
        Node::And(a, b) => eval(model, a, memo)?.intersect(&eval(model, b, memo)?),
        Node::Or(a, b) => eval(model, a, memo)?.union(&eval(model, b, memo)?),
        Node::Exists(a) => {
            if eval(model, a, memo)?.is_empty() {
                WorldSet::empty(n)
            } else {
                WorldSet::full(n)
            }
        }
        Node::Forall(a) => {
            if eval(model, a, memo)?.len() == n {
                WorldSet::full(n)
            } else {
                WorldSet::empty(n)
            }
        }
        Node::Diamond(t, args) => {
            let args = eval_all(model, args, memo)?;
            let mut out = WorldSet::empty(n);
            for tuple in &eval_term(t, model)? {
                if satisfies(&args, tuple) {
                    out.insert(tuple[0]);
                }
            }
            out
        }
        Node::Box(t, args) => {
            // some successor tuple falsifies every argument
            let args = eval_all(model, args, memo)?;
            let mut out = WorldSet::full(n);
            for tuple in &eval_term(t, model)? {
                if args.iter().zip(&tuple[1..]).all(|(set, &w)| !set.contains(w)) {
                    out.remove(tuple[0]);
                }
            }
            out
        }
        Node::Window(symbol, args) => {
            let args = eval_all(model, args, memo)?;
            let rel = eval_term(&Term::symbol(symbol.clone()), model)?;
            let lists: Vec<Vec<World>> = args.iter().map(WorldSet::to_vec).collect();
            let mut out = WorldSet::empty(n);
            for w in model.worlds() {
                let mut ok = true;
                for_each_product(&lists, &mut |rest| {
                    let mut t = vec![w];
                    t.extend_from_slice(rest);
                    ok &= rel.contains(&t);
                    ok
                });
                if ok {
                    out.insert(w);
                }
            }
            out
        }
    };
    memo.insert(phi.as_ptr(), out.clone());
    Ok(out)
}

fn eval_all(model: &KripkeModel, args: &[Formula], memo: &mut Memo) -> Result<Vec<WorldSet>, CheckError> {
    args.iter().map(|a| eval(model, a, memo)).collect()
}

fn satisfies(args: &[WorldSet], tuple: &[World]) -> bool {
    args.iter().zip(&tuple[1..]).all(|(set, &w)| set.contains(w))
}

/// Calls `f` on every element of the product of `lists` until it returns
/// false.
fn for_each_product(lists: &[Vec<World>], f: &mut impl FnMut(&[World]) -> bool) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut current: Vec<World> = lists.iter().map(|l| l[0]).collect();
    loop {
        if !f(&current) {
            return;
        }
        let mut i = lists.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                current[i] = lists[i][idx[i]];
                break;
            }
            idx[i] = 0;
            current[i] = lists[i][0];
        }
    }
}
