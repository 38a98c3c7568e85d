use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::Vocabulary;

use super::{all_tuples, KripkeModel, TupleSet, WorldSet};

/// A reproducible random model: each candidate tuple of each relation is kept
/// with probability `density`, each proposition holds at each world with
/// probability ½.
pub fn random_model(seed: u64, worlds: usize, vocab: &Vocabulary, density: f64, props: &[&str]) -> KripkeModel {
    assert!(worlds >= 1, "a model needs at least one world");
    assert!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = KripkeModel::new(worlds, vocab.clone()).expect("at least one world");
    for symbol in vocab {
        let tuples = all_tuples(symbol.arity(), worlds).filter(|_| rng.gen_bool(density));
        let set = TupleSet::from_tuples(symbol.arity(), tuples.collect::<Vec<_>>());
        model.set_relation(symbol, set).expect("symbol belongs to the vocabulary");
    }
    random_valuation(&mut rng, &mut model, props);
    model
}

/// A reproducible sparse model with about `per_world` tuples per world and
/// relation, sampled directly instead of by scanning `W^k`.
pub fn random_sparse_model(
    seed: u64,
    worlds: usize,
    vocab: &Vocabulary,
    per_world: usize,
    props: &[&str],
) -> KripkeModel {
    assert!(worlds >= 1, "a model needs at least one world");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = KripkeModel::new(worlds, vocab.clone()).expect("at least one world");
    for symbol in vocab {
        let mut tuples = Vec::with_capacity(worlds * per_world);
        for first in 0..worlds as u32 {
            for _ in 0..per_world {
                let mut t = vec![first];
                t.extend((1..symbol.arity()).map(|_| rng.gen_range(0..worlds as u32)));
                tuples.push(t);
            }
        }
        model
            .set_relation(symbol, TupleSet::from_tuples(symbol.arity(), tuples))
            .expect("symbol belongs to the vocabulary");
    }
    random_valuation(&mut rng, &mut model, props);
    model
}

fn random_valuation(rng: &mut ChaCha8Rng, model: &mut KripkeModel, props: &[&str]) {
    let n = model.world_count();
    for name in props {
        let set = WorldSet::from_worlds(n, (0..n as u32).filter(|_| rng.gen_bool(0.5)));
        model.set_prop(*name, set);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::parse("R/2,T/3").unwrap()
    }

    #[test]
    fn same_seed_same_model() {
        let a = random_model(7, 4, &vocab(), 0.3, &["p", "q"]);
        let b = random_model(7, 4, &vocab(), 0.3, &["p", "q"]);
        assert_eq!(a, b);
        assert_ne!(a, random_model(8, 4, &vocab(), 0.3, &["p", "q"]));
    }

    #[test]
    fn density_extremes() {
        let empty = random_model(1, 3, &vocab(), 0.0, &[]);
        assert!(empty.relations().all(|(_, t)| t.is_empty()));
        let full = random_model(1, 2, &Vocabulary::parse("R/2").unwrap(), 1.0, &[]);
        assert_eq!(full.relation_by_name("R").unwrap().len(), 4);
    }

    #[test]
    fn sparse_models_are_reproducible() {
        let a = random_sparse_model(3, 50, &vocab(), 2, &["p"]);
        assert_eq!(a, random_sparse_model(3, 50, &vocab(), 2, &["p"]));
        assert!(a.relation_by_name("R").unwrap().len() <= 100);
    }
}
