mod common;

use common::{Gen, Terms};
use pml_core::check::{check_labeling, check_naive};
use pml_core::formula::{parse_formula, parse_term};
use pml_core::model::{random_model, KripkeModel};
use pml_core::term::{eval_term, generator_word, normalize_term, Permutation, Term, Vocabulary};
use proptest::prelude::*;

fn vocab() -> Vocabulary {
    Vocabulary::parse("R/2,S/2,T/3").unwrap()
}

fn permutation(k: usize) -> impl Strategy<Value = Permutation> {
    Just((0..k).collect::<Vec<_>>()).prop_shuffle().prop_map(|image| Permutation::new(image).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn formulas_print_and_parse_back(seed in any::<u64>()) {
        let mut gen = Gen::new(seed, Terms::Full);
        gen.windows = true;
        gen.global = true;
        let phi = gen.formula(&vocab(), &["q", "r"], 4, 2);
        prop_assert_eq!(parse_formula(&phi.to_string(), &vocab()).unwrap(), phi);
    }

    #[test]
    fn terms_print_and_parse_back(seed in any::<u64>()) {
        let mut gen = Gen::new(seed, Terms::Full);
        let t = gen.term(&vocab().of_arity(3), 3);
        prop_assert_eq!(parse_term(&t.to_string(), &vocab()).unwrap(), t);
    }

    #[test]
    fn models_render_and_parse_back(seed in any::<u64>(), n in 1usize..6, density in 0.0f64..1.0) {
        let m = random_model(seed, n, &vocab(), density, &["q"]);
        prop_assert_eq!(KripkeModel::parse(&m.render()).unwrap(), m);
    }

    #[test]
    fn composition_applies_inner_first(a in permutation(4), b in permutation(4)) {
        let t = [10u32, 11, 12, 13];
        prop_assert_eq!(a.compose(&b).apply(&t), a.apply(&b.apply(&t)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn generator_words_denote_their_permutation(p in permutation(4), seed in any::<u64>()) {
        let vocab = Vocabulary::parse("U/4").unwrap();
        let u = Term::symbol(vocab.get("U").unwrap().clone());
        let m = random_model(seed, 3, &vocab, 0.3, &[]);
        let word = generator_word(&p).unwrap();
        let direct = eval_term(&u, &m).unwrap().permute(&p);
        prop_assert_eq!(eval_term(&Term::permuted(&word, u), &m).unwrap(), direct);
    }

    #[test]
    fn normalization_is_sound(seed in any::<u64>(), n in 1usize..5) {
        let mut gen = Gen::new(seed, Terms::Full);
        let t = gen.term(&vocab().of_arity(2), 4);
        let normal = normalize_term(&t).unwrap();
        prop_assert!(!normal.body.contains_negation());
        let m = random_model(seed, n, &vocab(), 0.4, &[]);
        prop_assert_eq!(eval_term(&normal.into_term(), &m).unwrap(), eval_term(&t, &m).unwrap());
    }

    #[test]
    fn checkers_agree(seed in any::<u64>(), n in 1usize..6) {
        let mut gen = Gen::new(seed, Terms::Full);
        gen.windows = true;
        gen.global = true;
        let phi = gen.formula(&vocab(), &["q", "r"], 4, 2);
        let m = random_model(seed, n, &vocab(), 0.3, &["q", "r"]);
        prop_assert_eq!(check_labeling(&m, &phi).unwrap(), check_naive(&m, &phi).unwrap());
    }
}
