mod common;

use common::{desk_corpus, Gen, Terms};
use pml_core::check::check_naive;
use pml_core::formula::parse_formula_infer;
use pml_core::reduce_tables::{
    backward_model_tbl, forward_model_tbl, is_table_shaped, reduce_tables, table_normal_form, with_fresh_props,
    LayerMode, TableConfig, TableError,
};
use pml_core::sat::{sat_bounded_with, sat_witnesses, SatBudget};
use pml_core::term::Vocabulary;

#[test]
fn desk_round_trip() {
    let corpus = desk_corpus(6, 30);
    assert_eq!(corpus.len(), 30);
    for (red, m, w) in &corpus {
        assert!(is_table_shaped(&red.star.formula, &red.source_vocab));
        let m = with_fresh_props(&red.star, m).unwrap();
        let n = forward_model_tbl(red, &m, *w).unwrap();
        for mode in [LayerMode::Truncated { depth: None }, LayerMode::Cyclic { layers: None }] {
            let back =
                backward_model_tbl(red, &n, *w, mode).unwrap_or_else(|e| panic!("{} ({mode:?}): {e}", red.source));
            assert!(check_naive(&back.model, &red.star.formula).unwrap().contains(back.world));
            eprintln!("{} | {mode:?} worlds {} transfer {:?}", red.source, back.model.world_count(), back.transfer);
        }
    }
}

#[test]
fn oracle_found_theta_models_round_trip_or_hit_the_reflexive_gap() {
    let phi = parse_formula_infer("(<(R & !rot(R))>(q) & ~q)").unwrap().0;
    let red = reduce_tables(&phi, None, &TableConfig::default()).unwrap();
    let (mut ok, mut gap) = (0, 0);
    sat_witnesses(&red.theta, 2, &SatBudget::unlimited(), &mut |m, truth| {
        for w in truth.iter() {
            match backward_model_tbl(&red, m, w, LayerMode::Cyclic { layers: None }) {
                Ok(back) => {
                    assert!(check_naive(&back.model, &phi).unwrap().contains(back.world));
                    ok += 1;
                }
                Err(TableError::Stabilizer(t)) => {
                    assert!(t.windows(2).any(|p| p[0] == p[1]), "{t:?}");
                    gap += 1;
                }
                Err(e) => panic!("{e}"),
            }
        }
        true
    })
    .unwrap();
    assert!(ok > 0);
    eprintln!("round trips {ok}, reflexive gaps {gap}");
}

/// A reflexive pair placed in two asymmetric tables satisfies `Θ`, but no
/// symmetric table is left for the reflexive layered tuples.
#[test]
fn reflexive_pairs_in_asymmetric_tables_defeat_the_construction() {
    let phi = parse_formula_infer("((q & ~<(R & rot(R))>(q)) & ~<(!R & !rot(R))>(q))").unwrap().0;
    assert!(!sat_bounded_with(&phi, 3, &SatBudget::unlimited()).unwrap().is_satisfiable());
    let red = reduce_tables(&phi, None, &TableConfig::default()).unwrap();
    let m = pml_core::model::KripkeModel::parse(
        "worlds 1\nrel TAB2_1/2\nrel TAB2_2/2 : (0,0)\nrel TAB2_3/2 : (0,0)\nrel TAB2_4/2\nprop q : 0\n",
    )
    .unwrap();
    assert!(check_naive(&m, &red.theta).unwrap().contains(0));
    let err = backward_model_tbl(&red, &m, 0, LayerMode::Cyclic { layers: None }).unwrap_err();
    assert!(matches!(err, TableError::Stabilizer(_)), "{err}");
}

#[test]
fn normal_form_is_equisatisfiable_on_small_instances() {
    let vocab = Vocabulary::parse("R/2").unwrap();
    let mut gen = Gen::new(17, Terms::Tables);
    for _ in 0..40 {
        let phi = gen.formula(&vocab, &["q"], 2, 2);
        if phi.symbols().is_empty() {
            continue;
        }
        let star = table_normal_form(&phi, None, &TableConfig::default()).unwrap();
        let a = sat_bounded_with(&phi, 2, &SatBudget::unlimited()).unwrap().is_satisfiable();
        let b = sat_bounded_with(&star.formula, 2, &SatBudget::unlimited()).unwrap().is_satisfiable();
        assert_eq!(a, b, "{phi}");
    }
}
