mod common;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use xor_arena::game::{
    catalog, chsh, conjunction, convex_combine, kron, parity_play_probability, symmetrize, transpose, xor_sum,
    xor_sum_all, AnyGame, XorGame,
};
use xor_arena::io::{game_from_json, game_to_json};

use common::arb;

fn abs_sum(g: &XorGame) -> f64 {
    g.cost().iter().map(|v| v.abs()).sum()
}

#[test]
fn chsh_cost_matrix() {
    let g = chsh();
    assert_eq!(g.cost(), &(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]) * 0.25));
    assert_eq!(transpose(&g), g);
    let gg = xor_sum(&g, &g);
    assert_eq!(gg.cost(), &kron(g.cost(), g.cost()));
    assert_eq!(gg.s_labels()[1], "0,1");
}

#[test]
fn trivial_game_is_identity_for_sum() {
    let g = chsh();
    assert_eq!(xor_sum(&g, &XorGame::trivial()).cost(), g.cost());
    assert_eq!(xor_sum_all(std::iter::empty()).cost(), XorGame::trivial().cost());
}

#[test]
fn convex_combination_examples() {
    let g = chsh();
    let sym = convex_combine(0.5, &g, &transpose(&g)).unwrap();
    assert_eq!(sym.cost(), symmetrize(&g).cost());
    assert!(sym.cost().iter().all(|v| *v == 0.0 || v.abs() == 0.125));
    let one = convex_combine(1.0, &g, &g).unwrap();
    assert_abs_diff_eq!(abs_sum(&one), 1.0, epsilon = 1e-12);
    assert!(convex_combine(1.5, &g, &g).is_err());
    assert!(convex_combine(-0.1, &g, &g).is_err());
}

#[test]
fn parity_play_examples() {
    assert_eq!(parity_play_probability(0.75, 0.75).unwrap(), 0.625);
    assert_eq!(parity_play_probability(1.0, 0.3).unwrap(), 0.3);
    assert_eq!(parity_play_probability(0.5, 0.9).unwrap(), 0.5);
    assert!(parity_play_probability(1.1, 0.5).is_err());
}

#[test]
fn table_validation() {
    let pi = DMatrix::from_element(2, 2, 0.2497);
    assert!(XorGame::from_tables(&pi, &DMatrix::zeros(2, 2)).is_err());
    let pi = DMatrix::from_row_slice(1, 2, &[1.5, -0.5]);
    assert!(XorGame::from_tables(&pi, &DMatrix::zeros(1, 2)).is_err());
    assert!(XorGame::from_tables(&DMatrix::from_element(1, 1, 1.0), &DMatrix::zeros(2, 1)).is_err());
    let single = XorGame::from_tables(&DMatrix::from_element(1, 1, 1.0), &DMatrix::zeros(1, 1)).unwrap();
    assert_eq!(single.cost()[(0, 0)], 1.0);
}

#[test]
fn catalog_entries() {
    let AnyGame::Binary(w) = catalog("watrous").unwrap() else { panic!("watrous is not an XOR game") };
    assert_eq!(w.pi()[(1, 1)], 0.0);
    assert!(!w.accepts(0, 0, 0, 0));
    assert!(w.accepts(1, 0, 0, 0));
    assert!(catalog("nope").is_err());
}

#[test]
fn conjunction_shapes() {
    let c = conjunction(vec![chsh(), chsh(), chsh()]).unwrap();
    assert_eq!((c.s_count(), c.t_count(), c.answer_arity()), (8, 8, 8));
    assert!(conjunction(Vec::new()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operations_preserve_distribution(g1 in arb::xor_game(4, 4), g2 in arb::xor_game(3, 3), lambda in 0.0f64..=1.0) {
        prop_assert!((abs_sum(&g1) - 1.0).abs() <= 1e-12);
        prop_assert!((abs_sum(&xor_sum(&g1, &g2)) - 1.0).abs() <= 1e-12);
        prop_assert!((abs_sum(&transpose(&g1)) - 1.0).abs() <= 1e-12);
        prop_assert!((abs_sum(&convex_combine(lambda, &g1, &g2).unwrap()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sum_is_associative(g1 in arb::xor_game(2, 3), g2 in arb::xor_game(3, 2), g3 in arb::xor_game(2, 2)) {
        let left = xor_sum(&xor_sum(&g1, &g2), &g3);
        let right = xor_sum(&g1, &xor_sum(&g2, &g3));
        prop_assert_eq!(left.cost().shape(), right.cost().shape());
        prop_assert!((left.cost() - right.cost()).amax() <= 1e-15);
    }

    #[test]
    fn transpose_is_an_involution(g in arb::xor_game(4, 4)) {
        prop_assert_eq!(transpose(&transpose(&g)), g.clone());
        let t = transpose(&g);
        prop_assert_eq!(t.cost(), &g.cost().transpose());
    }

    #[test]
    fn parity_play_is_symmetric(w1 in 0.0f64..=1.0, w2 in 0.0f64..=1.0) {
        let p = parity_play_probability(w1, w2).unwrap();
        prop_assert_eq!(p, parity_play_probability(w2, w1).unwrap());
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn files_round_trip(g in arb::xor_game(4, 4)) {
        let back = game_from_json(&game_to_json(&AnyGame::Xor(g.clone()))).unwrap();
        let AnyGame::Xor(back) = back else { panic!("read back a binary game") };
        prop_assert_eq!(back.s_labels(), g.s_labels());
        prop_assert!((back.cost() - g.cost()).amax() <= 1e-15);
    }
}
