mod common;

use nalgebra::{Complex, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xor_arena::game::{chsh, xor_sum};
use xor_arena::quantum::{quantum_bias, VectorStrategy};
use xor_arena::sdp::DEFAULT_TOL;
use xor_arena::tsirelson::{
    check_observable, clifford_generators, correlation, outcome_distribution, strategy_from_vectors, CMatrix,
    QuantumStrategy,
};

use common::arb;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_vectors(rng: &mut ChaCha8Rng, dim: usize, s: usize, t: usize) -> VectorStrategy {
    let xs = (0..s).map(|_| common::random_unit(rng, dim)).collect();
    let ys = (0..t).map(|_| common::random_unit(rng, dim)).collect();
    VectorStrategy::new(xs, ys).unwrap()
}

#[test]
fn generator_orders() {
    for (n, d) in [(1, 2), (2, 2), (3, 4), (4, 4), (5, 8), (8, 16)] {
        let gens = clifford_generators(n).unwrap();
        assert_eq!(gens.len(), n);
        for (i, a) in gens.iter().enumerate() {
            assert_eq!(a.nrows(), d);
            check_observable(a).unwrap();
            for b in &gens[i + 1..] {
                assert!(max_abs(&(a * b + b * a)) <= 1e-12);
                assert!((a * b.adjoint()).trace().norm() <= 1e-12);
            }
        }
    }
    assert!(clifford_generators(0).is_err());
}

#[test]
fn random_vectors_reproduce_dot_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for dim in 1..=8 {
        let (s, t) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let vs = random_vectors(&mut rng, dim, s, t);
        let st = strategy_from_vectors(&vs).unwrap();
        for (s, x) in vs.xs.iter().enumerate() {
            for (t, y) in vs.ys.iter().enumerate() {
                assert!((correlation(&st, s, t).unwrap() - x.dot(y)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn marginals_do_not_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for dim in [2, 3, 5] {
        let st = strategy_from_vectors(&random_vectors(&mut rng, dim, 3, 3)).unwrap();
        for s in 0..3 {
            let alice: Vec<f64> = (0..3).map(|t| {
                let p = outcome_distribution(&st, s, t).unwrap();
                p[0][0] + p[0][1]
            }).collect();
            assert!(alice.iter().all(|m| (m - alice[0]).abs() <= 1e-10));
        }
        for t in 0..3 {
            let bob: Vec<f64> = (0..3).map(|s| {
                let p = outcome_distribution(&st, s, t).unwrap();
                p[0][0] + p[1][0]
            }).collect();
            assert!(bob.iter().all(|m| (m - bob[0]).abs() <= 1e-10));
            let p = outcome_distribution(&st, 0, t).unwrap();
            assert!((p.iter().flatten().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn chsh_strategy() {
    let g = chsh();
    let r = quantum_bias(&g, DEFAULT_TOL).unwrap();
    let st = strategy_from_vectors(&r.vectors).unwrap();
    assert!((st.bias(&g).unwrap() - 0.5f64.sqrt()).abs() <= 1e-6);
    let p = outcome_distribution(&st, 1, 1).unwrap();
    let win = p[0][1] + p[1][0];
    assert!((win - (1.0 + 0.5f64.sqrt()) / 2.0).abs() <= 1e-6);
    let gg = xor_sum(&g, &g);
    let st2 = strategy_from_vectors(&quantum_bias(&gg, DEFAULT_TOL).unwrap().vectors).unwrap();
    assert!((st2.bias(&gg).unwrap() - 0.5).abs() <= 1e-6);
}

#[test]
fn rejects_non_observables() {
    let half = CMatrix::from_element(2, 2, Complex::new(0.5, 0.0));
    assert!(check_observable(&half).is_err());
    assert!(QuantumStrategy::new(vec![half.clone()], vec![half]).is_err());
    let bad = VectorStrategy::new(vec![DVector::from_vec(vec![1.0, 0.0])], vec![DVector::from_vec(vec![1.0])]);
    assert!(bad.is_err() || strategy_from_vectors(&bad.unwrap()).is_err());
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let st = strategy_from_vectors(&random_vectors(&mut rng, 3, 2, 2)).unwrap();
    let back = QuantumStrategy::from_json(&st.to_json()).unwrap();
    for (s, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        assert!((correlation(&st, s, t).unwrap() - correlation(&back, s, t).unwrap()).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vectors_round_trip_to_observables(g in arb::xor_game(4, 4)) {
        let r = quantum_bias(&g, DEFAULT_TOL).unwrap();
        let st = strategy_from_vectors(&r.vectors).unwrap();
        prop_assert!((st.bias(&g).unwrap() - r.bias).abs() <= 1e-6);
    }
}
