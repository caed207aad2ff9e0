mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use xor_arena::classical::{classical_bias, DEFAULT_BUDGET};
use xor_arena::game::{chsh, conjunction, xor_sum, xor_sum_all, BinaryGame, XorGame};
use xor_arena::quantum::quantum_bias;
use xor_arena::sdp::DEFAULT_TOL;
use xor_arena::simulate::{combine_independent, combine_parity, play, play_sharded, Arena, PlayableStrategy};
use xor_arena::tsirelson::{outcome_distribution, strategy_from_vectors, QuantumStrategy};

fn quantum_chsh() -> (QuantumStrategy, PlayableStrategy) {
    let st = strategy_from_vectors(&quantum_bias(&chsh(), DEFAULT_TOL).unwrap().vectors).unwrap();
    let playable = PlayableStrategy::quantum(&st).unwrap();
    (st, playable)
}

fn classical_chsh() -> PlayableStrategy {
    PlayableStrategy::from(&classical_bias(&chsh(), DEFAULT_BUDGET).unwrap().1)
}

fn within(report_estimate: f64, stderr: f64, target: f64) -> bool {
    (report_estimate - target).abs() <= 5.0 * stderr.max(1e-4)
}

#[test]
fn sampling_matches_outcome_distribution() {
    let (st, playable) = quantum_chsh();
    let n = 100_000u64;
    for s in 0..2 {
        for t in 0..2 {
            let law = outcome_distribution(&st, s, t).unwrap();
            let mut pi = DMatrix::zeros(2, 2);
            pi[(s, t)] = 1.0;
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let indicator =
                    BinaryGame::from_fn(vec!["0".into(), "1".into()], vec!["0".into(), "1".into()], 2, 2, pi.clone(), |x, y, _, _| {
                        (x, y) == (a, b)
                    })
                    .unwrap();
                let r = play(&playable, Arena::Binary(&indicator), n, 1000 + (s * 8 + t * 4 + a * 2 + b) as u64).unwrap();
                let p = law[a][b];
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                assert!((r.estimate - p).abs() <= 5.0 * sigma + 1e-12, "({s},{t},{a},{b}): {} vs {p}", r.estimate);
            }
        }
    }
}

#[test]
fn chsh_estimates() {
    let g = chsh();
    let r = play(&classical_chsh(), Arena::Xor(&g), 1_000_000, 7).unwrap();
    assert!(within(r.estimate, r.stderr, 0.75));
    let (_, q) = quantum_chsh();
    let r = play(&q, Arena::Xor(&g), 1_000_000, 8).unwrap();
    assert!(within(r.estimate, r.stderr, (1.0 + 0.5f64.sqrt()) / 2.0));
}

#[test]
fn composed_strategies() {
    let (_, q) = quantum_chsh();
    let gg = xor_sum(&chsh(), &chsh());
    let parity = combine_parity(vec![q.clone(), q.clone()], &[0, 1]).unwrap();
    let r = play(&parity, Arena::Xor(&gg), 400_000, 9).unwrap();
    assert!(within(r.estimate, r.stderr, 0.75), "{r:?}");

    let c = conjunction(vec![chsh(), chsh()]).unwrap();
    let indep = combine_independent(vec![classical_chsh(), classical_chsh()]).unwrap();
    let r = play(&indep, Arena::Conjunction(&c), 400_000, 10).unwrap();
    assert!(within(r.estimate, r.stderr, 9.0 / 16.0), "{r:?}");
    let fourier = r.fourier.unwrap();
    assert_eq!(fourier.mismatches, 0);
    assert!((fourier.average - r.estimate).abs() <= 1e-12);

    let indep = combine_independent(vec![q.clone(), q]).unwrap();
    let r = play(&indep, Arena::Conjunction(&c), 400_000, 11).unwrap();
    let v = (1.0 + 0.5f64.sqrt()) / 2.0;
    assert!(within(r.estimate, r.stderr, v * v), "{r:?}");
}

#[test]
fn single_component_matches_underlying() {
    let (_, q) = quantum_chsh();
    let g = chsh();
    let direct = play(&q, Arena::Xor(&g), 50_000, 12).unwrap();
    let wrapped = play(&combine_parity(vec![q.clone()], &[0]).unwrap(), Arena::Xor(&xor_sum_all([&g])), 50_000, 12).unwrap();
    assert_eq!(direct.wins, wrapped.wins);
    let c = conjunction(vec![g.clone()]).unwrap();
    let single = play(&combine_independent(vec![q]).unwrap(), Arena::Conjunction(&c), 50_000, 12).unwrap();
    assert_eq!(direct.wins, single.wins);
}

#[test]
fn empty_parity_and_constant_games() {
    let always = XorGame::trivial();
    let st = combine_parity(vec![classical_chsh()], &[]).unwrap();
    let r = play(&st, Arena::Xor(&always), 1000, 13).unwrap();
    assert_eq!(r.wins, 1000);
    assert!(play(&st, Arena::Xor(&chsh()), 10, 13).is_err());
    assert!(play(&st, Arena::Xor(&always), 0, 13).is_err());
}

#[test]
fn reports_are_reproducible() {
    let (_, q) = quantum_chsh();
    let g = chsh();
    let a = play_sharded(&q, Arena::Xor(&g), 100_000, 14, 4).unwrap();
    let b = play_sharded(&q, Arena::Xor(&g), 100_000, 14, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.shards, 4);
    let c = play_sharded(&q, Arena::Xor(&g), 100_000, 15, 4).unwrap();
    assert_ne!(a.wins, c.wins);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimates_are_probabilities(seed in any::<u64>(), trials in 1u64..5000, shards in 1u64..6) {
        let c = conjunction(vec![chsh(), chsh()]).unwrap();
        let st = combine_independent(vec![classical_chsh(), quantum_chsh().1]).unwrap();
        let r = play_sharded(&st, Arena::Conjunction(&c), trials, seed, shards).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.estimate));
        prop_assert_eq!(r.trials, trials);
        prop_assert_eq!(r.fourier.unwrap().mismatches, 0);
    }
}
