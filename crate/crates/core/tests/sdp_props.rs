mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xor_arena::sdp::{gram_factor, max_eigenvalue, min_eigenvalue, solve, SdpProblem, SparseSym, DEFAULT_MAX_ITER, DEFAULT_TOL};

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

#[test]
fn max_cut_style_problem() {
    // ⟨J − I, X⟩ peaks at X = J
    let c = DMatrix::from_element(3, 3, 1.0) - DMatrix::identity(3, 3);
    let sol = solve(&SdpProblem::diag_constrained(c).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.primal_objective - 6.0).abs() <= 1e-6);
    let anti = DMatrix::identity(3, 3) - DMatrix::from_element(3, 3, 1.0);
    let sol = solve(&SdpProblem::diag_constrained(anti).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    // −⟨J, X⟩ + 3 is largest at Σ X = 0, reached by three unit vectors at 120°
    assert!((sol.primal_objective - 3.0).abs() <= 1e-6);
}

#[test]
fn lp_block_is_used() {
    // max ⟨C, X⟩ − x₀ with X₀₀ + x₀ = 1: the scalar is wasted, so the optimum puts everything on X
    let mut p = SdpProblem::with_lp(DMatrix::from_element(1, 1, 2.0), vec![-1.0]).unwrap();
    p.add_constraint(SparseSym::selector(0, 0), vec![(0, 1.0)], 1.0).unwrap();
    let sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.primal_objective - 2.0).abs() <= 1e-6);
    assert!(p.add_constraint(SparseSym::selector(0, 0), vec![(3, 1.0)], 1.0).is_err());
    assert!(p.add_constraint(SparseSym::selector(2, 0), Vec::new(), 1.0).is_err());
}

#[test]
fn rejects_asymmetric_input() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(SdpProblem::new(m.clone()).is_err());
    assert!(min_eigenvalue(&m).is_err());
    assert!(gram_factor(&m, 1e-9).is_err());
    assert!(gram_factor(&-DMatrix::identity(2, 2), 1e-9).is_err());
}

#[test]
fn iterates_respect_weak_duality_and_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [2, 5, 9, 16] {
        let c = random_symmetric(&mut rng, n);
        let sol = solve(&SdpProblem::diag_constrained(c).unwrap(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(sol.is_optimal(), "{:?}", sol.status);
        for rec in &sol.history {
            let slack = rec.primal_infeas + rec.dual_infeas;
            assert!(rec.primal_objective <= rec.dual_objective + slack * (1.0 + rec.y_norm + n as f64), "{rec:?}");
            assert!((rec.trace - n as f64).abs() <= n as f64 * rec.primal_infeas + 1e-9, "{rec:?}");
        }
        assert!((sol.x.trace() - n as f64).abs() <= n as f64 * DEFAULT_TOL);
        assert!(sol.gap <= DEFAULT_TOL && sol.primal_infeas <= DEFAULT_TOL && sol.dual_infeas <= DEFAULT_TOL);
    }
}

#[test]
fn solutions_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let p = SdpProblem::diag_constrained(random_symmetric(&mut rng, 12)).unwrap();
    let a = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let b = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap());
    for other in [&b, &c] {
        assert_eq!(a.x, other.x);
        assert_eq!(a.y, other.y);
        assert_eq!(a.iterations, other.iterations);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_round_trip(n in 1usize..10, rank in 1usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DMatrix::from_fn(n, rank.min(n), |_, _| rng.random_range(-1.0..1.0));
        let x = &v * v.transpose();
        let rows = gram_factor(&x, 1e-10).unwrap();
        let back = DMatrix::from_fn(n, n, |i, j| rows[i].dot(&rows[j]));
        prop_assert!((back - &x).amax() <= 1e-8);
        prop_assert!(min_eigenvalue(&x).unwrap() >= -1e-10);
        prop_assert!(max_eigenvalue(&x).unwrap() >= x.trace() / n as f64 - 1e-10);
    }

    #[test]
    fn random_problems_are_certified(n in 2usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = SdpProblem::diag_constrained(random_symmetric(&mut rng, n)).unwrap();
        let sol = solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(sol.is_optimal());
        prop_assert!((p.primal_objective(&sol.x, &sol.lp) - sol.primal_objective).abs() <= 1e-12);
        prop_assert!((p.dual_objective(&sol.y) - sol.dual_objective).abs() <= 1e-12);
        prop_assert!(sol.primal_objective <= sol.dual_objective + DEFAULT_TOL);
    }
}
