#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use xor_arena::game::{BinaryGame, XorGame};

/// Random distribution on an `s × t` grid; about one cell in five is zero.
pub fn random_pi<R: Rng>(rng: &mut R, s: usize, t: usize) -> DMatrix<f64> {
    loop {
        let w = DMatrix::from_fn(s, t, |_, _| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() });
        let total = w.sum();
        if total > 0.0 {
            return w / total;
        }
    }
}

pub fn random_xor_game<R: Rng>(rng: &mut R, max_s: usize, max_t: usize) -> XorGame {
    let s = rng.random_range(1..=max_s);
    let t = rng.random_range(1..=max_t);
    let pi = random_pi(rng, s, t);
    let f = DMatrix::from_fn(s, t, |_, _| u8::from(rng.random_bool(0.5)));
    XorGame::from_tables(&pi, &f).unwrap()
}

pub fn random_binary_game<R: Rng>(rng: &mut R, max_s: usize, max_t: usize) -> BinaryGame {
    let s = rng.random_range(1..=max_s);
    let t = rng.random_range(1..=max_t);
    let pi = random_pi(rng, s, t);
    let v: Vec<bool> = (0..16 * s * t).map(|_| rng.random_bool(0.5)).collect();
    BinaryGame::from_fn(
        (0..s).map(|i| i.to_string()).collect(),
        (0..t).map(|i| i.to_string()).collect(),
        2,
        2,
        pi,
        |a, b, si, ti| v[((a * 2 + b) * s + si) * t + ti],
    )
    .unwrap()
}

/// `Q·diag(±1)·Qᵀ` for an orthogonal `Q` from a QR factorization.
pub fn random_observable<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let q = m.qr().q();
    let signs = DVector::from_fn(d, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    let o = &q * DMatrix::from_diagonal(&signs) * q.transpose();
    (&o + o.transpose()) * 0.5
}

pub fn random_distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

pub fn random_unit<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

pub mod arb {
    use nalgebra::DMatrix;
    use proptest::collection::vec;
    use proptest::prelude::*;
    use xor_arena::game::XorGame;

    /// XOR games with up to `max_s × max_t` questions, about a fifth of the cells zero.
    pub fn xor_game(max_s: usize, max_t: usize) -> impl Strategy<Value = XorGame> {
        (1..=max_s, 1..=max_t).prop_flat_map(|(s, t)| {
            (vec(prop_oneof![1 => Just(0.0), 4 => 0.05f64..1.0], s * t), vec(any::<bool>(), s * t)).prop_filter_map(
                "all-zero distribution",
                move |(w, f)| {
                    let total: f64 = w.iter().sum();
                    (total > 0.0).then(|| {
                        let pi = DMatrix::from_row_slice(s, t, &w) / total;
                        let f = DMatrix::from_row_slice(s, t, &f.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
                        XorGame::from_tables(&pi, &f).unwrap()
                    })
                },
            )
        })
    }

    /// Uniform-π XOR games, so values are multiples of `1/(s·t)`.
    pub fn uniform_xor_game(max_s: usize, max_t: usize) -> impl Strategy<Value = XorGame> {
        (1..=max_s, 1..=max_t).prop_flat_map(|(s, t)| {
            vec(any::<bool>(), s * t).prop_map(move |f| {
                let pi = DMatrix::from_element(s, t, 1.0 / (s * t) as f64);
                let f = DMatrix::from_row_slice(s, t, &f.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
                XorGame::from_tables(&pi, &f).unwrap()
            })
        })
    }
}
