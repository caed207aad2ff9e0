//! Feige–Lovász semidefinite relaxations of the classical value.
//!
//! Rows and columns of `P` are indexed by `(s, a)` for every Alice question
//! followed by `(t, b)` for every Bob question, answer index innermost. With
//! `C[(s,a)][(t,b)] = π(s,t)·V(a,b|s,t)` and `Ĉ = ½[[0, C], [Cᵀ, 0]]`:
//!
//! * `σ`: maximize `⟨Ĉ, P⟩` over `P ⪰ 0`, `P ≥ 0` entrywise, and
//!   `Σ_{a,b} P[(u,a)][(v,b)] = 1` for every pair of questions `u, v` (either side,
//!   `u = v` included).
//! * `σ̄`: the same objective over `P ⪰ 0` with entries nonnegative between an
//!   Alice and a Bob question, and `Σ_{a,b} |P[(u,a)][(v,b)]| ≤ 1` for every pair
//!   of questions of the same player.
//!
//! `σ ≤ σ̄`, and both equal the quantum value on XOR games.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{conjunction, BinaryGame, XorGame};
use crate::quantum::quantum_bias;
use crate::sdp::{solve, SdpProblem, SdpSolution, SparseSym, DEFAULT_MAX_ITER};

/// Limit on `|S| + |T|` for the public relaxations.
pub const MAX_QUESTIONS: usize = 50;

/// Limit on the number of games in [`fl_conjunction_check`].
pub const MAX_CONJUNCTION: usize = 2;

const MAX_ORDER: usize = 128;

/// `Ĉ` together with its index layout.
#[derive(Clone, Debug, PartialEq)]
pub struct FlMatrix {
    pub chat: DMatrix<f64>,
    pub s_count: usize,
    pub t_count: usize,
    pub a_arity: usize,
    pub b_arity: usize,
}

impl FlMatrix {
    pub fn order(&self) -> usize {
        self.s_count * self.a_arity + self.t_count * self.b_arity
    }

    /// Row of `(s, a)`.
    pub fn alice_index(&self, s: usize, a: usize) -> usize {
        s * self.a_arity + a
    }

    /// Row of `(t, b)`.
    pub fn bob_index(&self, t: usize, b: usize) -> usize {
        self.s_count * self.a_arity + t * self.b_arity + b
    }

    /// Questions of both players as `(first row, arity)`, Alice first.
    fn blocks(&self) -> Vec<(usize, usize, bool)> {
        (0..self.s_count)
            .map(|s| (self.alice_index(s, 0), self.a_arity, true))
            .chain((0..self.t_count).map(|t| (self.bob_index(t, 0), self.b_arity, false)))
            .collect()
    }
}

fn build_chat_any(g: &BinaryGame) -> Result<FlMatrix> {
    let fl = FlMatrix {
        chat: DMatrix::zeros(0, 0),
        s_count: g.s_count(),
        t_count: g.t_count(),
        a_arity: g.a_arity(),
        b_arity: g.b_arity(),
    };
    let n = fl.order();
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("relaxation order {n} exceeds {MAX_ORDER}")));
    }
    let mut chat = DMatrix::zeros(n, n);
    for s in 0..g.s_count() {
        for t in 0..g.t_count() {
            let p = g.pi()[(s, t)];
            for a in 0..g.a_arity() {
                for b in 0..g.b_arity() {
                    if g.accepts(a, b, s, t) {
                        let (i, j) = (fl.alice_index(s, a), fl.bob_index(t, b));
                        chat[(i, j)] = 0.5 * p;
                        chat[(j, i)] = 0.5 * p;
                    }
                }
            }
        }
    }
    Ok(FlMatrix { chat, ..fl })
}

fn require_binary(g: &BinaryGame) -> Result<()> {
    if g.a_arity() != 2 || g.b_arity() != 2 {
        return Err(Error::InvalidArgument(format!(
            "relaxation needs binary answers, game has {} and {}",
            g.a_arity(),
            g.b_arity()
        )));
    }
    if g.s_count() + g.t_count() > MAX_QUESTIONS {
        return Err(Error::InvalidArgument(format!(
            "{} questions exceed the limit of {MAX_QUESTIONS}",
            g.s_count() + g.t_count()
        )));
    }
    Ok(())
}

/// `Ĉ` for a game with binary answers.
pub fn build_chat(g: &BinaryGame) -> Result<FlMatrix> {
    require_binary(g)?;
    build_chat_any(g)
}

/// Accumulates `Σ c·M[p][q]` over ordered pairs into a symmetric functional.
#[derive(Default)]
struct Functional(BTreeMap<(usize, usize), f64>);

impl Functional {
    fn add(&mut self, p: usize, q: usize, c: f64) {
        *self.0.entry((p.min(q), p.max(q))).or_insert(0.0) += c;
    }

    fn into_sparse(self) -> SparseSym {
        let mut m = SparseSym::new();
        for ((p, q), c) in self.0 {
            if c != 0.0 {
                m.add(p, q, if p == q { c } else { 0.5 * c });
            }
        }
        m
    }
}

/// Every feasible `P` of `σ` is the Gram matrix of vectors `v_(u,a)` whose sum over
/// `a` is one common unit vector `w`: the block constraints give `‖Σ_a v_(u,a)‖ = 1`
/// and unit inner products between these sums. So `P = K·Q·Kᵀ`, where `Q` is the Gram
/// matrix of `w` and of `v_(u,a)` for all but the last answer, and the last vector
/// of each question is `w − Σ_{a<last} v_(u,a)`. The block constraints collapse to
/// `Q[w][w] = 1`; unlike the original, this program has strictly feasible points.
struct ReducedBasis {
    /// Row `i` of `K` as `(column, coefficient)` pairs.
    rows: Vec<Vec<(usize, f64)>>,
    order: usize,
}

impl ReducedBasis {
    fn new(fl: &FlMatrix) -> Self {
        let mut rows = Vec::with_capacity(fl.order());
        let mut next = 1;
        for (_, k, _) in fl.blocks() {
            let first = next;
            for _ in 0..k - 1 {
                rows.push(vec![(next, 1.0)]);
                next += 1;
            }
            let mut last = vec![(0, 1.0)];
            last.extend((first..next).map(|c| (c, -1.0)));
            rows.push(last);
        }
        Self { rows, order: next }
    }

    fn k(&self) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.rows.len(), self.order);
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                k[(i, c)] = v;
            }
        }
        k
    }

    /// `⟨E_ij, K Q Kᵀ⟩ = P[i][j]` as a functional of `Q`.
    fn entry(&self, i: usize, j: usize) -> SparseSym {
        let mut f = Functional::default();
        for &(p, a) in &self.rows[i] {
            for &(q, b) in &self.rows[j] {
                f.add(p, q, a * b);
            }
        }
        f.into_sparse()
    }
}

fn sigma_problem(fl: &FlMatrix, basis: &ReducedBasis) -> Result<SdpProblem> {
    let n = fl.order();
    let k = basis.k();
    let objective = k.transpose() * &fl.chat * &k;
    let links: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut p = SdpProblem::with_lp((&objective + objective.transpose()) * 0.5, vec![0.0; links.len()])?;
    p.add_constraint(SparseSym::selector(0, 0), Vec::new(), 1.0)?;
    // P[i][j] = w ≥ 0; the diagonal is nonnegative already
    for (idx, &(i, j)) in links.iter().enumerate() {
        p.add_constraint(basis.entry(i, j), vec![(idx, -1.0)], 0.0)?;
    }
    Ok(p)
}

fn sigma_bar_problem(fl: &FlMatrix) -> Result<SdpProblem> {
    let blocks = fl.blocks();
    let mut cross_links = Vec::new();
    // same-side question pairs with their off-diagonal entries and weights
    let mut same = Vec::new();
    for (k, &(u0, ku, u_alice)) in blocks.iter().enumerate() {
        for &(v0, kv, v_alice) in &blocks[k..] {
            if u_alice != v_alice {
                for a in 0..ku {
                    for b in 0..kv {
                        cross_links.push((u0 + a, v0 + b));
                    }
                }
                continue;
            }
            let mut entries = Vec::new();
            for a in 0..ku {
                for b in 0..kv {
                    if u0 != v0 {
                        entries.push((u0 + a, v0 + b, 1.0));
                    } else if a < b {
                        // P[a][b] and P[b][a]
                        entries.push((u0 + a, u0 + b, 2.0));
                    }
                }
            }
            same.push((u0, ku, v0 == u0, entries));
        }
    }
    let n_split: usize = same.iter().map(|s| s.3.len()).sum();
    let n_lp = cross_links.len() + 2 * n_split + same.len();
    let mut p = SdpProblem::with_lp(fl.chat.clone(), vec![0.0; n_lp])?;
    for (idx, &(i, j)) in cross_links.iter().enumerate() {
        p.add_constraint(SparseSym::selector(i, j), vec![(idx, -1.0)], 0.0)?;
    }
    // |P| ≤ p⁺ + p⁻ with P = p⁺ − p⁻; the diagonal needs no split
    let mut next = cross_links.len();
    for (idx, (u0, ku, diagonal, entries)) in same.iter().enumerate() {
        let mut row = SparseSym::new();
        if *diagonal {
            for a in 0..*ku {
                row.add(u0 + a, u0 + a, 1.0);
            }
        }
        let mut lp = Vec::with_capacity(2 * entries.len() + 1);
        for &(i, j, weight) in entries {
            p.add_constraint(SparseSym::selector(i, j), vec![(next, -1.0), (next + 1, 1.0)], 0.0)?;
            lp.push((next, weight));
            lp.push((next + 1, weight));
            next += 2;
        }
        lp.push((cross_links.len() + 2 * n_split + idx, 1.0));
        p.add_constraint(row, lp, 1.0)?;
    }
    Ok(p)
}

/// Optimum of a relaxation with its certificate data.
#[derive(Clone, Debug, Serialize)]
pub struct Relaxation {
    pub value: f64,
    /// Upper bound from the dual multipliers.
    pub dual_bound: f64,
    pub gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub iterations: usize,
}

fn run(p: &SdpProblem, tol: f64) -> Result<Relaxation> {
    let sol: SdpSolution = solve(p, tol, DEFAULT_MAX_ITER)?;
    if !sol.is_optimal() {
        return Err(Error::Solver(format!(
            "{:?} after {} iterations: gap {:.3e}, primal infeasibility {:.3e}, dual infeasibility {:.3e}",
            sol.status, sol.iterations, sol.gap, sol.primal_infeas, sol.dual_infeas
        )));
    }
    Ok(Relaxation {
        value: sol.primal_objective,
        dual_bound: sol.dual_objective,
        gap: sol.gap,
        primal_infeas: sol.primal_infeas,
        dual_infeas: sol.dual_infeas,
        iterations: sol.iterations,
    })
}

/// `σ(G)`.
pub fn sigma(g: &BinaryGame, tol: f64) -> Result<Relaxation> {
    let fl = build_chat(g)?;
    run(&sigma_problem(&fl, &ReducedBasis::new(&fl))?, tol)
}

/// `σ̄(G)`.
pub fn sigma_bar(g: &BinaryGame, tol: f64) -> Result<Relaxation> {
    run(&sigma_bar_problem(&build_chat(g)?)?, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlConjunctionReport {
    /// `σ̄(∧ G_j)` with answers widened to `{0,1}ⁿ`.
    pub sigma_bar: f64,
    /// `ω_q(G_j)` for each game.
    pub omega_q: Vec<f64>,
    pub product: f64,
    /// `|σ̄ − Π ω_q|`.
    pub gap: f64,
}

/// Compares `σ̄(∧ G_j)` with `Π ω_q(G_j)`.
pub fn fl_conjunction_check(games: &[XorGame], tol: f64) -> Result<FlConjunctionReport> {
    if games.is_empty() || games.len() > MAX_CONJUNCTION {
        return Err(Error::InvalidArgument(format!("need between 1 and {MAX_CONJUNCTION} games")));
    }
    let c = conjunction(games.to_vec())?;
    if c.s_count() > MAX_QUESTIONS || c.t_count() > MAX_QUESTIONS {
        return Err(Error::InvalidArgument(format!(
            "conjunction has {}×{} questions, limit is {MAX_QUESTIONS} per side",
            c.s_count(),
            c.t_count()
        )));
    }
    let fl = build_chat_any(&c.to_binary())?;
    let sigma_bar = run(&sigma_bar_problem(&fl)?, tol)?.value;
    let omega_q = games
        .iter()
        .map(|g| Ok(quantum_bias(g, tol)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let product = omega_q.iter().product();
    Ok(FlConjunctionReport { sigma_bar, omega_q, product, gap: (sigma_bar - product).abs() })
}
