//! Exact classical values by exhaustive search over deterministic strategies.
//!
//! Shared randomness never beats the best deterministic strategy, so every value
//! here is a maximum over deterministic answer maps. Only one side is enumerated;
//! the other side plays a best response, question by question.
//!
//! Enumeration is split into index ranges that are searched independently and
//! merged by `(max value, lowest index)`, so the reported value and witness do
//! not depend on how many chunks or threads are used.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::game::{xor_sum_all, BinaryGame, ConjunctionGame, XorGame};

/// Default cap on the number of enumerated strategies.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

const MAX_TABLE_ENTRIES: usize = 1 << 26;

/// Deterministic answer maps indexed by question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    fn swapped(self) -> Self {
        Self { alice: self.bob, bob: self.alice }
    }

    /// `{"alice": {label: answer}, "bob": {...}}`. Answers of multi-bit games are
    /// written as bit strings, component 0 first.
    pub fn to_json(&self, s_labels: &[String], t_labels: &[String], answer_bits: usize) -> Value {
        let side = |labels: &[String], answers: &[usize]| -> Value {
            let map: Map<String, Value> = labels
                .iter()
                .zip(answers)
                .map(|(l, &a)| {
                    let v = if answer_bits <= 1 {
                        json!(a)
                    } else {
                        json!((0..answer_bits).map(|j| if a >> j & 1 == 1 { '1' } else { '0' }).collect::<String>())
                    };
                    (l.clone(), v)
                })
                .collect();
            Value::Object(map)
        };
        json!({ "alice": side(s_labels, &self.alice), "bob": side(t_labels, &self.bob) })
    }

    /// Inverse of [`to_json`](Self::to_json).
    pub fn from_json(v: &Value, s_labels: &[String], t_labels: &[String]) -> Result<Self> {
        let side = |key: &str, labels: &[String]| -> Result<Vec<usize>> {
            let obj = v
                .get(key)
                .and_then(Value::as_object)
                .ok_or_else(|| Error::InvalidArgument(format!("strategy needs an `{key}` object")))?;
            labels
                .iter()
                .map(|l| {
                    let a = obj
                        .get(l)
                        .ok_or_else(|| Error::InvalidArgument(format!("no {key} answer for `{l}`")))?;
                    match a {
                        Value::Number(n) => n
                            .as_u64()
                            .map(|x| x as usize)
                            .ok_or_else(|| Error::InvalidArgument(format!("bad answer {n}"))),
                        Value::String(bits) => bits.chars().enumerate().try_fold(0usize, |acc, (j, ch)| match ch {
                            '0' => Ok(acc),
                            '1' => Ok(acc | 1 << j),
                            _ => Err(Error::InvalidArgument(format!("bad answer bits `{bits}`"))),
                        }),
                        other => Err(Error::InvalidArgument(format!("bad answer {other}"))),
                    }
                })
                .collect()
        };
        Ok(Self { alice: side("alice", s_labels)?, bob: side("bob", t_labels)? })
    }
}

pub type ProgressFn = dyn Fn(u64, u64) + Send + Sync;

/// Search parameters.
#[derive(Clone)]
pub struct SearchConfig {
    pub budget: u128,
    /// Number of independent index ranges; does not affect results.
    pub chunks: usize,
    /// Called with `(enumerated, total)` as chunks finish.
    pub progress: Option<Arc<ProgressFn>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, chunks: 64, progress: None }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: u128) -> Self {
        Self { budget, ..Self::default() }
    }
}

fn required(arity: usize, questions: usize) -> Option<u128> {
    (arity as u128).checked_pow(u32::try_from(questions).ok()?)
}

const MAX_DENOMINATOR: u64 = 1 << 20;
const MAX_SCALE: u64 = 1 << 40;

/// Denominator of the best rational approximation of `x ∈ [0, ∞)` with error below
/// `1e-13`, found by continued fractions.
fn denominator(x: f64) -> Option<u64> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > MAX_DENOMINATOR as f64 {
            return None;
        }
        let a = a as u64;
        (h0, h1) = (h1, a.checked_mul(h1)?.checked_add(h0)?);
        (k0, k1) = (k1, a.checked_mul(k1)?.checked_add(k0)?);
        if k1 > MAX_DENOMINATOR {
            return None;
        }
        if (x - h1 as f64 / k1 as f64).abs() <= 1e-13 * x.max(1.0) {
            return Some(k1);
        }
        let frac = r - a as f64;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// A common denominator `D` of all weights, when one of moderate size exists.
///
/// Searching over the integers `D·w` makes every partial sum exact, so values such
/// as `6/9` come out as the correctly rounded `2/3` whatever the summation order.
fn common_scale(weights: &[f64]) -> Option<f64> {
    let mut lcm = 1u64;
    for &w in weights {
        if w == 0.0 {
            continue;
        }
        let d = denominator(w.abs())?;
        lcm = lcm.checked_mul(d / gcd(lcm, d)).filter(|&l| l <= MAX_SCALE)?;
    }
    let scale = lcm as f64;
    weights
        .iter()
        .all(|w| (w * scale - (w * scale).round()).abs() <= 1e-6)
        .then_some(scale)
}

fn apply_scale(weights: &mut [f64]) -> f64 {
    match common_scale(weights) {
        Some(scale) => {
            for w in weights.iter_mut() {
                *w = (*w * scale).round();
            }
            scale
        }
        None => 1.0,
    }
}

/// `(best value, first index attaining it)` over `0..total`, evaluated in chunks.
fn argmax_chunked<F>(total: u64, cfg: &SearchConfig, eval: F) -> (f64, u64)
where
    F: Fn(u64, u64) -> (f64, u64) + Sync,
{
    let chunks = (cfg.chunks.max(1) as u64).min(total);
    let size = total.div_ceil(chunks);
    let done = AtomicU64::new(0);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * size;
            let hi = ((c + 1) * size).min(total);
            let r = if lo < hi { eval(lo, hi) } else { (f64::NEG_INFINITY, u64::MAX) };
            if let Some(p) = &cfg.progress {
                let d = done.fetch_add(hi.saturating_sub(lo), Ordering::Relaxed) + hi.saturating_sub(lo);
                p(d, total);
            }
            r
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, u64::MAX), |best, r| {
            if r.0 > best.0 || (r.0 == best.0 && r.1 < best.1) {
                r
            } else {
                best
            }
        })
}

/// Payoff table `w[s][a][t][b]` for a two-player game with best-responding Bob.
struct PayoffTable {
    s_count: usize,
    a_arity: usize,
    t_count: usize,
    b_arity: usize,
    w: Vec<f64>,
    /// Payoffs are stored multiplied by `scale`.
    scale: f64,
}

impl PayoffTable {
    fn build(
        s_count: usize,
        a_arity: usize,
        t_count: usize,
        b_arity: usize,
        payoff: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let entries = s_count
            .checked_mul(a_arity)
            .and_then(|v| v.checked_mul(t_count))
            .and_then(|v| v.checked_mul(b_arity))
            .filter(|&v| v <= MAX_TABLE_ENTRIES)
            .ok_or_else(|| Error::InvalidArgument("payoff table too large".into()))?;
        let mut w = Vec::with_capacity(entries);
        for s in 0..s_count {
            for a in 0..a_arity {
                for t in 0..t_count {
                    for b in 0..b_arity {
                        w.push(payoff(a, b, s, t));
                    }
                }
            }
        }
        let scale = apply_scale(&mut w);
        Ok(Self { s_count, a_arity, t_count, b_arity, w, scale })
    }

    fn row_len(&self) -> usize {
        self.t_count * self.b_arity
    }

    fn row(&self, s: usize, a: usize) -> &[f64] {
        let r = self.row_len();
        let start = (s * self.a_arity + a) * r;
        &self.w[start..start + r]
    }

    fn best_response_value(&self, sums: &[f64]) -> f64 {
        sums.chunks_exact(self.b_arity)
            .map(|bs| bs.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }

    /// Alice's strategy `index` written in base `a_arity`, question 0 least significant.
    fn decode(&self, mut index: u64) -> Vec<usize> {
        (0..self.s_count)
            .map(|_| {
                let d = (index % self.a_arity as u64) as usize;
                index /= self.a_arity as u64;
                d
            })
            .collect()
    }

    fn search_range(&self, lo: u64, hi: u64) -> (f64, u64) {
        let q = self.s_count;
        let r = self.row_len();
        let mut digits = self.decode(lo);
        // suffix[k] = Σ_{s ≥ k} w[s][a_s], stored as (q + 1) rows
        let mut suffix = vec![0.0; (q + 1) * r];
        let refresh = |suffix: &mut [f64], k: usize, digit: usize| {
            let (head, tail) = suffix.split_at_mut((k + 1) * r);
            let dst = &mut head[k * r..];
            for ((d, above), v) in dst.iter_mut().zip(&tail[..r]).zip(self.row(k, digit)) {
                *d = above + v;
            }
        };
        for k in (0..q).rev() {
            refresh(&mut suffix, k, digits[k]);
        }
        let mut best = (f64::NEG_INFINITY, lo);
        let mut index = lo;
        loop {
            let value = self.best_response_value(&suffix[..r]);
            if value > best.0 {
                best = (value, index);
            }
            index += 1;
            if index >= hi {
                break;
            }
            let mut k = 0;
            loop {
                digits[k] += 1;
                if digits[k] < self.a_arity {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            for j in (0..=k).rev() {
                refresh(&mut suffix, j, digits[j]);
            }
        }
        best
    }

    fn best_response(&self, alice: &[usize]) -> Vec<usize> {
        let mut sums = vec![0.0; self.row_len()];
        for (s, &a) in alice.iter().enumerate().rev() {
            for (acc, v) in sums.iter_mut().zip(self.row(s, a)) {
                *acc += v;
            }
        }
        sums.chunks_exact(self.b_arity)
            .map(|bs| {
                let mut arg = 0;
                for (b, &v) in bs.iter().enumerate() {
                    if v > bs[arg] {
                        arg = b;
                    }
                }
                arg
            })
            .collect()
    }

    fn solve(&self, cfg: &SearchConfig) -> Result<(f64, DeterministicStrategy)> {
        let need = required(self.a_arity, self.s_count).unwrap_or(u128::MAX);
        if need > cfg.budget {
            return Err(Error::BudgetExceeded { required: need, budget: cfg.budget });
        }
        let total = u64::try_from(need).map_err(|_| Error::BudgetExceeded { required: need, budget: cfg.budget })?;
        let (value, index) = argmax_chunked(total, cfg, |lo, hi| self.search_range(lo, hi));
        let alice = self.decode(index);
        let bob = self.best_response(&alice);
        Ok((value / self.scale, DeterministicStrategy { alice, bob }))
    }
}

/// Search a game given as a payoff, enumerating whichever side has fewer strategies.
fn search_two_sided(
    s_count: usize,
    a_arity: usize,
    t_count: usize,
    b_arity: usize,
    payoff: impl Fn(usize, usize, usize, usize) -> f64,
    cfg: &SearchConfig,
) -> Result<(f64, DeterministicStrategy)> {
    let alice_side = required(a_arity, s_count).unwrap_or(u128::MAX);
    let bob_side = required(b_arity, t_count).unwrap_or(u128::MAX);
    if bob_side < alice_side {
        let table = PayoffTable::build(t_count, b_arity, s_count, a_arity, |b, a, t, s| payoff(a, b, s, t))?;
        let (v, w) = table.solve(cfg)?;
        Ok((v, w.swapped()))
    } else {
        let table = PayoffTable::build(s_count, a_arity, t_count, b_arity, payoff)?;
        table.solve(cfg)
    }
}

/// Exact classical bias `max Σ a_s A[s][t] b_t` over `a, b ∈ {±1}`.
///
/// Enumerates sign vectors on the smaller side; the other side answers with the
/// sign of its column (or row) sum.
pub fn classical_bias(g: &XorGame, budget: u128) -> Result<(f64, DeterministicStrategy)> {
    if g.t_count() < g.s_count() {
        let (bias, w) = classical_bias(&g.transpose(), budget)?;
        return Ok((bias, w.swapped()));
    }
    let k = g.s_count();
    let need = required(2, k).unwrap_or(u128::MAX);
    if need > budget {
        return Err(Error::BudgetExceeded { required: need, budget });
    }
    let mut weights: Vec<f64> = g.cost().iter().copied().collect();
    let scale = apply_scale(&mut weights);
    let cost = DMatrix::from_vec(g.s_count(), g.t_count(), weights);
    let column_sums = |mask: u64| -> Vec<f64> {
        (0..g.t_count())
            .map(|t| {
                (0..k)
                    .map(|s| if mask >> s & 1 == 1 { -cost[(s, t)] } else { cost[(s, t)] })
                    .sum()
            })
            .collect()
    };
    let cfg = SearchConfig::with_budget(budget);
    let (bias, mask) = argmax_chunked(need as u64, &cfg, |lo, hi| {
        let mut best = (f64::NEG_INFINITY, lo);
        for mask in lo..hi {
            let v: f64 = column_sums(mask).iter().map(|c| c.abs()).sum();
            if v > best.0 {
                best = (v, mask);
            }
        }
        best
    });
    let alice = (0..k).map(|s| (mask >> s & 1) as usize).collect();
    let bob = column_sums(mask).iter().map(|&c| usize::from(c < 0.0)).collect();
    Ok((bias / scale, DeterministicStrategy { alice, bob }))
}

/// Bias of a deterministic strategy on an XOR game, by direct evaluation.
pub fn evaluate_xor(g: &XorGame, st: &DeterministicStrategy) -> f64 {
    let alice: Vec<u8> = st.alice.iter().map(|&a| a as u8).collect();
    let bob: Vec<u8> = st.bob.iter().map(|&b| b as u8).collect();
    g.deterministic_bias(&alice, &bob)
}

/// Exact `ω_c(∧ G_j)`.
pub fn classical_value_conjunction(c: &ConjunctionGame, budget: u128) -> Result<(f64, DeterministicStrategy)> {
    classical_value_conjunction_with(c, &SearchConfig::with_budget(budget))
}

pub fn classical_value_conjunction_with(
    c: &ConjunctionGame,
    cfg: &SearchConfig,
) -> Result<(f64, DeterministicStrategy)> {
    let k = c.answer_arity();
    // per-question component indices, computed once
    let s_parts: Vec<Vec<usize>> = (0..c.s_count()).map(|s| c.split_s(s)).collect();
    let t_parts: Vec<Vec<usize>> = (0..c.t_count()).map(|t| c.split_t(t)).collect();
    let comps = c.components();
    let payoff = |a: usize, b: usize, s: usize, t: usize| -> f64 {
        let mut p = 1.0;
        for (j, g) in comps.iter().enumerate() {
            let (sj, tj) = (s_parts[s][j], t_parts[t][j]);
            if ((a ^ b) >> j & 1) as u8 != g.f(sj, tj) {
                return 0.0;
            }
            p *= g.pi(sj, tj);
        }
        p
    };
    search_two_sided(c.s_count(), k, c.t_count(), k, payoff, cfg)
}

/// Win probability of a deterministic strategy on a conjunction, by direct evaluation.
pub fn evaluate_conjunction(c: &ConjunctionGame, st: &DeterministicStrategy) -> f64 {
    let mut total = 0.0;
    for (s, &a) in st.alice.iter().enumerate() {
        for (t, &b) in st.bob.iter().enumerate() {
            if c.wins(a, b, s, t) {
                total += c.prob(s, t);
            }
        }
    }
    total
}

/// Exact `ω_c` of a game with arbitrary finite answers and predicate.
pub fn classical_value_binary(g: &BinaryGame, budget: u128) -> Result<(f64, DeterministicStrategy)> {
    classical_value_binary_with(g, &SearchConfig::with_budget(budget))
}

pub fn classical_value_binary_with(g: &BinaryGame, cfg: &SearchConfig) -> Result<(f64, DeterministicStrategy)> {
    let pi = g.pi();
    search_two_sided(
        g.s_count(),
        g.a_arity(),
        g.t_count(),
        g.b_arity(),
        |a, b, s, t| if g.accepts(a, b, s, t) { pi[(s, t)] } else { 0.0 },
        cfg,
    )
}

pub fn evaluate_binary(g: &BinaryGame, st: &DeterministicStrategy) -> f64 {
    let mut total = 0.0;
    for (s, &a) in st.alice.iter().enumerate() {
        for (t, &b) in st.bob.iter().enumerate() {
            if g.accepts(a, b, s, t) {
                total += g.pi()[(s, t)];
            }
        }
    }
    total
}

/// `(1/2ⁿ) Σ_{M ⊆ [n]} ε_c(⊕_{j∈M} G_j)`, an upper bound on `ω_c(∧ G_j)`.
/// The empty sum has bias 1.
pub fn classical_corollary_bound(games: &[XorGame], budget: u128) -> Result<f64> {
    if games.is_empty() || games.len() > 16 {
        return Err(Error::InvalidArgument("need between 1 and 16 games".into()));
    }
    let n = games.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        total += if mask == 0 {
            1.0
        } else {
            let subset = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| &games[j]);
            classical_bias(&xor_sum_all(subset), budget)?.0
        };
    }
    Ok(total / f64::from(1u32 << n))
}
