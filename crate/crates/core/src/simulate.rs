//! A seeded Monte Carlo referee.
//!
//! Each round samples `(s, t) ~ π`, asks the strategy for answers and scores them.
//! Rounds are split into shards; shard `i` draws from ChaCha8 seeded with `seed`
//! on stream `i`, so a report depends only on `(seed, trials, shards)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::DeterministicStrategy;
use crate::error::{Error, Result};
use crate::game::{split_index, BinaryGame, ConjunctionGame, XorGame};
use crate::tsirelson::{outcome_distribution, QuantumStrategy};

/// Conjunctions with at most this many components get a per-round Fourier trace.
pub const FOURIER_TRACE_LIMIT: usize = 8;

/// A strategy that can be sampled round by round.
#[derive(Clone, Debug, PartialEq)]
pub enum PlayableStrategy {
    Deterministic { alice: Vec<usize>, bob: Vec<usize> },
    /// Joint answer laws `tables[s][t][a][b]`.
    Quantum { tables: Vec<Vec<[[f64; 2]; 2]>> },
    /// Plays every component on its own coordinate and answers with the XOR of
    /// the components in `subset` (0 when the subset is empty).
    Parity { components: Vec<PlayableStrategy>, subset: Vec<usize> },
    /// Plays every component on its own coordinate; answer bit `j` is component `j`'s answer.
    Independent { components: Vec<PlayableStrategy> },
}

impl From<&DeterministicStrategy> for PlayableStrategy {
    fn from(d: &DeterministicStrategy) -> Self {
        Self::Deterministic { alice: d.alice.clone(), bob: d.bob.clone() }
    }
}

impl PlayableStrategy {
    pub fn quantum(st: &QuantumStrategy) -> Result<Self> {
        let tables = (0..st.alice_obs().len())
            .map(|s| (0..st.bob_obs().len()).map(|t| outcome_distribution(st, s, t)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Self::Quantum { tables })
    }

    /// Number of Alice and Bob questions this strategy answers.
    pub fn questions(&self) -> (usize, usize) {
        match self {
            Self::Deterministic { alice, bob } => (alice.len(), bob.len()),
            Self::Quantum { tables } => (tables.len(), tables.first().map_or(0, Vec::len)),
            Self::Parity { components, subset } => subset.iter().fold((1, 1), |(s, t), &j| {
                let (cs, ct) = components[j].questions();
                (s * cs, t * ct)
            }),
            Self::Independent { components } => components.iter().fold((1, 1), |(s, t), c| {
                let (cs, ct) = c.questions();
                (s * cs, t * ct)
            }),
        }
    }

    /// One more than the largest answer either player can give.
    pub fn answer_arity(&self) -> usize {
        match self {
            Self::Deterministic { alice, bob } => alice.iter().chain(bob).max().map_or(1, |m| m + 1),
            Self::Quantum { .. } | Self::Parity { .. } => 2,
            Self::Independent { components } => 1 << components.len(),
        }
    }

    fn component_questions(components: &[PlayableStrategy], idx: &[usize]) -> (Vec<usize>, Vec<usize>) {
        idx.iter().map(|&j| components[j].questions()).unzip()
    }

    fn sample<R: Rng>(&self, s: usize, t: usize, rng: &mut R) -> (usize, usize) {
        match self {
            Self::Deterministic { alice, bob } => (alice[s], bob[t]),
            Self::Quantum { tables } => {
                let p = &tables[s][t];
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, &w) in [p[0][0], p[0][1], p[1][0], p[1][1]].iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return (k >> 1, k & 1);
                    }
                }
                (1, 1)
            }
            Self::Parity { components, subset } => {
                let (sr, tr) = Self::component_questions(components, subset);
                let ss = split_index(s, sr.into_iter());
                let ts = split_index(t, tr.into_iter());
                let (mut a, mut b) = (0, 0);
                for (k, &j) in subset.iter().enumerate() {
                    let (aj, bj) = components[j].sample(ss[k], ts[k], rng);
                    a ^= aj;
                    b ^= bj;
                }
                (a, b)
            }
            Self::Independent { components } => {
                let all: Vec<usize> = (0..components.len()).collect();
                let (sr, tr) = Self::component_questions(components, &all);
                let ss = split_index(s, sr.into_iter());
                let ts = split_index(t, tr.into_iter());
                let (mut a, mut b) = (0, 0);
                for (j, c) in components.iter().enumerate() {
                    let (aj, bj) = c.sample(ss[j], ts[j], rng);
                    a |= aj << j;
                    b |= bj << j;
                }
                (a, b)
            }
        }
    }
}

fn require_bits(components: &[PlayableStrategy]) -> Result<()> {
    if components.iter().any(|c| c.answer_arity() > 2) {
        return Err(Error::InvalidArgument("component strategies must answer with bits".into()));
    }
    Ok(())
}

/// Strategy for `⊕_{j∈M} G_j` from strategies for each `G_j`.
pub fn combine_parity(strategies: Vec<PlayableStrategy>, subset: &[usize]) -> Result<PlayableStrategy> {
    require_bits(&strategies)?;
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if let Some(&j) = subset.iter().find(|&&j| j >= strategies.len()) {
        return Err(Error::InvalidArgument(format!("index {j} out of range for {} strategies", strategies.len())));
    }
    Ok(PlayableStrategy::Parity { components: strategies, subset })
}

/// Strategy for `∧ G_j` playing each `G_j` independently.
pub fn combine_independent(strategies: Vec<PlayableStrategy>) -> Result<PlayableStrategy> {
    if strategies.is_empty() || strategies.len() > 16 {
        return Err(Error::InvalidArgument("need between 1 and 16 strategies".into()));
    }
    require_bits(&strategies)?;
    Ok(PlayableStrategy::Independent { components: strategies })
}

/// Any game the referee can score.
#[derive(Clone, Copy, Debug)]
pub enum Arena<'a> {
    Xor(&'a XorGame),
    Binary(&'a BinaryGame),
    Conjunction(&'a ConjunctionGame),
}

impl Arena<'_> {
    fn questions(&self) -> (usize, usize) {
        match self {
            Arena::Xor(g) => (g.s_count(), g.t_count()),
            Arena::Binary(g) => (g.s_count(), g.t_count()),
            Arena::Conjunction(c) => (c.s_count(), c.t_count()),
        }
    }

    fn answer_arity(&self) -> usize {
        match self {
            Arena::Xor(_) => 2,
            Arena::Binary(g) => g.a_arity().min(g.b_arity()),
            Arena::Conjunction(c) => c.answer_arity(),
        }
    }

    fn prob(&self, s: usize, t: usize) -> f64 {
        match self {
            Arena::Xor(g) => g.pi(s, t),
            Arena::Binary(g) => g.pi()[(s, t)],
            Arena::Conjunction(c) => c.prob(s, t),
        }
    }

    fn wins(&self, a: usize, b: usize, s: usize, t: usize) -> bool {
        match self {
            Arena::Xor(g) => ((a ^ b) as u8) == g.f(s, t),
            Arena::Binary(g) => g.accepts(a, b, s, t),
            Arena::Conjunction(c) => c.wins(a, b, s, t),
        }
    }
}

/// Per-round check of `(1/2ⁿ) Σ_M (−1)^{⊕_{j∈M} X_j} = [X = 0]` where `X_j` marks a
/// loss on component `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierTrace {
    /// Mean of the left-hand side over all rounds.
    pub average: f64,
    /// Rounds where the two sides differed.
    pub mismatches: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub wins: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
    pub shards: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fourier: Option<FourierTrace>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct ShardTally {
    wins: u64,
    fourier_sum: i64,
    mismatches: u64,
}

fn fourier_lhs(loss: usize, n: usize) -> i64 {
    // 2ⁿ times the left-hand side, an integer
    (0..1usize << n)
        .map(|m| if (loss & m).count_ones() % 2 == 0 { 1 } else { -1 })
        .sum()
}

/// Plays `trials` rounds on one shard.
pub fn play(st: &PlayableStrategy, game: Arena<'_>, trials: u64, seed: u64) -> Result<SimReport> {
    play_sharded(st, game, trials, seed, 1)
}

pub fn play_sharded(st: &PlayableStrategy, game: Arena<'_>, trials: u64, seed: u64, shards: u64) -> Result<SimReport> {
    if trials == 0 || shards == 0 {
        return Err(Error::InvalidArgument("trials and shards must be positive".into()));
    }
    if st.questions() != game.questions() {
        return Err(Error::Shape(format!(
            "strategy answers {:?} questions, game asks {:?}",
            st.questions(),
            game.questions()
        )));
    }
    if st.answer_arity() > game.answer_arity() {
        return Err(Error::Shape(format!(
            "strategy answers exceed the game's {} possible answers",
            game.answer_arity()
        )));
    }
    let (ns, nt) = game.questions();
    let mut cumulative = Vec::with_capacity(ns * nt);
    let mut acc = 0.0;
    for s in 0..ns {
        for t in 0..nt {
            acc += game.prob(s, t);
            cumulative.push(acc);
        }
    }
    let trace_n = match game {
        Arena::Conjunction(c) if c.len() <= FOURIER_TRACE_LIMIT => Some(c.len()),
        _ => None,
    };

    let tallies: Vec<ShardTally> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = trials / shards + u64::from(shard < trials % shards);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut tally = ShardTally { wins: 0, fourier_sum: 0, mismatches: 0 };
            for _ in 0..count {
                let u: f64 = rng.random::<f64>() * acc;
                let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                let (s, t) = (k / nt, k % nt);
                let (a, b) = st.sample(s, t, &mut rng);
                let won = game.wins(a, b, s, t);
                tally.wins += u64::from(won);
                if let (Some(n), Arena::Conjunction(c)) = (trace_n, game) {
                    let lhs = fourier_lhs(c.loss_bits(a, b, s, t), n);
                    tally.fourier_sum += lhs;
                    if lhs != if won { 1 << n } else { 0 } {
                        tally.mismatches += 1;
                    }
                }
            }
            tally
        })
        .collect();

    let wins: u64 = tallies.iter().map(|t| t.wins).sum();
    let estimate = wins as f64 / trials as f64;
    let fourier = trace_n.map(|n| FourierTrace {
        average: tallies.iter().map(|t| t.fourier_sum).sum::<i64>() as f64 / (trials as f64 * (1u64 << n) as f64),
        mismatches: tallies.iter().map(|t| t.mismatches).sum(),
    });
    Ok(SimReport {
        trials,
        wins,
        estimate,
        stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        seed,
        shards,
        fourier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classical_bias, DEFAULT_BUDGET};
    use crate::game::{chsh, conjunction};

    fn chsh_classical() -> PlayableStrategy {
        (&classical_bias(&chsh(), DEFAULT_BUDGET).unwrap().1).into()
    }

    #[test]
    fn reproducible() {
        let g = chsh();
        let a = play_sharded(&chsh_classical(), Arena::Xor(&g), 10_000, 7, 3).unwrap();
        let b = play_sharded(&chsh_classical(), Arena::Xor(&g), 10_000, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = play_sharded(&chsh_classical(), Arena::Xor(&g), 10_000, 8, 3).unwrap();
        assert_ne!(a.wins, c.wins);
    }

    #[test]
    fn classical_chsh_rate() {
        let g = chsh();
        let r = play(&chsh_classical(), Arena::Xor(&g), 100_000, 1).unwrap();
        assert!((r.estimate - 0.75).abs() < 5.0 * r.stderr.max(1e-3));
    }

    #[test]
    fn empty_parity_always_wins() {
        let st = combine_parity(vec![chsh_classical(), chsh_classical()], &[]).unwrap();
        let g = XorGame::trivial();
        let r = play(&st, Arena::Xor(&g), 1000, 3).unwrap();
        assert_eq!(r.wins, 1000);
        assert!(combine_parity(vec![chsh_classical()], &[1]).is_err());
    }

    #[test]
    fn fourier_trace_matches_every_round() {
        let c = conjunction(vec![chsh(), chsh()]).unwrap();
        let st = combine_independent(vec![chsh_classical(), chsh_classical()]).unwrap();
        let r = play(&st, Arena::Conjunction(&c), 20_000, 5).unwrap();
        let f = r.fourier.unwrap();
        assert_eq!(f.mismatches, 0);
        assert!((f.average - r.estimate).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let c = conjunction(vec![chsh(), chsh()]).unwrap();
        assert!(play(&chsh_classical(), Arena::Conjunction(&c), 10, 0).is_err());
        assert!(play(&chsh_classical(), Arena::Xor(&chsh()), 0, 0).is_err());
    }
}
