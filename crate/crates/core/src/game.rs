//! Game representations and the composition algebra.
//!
//! An [`XorGame`] is stored as its signed cost matrix `A[s][t] = π(s,t)·(−1)^f(s,t)`;
//! the distribution and predicate are recovered as `|A|` and `A < 0`. Composition
//! (`⊕`, convex combination, transpose) acts directly on cost matrices.
//!
//! Product question spaces (from `⊕` and `∧`) are indexed in mixed radix with the
//! first component most significant, which is the row order of a Kronecker product.
//! Answers of a conjunction are bit strings whose bit `j` (least significant first)
//! is the answer for component `j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Separator joining component labels of product questions.
pub const TUPLE_SEP: char = ',';
/// Separator between a block tag and a label in convex combinations.
pub const TAG_SEP: char = ':';

const DIST_TOL: f64 = 1e-12;

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_labels(labels: &[String], n: usize, side: &str) -> Result<()> {
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{side} has {} labels for {n} questions",
            labels.len()
        )));
    }
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidGame(format!("duplicate {side} label `{}`", w[0])));
    }
    Ok(())
}

fn check_distribution(pi: &DMatrix<f64>) -> Result<()> {
    if pi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Distribution("non-finite entry".into()));
    }
    if let Some(v) = pi.iter().find(|v| **v < 0.0) {
        return Err(Error::Distribution(format!("negative probability {v}")));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::Distribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Kronecker product of two dense matrices.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// A two-prover XOR game given by its cost matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct XorGame {
    s_labels: Vec<String>,
    t_labels: Vec<String>,
    cost: DMatrix<f64>,
}

impl XorGame {
    /// Builds a game from a cost matrix with labels `0..|S|` and `0..|T|`.
    pub fn from_cost(cost: DMatrix<f64>) -> Result<Self> {
        let (s, t) = cost.shape();
        Self::with_labels(default_labels(s), default_labels(t), cost)
    }

    pub fn with_labels(s_labels: Vec<String>, t_labels: Vec<String>, cost: DMatrix<f64>) -> Result<Self> {
        let (s, t) = cost.shape();
        if s == 0 || t == 0 {
            return Err(Error::Shape("cost matrix must be at least 1x1".into()));
        }
        check_labels(&s_labels, s, "Alice")?;
        check_labels(&t_labels, t, "Bob")?;
        check_distribution(&cost.abs())?;
        Ok(Self { s_labels, t_labels, cost })
    }

    /// Builds `G = (f, π)` from a distribution and a predicate table.
    pub fn from_tables(pi: &DMatrix<f64>, f: &DMatrix<u8>) -> Result<Self> {
        if pi.shape() != f.shape() {
            return Err(Error::Shape(format!(
                "pi is {:?} but f is {:?}",
                pi.shape(),
                f.shape()
            )));
        }
        if f.iter().any(|&b| b > 1) {
            return Err(Error::InvalidGame("f entries must be bits".into()));
        }
        check_distribution(pi)?;
        let cost = pi.zip_map(f, |p, b| if b == 1 { -p } else { p });
        Self::from_cost(cost)
    }

    /// The single-question game that is always won by equal constant answers.
    pub fn trivial() -> Self {
        Self::from_cost(DMatrix::from_element(1, 1, 1.0)).expect("1x1 game is valid")
    }

    pub fn cost(&self) -> &DMatrix<f64> {
        &self.cost
    }

    pub fn s_labels(&self) -> &[String] {
        &self.s_labels
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn s_count(&self) -> usize {
        self.cost.nrows()
    }

    pub fn t_count(&self) -> usize {
        self.cost.ncols()
    }

    pub fn pi(&self, s: usize, t: usize) -> f64 {
        self.cost[(s, t)].abs()
    }

    /// Target parity `f(s,t)`.
    pub fn f(&self, s: usize, t: usize) -> u8 {
        u8::from(self.cost[(s, t)] < 0.0)
    }

    pub fn distribution(&self) -> DMatrix<f64> {
        self.cost.abs()
    }

    pub fn predicate(&self) -> DMatrix<u8> {
        self.cost.map(|v| u8::from(v < 0.0))
    }

    /// Alice and Bob switch places.
    pub fn transpose(&self) -> Self {
        Self {
            s_labels: self.t_labels.clone(),
            t_labels: self.s_labels.clone(),
            cost: self.cost.transpose(),
        }
    }

    /// Sum modulo 2: cost matrix `A₁ ⊗ A₂`, product distribution, XOR of targets.
    pub fn xor_sum(&self, other: &Self) -> Self {
        Self {
            s_labels: join_labels(&self.s_labels, &other.s_labels),
            t_labels: join_labels(&self.t_labels, &other.t_labels),
            cost: kron(&self.cost, &other.cost),
        }
    }

    /// The symmetric order-(|S|+|T|) matrix `[[0, A/2], [Aᵀ/2, 0]]`, i.e. the cost
    /// matrix of `½G + ½Gᵀ`.
    pub fn symmetrized_cost(&self) -> DMatrix<f64> {
        let (s, t) = self.cost.shape();
        let mut b = DMatrix::zeros(s + t, s + t);
        b.view_mut((0, s), (s, t)).copy_from(&(&self.cost * 0.5));
        b.view_mut((s, 0), (t, s)).copy_from(&(self.cost.transpose() * 0.5));
        b
    }

    /// Bias `Σ A[s][t]·a_s·b_t` of a deterministic ±1 strategy given as answer bits.
    pub fn deterministic_bias(&self, alice: &[u8], bob: &[u8]) -> f64 {
        let mut total = 0.0;
        for (s, &a) in alice.iter().enumerate() {
            for (t, &b) in bob.iter().enumerate() {
                let sign = if a ^ b == 0 { 1.0 } else { -1.0 };
                total += self.cost[(s, t)] * sign;
            }
        }
        total
    }

    /// Warnings about questions that are never asked.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (s, row) in self.cost.row_iter().enumerate() {
            if row.iter().all(|v| *v == 0.0) {
                out.push(format!("Alice question `{}` has zero probability", self.s_labels[s]));
            }
        }
        for (t, col) in self.cost.column_iter().enumerate() {
            if col.iter().all(|v| *v == 0.0) {
                out.push(format!("Bob question `{}` has zero probability", self.t_labels[t]));
            }
        }
        out
    }
}

fn join_labels(a: &[String], b: &[String]) -> Vec<String> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| format!("{x}{TUPLE_SEP}{y}")))
        .collect()
}

fn tag_labels(tag: &str, labels: &[String]) -> Vec<String> {
    labels.iter().map(|l| format!("{tag}{TAG_SEP}{l}")).collect()
}

pub fn xor_game_from_tables(pi: &DMatrix<f64>, f: &DMatrix<u8>) -> Result<XorGame> {
    XorGame::from_tables(pi, f)
}

pub fn xor_sum(g1: &XorGame, g2: &XorGame) -> XorGame {
    g1.xor_sum(g2)
}

/// `⊕` over a list; the empty sum is the trivial game.
pub fn xor_sum_all<'a>(games: impl IntoIterator<Item = &'a XorGame>) -> XorGame {
    games
        .into_iter()
        .fold(None, |acc: Option<XorGame>, g| {
            Some(match acc {
                None => g.clone(),
                Some(a) => a.xor_sum(g),
            })
        })
        .unwrap_or_else(XorGame::trivial)
}

pub fn transpose(g: &XorGame) -> XorGame {
    g.transpose()
}

/// `λG₁ + (1−λ)G₂`: with probability λ the players play G₁, otherwise G₂, and
/// both know which. Cost matrix `[[0, λA₁], [(1−λ)A₂, 0]]`; Alice's questions are
/// `S₁ ∪ S₂`, Bob's are `T₂ ∪ T₁`.
pub fn convex_combine(lambda: f64, g1: &XorGame, g2: &XorGame) -> Result<XorGame> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} is outside [0, 1]")));
    }
    let (s1, t1) = g1.cost.shape();
    let (s2, t2) = g2.cost.shape();
    let mut cost = DMatrix::zeros(s1 + s2, t2 + t1);
    cost.view_mut((0, t2), (s1, t1)).copy_from(&(&g1.cost * lambda));
    cost.view_mut((s1, 0), (s2, t2)).copy_from(&(&g2.cost * (1.0 - lambda)));
    let mut s_labels = tag_labels("L", &g1.s_labels);
    s_labels.extend(tag_labels("R", &g2.s_labels));
    let mut t_labels = tag_labels("R", &g2.t_labels);
    t_labels.extend(tag_labels("L", &g1.t_labels));
    XorGame::with_labels(s_labels, t_labels, cost)
}

/// `½G + ½Gᵀ`, whose cost matrix is [`XorGame::symmetrized_cost`].
pub fn symmetrize(g: &XorGame) -> XorGame {
    convex_combine(0.5, g, &g.transpose()).expect("lambda = 1/2 is in range")
}

/// Win probability of playing G₁ and G₂ separately and answering the parities.
pub fn parity_play_probability(w1: f64, w2: f64) -> Result<f64> {
    for w in [w1, w2] {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!("{w} is not a probability")));
        }
    }
    Ok(w1 * w2 + (1.0 - w1) * (1.0 - w2))
}

/// A two-prover game with finite answer sets and an arbitrary 0/1 predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryGame {
    s_labels: Vec<String>,
    t_labels: Vec<String>,
    a_arity: usize,
    b_arity: usize,
    pi: DMatrix<f64>,
    // flattened V[a][b][s][t]
    predicate: Vec<u8>,
}

impl BinaryGame {
    /// `predicate` is indexed `[a][b][s][t]`.
    pub fn new(
        s_labels: Vec<String>,
        t_labels: Vec<String>,
        a_arity: usize,
        b_arity: usize,
        pi: DMatrix<f64>,
        predicate: Vec<Vec<Vec<Vec<u8>>>>,
    ) -> Result<Self> {
        let (ns, nt) = pi.shape();
        if ns == 0 || nt == 0 || a_arity == 0 || b_arity == 0 {
            return Err(Error::Shape("question and answer sets must be nonempty".into()));
        }
        check_labels(&s_labels, ns, "Alice")?;
        check_labels(&t_labels, nt, "Bob")?;
        check_distribution(&pi)?;
        let shape_ok = predicate.len() == a_arity
            && predicate.iter().all(|pa| {
                pa.len() == b_arity
                    && pa
                        .iter()
                        .all(|pb| pb.len() == ns && pb.iter().all(|ps| ps.len() == nt))
            });
        if !shape_ok {
            return Err(Error::Shape(format!(
                "predicate must be indexed [a<{a_arity}][b<{b_arity}][s<{ns}][t<{nt}]"
            )));
        }
        let flat: Vec<u8> = predicate.into_iter().flatten().flatten().flatten().collect();
        if flat.iter().any(|&v| v > 1) {
            return Err(Error::InvalidGame("predicate entries must be 0 or 1".into()));
        }
        Ok(Self { s_labels, t_labels, a_arity, b_arity, pi, predicate: flat })
    }

    /// Builds a game from a closure `V(a, b, s, t)`.
    pub fn from_fn(
        s_labels: Vec<String>,
        t_labels: Vec<String>,
        a_arity: usize,
        b_arity: usize,
        pi: DMatrix<f64>,
        accept: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let (ns, nt) = pi.shape();
        let table = (0..a_arity)
            .map(|a| {
                (0..b_arity)
                    .map(|b| {
                        (0..ns)
                            .map(|s| (0..nt).map(|t| u8::from(accept(a, b, s, t))).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(s_labels, t_labels, a_arity, b_arity, pi, table)
    }

    /// The XOR game viewed as a binary game with `V = [a ⊕ b = f(s,t)]`.
    pub fn from_xor(g: &XorGame) -> Self {
        Self::from_fn(
            g.s_labels.clone(),
            g.t_labels.clone(),
            2,
            2,
            g.distribution(),
            |a, b, s, t| (a ^ b) as u8 == g.f(s, t),
        )
        .expect("a valid XOR game converts to a valid binary game")
    }

    pub fn s_labels(&self) -> &[String] {
        &self.s_labels
    }

    pub fn t_labels(&self) -> &[String] {
        &self.t_labels
    }

    pub fn s_count(&self) -> usize {
        self.pi.nrows()
    }

    pub fn t_count(&self) -> usize {
        self.pi.ncols()
    }

    pub fn a_arity(&self) -> usize {
        self.a_arity
    }

    pub fn b_arity(&self) -> usize {
        self.b_arity
    }

    pub fn pi(&self) -> &DMatrix<f64> {
        &self.pi
    }

    pub fn accepts(&self, a: usize, b: usize, s: usize, t: usize) -> bool {
        let (ns, nt) = self.pi.shape();
        self.predicate[((a * self.b_arity + b) * ns + s) * nt + t] == 1
    }

    /// Nested `[a][b][s][t]` copy of the predicate.
    pub fn predicate_table(&self) -> Vec<Vec<Vec<Vec<u8>>>> {
        let (ns, nt) = self.pi.shape();
        (0..self.a_arity)
            .map(|a| {
                (0..self.b_arity)
                    .map(|b| {
                        (0..ns)
                            .map(|s| (0..nt).map(|t| u8::from(self.accepts(a, b, s, t))).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Parallel play of `self` and `other`; questions and answers are pairs indexed
    /// with `self`'s coordinate most significant.
    pub fn conjunction(&self, other: &Self) -> Self {
        let (ns2, nt2) = other.pi.shape();
        let (aa2, ba2) = (other.a_arity, other.b_arity);
        Self::from_fn(
            join_labels(&self.s_labels, &other.s_labels),
            join_labels(&self.t_labels, &other.t_labels),
            self.a_arity * aa2,
            self.b_arity * ba2,
            kron(&self.pi, &other.pi),
            |a, b, s, t| {
                self.accepts(a / aa2, b / ba2, s / ns2, t / nt2)
                    && other.accepts(a % aa2, b % ba2, s % ns2, t % nt2)
            },
        )
        .expect("product of valid games is valid")
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(
            self.t_labels.clone(),
            self.s_labels.clone(),
            self.b_arity,
            self.a_arity,
            self.pi.transpose(),
            |a, b, s, t| self.accepts(b, a, t, s),
        )
        .expect("transpose of a valid game is valid")
    }
}

/// Parallel play `∧ G_j` of XOR games, kept in factored form.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjunctionGame {
    components: Vec<XorGame>,
}

impl ConjunctionGame {
    pub fn new(components: Vec<XorGame>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("conjunction of zero games".into()));
        }
        if components.len() > 16 {
            return Err(Error::InvalidArgument("at most 16 components are supported".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[XorGame] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn s_count(&self) -> usize {
        self.components.iter().map(XorGame::s_count).product()
    }

    pub fn t_count(&self) -> usize {
        self.components.iter().map(XorGame::t_count).product()
    }

    /// Number of answers per question on either side, `2ⁿ`.
    pub fn answer_arity(&self) -> usize {
        1 << self.components.len()
    }

    pub fn transpose(&self) -> Self {
        Self { components: self.components.iter().map(XorGame::transpose).collect() }
    }

    /// Component question indices of Alice's product question `s`.
    pub fn split_s(&self, s: usize) -> Vec<usize> {
        split_index(s, self.components.iter().map(XorGame::s_count))
    }

    pub fn split_t(&self, t: usize) -> Vec<usize> {
        split_index(t, self.components.iter().map(XorGame::t_count))
    }

    pub fn s_label(&self, s: usize) -> String {
        let parts: Vec<&str> = self
            .split_s(s)
            .iter()
            .zip(&self.components)
            .map(|(&i, g)| g.s_labels[i].as_str())
            .collect();
        parts.join(&TUPLE_SEP.to_string())
    }

    pub fn t_label(&self, t: usize) -> String {
        let parts: Vec<&str> = self
            .split_t(t)
            .iter()
            .zip(&self.components)
            .map(|(&i, g)| g.t_labels[i].as_str())
            .collect();
        parts.join(&TUPLE_SEP.to_string())
    }

    pub fn prob(&self, s: usize, t: usize) -> f64 {
        self.split_s(s)
            .iter()
            .zip(self.split_t(t))
            .zip(&self.components)
            .map(|((&si, ti), g)| g.pi(si, ti))
            .product()
    }

    /// Per-coordinate losses `X_j = a_j ⊕ b_j ⊕ f_j(s_j, t_j)` packed as bits.
    pub fn loss_bits(&self, a: usize, b: usize, s: usize, t: usize) -> usize {
        let target = self
            .split_s(s)
            .iter()
            .zip(self.split_t(t))
            .zip(&self.components)
            .enumerate()
            .fold(0usize, |acc, (j, ((&si, ti), g))| acc | (usize::from(g.f(si, ti)) << j));
        (a ^ b ^ target) & (self.answer_arity() - 1)
    }

    pub fn wins(&self, a: usize, b: usize, s: usize, t: usize) -> bool {
        self.loss_bits(a, b, s, t) == 0
    }

    /// Materialize as a [`BinaryGame`] with `2ⁿ`-ary answers. Only for small games.
    pub fn to_binary(&self) -> BinaryGame {
        let (ns, nt) = (self.s_count(), self.t_count());
        let pi = DMatrix::from_fn(ns, nt, |s, t| self.prob(s, t));
        let k = self.answer_arity();
        BinaryGame::from_fn(
            (0..ns).map(|s| self.s_label(s)).collect(),
            (0..nt).map(|t| self.t_label(t)).collect(),
            k,
            k,
            pi,
            |a, b, s, t| self.wins(a, b, s, t),
        )
        .expect("conjunction of valid games is valid")
    }
}

/// Mixed-radix decomposition with the first radix most significant.
pub(crate) fn split_index(mut index: usize, radices: impl DoubleEndedIterator<Item = usize>) -> Vec<usize> {
    let mut digits: Vec<usize> = radices
        .rev()
        .map(|r| {
            let d = index % r;
            index /= r;
            d
        })
        .collect();
    digits.reverse();
    digits
}

pub fn conjunction(games: Vec<XorGame>) -> Result<ConjunctionGame> {
    ConjunctionGame::new(games)
}

/// Either kind of game, as produced by [`catalog`] and the file reader.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyGame {
    Xor(XorGame),
    Binary(BinaryGame),
}

impl AnyGame {
    pub fn as_xor(&self) -> Option<&XorGame> {
        match self {
            AnyGame::Xor(g) => Some(g),
            AnyGame::Binary(_) => None,
        }
    }

    /// View as a binary game; XOR games are converted.
    pub fn to_binary(&self) -> BinaryGame {
        match self {
            AnyGame::Xor(g) => BinaryGame::from_xor(g),
            AnyGame::Binary(b) => b.clone(),
        }
    }
}

/// CHSH: uniform questions in `{0,1}²`, target `s ∧ t`.
pub fn chsh() -> XorGame {
    XorGame::from_cost(DMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, -0.25]))
        .expect("CHSH is valid")
}

/// The binary game with questions uniform on `{(0,0),(0,1),(1,0)}` accepting iff
/// `s ∨ a ≠ t ∨ b`.
pub fn watrous() -> BinaryGame {
    let third = 1.0 / 3.0;
    let pi = DMatrix::from_row_slice(2, 2, &[third, third, third, 0.0]);
    // rescale so the entries sum to 1 to within rounding
    let pi = &pi / pi.sum();
    BinaryGame::from_fn(default_labels(2), default_labels(2), 2, 2, pi, |a, b, s, t| {
        (s | a) != (t | b)
    })
    .expect("the game is valid")
}

pub const CATALOG_NAMES: [&str; 2] = ["chsh", "watrous"];

pub fn catalog(name: &str) -> Result<AnyGame> {
    match name {
        "chsh" => Ok(AnyGame::Xor(chsh())),
        "watrous" => Ok(AnyGame::Binary(watrous())),
        other => Err(Error::UnknownGame(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_sum(m: &DMatrix<f64>) -> f64 {
        m.iter().map(|v| v.abs()).sum()
    }

    #[test]
    fn chsh_from_tables() {
        let pi = DMatrix::from_element(2, 2, 0.25);
        let f = DMatrix::from_fn(2, 2, |s, t| (s & t) as u8);
        let g = xor_game_from_tables(&pi, &f).unwrap();
        assert_eq!(g.cost(), &DMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, -0.25]));
        assert_eq!(g, chsh());
    }

    #[test]
    fn single_question_game() {
        let g = xor_game_from_tables(&DMatrix::from_element(1, 1, 1.0), &DMatrix::zeros(1, 1)).unwrap();
        assert_eq!(g.cost()[(0, 0)], 1.0);
    }

    #[test]
    fn rejects_bad_distributions() {
        let f = DMatrix::zeros(2, 2);
        let pi = DMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, 0.249]);
        assert!(matches!(xor_game_from_tables(&pi, &f), Err(Error::Distribution(_))));
        let pi = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, -0.5]);
        assert!(matches!(xor_game_from_tables(&pi, &f), Err(Error::Distribution(_))));
        let pi = DMatrix::from_element(2, 3, 1.0 / 6.0);
        assert!(matches!(xor_game_from_tables(&pi, &f), Err(Error::Shape(_))));
        assert!(XorGame::from_cost(DMatrix::from_element(1, 1, f64::NAN)).is_err());
    }

    #[test]
    fn xor_sum_is_kronecker() {
        let c = chsh();
        let cc = xor_sum(&c, &c);
        assert_eq!(cc.cost(), &c.cost().kronecker(c.cost()));
        assert_eq!(cc.s_labels()[1], "0,1");
        assert!((abs_sum(cc.cost()) - 1.0).abs() < 1e-12);
        assert_eq!(xor_sum(&c, &XorGame::trivial()).cost(), c.cost());
    }

    #[test]
    fn xor_sum_associative() {
        let g = convex_combine(0.3, &chsh(), &XorGame::trivial()).unwrap();
        let h = chsh().xor_sum(&g);
        let left = h.xor_sum(&g).xor_sum(&chsh());
        let right = h.xor_sum(&g.xor_sum(&chsh()));
        assert!((left.cost() - right.cost()).amax() < 1e-15);
        assert_eq!(left.s_labels(), right.s_labels());
    }

    #[test]
    fn convex_combination_blocks() {
        let c = chsh();
        let g = convex_combine(0.5, &c, &c).unwrap();
        assert_eq!(g.cost().shape(), (4, 4));
        assert!(g.cost().iter().all(|v| *v == 0.0 || v.abs() == 0.125));
        assert!((abs_sum(g.cost()) - 1.0).abs() < 1e-12);
        let sym = symmetrize(&c);
        assert_eq!(sym.cost(), &c.symmetrized_cost());
        let one = convex_combine(1.0, &c, &c.transpose()).unwrap();
        assert_eq!(one.cost().view((0, 2), (2, 2)), c.cost().view((0, 0), (2, 2)));
        assert!(convex_combine(1.5, &c, &c).is_err());
        assert!(convex_combine(-0.1, &c, &c).is_err());
    }

    #[test]
    fn transpose_involution() {
        assert_eq!(chsh().transpose().cost(), chsh().cost());
        let g = XorGame::from_cost(DMatrix::from_row_slice(2, 3, &[0.1, -0.2, 0.1, 0.3, 0.2, -0.1])).unwrap();
        assert_eq!(g.transpose().cost().shape(), (3, 2));
        assert_eq!(g.transpose().transpose(), g);
    }

    #[test]
    fn parity_play() {
        assert_eq!(parity_play_probability(0.75, 0.75).unwrap(), 0.625);
        assert_eq!(parity_play_probability(1.0, 0.3).unwrap(), 0.3);
        assert_eq!(parity_play_probability(0.5, 0.9).unwrap(), 0.5);
        assert!(parity_play_probability(1.1, 0.5).is_err());
    }

    #[test]
    fn catalog_games() {
        assert_eq!(catalog("chsh").unwrap().as_xor().unwrap(), &chsh());
        let AnyGame::Binary(w) = catalog("watrous").unwrap() else { panic!("watrous is binary") };
        assert_eq!(w.pi()[(1, 1)], 0.0);
        assert!((w.pi()[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        assert!(!w.accepts(0, 0, 0, 0));
        assert!(w.accepts(1, 0, 0, 0));
        assert!(w.accepts(0, 0, 1, 0));
        assert!(matches!(catalog("nope"), Err(Error::UnknownGame(_))));
    }

    #[test]
    fn conjunction_structure() {
        let c = chsh();
        let cc = conjunction(vec![c.clone(), c.clone()]).unwrap();
        assert_eq!((cc.s_count(), cc.t_count(), cc.answer_arity()), (4, 4, 4));
        let ccc = conjunction(vec![c.clone(), c.clone(), c]).unwrap();
        assert_eq!((ccc.s_count(), ccc.t_count()), (8, 8));
        assert!(conjunction(vec![]).is_err());
        // s = (1,1), t = (1,0): targets (1, 0)
        assert_eq!(cc.split_s(3), vec![1, 1]);
        assert!(cc.wins(0b01, 0b00, 3, 2));
        assert!(!cc.wins(0b00, 0b00, 3, 2));
        assert_eq!(cc.s_label(2), "1,0");
        assert!((cc.prob(0, 0) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_questions_are_flagged() {
        let g = XorGame::from_cost(DMatrix::from_row_slice(2, 2, &[0.5, -0.5, 0.0, 0.0])).unwrap();
        let d = g.diagnostics();
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("Alice"));
    }

    #[test]
    fn binary_conjunction_and_transpose() {
        let w = watrous();
        let ww = w.conjunction(&w);
        assert_eq!((ww.s_count(), ww.a_arity()), (4, 4));
        // s = (0,1), t = (1,0), a = (1,0), b = (0,0): 0∨1 ≠ 1∨0 fails in coordinate 1
        assert!(!ww.accepts(2, 0, 1, 2));
        let wt = w.transpose();
        assert_eq!(wt.accepts(0, 1, 0, 0), w.accepts(1, 0, 0, 0));
        let bx = BinaryGame::from_xor(&chsh());
        assert!(bx.accepts(1, 0, 1, 1));
        assert!(!bx.accepts(1, 1, 1, 1));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = XorGame::with_labels(
            vec!["a".into(), "a".into()],
            vec!["x".into()],
            DMatrix::from_element(2, 1, 0.5),
        );
        assert!(r.is_err());
    }
}
