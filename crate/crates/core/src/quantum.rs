//! Quantum biases of XOR games.
//!
//! The bias of `G` equals the optimum of
//!
//! ```text
//! (P_B)  maximize ⟨B, X⟩  subject to diag(X) = ē, X ⪰ 0
//! (D_B)  minimize Σx + Σy subject to Δ(x, y) ⪰ B
//! ```
//!
//! where `B = [[0, A/2], [Aᵀ/2, 0]]` is the cost matrix of `½G + ½Gᵀ`. A Gram
//! factorization of an optimal `X` gives unit vectors `x_s, y_t` with
//! `ε = Σ A[s][t] x_s·y_t`, and a feasible `(x, y)` for (D_B) is a certificate
//! that no strategy does better.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{kron, xor_sum_all, XorGame};
use crate::sdp::{gram_factor, solve, symmetric_min_eigenvalue, SdpProblem, SdpStatus, DEFAULT_MAX_ITER};

/// Default slack for "`Δ − B` is PSD".
pub const CERTIFICATE_TOL: f64 = 1e-7;

pub const MAX_ORDER: usize = 512;

const UNIT_TOL: f64 = 1e-8;
const OBSERVABLE_TOL: f64 = 1e-10;

/// A feasible point `(x, y)` of (D_B); its objective bounds the bias from above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
}

impl DualCertificate {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let objective = x.iter().sum::<f64>() + y.iter().sum::<f64>();
        Self { x, y, objective }
    }

    /// `x = y = ē`, feasible for every game.
    pub fn all_ones(g: &XorGame) -> Self {
        Self::new(vec![1.0; g.s_count()], vec![1.0; g.t_count()])
    }

    /// Certificate of the one-question game with `f ≡ 0`.
    pub fn trivial() -> Self {
        Self::new(vec![0.5], vec![0.5])
    }

    /// `Δ(x, y)`.
    pub fn delta(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.x.len() + self.y.len(),
            self.x.iter().chain(&self.y).copied(),
        ))
    }

    /// Rescale to `(c·x, y/c)` with `Σ c·x = Σ y/c`.
    ///
    /// The congruence by `diag(√c·I, I/√c)` fixes `B` and preserves `Δ − B ⪰ 0`,
    /// and the objective can only drop (AM-GM).
    pub fn balanced(&self) -> Result<Self> {
        let sx: f64 = self.x.iter().sum();
        let sy: f64 = self.y.iter().sum();
        if !(sx > 0.0 && sy > 0.0) {
            return Err(Error::Certificate(format!("cannot balance sums {sx} and {sy}")));
        }
        let c = (sy / sx).sqrt();
        Ok(Self::new(self.x.iter().map(|v| v * c).collect(), self.y.iter().map(|v| v / c).collect()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        let expect = Self::new(c.x.clone(), c.y.clone()).objective;
        if (expect - c.objective).abs() > 1e-9 * expect.abs().max(1.0) {
            return Err(Error::Certificate(format!(
                "stated objective {} does not match Σx + Σy = {expect}",
                c.objective
            )));
        }
        Ok(c)
    }
}

/// Unit vectors `x_s` and `y_t` of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorStrategy {
    pub xs: Vec<DVector<f64>>,
    pub ys: Vec<DVector<f64>>,
}

impl VectorStrategy {
    pub fn new(xs: Vec<DVector<f64>>, ys: Vec<DVector<f64>>) -> Result<Self> {
        let dim = xs
            .first()
            .or(ys.first())
            .map(|v| v.len())
            .ok_or_else(|| Error::Shape("vector strategy needs vectors".into()))?;
        for v in xs.iter().chain(&ys) {
            if v.len() != dim {
                return Err(Error::Shape(format!("vector of dimension {} among dimension {dim}", v.len())));
            }
            if (v.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidArgument(format!("vector of norm {} is not unit", v.norm())));
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn dimension(&self) -> usize {
        self.xs.first().or(self.ys.first()).map_or(0, |v| v.len())
    }

    /// `Σ A[s][t] x_s·y_t`.
    pub fn bias(&self, g: &XorGame) -> Result<f64> {
        if self.xs.len() != g.s_count() || self.ys.len() != g.t_count() {
            return Err(Error::Shape("vector strategy does not match the game".into()));
        }
        let cost = g.cost();
        let mut total = 0.0;
        for (s, x) in self.xs.iter().enumerate() {
            for (t, y) in self.ys.iter().enumerate() {
                total += cost[(s, t)] * x.dot(y);
            }
        }
        Ok(total)
    }
}

#[derive(Clone, Debug)]
pub struct QuantumBiasResult {
    /// Bias of `vectors`, a lower bound on the quantum bias.
    pub bias: f64,
    pub value: f64,
    pub vectors: VectorStrategy,
    /// Upper bound witness; `certificate.objective ≥ bias`.
    pub certificate: DualCertificate,
    /// `certificate.objective − bias`.
    pub gap: f64,
    pub iterations: usize,
}

fn check_order(g: &XorGame) -> Result<usize> {
    let n = g.s_count() + g.t_count();
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("game has {n} questions, limit is {MAX_ORDER}")));
    }
    Ok(n)
}

/// Quantum bias of `g` with matching vector strategy and dual certificate.
pub fn quantum_bias(g: &XorGame, tol: f64) -> Result<QuantumBiasResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    check_order(g)?;
    let b = g.symmetrized_cost();
    let problem = SdpProblem::diag_constrained(b.clone())?;
    let mut solve_tol = tol;
    let mut last = None;
    for _ in 0..3 {
        let sol = solve(&problem, solve_tol, DEFAULT_MAX_ITER)?;
        if sol.status != SdpStatus::Optimal {
            return Err(Error::Solver(format!(
                "{:?} after {} iterations: gap {:.3e}, primal infeasibility {:.3e}, dual infeasibility {:.3e}",
                sol.status, sol.iterations, sol.gap, sol.primal_infeas, sol.dual_infeas
            )));
        }
        let result = extract(g, &b, &sol.x, &sol.y, sol.iterations)?;
        if result.gap <= 2.0 * tol {
            return Ok(result);
        }
        last = Some(result);
        solve_tol *= 0.1;
    }
    let r = last.expect("at least one attempt");
    Err(Error::Solver(format!(
        "certified gap {:.3e} exceeds 2·tol after tightening the solver",
        r.gap
    )))
}

fn extract(g: &XorGame, b: &DMatrix<f64>, x: &DMatrix<f64>, y: &[f64], iterations: usize) -> Result<QuantumBiasResult> {
    let ns = g.s_count();
    // interior iterates are positive definite; drop the directions the solver is
    // still shrinking towards zero
    let sym = (x + x.transpose()) * 0.5;
    let drop = 1e-9 * sym.diagonal().max().max(1.0);
    let mut vs = gram_factor(&sym, drop).or_else(|_| gram_factor(&clamp_psd(&sym), drop))?;
    for v in &mut vs {
        let n = v.norm();
        if n > 0.0 {
            *v /= n;
        } else {
            v[0] = 1.0;
        }
    }
    let ys = vs.split_off(ns);
    let vectors = VectorStrategy { xs: vs, ys };
    let bias = vectors.bias(g)?;

    let mut dual = y.to_vec();
    let lambda = symmetric_min_eigenvalue(&(DMatrix::from_diagonal(&DVector::from_vec(dual.clone())) - b));
    if lambda < 0.0 {
        let shift = -lambda * (1.0 + 1e-9) + f64::EPSILON;
        for v in &mut dual {
            *v += shift;
        }
    }
    let ys_dual = dual.split_off(ns);
    let certificate = DualCertificate::new(dual, ys_dual).balanced()?;
    let gap = certificate.objective - bias;
    Ok(QuantumBiasResult { bias, value: (1.0 + bias) / 2.0, vectors, certificate, gap, iterations })
}

fn clamp_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Outcome of checking a certificate against a game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    /// `min_eig ≥ −tol`.
    pub ok: bool,
    /// Smallest eigenvalue of `Δ(x, y) − B`.
    pub min_eig: f64,
    /// Smallest eigenvalue of `Δ(x, y) + B`; flipping the sign of the `S` block
    /// is a congruence, so this matches `min_eig` up to rounding.
    pub plus_min_eig: f64,
    pub plus_ok: bool,
    pub objective: f64,
}

pub fn verify_certificate(cert: &DualCertificate, g: &XorGame, tol: f64) -> Result<CertificateCheck> {
    if cert.x.len() != g.s_count() || cert.y.len() != g.t_count() {
        return Err(Error::Shape(format!(
            "certificate has {}+{} weights, game has {}+{} questions",
            cert.x.len(),
            cert.y.len(),
            g.s_count(),
            g.t_count()
        )));
    }
    let b = g.symmetrized_cost();
    let delta = cert.delta();
    let min_eig = symmetric_min_eigenvalue(&(&delta - &b));
    let plus_min_eig = symmetric_min_eigenvalue(&(&delta + &b));
    Ok(CertificateCheck {
        ok: min_eig >= -tol,
        min_eig,
        plus_min_eig,
        plus_ok: plus_min_eig >= -tol,
        objective: cert.x.iter().sum::<f64>() + cert.y.iter().sum::<f64>(),
    })
}

/// A certificate for `g1 ⊕ g2` with objective `objective(c1)·objective(c2)`.
///
/// With both inputs balanced, `Δ₁ ⊗ Δ₂ − B₁ ⊗ B₂` is the average of
/// `(Δ₁ ∓ B₁) ⊗ (Δ₂ ± B₂)` and hence PSD. The rows and columns of `B₁ ⊗ B₂` indexed
/// by `S₁×S₂` and `T₁×T₂` form `½·B(g1 ⊕ g2)`, since `(A₁/2) ⊗ (A₂/2) = ½·(A₁⊗A₂)/2`.
/// Restricting to that principal submatrix and doubling gives
/// `(2·x₁⊗x₂, 2·y₁⊗y₂)`, whose objective is `4·Σx₁Σx₂ = objective₁·objective₂`.
pub fn tensor_certificates(
    c1: &DualCertificate,
    g1: &XorGame,
    c2: &DualCertificate,
    g2: &XorGame,
    tol: f64,
) -> Result<DualCertificate> {
    for (i, (c, g)) in [(c1, g1), (c2, g2)].into_iter().enumerate() {
        let check = verify_certificate(c, g, tol)?;
        if !check.ok {
            return Err(Error::Certificate(format!(
                "certificate {} fails: min eigenvalue {:.3e}",
                i + 1,
                check.min_eig
            )));
        }
    }
    let (b1, b2) = (c1.balanced()?, c2.balanced()?);
    let k = |u: &[f64], v: &[f64]| -> Vec<f64> {
        kron(&DMatrix::from_column_slice(u.len(), 1, u), &DMatrix::from_column_slice(v.len(), 1, v))
            .iter()
            .map(|w| 2.0 * w)
            .collect()
    };
    Ok(DualCertificate::new(k(&b1.x, &b2.x), k(&b1.y, &b2.y)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryBound {
    /// `(1/2ⁿ) Σ_M ε_q(⊕_{j∈M} G_j)`.
    pub bound: f64,
    /// `Π (1 + ε_q(G_j)) / 2`.
    pub closed_form: f64,
    /// `ε_q` of every subset sum, indexed by bitmask; entry 0 is the empty sum.
    pub subset_biases: Vec<f64>,
}

/// Both sides of the parallel repetition bound for `∧ G_j`.
pub fn quantum_corollary_bound(games: &[XorGame], tol: f64) -> Result<CorollaryBound> {
    if games.is_empty() || games.len() > 16 {
        return Err(Error::InvalidArgument("need between 1 and 16 games".into()));
    }
    let n = games.len();
    let subset_biases = (0u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            if mask == 0 {
                return Ok(1.0);
            }
            let sum = xor_sum_all((0..n).filter(|j| mask >> j & 1 == 1).map(|j| &games[j]));
            Ok(quantum_bias(&sum, tol)?.bias)
        })
        .collect::<Result<Vec<f64>>>()?;
    let bound = subset_biases.iter().sum::<f64>() / f64::from(1u32 << n);
    let closed_form = (0..n).map(|j| (1.0 + subset_biases[1 << j]) / 2.0).product();
    Ok(CorollaryBound { bound, closed_form, subset_biases })
}

/// For a law `p` on `{0,1}ⁿ` (bit `j` of the index is `X_j`), returns
/// `((1/2ⁿ) Σ_M E[(−1)^{⊕_{j∈M} X_j}], Pr[X = 0])`.
pub fn fourier_identity(dist: &[f64]) -> Result<(f64, f64)> {
    let len = dist.len();
    if len == 0 || !len.is_power_of_two() || len > 1 << 12 {
        return Err(Error::Distribution(format!("length {len} is not 2ⁿ with n ≤ 12")));
    }
    if dist.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(Error::Distribution("negative or non-finite probability".into()));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Distribution(format!("probabilities sum to {total}")));
    }
    let lhs = (0..len)
        .map(|mask| {
            dist.iter()
                .enumerate()
                .map(|(x, p)| if (x & mask).count_ones() % 2 == 0 { *p } else { -p })
                .sum::<f64>()
        })
        .sum::<f64>()
        / len as f64;
    Ok((lhs, dist[0]))
}

/// Checks that `O` is a real symmetric matrix with `O² = I`.
pub fn check_observable(o: &DMatrix<f64>) -> Result<()> {
    if !o.is_square() || o.nrows() == 0 {
        return Err(Error::NotObservable(format!("{:?} matrix is not square", o.shape())));
    }
    let asym = (o - o.transpose()).amax();
    let square = (o * o - DMatrix::identity(o.nrows(), o.nrows())).amax();
    if asym > OBSERVABLE_TOL || square > OBSERVABLE_TOL {
        return Err(Error::NotObservable(format!(
            "asymmetry {asym:.3e}, ‖O² − I‖ {square:.3e}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WatrousCheck {
    /// `‖M² + ⅔M − ⅓I‖_max`.
    pub identity_residual: f64,
    pub max_eig: f64,
}

/// Bias operator `M = −⅓ a₀⊗b₀ + ⅓ a₀⊗I + ⅓ I⊗b₀` of a strategy for the game
/// with predicate `s ∨ a ≠ t ∨ b` on questions `(0,0), (0,1), (1,0)`.
/// Its eigenvalues lie in `{⅓, −1}`, so no strategy has bias above ⅓.
pub fn watrous_check(a0: &DMatrix<f64>, b0: &DMatrix<f64>) -> Result<WatrousCheck> {
    check_observable(a0)?;
    check_observable(b0)?;
    let ia = DMatrix::identity(a0.nrows(), a0.nrows());
    let ib = DMatrix::identity(b0.nrows(), b0.nrows());
    let third = 1.0 / 3.0;
    let m = (kron(a0, &ib) + kron(&ia, b0) - kron(a0, b0)) * third;
    let id = DMatrix::identity(m.nrows(), m.nrows());
    let residual = (&m * &m + &m * (2.0 * third) - id * third).amax();
    let max_eig = m.symmetric_eigenvalues().max();
    Ok(WatrousCheck { identity_residual: residual, max_eig })
}
