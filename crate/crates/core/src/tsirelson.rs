//! Explicit quantum strategies from unit vectors.
//!
//! Given unit vectors `x_s, y_t ∈ Rᴺ`, Alice measures `X_s = Σ_k x_s[k]·C_k` and Bob
//! measures `Y_t = Σ_k y_t[k]·C̄_k` on the maximally entangled state
//! `(1/√d) Σ_k |k⟩|k⟩`, where the `C_k` pairwise anticommute and square to the
//! identity. Then `⟨ψ|X_s ⊗ Y_t|ψ⟩ = tr(X_s Y_tᵀ)/d = x_s·y_t`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::XorGame;
use crate::quantum::VectorStrategy;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const MAX_GENERATORS: usize = 20;

const OBSERVABLE_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

fn kron_all(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `n` pairwise anticommuting Hermitian unitaries of order `2^⌈n/2⌉`.
///
/// Generators `2k` and `2k+1` are `Z^{⊗k} ⊗ X ⊗ I…` and `Z^{⊗k} ⊗ Y ⊗ I…`.
pub fn clifford_generators(n: usize) -> Result<Vec<CMatrix>> {
    if n == 0 || n > MAX_GENERATORS {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ {MAX_GENERATORS}, got {n}")));
    }
    let q = n.div_ceil(2);
    Ok((0..n)
        .map(|j| {
            let k = j / 2;
            let mut factors = vec![pauli_z(); k];
            factors.push(if j % 2 == 0 { pauli_x() } else { pauli_y() });
            factors.resize(q, CMatrix::identity(2, 2));
            kron_all(&factors)
        })
        .collect())
}

/// Checks `O = O†` and `O² = I`.
pub fn check_observable(o: &CMatrix) -> Result<()> {
    if !o.is_square() || o.nrows() == 0 {
        return Err(Error::NotObservable(format!("{:?} matrix is not square", o.shape())));
    }
    let herm = (o - o.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let square = (o * o - CMatrix::identity(o.nrows(), o.nrows()))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if herm > OBSERVABLE_TOL || square > OBSERVABLE_TOL {
        return Err(Error::NotObservable(format!("‖O − O†‖ {herm:.3e}, ‖O² − I‖ {square:.3e}")));
    }
    Ok(())
}

/// ±1-observables for both players on the maximally entangled state of local
/// dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumStrategy {
    dim: usize,
    state: DVector<C64>,
    alice_obs: Vec<CMatrix>,
    bob_obs: Vec<CMatrix>,
}

impl QuantumStrategy {
    pub fn new(alice_obs: Vec<CMatrix>, bob_obs: Vec<CMatrix>) -> Result<Self> {
        let dim = alice_obs
            .first()
            .or(bob_obs.first())
            .map(|o| o.nrows())
            .ok_or_else(|| Error::Shape("strategy needs observables".into()))?;
        for o in alice_obs.iter().chain(&bob_obs) {
            if o.shape() != (dim, dim) {
                return Err(Error::Shape(format!("observable of shape {:?} in dimension {dim}", o.shape())));
            }
            check_observable(o)?;
        }
        Ok(Self { dim, state: maximally_entangled(dim), alice_obs, bob_obs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self) -> &DVector<C64> {
        &self.state
    }

    pub fn alice_obs(&self) -> &[CMatrix] {
        &self.alice_obs
    }

    pub fn bob_obs(&self) -> &[CMatrix] {
        &self.bob_obs
    }

    fn observables(&self, s: usize, t: usize) -> Result<(&CMatrix, &CMatrix)> {
        let x = self
            .alice_obs
            .get(s)
            .ok_or_else(|| Error::InvalidArgument(format!("no Alice question {s}")))?;
        let y = self
            .bob_obs
            .get(t)
            .ok_or_else(|| Error::InvalidArgument(format!("no Bob question {t}")))?;
        Ok((x, y))
    }

    /// Bias `Σ A[s][t]·⟨ψ|X_s ⊗ Y_t|ψ⟩` on an XOR game.
    pub fn bias(&self, g: &XorGame) -> Result<f64> {
        if g.s_count() != self.alice_obs.len() || g.t_count() != self.bob_obs.len() {
            return Err(Error::Shape("strategy does not match the game".into()));
        }
        let mut total = 0.0;
        for s in 0..g.s_count() {
            for t in 0..g.t_count() {
                total += g.cost()[(s, t)] * correlation(self, s, t)?;
            }
        }
        Ok(total)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let export = StrategyFile {
            dim: self.dim,
            state: ComplexArray::from_vector(&self.state),
            alice: self.alice_obs.iter().map(ComplexMatrix::from_matrix).collect(),
            bob: self.bob_obs.iter().map(ComplexMatrix::from_matrix).collect(),
        };
        serde_json::to_value(export).expect("strategy serializes")
    }

    /// Reads the form written by [`to_json`](Self::to_json). The state must be the
    /// maximally entangled state.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let file: StrategyFile = serde_json::from_value(v.clone())?;
        let conv = |ms: &[ComplexMatrix]| ms.iter().map(|m| m.to_matrix(file.dim)).collect::<Result<Vec<_>>>();
        let st = Self::new(conv(&file.alice)?, conv(&file.bob)?)?;
        if st.dim != file.dim {
            return Err(Error::Shape(format!("declared dimension {} but observables have {}", file.dim, st.dim)));
        }
        let state = file.state.to_vector()?;
        if state.len() != st.state.len() || (&state - &st.state).iter().any(|v| v.norm() > 1e-9) {
            return Err(Error::InvalidArgument("only the maximally entangled state is supported".into()));
        }
        Ok(st)
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexArray {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexArray {
    fn from_vector(v: &DVector<C64>) -> Self {
        Self { re: v.iter().map(|z| z.re).collect(), im: v.iter().map(|z| z.im).collect() }
    }

    fn to_vector(&self) -> Result<DVector<C64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Shape("re and im lengths differ".into()));
        }
        Ok(DVector::from_iterator(self.re.len(), self.re.iter().zip(&self.im).map(|(&r, &i)| c(r, i))))
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexMatrix {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl ComplexMatrix {
    fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| m.row_iter().map(|r| r.iter().map(f).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    fn to_matrix(&self, dim: usize) -> Result<CMatrix> {
        let ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !ok(&self.re) || !ok(&self.im) {
            return Err(Error::Shape(format!("observable is not {dim}×{dim}")));
        }
        Ok(CMatrix::from_fn(dim, dim, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    dim: usize,
    state: ComplexArray,
    alice: Vec<ComplexMatrix>,
    bob: Vec<ComplexMatrix>,
}

fn maximally_entangled(d: usize) -> DVector<C64> {
    let amp = 1.0 / (d as f64).sqrt();
    DVector::from_fn(d * d, |i, _| if i / d == i % d { c(amp, 0.0) } else { c(0.0, 0.0) })
}

fn combine(v: &DVector<f64>, gens: &[CMatrix]) -> CMatrix {
    let d = gens[0].nrows();
    let mut m = CMatrix::zeros(d, d);
    for (w, g) in v.iter().zip(gens) {
        if *w != 0.0 {
            m += g * c(*w, 0.0);
        }
    }
    m
}

/// The strategy `X_s = Σ x_s[k] C_k`, `Y_t = Σ y_t[k] C̄_k`.
///
/// Vectors are renormalized before use so the observables square to `I`
/// to rounding accuracy.
pub fn strategy_from_vectors(vs: &VectorStrategy) -> Result<QuantumStrategy> {
    let n = vs.dimension();
    let gens = clifford_generators(n)?;
    let conj: Vec<CMatrix> = gens.iter().map(|g| g.map(|z| z.conj())).collect();
    let unit = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let norm = v.norm();
        if v.len() != n || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!("vector of norm {norm} is not unit")));
        }
        Ok(v / norm)
    };
    let alice = vs.xs.iter().map(|x| Ok(combine(&unit(x)?, &gens))).collect::<Result<Vec<_>>>()?;
    let bob = vs.ys.iter().map(|y| Ok(combine(&unit(y)?, &conj))).collect::<Result<Vec<_>>>()?;
    QuantumStrategy::new(alice, bob)
}

/// `⟨ψ|X_s ⊗ Y_t|ψ⟩ = tr(X_s Y_tᵀ)/d`.
pub fn correlation(st: &QuantumStrategy, s: usize, t: usize) -> Result<f64> {
    let (x, y) = st.observables(s, t)?;
    let sum: C64 = x.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    Ok(sum.re / st.dim as f64)
}

/// `P(a, b | s, t)` as `[[P00, P01], [P10, P11]]`.
pub fn outcome_distribution(st: &QuantumStrategy, s: usize, t: usize) -> Result<[[f64; 2]; 2]> {
    let (x, y) = st.observables(s, t)?;
    let d = st.dim as f64;
    let ma = x.trace().re / d;
    let mb = y.trace().re / d;
    let corr = correlation(st, s, t)?;
    let mut p = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let sa = if a == 0 { 1.0 } else { -1.0 };
            let sb = if b == 0 { 1.0 } else { -1.0 };
            p[a][b] = (0.25 * (1.0 + sa * ma + sb * mb + sa * sb * corr)).clamp(0.0, 1.0);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn generators_anticommute() {
        for n in 1..=7 {
            let gens = clifford_generators(n).unwrap();
            let d = 1 << n.div_ceil(2);
            for (i, a) in gens.iter().enumerate() {
                assert_eq!(a.nrows(), d);
                check_observable(a).unwrap();
                for (j, b) in gens.iter().enumerate() {
                    let anti = a * b + b * a;
                    let expect = if i == j { CMatrix::identity(d, d) * c(2.0, 0.0) } else { CMatrix::zeros(d, d) };
                    assert!(max_abs(&(anti - expect)) < 1e-12);
                    let tr = (a * b).trace();
                    assert!((tr - c(if i == j { d as f64 } else { 0.0 }, 0.0)).norm() < 1e-12);
                }
            }
        }
        assert!(clifford_generators(0).is_err());
        assert!(clifford_generators(21).is_err());
    }

    #[test]
    fn shared_vector_is_perfectly_correlated() {
        let v = DVector::from_vec(vec![1.0]);
        let st = strategy_from_vectors(&VectorStrategy::new(vec![v.clone()], vec![v]).unwrap()).unwrap();
        assert!((correlation(&st, 0, 0).unwrap() - 1.0).abs() < 1e-12);
        let p = outcome_distribution(&st, 0, 0).unwrap();
        assert!((p[0][0] + p[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_are_uncorrelated() {
        let x = DVector::from_vec(vec![1.0, 0.0]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        let st = strategy_from_vectors(&VectorStrategy::new(vec![x], vec![y]).unwrap()).unwrap();
        assert!(correlation(&st, 0, 0).unwrap().abs() < 1e-12);
        for row in outcome_distribution(&st, 0, 0).unwrap() {
            for p in row {
                assert!((p - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pauli_correlations() {
        let st = QuantumStrategy::new(vec![pauli_z(), CMatrix::identity(2, 2)], vec![pauli_x(), CMatrix::identity(2, 2)])
            .unwrap();
        assert!(correlation(&st, 0, 0).unwrap().abs() < 1e-15);
        assert!((correlation(&st, 1, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(correlation(&st, 2, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let x = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        let y = DVector::from_vec(vec![0.0, 0.6, 0.8]);
        let st = strategy_from_vectors(&VectorStrategy::new(vec![x], vec![y]).unwrap()).unwrap();
        assert_eq!(QuantumStrategy::from_json(&st.to_json()).unwrap(), st);
    }
}
