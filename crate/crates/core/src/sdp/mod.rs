//! Small dense semidefinite programs.
//!
//! Problems are stated in maximization form
//!
//! ```text
//! maximize   ⟨C, X⟩ + cᵀx
//! subject to ⟨A_i, X⟩ + g_iᵀx = b_i   (i = 1..m)
//!            X ⪰ 0,  x ≥ 0
//! ```
//!
//! with dual
//!
//! ```text
//! minimize   bᵀy
//! subject to Σ y_i A_i − C ⪰ 0,  Gᵀy − c ≥ 0.
//! ```
//!
//! [`solve`] runs a primal-dual path-following method and then re-derives every
//! reported number (objectives, gap, residuals) from the returned `X`, `x` and `y`.

mod solver;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub use solver::{solve, DEFAULT_MAX_ITER, DEFAULT_TOL};

const SYMMETRY_TOL: f64 = 1e-10;

/// A symmetric matrix stored as its upper-triangular nonzeros.
///
/// An entry `(i, j, v)` with `i < j` sets both `A[i][j]` and `A[j][i]` to `v`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SparseSym {
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> &mut Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
        self
    }

    /// The matrix `E` with `⟨E, X⟩ = X[i][j]`.
    pub fn selector(i: usize, j: usize) -> Self {
        let mut m = Self::new();
        m.add(i, j, if i == j { 1.0 } else { 0.5 });
        m
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|&(_, j, _)| j).max()
    }

    /// Trace inner product `⟨A, X⟩`.
    pub fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[(i, i)] } else { v * (x[(i, j)] + x[(j, i)]) })
            .sum()
    }

    /// Adds `scale·A` into a dense matrix.
    pub fn axpy_into(&self, scale: f64, out: &mut DMatrix<f64>) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += scale * v;
            if i != j {
                out[(j, i)] += scale * v;
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, n);
        self.axpy_into(1.0, &mut out);
        out
    }

    /// Both orientations of every off-diagonal entry.
    pub(crate) fn expanded(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }
}

/// One linear equality `⟨A, X⟩ + Σ g_k x_k = b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub matrix: SparseSym,
    /// `(k, g_k)` coefficients on the nonnegative scalar block.
    pub lp: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    order: usize,
    objective: DMatrix<f64>,
    lp_cost: Vec<f64>,
    constraints: Vec<Constraint>,
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

impl SdpProblem {
    /// Problem with PSD block `objective` and no scalar block yet.
    pub fn new(objective: DMatrix<f64>) -> Result<Self> {
        Self::with_lp(objective, Vec::new())
    }

    pub fn with_lp(objective: DMatrix<f64>, lp_cost: Vec<f64>) -> Result<Self> {
        if !objective.is_square() || objective.nrows() == 0 {
            return Err(Error::Shape("objective must be a nonempty square matrix".into()));
        }
        let asym = asymmetry(&objective);
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        if objective.iter().chain(&lp_cost).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite objective".into()));
        }
        Ok(Self { order: objective.nrows(), objective, lp_cost, constraints: Vec::new() })
    }

    /// `max ⟨C, X⟩` subject to `diag(X) = ē`.
    pub fn diag_constrained(objective: DMatrix<f64>) -> Result<Self> {
        let mut p = Self::new(objective)?;
        for i in 0..p.order {
            p.add_constraint(SparseSym::selector(i, i), Vec::new(), 1.0)?;
        }
        Ok(p)
    }

    pub fn add_constraint(&mut self, matrix: SparseSym, lp: Vec<(usize, f64)>, rhs: f64) -> Result<()> {
        if matrix.max_index().is_some_and(|j| j >= self.order) {
            return Err(Error::Shape(format!("constraint index exceeds order {}", self.order)));
        }
        if let Some(&(k, _)) = lp.iter().find(|(k, _)| *k >= self.lp_cost.len()) {
            return Err(Error::Shape(format!(
                "scalar variable {k} out of range ({} declared)",
                self.lp_cost.len()
            )));
        }
        if !rhs.is_finite() {
            return Err(Error::InvalidArgument("non-finite right-hand side".into()));
        }
        self.constraints.push(Constraint { matrix, lp, rhs });
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn objective(&self) -> &DMatrix<f64> {
        &self.objective
    }

    pub fn lp_cost(&self) -> &[f64] {
        &self.lp_cost
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| c.rhs))
    }

    pub fn primal_objective(&self, x: &DMatrix<f64>, lp: &[f64]) -> f64 {
        self.objective.dot(x) + self.lp_cost.iter().zip(lp).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        self.constraints.iter().zip(y).map(|(c, v)| c.rhs * v).sum()
    }

    /// `A(X) + Gx − b`.
    pub fn constraint_residual(&self, x: &DMatrix<f64>, lp: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|c| {
                c.matrix.inner(x) + c.lp.iter().map(|&(k, g)| g * lp[k]).sum::<f64>() - c.rhs
            }),
        )
    }

    /// Dual slacks `(Σ y_i A_i − C, Gᵀy − c)`.
    pub fn dual_slack(&self, y: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
        let mut s = -self.objective.clone();
        let mut sl: Vec<f64> = self.lp_cost.iter().map(|c| -c).collect();
        for (c, &yi) in self.constraints.iter().zip(y) {
            c.matrix.axpy_into(yi, &mut s);
            for &(k, g) in &c.lp {
                sl[k] += g * yi;
            }
        }
        (s, sl)
    }

    /// JSON dump for debugging; the layout is not a stable interface.
    pub fn to_debug_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            order: usize,
            objective: Vec<Vec<f64>>,
            lp_cost: &'a [f64],
            constraints: &'a [Constraint],
        }
        serde_json::to_string(&Dump {
            order: self.order,
            objective: crate::io::matrix_to_rows(&self.objective),
            lp_cost: &self.lp_cost,
            constraints: &self.constraints,
        })
        .expect("problem serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    InfeasibleDetected,
}

/// Per-iteration measurements, all recomputed from the iterate.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub trace: f64,
    pub lp_sum: f64,
    pub y_norm: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Primal PSD block.
    pub x: DMatrix<f64>,
    /// Primal nonnegative scalar block.
    pub lp: Vec<f64>,
    /// Dual multipliers, one per constraint.
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    /// `‖A(X) + Gx − b‖_∞`, plus any negative curvature of `X` or `x`.
    pub primal_infeas: f64,
    /// How far `(Σ y_i A_i − C, Gᵀy − c)` is from the dual cone.
    pub dual_infeas: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    /// Number of times a factorization needed the diagonal shift.
    pub regularizations: usize,
    pub history: Vec<IterationRecord>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// Measurements of a candidate primal/dual pair, derived only from the pair.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Certified {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
}

pub(crate) fn certify(p: &SdpProblem, x: &DMatrix<f64>, lp: &[f64], y: &[f64]) -> Certified {
    let primal_objective = p.primal_objective(x, lp);
    let dual_objective = p.dual_objective(y);
    let residual = p.constraint_residual(x, lp).amax();
    let x_neg = (-symmetric_min_eigenvalue(x)).max(0.0);
    let lp_neg = lp.iter().fold(0.0f64, |acc, v| acc.max(-v));
    let (s, sl) = p.dual_slack(y);
    let s_neg = (-symmetric_min_eigenvalue(&s)).max(0.0);
    let sl_neg = sl.iter().fold(0.0f64, |acc, v| acc.max(-v));
    Certified {
        primal_objective,
        dual_objective,
        gap: (primal_objective - dual_objective).abs(),
        primal_infeas: residual.max(x_neg).max(lp_neg),
        dual_infeas: s_neg.max(sl_neg),
    }
}

pub(crate) fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!("{:?} matrix is not square", m.shape())));
    }
    let scale = m.amax().max(1.0);
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(m)?;
    if m.nrows() == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    Ok(symmetric_min_eigenvalue(m))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    Ok(-min_eigenvalue(&-m)?)
}

/// Factor a PSD matrix as a Gram matrix: returns `v_i` with `v_i · v_j = X[i][j]`.
///
/// Eigenvalues at or below `tol` are dropped, so the vector dimension is the
/// numerical rank (at least 1).
pub fn gram_factor(x: &DMatrix<f64>, tol: f64) -> Result<Vec<DVector<f64>>> {
    check_symmetric(x)?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let eig = SymmetricEigen::new((x + x.transpose()) * 0.5);
    let min = eig.eigenvalues.min();
    if min < -tol {
        return Err(Error::NotPsd(min));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let kept: Vec<usize> = order.into_iter().filter(|&k| eig.eigenvalues[k] > tol).collect();
    let dim = kept.len().max(1);
    Ok((0..n)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            for (slot, &k) in kept.iter().enumerate() {
                v[slot] = eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt();
            }
            v
        })
        .collect())
}
