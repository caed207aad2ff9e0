//! Infeasible primal-dual path-following with the HKM search direction and
//! Mehrotra's predictor-corrector.
//!
//! Internally the problem is handled in minimization form `min ⟨−C, X⟩ − cᵀx`,
//! whose dual variable is the negation of the reported one.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{certify, IterationRecord, SdpProblem, SdpSolution, SdpStatus};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

const REGULARIZATION: f64 = 1e-12;
const MAX_REGULARIZATION_ATTEMPTS: usize = 5;
const DIVERGENCE: f64 = 1e12;
const MAX_REFINEMENTS: usize = 8;

struct Operators<'a> {
    p: &'a SdpProblem,
    expanded: Vec<Vec<(usize, usize, f64)>>,
    // constraint rows touching each scalar variable
    lp_columns: Vec<Vec<(usize, f64)>>,
}

impl<'a> Operators<'a> {
    fn new(p: &'a SdpProblem) -> Self {
        let mut lp_columns = vec![Vec::new(); p.lp_cost.len()];
        for (i, c) in p.constraints.iter().enumerate() {
            for &(k, g) in &c.lp {
                lp_columns[k].push((i, g));
            }
        }
        Self { p, expanded: p.constraints.iter().map(|c| c.matrix.expanded()).collect(), lp_columns }
    }

    fn m(&self) -> usize {
        self.p.constraints.len()
    }

    /// `A(X) + Gx`.
    fn apply(&self, x: &DMatrix<f64>, lp: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.p.constraints.iter().map(|c| {
                c.matrix.inner(x) + c.lp.iter().map(|&(k, g)| g * lp[k]).sum::<f64>()
            }),
        )
    }

    /// `(Σ y_i A_i, Gᵀy)`.
    fn adjoint(&self, y: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.p.order;
        let mut s = DMatrix::zeros(n, n);
        for (c, &yi) in self.p.constraints.iter().zip(y.iter()) {
            c.matrix.axpy_into(yi, &mut s);
        }
        let sl = DVector::from_iterator(
            self.lp_columns.len(),
            self.lp_columns.iter().map(|col| col.iter().map(|&(i, g)| g * y[i]).sum()),
        );
        (s, sl)
    }

    /// Schur complement `M_ij = tr(A_i X A_j W) + Σ_k g_ik g_jk d_k`.
    fn schur(&self, x: &DMatrix<f64>, w: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for &(p, q, v) in &self.expanded[i] {
                    for &(r, s, u) in &self.expanded[j] {
                        acc += v * u * x[(q, r)] * w[(s, p)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        for (col, &dk) in self.lp_columns.iter().zip(d.iter()) {
            for &(i, gi) in col {
                for &(j, gj) in col {
                    if i <= j {
                        out[(i, j)] += gi * gj * dk;
                    }
                }
            }
        }
        out.fill_lower_triangle_with_upper_triangle();
        out
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Cholesky with escalating diagonal shifts starting at `REGULARIZATION`.
fn factor(m: &DMatrix<f64>, shifts: &mut usize) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut eps = REGULARIZATION * scale;
    for attempt in 1..=MAX_REGULARIZATION_ATTEMPTS {
        *shifts += 1;
        let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * eps;
        if let Some(c) = Cholesky::new(shifted) {
            return Ok(c);
        }
        if attempt == MAX_REGULARIZATION_ATTEMPTS {
            break;
        }
        eps *= 100.0;
    }
    Err(Error::Singular { attempts: MAX_REGULARIZATION_ATTEMPTS })
}

/// Solves `M·dy = rhs` with a possibly shifted factor of `M`, refining against the
/// unshifted `M` while the residual keeps shrinking.
fn schur_solve(m: &DMatrix<f64>, chol: &Cholesky<f64, Dyn>, rhs: &DVector<f64>) -> DVector<f64> {
    let mut dy = chol.solve(rhs);
    let mut residual = rhs - m * &dy;
    let mut norm = residual.amax();
    for _ in 0..MAX_REFINEMENTS {
        let next = &dy + chol.solve(&residual);
        let next_residual = rhs - m * &next;
        let next_norm = next_residual.amax();
        if !(next_norm < norm) {
            break;
        }
        (dy, residual, norm) = (next, next_residual, next_norm);
    }
    dy
}

/// Largest `α` with `X + α·dX ⪰ 0` (infinite if `dX ⪰ 0`).
fn psd_step(chol_x: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol_x.l();
    let Some(t) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(t2) = l.solve_lower_triangular(&t.transpose()) else { return 0.0 };
    let lambda = symmetrize(&t2).symmetric_eigenvalues().min();
    if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    }
}

fn lp_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Iterate {
    x: DMatrix<f64>,
    xl: DVector<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
    zl: DVector<f64>,
}

struct Direction {
    dx: DMatrix<f64>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dzl: DVector<f64>,
}

/// Solve `p` to absolute tolerance `tol` on gap and residuals.
///
/// Iteration aims for `tol/2`; if progress stops first (Newton steps break down
/// near a degenerate optimum), the best iterate is accepted when it is within `tol`.
///
/// Returns [`SdpStatus::MaxIterations`] with the best iterate found when the
/// tolerance is not reached, and [`SdpStatus::InfeasibleDetected`] when the
/// iterates diverge.
pub fn solve(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let ops = Operators::new(p);
    let n = p.order;
    let nl = p.lp_cost.len();
    let m = ops.m();
    let dim = (n + nl) as f64;

    // minimization data
    let c = -&p.objective;
    let cl = DVector::from_iterator(nl, p.lp_cost.iter().map(|v| -v));
    let b = p.rhs();

    let mut it = Iterate {
        x: DMatrix::identity(n, n),
        xl: DVector::from_element(nl, 1.0),
        y: DVector::zeros(m),
        z: DMatrix::identity(n, n),
        zl: DVector::from_element(nl, 1.0),
    };

    let mut regularizations = 0;
    let mut history = Vec::new();
    let mut best: Option<(f64, DMatrix<f64>, Vec<f64>, Vec<f64>)> = None;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;

    for iter in 0..=max_iter {
        iterations = iter;
        let y_rep: Vec<f64> = it.y.iter().map(|v| -v).collect();
        let xl_rep: Vec<f64> = it.xl.iter().copied().collect();
        let cert = certify(p, &it.x, &xl_rep, &y_rep);
        history.push(IterationRecord {
            primal_objective: cert.primal_objective,
            dual_objective: cert.dual_objective,
            primal_infeas: cert.primal_infeas,
            dual_infeas: cert.dual_infeas,
            trace: it.x.trace(),
            lp_sum: it.xl.sum(),
            y_norm: it.y.norm(),
        });
        let score = cert.gap.max(cert.primal_infeas).max(cert.dual_infeas);
        if best.as_ref().is_none_or(|(s, ..)| score < *s) {
            best = Some((score, it.x.clone(), xl_rep, y_rep));
        }
        if cert.gap <= 0.5 * tol && cert.primal_infeas <= 0.5 * tol && cert.dual_infeas <= 0.5 * tol {
            status = SdpStatus::Optimal;
            break;
        }
        if it.x.amax() > DIVERGENCE || it.y.amax() > DIVERGENCE || it.xl.amax() > DIVERGENCE {
            status = SdpStatus::InfeasibleDetected;
            break;
        }
        if iter == max_iter {
            break;
        }

        let (aty, gty) = ops.adjoint(&it.y);
        let rp = &b - ops.apply(&it.x, &it.xl);
        let rd = &c - &it.z - aty;
        let rdl = &cl - &it.zl - gty;
        let mu = (it.x.dot(&it.z) + it.xl.dot(&it.zl)) / dim;

        let chol_z = factor(&symmetrize(&it.z), &mut regularizations)?;
        let w = symmetrize(&chol_z.inverse());
        let d = it.xl.component_div(&it.zl);
        let schur = ops.schur(&it.x, &w, &d);
        let chol_m = factor(&schur, &mut regularizations)?;

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Direction {
            // H = σμ·W − X − X·Rd·W − ΔXa·ΔZa·W
            let mut h = &w * sigma_mu - &it.x - &it.x * &rd * &w;
            let mut hl = DVector::from_fn(nl, |k, _| {
                sigma_mu / it.zl[k] - it.xl[k] - it.xl[k] * rdl[k] / it.zl[k]
            });
            if let Some(a) = corr {
                h -= &a.dx * &a.dz * &w;
                hl -= a.dxl.component_mul(&a.dzl).component_div(&it.zl);
            }
            let h = symmetrize(&h);
            let rhs = &rp - ops.apply(&h, &hl);
            let dy = schur_solve(&schur, &chol_m, &rhs);
            let (atdy, gtdy) = ops.adjoint(&dy);
            let dz = &rd - &atdy;
            let dzl = &rdl - &gtdy;
            // rd − dz = Aᵀdy exactly; forming it directly avoids cancellation that the
            // large ratios in `d` would amplify
            let dx = symmetrize(&(&h + &it.x * &atdy * &w));
            let dxl = &hl + d.component_mul(&gtdy);
            Direction { dx, dxl, dy, dz, dzl }
        };

        let chol_x = match Cholesky::new(symmetrize(&it.x)) {
            Some(ch) => ch,
            None => break,
        };
        let chol_zs = chol_z;
        let steps = |dir: &Direction| -> (f64, f64) {
            let ap = psd_step(&chol_x, &dir.dx).min(lp_step(&it.xl, &dir.dxl));
            let ad = psd_step(&chol_zs, &dir.dz).min(lp_step(&it.zl, &dir.dzl));
            (ap, ad)
        };

        // predictor
        let aff = direction(0.0, None);
        let (ap, ad) = steps(&aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = ((&it.x + &aff.dx * ap).dot(&(&it.z + &aff.dz * ad))
            + (&it.xl + &aff.dxl * ap).dot(&(&it.zl + &aff.dzl * ad)))
            / dim;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let dir = direction(sigma * mu, Some(&aff));
        let (ap, ad) = steps(&dir);
        let gamma = 0.9 + 0.05 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);

        it.x = symmetrize(&(&it.x + &dir.dx * ap));
        it.xl += &dir.dxl * ap;
        it.y += &dir.dy * ad;
        it.z = symmetrize(&(&it.z + &dir.dz * ad));
        it.zl += &dir.dzl * ad;
    }

    let (x, lp, y) = if status == SdpStatus::Optimal {
        (it.x, it.xl.iter().copied().collect(), it.y.iter().map(|v| -v).collect())
    } else {
        let (score, x, lp, y) = best.expect("at least one iterate was recorded");
        // a stalled run still meets the contract if its best iterate is within tol
        if status == SdpStatus::MaxIterations && score <= tol {
            status = SdpStatus::Optimal;
        }
        (x, lp, y)
    };
    let cert = certify(p, &x, &lp, &y);
    Ok(SdpSolution {
        x,
        lp,
        y,
        primal_objective: cert.primal_objective,
        dual_objective: cert.dual_objective,
        gap: cert.gap,
        primal_infeas: cert.primal_infeas,
        dual_infeas: cert.dual_infeas,
        status,
        iterations,
        regularizations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::SparseSym;

    #[test]
    fn one_by_one() {
        let mut p = SdpProblem::new(DMatrix::from_element(1, 1, 2.5)).unwrap();
        p.add_constraint(SparseSym::selector(0, 0), vec![], 1.0).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.primal_objective - 2.5).abs() < 1e-8);
    }

    #[test]
    fn zero_objective() {
        let p = SdpProblem::diag_constrained(DMatrix::zeros(3, 3)).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.primal_objective.abs() < 1e-8);
        assert!((sol.x.trace() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn chsh_bias() {
        let b = crate::game::chsh().symmetrized_cost();
        let p = SdpProblem::diag_constrained(b).unwrap();
        let sol = solve(&p, 1e-8, 100).unwrap();
        assert!(sol.is_optimal(), "{:?} after {} iterations", sol.status, sol.iterations);
        assert!((sol.primal_objective - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(sol.gap <= 1e-8);
    }

    #[test]
    fn lp_block_only() {
        // max x0 + 2 x1 s.t. x0 + x1 = 1 (PSD block fixed to zero by ⟨I,X⟩ = 0... use X = [1])
        let mut p = SdpProblem::with_lp(DMatrix::zeros(1, 1), vec![1.0, 2.0]).unwrap();
        p.add_constraint(SparseSym::new(), vec![(0, 1.0), (1, 1.0)], 1.0).unwrap();
        p.add_constraint(SparseSym::selector(0, 0), vec![], 1.0).unwrap();
        let sol = solve(&p, 1e-9, 100).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.primal_objective - 2.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_is_not_reported_optimal() {
        // X00 = 1 and X00 = -1 cannot both hold
        let mut p = SdpProblem::new(DMatrix::zeros(1, 1)).unwrap();
        p.add_constraint(SparseSym::selector(0, 0), vec![], 1.0).unwrap();
        p.add_constraint(SparseSym::selector(0, 0), vec![], -1.0).unwrap();
        match solve(&p, 1e-8, 60) {
            Ok(sol) => assert!(!sol.is_optimal()),
            Err(Error::Singular { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
