//! Observables as eigenvalue / spectral-projector decompositions.

use num_complex::Complex64;

use crate::error::{QndError, Result};
use crate::matrix::{c, ensure_finite, is_hermitian, max_abs_diff, CMatrix};
use crate::state::Ket;
use crate::tol;

/// A Hermitian observable, stored as its spectral decomposition: one branch
/// per distinct eigenvalue, each with its orthogonal eigenspace projector.
#[derive(Debug, Clone)]
pub struct Observable {
    dim: usize,
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
}

impl Observable {
    /// Validates the spectral data: each projector must be Hermitian and
    /// idempotent, the family mutually orthogonal and complete, and the
    /// eigenvalues pairwise distinct.
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<CMatrix>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != projectors.len() {
            return Err(QndError::invalid(
                "observable",
                "eigenvalue and projector counts differ or are zero",
            ));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(QndError::invalid("observable", "non-finite eigenvalue"));
        }
        for (i, a) in eigenvalues.iter().enumerate() {
            for b in eigenvalues.iter().skip(i + 1) {
                if a == b {
                    return Err(QndError::invalid(
                        "observable",
                        format!("repeated eigenvalue {a}"),
                    ));
                }
            }
        }
        let dim = projectors[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            ensure_finite(p, "observable projector")?;
            if p.shape() != (dim, dim) {
                return Err(QndError::invalid("observable", "projector shape mismatch"));
            }
            if !is_hermitian(p, tol::ALGEBRA_TOL) {
                return Err(QndError::invalid(
                    "observable",
                    format!("projector {i} is not Hermitian"),
                ));
            }
            if max_abs_diff(&(p * p), p) > tol::ALGEBRA_TOL {
                return Err(QndError::invalid(
                    "observable",
                    format!("projector {i} is not idempotent"),
                ));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let prod = p * q;
                if prod.iter().any(|z| z.norm() > tol::ALGEBRA_TOL) {
                    return Err(QndError::invalid(
                        "observable",
                        format!("projectors {i} and {j} are not orthogonal"),
                    ));
                }
            }
            sum += p;
        }
        if max_abs_diff(&sum, &CMatrix::identity(dim, dim)) > tol::ALGEBRA_TOL {
            return Err(QndError::invalid(
                "observable",
                "projectors do not sum to the identity",
            ));
        }
        Ok(Self {
            dim,
            eigenvalues,
            projectors,
        })
    }

    /// Nondegenerate observable from an orthonormal basis of eigenstates.
    pub fn from_basis(eigenvalues: Vec<f64>, basis: &[Ket]) -> Result<Self> {
        let projectors = basis.iter().map(Ket::outer).collect();
        Self::new(eigenvalues, projectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_branches(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, branch: usize) -> f64 {
        self.eigenvalues[branch]
    }

    pub fn projector(&self, branch: usize) -> &CMatrix {
        &self.projectors[branch]
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Degeneracy of a branch (rank of its projector).
    pub fn branch_rank(&self, branch: usize) -> usize {
        self.projectors[branch].trace().re.round() as usize
    }

    /// True when every eigenspace is one-dimensional.
    pub fn is_nondegenerate(&self) -> bool {
        (0..self.n_branches()).all(|i| self.branch_rank(i) == 1)
    }

    /// Unit eigenvector of a rank-one branch.
    pub fn eigenstate(&self, branch: usize) -> Result<Ket> {
        if self.branch_rank(branch) != 1 {
            return Err(QndError::Domain(format!(
                "branch {branch} is degenerate (rank {}), it has no single eigenstate",
                self.branch_rank(branch)
            )));
        }
        let p = &self.projectors[branch];
        // The largest column of a rank-one projector is a scaled copy of the
        // eigenvector.
        let (best, _) = (0..self.dim)
            .map(|j| (j, p.column(j).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty projector");
        let col = p.column(best).into_owned();
        let norm = col.norm();
        Ket::new(col / Complex64::new(norm, 0.0))
    }

    /// Branch labels used in probability tables: the branch index as text.
    pub fn labels(&self) -> Vec<String> {
        (0..self.n_branches()).map(|i| i.to_string()).collect()
    }

    /// The observable as a single Hermitian matrix `sum_i xi_i P_i`.
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (x, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p * c(*x, 0.0);
        }
        m
    }

    /// `sum_i xi_i^2 P_i`, the square of the observable.
    pub fn matrix_squared(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (x, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p * c(x * x, 0.0);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CVector;

    fn pauli_z() -> Observable {
        Observable::from_basis(vec![1.0, -1.0], &[Ket::basis(2, 0), Ket::basis(2, 1)]).unwrap()
    }

    #[test]
    fn validation_happy_path() {
        let z = pauli_z();
        assert_eq!(z.dim(), 2);
        assert!(z.is_nondegenerate());
        assert_eq!(z.branch_rank(0), 1);
        assert_eq!(z.labels(), vec!["0", "1"]);
    }

    #[test]
    fn rejects_repeated_eigenvalues_and_bad_projectors() {
        let p0 = Ket::basis(2, 0).outer();
        let p1 = Ket::basis(2, 1).outer();
        assert!(Observable::new(vec![1.0, 1.0], vec![p0.clone(), p1.clone()]).is_err());
        // Non-idempotent
        assert!(Observable::new(vec![1.0, -1.0], vec![&p0 * c(0.5, 0.0), p1.clone()]).is_err());
        // Incomplete
        assert!(Observable::new(vec![1.0], vec![p0.clone()]).is_err());
        // Non-orthogonal
        let plus = Ket::new(CVector::from_vec(vec![
            c(1.0 / 2f64.sqrt(), 0.0),
            c(1.0 / 2f64.sqrt(), 0.0),
        ]))
        .unwrap();
        assert!(Observable::new(vec![1.0, -1.0], vec![p0, plus.outer()]).is_err());
    }

    #[test]
    fn degenerate_branch_bookkeeping() {
        let p01 = Ket::basis(3, 0).outer() + Ket::basis(3, 1).outer();
        let p2 = Ket::basis(3, 2).outer();
        let obs = Observable::new(vec![0.0, 5.0], vec![p01, p2]).unwrap();
        assert!(!obs.is_nondegenerate());
        assert_eq!(obs.branch_rank(0), 2);
        assert_eq!(obs.branch_rank(1), 1);
        assert!(obs.eigenstate(0).is_err());
        assert!(obs.eigenstate(1).is_ok());
    }

    #[test]
    fn eigenstate_recovers_basis_vector_up_to_phase() {
        let z = pauli_z();
        let e0 = z.eigenstate(0).unwrap();
        assert!((e0.inner(&Ket::basis(2, 0)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_reconstruction() {
        let z = pauli_z();
        let m = z.matrix();
        assert!((m[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
        let m2 = z.matrix_squared();
        assert!(max_abs_diff(&m2, &CMatrix::identity(2, 2)) < 1e-15);
    }
}
