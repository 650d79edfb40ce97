//! Pure and mixed states: kets, density operators, fidelity.

use num_complex::Complex64;

use crate::error::{QndError, Result};
use crate::matrix::{self, c, ensure_finite, is_hermitian, psd_sqrt, CMatrix, CVector};
use crate::tol;

/// Unit vector in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
}

impl Ket {
    /// Validates that `amplitudes` is finite and has unit Euclidean norm.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QndError::invalid("ket", "empty amplitude vector"));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(QndError::invalid("ket", "non-finite amplitude"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::UNIT_TOL {
            return Err(QndError::invalid(
                "ket",
                format!("norm {norm} differs from 1 by more than {}", tol::UNIT_TOL),
            ));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis vector `|i>` in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index out of range");
        let mut v = CVector::zeros(dim);
        v[i] = Complex64::ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Rank-one projector `|psi><psi|`.
    pub fn outer(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Maximally entangled state `|Phi+> = d^{-1/2} sum_i |i>|i>` on two
/// `d`-dimensional factors, in the computational basis.
pub fn maximally_entangled(d: usize) -> Ket {
    assert!(d >= 1, "maximally_entangled needs d >= 1");
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ket { amplitudes: v }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity (up to [`tol::EIG_FLOOR`] jitter)
    /// and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_finite(&matrix, "density operator")?;
        if !matrix.is_square() {
            return Err(QndError::invalid(
                "density operator",
                "matrix is not square",
            ));
        }
        if !is_hermitian(&matrix, tol::UNIT_TOL) {
            return Err(QndError::invalid(
                "density operator",
                "matrix is not Hermitian",
            ));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::UNIT_TOL || trace.im.abs() > tol::UNIT_TOL {
            return Err(QndError::invalid(
                "density operator",
                format!("trace {trace} differs from 1"),
            ));
        }
        let min_eig = matrix::eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min_eig < tol::EIG_FLOOR {
            return Err(QndError::invalid(
                "density operator",
                format!("smallest eigenvalue {min_eig} below {}", tol::EIG_FLOOR),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn from_ket(psi: &Ket) -> Self {
        Self {
            matrix: psi.outer(),
        }
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Eigenvalues of the state, ascending, with negative jitter clamped to 0.
    pub fn spectrum(&self) -> Vec<f64> {
        matrix::eigvalsh(&self.matrix)
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    }
}

/// Uhlmann fidelity `F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`,
/// clamped to `[0, 1]`.
///
/// Evaluated as the squared nuclear norm `(|| sqrt(rho) sqrt(sigma) ||_1)^2`,
/// which is equal by the polar decomposition and keeps roundoff-scale
/// eigenvalue noise linear instead of amplifying it through a square root.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QndError::Dimension(format!(
            "fidelity: dims {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let product = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
    let nuclear: f64 = product.svd(false, false).singular_values.iter().sum();
    Ok((nuclear * nuclear).clamp(0.0, 1.0))
}

/// Trace distance `(1/2) ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QndError::Dimension(format!(
            "trace_distance: dims {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * matrix::eigvalsh(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{kron, max_abs_diff, partial_trace};

    #[test]
    fn ket_rejects_unnormalised() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(Ket::new(v).is_err());
    }

    #[test]
    fn maximally_entangled_qubit_amplitudes() {
        let phi = maximally_entangled(2);
        let a = phi.amplitudes();
        let s = 1.0 / 2f64.sqrt();
        assert!((a[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((a[3] - c(s, 0.0)).norm() < 1e-15);
        assert!(a[1].norm() < 1e-15 && a[2].norm() < 1e-15);
    }

    #[test]
    fn maximally_entangled_marginals_are_maximally_mixed() {
        for d in 2..=4 {
            let rho = maximally_entangled(d).outer();
            for keep in [[0], [1]] {
                let marg = partial_trace(&rho, &[d, d], &keep).unwrap();
                let expect = CMatrix::identity(d, d) * c(1.0 / d as f64, 0.0);
                assert!(max_abs_diff(&marg, &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn ricochet_property_random_operators() {
        // Tr_R[(A^T (x) 1) |Phi+><Phi+|] = A / d, checked for 20 random A at d = 3.
        let d = 3;
        let phi = maximally_entangled(d).outer();
        let mut s = 42u64;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for _ in 0..20 {
            let a = CMatrix::from_fn(d, d, |_, _| c(next(), next()));
            let lhs = partial_trace(
                &(kron(&a.transpose(), &CMatrix::identity(d, d)) * &phi),
                &[d, d],
                &[1],
            )
            .unwrap();
            let rhs = &a * c(1.0 / d as f64, 0.0);
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn density_operator_validation() {
        assert!(DensityOperator::new(CMatrix::identity(2, 2)).is_err()); // trace 2
        let ok = DensityOperator::maximally_mixed(3);
        assert_eq!(ok.dim(), 3);
        // Non-Hermitian
        let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        m[(0, 1)] = c(0.3, 0.0);
        assert!(DensityOperator::new(m).is_err());
        // Negative eigenvalue beyond the floor
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        assert!(DensityOperator::new(neg).is_err());
    }

    #[test]
    fn fidelity_trivial_cases() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let zero = DensityOperator::from_ket(&Ket::basis(2, 0));
        let one = DensityOperator::from_ket(&Ket::basis(2, 1));
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
    }

    #[test]
    fn fidelity_pure_state_reduction_oracle() {
        // F(|u><u|, sigma) = <u|sigma|u> for any mixed sigma.
        let u = Ket::new(CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let sigma = DensityOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)],
        ))
        .unwrap();
        let direct = (u.amplitudes().adjoint() * sigma.matrix() * u.amplitudes())[(0, 0)].re;
        let f = fidelity(&DensityOperator::from_ket(&u), &sigma).unwrap();
        assert!((f - direct).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetric_and_detects_equality() {
        let rho = DensityOperator::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.8, 0.0), c(0.1, 0.1), c(0.1, -0.1), c(0.2, 0.0)],
        ))
        .unwrap();
        let sigma = DensityOperator::maximally_mixed(2);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        assert!((f1 - f2).abs() < 1e-10);
        assert!(trace_distance(&rho, &sigma).unwrap() > 0.0 && f1 < 1.0 - 1e-8);
    }
}
