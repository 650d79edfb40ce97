//! Information-theoretic noise of an instrument with respect to an
//! observable, and the overlap constants entering the tradeoff floor.
//!
//! The noise experiment feeds uniformly random eigenstates of the observable
//! into the apparatus and asks how well the outcome identifies the input:
//! `N(M, X) = H(X|M)` of the joint table `p(m, x) = Tr[M^m(|psi^x><psi^x|)]/d`.

use nalgebra::DMatrix;

use crate::channel::QuantumInstrument;
use crate::entropy::{Axis, JointTable};
use crate::error::{QndError, Result};
use crate::matrix::{infinity_norm, trace_product_re};
use crate::observable::Observable;

/// `c = max_{x,z} |<psi^x|phi^z>|^2` for nondegenerate observables.
/// `-log2 c` is the tradeoff floor.
pub fn overlap_constant(x: &Observable, z: &Observable) -> Result<f64> {
    if x.dim() != z.dim() {
        return Err(QndError::Dimension(format!(
            "overlap_constant: dims {} and {}",
            x.dim(),
            z.dim()
        )));
    }
    if !x.is_nondegenerate() || !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "overlap_constant requires nondegenerate observables; \
             use overlap_constant_degenerate for degenerate spectra"
                .into(),
        ));
    }
    let mut best = 0.0f64;
    for i in 0..x.n_branches() {
        let psi = x.eigenstate(i)?;
        for j in 0..z.n_branches() {
            let phi = z.eigenstate(j)?;
            best = best.max(psi.inner(&phi).norm_sqr());
        }
    }
    Ok(best)
}

/// `c' = max_{x,z} ||X_x Z_z||_inf^2`, valid for degenerate spectra and
/// reducing to [`overlap_constant`] on rank-one projectors.
pub fn overlap_constant_degenerate(x: &Observable, z: &Observable) -> Result<f64> {
    if x.dim() != z.dim() {
        return Err(QndError::Dimension(format!(
            "overlap_constant_degenerate: dims {} and {}",
            x.dim(),
            z.dim()
        )));
    }
    let mut best = 0.0f64;
    for px in x.projectors() {
        for pz in z.projectors() {
            let n = infinity_norm(&(px * pz));
            best = best.max(n * n);
        }
    }
    Ok(best)
}

fn table_from_projectors(inst: &QuantumInstrument, obs: &Observable) -> Result<JointTable> {
    if inst.dim_in() != obs.dim() {
        return Err(QndError::Dimension(format!(
            "noise table: instrument dim {} vs observable dim {}",
            inst.dim_in(),
            obs.dim()
        )));
    }
    let d = obs.dim() as f64;
    let mut probs = DMatrix::zeros(inst.n_outcomes(), obs.n_branches());
    for (m, (_, branch)) in inst.outcomes().iter().enumerate() {
        // p(m, x) = Tr[M^m(X_x)]/d = Tr[E_m X_x]/d with E_m the POVM element.
        let effect = branch.kraus_gram();
        for (x, proj) in obs.projectors().iter().enumerate() {
            probs[(m, x)] = trace_product_re(&effect, proj) / d;
        }
    }
    JointTable::new(inst.labels(), obs.labels(), probs)
}

/// Joint input-output table `p(m, x)` of the noise experiment with uniform
/// prior over the eigenstates of a nondegenerate observable.
pub fn noise_table(inst: &QuantumInstrument, x: &Observable) -> Result<JointTable> {
    if !x.is_nondegenerate() {
        return Err(QndError::Domain(
            "noise_table requires a nondegenerate observable; see degenerate_noise".into(),
        ));
    }
    table_from_projectors(inst, x)
}

/// `N(M, X) = H(X|M)` in bits.
pub fn noise(inst: &QuantumInstrument, x: &Observable) -> Result<f64> {
    Ok(noise_table(inst, x)?.conditional_entropy(Axis::Rows))
}

/// Noise for a possibly degenerate observable: eigenvalue `x` is drawn with
/// prior `d_x/d` and the effective input is `X_x/d_x`, so
/// `p(m, x) = Tr[M^m(X_x)]/d`.
pub fn degenerate_noise(inst: &QuantumInstrument, x: &Observable) -> Result<f64> {
    Ok(table_from_projectors(inst, x)?.conditional_entropy(Axis::Rows))
}
