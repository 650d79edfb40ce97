//! Certified checks of the tradeoff relations and structural identities.
//!
//! Each check returns a small report record with the numbers that entered
//! the inequality and the resulting margin; a margin of `-epsilon` beyond
//! [`tol::CHECK_TOL`] counts as a violation.

use crate::channel::{stinespring_dilate, CpMap, QuantumInstrument};
use crate::disturbance::DisturbanceBracket;
use crate::entropy::quantum_conditional_entropy;
use crate::error::{QndError, Result};
use crate::matrix::{c, kron, max_abs_diff, partial_trace, CMatrix};
use crate::noise::{self, noise_table};
use crate::observable::Observable;
use crate::state::{fidelity, maximally_entangled, DensityOperator};
use crate::tol;

/// Numbers entering the noise-disturbance tradeoff
/// `N(M,X) + D(M,Z) >= -log2 c`, with the disturbance bracketed.
#[derive(Debug, Clone, Copy)]
pub struct TradeoffReport {
    pub noise: f64,
    pub disturbance_lower: f64,
    pub disturbance_upper: f64,
    /// `-log2 c`.
    pub floor: f64,
}

impl TradeoffReport {
    /// Margin of the certified form `N + H(Z|S'M) - floor`.
    pub fn certified_margin(&self) -> f64 {
        self.noise + self.disturbance_lower - self.floor
    }

    /// Margin of the implied form `N + upper - floor`.
    pub fn implied_margin(&self) -> f64 {
        self.noise + self.disturbance_upper - self.floor
    }

    pub fn holds(&self) -> bool {
        self.certified_margin() >= -tol::CHECK_TOL && self.implied_margin() >= -tol::CHECK_TOL
    }
}

/// Evaluates the tradeoff for an instrument, observable pair, and a
/// previously computed disturbance bracket.
pub fn tradeoff_check(
    inst: &QuantumInstrument,
    x: &Observable,
    z: &Observable,
    bracket: &DisturbanceBracket,
) -> Result<TradeoffReport> {
    let c_const = noise::overlap_constant(x, z)?;
    Ok(TradeoffReport {
        noise: noise::noise(inst, x)?,
        disturbance_lower: bracket.lower(),
        disturbance_upper: bracket.upper(),
        floor: -c_const.log2(),
    })
}

/// Numbers entering the joint-measurement tradeoff
/// `N(M,X) + N(M,Z) >= -log2 c`, both noises read from the outcome alone.
#[derive(Debug, Clone, Copy)]
pub struct JointNoiseReport {
    pub noise_x: f64,
    pub noise_z: f64,
    pub floor: f64,
}

impl JointNoiseReport {
    pub fn margin(&self) -> f64 {
        self.noise_x + self.noise_z - self.floor
    }

    pub fn holds(&self) -> bool {
        self.margin() >= -tol::CHECK_TOL
    }
}

pub fn joint_noise_check(
    inst: &QuantumInstrument,
    x: &Observable,
    z: &Observable,
) -> Result<JointNoiseReport> {
    let c_const = noise::overlap_constant(x, z)?;
    Ok(JointNoiseReport {
        noise_x: noise::noise(inst, x)?,
        noise_z: noise::noise(inst, z)?,
        floor: -c_const.log2(),
    })
}

/// Numbers entering the quantum-memory uncertainty relation on the dilated
/// apparatus, `H(Z|S'M) + H(X|E Mbar) >= -log2 c`, together with the
/// data-processing comparison `H(X|E Mbar) <= H(X|M)`.
#[derive(Debug, Clone, Copy)]
pub struct MemoryEurReport {
    pub h_z_given_output: f64,
    pub h_x_given_env: f64,
    pub h_x_given_outcome: f64,
    pub floor: f64,
}

impl MemoryEurReport {
    pub fn margin(&self) -> f64 {
        self.h_z_given_output + self.h_x_given_env - self.floor
    }

    /// Margin of `H(X|E Mbar) <= H(X|M)`.
    pub fn data_processing_margin(&self) -> f64 {
        self.h_x_given_outcome - self.h_x_given_env
    }

    pub fn holds(&self) -> bool {
        self.margin() >= -tol::CHECK_TOL && self.data_processing_margin() >= -tol::CHECK_TOL
    }
}

pub fn memory_eur_check(
    inst: &QuantumInstrument,
    x: &Observable,
    z: &Observable,
) -> Result<MemoryEurReport> {
    if !x.is_nondegenerate() || !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "memory_eur_check requires nondegenerate observables".into(),
        ));
    }
    let c_const = noise::overlap_constant(x, z)?;
    let h_z_given_output = crate::disturbance::quantum_lower_bound(inst, z)?;

    // Environment-side conditional entropy H(X|E Mbar) on the cq state
    // sum_x |x><x| (x) Tr_{S'M}[V |psi^x><psi^x| V^dag] / d.
    let v = stinespring_dilate(inst);
    let d = x.dim();
    let env_dim = v.dims().env * v.dims().flag_copy;
    let mut big = CMatrix::zeros(d * env_dim, d * env_dim);
    let w = c(1.0 / d as f64, 0.0);
    for i in 0..d {
        let env_state = v.environment_output(x.projector(i))?;
        for r in 0..env_dim {
            for s in 0..env_dim {
                big[(i * env_dim + r, i * env_dim + s)] = env_state[(r, s)] * w;
            }
        }
    }
    let rho = DensityOperator::new(big)?;
    let h_x_given_env = quantum_conditional_entropy(&rho, (d, env_dim))?;
    let h_x_given_outcome = noise::noise(inst, x)?;

    Ok(MemoryEurReport {
        h_z_given_output,
        h_x_given_env,
        h_x_given_outcome,
        floor: -c_const.log2(),
    })
}

/// Two-route evaluation of the guessing success `1 - p_e` after a
/// correction channel: once from the joint outcome probabilities, once as
/// the average fidelity of the corrected output with the input eigenstate.
#[derive(Debug, Clone, Copy)]
pub struct FidelityIdentityReport {
    pub success_probability: f64,
    pub average_fidelity: f64,
}

impl FidelityIdentityReport {
    pub fn deviation(&self) -> f64 {
        (self.success_probability - self.average_fidelity).abs()
    }

    pub fn holds(&self) -> bool {
        self.deviation() <= tol::CHECK_TOL
    }
}

pub fn fidelity_error_identity(
    inst: &QuantumInstrument,
    z: &Observable,
    correction: &CpMap,
) -> Result<FidelityIdentityReport> {
    if !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "fidelity_error_identity requires a nondegenerate observable".into(),
        ));
    }
    let dim_out = inst.dim_out() * inst.n_outcomes();
    if correction.dim_in() != dim_out || correction.dim_out() != z.dim() {
        return Err(QndError::Dimension(format!(
            "correction must map dim {dim_out} to dim {}",
            z.dim()
        )));
    }
    let composed = inst.channel().then(correction)?;
    let d = z.dim();
    let mut success = 0.0;
    let mut avg_fidelity = 0.0;
    for i in 0..d {
        let out = composed.apply(z.projector(i))?;
        // Route 1: probability that the Z readout reproduces z.
        let phi = z.eigenstate(i)?;
        let p = (phi.amplitudes().adjoint() * &out * phi.amplitudes())[(0, 0)].re;
        success += p.max(0.0) / d as f64;
        // Route 2: Uhlmann fidelity with the input eigenstate.
        let f = fidelity(
            &DensityOperator::new(out)?,
            &DensityOperator::from_ket(&phi),
        )?;
        avg_fidelity += f / d as f64;
    }
    Ok(FidelityIdentityReport {
        success_probability: success,
        average_fidelity: avg_fidelity,
    })
}

/// Entrywise comparison of the operational noise table with the one obtained
/// by measuring the transposed observable on the reference half of a
/// maximally entangled state while the instrument acts on the system half.
#[derive(Debug, Clone, Copy)]
pub struct RicochetReport {
    pub max_deviation: f64,
}

impl RicochetReport {
    pub fn holds(&self) -> bool {
        self.max_deviation < tol::EXACT_TOL
    }
}

pub fn ricochet_equivalence(inst: &QuantumInstrument, x: &Observable) -> Result<RicochetReport> {
    let direct = noise_table(inst, x)?;
    let d = x.dim();
    if inst.dim_in() != d {
        return Err(QndError::Dimension(
            "instrument/observable dims differ".into(),
        ));
    }
    let phi = maximally_entangled(d).outer();
    let id_ref = CMatrix::identity(d, d);
    let mut max_dev = 0.0f64;
    for (m, (_, branch)) in inst.outcomes().iter().enumerate() {
        // (id_R (x) M^m) acting on |Phi+><Phi+|.
        let mut moved = CMatrix::zeros(d * inst.dim_out(), d * inst.dim_out());
        for k in branch.kraus() {
            let lifted = kron(&id_ref, k);
            moved += &lifted * &phi * lifted.adjoint();
        }
        for (xi, proj) in x.projectors().iter().enumerate() {
            let effect = kron(
                &proj.transpose(),
                &CMatrix::identity(inst.dim_out(), inst.dim_out()),
            );
            let p = (&effect * &moved).trace().re;
            max_dev = max_dev.max((p - direct.prob(m, xi)).abs());
        }
    }
    Ok(RicochetReport {
        max_deviation: max_dev,
    })
}

/// Reduced-dilation consistency: `V^dag V = I`, equality of the reduced
/// dilation with the instrument channel on Choi matrices, and exact
/// correlation of the two outcome flags.
#[derive(Debug, Clone, Copy)]
pub struct DilationReport {
    pub isometry_defect: f64,
    pub choi_distance: f64,
    pub flag_correlation_defect: f64,
}

impl DilationReport {
    pub fn holds(&self) -> bool {
        self.isometry_defect <= tol::UNIT_TOL
            && self.choi_distance <= tol::UNIT_TOL
            && self.flag_correlation_defect == 0.0
    }
}

/// Checks the dilation against the instrument channel, probing the flag
/// correlation with the state `probe`.
pub fn dilation_check(inst: &QuantumInstrument, probe: &DensityOperator) -> Result<DilationReport> {
    let v = stinespring_dilate(inst);
    let gram = v.matrix().adjoint() * v.matrix();
    let isometry_defect = max_abs_diff(&gram, &CMatrix::identity(inst.dim_in(), inst.dim_in()));

    let ch = inst.channel();
    let d = inst.dim_in();
    let o = ch.dim_out();
    let mut choi_reduced = CMatrix::zeros(d * o, d * o);
    for i in 0..d {
        for j in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = num_complex::Complex64::ONE;
            let full = v.conjugate(&unit)?;
            let block = partial_trace(&full, &v.dims().as_array(), &[0, 1])?;
            for r in 0..o {
                for s in 0..o {
                    choi_reduced[(i * o + r, j * o + s)] = block[(r, s)] * c(1.0 / d as f64, 0.0);
                }
            }
        }
    }
    let choi_distance = max_abs_diff(&choi_reduced, &ch.choi());

    let flags = v.flag_joint_distribution(probe.matrix())?;
    let mut off = 0.0f64;
    for m in 0..inst.n_outcomes() {
        for mb in 0..inst.n_outcomes() {
            if m != mb {
                off = off.max(flags[(m, mb)].abs());
            }
        }
    }
    Ok(DilationReport {
        isometry_defect,
        choi_distance,
        flag_correlation_defect: off,
    })
}
