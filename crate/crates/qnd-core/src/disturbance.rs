//! Disturbance of an instrument with respect to an observable: the exact
//! quantum lower bound and heuristic upper bounds on `D(M, Z)`.
//!
//! The disturbance experiment feeds uniformly random eigenstates of `Z`
//! through the apparatus, applies an arbitrary correction channel to the
//! joint output `S' (x) M`, and measures `Z`; `D(M, Z)` is the least
//! achievable `H(Z|Zhat)`. Two reductions make this tractable:
//!
//! * any correction channel followed by the projective `Z`-readout induces a
//!   `d`-outcome POVM on `S' (x) M` (the readout effect pulled back through
//!   the channel's dual), and conversely any such POVM dilates to a channel
//!   followed by a projective readout (Naimark), so optimising over
//!   `d`-outcome POVMs on `S' (x) M` has exactly the reach of Definition-style
//!   optimisation over correction channels;
//! * the resulting objective `H(Z|Zhat)` is non-convex in the POVM, so
//!   instead of claiming the minimum this module reports a certified
//!   bracket: the data-processing lower bound `H(Z|S'M)` evaluated on the
//!   dilated state (exact up to eigensolver roundoff), and the best upper
//!   bound found among explicit strategies (pretty-good measurement,
//!   transpose-channel recovery, and seeded random POVMs refined by
//!   derivative-free local descent).

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{CpMap, QuantumInstrument};
use crate::entropy::{quantum_conditional_entropy, Axis, JointTable};
use crate::error::{QndError, Result};
use crate::matrix::{
    self, c, ensure_finite, is_hermitian, kron, max_abs_diff, orthonormalize_columns, psd_inv_sqrt,
    support_projector, trace_product_re, CMatrix,
};
use crate::observable::Observable;
use crate::state::DensityOperator;
use crate::tol;
use crate::zoo::derive_seed;

/// A guessing POVM on the joint output `S' (x) M`, one effect per guess.
#[derive(Debug, Clone)]
pub struct GuessPovm {
    dim: usize,
    effects: Vec<(String, CMatrix)>,
}

impl GuessPovm {
    /// Validates Hermiticity, positivity, and completeness of the effects.
    pub fn new(effects: Vec<(String, CMatrix)>) -> Result<Self> {
        if effects.is_empty() {
            return Err(QndError::invalid("guess povm", "no effects"));
        }
        let dim = effects[0].1.nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (label, e) in &effects {
            ensure_finite(e, "guess povm")?;
            if e.shape() != (dim, dim) {
                return Err(QndError::invalid("guess povm", "effect shape mismatch"));
            }
            if !is_hermitian(e, tol::ALGEBRA_TOL) {
                return Err(QndError::invalid(
                    "guess povm",
                    format!("effect '{label}' is not Hermitian"),
                ));
            }
            let min_eig = matrix::eigvalsh(e).first().copied().unwrap_or(0.0);
            if min_eig < tol::EIG_FLOOR {
                return Err(QndError::invalid(
                    "guess povm",
                    format!("effect '{label}' has eigenvalue {min_eig}"),
                ));
            }
            sum += e;
        }
        for (i, (a, _)) in effects.iter().enumerate() {
            if effects.iter().skip(i + 1).any(|(b, _)| a == b) {
                return Err(QndError::invalid(
                    "guess povm",
                    format!("duplicate label '{a}'"),
                ));
            }
        }
        if max_abs_diff(&sum, &CMatrix::identity(dim, dim)) > tol::ALGEBRA_TOL {
            return Err(QndError::invalid(
                "guess povm",
                "effects do not sum to the identity",
            ));
        }
        Ok(Self { dim, effects })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_effects(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[(String, CMatrix)] {
        &self.effects
    }

    pub fn effect_by_label(&self, label: &str) -> Option<&CMatrix> {
        self.effects
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, e)| e)
    }

    /// The trivial POVM with all effects proportional to the identity.
    pub fn uniform(dim: usize, labels: Vec<String>) -> Self {
        let n = labels.len();
        let scale = c(1.0 / n as f64, 0.0);
        let effects = labels
            .into_iter()
            .map(|l| (l, CMatrix::identity(dim, dim) * scale))
            .collect();
        Self { dim, effects }
    }

    /// Measuring `obs` on the `S'` factor of `S' (x) M`, ignoring the flag:
    /// effects `P_i (x) I_M`, labelled by the branch labels of `obs`.
    pub fn observable_on_output(obs: &Observable, n_flags: usize) -> Self {
        let id_m = CMatrix::identity(n_flags, n_flags);
        let effects = (0..obs.n_branches())
            .map(|i| (i.to_string(), kron(obs.projector(i), &id_m)))
            .collect();
        Self {
            dim: obs.dim() * n_flags,
            effects,
        }
    }

    /// POVM from a block isometry `W : H -> C^n (x) H`: effect `u` is
    /// `B_u^dag B_u` with `B_u` the `u`-th row block of `W`.
    pub fn from_block_isometry(w: &CMatrix, labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let dim = w.ncols();
        if w.nrows() != n * dim {
            return Err(QndError::Dimension(
                "block isometry rows must be n_labels * dim".into(),
            ));
        }
        let effects = labels
            .into_iter()
            .enumerate()
            .map(|(u, l)| {
                let block = w.rows(u * dim, dim).into_owned();
                (l, block.adjoint() * block)
            })
            .collect();
        GuessPovm::new(effects)
    }
}

/// Certified bracket on the disturbance `D(M, Z)`.
#[derive(Debug, Clone)]
pub struct DisturbanceBracket {
    lower: f64,
    upper: f64,
    witness: GuessPovm,
    restarts_used: u32,
}

impl DisturbanceBracket {
    fn new(
        lower: f64,
        upper: f64,
        witness: GuessPovm,
        restarts_used: u32,
        dim: usize,
    ) -> Result<Self> {
        let ceiling = (dim as f64).log2() + tol::CHECK_TOL;
        if lower > upper + tol::CHECK_TOL {
            return Err(QndError::invalid(
                "disturbance bracket",
                format!("lower {lower} exceeds upper {upper}"),
            ));
        }
        if !(0.0..=ceiling).contains(&lower) || !(0.0..=ceiling).contains(&upper) {
            return Err(QndError::invalid(
                "disturbance bracket",
                format!("bounds ({lower}, {upper}) outside [0, log2 {dim}]"),
            ));
        }
        Ok(Self {
            lower,
            upper,
            witness,
            restarts_used,
        })
    }

    /// The certified quantum lower bound `H(Z|S'M)`, in bits.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// The best heuristic upper bound found, in bits.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// The guessing POVM achieving [`Self::upper`].
    pub fn witness(&self) -> &GuessPovm {
        &self.witness
    }

    pub fn restarts_used(&self) -> u32 {
        self.restarts_used
    }
}

/// Conditional output states `sigma_z = M(|phi^z><phi^z|)` on `S' (x) M`,
/// one per eigenstate of a nondegenerate `z`.
pub(crate) fn conditional_states(inst: &QuantumInstrument, z: &Observable) -> Result<Vec<CMatrix>> {
    if inst.dim_in() != z.dim() {
        return Err(QndError::Dimension(format!(
            "instrument dim {} vs observable dim {}",
            inst.dim_in(),
            z.dim()
        )));
    }
    if !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "disturbance requires a nondegenerate observable".into(),
        ));
    }
    let ch = inst.channel();
    (0..z.n_branches())
        .map(|i| ch.apply(z.projector(i)))
        .collect()
}

/// Joint table `p(zhat, z) = Tr[Pi^zhat sigma_z] / d` for a guessing POVM.
/// Rows are ordered like the branches of `z`, matching effects by label.
pub fn disturbance_table(
    inst: &QuantumInstrument,
    z: &Observable,
    g: &GuessPovm,
) -> Result<JointTable> {
    let states = conditional_states(inst, z)?;
    let dim_out = inst.dim_out() * inst.n_outcomes();
    if g.dim() != dim_out {
        return Err(QndError::Dimension(format!(
            "guess povm dim {} vs instrument output dim {dim_out}",
            g.dim()
        )));
    }
    let labels = z.labels();
    if g.n_effects() != labels.len() || labels.iter().any(|l| g.effect_by_label(l).is_none()) {
        return Err(QndError::Domain(
            "guess povm labels must match the observable's branch labels".into(),
        ));
    }
    let d = z.dim() as f64;
    let mut probs = DMatrix::zeros(labels.len(), labels.len());
    for (zh, label) in labels.iter().enumerate() {
        let effect = g.effect_by_label(label).expect("checked above");
        for (zi, sigma) in states.iter().enumerate() {
            probs[(zh, zi)] = trace_product_re(effect, sigma) / d;
        }
    }
    JointTable::new(labels.clone(), labels, probs)
}

/// `H(Z|Zhat)` for a fixed guessing POVM; an upper bound on `D(M, Z)`.
pub fn disturbance_given_guess(
    inst: &QuantumInstrument,
    z: &Observable,
    g: &GuessPovm,
) -> Result<f64> {
    Ok(disturbance_table(inst, z, g)?.conditional_entropy(Axis::Rows))
}

/// The certified lower bound `H(Z|S'M)` on the disturbance: the conditional
/// quantum entropy of `rho_{Z S'M} = sum_z |z><z| (x) sigma_z / d`,
/// conditioning on the apparatus output.
pub fn quantum_lower_bound(inst: &QuantumInstrument, z: &Observable) -> Result<f64> {
    let states = conditional_states(inst, z)?;
    quantum_lower_bound_from_states(&states, z.dim())
}

fn quantum_lower_bound_from_states(states: &[CMatrix], d: usize) -> Result<f64> {
    let dm = states[0].nrows();
    let mut big = CMatrix::zeros(d * dm, d * dm);
    let w = c(1.0 / d as f64, 0.0);
    for (zi, sigma) in states.iter().enumerate() {
        for r in 0..dm {
            for s in 0..dm {
                big[(zi * dm + r, zi * dm + s)] = sigma[(r, s)] * w;
            }
        }
    }
    let rho = DensityOperator::new(big)?;
    quantum_conditional_entropy(&rho, (d, dm))
}

/// Pretty-good measurement of the ensemble `{sigma_z / d}`:
/// `Pi_z = S^{-1/2} (sigma_z / d) S^{-1/2}` with `S = sum_z sigma_z / d`,
/// the support complement spread uniformly over the effects.
pub fn pgm_povm(inst: &QuantumInstrument, z: &Observable) -> Result<GuessPovm> {
    let states = conditional_states(inst, z)?;
    pgm_from_states(&states, &z.labels())
}

fn pgm_from_states(states: &[CMatrix], labels: &[String]) -> Result<GuessPovm> {
    let d = states.len();
    let dm = states[0].nrows();
    let mut s = CMatrix::zeros(dm, dm);
    for sigma in states {
        s += sigma * c(1.0 / d as f64, 0.0);
    }
    let root = psd_inv_sqrt(&s);
    let complement = (CMatrix::identity(dm, dm) - support_projector(&s)) * c(1.0 / d as f64, 0.0);
    let effects = labels
        .iter()
        .zip(states)
        .map(|(l, sigma)| {
            let e = &root * (sigma * c(1.0 / d as f64, 0.0)) * &root + &complement;
            (l.clone(), hermitize(&e))
        })
        .collect();
    GuessPovm::new(effects)
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Transpose-channel (Petz) recovery of the instrument channel with respect
/// to the maximally mixed reference state. With `Phi` the channel and
/// `Omega = Phi(I/d)`, the recovery has Kraus operators
/// `R_j = d^{-1/2} F_j^dag Omega^{-1/2}`; it is trace-preserving on the
/// support of `Omega` and fixes `I/d`.
pub fn petz_correction(inst: &QuantumInstrument) -> CpMap {
    let ch = inst.channel();
    let d = inst.dim_in() as f64;
    let omega = ch
        .apply(&(CMatrix::identity(inst.dim_in(), inst.dim_in()) * c(1.0 / d, 0.0)))
        .expect("channel applies to its own input dimension");
    let root = psd_inv_sqrt(&omega);
    let scale = c(1.0 / d.sqrt(), 0.0);
    let kraus = ch
        .kraus()
        .iter()
        .map(|f| f.adjoint() * &root * scale)
        .collect();
    CpMap::new(kraus).expect("Petz recovery is trace-nonincreasing")
}

/// The guessing POVM induced by applying `correction` and then measuring
/// `z`: effects are the readout projectors pulled back through the
/// correction's dual, with any support complement spread uniformly.
pub fn povm_through_correction(
    inst: &QuantumInstrument,
    z: &Observable,
    correction: &CpMap,
) -> Result<GuessPovm> {
    let dim_out = inst.dim_out() * inst.n_outcomes();
    if correction.dim_in() != dim_out || correction.dim_out() != z.dim() {
        return Err(QndError::Dimension(format!(
            "correction must map the {dim_out}-dimensional apparatus output to dim {}",
            z.dim()
        )));
    }
    let mut effects: Vec<(String, CMatrix)> = z
        .labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let pulled = correction
                .dual_apply(z.projector(i))
                .expect("projector dims match");
            (l, hermitize(&pulled))
        })
        .collect();
    let mut sum = CMatrix::zeros(dim_out, dim_out);
    for (_, e) in &effects {
        sum += e;
    }
    let complement =
        (CMatrix::identity(dim_out, dim_out) - sum) * c(1.0 / effects.len() as f64, 0.0);
    for (_, e) in effects.iter_mut() {
        *e = hermitize(&(&*e + &complement));
    }
    GuessPovm::new(effects)
}

struct Objective<'a> {
    states: &'a [CMatrix],
}

impl Objective<'_> {
    /// `H(Z|Zhat)` for effects listed in branch order, uniform prior on z.
    fn eval(&self, effects: &[CMatrix]) -> f64 {
        let d = self.states.len();
        let mut joint = 0.0;
        let mut marginal = 0.0;
        for e in effects {
            let mut row_sum = 0.0;
            for sigma in self.states {
                let p = (trace_product_re(e, sigma) / d as f64).max(0.0);
                if p > 0.0 {
                    joint -= p * p.log2();
                }
                row_sum += p;
            }
            if row_sum > 0.0 {
                marginal -= row_sum * row_sum.log2();
            }
        }
        joint - marginal
    }
}

fn block_effects(w: &CMatrix, n: usize) -> Vec<CMatrix> {
    let dim = w.ncols();
    (0..n)
        .map(|u| {
            let block = w.rows(u * dim, dim);
            block.adjoint() * block
        })
        .collect()
}

/// Derivative-free coordinate descent over block-isometry parametrised
/// POVMs: perturb one entry, re-orthonormalise, keep improvements; the
/// step shrinks on rejection and the search stops once an accepted
/// improvement falls below 1e-8 bits or after 500 iterations.
fn refine_povm(
    objective: &Objective<'_>,
    mut w: CMatrix,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, CMatrix) {
    let mut best = objective.eval(&block_effects(&w, n));
    let mut step = 0.3f64;
    for _ in 0..500 {
        let i = rng.random_range(0..w.nrows());
        let j = rng.random_range(0..w.ncols());
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let mut cand = w.clone();
        cand[(i, j)] += c(re, im) * c(step, 0.0);
        let cand = orthonormalize_columns(&cand);
        let f = objective.eval(&block_effects(&cand, n));
        if f < best {
            let gain = best - f;
            w = cand;
            best = f;
            if gain < 1e-8 {
                break;
            }
        } else {
            step *= 0.9;
            if step < 1e-7 {
                break;
            }
        }
    }
    (best, w)
}

/// Brackets the disturbance `D(M, Z)` between the certified quantum lower
/// bound and the best heuristic upper bound found.
///
/// Upper-bound candidates: the pretty-good measurement of the conditional
/// output ensemble, the transpose-channel recovery followed by a `Z`
/// readout, and `restarts` Haar-random POVMs each refined by local descent.
/// Deterministic for fixed `seed`; with `restarts = 0` the two closed-form
/// candidates are still evaluated.
pub fn optimize_disturbance(
    inst: &QuantumInstrument,
    z: &Observable,
    restarts: u32,
    seed: u64,
) -> Result<DisturbanceBracket> {
    let states = conditional_states(inst, z)?;
    let labels = z.labels();
    let d = z.dim();
    let lower = quantum_lower_bound_from_states(&states, d)?.max(0.0);

    let objective = Objective { states: &states };
    let mut candidates: Vec<GuessPovm> = vec![
        pgm_from_states(&states, &labels)?,
        povm_through_correction(inst, z, &petz_correction(inst))?,
    ];
    let dm = states[0].nrows();
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xB0 + r as u64));
        let w0 = crate::zoo::haar_isometry(labels.len() * dm, dm, &mut rng);
        let (_, w) = refine_povm(&objective, w0, labels.len(), &mut rng);
        candidates.push(GuessPovm::from_block_isometry(&w, labels.clone())?);
    }

    let scored: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let effects: Vec<CMatrix> = labels
                .iter()
                .map(|l| {
                    g.effect_by_label(l)
                        .expect("constructed with z labels")
                        .clone()
                })
                .collect();
            (objective.eval(&effects), i)
        })
        .collect();
    let &(_, best_idx) = scored
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least the closed-form candidates exist");
    let witness = candidates.swap_remove(best_idx);
    // Report the upper bound through the same pipeline used everywhere else.
    let upper = disturbance_given_guess(inst, z, &witness)?.max(0.0);
    DisturbanceBracket::new(lower, upper, witness, restarts, d)
}
