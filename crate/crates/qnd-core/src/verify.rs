//! Randomised mass verification of the tradeoff relations on seeded
//! instrument/basis draws. One trial evaluates every theorem-backed margin
//! on a fresh random instrument and basis pair; an aggregate summarises
//! violations and the tightest instance per check.

use serde::{Deserialize, Serialize};

use crate::checks;
use crate::disturbance::quantum_lower_bound;
use crate::entropy::fano_bounds;
use crate::error::Result;
use crate::msd;
use crate::noise;
use crate::tol;
use crate::zoo;

/// Margins from one random trial. Margin convention: nonnegative is
/// comfortable, below the check's tolerance is a violation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_seed: u64,
    /// `N + H(Z|S'M) - floor`.
    pub certified_margin: f64,
    /// `N(M,X) + N(M,Z) - floor`.
    pub joint_noise_margin: f64,
    /// `H(Z|S'M) + H(X|E Mbar) - floor`.
    pub memory_margin: f64,
    /// `H(X|M) - H(X|E Mbar)`.
    pub data_processing_margin: f64,
    /// `N/2 - p_e(MAP)`.
    pub guessing_margin: f64,
    /// `h(p_e) + p_e log2(|X|-1) - N`.
    pub fano_margin: f64,
    /// `lhs - rhs` of the variance tradeoff.
    pub msd_margin: f64,
    /// `1e-10 - |V_N - epsilon^2|`.
    pub ozawa_epsilon_margin: f64,
    /// `1e-10 - |V_D - eta^2|`.
    pub ozawa_eta_margin: f64,
}

/// Draws a random instrument and basis pair from `trial_seed` and evaluates
/// all margins.
pub fn verify_trial(
    dim: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let inst = zoo::random_instrument(
        dim,
        outcomes,
        kraus_per_outcome,
        zoo::derive_seed(trial_seed, 1),
    );
    let (x, z) = zoo::random_basis_pair(dim, zoo::derive_seed(trial_seed, 2));

    let c = noise::overlap_constant(&x, &z)?;
    let floor = -c.log2();
    let noise_x = noise::noise(&inst, &x)?;
    let noise_z = noise::noise(&inst, &z)?;
    let lower = quantum_lower_bound(&inst, &z)?;

    let memory = checks::memory_eur_check(&inst, &x, &z)?;

    let table = noise::noise_table(&inst, &x)?;
    let p_e = msd::map_error_probability(&table);
    let fano = fano_bounds(p_e, x.n_branches())?;

    let f_map = msd::map_guess(&table, x.eigenvalues())?;
    let v_n = msd::v_noise(&table, &f_map, x.eigenvalues())?;
    let eps_sq = msd::ozawa_epsilon_sq(&inst, &x, &f_map)?;
    let v_d = msd::v_disturbance(&inst, &z, None)?;
    let eta_sq = msd::ozawa_eta_sq(&inst, &z)?;
    let msd_report = msd::msd_tradeoff_check(&inst, &x, &z, &f_map)?;

    Ok(TrialOutcome {
        trial_seed,
        certified_margin: noise_x + lower - floor,
        joint_noise_margin: noise_x + noise_z - floor,
        memory_margin: memory.margin(),
        data_processing_margin: memory.data_processing_margin(),
        guessing_margin: noise_x / 2.0 - p_e,
        fano_margin: fano.noise_ceiling - noise_x,
        msd_margin: msd_report
            .margin()
            .expect("integer eigenvalues always form a lattice"),
        ozawa_epsilon_margin: 1e-10 - (v_n - eps_sq).abs(),
        ozawa_eta_margin: 1e-10 - (v_d - eta_sq).abs(),
    })
}

/// Per-check aggregate over a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub name: String,
    pub min_margin: f64,
    /// Trial seed of the tightest instance.
    pub argmin_seed: u64,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySummary {
    pub dim: usize,
    pub outcomes: usize,
    pub kraus_per_outcome: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub violations: usize,
    pub checks: Vec<CheckAggregate>,
}

impl VerifySummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

struct CheckSpec {
    name: &'static str,
    get: fn(&TrialOutcome) -> f64,
    tolerance: f64,
}

const CHECK_SPECS: &[CheckSpec] = &[
    CheckSpec {
        name: "tradeoff_certified",
        get: |t| t.certified_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "joint_noise",
        get: |t| t.joint_noise_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "memory_eur",
        get: |t| t.memory_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "memory_eur_data_processing",
        get: |t| t.data_processing_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "guessing_floor",
        get: |t| t.guessing_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "fano_ceiling",
        get: |t| t.fano_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "msd_tradeoff",
        get: |t| t.msd_margin,
        tolerance: tol::CHECK_TOL,
    },
    CheckSpec {
        name: "ozawa_epsilon",
        get: |t| t.ozawa_epsilon_margin,
        tolerance: 0.0,
    },
    CheckSpec {
        name: "ozawa_eta",
        get: |t| t.ozawa_eta_margin,
        tolerance: 0.0,
    },
];

/// Folds trial outcomes into a summary; the aggregation is order-based on
/// the input slice, so parallel evaluation stays schedule-independent as
/// long as the slice preserves trial order.
pub fn aggregate(
    dim: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    base_seed: u64,
    trials: &[TrialOutcome],
) -> VerifySummary {
    let mut checks = Vec::with_capacity(CHECK_SPECS.len());
    let mut total_violations = 0usize;
    for spec in CHECK_SPECS {
        let mut min_margin = f64::INFINITY;
        let mut argmin_seed = base_seed;
        let mut violations = 0usize;
        for t in trials {
            let m = (spec.get)(t);
            if m < min_margin {
                min_margin = m;
                argmin_seed = t.trial_seed;
            }
            if m < -spec.tolerance {
                violations += 1;
            }
        }
        total_violations += violations;
        checks.push(CheckAggregate {
            name: spec.name.to_string(),
            min_margin,
            argmin_seed,
            violations,
        });
    }
    VerifySummary {
        dim,
        outcomes,
        kraus_per_outcome,
        trials: trials.len(),
        base_seed,
        violations: total_violations,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_has_no_violations() {
        let outcomes: Vec<TrialOutcome> = (0..25)
            .map(|i| verify_trial(2, 2, 1, 100 + i).unwrap())
            .collect();
        let summary = aggregate(2, 2, 1, 100, &outcomes);
        assert_eq!(summary.violations, 0, "{}", summary.to_json());
        assert_eq!(summary.trials, 25);
    }

    #[test]
    fn summary_is_deterministic() {
        let run = || {
            let outcomes: Vec<TrialOutcome> = (0..10)
                .map(|i| verify_trial(2, 2, 2, 7 + i).unwrap())
                .collect();
            aggregate(2, 2, 2, 7, &outcomes).to_json()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn qutrit_trial_margins_finite() {
        let t = verify_trial(3, 3, 2, 55).unwrap();
        assert!(t.certified_margin.is_finite());
        assert!(t.msd_margin.is_finite());
        assert!(t.certified_margin >= -1e-9);
    }
}
