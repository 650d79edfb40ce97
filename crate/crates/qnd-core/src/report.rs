//! Full analysis of one instrument against an observable pair, assembled
//! into a machine-readable report.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumInstrument;
use crate::checks;
use crate::disturbance::{optimize_disturbance, petz_correction};
use crate::entropy::fano_bounds;
use crate::error::{QndError, Result};
use crate::msd;
use crate::noise;
use crate::observable::Observable;
use crate::tol;
use crate::zoo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One verified inequality or identity: its margin is the slack left before
/// the check's own tolerance would be violated (absent when skipped).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl CheckRecord {
    fn graded(name: &str, margin: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            status: if margin >= -tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            margin: Some(margin),
        }
    }

    fn skipped(name: &str) -> Self {
        CheckRecord {
            name: name.to_string(),
            status: CheckStatus::Skipped,
            margin: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MsdSection {
    pub v_n: f64,
    pub v_d: f64,
    pub s_x: f64,
    pub s_z: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Everything the analysis pipeline produces for one instrument.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub instrument_id: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub n_outcomes: usize,
    /// Overlap constant of the observable pair.
    pub c: f64,
    /// Degenerate-form overlap constant, reported when it is the applicable
    /// one (absent for nondegenerate pairs, where it coincides with `c`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<f64>,
    pub noise_x: f64,
    pub noise_z: f64,
    pub disturbance_lower: f64,
    pub disturbance_upper: f64,
    pub restarts_used: u32,
    /// MAP error probability of guessing `X` from the outcome.
    pub p_e_map: f64,
    /// Fano ceiling `h(p_e) + p_e log2(|X|-1)` on the noise.
    pub fano_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msd: Option<MsdSection>,
    pub checks: Vec<CheckRecord>,
}

impl AnalysisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| QndError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub restarts: u32,
    pub seed: u64,
    pub instrument_id: String,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            instrument_id: "instrument".into(),
        }
    }
}

/// Runs the whole pipeline: noise, disturbance bracket, and every
/// applicable tradeoff check, for nondegenerate `x` and `z`.
pub fn analyze(
    inst: &QuantumInstrument,
    x: &Observable,
    z: &Observable,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport> {
    if !x.is_nondegenerate() || !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "analyze requires nondegenerate observables (degenerate spectra are \
             supported on the noise side only)"
                .into(),
        ));
    }
    let c = noise::overlap_constant(x, z)?;
    let noise_x = noise::noise(inst, x)?;
    let noise_z = noise::noise(inst, z)?;
    let bracket = optimize_disturbance(inst, z, opts.restarts, opts.seed)?;

    let noise_table = noise::noise_table(inst, x)?;
    let p_e_map = msd::map_error_probability(&noise_table);
    let fano = fano_bounds(p_e_map, x.n_branches())?;

    let mut checks_out = Vec::new();

    let t1 = checks::tradeoff_check(inst, x, z, &bracket)?;
    checks_out.push(CheckRecord::graded(
        "tradeoff_certified",
        t1.certified_margin(),
        tol::CHECK_TOL,
    ));
    checks_out.push(CheckRecord::graded(
        "tradeoff_implied",
        t1.implied_margin(),
        tol::CHECK_TOL,
    ));

    let joint = checks::joint_noise_check(inst, x, z)?;
    checks_out.push(CheckRecord::graded(
        "joint_noise",
        joint.margin(),
        tol::CHECK_TOL,
    ));

    let memory = checks::memory_eur_check(inst, x, z)?;
    checks_out.push(CheckRecord::graded(
        "memory_eur",
        memory.margin(),
        tol::CHECK_TOL,
    ));
    checks_out.push(CheckRecord::graded(
        "memory_eur_data_processing",
        memory.data_processing_margin(),
        tol::CHECK_TOL,
    ));

    checks_out.push(CheckRecord::graded(
        "guessing_floor",
        noise_x / 2.0 - p_e_map,
        tol::CHECK_TOL,
    ));
    checks_out.push(CheckRecord::graded(
        "fano_ceiling",
        fano.noise_ceiling - noise_x,
        tol::CHECK_TOL,
    ));

    let ricochet = checks::ricochet_equivalence(inst, x)?;
    checks_out.push(CheckRecord::graded(
        "ricochet",
        tol::EXACT_TOL - ricochet.max_deviation,
        0.0,
    ));

    let fid = checks::fidelity_error_identity(inst, z, &petz_correction(inst))?;
    checks_out.push(CheckRecord::graded(
        "fidelity_identity",
        tol::CHECK_TOL - fid.deviation(),
        0.0,
    ));

    let dilation = checks::dilation_check(inst, &zoo::random_density(inst.dim_in(), opts.seed))?;
    let dilation_margin = if dilation.flag_correlation_defect == 0.0 {
        tol::UNIT_TOL - dilation.isometry_defect.max(dilation.choi_distance)
    } else {
        -dilation.flag_correlation_defect
    };
    checks_out.push(CheckRecord::graded("dilation", dilation_margin, 0.0));

    // Ozawa operator-form equivalences at the maximally mixed state.
    let f_map = msd::map_guess(&noise_table, x.eigenvalues())?;
    let v_n = msd::v_noise(&noise_table, &f_map, x.eigenvalues())?;
    let eps_sq = msd::ozawa_epsilon_sq(inst, x, &f_map)?;
    checks_out.push(CheckRecord::graded(
        "ozawa_epsilon",
        1e-10 - (v_n - eps_sq).abs(),
        0.0,
    ));
    // The identity-correction disturbance measures need the quantum output
    // to live back on the system space; otherwise they are not applicable.
    let mut msd_section = None;
    if inst.dim_out() == inst.dim_in() {
        let v_d = msd::v_disturbance(inst, z, None)?;
        let eta_sq = msd::ozawa_eta_sq(inst, z)?;
        checks_out.push(CheckRecord::graded(
            "ozawa_eta",
            1e-10 - (v_d - eta_sq).abs(),
            0.0,
        ));
        let msd_report = msd::msd_tradeoff_check(inst, x, z, &f_map)?;
        match msd_report.margin() {
            Some(margin) => {
                checks_out.push(CheckRecord::graded("msd_tradeoff", margin, tol::CHECK_TOL));
                msd_section = Some(MsdSection {
                    v_n: msd_report.v_n,
                    v_d: msd_report.v_d,
                    s_x: msd_report.s_x.expect("applicable"),
                    s_z: msd_report.s_z.expect("applicable"),
                    lhs: msd_report.lhs.expect("applicable"),
                    rhs: msd_report.rhs.expect("applicable"),
                });
            }
            None => checks_out.push(CheckRecord::skipped("msd_tradeoff")),
        }
    } else {
        checks_out.push(CheckRecord::skipped("ozawa_eta"));
        checks_out.push(CheckRecord::skipped("msd_tradeoff"));
    }

    Ok(AnalysisReport {
        instrument_id: opts.instrument_id.clone(),
        dim_in: inst.dim_in(),
        dim_out: inst.dim_out(),
        n_outcomes: inst.n_outcomes(),
        c,
        c_prime: None,
        noise_x,
        noise_z,
        disturbance_lower: bracket.lower(),
        disturbance_upper: bracket.upper(),
        restarts_used: bracket.restarts_used(),
        p_e_map,
        fano_upper: fano.noise_ceiling,
        msd: msd_section,
        checks: checks_out,
    })
}
