//! Mean-square-deviation noise and disturbance, their operator-formula
//! equivalents at the maximally mixed state, and the variance tradeoff.

use std::collections::BTreeMap;

use crate::channel::{CpMap, QuantumInstrument};
use crate::entropy::JointTable;
use crate::error::{QndError, Result};
use crate::matrix::trace_product_re;
use crate::noise;
use crate::observable::Observable;
use crate::tol;

/// How the estimate `xhat = f(m)` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Maximum a posteriori over the table, estimates drawn from the
    /// eigenvalue set.
    MapGuess,
    /// Posterior mean, real-valued.
    ConditionalMean,
    Custom,
}

/// Map from outcome label to a real estimate of the observable's value.
#[derive(Debug, Clone)]
pub struct EstimatorMap {
    kind: EstimatorKind,
    values: BTreeMap<String, f64>,
}

impl EstimatorMap {
    pub fn custom(values: BTreeMap<String, f64>) -> Self {
        Self {
            kind: EstimatorKind::Custom,
            values,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn estimate(&self, outcome: &str) -> Option<f64> {
        self.values.get(outcome).copied()
    }

    fn require(&self, outcome: &str) -> Result<f64> {
        self.estimate(outcome).ok_or_else(|| {
            QndError::Domain(format!("estimator has no value for outcome '{outcome}'"))
        })
    }
}

/// MAP estimator: `f(m)` is the eigenvalue of the most likely column in row
/// `m`; ties go to the smallest column index, zero-probability rows default
/// to the first eigenvalue.
pub fn map_guess(t: &JointTable, eigenvalues: &[f64]) -> Result<EstimatorMap> {
    if eigenvalues.len() != t.n_cols() {
        return Err(QndError::Dimension(
            "map_guess: eigenvalue count must match table columns".into(),
        ));
    }
    let mut values = BTreeMap::new();
    for (m, label) in t.row_labels().iter().enumerate() {
        let mut best = 0usize;
        let mut best_p = t.prob(m, 0);
        for x in 1..t.n_cols() {
            if t.prob(m, x) > best_p {
                best = x;
                best_p = t.prob(m, x);
            }
        }
        values.insert(label.clone(), eigenvalues[best]);
    }
    Ok(EstimatorMap {
        kind: EstimatorKind::MapGuess,
        values,
    })
}

/// Posterior-mean estimator `f(m) = sum_x p(x|m) xi_x`; zero-probability
/// rows fall back to the unweighted mean of the eigenvalues.
pub fn conditional_mean(t: &JointTable, eigenvalues: &[f64]) -> Result<EstimatorMap> {
    if eigenvalues.len() != t.n_cols() {
        return Err(QndError::Dimension(
            "conditional_mean: eigenvalue count must match table columns".into(),
        ));
    }
    let mut values = BTreeMap::new();
    for (m, label) in t.row_labels().iter().enumerate() {
        let p_row: f64 = (0..t.n_cols()).map(|x| t.prob(m, x)).sum();
        let est = if p_row > 0.0 {
            (0..t.n_cols())
                .map(|x| t.prob(m, x) / p_row * eigenvalues[x])
                .sum()
        } else {
            eigenvalues.iter().sum::<f64>() / eigenvalues.len() as f64
        };
        values.insert(label.clone(), est);
    }
    Ok(EstimatorMap {
        kind: EstimatorKind::ConditionalMean,
        values,
    })
}

/// Total error probability of the MAP guess, `1 - sum_m max_x p(m, x)`.
pub fn map_error_probability(t: &JointTable) -> f64 {
    let mut correct = 0.0;
    for m in 0..t.n_rows() {
        correct += (0..t.n_cols()).map(|x| t.prob(m, x)).fold(0.0, f64::max);
    }
    (1.0 - correct).max(0.0)
}

/// Mean square deviation of the estimate from the true eigenvalue,
/// `V_N = sum_{m,x} p(m,x) [f(m) - xi_x]^2`.
pub fn v_noise(t: &JointTable, f: &EstimatorMap, eigenvalues: &[f64]) -> Result<f64> {
    if eigenvalues.len() != t.n_cols() {
        return Err(QndError::Dimension(
            "v_noise: eigenvalue count must match table columns".into(),
        ));
    }
    let mut total = 0.0;
    for (m, label) in t.row_labels().iter().enumerate() {
        let est = f.require(label)?;
        for (x, xi) in eigenvalues.iter().enumerate() {
            let dev = est - xi;
            total += t.prob(m, x) * dev * dev;
        }
    }
    Ok(total)
}

/// Joint table `p(zhat, z)` of the eigenvalue readout of `z` after the
/// instrument and an optional correction channel (`None` discards the
/// outcome register and requires `S' = S`).
pub fn corrected_readout_table(
    inst: &QuantumInstrument,
    z: &Observable,
    correction: Option<&CpMap>,
) -> Result<JointTable> {
    if !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "readout table requires a nondegenerate observable".into(),
        ));
    }
    if inst.dim_in() != z.dim() {
        return Err(QndError::Dimension(
            "instrument/observable dimension mismatch".into(),
        ));
    }
    let map = match correction {
        None => inst.total_map(),
        Some(e) => inst.channel().then(e)?,
    };
    if map.dim_out() != z.dim() {
        return Err(QndError::Dimension(format!(
            "corrected output dim {} does not match observable dim {}",
            map.dim_out(),
            z.dim()
        )));
    }
    let d = z.dim() as f64;
    let labels = z.labels();
    let mut probs = nalgebra::DMatrix::zeros(labels.len(), labels.len());
    for (zi, proj) in z.projectors().iter().enumerate() {
        let out = map.apply(proj)?;
        for (zh, proj_hat) in z.projectors().iter().enumerate() {
            probs[(zh, zi)] = trace_product_re(proj_hat, &out) / d;
        }
    }
    JointTable::new(labels.clone(), labels, probs)
}

/// MSD disturbance `V_D = sum_{zhat,z} p(zhat,z) [zeta_zhat - zeta_z]^2`,
/// with the estimate fixed to the eigenvalue read out after the (optional)
/// correction.
pub fn v_disturbance(
    inst: &QuantumInstrument,
    z: &Observable,
    correction: Option<&CpMap>,
) -> Result<f64> {
    let t = corrected_readout_table(inst, z, correction)?;
    let mut total = 0.0;
    for (zh, a) in z.eigenvalues().iter().enumerate() {
        for (zi, b) in z.eigenvalues().iter().enumerate() {
            let dev = a - b;
            total += t.prob(zh, zi) * dev * dev;
        }
    }
    Ok(total)
}

/// Operator form of the MSD noise at the maximally mixed state:
/// `(1/d) [ sum_m f(m)^2 Tr E_m - 2 sum_m f(m) Tr(E_m X) + Tr X^2 ]`
/// with `E_m = sum_k K_{m,k}^dag K_{m,k}`.
pub fn ozawa_epsilon_sq(inst: &QuantumInstrument, x: &Observable, f: &EstimatorMap) -> Result<f64> {
    if !x.is_nondegenerate() {
        return Err(QndError::Domain(
            "ozawa_epsilon_sq requires a nondegenerate observable".into(),
        ));
    }
    if inst.dim_in() != x.dim() {
        return Err(QndError::Dimension(
            "instrument/observable dimension mismatch".into(),
        ));
    }
    let d = x.dim() as f64;
    let x_mat = x.matrix();
    let x_sq = x.matrix_squared();
    let mut acc = x_sq.trace().re;
    for (label, branch) in inst.outcomes() {
        let effect = branch.kraus_gram();
        let est = f.require(label)?;
        acc += est * est * effect.trace().re;
        acc -= 2.0 * est * trace_product_re(&effect, &x_mat);
    }
    Ok(acc / d)
}

/// Operator form of the MSD disturbance at the maximally mixed state with
/// the outcome register discarded:
/// `(1/d) [ Tr Phi*(Z^2) - 2 Tr(Z Phi*(Z)) + Tr Z^2 ]` with `Phi` the
/// unconditional evolution.
pub fn ozawa_eta_sq(inst: &QuantumInstrument, z: &Observable) -> Result<f64> {
    if !z.is_nondegenerate() {
        return Err(QndError::Domain(
            "ozawa_eta_sq requires a nondegenerate observable".into(),
        ));
    }
    if inst.dim_in() != z.dim() || inst.dim_out() != z.dim() {
        return Err(QndError::Dimension(
            "ozawa_eta_sq requires S' = S matching the observable".into(),
        ));
    }
    let d = z.dim() as f64;
    let phi = inst.total_map();
    let z_mat = z.matrix();
    let z_sq = z.matrix_squared();
    let dual_z = phi.dual_apply(&z_mat)?;
    let dual_z_sq = phi.dual_apply(&z_sq)?;
    let acc = dual_z_sq.trace().re - 2.0 * trace_product_re(&z_mat, &dual_z) + z_sq.trace().re;
    Ok(acc / d)
}

fn rationalize(x: f64, rel_tol: f64, cap: u64) -> Option<(u64, u64)> {
    debug_assert!(x >= 1.0);
    // Continued-fraction convergents; accept once the remainder is
    // negligible, give up when the denominator cap binds first.
    let (mut h0, mut k0, mut h1, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut xk = x;
    for _ in 0..64 {
        let a = xk.floor();
        if !(0.0..=1e18).contains(&a) {
            return None;
        }
        let a_u = a as u64;
        let h = a_u.checked_mul(h1)?.checked_add(h0)?;
        let k = a_u.checked_mul(k1)?.checked_add(k0)?;
        if k > cap {
            return None;
        }
        let frac = xk - a;
        if frac <= rel_tol * xk.max(1.0) {
            return Some((h, k));
        }
        (h0, k0, h1, k1) = (h1, k1, h, k);
        xk = 1.0 / frac;
    }
    None
}

fn real_gcd(a: f64, b: f64) -> Option<f64> {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let (_, q) = rationalize(hi / lo, tol::LATTICE_TOL, tol::LATTICE_DENOM_CAP)?;
    Some(lo / q as f64)
}

/// Largest `s > 0` such that all pairwise differences of `values` are
/// integer multiples of `s` within tolerance; `None` when the values are
/// incommensurate or all coincide.
pub fn lattice_spacing(values: &[f64]) -> Option<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|a, b| (*a - *b).abs() <= tol::LATTICE_TOL);
    if sorted.len() < 2 {
        return None;
    }
    let diffs: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let mut g = diffs[0];
    for d in &diffs[1..] {
        g = real_gcd(g, *d)?;
    }
    // Verify the lattice actually fits, pairwise via the offsets from the
    // smallest value.
    for v in &sorted {
        let delta = v - sorted[0];
        let n = (delta / g).round();
        if (delta - n * g).abs() > tol::LATTICE_TOL * delta.abs().max(1.0) {
            return None;
        }
    }
    Some(g)
}

/// Lattice spacing of an observable's eigenvalues.
pub fn eigenvalue_spacing(obs: &Observable) -> Option<f64> {
    lattice_spacing(obs.eigenvalues())
}

/// Result of the variance tradeoff
/// `[V_N + s_X^2/12][V_D + s_Z^2/12] >= (s_X s_Z / (2 pi e c))^2`.
#[derive(Debug, Clone, Copy)]
pub struct MsdTradeoffReport {
    pub v_n: f64,
    pub v_d: f64,
    pub s_x: Option<f64>,
    pub s_z: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

impl MsdTradeoffReport {
    /// `None` when either spectrum has no lattice (inapplicable, not failed).
    pub fn applicable(&self) -> bool {
        self.s_x.is_some() && self.s_z.is_some()
    }

    pub fn margin(&self) -> Option<f64> {
        Some(self.lhs? - self.rhs?)
    }

    pub fn holds(&self) -> bool {
        match self.margin() {
            Some(m) => m >= -tol::CHECK_TOL,
            None => true,
        }
    }
}

/// Evaluates the variance tradeoff with `V_D` taken at identity correction.
pub fn msd_tradeoff_check(
    inst: &QuantumInstrument,
    x: &Observable,
    z: &Observable,
    f: &EstimatorMap,
) -> Result<MsdTradeoffReport> {
    let c_const = noise::overlap_constant(x, z)?;
    let table = noise::noise_table(inst, x)?;
    let v_n = v_noise(&table, f, x.eigenvalues())?;
    let v_d = v_disturbance(inst, z, None)?;
    let s_x = eigenvalue_spacing(x);
    let s_z = eigenvalue_spacing(z);
    let (lhs, rhs) = match (s_x, s_z) {
        (Some(sx), Some(sz)) => {
            let lhs = (v_n + sx * sx / 12.0) * (v_d + sz * sz / 12.0);
            let rhs =
                (sx * sz / (2.0 * std::f64::consts::PI * std::f64::consts::E * c_const)).powi(2);
            (Some(lhs), Some(rhs))
        }
        _ => (None, None),
    };
    Ok(MsdTradeoffReport {
        v_n,
        v_d,
        s_x,
        s_z,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::Axis;
    use crate::zoo;
    use nalgebra::DMatrix;

    fn table(rows: usize, cols: usize, data: &[f64]) -> JointTable {
        JointTable::new(
            (0..rows).map(|i| i.to_string()).collect(),
            (0..cols).map(|j| j.to_string()).collect(),
            DMatrix::from_row_slice(rows, cols, data),
        )
        .unwrap()
    }

    #[test]
    fn map_guess_cases() {
        let diag = table(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let f = map_guess(&diag, &[1.0, -1.0]).unwrap();
        assert_eq!(f.estimate("0"), Some(1.0));
        assert_eq!(f.estimate("1"), Some(-1.0));
        assert_eq!(map_error_probability(&diag), 0.0);

        let uniform = table(2, 2, &[0.25; 4]);
        assert!((map_error_probability(&uniform) - 0.5).abs() < 1e-12);

        let flip = table(2, 2, &[0.45, 0.05, 0.05, 0.45]);
        let f = map_guess(&flip, &[1.0, -1.0]).unwrap();
        assert_eq!(f.estimate("0"), Some(1.0));
        assert_eq!(f.estimate("1"), Some(-1.0));
        assert!((map_error_probability(&flip) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn v_noise_cases() {
        let (x, _) = zoo::pauli_xz_pair();
        let inst = zoo::luders(&x);
        let t = noise::noise_table(&inst, &x).unwrap();
        let f = map_guess(&t, x.eigenvalues()).unwrap();
        assert!(v_noise(&t, &f, x.eigenvalues()).unwrap().abs() < 1e-12);

        // Trivial instrument, conditional mean f(m) = 0, eigenvalues +-1.
        let triv = zoo::trivial_instrument(2);
        let t = noise::noise_table(&triv, &x).unwrap();
        let f = conditional_mean(&t, x.eigenvalues()).unwrap();
        assert_eq!(f.estimate("0"), Some(0.0));
        assert!((v_noise(&t, &f, x.eigenvalues()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_mean_is_mmse_optimal() {
        let t = table(3, 2, &[0.3, 0.1, 0.05, 0.25, 0.2, 0.1]);
        let eig = [2.0, -1.0];
        let mean = conditional_mean(&t, &eig).unwrap();
        let base = v_noise(&t, &mean, &eig).unwrap();
        for shift in [-0.3, 0.1, 0.5] {
            let mut vals = BTreeMap::new();
            for label in t.row_labels() {
                vals.insert(label.clone(), mean.estimate(label).unwrap() + shift);
            }
            let other = EstimatorMap::custom(vals);
            assert!(v_noise(&t, &other, &eig).unwrap() >= base - 1e-12);
        }
        let guess = map_guess(&t, &eig).unwrap();
        assert!(v_noise(&t, &guess, &eig).unwrap() >= base - 1e-12);
    }

    #[test]
    fn v_disturbance_cases() {
        let (x, z) = zoo::pauli_xz_pair();
        assert!(
            v_disturbance(&zoo::trivial_instrument(2), &z, None)
                .unwrap()
                .abs()
                < 1e-12
        );
        // Lüders MUB Pauli instrument, identity correction: maximal value 2.
        let inst = zoo::luders(&x);
        assert!((v_disturbance(&inst, &z, None).unwrap() - 2.0).abs() < 1e-12);

        // Table-level double sum oracle on a random instrument.
        let rand = zoo::random_instrument(2, 2, 1, 19);
        let t = corrected_readout_table(&rand, &z, None).unwrap();
        let mut oracle = 0.0;
        for zh in 0..2 {
            for zi in 0..2 {
                let dev = z.eigenvalue(zh) - z.eigenvalue(zi);
                oracle += t.prob(zh, zi) * dev * dev;
            }
        }
        assert!((v_disturbance(&rand, &z, None).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn ozawa_epsilon_matches_v_noise() {
        let (x, _) = zoo::pauli_xz_pair();
        let inst = zoo::luders(&x);
        let t = noise::noise_table(&inst, &x).unwrap();
        let f = map_guess(&t, x.eigenvalues()).unwrap();
        assert!(ozawa_epsilon_sq(&inst, &x, &f).unwrap().abs() < 1e-12);

        // f = 0 on the trivial instrument: (1/d) Tr X^2 = 1 for Pauli X.
        let triv = zoo::trivial_instrument(2);
        let zero = EstimatorMap::custom(BTreeMap::from([("0".to_string(), 0.0)]));
        assert!((ozawa_epsilon_sq(&triv, &x, &zero).unwrap() - 1.0).abs() < 1e-12);

        for seed in 0..10u64 {
            let inst = zoo::random_instrument(2, 2, 2, seed);
            let t = noise::noise_table(&inst, &x).unwrap();
            let f = map_guess(&t, x.eigenvalues()).unwrap();
            let a = v_noise(&t, &f, x.eigenvalues()).unwrap();
            let b = ozawa_epsilon_sq(&inst, &x, &f).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn ozawa_eta_matches_v_disturbance() {
        let (x, z) = zoo::pauli_xz_pair();
        assert!(ozawa_eta_sq(&zoo::trivial_instrument(2), &z).unwrap().abs() < 1e-12);
        assert!((ozawa_eta_sq(&zoo::luders(&x), &z).unwrap() - 2.0).abs() < 1e-12);
        for seed in 0..10u64 {
            let inst = zoo::random_instrument(2, 2, 2, seed + 100);
            let a = v_disturbance(&inst, &z, None).unwrap();
            let b = ozawa_eta_sq(&inst, &z).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_noise_forces_maximal_disturbance_on_pauli_pair() {
        // Whenever V_N vanishes for the qubit Pauli pair, the tradeoff
        // forces p(zhat, z) = p(zhat)/2 and hence V_D = 2, for any
        // zero-noise apparatus, not just the bare projective one.
        let (x, z) = zoo::pauli_xz_pair();
        let luders = zoo::luders(&x);
        let mut rng = rand::SeedableRng::seed_from_u64(17);
        let candidates = vec![
            luders.clone(),
            luders.permuted_outcomes(&[1, 0]).unwrap(),
            luders
                .with_output_unitary(&zoo::haar_unitary(2, &mut rng))
                .unwrap(),
            zoo::weak_measurement(&x, 1.0).unwrap(),
        ];
        for inst in candidates {
            let t = noise::noise_table(&inst, &x).unwrap();
            let f = map_guess(&t, x.eigenvalues()).unwrap();
            let v_n = v_noise(&t, &f, x.eigenvalues()).unwrap();
            assert!(v_n.abs() < 1e-12, "candidate is not zero-noise: {v_n}");
            let v_d = v_disturbance(&inst, &z, None).unwrap();
            assert!((v_d - 2.0).abs() < 1e-6, "v_d {v_d}");
        }
    }

    #[test]
    fn lattice_spacing_cases() {
        assert!((lattice_spacing(&[1.0, -1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((lattice_spacing(&[0.0, 1.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lattice_spacing(&[0.0, 1.0, 2f64.sqrt()]), None);
        assert!((lattice_spacing(&[0.0, 0.5, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        // Floating-point jitter on a genuine lattice is tolerated.
        assert!((lattice_spacing(&[0.0, 1.0 + 3e-13, 3.0 - 2e-13]).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(lattice_spacing(&[5.0]), None);
    }

    #[test]
    fn msd_tradeoff_pauli_cases() {
        let (x, z) = zoo::pauli_xz_pair();
        let inst = zoo::luders(&x);
        let t = noise::noise_table(&inst, &x).unwrap();
        let f = map_guess(&t, x.eigenvalues()).unwrap();
        let r = msd_tradeoff_check(&inst, &x, &z, &f).unwrap();
        assert!(r.applicable());
        // RHS for the Pauli pair: 16 / (pi^2 e^2) ~ 0.219.
        assert!((r.rhs.unwrap() - 0.2194).abs() < 1e-3);
        assert!(r.v_n.abs() < 1e-12);
        assert!((r.v_d - 2.0).abs() < 1e-12);
        assert!((r.lhs.unwrap() - (1.0 / 3.0) * (2.0 + 1.0 / 3.0)).abs() < 1e-9);
        assert!(r.holds());

        // Trivial instrument with the conditional-mean estimator:
        // (1 + 1/3)(0 + 1/3) = 0.444...
        let triv = zoo::trivial_instrument(2);
        let t = noise::noise_table(&triv, &x).unwrap();
        let f = conditional_mean(&t, x.eigenvalues()).unwrap();
        let r = msd_tradeoff_check(&triv, &x, &z, &f).unwrap();
        assert!((r.lhs.unwrap() - 4.0 / 9.0).abs() < 1e-9);
        assert!(r.holds());
    }

    #[test]
    fn msd_tradeoff_inapplicable_without_lattice() {
        let s = std::f64::consts::SQRT_2;
        let x = Observable::from_basis(
            vec![0.0, 1.0, s],
            &[
                crate::state::Ket::basis(3, 0),
                crate::state::Ket::basis(3, 1),
                crate::state::Ket::basis(3, 2),
            ],
        )
        .unwrap();
        let (_, z) = zoo::mub_pair(3);
        let inst = zoo::trivial_instrument(3);
        let t = noise::noise_table(&inst, &x).unwrap();
        let f = map_guess(&t, x.eigenvalues()).unwrap();
        let r = msd_tradeoff_check(&inst, &x, &z, &f).unwrap();
        assert!(!r.applicable());
        assert!(r.holds());
        assert!(r.margin().is_none());
        let _ = t.conditional_entropy(Axis::Rows);
    }
}
