//! Canonical and random instruments, observables, and channels for tests
//! and sweeps. Everything random is deterministic given its seed.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{CpMap, QuantumInstrument};
use crate::error::{QndError, Result};
use crate::matrix::{c, CMatrix};
use crate::observable::Observable;
use crate::state::{DensityOperator, Ket};

/// Mixes a base seed with a stream tag so that different constructors draw
/// from independent streams (splitmix64 finalizer).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-distributed isometry with orthonormal columns (`rows >= cols`),
/// via QR of a complex Gaussian matrix with the R-diagonal phase fix.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng));
    crate::matrix::orthonormalize_columns(&g)
}

/// Haar-random unitary.
pub fn haar_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    haar_isometry(dim, dim, rng)
}

/// Random full-rank density operator `G G^dag / Tr`.
pub fn random_density(dim: usize, seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xD5));
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng));
    let p = &g * g.adjoint();
    let tr = p.trace().re;
    DensityOperator::new(p * c(1.0 / tr, 0.0)).expect("Gram matrix is a valid state")
}

/// Projective (Lüders) instrument of an observable: one outcome per branch,
/// a single Kraus operator equal to the branch projector.
pub fn luders(obs: &Observable) -> QuantumInstrument {
    let outcomes = (0..obs.n_branches())
        .map(|i| {
            (
                i.to_string(),
                CpMap::new(vec![obs.projector(i).clone()]).expect("projector is a valid Kraus"),
            )
        })
        .collect();
    QuantumInstrument::new(outcomes).expect("projective completeness")
}

/// The no-measurement baseline: one outcome, identity Kraus.
pub fn trivial_instrument(d: usize) -> QuantumInstrument {
    QuantumInstrument::new(vec![("0".into(), CpMap::identity(d))])
        .expect("identity instrument is complete")
}

/// Two-outcome qubit family interpolating between a Lüders measurement of
/// `obs` (strength 1) and a trivial coin flip (strength 0):
/// `K_± = sqrt((1 ± s)/2) P_+ + sqrt((1 ∓ s)/2) P_-`.
pub fn weak_measurement(obs: &Observable, strength: f64) -> Result<QuantumInstrument> {
    if obs.dim() != 2 || obs.n_branches() != 2 || !obs.is_nondegenerate() {
        return Err(QndError::Domain(
            "weak_measurement requires a nondegenerate qubit observable".into(),
        ));
    }
    if !(0.0..=1.0).contains(&strength) {
        return Err(QndError::Domain(format!(
            "weak_measurement strength {strength} outside [0, 1]"
        )));
    }
    let hi = c(((1.0 + strength) / 2.0).sqrt(), 0.0);
    let lo = c(((1.0 - strength) / 2.0).sqrt(), 0.0);
    let p_plus = obs.projector(0);
    let p_minus = obs.projector(1);
    let k0 = p_plus * hi + p_minus * lo;
    let k1 = p_plus * lo + p_minus * hi;
    QuantumInstrument::new(vec![
        ("0".into(), CpMap::new(vec![k0])?),
        ("1".into(), CpMap::new(vec![k1])?),
    ])
}

/// Haar-random instrument: a random isometry from the input space into
/// `outcomes * kraus_per_outcome` output blocks, sliced into Kraus
/// operators. Completeness holds by construction.
pub fn random_instrument(
    d: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    seed: u64,
) -> QuantumInstrument {
    assert!(d >= 1 && outcomes >= 1 && kraus_per_outcome >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x17));
    let w = haar_isometry(d * outcomes * kraus_per_outcome, d, &mut rng);
    let mut out = Vec::with_capacity(outcomes);
    for m in 0..outcomes {
        let kraus = (0..kraus_per_outcome)
            .map(|j| CMatrix::from_fn(d, d, |r, s| w[((m * kraus_per_outcome + j) * d + r, s)]))
            .collect();
        out.push((m.to_string(), CpMap::new(kraus).expect("valid Kraus block")));
    }
    QuantumInstrument::new(out).expect("isometry slicing preserves completeness")
}

/// Random CPTP map via a Haar-random Stinespring isometry with an
/// environment of dimension `env_dim` (`dim_out * env_dim >= dim_in`).
pub fn random_channel(dim_in: usize, dim_out: usize, env_dim: usize, seed: u64) -> CpMap {
    assert!(
        dim_out * env_dim >= dim_in,
        "environment too small for an isometry"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x29));
    let w = haar_isometry(dim_out * env_dim, dim_in, &mut rng);
    let kraus = (0..env_dim)
        .map(|e| CMatrix::from_fn(dim_out, dim_in, |r, s| w[(r * env_dim + e, s)]))
        .collect();
    CpMap::new(kraus).expect("isometry slices are trace-preserving")
}

fn basis_observable(columns: &CMatrix, eigenvalues: Vec<f64>) -> Observable {
    let d = columns.nrows();
    let kets: Vec<Ket> = (0..d)
        .map(|j| Ket::new(columns.column(j).into_owned()).expect("unitary columns are unit"))
        .collect();
    Observable::from_basis(eigenvalues, &kets).expect("orthonormal basis")
}

/// Two independent Haar-random nondegenerate observables with eigenvalues
/// `0..d-1`.
pub fn random_basis_pair(d: usize, seed: u64) -> (Observable, Observable) {
    assert!(d >= 2);
    let eigenvalues: Vec<f64> = (0..d).map(|i| i as f64).collect();
    let mut rng_x = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x3A));
    let mut rng_z = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x3B));
    let x = basis_observable(&haar_unitary(d, &mut rng_x), eigenvalues.clone());
    let z = basis_observable(&haar_unitary(d, &mut rng_z), eigenvalues);
    (x, z)
}

/// Mutually unbiased pair: the Fourier basis and the computational basis,
/// eigenvalues `0..d-1`. All squared overlaps equal `1/d`.
pub fn mub_pair(d: usize) -> (Observable, Observable) {
    assert!(d >= 2);
    let eigenvalues: Vec<f64> = (0..d).map(|i| i as f64).collect();
    let fourier = CMatrix::from_fn(d, d, |k, j| {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / d as f64;
        c(theta.cos(), theta.sin()) * c(1.0 / (d as f64).sqrt(), 0.0)
    });
    let x = basis_observable(&fourier, eigenvalues.clone());
    let z = basis_observable(&CMatrix::identity(d, d), eigenvalues);
    (x, z)
}

/// The qubit Pauli pair: `X` with eigenbasis `|±>` and `Z` with the
/// computational eigenbasis, both with eigenvalues `+1, -1`.
pub fn pauli_xz_pair() -> (Observable, Observable) {
    let s = c(1.0 / 2f64.sqrt(), 0.0);
    let plus = Ket::new(nalgebra::DVector::from_vec(vec![s, s])).unwrap();
    let minus = Ket::new(nalgebra::DVector::from_vec(vec![s, -s])).unwrap();
    let x = Observable::from_basis(vec![1.0, -1.0], &[plus, minus]).unwrap();
    let z = Observable::from_basis(vec![1.0, -1.0], &[Ket::basis(2, 0), Ket::basis(2, 1)]).unwrap();
    (x, z)
}
