//! Classical and quantum entropy functionals, all in bits.

use nalgebra::DMatrix;

use crate::error::{QndError, Result};
use crate::matrix::partial_trace;
use crate::msd::lattice_spacing;
use crate::state::DensityOperator;
use crate::tol;

/// Which axis of a [`JointTable`] plays the conditioning role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

/// Labelled joint probability table.
#[derive(Debug, Clone)]
pub struct JointTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    probs: DMatrix<f64>,
}

impl JointTable {
    /// Entries in `[NEG_PROB_TOL, 0)` are clamped to zero; more negative
    /// entries are rejected, and the table must sum to one.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        mut probs: DMatrix<f64>,
    ) -> Result<Self> {
        if probs.nrows() != row_labels.len() || probs.ncols() != col_labels.len() {
            return Err(QndError::invalid("joint table", "label/shape mismatch"));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < tol::NEG_PROB_TOL {
                return Err(QndError::invalid(
                    "joint table",
                    format!("entry {p} is negative beyond tolerance"),
                ));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::TABLE_SUM_TOL {
            return Err(QndError::invalid(
                "joint table",
                format!("entries sum to {sum}, not 1"),
            ));
        }
        Ok(Self {
            row_labels,
            col_labels,
            probs,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.probs.ncols()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.probs[(row, col)]
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.probs.row(i).sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| self.probs.column(j).sum())
            .collect()
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_of(self.probs.iter().copied())
    }

    /// Conditional entropy of the opposite axis given `given`:
    /// `H(joint) - H(marginal of the conditioning axis)`.
    pub fn conditional_entropy(&self, given: Axis) -> f64 {
        let marginal = match given {
            Axis::Rows => self.row_marginal(),
            Axis::Cols => self.col_marginal(),
        };
        self.joint_entropy() - entropy_of(marginal.into_iter())
    }

    /// New table with columns `a` and `b` merged (probabilities added).
    pub fn merged_cols(&self, a: usize, b: usize) -> JointTable {
        assert!(a != b && a < self.n_cols() && b < self.n_cols());
        let (lo, hi) = (a.min(b), a.max(b));
        let mut labels = self.col_labels.clone();
        let merged_label = format!("{}+{}", labels[lo], labels[hi]);
        labels[lo] = merged_label;
        labels.remove(hi);
        let mut probs = DMatrix::zeros(self.n_rows(), self.n_cols() - 1);
        for i in 0..self.n_rows() {
            let mut out_j = 0;
            for j in 0..self.n_cols() {
                if j == hi {
                    continue;
                }
                let mut p = self.probs[(i, j)];
                if j == lo {
                    p += self.probs[(i, hi)];
                }
                probs[(i, out_j)] = p;
                out_j += 1;
            }
        }
        JointTable {
            row_labels: self.row_labels.clone(),
            col_labels: labels,
            probs,
        }
    }

    /// New table with rows and columns permuted.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> JointTable {
        assert_eq!(row_perm.len(), self.n_rows());
        assert_eq!(col_perm.len(), self.n_cols());
        let probs = DMatrix::from_fn(self.n_rows(), self.n_cols(), |i, j| {
            self.probs[(row_perm[i], col_perm[j])]
        });
        JointTable {
            row_labels: row_perm
                .iter()
                .map(|&i| self.row_labels[i].clone())
                .collect(),
            col_labels: col_perm
                .iter()
                .map(|&j| self.col_labels[j].clone())
                .collect(),
            probs,
        }
    }
}

fn entropy_of(probs: impl Iterator<Item = f64>) -> f64 {
    probs
        .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &x in p {
        if !x.is_finite() || x < tol::NEG_PROB_TOL {
            return Err(QndError::Domain(format!(
                "shannon_entropy: entry {x} is negative beyond tolerance"
            )));
        }
        sum += x.max(0.0);
    }
    if (sum - 1.0).abs() > tol::TABLE_SUM_TOL {
        return Err(QndError::Domain(format!(
            "shannon_entropy: entries sum to {sum}, not 1"
        )));
    }
    Ok(entropy_of(p.iter().map(|&x| x.max(0.0))))
}

/// Binary entropy `h(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of([p, 1.0 - p].into_iter())
}

/// Von Neumann entropy `-Tr[rho log2 rho]`, in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of(rho.spectrum().into_iter())
}

/// Conditional quantum entropy `H(A|B) = H(AB) - H(B)` of a bipartite state
/// with factor dimensions `(dim_a, dim_b)`.
pub fn quantum_conditional_entropy(rho_ab: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let (da, db) = dims;
    if rho_ab.dim() != da * db {
        return Err(QndError::Dimension(format!(
            "quantum_conditional_entropy: state dim {} is not {da}*{db}",
            rho_ab.dim()
        )));
    }
    let rho_b = DensityOperator::new(partial_trace(rho_ab.matrix(), &[da, db], &[1])?)?;
    Ok(von_neumann_entropy(rho_ab) - von_neumann_entropy(&rho_b))
}

/// The two Fano-type bounds on the noise for error probability `p_e` over an
/// alphabet of size `alphabet_size`.
///
/// An optimal guess satisfies `p_e <= noise/2`, so `noise_floor = 2 p_e` is
/// the least noise consistent with `p_e`; any guess satisfies
/// `noise <= h(p_e) + p_e log2(|X|-1) = noise_ceiling`.
#[derive(Debug, Clone, Copy)]
pub struct FanoBounds {
    pub noise_floor: f64,
    pub noise_ceiling: f64,
}

impl FanoBounds {
    /// The guessing-bound predicate `p_e <= noise/2`.
    pub fn guessing_bound_holds(noise: f64, p_e: f64) -> bool {
        p_e <= noise / 2.0 + 1e-12
    }
}

pub fn fano_bounds(p_e: f64, alphabet_size: usize) -> Result<FanoBounds> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(QndError::Domain(format!(
            "fano_bounds: p_e = {p_e} is outside [0, 1]"
        )));
    }
    if alphabet_size < 2 {
        return Err(QndError::Domain(
            "fano_bounds: alphabet must have at least two symbols".into(),
        ));
    }
    Ok(FanoBounds {
        noise_floor: 2.0 * p_e,
        noise_ceiling: binary_entropy(p_e) + p_e * ((alphabet_size - 1) as f64).log2(),
    })
}

/// Result of checking `H <= (1/2) log2(2 pi e [Var/s^2 + 1/12])` for a
/// distribution over lattice-valued outcomes.
#[derive(Debug, Clone, Copy)]
pub struct EntropyVarianceCheck {
    pub entropy: f64,
    pub bound: f64,
    pub spacing: f64,
    pub holds: bool,
}

/// Entropy-variance bound for a random variable whose values lie on a common
/// lattice. Fails if the values admit no lattice spacing.
pub fn entropy_variance_bound(values: &[f64], probs: &[f64]) -> Result<EntropyVarianceCheck> {
    if values.len() != probs.len() || values.is_empty() {
        return Err(QndError::Dimension(
            "entropy_variance_bound: values/probs length mismatch".into(),
        ));
    }
    let entropy = shannon_entropy(probs)?;
    // A single distinct value sits on every lattice; the bound is then
    // spacing-independent (variance zero), so any unit works.
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= tol::LATTICE_TOL);
    let spacing = if distinct.len() < 2 {
        1.0
    } else {
        lattice_spacing(values).ok_or_else(|| {
            QndError::Domain("entropy_variance_bound: values are not on a common lattice".into())
        })?
    };
    let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
    let var: f64 = values
        .iter()
        .zip(probs)
        .map(|(v, p)| p * (v - mean) * (v - mean))
        .sum();
    let bound = 0.5
        * (2.0
            * std::f64::consts::PI
            * std::f64::consts::E
            * (var / (spacing * spacing) + 1.0 / 12.0))
            .log2();
    Ok(EntropyVarianceCheck {
        entropy,
        bound,
        spacing,
        holds: entropy <= bound + tol::CHECK_TOL,
    })
}
