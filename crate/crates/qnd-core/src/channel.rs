//! Completely positive maps, quantum instruments, and dilations.
//!
//! An instrument is stored as its outcome-labelled Kraus branches. Two
//! derived representations are used throughout:
//!
//! * [`QuantumInstrument::channel`] — the single CPTP map
//!   `rho -> sum_m M^m(rho) (x) |m><m|` onto the joint output `S' (x) M`,
//!   with the classical outcome written on orthonormal flag states;
//! * [`stinespring_dilate`] — an isometry `V : S -> S' (x) M (x) E (x) Mbar`
//!   whose `E, Mbar` partial trace reproduces that channel, and whose `Mbar`
//!   register carries a perfectly correlated copy of the outcome flag.
//!
//! The factor ordering of the dilation is fixed as `S' (x) M (x) E (x) Mbar`
//! (row-major, last factor fastest); all partial traces in this crate rely
//! on that ordering.

use crate::error::{QndError, Result};
use crate::matrix::{self, c, ensure_finite, max_abs_diff, partial_trace, CMatrix};
use crate::state::Ket;
use crate::tol;

/// Completely positive, trace-nonincreasing map in Kraus form.
#[derive(Debug, Clone)]
pub struct CpMap {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl CpMap {
    /// Validates shapes and the trace-nonincreasing condition
    /// `sum_k K_k^dag K_k <= I` (largest eigenvalue within [`tol::ALGEBRA_TOL`]).
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QndError::invalid("cp map", "no Kraus operators"));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            ensure_finite(k, "cp map")?;
            if k.shape() != (dim_out, dim_in) {
                return Err(QndError::invalid("cp map", "Kraus operator shape mismatch"));
            }
        }
        let total = kraus_gram(&kraus);
        let max_eig = matrix::eigvalsh(&total).last().copied().unwrap_or(0.0);
        if max_eig > 1.0 + tol::ALGEBRA_TOL {
            return Err(QndError::invalid(
                "cp map",
                format!("trace-increasing: largest eigenvalue of sum K^dag K is {max_eig}"),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    /// The identity channel on a `dim`-dimensional system.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `sum_k K_k rho K_k^dag`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(QndError::Dimension(format!(
                "cp map expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Heisenberg-picture dual, `sum_k K_k^dag A K_k`.
    pub fn dual_apply(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.shape() != (self.dim_out, self.dim_out) {
            return Err(QndError::Dimension(format!(
                "cp map dual expects {0}x{0} input, got {1}x{2}",
                self.dim_out,
                a.nrows(),
                a.ncols()
            )));
        }
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * a * k;
        }
        Ok(out)
    }

    /// `sum_k K_k^dag K_k`; equals the identity for a channel.
    pub fn kraus_gram(&self) -> CMatrix {
        kraus_gram(&self.kraus)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let id = CMatrix::identity(self.dim_in, self.dim_in);
        max_abs_diff(&self.kraus_gram(), &id) <= tol
    }

    /// Composition `after . self` (this map acts first).
    pub fn then(&self, after: &CpMap) -> Result<CpMap> {
        if self.dim_out != after.dim_in {
            return Err(QndError::Dimension(format!(
                "composition: output dim {} does not match input dim {}",
                self.dim_out, after.dim_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for a in &after.kraus {
            for k in &self.kraus {
                kraus.push(a * k);
            }
        }
        Ok(CpMap {
            dim_in: self.dim_in,
            dim_out: after.dim_out,
            kraus,
        })
    }

    /// Choi matrix `(id (x) Phi)(|Phi+><Phi+|)`, trace-normalised; the
    /// reference factor comes first.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim_in;
        let o = self.dim_out;
        let mut choi = CMatrix::zeros(d * o, d * o);
        let scale = c(1.0 / d as f64, 0.0);
        for k in &self.kraus {
            for i in 0..d {
                for j in 0..d {
                    let ci = k.column(i);
                    let cj = k.column(j);
                    for r in 0..o {
                        for s in 0..o {
                            choi[(i * o + r, j * o + s)] += scale * ci[r] * cj[s].conj();
                        }
                    }
                }
            }
        }
        choi
    }
}

fn kraus_gram(kraus: &[CMatrix]) -> CMatrix {
    let dim_in = kraus[0].ncols();
    let mut total = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        total += k.adjoint() * k;
    }
    total
}

/// Outcome-labelled collection of CP maps with trace-preserving sum.
#[derive(Debug, Clone)]
pub struct QuantumInstrument {
    dim_in: usize,
    dim_out: usize,
    outcomes: Vec<(String, CpMap)>,
}

impl QuantumInstrument {
    /// Validates branch shapes, label uniqueness, and completeness
    /// `sum_m sum_k K_{m,k}^dag K_{m,k} = I` within [`tol::ALGEBRA_TOL`].
    pub fn new(outcomes: Vec<(String, CpMap)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(QndError::invalid("instrument", "no outcomes"));
        }
        let dim_in = outcomes[0].1.dim_in;
        let dim_out = outcomes[0].1.dim_out;
        for (label, branch) in &outcomes {
            if branch.dim_in != dim_in || branch.dim_out != dim_out {
                return Err(QndError::invalid(
                    "instrument",
                    format!("branch '{label}' has inconsistent dimensions"),
                ));
            }
        }
        for (i, (a, _)) in outcomes.iter().enumerate() {
            if outcomes.iter().skip(i + 1).any(|(b, _)| a == b) {
                return Err(QndError::invalid(
                    "instrument",
                    format!("duplicate outcome label '{a}'"),
                ));
            }
        }
        let mut total = CMatrix::zeros(dim_in, dim_in);
        for (_, branch) in &outcomes {
            total += branch.kraus_gram();
        }
        let residual = max_abs_diff(&total, &CMatrix::identity(dim_in, dim_in));
        if residual > tol::ALGEBRA_TOL {
            return Err(QndError::invalid(
                "instrument",
                format!("completeness violated: residual norm {residual:.3e}"),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            outcomes,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcomes(&self) -> &[(String, CpMap)] {
        &self.outcomes
    }

    pub fn label(&self, m: usize) -> &str {
        &self.outcomes[m].0
    }

    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn branch(&self, m: usize) -> &CpMap {
        &self.outcomes[m].1
    }

    /// Outcome probabilities `p(m) = Tr[M^m(rho)]`.
    pub fn outcome_probabilities(&self, rho: &CMatrix) -> Result<Vec<f64>> {
        self.outcomes
            .iter()
            .map(|(_, b)| Ok(b.apply(rho)?.trace().re))
            .collect()
    }

    /// The instrument as one CPTP map `S -> S' (x) M`,
    /// `rho -> sum_m M^m(rho) (x) |m><m|_M`, flags on the second factor.
    pub fn channel(&self) -> CpMap {
        let n = self.n_outcomes();
        let mut kraus = Vec::new();
        for (m, (_, branch)) in self.outcomes.iter().enumerate() {
            for k in branch.kraus() {
                let mut stacked = CMatrix::zeros(self.dim_out * n, self.dim_in);
                for r in 0..self.dim_out {
                    for s in 0..self.dim_in {
                        stacked[(r * n + m, s)] = k[(r, s)];
                    }
                }
                kraus.push(stacked);
            }
        }
        CpMap {
            dim_in: self.dim_in,
            dim_out: self.dim_out * n,
            kraus,
        }
    }

    /// The unconditional evolution `sum_m M^m`, discarding the outcome.
    pub fn total_map(&self) -> CpMap {
        let kraus = self
            .outcomes
            .iter()
            .flat_map(|(_, b)| b.kraus().iter().cloned())
            .collect();
        CpMap {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus,
        }
    }

    /// Same instrument with outcomes listed in permuted order.
    pub fn permuted_outcomes(&self, perm: &[usize]) -> Result<QuantumInstrument> {
        if perm.len() != self.n_outcomes() {
            return Err(QndError::Dimension("permutation length mismatch".into()));
        }
        let outcomes = perm
            .iter()
            .map(|&i| self.outcomes[i].clone())
            .collect::<Vec<_>>();
        QuantumInstrument::new(outcomes)
    }

    /// Same instrument with every Kraus operator post-composed with `u`.
    pub fn with_output_unitary(&self, u: &CMatrix) -> Result<QuantumInstrument> {
        if u.shape() != (self.dim_out, self.dim_out) {
            return Err(QndError::Dimension("unitary shape mismatch".into()));
        }
        let outcomes = self
            .outcomes
            .iter()
            .map(|(l, b)| {
                let kraus = b.kraus().iter().map(|k| u * k).collect();
                (
                    l.clone(),
                    CpMap {
                        dim_in: b.dim_in,
                        dim_out: b.dim_out,
                        kraus,
                    },
                )
            })
            .collect();
        QuantumInstrument::new(outcomes)
    }
}

/// Factor dimensions of a dilation, in the fixed order
/// `S' (x) M (x) E (x) Mbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DilationDims {
    pub s_prime: usize,
    pub flag: usize,
    pub env: usize,
    pub flag_copy: usize,
}

impl DilationDims {
    pub fn as_array(&self) -> [usize; 4] {
        [self.s_prime, self.flag, self.env, self.flag_copy]
    }

    pub fn total(&self) -> usize {
        self.s_prime * self.flag * self.env * self.flag_copy
    }
}

/// Isometry `V : S -> S' (x) M (x) E (x) Mbar` dilating an instrument.
#[derive(Debug, Clone)]
pub struct Isometry {
    matrix: CMatrix,
    input_dim: usize,
    dims: DilationDims,
}

impl Isometry {
    fn validate(matrix: CMatrix, input_dim: usize, dims: DilationDims) -> Result<Self> {
        if matrix.nrows() != dims.total() || matrix.ncols() != input_dim {
            return Err(QndError::invalid(
                "isometry",
                "shape mismatch with factor dims",
            ));
        }
        let gram = matrix.adjoint() * &matrix;
        let defect = max_abs_diff(&gram, &CMatrix::identity(input_dim, input_dim));
        if defect > tol::UNIT_TOL {
            return Err(QndError::invalid(
                "isometry",
                format!("V^dag V differs from identity by {defect:.3e}"),
            ));
        }
        Ok(Self {
            matrix,
            input_dim,
            dims,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn dims(&self) -> DilationDims {
        self.dims
    }

    /// `V |psi>`.
    pub fn apply(&self, psi: &Ket) -> Result<Ket> {
        if psi.dim() != self.input_dim {
            return Err(QndError::Dimension("isometry input dim mismatch".into()));
        }
        Ket::new(&self.matrix * psi.amplitudes())
    }

    /// `V rho V^dag` on the full dilation space.
    pub fn conjugate(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.input_dim, self.input_dim) {
            return Err(QndError::Dimension("isometry input dim mismatch".into()));
        }
        Ok(&self.matrix * rho * self.matrix.adjoint())
    }

    /// `Tr_{E, Mbar}[V rho V^dag]`, the dilated instrument channel output.
    pub fn reduced_output(&self, rho: &CMatrix) -> Result<CMatrix> {
        let full = self.conjugate(rho)?;
        partial_trace(&full, &self.dims.as_array(), &[0, 1])
    }

    /// `Tr_{S', M}[V rho V^dag]`, the environment-side output.
    pub fn environment_output(&self, rho: &CMatrix) -> Result<CMatrix> {
        let full = self.conjugate(rho)?;
        partial_trace(&full, &self.dims.as_array(), &[2, 3])
    }

    /// Joint distribution of the flag registers `M` and `Mbar` after the
    /// dilation, `p(m, mbar)`.
    pub fn flag_joint_distribution(&self, rho: &CMatrix) -> Result<nalgebra::DMatrix<f64>> {
        let full = self.conjugate(rho)?;
        let pair = partial_trace(&full, &self.dims.as_array(), &[1, 3])?;
        let n = self.dims.flag;
        let nb = self.dims.flag_copy;
        let mut p = nalgebra::DMatrix::<f64>::zeros(n, nb);
        for m in 0..n {
            for mb in 0..nb {
                p[(m, mb)] = pair[(m * nb + mb, m * nb + mb)].re;
            }
        }
        Ok(p)
    }
}

/// Canonical Stinespring dilation of an instrument.
///
/// `V |psi> = sum_{m,k} (K_{m,k} |psi>) (x) |m>_M (x) |e(m,k)>_E (x) |m>_Mbar`,
/// where `e(m,k)` enumerates the Kraus slots of the whole instrument, so the
/// environment dimension is the total Kraus count. `Mbar` repeats the outcome
/// flag; tracing out `E, Mbar` reproduces [`QuantumInstrument::channel`] and
/// the `M`/`Mbar` flags are perfectly correlated. The dilation is unique only
/// up to a unitary on `E (x) Mbar`; this is the canonical choice, and
/// entropic quantities are invariant under that freedom while Kraus-level
/// data is not.
pub fn stinespring_dilate(inst: &QuantumInstrument) -> Isometry {
    let n = inst.n_outcomes();
    let env = inst
        .outcomes()
        .iter()
        .map(|(_, b)| b.kraus().len())
        .sum::<usize>();
    let dims = DilationDims {
        s_prime: inst.dim_out(),
        flag: n,
        env,
        flag_copy: n,
    };
    let mut v = CMatrix::zeros(dims.total(), inst.dim_in());
    let mut slot = 0usize;
    for (m, (_, branch)) in inst.outcomes().iter().enumerate() {
        for kraus in branch.kraus() {
            for r in 0..inst.dim_out() {
                let row = ((r * n + m) * env + slot) * n + m;
                for s in 0..inst.dim_in() {
                    v[(row, s)] = kraus[(r, s)];
                }
            }
            slot += 1;
        }
    }
    Isometry::validate(v, inst.dim_in(), dims)
        .expect("instrument completeness guarantees an isometry")
}
