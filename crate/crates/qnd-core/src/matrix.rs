//! Dense complex matrices and the linear-algebra primitives built on them.
//!
//! Everything operator-valued in this crate is a [`CMatrix`]. Spectral
//! machinery (matrix functions, singular values) is routed through a single
//! Hermitian eigendecomposition primitive so that the clamping policy for
//! near-zero eigenvalues is uniform.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QndError, Result};
use crate::tol;

/// Dense complex matrix, the numerical substrate for all operators.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Fails if any entry is NaN or infinite, or the matrix is empty.
pub fn ensure_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(QndError::invalid(what, "matrix has a zero dimension"));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QndError::invalid(what, "non-finite entry"));
    }
    Ok(())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Kronecker (tensor) product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    assert!(!factors.is_empty());
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

fn factor_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

fn decode(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        digits[i] = flat % dims[i];
        flat /= dims[i];
    }
    digits
}

/// Partial trace of an operator on a tensor-product space.
///
/// `dims` lists the factor dimensions in tensor order (row-major index
/// convention: the last factor varies fastest) and `keep` the strictly
/// increasing indices of the factors to retain. The result acts on the kept
/// factors in their original relative order and has the same trace as `m`.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return Err(QndError::Dimension(format!(
            "partial_trace: matrix is {}x{} but factor dims {:?} give total {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(QndError::Dimension(format!(
            "partial_trace: keep {:?} is not a strictly increasing subset of 0..{}",
            keep,
            dims.len()
        )));
    }

    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product::<usize>().max(1);
    let strides = factor_strides(dims);

    // Flat index of the full space from kept and traced digit groups.
    let embed = |kept_digits: &[usize], traced_digits: &[usize]| -> usize {
        let mut flat = 0usize;
        for (pos, &f) in keep.iter().enumerate() {
            flat += kept_digits[pos] * strides[f];
        }
        for (pos, &f) in traced.iter().enumerate() {
            flat += traced_digits[pos] * strides[f];
        }
        flat
    };

    let mut out = CMatrix::zeros(kept_total, kept_total);
    for a in 0..kept_total {
        let da = decode(a, &kept_dims);
        for b in 0..kept_total {
            let db = decode(b, &kept_dims);
            let mut acc = Complex64::ZERO;
            for t in 0..traced_total {
                let dt = decode(t, &traced_dims);
                acc += m[(embed(&da, &dt), embed(&db, &dt))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(values, vectors)` with eigenvector `i` in column `i`. The input
/// is assumed Hermitian; only roundoff-scale asymmetry is tolerated.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    debug_assert!(is_hermitian(m, 1e-8), "eigh: input is not Hermitian");
    let se = m.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v = m.clone().symmetric_eigen().eigenvalues.as_slice().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Applies `f` to the spectrum of a Hermitian matrix.
///
/// Eigenvalues below [`tol::CLAMP_TOL`] are clamped to zero before `f` is
/// applied, which makes `f` such as `1/sqrt(x)` act as pseudo-inverses on the
/// numerical support.
pub fn hermitian_apply(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| {
            let l = if l < tol::CLAMP_TOL { 0.0 } else { l };
            Complex64::new(f(l), 0.0)
        }),
    ));
    &vectors * d * vectors.adjoint()
}

/// Square root of a PSD Hermitian matrix.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_apply(m, |l| l.max(0.0).sqrt())
}

/// Pseudo-inverse square root of a PSD Hermitian matrix (zero on the kernel).
pub fn psd_inv_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_apply(m, |l| if l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
}

/// Orthogonal projector onto the numerical support of a PSD Hermitian matrix.
pub fn support_projector(m: &CMatrix) -> CMatrix {
    hermitian_apply(m, |l| if l > 0.0 { 1.0 } else { 0.0 })
}

/// Nearest matrix with orthonormal columns, via thin QR with the
/// R-diagonal phase fix (so an already-orthonormal input is returned
/// unchanged up to roundoff).
pub fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let cols = m.ncols();
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::ONE
        };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Largest singular value (operator norm).
pub fn infinity_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Real part of the trace of a product, `Re Tr[a b]`, without forming `a b`.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        // Small deterministic LCG; quality is irrelevant here.
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn kron_identity_case() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
    }

    #[test]
    fn kron_block_definition() {
        let a = random_matrix(2, 2, 1);
        let b = random_matrix(3, 3, 2);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        let expect = a[(i, j)] * b[(p, q)];
                        assert!((k[(3 * i + p, 3 * j + q)] - expect).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_matches_index_formula_oracle() {
        // (a (x) b)[i*p + k, j*q + l] = a[i,j] * b[k,l]
        let a = random_matrix(2, 2, 3);
        let b = random_matrix(2, 2, 4);
        let k = kron(&a, &b);
        let (p, q) = b.shape();
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..p {
                    for l in 0..q {
                        let expect = a[(i, j)] * b[(kk, l)];
                        assert!((k[(i * p + kk, j * q + l)] - expect).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = {
            let m = random_matrix(2, 2, 5);
            let h = (&m + m.adjoint()) * c(0.5, 0.0);
            &h * h.adjoint() // PSD
        };
        let sigma = {
            let m = random_matrix(3, 3, 6);
            let h = (&m + m.adjoint()) * c(0.5, 0.0);
            &h * h.adjoint()
        };
        let joint = kron(&rho, &sigma);
        let reduced = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        let expect = &rho * sigma.trace();
        assert!(max_abs_diff(&reduced, &expect) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_double_sum_oracle() {
        // Random 2 (x) 3 operator, keep the second factor: direct index-sum oracle.
        let m = random_matrix(6, 6, 7);
        let got = partial_trace(&m, &[2, 3], &[1]).unwrap();
        let mut oracle = CMatrix::zeros(3, 3);
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = Complex64::ZERO;
                for e in 0..2 {
                    acc += m[(e * 3 + a, e * 3 + b)];
                }
                oracle[(a, b)] = acc;
            }
        }
        assert!(max_abs_diff(&got, &oracle) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let m = random_matrix(12, 12, 8);
        let reduced = partial_trace(&m, &[2, 3, 2], &[0, 2]).unwrap();
        assert!((reduced.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = random_matrix(5, 5, 9);
        assert!(partial_trace(&m, &[2, 3], &[0]).is_err());
        let m = random_matrix(6, 6, 10);
        assert!(partial_trace(&m, &[2, 3], &[1, 0]).is_err());
        assert!(partial_trace(&m, &[2, 3], &[2]).is_err());
    }

    #[test]
    fn eigh_reconstructs() {
        let m = random_matrix(4, 4, 11);
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        let (vals, vecs) = eigh(&h);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(4, vals.iter().map(|&l| c(l, 0.0))));
        let recon = &vecs * d * vecs.adjoint();
        assert!(max_abs_diff(&recon, &h) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = random_matrix(3, 3, 12);
        let p = &m * m.adjoint();
        let s = psd_sqrt(&p);
        assert!(max_abs_diff(&(&s * &s), &p) < 1e-10);
    }

    #[test]
    fn inv_sqrt_is_pseudo_inverse_on_support() {
        // Rank-deficient PSD matrix.
        let v = random_matrix(3, 1, 13);
        let p = &v * v.adjoint();
        let is = psd_inv_sqrt(&p);
        let proj = psd_sqrt(&p) * &is;
        let supp = support_projector(&p);
        assert!(max_abs_diff(&proj, &supp) < 1e-10);
    }

    #[test]
    fn infinity_norm_identity_and_rank_one() {
        assert!((infinity_norm(&CMatrix::identity(5, 5)) - 1.0).abs() < 1e-12);
        let u = random_matrix(4, 1, 14);
        let u = &u / c(u.norm(), 0.0);
        let v = random_matrix(4, 1, 15);
        let v = &v / c(v.norm(), 0.0);
        let m = &u * v.adjoint();
        assert!((infinity_norm(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinity_norm_dominates_randomized_rayleigh_oracle() {
        let m = random_matrix(3, 3, 16);
        let norm = infinity_norm(&m);
        let mut best = 0.0f64;
        let mut best_v = random_matrix(3, 1, 1000);
        for t in 0..10_000u64 {
            let v = random_matrix(3, 1, 1000 + t);
            let v = &v / c(v.norm(), 0.0);
            let r = (&m * &v).norm();
            assert!(r <= norm + 1e-12);
            if r > best {
                best = r;
                best_v = v;
            }
        }
        // Power-iterate the best probe: ||Av|| converges to the top singular
        // value from below, keeping the oracle independent of the SVD route.
        let gram = m.adjoint() * &m;
        for _ in 0..50 {
            best_v = &gram * best_v;
            best_v /= c(best_v.norm(), 0.0);
        }
        let refined = (&m * &best_v).norm();
        assert!(refined <= norm + 1e-12);
        assert!(norm - refined < 1e-3);
    }

    #[test]
    fn trace_product_matches_naive() {
        let a = random_matrix(4, 4, 17);
        let b = random_matrix(4, 4, 18);
        let naive = (&a * &b).trace().re;
        assert!((trace_product_re(&a, &b) - naive).abs() < 1e-12);
    }
}
