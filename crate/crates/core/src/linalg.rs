//! Dense complex matrix helpers shared by the analysis modules.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. Vectorization is
//! row-major throughout: `vec(M)[r * d + s] = M[(r, s)]`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::random::{random_unitary, seeded};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Fallback tolerance used when the caller does not provide one.
pub const DEFAULT_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise distance between two matrices of equal shape.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn basis_vector(n: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[k] = c64(1.0, 0.0);
    v
}

/// `|u><v|`
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Row-major vectorization of a square or rectangular matrix.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    let (rows, cols) = m.shape();
    ComplexVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vectorize`] for a `d x d` matrix.
pub fn unvectorize(v: &ComplexVector, d: usize) -> ComplexMatrix {
    debug_assert_eq!(v.len(), d * d);
    ComplexMatrix::from_fn(d, d, |r, s| v[r * d + s])
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(m.nrows())
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of a general square complex matrix from its Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    t.diagonal().iter().copied().collect()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * c64(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Thin singular value decomposition `m = u · diag(singular_values) · v_t`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: ComplexMatrix,
}

impl Svd {
    fn reconstruction_error(&self, m: &ComplexMatrix) -> f64 {
        let s = DVector::from_iterator(
            self.singular_values.len(),
            self.singular_values.iter().map(|&x| c64(x, 0.0)),
        );
        let rebuilt = &self.u * ComplexMatrix::from_diagonal(&s) * &self.v_t;
        let k = self.singular_values.len();
        max_abs_diff(&rebuilt, m)
            .max(max_abs_diff(&(self.u.adjoint() * &self.u), &identity(k)))
            .max(max_abs_diff(&(&self.v_t * self.v_t.adjoint()), &identity(k)))
    }
}

fn raw_svd(m: ComplexMatrix) -> Svd {
    let svd = SVD::new(m, true, true);
    Svd {
        u: svd.u.expect("left singular vectors were requested"),
        singular_values: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("right singular vectors were requested"),
    }
}

/// Singular value decomposition with a reconstruction check.
///
/// The complex bidiagonal SVD in nalgebra occasionally returns unitary factors
/// that do not reproduce a rank-deficient input. When that happens the
/// decomposition is retried on the adjoint and then on fixed unitary
/// rotations of the input, and the first accurate result is used.
pub fn svd(m: &ComplexMatrix) -> Svd {
    let accept = 1e-12 * (1.0 + max_abs(m)) * (m.nrows().max(m.ncols()).max(1) as f64);
    let first = raw_svd(m.clone());
    let mut best_err = first.reconstruction_error(m);
    if best_err <= accept {
        return first;
    }
    let mut best = first;

    let adj = raw_svd(m.adjoint());
    let candidate = Svd {
        u: adj.v_t.adjoint(),
        singular_values: adj.singular_values,
        v_t: adj.u.adjoint(),
    };
    let err = candidate.reconstruction_error(m);
    if err <= accept {
        return candidate;
    }
    if err < best_err {
        best = candidate;
        best_err = err;
    }

    let mut rng = seeded(0x5EED_0003);
    for _ in 0..8 {
        let q = random_unitary(&mut rng, m.nrows());
        let rotated = raw_svd(&q * m);
        let candidate = Svd {
            u: q.adjoint() * rotated.u,
            singular_values: rotated.singular_values,
            v_t: rotated.v_t,
        };
        let err = candidate.reconstruction_error(m);
        if err <= accept {
            return candidate;
        }
        if err < best_err {
            best = candidate;
            best_err = err;
        }
    }
    best
}

/// Right singular vectors spanning the (numerical) kernel of `m`, taking the
/// `count` directions with the smallest singular values.
pub fn kernel_basis(m: &ComplexMatrix, count: usize) -> Vec<ComplexVector> {
    let n = m.ncols();
    let svd = svd(m);
    let v_t = svd.v_t;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut basis: Vec<ComplexVector> = order
        .iter()
        .take(count)
        .map(|&j| v_t.row(j).adjoint())
        .collect();
    // Wide inputs have fewer singular triplets than columns; the missing
    // directions are in the kernel exactly.
    if basis.len() < count && v_t.nrows() < n {
        let extra = orthonormal_complement(&basis, n);
        basis.extend(extra.into_iter().take(count - basis.len()));
    }
    basis
}

/// Picks `count` orthonormal vectors from `candidates`, scanning in index
/// order and accepting a candidate once its Gram-Schmidt residual is
/// comparable to the best residual still available.
fn select_in_index_order(
    candidates: &[ComplexVector],
    mut accepted: Vec<ComplexVector>,
    count: usize,
) -> Vec<ComplexVector> {
    let start = accepted.len();
    let mut used = vec![false; candidates.len()];
    while accepted.len() - start < count {
        let residuals: Vec<Option<ComplexVector>> = candidates
            .iter()
            .zip(&used)
            .map(|(c, &taken)| {
                if taken {
                    return None;
                }
                let mut r = c.clone();
                // two passes keep the result orthogonal to working precision
                for _ in 0..2 {
                    for a in &accepted {
                        let overlap = a.dotc(&r);
                        r -= a * overlap;
                    }
                }
                Some(r)
            })
            .collect();
        let best = residuals
            .iter()
            .flatten()
            .map(|r| r.norm())
            .fold(0.0, f64::max);
        if best <= 1e-12 {
            break;
        }
        let pick = residuals
            .iter()
            .position(|r| r.as_ref().is_some_and(|r| r.norm() >= 0.1 * best))
            .expect("the best candidate satisfies the acceptance bound");
        used[pick] = true;
        let r = residuals[pick].clone().expect("picked an untaken candidate");
        let norm = r.norm();
        accepted.push(r / c64(norm, 0.0));
    }
    accepted.split_off(start)
}

/// Orthonormal basis of the orthogonal complement of `span(columns)`, built by
/// projecting standard basis vectors in index order.
pub fn orthonormal_complement(columns: &[ComplexVector], n: usize) -> Vec<ComplexVector> {
    let existing = select_in_index_order(columns, Vec::new(), columns.len());
    let count = n.saturating_sub(existing.len());
    let candidates: Vec<ComplexVector> = (0..n).map(|k| basis_vector(n, k)).collect();
    select_in_index_order(&candidates, existing, count)
}

/// Eigendecomposition of a Hermitian matrix with solver-independent
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, positive ones first in descending order, then the rest in
    /// descending magnitude.
    pub values: Vec<f64>,
    /// Unit eigenvectors matching `values`.
    pub vectors: Vec<ComplexVector>,
}

/// Computes a Hermitian eigendecomposition whose degenerate eigenspaces are
/// spanned by projections of the standard basis vectors taken in index order,
/// so the output does not depend on how the solver rotates a degenerate block.
pub fn canonical_hermitian_eigen(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        };
    }
    let sym = (h + h.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = eig.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let cluster_tol = 1e-10 * scale;

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= cluster_tol
        {
            end += 1;
        }
        let block: Vec<ComplexVector> = order[start..end]
            .iter()
            .map(|&j| eig.eigenvectors.column(j).into_owned())
            .collect();
        let candidates: Vec<ComplexVector> = (0..n)
            .map(|k| {
                let mut proj = ComplexVector::zeros(n);
                for b in &block {
                    proj += b * b[k].conj();
                }
                proj
            })
            .collect();
        for v in select_in_index_order(&candidates, Vec::new(), block.len()) {
            let value = v.dotc(&(&sym * &v)).re;
            values.push(value);
            vectors.push(v);
        }
        start = end;
    }

    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        (x <= 0.0)
            .cmp(&(y <= 0.0))
            .then(y.abs().total_cmp(&x.abs()))
            .then(a.cmp(&b))
    });
    HermitianEigen {
        values: idx.iter().map(|&i| values[i]).collect(),
        vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
    }
}

/// Smallest and largest singular values.
pub fn singular_value_range(m: &ComplexMatrix) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let sv = svd(m).singular_values;
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorize_is_row_major() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0)],
        );
        let v = vectorize(&m);
        assert_eq!(v[1], c64(2.0, 0.0));
        assert_eq!(v[2], c64(3.0, 0.0));
        assert_eq!(unvectorize(&v, 2), m);
    }

    #[test]
    fn complement_of_empty_set_is_standard_basis() {
        let basis = orthonormal_complement(&[], 3);
        for (k, b) in basis.iter().enumerate() {
            assert_eq!(b, &basis_vector(3, k));
        }
    }

    #[test]
    fn complement_completes_a_basis() {
        let v = ComplexVector::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
            / c64(2f64.sqrt(), 0.0);
        let comp = orthonormal_complement(std::slice::from_ref(&v), 3);
        assert_eq!(comp.len(), 2);
        for w in &comp {
            assert!(v.dotc(w).norm() < 1e-14);
            assert!((w.norm() - 1.0).abs() < 1e-14);
        }
        assert!(comp[0].dotc(&comp[1]).norm() < 1e-14);
    }

    #[test]
    fn degenerate_eigenspace_uses_index_order_projections() {
        // diag(2, 2, -1): the degenerate block must come back as e0, e1.
        let mut h = ComplexMatrix::zeros(3, 3);
        h[(0, 0)] = c64(2.0, 0.0);
        h[(1, 1)] = c64(2.0, 0.0);
        h[(2, 2)] = c64(-1.0, 0.0);
        let eig = canonical_hermitian_eigen(&h);
        assert_eq!(eig.values.len(), 3);
        assert!((eig.values[0] - 2.0).abs() < 1e-14);
        assert!((eig.values[2] + 1.0).abs() < 1e-14);
        assert!((&eig.vectors[0] - basis_vector(3, 0)).norm() < 1e-14);
        assert!((&eig.vectors[1] - basis_vector(3, 1)).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let v = ComplexVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 1.0)]);
        let m = outer(&v, &v);
        let k = kernel_basis(&m, 1);
        assert!((&m * &k[0]).norm() < 1e-14);
    }
}
