//! Superoperator representations of Hermiticity-preserving linear maps and
//! conversions between them.
//!
//! For a `d`-dimensional system the A-matrix acts on row-major vectorized
//! density matrices, `ρ'[r'][s'] = Σ A[(r'd+s'), (rd+s)] ρ[r][s]`. The B-matrix
//! is the index reshuffle `B[(r'd+r), (s'd+s)] = A[(r'd+s'), (rd+s)]`; it is
//! Hermitian exactly when the map preserves Hermiticity, and its
//! eigendecomposition yields the signed operator sum
//! `ℰ(ρ) = Σ ηᵢ Eᵢ ρ Eᵢ†` with `ηᵢ = ±1`.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, canonical_hermitian_eigen, ensure_square, frobenius, hermitian_deviation,
    hermitian_eigenvalues, identity, max_abs, max_abs_diff, trace, unvectorize, vectorize,
    ComplexMatrix,
};
use crate::pseudolinalg::{eta_metric, pseudounitary_deviation, Signature};

/// Operators whose largest entry is at or below this are dropped from a sum.
pub const ZERO_OPERATOR_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Non-negative values map to `Plus`.
    pub fn from_f64(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_int(x: i64) -> Option<Self> {
        match x {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedTerm {
    pub sign: Sign,
    pub op: ComplexMatrix,
}

impl SignedTerm {
    pub fn new(sign: Sign, op: ComplexMatrix) -> Self {
        SignedTerm { sign, op }
    }
}

/// `ℰ(ρ) = Σ ηᵢ Eᵢ ρ Eᵢ†` with every `+1` term ahead of every `-1` term.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedOperatorSum {
    dim: usize,
    terms: Vec<SignedTerm>,
}

impl SignedOperatorSum {
    /// Builds a sum from terms in any order. Terms are stably partitioned into
    /// the `+1` block followed by the `-1` block; zero operators are dropped.
    pub fn new(dim: usize, terms: Vec<SignedTerm>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.op.shape() != (dim, dim) {
                return Err(Error::dims(
                    format!("{dim}x{dim} operator"),
                    format!("term {i} of shape {}x{}", t.op.nrows(), t.op.ncols()),
                ));
            }
        }
        let (mut plus, minus): (Vec<_>, Vec<_>) = terms
            .into_iter()
            .filter(|t| max_abs(&t.op) > ZERO_OPERATOR_THRESHOLD)
            .partition(|t| t.sign == Sign::Plus);
        plus.extend(minus);
        Ok(SignedOperatorSum { dim, terms: plus })
    }

    pub fn from_parts(dim: usize, signs: &[Sign], ops: Vec<ComplexMatrix>) -> Result<Self> {
        if signs.len() != ops.len() {
            return Err(Error::dims(
                format!("{} signs", ops.len()),
                format!("{} signs", signs.len()),
            ));
        }
        let terms = signs
            .iter()
            .zip(ops)
            .map(|(&s, op)| SignedTerm::new(s, op))
            .collect();
        Self::new(dim, terms)
    }

    /// All-positive sum, i.e. an ordinary Kraus decomposition.
    pub fn kraus(dim: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        let signs = vec![Sign::Plus; ops.len()];
        Self::from_parts(dim, &signs, ops)
    }

    pub fn identity_map(dim: usize) -> Self {
        SignedOperatorSum {
            dim,
            terms: vec![SignedTerm::new(Sign::Plus, identity(dim))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[SignedTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn signature(&self) -> Signature {
        let p = self.terms.iter().filter(|t| t.sign == Sign::Plus).count();
        Signature::new(p, self.terms.len() - p)
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.terms.iter().map(|t| t.sign).collect()
    }

    pub fn operators(&self) -> Vec<ComplexMatrix> {
        self.terms.iter().map(|t| t.op.clone()).collect()
    }

    pub fn positive_terms(&self) -> impl Iterator<Item = &SignedTerm> {
        self.terms.iter().filter(|t| t.sign == Sign::Plus)
    }

    pub fn negative_terms(&self) -> impl Iterator<Item = &SignedTerm> {
        self.terms.iter().filter(|t| t.sign == Sign::Minus)
    }

    /// `Σ ηᵢ Eᵢ† Eᵢ`; the map is trace preserving iff this is the identity.
    pub fn effect(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for t in &self.terms {
            acc += t.op.adjoint() * &t.op * c64(t.sign.value(), 0.0);
        }
        acc
    }

    /// Sorts each sign block by descending Frobenius norm, breaking ties by
    /// lexicographic comparison of the entries. Norms and entries are compared
    /// after rounding to 1e-10 so that floating-point noise does not reorder
    /// terms that are equal up to rounding.
    pub fn canonicalized(mut self) -> Self {
        fn key(x: f64) -> i64 {
            (x * 1e10).round() as i64
        }
        let cmp = |a: &SignedTerm, b: &SignedTerm| -> Ordering {
            (a.sign == Sign::Minus)
                .cmp(&(b.sign == Sign::Minus))
                .then_with(|| key(frobenius(&b.op)).cmp(&key(frobenius(&a.op))))
                .then_with(|| {
                    // row-major entry order
                    let ea = a.op.transpose();
                    let eb = b.op.transpose();
                    for (x, y) in ea.iter().zip(eb.iter()) {
                        let o = key(x.re).cmp(&key(y.re)).then(key(x.im).cmp(&key(y.im)));
                        if o != Ordering::Equal {
                            return o;
                        }
                    }
                    Ordering::Equal
                })
        };
        self.terms.sort_by(cmp);
        self
    }
}

/// `d² × d²` matrix acting on row-major vectorized density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

/// Reshuffled A-matrix, `B[(r'd+r), (s'd+s)] = A[(r'd+s'), (rd+s)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

fn check_superop_shape(dim: usize, m: &ComplexMatrix) -> Result<()> {
    let n = dim * dim;
    if m.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n} superoperator matrix"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

/// The index permutation shared by both directions of the reshuffle.
fn reshuffle_matrix(dim: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let d = dim;
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (r1, r2) = (row / d, row % d);
        let (s1, s2) = (col / d, col % d);
        // (r1 r2, s1 s2) -> (r1 s1, r2 s2)
        m[(r1 * d + s1, r2 * d + s2)]
    })
}

impl AMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_superop_shape(dim, &matrix)?;
        Ok(AMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `A = Σ ηᵢ Eᵢ ⊗ conj(Eᵢ)` in row-major Kronecker order.
    pub fn from_operator_sum(ops: &SignedOperatorSum) -> Self {
        let n = ops.dim() * ops.dim();
        let mut a = ComplexMatrix::zeros(n, n);
        for t in ops.terms() {
            a += t.op.kronecker(&t.op.map(|z| z.conj())) * c64(t.sign.value(), 0.0);
        }
        AMatrix {
            dim: ops.dim(),
            matrix: a,
        }
    }

    /// Applies the map to a `d × d` matrix through its vectorization.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim),
                format!("{}x{}", rho.nrows(), rho.ncols()),
            ));
        }
        Ok(unvectorize(&(&self.matrix * vectorize(rho)), self.dim))
    }
}

impl BMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_superop_shape(dim, &matrix)?;
        Ok(BMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

pub fn reshuffle(a: &AMatrix) -> BMatrix {
    BMatrix {
        dim: a.dim,
        matrix: reshuffle_matrix(a.dim, &a.matrix),
    }
}

pub fn unreshuffle(b: &BMatrix) -> AMatrix {
    AMatrix {
        dim: b.dim,
        matrix: reshuffle_matrix(b.dim, &b.matrix),
    }
}

/// Checks `A[(s'd+r'), (sd+r)] = conj(A[(r'd+s'), (rd+s)])` entrywise.
pub fn check_hermiticity_preserving(a: &AMatrix, tol: f64) -> bool {
    let d = a.dim;
    let m = &a.matrix;
    for r1 in 0..d {
        for s1 in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let lhs = m[(s1 * d + r1, s * d + r)];
                    let rhs = m[(r1 * d + s1, r * d + s)].conj();
                    if (lhs - rhs).norm() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Representations whose trace preservation can be checked.
pub trait TracePreservation {
    fn trace_preservation_deviation(&self) -> f64;
}

impl TracePreservation for AMatrix {
    /// Largest deviation of `Σ_{r'} A[(r'd+r'), (rd+s)]` from `δ_{rs}`.
    fn trace_preservation_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for s in 0..d {
                let sum: Complex64 = (0..d).map(|k| self.matrix[(k * d + k, r * d + s)]).sum();
                let target = if r == s { 1.0 } else { 0.0 };
                worst = worst.max((sum - c64(target, 0.0)).norm());
            }
        }
        worst
    }
}

impl TracePreservation for SignedOperatorSum {
    /// `‖Σ ηᵢ Eᵢ† Eᵢ − I‖_max`.
    fn trace_preservation_deviation(&self) -> f64 {
        max_abs_diff(&self.effect(), &identity(self.dim))
    }
}

pub fn check_trace_preserving<T: TracePreservation + ?Sized>(map: &T, tol: f64) -> bool {
    map.trace_preservation_deviation() <= tol
}

/// `B = Σ ηᵢ vec(Eᵢ) vec(Eᵢ)†`.
pub fn b_from_operator_sum(ops: &SignedOperatorSum) -> BMatrix {
    let n = ops.dim() * ops.dim();
    let mut b = ComplexMatrix::zeros(n, n);
    for t in ops.terms() {
        let v = vectorize(&t.op);
        b += &v * v.adjoint() * c64(t.sign.value(), 0.0);
    }
    BMatrix {
        dim: ops.dim(),
        matrix: b,
    }
}

/// Signed operator sum from the eigendecomposition of a Hermitian B-matrix.
///
/// Each eigenvalue with `|λ| > tol · max|λ|` contributes the term
/// `(sign λ, √|λ| · unvec(v))`. Degenerate eigenspaces use the canonical
/// index-order basis, and the result is in canonical term order.
pub fn operator_sum_from_b(b: &BMatrix, tol: f64) -> Result<SignedOperatorSum> {
    let deviation = hermitian_deviation(&b.matrix);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = canonical_hermitian_eigen(&b.matrix);
    let largest = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = tol * largest;
    let terms = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(v, _)| v.abs() > cutoff)
        .map(|(&lambda, vec)| {
            let op = unvectorize(vec, b.dim) * c64(lambda.abs().sqrt(), 0.0);
            SignedTerm::new(Sign::from_f64(lambda), op)
        })
        .collect();
    Ok(SignedOperatorSum::new(b.dim, terms)?.canonicalized())
}

/// `Σ ηᵢ Eᵢ ρ Eᵢ†`. The output is not guaranteed to be positive.
pub fn apply_map(ops: &SignedOperatorSum, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = ops.dim();
    if rho.shape() != (d, d) {
        return Err(Error::dims(
            format!("{d}x{d}"),
            format!("{}x{}", rho.nrows(), rho.ncols()),
        ));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for t in ops.terms() {
        out += &t.op * rho * t.op.adjoint() * c64(t.sign.value(), 0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Completely positive.
    Cp,
    /// Hermiticity preserving but not completely positive.
    Ncp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub kind: MapKind,
    pub signature: Signature,
    /// Ascending eigenvalues of the B-matrix.
    pub eigenvalues: Vec<f64>,
}

/// CP iff every B-matrix eigenvalue is `≥ -tol`.
pub fn classify(b: &BMatrix, tol: f64) -> Result<Classification> {
    let deviation = hermitian_deviation(&b.matrix);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let eigenvalues = hermitian_eigenvalues(&b.matrix);
    let p = eigenvalues.iter().filter(|&&v| v > tol).count();
    let q = eigenvalues.iter().filter(|&&v| v < -tol).count();
    let kind = if q == 0 { MapKind::Cp } else { MapKind::Ncp };
    Ok(Classification {
        kind,
        signature: Signature::new(p, q),
        eigenvalues,
    })
}

/// Splits `ℰ = ℰ₁ − ℰ₂` into its positive and (sign-flipped) negative blocks.
pub fn split_cp_parts(ops: &SignedOperatorSum) -> (SignedOperatorSum, SignedOperatorSum) {
    let positive = ops.positive_terms().cloned().collect();
    let negative = ops
        .negative_terms()
        .map(|t| SignedTerm::new(Sign::Plus, t.op.clone()))
        .collect();
    (
        SignedOperatorSum {
            dim: ops.dim,
            terms: positive,
        },
        SignedOperatorSum {
            dim: ops.dim,
            terms: negative,
        },
    )
}

/// `Fⱼ = Σₖ Eₖ u[k][j]` for a pseudounitary `u` over the sum's own metric.
/// The sign pattern is kept, so the resulting map equals the input map.
pub fn transform_by_pseudounitary(
    ops: &SignedOperatorSum,
    u: &ComplexMatrix,
    tol: f64,
) -> Result<SignedOperatorSum> {
    let n = ops.len();
    if u.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n} coefficient matrix"),
            format!("{}x{}", u.nrows(), u.ncols()),
        ));
    }
    let eta = eta_metric(ops.signature());
    let deviation = pseudounitary_deviation(u, &eta);
    if deviation > tol {
        return Err(Error::NotPseudoUnitary { deviation });
    }
    SignedOperatorSum::new(ops.dim(), mix_terms(ops, u))
}

/// `Fⱼ = Σₖ Eₖ u[k][j]` keeping the sign of term `j`, without any checks and
/// without dropping zero operators.
pub(crate) fn mix_terms(ops: &SignedOperatorSum, u: &ComplexMatrix) -> Vec<SignedTerm> {
    let d = ops.dim();
    (0..ops.len())
        .map(|j| {
            let mut f = ComplexMatrix::zeros(d, d);
            for (k, t) in ops.terms().iter().enumerate() {
                f += &t.op * u[(k, j)];
            }
            SignedTerm::new(ops.terms[j].sign, f)
        })
        .collect()
}

/// Trace-one Hermitian matrix; positivity is checked on demand, not assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        ensure_square(&matrix)?;
        let deviation = hermitian_deviation(&matrix);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = trace(&matrix);
        if (tr - c64(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidInput(format!("density matrix has trace {tr}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}
