//! Pseudounitary freedom of signed decompositions.
//!
//! Two signed operator sets generate the same map iff they are related by an
//! element of `U(p, q)`. The connecting matrix is found by expanding both sets
//! in the canonical eigenbasis `|k⟩ = √|λₖ| |k'⟩` of the shared B-matrix (or
//! of the shared Hermitian operator for vector ensembles): with
//! `|i⟩ = Σₖ wᵢₖ |k⟩` and `|j⟩ = Σₖ vⱼₖ |k⟩`, the rows are related by
//! `v w⁻¹`.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, canonical_hermitian_eigen, max_abs_diff, singular_value_range, vectorize,
    ComplexMatrix, ComplexVector,
};
use crate::pseudolinalg::Signature;
use crate::superop::{
    b_from_operator_sum, mix_terms, operator_sum_from_b, Sign, SignedOperatorSum,
    ZERO_OPERATOR_THRESHOLD,
};

/// Signed decomposition `τ = Σ ηᵢ |vᵢ⟩⟨vᵢ|`, `+1` terms first.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEnsemble {
    dim: usize,
    terms: Vec<(Sign, ComplexVector)>,
}

impl SignedEnsemble {
    /// Stable partition into the `+1` block followed by the `-1` block; zero
    /// vectors are dropped.
    pub fn new(dim: usize, terms: Vec<(Sign, ComplexVector)>) -> Result<Self> {
        for (i, (_, v)) in terms.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::dims(
                    format!("vector of length {dim}"),
                    format!("vector {i} of length {}", v.len()),
                ));
            }
        }
        let (mut plus, minus): (Vec<_>, Vec<_>) = terms
            .into_iter()
            .filter(|(_, v)| v.iter().any(|z| z.norm() > ZERO_OPERATOR_THRESHOLD))
            .partition(|(s, _)| *s == Sign::Plus);
        plus.extend(minus);
        Ok(SignedEnsemble { dim, terms: plus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Sign, ComplexVector)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn signature(&self) -> Signature {
        let p = self.terms.iter().filter(|(s, _)| *s == Sign::Plus).count();
        Signature::new(p, self.terms.len() - p)
    }

    /// `Σ ηᵢ |vᵢ⟩⟨vᵢ|`.
    pub fn operator(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for (s, v) in &self.terms {
            acc += v * v.adjoint() * c64(s.value(), 0.0);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionResult {
    /// Pseudounitary over `eta_metric(signature)`. For maps this is the
    /// matrix accepted by `transform_by_pseudounitary`; for ensembles it
    /// satisfies `aᵢ = Σⱼ uᵢⱼ bⱼ`.
    pub u: ComplexMatrix,
    pub signature: Signature,
    /// Zero terms appended to the first and second list.
    pub padding_added: (usize, usize),
    /// Largest entry of the difference between the transformed first list
    /// and the second list.
    pub residual: f64,
}

/// True iff the B-matrices agree entrywise within `tol`.
pub fn maps_equal(a: &SignedOperatorSum, b: &SignedOperatorSum, tol: f64) -> bool {
    map_deviation(a, b).is_some_and(|d| d <= tol)
}

/// `‖B(a) − B(b)‖_max`, or `None` when the dimensions differ.
pub fn map_deviation(a: &SignedOperatorSum, b: &SignedOperatorSum) -> Option<f64> {
    if a.dim() != b.dim() {
        return None;
    }
    Some(max_abs_diff(
        b_from_operator_sum(a).matrix(),
        b_from_operator_sum(b).matrix(),
    ))
}

/// Canonical representative with one term per nonzero B-matrix eigenvalue.
pub fn to_base_map(ops: &SignedOperatorSum, tol: f64) -> Result<SignedOperatorSum> {
    operator_sum_from_b(&b_from_operator_sum(ops), tol)
}

/// Pads a signed list with zero vectors so that it has `target` signature,
/// keeping the `+1` block first.
fn pad(list: &[(Sign, ComplexVector)], n: usize, target: Signature) -> Vec<ComplexVector> {
    let zero = ComplexVector::zeros(n);
    let plus: Vec<ComplexVector> = list
        .iter()
        .filter(|(s, _)| *s == Sign::Plus)
        .map(|(_, v)| v.clone())
        .collect();
    let minus: Vec<ComplexVector> = list
        .iter()
        .filter(|(s, _)| *s == Sign::Minus)
        .map(|(_, v)| v.clone())
        .collect();
    let mut out = plus;
    out.resize(target.p, zero.clone());
    out.extend(minus);
    out.resize(target.p + target.q, zero);
    out
}

fn signature_of(list: &[(Sign, ComplexVector)]) -> Signature {
    let p = list.iter().filter(|(s, _)| *s == Sign::Plus).count();
    Signature::new(p, list.len() - p)
}

/// Expansion coefficients `wᵢₖ = ⟨k|xᵢ⟩ / ⟨k|k⟩`; zero pivots give zero columns.
fn coefficients(list: &[ComplexVector], pivots: &[ComplexVector]) -> ComplexMatrix {
    ComplexMatrix::from_fn(list.len(), pivots.len(), |i, k| {
        let norm = pivots[k].norm_squared();
        if norm == 0.0 {
            c64(0.0, 0.0)
        } else {
            pivots[k].dotc(&list[i]) / norm
        }
    })
}

fn check_invertible(w: &ComplexMatrix, tol: f64) -> Result<()> {
    if w.is_empty() {
        return Ok(());
    }
    let (lo, hi) = singular_value_range(w);
    if hi == 0.0 || lo <= tol * hi {
        return Err(Error::SingularCoefficientMatrix { smallest: lo });
    }
    Ok(())
}

struct RowConnection {
    u: ComplexMatrix,
    signature: Signature,
    padding: (usize, usize),
}

/// Finds `u` with `yᵢ = Σⱼ uᵢⱼ xⱼ` for two signed lists decomposing the
/// operator whose signed pivot basis is `pivots` (`+1` block first).
fn connect_rows(
    x: &[(Sign, ComplexVector)],
    y: &[(Sign, ComplexVector)],
    pivots: &[(Sign, ComplexVector)],
    n: usize,
    tol: f64,
) -> Result<RowConnection> {
    let (sx, sy, sk) = (signature_of(x), signature_of(y), signature_of(pivots));
    let target = Signature::new(sx.p.max(sy.p).max(sk.p), sx.q.max(sy.q).max(sk.q));
    let xs = pad(x, n, target);
    let ys = pad(y, n, target);
    let ks = pad(pivots, n, target);
    let wx = coefficients(&xs, &ks);
    let wy = coefficients(&ys, &ks);
    check_invertible(&wx, tol)?;
    check_invertible(&wy, tol)?;
    let inverse = wx
        .clone()
        .try_inverse()
        .ok_or(Error::SingularCoefficientMatrix { smallest: 0.0 })?;
    Ok(RowConnection {
        u: wy * inverse,
        signature: target,
        padding: (target.dim() - x.len(), target.dim() - y.len()),
    })
}

/// Signed pivots `|k⟩ = √|λₖ| |k'⟩` of a Hermitian matrix, dropping
/// eigenvalues with `|λ| ≤ tol · max|λ|`.
fn signed_pivots(h: &ComplexMatrix, tol: f64) -> Vec<(Sign, ComplexVector)> {
    let eig = canonical_hermitian_eigen(h);
    let largest = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    eig.values
        .iter()
        .zip(eig.vectors)
        .filter(|(v, _)| v.abs() > tol * largest)
        .map(|(&lambda, v)| (Sign::from_f64(lambda), v * c64(lambda.abs().sqrt(), 0.0)))
        .collect()
}

fn vectorized(ops: &SignedOperatorSum) -> Vec<(Sign, ComplexVector)> {
    ops.terms()
        .iter()
        .map(|t| (t.sign, vectorize(&t.op)))
        .collect()
}

/// Pseudounitary `U` with `transform_by_pseudounitary(a, U)` generating the
/// same operators as `b`.
///
/// Both sets must be base maps: a trivially extended set (for example one
/// containing a cancelling pair `+A, −A`) has a singular coefficient matrix
/// and is reported as such.
pub fn connecting_pseudounitary(
    a: &SignedOperatorSum,
    b: &SignedOperatorSum,
    tol: f64,
) -> Result<ConnectionResult> {
    if a.dim() != b.dim() {
        return Err(Error::dims(format!("dimension {}", a.dim()), format!("dimension {}", b.dim())));
    }
    let deviation = map_deviation(a, b).unwrap_or(f64::INFINITY);
    if deviation > tol {
        return Err(Error::MapsNotEqual { deviation });
    }
    let pivots = vectorized(&to_base_map(a, tol)?);
    let n = a.dim() * a.dim();
    let rows = connect_rows(&vectorized(a), &vectorized(b), &pivots, n, tol)?;
    let u = rows.u.transpose();
    let transformed = SignedOperatorSum::new(a.dim(), mix_terms(a, &u))?;
    let residual = if transformed.len() == b.len() {
        transformed
            .terms()
            .iter()
            .zip(b.terms())
            .map(|(f, g)| max_abs_diff(&f.op, &g.op))
            .fold(0.0, f64::max)
    } else {
        max_abs_diff(
            b_from_operator_sum(&transformed).matrix(),
            b_from_operator_sum(b).matrix(),
        )
    };
    Ok(ConnectionResult {
        u,
        signature: rows.signature,
        padding_added: rows.padding,
        residual,
    })
}

/// Pseudounitary `u` with `aᵢ = Σⱼ uᵢⱼ bⱼ` for two decompositions of the same
/// Hermitian operator.
pub fn ensemble_connection(
    a: &SignedEnsemble,
    b: &SignedEnsemble,
    tol: f64,
) -> Result<ConnectionResult> {
    if a.dim() != b.dim() {
        return Err(Error::dims(format!("dimension {}", a.dim()), format!("dimension {}", b.dim())));
    }
    let tau = a.operator();
    let deviation = max_abs_diff(&tau, &b.operator());
    if deviation > tol {
        return Err(Error::OperatorsNotEqual { deviation });
    }
    let pivots = signed_pivots(&tau, tol);
    let rows = connect_rows(b.terms(), a.terms(), &pivots, a.dim(), tol)?;
    let mut residual: f64 = 0.0;
    for (i, (_, ai)) in a.terms().iter().enumerate() {
        let mut acc = ComplexVector::zeros(a.dim());
        for (j, (_, bj)) in b.terms().iter().enumerate() {
            acc += bj * rows.u[(i, j)];
        }
        residual = (acc - ai).iter().map(|z| z.norm()).fold(residual, f64::max);
    }
    Ok(ConnectionResult {
        u: rows.u,
        signature: rows.signature,
        padding_added: (rows.padding.1, rows.padding.0),
        residual,
    })
}
