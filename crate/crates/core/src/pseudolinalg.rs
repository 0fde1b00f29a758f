//! Linear algebra over the indefinite inner product `<u, v>_η = u† η v` with a
//! diagonal ±1 metric η.
//!
//! A matrix `H` is pseudohermitian (PH) when `H† = η H η⁻¹` and a matrix `U`
//! is pseudounitary (PU) when `U η U† = η`. The group of PU matrices for a
//! metric with `p` positive and `q` negative entries is `U(p, q)`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, eigenvalues, ensure_square, identity, kernel_basis, max_abs,
    max_abs_diff, orthonormal_complement, svd, ComplexMatrix, ComplexVector,
};

/// Counts of `+1` and `-1` entries of a diagonal metric, positives first.
///
/// `(0, 0)` is permitted and describes the empty operator sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        Signature { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal of the metric: `p` ones followed by `q` minus ones.
    pub fn signs(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.p];
        s.resize(self.p + self.q, -1.0);
        s
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// `diag(1, …, 1, -1, …, -1)` with `sig.p` ones and `sig.q` minus ones.
pub fn eta_metric(sig: Signature) -> ComplexMatrix {
    metric_from_signs(&sig.signs())
}

pub fn metric_from_signs(signs: &[f64]) -> ComplexMatrix {
    let n = signs.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c64(signs[i], 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Reads the diagonal of a metric, rejecting anything that is not a diagonal
/// matrix with entries exactly ±1.
pub fn metric_signs(eta: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = ensure_square(eta)?;
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            let z = eta[(i, j)];
            if i == j {
                if z.im != 0.0 || z.re.abs() != 1.0 {
                    return Err(Error::InvalidMetric(format!(
                        "diagonal entry {i} is {z}, expected ±1"
                    )));
                }
            } else if z != c64(0.0, 0.0) {
                return Err(Error::InvalidMetric(format!(
                    "off-diagonal entry ({i}, {j}) is nonzero"
                )));
            }
        }
        signs.push(eta[(i, i)].re);
    }
    Ok(signs)
}

/// Signature of a metric, counting signs regardless of their order.
pub fn signature_of(eta: &ComplexMatrix) -> Result<Signature> {
    let signs = metric_signs(eta)?;
    let p = signs.iter().filter(|&&s| s > 0.0).count();
    Ok(Signature::new(p, signs.len() - p))
}

fn eta_dot(signs: &[f64], u: &ComplexVector, v: &ComplexVector) -> Complex64 {
    u.iter()
        .zip(v.iter())
        .zip(signs)
        .map(|((a, b), s)| a.conj() * b * *s)
        .sum()
}

/// `u† η v`.
pub fn pseudo_inner(u: &ComplexVector, v: &ComplexVector, eta: &ComplexMatrix) -> Result<Complex64> {
    if u.len() != v.len() || eta.nrows() != u.len() || eta.ncols() != u.len() {
        return Err(Error::dims(
            format!("vectors and metric of size {}", eta.nrows()),
            format!("vectors of length {} and {}", u.len(), v.len()),
        ));
    }
    Ok((u.adjoint() * eta * v)[(0, 0)])
}

fn check_same_size(m: &ComplexMatrix, eta: &ComplexMatrix) -> Result<usize> {
    let n = ensure_square(m)?;
    if eta.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n} metric"),
            format!("{}x{}", eta.nrows(), eta.ncols()),
        ));
    }
    Ok(n)
}

fn pseudohermitian_deviation(h: &ComplexMatrix, eta: &ComplexMatrix) -> f64 {
    // η⁻¹ = η for a ±1 diagonal metric
    max_abs_diff(&h.adjoint(), &(eta * h * eta))
}

pub fn is_pseudohermitian(h: &ComplexMatrix, eta: &ComplexMatrix, tol: f64) -> Result<bool> {
    check_same_size(h, eta)?;
    metric_signs(eta)?;
    Ok(pseudohermitian_deviation(h, eta) <= tol)
}

/// Max-entry deviation `‖U η U† − η‖`.
pub fn pseudounitary_deviation(u: &ComplexMatrix, eta: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u * eta * u.adjoint()), eta)
}

pub fn is_pseudounitary(u: &ComplexMatrix, eta: &ComplexMatrix, tol: f64) -> Result<bool> {
    check_same_size(u, eta)?;
    metric_signs(eta)?;
    Ok(pseudounitary_deviation(u, eta) <= tol)
}

/// Gram-Schmidt under the η inner product. Output vectors are normalized to
/// `<v, v>_η = ±1`.
pub fn pseudo_gram_schmidt(
    vectors: &[ComplexVector],
    eta: &ComplexMatrix,
    tol: f64,
) -> Result<Vec<ComplexVector>> {
    let signs = metric_signs(eta)?;
    let n = signs.len();
    let mut out: Vec<(ComplexVector, f64)> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::dims(format!("vector of length {n}"), v.len()));
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for (u, s) in &out {
                let overlap = eta_dot(&signs, u, &w) * *s;
                w -= u * overlap;
            }
        }
        let len = w.norm();
        if len <= tol * v.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::LinearDependence { index });
        }
        let norm = eta_dot(&signs, &w, &w).re;
        if norm.abs() <= tol * len * len {
            return Err(Error::NullNormEncountered { index, norm });
        }
        let sign = norm.signum();
        out.push((w / c64(norm.abs().sqrt(), 0.0), sign));
    }
    Ok(out.into_iter().map(|(v, _)| v).collect())
}

/// Result of [`pseudo_diagonalize`]: `S⁻¹ H S = diag(eigenvalues)` with
/// `S† η S = metric`.
#[derive(Debug, Clone)]
pub struct PseudoDiagonalization {
    /// Eigenvector columns expressed in the original basis.
    pub transform: ComplexMatrix,
    /// Real eigenvalues in column order.
    pub eigenvalues: Vec<f64>,
    /// Signs of `S† η S` in column order. Columns are arranged so that this
    /// matches the diagonal of the input metric.
    pub metric: Vec<f64>,
    /// `deflation_order[c]` is the deflation step that produced column `c`.
    pub deflation_order: Vec<usize>,
}

impl PseudoDiagonalization {
    pub fn diagonal(&self) -> ComplexMatrix {
        metric_from_signs(&self.eigenvalues)
    }

    pub fn metric_matrix(&self) -> ComplexMatrix {
        metric_from_signs(&self.metric)
    }

    /// `S⁻¹ = η' S† η`, exact for a pseudounitary `S`.
    pub fn inverse(&self, eta: &ComplexMatrix) -> ComplexMatrix {
        self.metric_matrix() * self.transform.adjoint() * eta
    }
}

/// Diagonalizes a pseudohermitian matrix with a pseudounitary similarity.
///
/// Eigenvectors are peeled off one at a time, largest-magnitude eigenvalue
/// first. Each new vector is taken from the η-orthogonal complement of the
/// vectors already found, which is invariant under `H`, so every step acts on
/// the deflated PH matrix. Inside a degenerate eigenspace candidates are the
/// projections of the standard basis vectors, scanned in index order.
///
/// Fails when the spectrum is not real or when an eigenspace only offers
/// unit vectors with `|<v, v>_η| ≤ √tol`.
pub fn pseudo_diagonalize(
    h: &ComplexMatrix,
    eta: &ComplexMatrix,
    tol: f64,
) -> Result<PseudoDiagonalization> {
    let n = check_same_size(h, eta)?;
    let signs = metric_signs(eta)?;
    let deviation = pseudohermitian_deviation(h, eta);
    if deviation > tol {
        return Err(Error::NotPseudoHermitian { deviation });
    }
    if n == 0 {
        return Ok(PseudoDiagonalization {
            transform: ComplexMatrix::zeros(0, 0),
            eigenvalues: Vec::new(),
            metric: Vec::new(),
            deflation_order: Vec::new(),
        });
    }

    let scale = max_abs(h).max(1.0);
    let real_tol = tol.sqrt() * scale;
    let mut spectrum = Vec::with_capacity(n);
    for z in eigenvalues(h) {
        if z.im.abs() > real_tol {
            return Err(Error::PseudoDiagonalizationFailure(format!(
                "complex eigenvalue {:.6}{:+.6}i",
                z.re, z.im
            )));
        }
        spectrum.push(z.re);
    }

    // Group numerically equal eigenvalues, then visit groups by descending
    // magnitude (positive first on ties).
    spectrum.sort_by(f64::total_cmp);
    let cluster_tol = 1e-8 * scale;
    // A defective eigenvalue splits by about √ε under rounding, so its
    // computed eigenvectors have η-norm of that order rather than zero.
    let null_tol = tol.sqrt();
    let mut groups: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && spectrum[end] - spectrum[end - 1] <= cluster_tol {
            end += 1;
        }
        let mean = spectrum[start..end].iter().sum::<f64>() / (end - start) as f64;
        groups.push((mean, end - start));
        start = end;
    }
    groups.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(b.0.total_cmp(&a.0)));

    // (vector with <v,v>_η = ±1, sign, eigenvalue)
    let mut found: Vec<(ComplexVector, f64, f64)> = Vec::with_capacity(n);
    for (lambda, multiplicity) in groups {
        let shifted = h - identity(n) * c64(lambda, 0.0);
        let kernel = kernel_basis(&shifted, multiplicity);
        if let Some(worst) = kernel
            .iter()
            .map(|b| (&shifted * b).norm())
            .find(|&r| r > real_tol)
        {
            return Err(Error::PseudoDiagonalizationFailure(format!(
                "eigenvalue {lambda:.6} is defective (eigenvector residual {worst:.3e})"
            )));
        }
        let candidates: Vec<ComplexVector> = (0..n)
            .map(|k| {
                let mut proj = ComplexVector::zeros(n);
                for b in &kernel {
                    proj += b * b[k].conj();
                }
                proj
            })
            .collect();
        let mut used = vec![false; n];
        for _ in 0..multiplicity {
            let residuals: Vec<Option<ComplexVector>> = candidates
                .iter()
                .zip(&used)
                .map(|(c, &taken)| {
                    if taken {
                        return None;
                    }
                    let mut w = c.clone();
                    for _ in 0..2 {
                        for (u, s, _) in &found {
                            let overlap = eta_dot(&signs, u, &w) * *s;
                            w -= u * overlap;
                        }
                    }
                    Some(w)
                })
                .collect();
            let best = residuals
                .iter()
                .flatten()
                .map(|w| w.norm())
                .fold(0.0, f64::max);
            if best <= 1e-12 {
                return Err(Error::PseudoDiagonalizationFailure(format!(
                    "eigenspace of {lambda:.6} has fewer independent vectors than its multiplicity"
                )));
            }
            let pick = residuals.iter().enumerate().find_map(|(k, w)| {
                let w = w.as_ref()?;
                let len = w.norm();
                if len < 0.1 * best {
                    return None;
                }
                let unit = w / c64(len, 0.0);
                let norm = eta_dot(&signs, &unit, &unit).re;
                (norm.abs() > null_tol).then_some((k, unit, norm))
            });
            let Some((k, unit, norm)) = pick else {
                return Err(Error::PseudoDiagonalizationFailure(format!(
                    "eigenvalue {lambda:.6} only has eigenvectors with null η-norm"
                )));
            };
            used[k] = true;
            let sign = norm.signum();
            let v = unit / c64(norm.abs().sqrt(), 0.0);
            let hv = h * &v;
            let value = (eta_dot(&signs, &v, &hv) * sign).re;
            found.push((v, sign, value));
        }
    }

    // Place positive-norm columns where the metric is +1 and negative-norm
    // columns where it is -1, keeping deflation order within each sign.
    let mut positive = found.iter().enumerate().filter(|(_, f)| f.1 > 0.0);
    let mut negative = found.iter().enumerate().filter(|(_, f)| f.1 < 0.0);
    let mut transform = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut order = Vec::with_capacity(n);
    for (col, &s) in signs.iter().enumerate() {
        let next = if s > 0.0 { positive.next() } else { negative.next() };
        let Some((step, (v, _, value))) = next else {
            return Err(Error::PseudoDiagonalizationFailure(
                "eigenvector norms do not match the metric inertia".into(),
            ));
        };
        transform.set_column(col, v);
        values.push(*value);
        order.push(step);
    }
    Ok(PseudoDiagonalization {
        transform,
        eigenvalues: values,
        metric: signs,
        deflation_order: order,
    })
}

/// Polar factors of `M P`: `M P = unitary_part · positive_part`.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub unitary_part: ComplexMatrix,
    pub positive_part: ComplexMatrix,
}

/// Max-entry deviation of `P` from an orthogonal projector.
pub fn projector_deviation(p: &ComplexMatrix) -> f64 {
    max_abs_diff(&(p * p), p).max(max_abs_diff(p, &p.adjoint()))
}

/// Polar decomposition of `M P` for an orthogonal projector `P`.
///
/// `positive_part = √(P M† M P)`. The unitary part agrees with the polar
/// isometry on the support of the positive part and is completed to a full
/// unitary by pairing the orthonormal complements of the support and of the
/// image, each built from standard basis vectors in index order.
pub fn polar_on_code(m: &ComplexMatrix, p: &ComplexMatrix, tol: f64) -> Result<PolarFactors> {
    let n = ensure_square(p)?;
    if m.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let deviation = projector_deviation(p);
    if deviation > tol {
        return Err(Error::NotAProjector { deviation });
    }
    let mp = m * p;
    let svd = svd(&mp);
    let (u, v_t) = (&svd.u, &svd.v_t);

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| svd.singular_values[j] > tol)
        .collect();

    let image: Vec<ComplexVector> = kept.iter().map(|&j| u.column(j).into_owned()).collect();
    let support: Vec<ComplexVector> = kept.iter().map(|&j| v_t.row(j).adjoint()).collect();

    let mut positive_part = ComplexMatrix::zeros(n, n);
    let mut unitary_part = ComplexMatrix::zeros(n, n);
    for ((&j, w), v) in kept.iter().zip(&image).zip(&support) {
        positive_part += v * v.adjoint() * c64(svd.singular_values[j], 0.0);
        unitary_part += w * v.adjoint();
    }
    let image_complement = orthonormal_complement(&image, n);
    let support_complement = orthonormal_complement(&support, n);
    for (w, v) in image_complement.iter().zip(&support_complement) {
        unitary_part += w * v.adjoint();
    }
    Ok(PolarFactors {
        unitary_part,
        positive_part,
    })
}
