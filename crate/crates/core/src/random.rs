//! Random matrices, states and maps for sampling-based checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::pseudolinalg::{eta_metric, Signature};
use crate::qec::CodeSpace;
use crate::superop::{Sign, SignedOperatorSum, SignedTerm};

/// Deterministic generator used wherever the library samples internally.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent standard normal real and imaginary parts.
pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, n, n);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = random_complex_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Orthogonal projector onto a random subspace of the given rank.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let cols = u.columns(0, rank);
    cols * cols.adjoint()
}

/// `exp(-i K t)` for a random generator `K = η M` with `M` Hermitian.
pub fn random_pseudounitary<R: Rng + ?Sized>(rng: &mut R, sig: Signature, t: f64) -> ComplexMatrix {
    let eta = eta_metric(sig);
    let generator = &eta * random_hermitian(rng, sig.dim());
    (generator * c64(0.0, -t)).exp()
}

/// Random operators with the given sign pattern.
pub fn random_signed_ops<R: Rng + ?Sized>(rng: &mut R, dim: usize, sig: Signature) -> SignedOperatorSum {
    let terms = sig
        .signs()
        .into_iter()
        .map(|s| SignedTerm::new(Sign::from_f64(s), random_complex_matrix(rng, dim, dim)))
        .collect();
    SignedOperatorSum::new(dim, terms).expect("random operators have consistent shapes")
}

/// Random density matrix (Ginibre ensemble).
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, n, n);
    let rho = &g * g.adjoint();
    let tr = crate::linalg::trace(&rho);
    rho / tr
}

/// Haar-random pure state supported on the code space, as a density matrix.
pub fn random_code_state<R: Rng + ?Sized>(rng: &mut R, code: &CodeSpace) -> ComplexMatrix {
    let k = code.logical_basis().len();
    let coeffs = random_complex_vector(rng, k);
    let mut psi = ComplexVector::zeros(code.dim());
    for (c, b) in coeffs.iter().zip(code.logical_basis()) {
        psi += b * *c;
    }
    let psi = &psi / c64(psi.norm(), 0.0);
    &psi * psi.adjoint()
}

/// Random mixed state supported on the code space.
pub fn random_mixed_code_state<R: Rng + ?Sized>(rng: &mut R, code: &CodeSpace) -> ComplexMatrix {
    let basis = code.basis_matrix();
    let inner = random_density_matrix(rng, basis.ncols());
    &basis * inner * basis.adjoint()
}
