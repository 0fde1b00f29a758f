//! Qubit operators, states and the bit-flip example used throughout the tests
//! and the reproduction command.
//!
//! Multi-qubit kets are written `|q₁ q₂ … qₙ⟩` with `q₁` the most significant
//! bit, so qubit 0 is the leftmost tensor factor.

use crate::error::Result;
use crate::linalg::{basis_vector, c64, identity, ComplexMatrix, ComplexVector};
use crate::qec::CodeSpace;
use crate::superop::{Sign, SignedOperatorSum, SignedTerm};

fn real2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(a, 0.0), c64(b, 0.0), c64(c, 0.0), c64(d, 0.0)])
}

pub fn pauli_x() -> ComplexMatrix {
    real2(0.0, 1.0, 1.0, 0.0)
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    real2(1.0, 0.0, 0.0, -1.0)
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `qubit` (0 = leftmost).
pub fn pauli_on(n_qubits: usize, qubit: usize, op: &ComplexMatrix) -> ComplexMatrix {
    assert!(qubit < n_qubits, "qubit index {qubit} out of range for {n_qubits} qubits");
    let mut out = identity(1);
    for k in 0..n_qubits {
        let factor = if k == qubit { op.clone() } else { identity(2) };
        out = out.kronecker(&factor);
    }
    out
}

/// Computational basis ket `|index⟩` on `n_qubits` qubits.
pub fn basis_state(n_qubits: usize, index: usize) -> ComplexVector {
    basis_vector(1 << n_qubits, index)
}

pub fn three_qubit_basis_state(index: usize) -> ComplexVector {
    basis_state(3, index)
}

/// `ℰ(ρ) = c₀ ρ + c₁ Σₙ Xₙ ρ Xₙ` on three qubits, written as a signed operator
/// sum with terms `(sign c₀, √|c₀| I)` and `(sign c₁, √|c₁| Xₙ)`. Trace
/// preserving when `c₀ + 3c₁ = 1`.
pub fn bit_flip_map(c0: f64, c1: f64) -> SignedOperatorSum {
    let mut terms = vec![SignedTerm::new(Sign::from_f64(c0), identity(8) * c64(c0.abs().sqrt(), 0.0))];
    for q in 0..3 {
        terms.push(SignedTerm::new(
            Sign::from_f64(c1),
            pauli_on(3, q, &pauli_x()) * c64(c1.abs().sqrt(), 0.0),
        ));
    }
    SignedOperatorSum::new(8, terms).expect("all operators are 8x8")
}

/// Three-qubit repetition code `span{|000⟩, |111⟩}`.
pub fn repetition_code() -> CodeSpace {
    CodeSpace::projector_from_basis(&[basis_state(3, 0b000), basis_state(3, 0b111)], 1e-12)
        .expect("the repetition code basis is orthonormal")
}

/// Code space spanned by computational basis states.
pub fn computational_code(n_qubits: usize, indices: &[usize]) -> Result<CodeSpace> {
    let basis: Vec<ComplexVector> = indices.iter().map(|&i| basis_state(n_qubits, i)).collect();
    CodeSpace::projector_from_basis(&basis, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn leftmost_qubit_is_most_significant() {
        let x1 = pauli_on(3, 0, &pauli_x());
        let flipped = &x1 * basis_state(3, 0b000);
        assert_eq!(flipped, basis_state(3, 0b100));
        let x3 = pauli_on(3, 2, &pauli_x());
        assert_eq!(&x3 * basis_state(3, 0b000), basis_state(3, 0b001));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        assert!(max_abs_diff(&(&x * &y), &(z.clone() * c64(0.0, 1.0))) < 1e-15);
        assert!(max_abs_diff(&(&x * &x), &identity(2)) < 1e-15);
    }

    #[test]
    fn bit_flip_map_is_ordered_and_trace_preserving() {
        let ops = bit_flip_map(-0.2, 0.4);
        assert_eq!(ops.signs(), vec![Sign::Plus, Sign::Plus, Sign::Plus, Sign::Minus]);
        assert!(max_abs_diff(&ops.effect(), &identity(8)) < 1e-12);
    }
}
