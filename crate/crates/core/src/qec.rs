//! Error-correction analysis for signed operator sums.
//!
//! The pipeline is: condition matrix `cᵢⱼ` from `ηᵢ P Eᵢ† Eⱼ P = cᵢⱼ P`,
//! pseudounitary diagonalization of `C` to operators `F` with
//! `P Fᵢ† Fⱼ P = dᵢ δᵢⱼ P`, syndrome subspaces from the polar decomposition of
//! each `F_k P`, and then either a recovery map or a code state whose
//! syndrome measurement has negative probability.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, frobenius, identity, max_abs, max_abs_diff, trace, ComplexMatrix, ComplexVector,
};
use crate::pseudolinalg::{eta_metric, polar_on_code, pseudo_diagonalize, Signature};
use crate::random::{random_complex_vector, seeded};
use crate::superop::{
    apply_map, mix_terms, Sign, SignedOperatorSum, SignedTerm, ZERO_OPERATOR_THRESHOLD,
};

/// Seed for the random code states tried by the witness search.
const WITNESS_SEED: u64 = 0x5EED_0001;
/// Seed for the Haar-random states used by [`verify_recovery`].
const VERIFY_SEED: u64 = 0x5EED_0002;
const WITNESS_RANDOM_STATES: usize = 64;

/// A code subspace with an orthonormal logical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpace {
    dim: usize,
    logical_basis: Vec<ComplexVector>,
    projector: ComplexMatrix,
}

impl CodeSpace {
    /// Orthonormalizes `basis` (ordinary Gram-Schmidt) and builds the projector.
    pub fn projector_from_basis(basis: &[ComplexVector], tol: f64) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(Error::InvalidInput("code basis is empty".into()));
        };
        let dim = first.len();
        let mut ortho: Vec<ComplexVector> = Vec::with_capacity(basis.len());
        for (index, v) in basis.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::dims(format!("vector of length {dim}"), v.len()));
            }
            let original = v.norm();
            if original == 0.0 || !original.is_finite() {
                return Err(Error::LinearDependence { index });
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for u in &ortho {
                    let overlap = u.dotc(&w);
                    w -= u * overlap;
                }
            }
            let len = w.norm();
            if len <= tol * original {
                return Err(Error::LinearDependence { index });
            }
            ortho.push(w / c64(len, 0.0));
        }
        let mut projector = ComplexMatrix::zeros(dim, dim);
        for u in &ortho {
            projector += u * u.adjoint();
        }
        Ok(CodeSpace {
            dim,
            logical_basis: ortho,
            projector,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.logical_basis.len()
    }

    pub fn logical_basis(&self) -> &[ComplexVector] {
        &self.logical_basis
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    /// `d × k` matrix whose columns are the logical basis vectors.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.logical_basis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionForm {
    Hermitian,
    Pseudohermitian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionMatrix {
    pub entries: ComplexMatrix,
    /// `maxᵢⱼ ‖ηᵢ P Eᵢ† Eⱼ P − cᵢⱼ P‖_max`.
    pub residual: f64,
    pub form: ConditionForm,
}

impl ConditionMatrix {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

fn check_code_dim(dim: usize, code: &CodeSpace) -> Result<()> {
    if dim != code.dim() {
        return Err(Error::dims(
            format!("operators acting on dimension {}", code.dim()),
            format!("dimension {dim}"),
        ));
    }
    Ok(())
}

fn condition_matrix(
    ops: &[ComplexMatrix],
    signs: &[f64],
    code: &CodeSpace,
    form: ConditionForm,
) -> ConditionMatrix {
    let p = code.projector();
    let rank = code.rank() as f64;
    let n = ops.len();
    let projected: Vec<ComplexMatrix> = ops.iter().map(|e| e * p).collect();
    let mut entries = ComplexMatrix::zeros(n, n);
    let mut residual: f64 = 0.0;
    for i in 0..n {
        let left = projected[i].adjoint();
        for j in 0..n {
            let m = (&left * &projected[j]) * c64(signs[i], 0.0);
            let c = trace(&m) / rank;
            residual = residual.max(max_abs_diff(&m, &(p * c)));
            entries[(i, j)] = c;
        }
    }
    ConditionMatrix {
        entries,
        residual,
        form,
    }
}

/// `cᵢⱼ = tr(P Eᵢ† Eⱼ P) / rank(P)` for an ordinary operator set.
pub fn cp_condition_matrix(ops: &[ComplexMatrix], code: &CodeSpace) -> Result<ConditionMatrix> {
    for (i, e) in ops.iter().enumerate() {
        if e.shape() != (code.dim(), code.dim()) {
            return Err(Error::dims(
                format!("{0}x{0} operator", code.dim()),
                format!("operator {i} of shape {}x{}", e.nrows(), e.ncols()),
            ));
        }
    }
    let signs = vec![1.0; ops.len()];
    Ok(condition_matrix(ops, &signs, code, ConditionForm::Hermitian))
}

/// `cᵢⱼ = ηᵢ tr(P Eᵢ† Eⱼ P) / rank(P)`; `η C` is Hermitian.
pub fn ph_condition_matrix(ops: &SignedOperatorSum, code: &CodeSpace) -> Result<ConditionMatrix> {
    check_code_dim(ops.dim(), code)?;
    let signs: Vec<f64> = ops.signs().iter().map(|s| s.value()).collect();
    Ok(condition_matrix(
        &ops.operators(),
        &signs,
        code,
        ConditionForm::Pseudohermitian,
    ))
}

/// Operators `F = E·U` with diagonal conditions `P Fᵢ† Fⱼ P = dᵢ δᵢⱼ P`.
#[derive(Debug, Clone)]
pub struct DiagonalConditions {
    pub condition: ConditionMatrix,
    /// Pseudounitary `U` over the metric of `ops`.
    pub diagonalizer: ComplexMatrix,
    /// Eigenvalues of `C` in column order of `U`.
    pub eigenvalues: Vec<f64>,
    /// `F`, term for term aligned with `weights`.
    pub operators: SignedOperatorSum,
    /// `dᵢ = ηᵢ λᵢ`, the non-negative weights of `P Fᵢ† Fᵢ P = dᵢ P`.
    pub weights: Vec<f64>,
}

pub fn diagonalize_conditions(
    ops: &SignedOperatorSum,
    code: &CodeSpace,
    tol: f64,
) -> Result<DiagonalConditions> {
    let condition = ph_condition_matrix(ops, code)?;
    if !condition.satisfied(tol) {
        return Err(Error::ConditionsViolated {
            residual: condition.residual,
        });
    }
    let eta = eta_metric(ops.signature());
    let pd = pseudo_diagonalize(&condition.entries, &eta, tol)?;
    let signs = ops.signs();
    let mut weights = Vec::with_capacity(ops.len());
    let mut terms = Vec::with_capacity(ops.len());
    for ((term, &lambda), sign) in mix_terms(ops, &pd.transform)
        .into_iter()
        .zip(&pd.eigenvalues)
        .zip(&signs)
    {
        // zero operators would be dropped by the constructor; drop their
        // weights with them to keep the two aligned
        if max_abs(&term.op) > ZERO_OPERATOR_THRESHOLD {
            weights.push(sign.value() * lambda);
            terms.push(term);
        }
    }
    let operators = SignedOperatorSum::new(ops.dim(), terms)?;
    Ok(DiagonalConditions {
        condition,
        diagonalizer: pd.transform,
        eigenvalues: pd.eigenvalues,
        operators,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Syndrome {
    /// `P_k = U_k P U_k†`.
    pub projector: ComplexMatrix,
    /// Polar unitary of `F_k P`.
    pub unitary: ComplexMatrix,
    pub weight: f64,
    pub sign: Sign,
    /// Index of the generating term in `F`.
    pub term_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeSet {
    pub dim: usize,
    pub entries: Vec<Syndrome>,
}

impl SyndromeSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positive(&self) -> SyndromeSet {
        SyndromeSet {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|s| s.sign == Sign::Plus)
                .cloned()
                .collect(),
        }
    }

    /// Largest `‖P_l P_k‖_max` over distinct pairs.
    pub fn max_overlap(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, a) in self.entries.iter().enumerate() {
            for b in &self.entries[l + 1..] {
                worst = worst.max(max_abs(&(&a.projector * &b.projector)));
            }
        }
        worst
    }
}

/// Builds the syndrome subspaces of every term with `d_kk > tol` and checks
/// that they are mutually orthogonal.
pub fn build_syndromes(
    f: &SignedOperatorSum,
    code: &CodeSpace,
    weights: &[f64],
    tol: f64,
) -> Result<SyndromeSet> {
    check_code_dim(f.dim(), code)?;
    if weights.len() != f.len() {
        return Err(Error::dims(
            format!("{} weights", f.len()),
            format!("{} weights", weights.len()),
        ));
    }
    let p = code.projector();
    let mut entries = Vec::new();
    for (k, (term, &weight)) in f.terms().iter().zip(weights).enumerate() {
        if weight <= tol {
            continue;
        }
        let polar = polar_on_code(&term.op, p, tol)?;
        let projector = &polar.unitary_part * p * polar.unitary_part.adjoint();
        entries.push(Syndrome {
            projector,
            unitary: polar.unitary_part,
            weight,
            sign: term.sign,
            term_index: k,
        });
    }
    for l in 0..entries.len() {
        for k in l + 1..entries.len() {
            let overlap = max_abs(&(&entries[l].projector * &entries[k].projector));
            if overlap > tol {
                return Err(Error::OrthogonalityViolation {
                    first: l,
                    second: k,
                    overlap,
                });
            }
        }
    }
    Ok(SyndromeSet {
        dim: f.dim(),
        entries,
    })
}

/// `max_k ‖E_k P‖_F` over the negative block; zero iff the negative part
/// annihilates every code-space state.
pub fn negative_part_on_code(ops: &SignedOperatorSum, code: &CodeSpace) -> Result<f64> {
    check_code_dim(ops.dim(), code)?;
    let p = code.projector();
    Ok(ops
        .negative_terms()
        .map(|t| frobenius(&(&t.op * p)))
        .fold(0.0, f64::max))
}

/// `ℛ(ρ) = Σⱼ Uⱼ† Pⱼ ρ Pⱼ Uⱼ`.
pub fn build_recovery(syndromes: &SyndromeSet) -> SignedOperatorSum {
    let terms = syndromes
        .entries
        .iter()
        .map(|s| SignedTerm::new(Sign::Plus, s.unitary.adjoint() * &s.projector))
        .collect();
    SignedOperatorSum::new(syndromes.dim, terms).expect("syndrome operators share one dimension")
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityWitness {
    /// Code-space density matrix.
    pub state: ComplexMatrix,
    /// Index into the syndrome set's entries.
    pub syndrome_index: usize,
    /// Unnormalized `tr(Pⱼ ℰ(state) Pⱼ)`.
    pub probability: f64,
}

fn pure(psi: &ComplexVector) -> ComplexMatrix {
    let psi = psi / c64(psi.norm(), 0.0);
    &psi * psi.adjoint()
}

/// Outcome probability of syndrome `Pⱼ` after applying the map to `state`.
pub fn syndrome_probability(
    ops: &SignedOperatorSum,
    syndrome: &ComplexMatrix,
    state: &ComplexMatrix,
) -> Result<f64> {
    let out = apply_map(ops, state)?;
    Ok(trace(&(syndrome * out * syndrome)).re)
}

/// Looks for a code state whose negative-term syndrome has negative
/// probability. Candidates are the logical basis states, then the uniform
/// mixture over the code space, then a fixed sequence of random code states.
pub fn domain_witness(
    ops: &SignedOperatorSum,
    code: &CodeSpace,
    syndromes: &SyndromeSet,
    tol: f64,
) -> Result<Option<NegativityWitness>> {
    if negative_part_on_code(ops, code)? <= tol {
        return Ok(None);
    }
    let Some(j) = syndromes
        .entries
        .iter()
        .position(|s| s.sign == Sign::Minus && s.weight > tol)
    else {
        return Err(Error::WitnessSearchFailed);
    };
    let pj = &syndromes.entries[j].projector;

    let mut candidates: Vec<ComplexMatrix> = code.logical_basis().iter().map(pure).collect();
    candidates.push(code.projector() / c64(code.rank() as f64, 0.0));
    let mut rng = seeded(WITNESS_SEED);
    let basis = code.basis_matrix();
    for _ in 0..WITNESS_RANDOM_STATES {
        let coeffs = random_complex_vector(&mut rng, code.rank());
        candidates.push(pure(&(&basis * coeffs)));
    }
    for state in candidates {
        let probability = syndrome_probability(ops, pj, &state)?;
        if probability <= -tol {
            return Ok(Some(NegativityWitness {
                state,
                syndrome_index: j,
                probability,
            }));
        }
    }
    Err(Error::WitnessSearchFailed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ReversiblePositive,
    CodeOutsideDomain,
    ConditionsViolated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ReversiblePositive => "reversible_positive",
            Verdict::CodeOutsideDomain => "code_outside_domain",
            Verdict::ConditionsViolated => "conditions_violated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QecReport {
    pub signature: Signature,
    pub condition: ConditionMatrix,
    pub diagonal: Option<DiagonalConditions>,
    pub syndromes: Option<SyndromeSet>,
    /// Negative part of the diagonalized decomposition on the code space.
    pub negative_part: Option<f64>,
    /// Whether `P (Σ ηᵢ Fᵢ† Fᵢ) P = P`.
    pub trace_preserving_on_code: Option<bool>,
    pub recovery: Option<SignedOperatorSum>,
    pub verdict: Verdict,
    pub witness: Option<NegativityWitness>,
}

impl QecReport {
    pub fn weights(&self) -> Option<&[f64]> {
        self.diagonal.as_ref().map(|d| d.weights.as_slice())
    }

    pub fn diagonalizer(&self) -> Option<&ComplexMatrix> {
        self.diagonal.as_ref().map(|d| &d.diagonalizer)
    }
}

/// Runs the full analysis.
///
/// The verdict is `ConditionsViolated` when the PH conditions fail or when
/// the map is not trace preserving on the code space. Otherwise it is
/// `CodeOutsideDomain` (with a witness, and the recovery built from every
/// syndrome) when the negative part of the diagonalized decomposition acts on
/// the code space, and `ReversiblePositive` (recovery from the positive
/// syndromes) when it does not.
pub fn analyze(ops: &SignedOperatorSum, code: &CodeSpace, tol: f64) -> Result<QecReport> {
    let condition = ph_condition_matrix(ops, code)?;
    let mut report = QecReport {
        signature: ops.signature(),
        condition: condition.clone(),
        diagonal: None,
        syndromes: None,
        negative_part: None,
        trace_preserving_on_code: None,
        recovery: None,
        verdict: Verdict::ConditionsViolated,
        witness: None,
    };
    if !condition.satisfied(tol) {
        return Ok(report);
    }
    let diagonal = diagonalize_conditions(ops, code, tol)?;
    let f = &diagonal.operators;
    let syndromes = build_syndromes(f, code, &diagonal.weights, tol)?;
    let negative = negative_part_on_code(f, code)?;
    let tp_on_code = code_trace_deviation(f, code)? <= tol;

    report.negative_part = Some(negative);
    report.trace_preserving_on_code = Some(tp_on_code);
    if negative > tol {
        report.witness = domain_witness(f, code, &syndromes, tol)?;
        report.recovery = Some(build_recovery(&syndromes));
        report.verdict = Verdict::CodeOutsideDomain;
    } else if tp_on_code {
        report.recovery = Some(build_recovery(&syndromes.positive()));
        report.verdict = Verdict::ReversiblePositive;
    }
    report.syndromes = Some(syndromes);
    report.diagonal = Some(diagonal);
    Ok(report)
}

/// Largest deviation of the normalized `ℛ(ℰ(ρ))` from `ρ` over sampled code
/// states: logical basis states, pairwise superpositions with relative phase
/// 1 and i, and `trials` Haar-random code states.
pub fn verify_recovery(
    ops: &SignedOperatorSum,
    recovery: &SignedOperatorSum,
    code: &CodeSpace,
    trials: usize,
    tol: f64,
) -> Result<f64> {
    check_code_dim(ops.dim(), code)?;
    check_code_dim(recovery.dim(), code)?;
    let basis = code.logical_basis();
    let mut states: Vec<ComplexVector> = basis.to_vec();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for phase in [c64(1.0, 0.0), c64(0.0, 1.0)] {
                states.push(&basis[i] + &basis[j] * phase);
            }
        }
    }
    let mut rng = seeded(VERIFY_SEED);
    let basis_matrix = code.basis_matrix();
    for _ in 0..trials {
        states.push(&basis_matrix * random_complex_vector(&mut rng, code.rank()));
    }

    let mut worst: f64 = 0.0;
    for psi in &states {
        let rho = pure(psi);
        let out = apply_map(recovery, &apply_map(ops, &rho)?)?;
        let tr = trace(&out).re;
        if tr <= tol {
            return Err(Error::ZeroTrace { trace: tr });
        }
        worst = worst.max(max_abs_diff(&(out / c64(tr, 0.0)), &rho));
    }
    Ok(worst)
}

/// `P (Σ ηᵢ Eᵢ† Eᵢ) P − P`, the trace-preservation defect on the code space.
pub fn code_trace_deviation(ops: &SignedOperatorSum, code: &CodeSpace) -> Result<f64> {
    check_code_dim(ops.dim(), code)?;
    let p = code.projector();
    Ok(max_abs_diff(&(p * ops.effect() * p), p))
}

/// Identity map on `dim`, convenient for building trivial recoveries.
pub fn identity_recovery(dim: usize) -> SignedOperatorSum {
    SignedOperatorSum::new(dim, vec![SignedTerm::new(Sign::Plus, identity(dim))])
        .expect("identity has the right shape")
}
