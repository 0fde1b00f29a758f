//! JSON documents read and written by the command-line tool.
//!
//! Complex scalars are `[re, im]` pairs and matrices are row-major nested
//! arrays of such pairs.

use ncpqec::linalg::c64;
use ncpqec::qec::{NegativityWitness, QecReport};
use ncpqec::superop::{b_from_operator_sum, operator_sum_from_b, reshuffle, unreshuffle};
use ncpqec::{AMatrix, BMatrix, CodeSpace, ComplexMatrix, ComplexVector, Sign, SignedOperatorSum, SignedTerm, Signature};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1.0";

pub type JsonComplex = [f64; 2];
pub type JsonVector = Vec<JsonComplex>;
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn vector_to_json(v: &ComplexVector) -> JsonVector {
    v.iter().map(|z| [z.re, z.im]).collect()
}

/// Parses a square `n × n` matrix. `what` names the matrix in error messages.
pub fn matrix_from_json(rows: &JsonMatrix, n: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(CliError::input(format!(
            "{what}: expected a {n}x{n} matrix, got {} rows with lengths {shape:?}",
            rows.len()
        )));
    }
    let m = ComplexMatrix::from_fn(n, n, |i, j| c64(rows[i][j][0], rows[i][j][1]));
    check_finite(m.iter().map(|z| [z.re, z.im]), what)?;
    Ok(m)
}

pub fn vector_from_json(entries: &JsonVector, n: usize, what: &str) -> Result<ComplexVector, CliError> {
    if entries.len() != n {
        return Err(CliError::input(format!("{what}: expected {n} entries, got {}", entries.len())));
    }
    check_finite(entries.iter().copied(), what)?;
    Ok(ComplexVector::from_iterator(n, entries.iter().map(|z| c64(z[0], z[1]))))
}

fn check_finite(mut values: impl Iterator<Item = JsonComplex>, what: &str) -> Result<(), CliError> {
    if values.any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(CliError::input(format!("{what}: non-finite entry")));
    }
    Ok(())
}

fn check_schema(version: &str) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::input(format!(
            "unsupported schema_version {version:?} (expected {SCHEMA_VERSION:?})"
        )));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Representation {
    AMatrix,
    BMatrix,
    OperatorSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSumPayload {
    pub signs: Vec<i64>,
    pub operators: Vec<JsonMatrix>,
}

impl OperatorSumPayload {
    pub fn from_ops(ops: &SignedOperatorSum) -> Self {
        OperatorSumPayload {
            signs: ops.signs().iter().map(|s| s.as_int()).collect(),
            operators: ops.terms().iter().map(|t| matrix_to_json(&t.op)).collect(),
        }
    }

    pub fn to_ops(&self, dim: usize) -> Result<SignedOperatorSum, CliError> {
        if self.signs.len() != self.operators.len() {
            return Err(CliError::input(format!(
                "operator_sum: {} signs for {} operators",
                self.signs.len(),
                self.operators.len()
            )));
        }
        let mut terms = Vec::with_capacity(self.signs.len());
        let mut seen_minus = false;
        for (k, (&s, op)) in self.signs.iter().zip(&self.operators).enumerate() {
            let sign = Sign::from_int(s)
                .ok_or_else(|| CliError::input(format!("operator_sum: sign {k} is {s}, expected 1 or -1")))?;
            match sign {
                Sign::Minus => seen_minus = true,
                Sign::Plus if seen_minus => {
                    return Err(CliError::input(format!(
                        "operator_sum: sign {k} is +1 after a -1 term; the +1 block must come first"
                    )))
                }
                Sign::Plus => {}
            }
            terms.push(SignedTerm::new(sign, matrix_from_json(op, dim, &format!("operator {k}"))?));
        }
        SignedOperatorSum::new(dim, terms).map_err(CliError::input_from)
    }
}

/// A channel in one of the three representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub schema_version: String,
    pub dim: usize,
    pub representation: Representation,
    pub payload: Value,
}

/// Parsed and validated channel.
#[derive(Debug, Clone)]
pub enum Channel {
    A(AMatrix),
    B(BMatrix),
    Ops(SignedOperatorSum),
}

impl Channel {
    pub fn dim(&self) -> usize {
        match self {
            Channel::A(a) => a.dim(),
            Channel::B(b) => b.dim(),
            Channel::Ops(o) => o.dim(),
        }
    }

    pub fn a_matrix(&self) -> AMatrix {
        match self {
            Channel::A(a) => a.clone(),
            Channel::B(b) => unreshuffle(b),
            Channel::Ops(o) => AMatrix::from_operator_sum(o),
        }
    }

    pub fn b_matrix(&self) -> BMatrix {
        match self {
            Channel::A(a) => reshuffle(a),
            Channel::B(b) => b.clone(),
            Channel::Ops(o) => b_from_operator_sum(o),
        }
    }

    /// Signed operator sum. Matrix inputs are decomposed through the
    /// eigendecomposition of their B-matrix, which must be Hermitian.
    pub fn operator_sum(&self, tol: f64) -> Result<SignedOperatorSum, CliError> {
        match self {
            Channel::Ops(o) => Ok(o.clone()),
            other => operator_sum_from_b(&other.b_matrix(), tol).map_err(CliError::numerical_from),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Channel::A(_) => Representation::AMatrix,
            Channel::B(_) => Representation::BMatrix,
            Channel::Ops(_) => Representation::OperatorSum,
        }
    }
}

impl ChannelDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        parse_json(text, "channel document")
    }

    pub fn from_channel(channel: &Channel) -> Self {
        let payload = match channel {
            Channel::A(a) => serde_json::to_value(matrix_to_json(a.matrix())),
            Channel::B(b) => serde_json::to_value(matrix_to_json(b.matrix())),
            Channel::Ops(o) => serde_json::to_value(OperatorSumPayload::from_ops(o)),
        }
        .expect("plain numeric data serializes");
        ChannelDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: channel.dim(),
            representation: channel.representation(),
            payload,
        }
    }

    pub fn to_channel(&self) -> Result<Channel, CliError> {
        check_schema(&self.schema_version)?;
        let d = self.dim;
        if d == 0 {
            return Err(CliError::input("dim must be positive"));
        }
        let payload = |what: &str| -> Result<JsonMatrix, CliError> {
            serde_json::from_value(self.payload.clone())
                .map_err(|e| CliError::input(format!("{what} payload: {e}")))
        };
        Ok(match self.representation {
            Representation::AMatrix => {
                let m = matrix_from_json(&payload("a_matrix")?, d * d, "a_matrix")?;
                Channel::A(AMatrix::new(d, m).map_err(CliError::input_from)?)
            }
            Representation::BMatrix => {
                let m = matrix_from_json(&payload("b_matrix")?, d * d, "b_matrix")?;
                Channel::B(BMatrix::new(d, m).map_err(CliError::input_from)?)
            }
            Representation::OperatorSum => {
                let p: OperatorSumPayload = serde_json::from_value(self.payload.clone())
                    .map_err(|e| CliError::input(format!("operator_sum payload: {e}")))?;
                Channel::Ops(p.to_ops(d)?)
            }
        })
    }
}

/// A code space given by (not necessarily orthonormal) basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub schema_version: String,
    pub dim: usize,
    pub basis: Vec<JsonVector>,
}

impl CodeDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        parse_json(text, "code document")
    }

    pub fn from_vectors(dim: usize, basis: &[ComplexVector]) -> Self {
        CodeDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            dim,
            basis: basis.iter().map(vector_to_json).collect(),
        }
    }

    pub fn to_code(&self, tol: f64) -> Result<CodeSpace, CliError> {
        check_schema(&self.schema_version)?;
        if self.basis.is_empty() {
            return Err(CliError::input("code basis is empty"));
        }
        let basis = self
            .basis
            .iter()
            .enumerate()
            .map(|(k, v)| vector_from_json(v, self.dim, &format!("basis vector {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        CodeSpace::projector_from_basis(&basis, tol).map_err(CliError::input_from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub state: JsonMatrix,
    pub syndrome_index: usize,
    pub probability: f64,
}

impl WitnessDocument {
    fn from_witness(w: &NegativityWitness) -> Self {
        WitnessDocument {
            state: matrix_to_json(&w.state),
            syndrome_index: w.syndrome_index,
            probability: w.probability,
        }
    }
}

/// Serialized error-correction analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub schema_version: String,
    pub dim: usize,
    pub verdict: String,
    pub signature: [usize; 2],
    pub condition_matrix: JsonMatrix,
    pub residual: f64,
    pub diagonal: Option<Vec<f64>>,
    pub diagonalizer: Option<JsonMatrix>,
    pub negative_part: Option<f64>,
    pub trace_preserving_on_code: Option<bool>,
    pub syndrome_projectors: Vec<JsonMatrix>,
    pub syndrome_signs: Vec<i64>,
    pub recovery: Option<OperatorSumPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDocument>,
}

pub const VERDICTS: [&str; 3] = ["reversible_positive", "code_outside_domain", "conditions_violated"];

impl AnalysisDocument {
    pub fn from_report(dim: usize, report: &QecReport) -> Self {
        let syndromes = report.syndromes.as_ref().map(|s| s.entries.as_slice()).unwrap_or(&[]);
        AnalysisDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            dim,
            verdict: report.verdict.as_str().to_string(),
            signature: signature_pair(report.signature),
            condition_matrix: matrix_to_json(&report.condition.entries),
            residual: report.condition.residual,
            diagonal: report.weights().map(<[f64]>::to_vec),
            diagonalizer: report.diagonalizer().map(matrix_to_json),
            negative_part: report.negative_part,
            trace_preserving_on_code: report.trace_preserving_on_code,
            syndrome_projectors: syndromes.iter().map(|s| matrix_to_json(&s.projector)).collect(),
            syndrome_signs: syndromes.iter().map(|s| s.sign.as_int()).collect(),
            recovery: report.recovery.as_ref().map(OperatorSumPayload::from_ops),
            witness: report.witness.as_ref().map(WitnessDocument::from_witness),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Self = parse_json(text, "analysis document")?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_schema(&self.schema_version)?;
        if !VERDICTS.contains(&self.verdict.as_str()) {
            return Err(CliError::input(format!("unknown verdict {:?}", self.verdict)));
        }
        if self.witness.is_some() != (self.verdict == "code_outside_domain") {
            return Err(CliError::input("a witness is present exactly when the verdict is code_outside_domain"));
        }
        if self.syndrome_projectors.len() != self.syndrome_signs.len() {
            return Err(CliError::input("syndrome projectors and signs differ in length"));
        }
        for (k, p) in self.syndrome_projectors.iter().enumerate() {
            matrix_from_json(p, self.dim, &format!("syndrome projector {k}"))?;
        }
        if let Some(w) = &self.witness {
            matrix_from_json(&w.state, self.dim, "witness state")?;
        }
        if let Some(r) = &self.recovery {
            r.to_ops(self.dim)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyDocument {
    pub schema_version: String,
    pub verdict: String,
    pub signature: [usize; 2],
    pub trace_preserving: bool,
    pub hermiticity_preserving: bool,
    pub eigenvalues: Vec<f64>,
}

impl ClassifyDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Self = parse_json(text, "classification")?;
        check_schema(&doc.schema_version)?;
        if doc.verdict != "CP" && doc.verdict != "NCP" {
            return Err(CliError::input(format!("unknown verdict {:?}", doc.verdict)));
        }
        Ok(doc)
    }
}

/// Result of `equiv`. Only `equal` is present when the maps differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivDocument {
    pub equal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding_added: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl EquivDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Self = parse_json(text, "equivalence result")?;
        let complete = doc.u.is_some() && doc.signature.is_some() && doc.padding_added.is_some() && doc.residual.is_some();
        let empty = doc.u.is_none() && doc.signature.is_none() && doc.padding_added.is_none() && doc.residual.is_none();
        if (doc.equal && !complete) || (!doc.equal && !empty) {
            return Err(CliError::input("equivalence result fields do not match the equal flag"));
        }
        if let (Some(u), Some([p, q])) = (&doc.u, doc.signature) {
            if u.len() != p + q || u.iter().any(|r| r.len() != p + q) {
                return Err(CliError::input("u does not match the signature"));
            }
        }
        Ok(doc)
    }
}

pub fn signature_pair(s: Signature) -> [usize; 2] {
    [s.p, s.q]
}
