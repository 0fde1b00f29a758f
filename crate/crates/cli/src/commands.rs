use std::fmt::Write as _;
use std::path::Path;

use ncpqec::equivalence::{connecting_pseudounitary, maps_equal};
use ncpqec::linalg::{c64, max_abs, max_abs_diff, outer};
use ncpqec::models::{basis_state, bit_flip_map, repetition_code};
use ncpqec::random::{random_code_state, seeded};
use ncpqec::superop::{
    apply_map, b_from_operator_sum, check_hermiticity_preserving, check_trace_preserving, classify, MapKind,
};
use ncpqec::{analyze, ComplexMatrix, Error, Verdict};
use serde::{Deserialize, Serialize};

use crate::document::{
    matrix_to_json, signature_pair, AnalysisDocument, Channel, ChannelDocument, ClassifyDocument, CodeDocument,
    EquivDocument, Representation, SCHEMA_VERSION,
};
use crate::error::CliError;

/// What a command writes to standard output, plus an optional failure that
/// is reported after the output has been written.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, failure: None }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OutputStyle {
    pub pretty: bool,
}

impl OutputStyle {
    pub fn render<T: Serialize>(self, value: &T) -> String {
        let text = if self.pretty {
            serde_json::to_string_pretty(value)
        } else {
            serde_json::to_string(value)
        };
        text.expect("documents contain only finite numbers and strings") + "\n"
    }
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin())
            .map_err(|e| CliError::input(format!("reading standard input: {e}")));
    }
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("reading {}: {e}", path.display())))
}

pub fn load_channel(path: &Path) -> Result<Channel, CliError> {
    ChannelDocument::parse(&read_input(path)?)?.to_channel()
}

pub fn convert(input: &Path, to: Representation, tol: f64, style: OutputStyle) -> Result<Outcome, CliError> {
    let channel = load_channel(input)?;
    let converted = match to {
        Representation::AMatrix => Channel::A(channel.a_matrix()),
        Representation::BMatrix => Channel::B(channel.b_matrix()),
        Representation::OperatorSum => {
            let ops = channel.operator_sum(tol)?;
            let b = channel.b_matrix();
            let d = channel.dim();
            let deviation = max_abs_diff(b_from_operator_sum(&ops).matrix(), b.matrix());
            let bound = tol * max_abs(b.matrix()).max(1.0) * (d * d) as f64;
            if deviation > bound {
                return Err(CliError::numerical(format!(
                    "operator sum does not reproduce the B-matrix (deviation {deviation:e})"
                )));
            }
            Channel::Ops(ops)
        }
    };
    Ok(Outcome::ok(style.render(&ChannelDocument::from_channel(&converted))))
}

pub fn classify_channel(input: &Path, tol: f64, style: OutputStyle) -> Result<Outcome, CliError> {
    let channel = load_channel(input)?;
    let a = channel.a_matrix();
    if !check_hermiticity_preserving(&a, tol) {
        return Err(CliError::numerical(
            "map is not Hermiticity preserving (its B-matrix is not Hermitian), so CP/NCP is undefined",
        ));
    }
    let class = classify(&channel.b_matrix(), tol).map_err(CliError::numerical_from)?;
    let doc = ClassifyDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        verdict: match class.kind {
            MapKind::Cp => "CP",
            MapKind::Ncp => "NCP",
        }
        .to_string(),
        signature: signature_pair(class.signature),
        trace_preserving: check_trace_preserving(&a, tol),
        hermiticity_preserving: true,
        eigenvalues: class.eigenvalues,
    };
    Ok(Outcome::ok(style.render(&doc)))
}

fn analysis_stage(e: &Error) -> Option<&'static str> {
    match e {
        Error::ConditionsViolated { .. } => Some("conditions"),
        Error::PseudoDiagonalizationFailure(_)
        | Error::NotPseudoHermitian { .. }
        | Error::NullNormEncountered { .. }
        | Error::InvalidMetric(_) => Some("diagonalization"),
        Error::OrthogonalityViolation { .. } | Error::NotAProjector { .. } => Some("syndromes"),
        Error::WitnessSearchFailed => Some("witness"),
        _ => None,
    }
}

pub fn qec(channel: &Path, code: &Path, tol: f64, style: OutputStyle) -> Result<Outcome, CliError> {
    let ops = load_channel(channel)?.operator_sum(tol)?;
    let code_doc = CodeDocument::parse(&read_input(code)?)?;
    if code_doc.dim != ops.dim() {
        return Err(CliError::input(format!(
            "code dimension {} does not match channel dimension {}",
            code_doc.dim,
            ops.dim()
        )));
    }
    let code = code_doc.to_code(tol)?;
    let report = analyze(&ops, &code, tol).map_err(|e| match e {
        Error::DimensionMismatch { .. } => CliError::input_from(e),
        e => match analysis_stage(&e) {
            Some(stage) => CliError::at_stage(stage, e.to_string()),
            None => CliError::numerical_from(e),
        },
    })?;
    let doc = AnalysisDocument::from_report(ops.dim(), &report);
    let failure = match report.verdict {
        Verdict::ConditionsViolated if report.trace_preserving_on_code == Some(false) => Some(CliError::at_stage(
            "conditions",
            "the map is not trace preserving on the code space",
        )),
        Verdict::ConditionsViolated => Some(CliError::at_stage(
            "conditions",
            format!("condition residual {:e} exceeds tolerance {tol:e}", report.condition.residual),
        )),
        Verdict::CodeOutsideDomain if report.witness.is_none() => {
            Some(CliError::at_stage("witness", "no negative outcome was found"))
        }
        _ => None,
    };
    Ok(Outcome { stdout: style.render(&doc), failure })
}

pub fn equiv(first: &Path, second: &Path, tol: f64, style: OutputStyle) -> Result<Outcome, CliError> {
    let a = load_channel(first)?.operator_sum(tol)?;
    let b = load_channel(second)?.operator_sum(tol)?;
    if !maps_equal(&a, &b, tol) {
        return Ok(Outcome::ok(style.render(&EquivDocument {
            equal: false,
            u: None,
            signature: None,
            padding_added: None,
            residual: None,
        })));
    }
    let conn = connecting_pseudounitary(&a, &b, tol).map_err(|e| match e {
        Error::SingularCoefficientMatrix { .. } => CliError::numerical(format!(
            "{e}. The maps are equal, but at least one operator list contains terms that cancel \
             (for example +A and -A); converting both inputs through b_matrix yields base maps"
        )),
        e => CliError::numerical_from(e),
    })?;
    Ok(Outcome::ok(style.render(&EquivDocument {
        equal: true,
        u: Some(matrix_to_json(&conn.u)),
        signature: Some(signature_pair(conn.signature)),
        padding_added: Some([conn.padding_added.0, conn.padding_added.1]),
        residual: Some(conn.residual),
    })))
}

/// Outcomes reported by `reproduce-paper`, in this order.
pub const OUTCOME_LABELS: [&str; 4] = ["000", "111", "100", "011"];
const OUTCOME_INDICES: [usize; 4] = [0b000, 0b111, 0b100, 0b011];
const POPULATIONS: [f64; 3] = [0.0, 0.5, 1.0];
const RECOVERY_SEED: u64 = 0x5EED_0100;
const RECOVERY_TRIALS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub a: f64,
    pub values: [f64; 4],
    pub expected: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceDocument {
    pub schema_version: String,
    pub c0: f64,
    pub c1: f64,
    pub outcome_labels: [String; 4],
    pub outcomes: Vec<OutcomeRow>,
    pub negative_probability: f64,
    pub witness_syndrome_index: usize,
    pub recovery_states: usize,
    pub recovery_deviation: f64,
    pub recovery_exact: bool,
    pub verdict: String,
}

impl ReproduceDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CliError::input(format!("reproduction report: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION || doc.outcomes.len() != POPULATIONS.len() {
            return Err(CliError::input("reproduction report has an unexpected layout"));
        }
        Ok(doc)
    }
}

/// Checks the bit-flip parameters: `c₀ ≠ 0` and `c₁ = (1 − c₀)/3` of opposite sign.
pub fn bit_flip_parameters(c0: f64) -> Result<(f64, f64), CliError> {
    if !c0.is_finite() || c0 == 0.0 {
        return Err(CliError::input(format!("c0 must be finite and nonzero, got {c0}")));
    }
    let c1 = (1.0 - c0) / 3.0;
    if c0 * c1 >= 0.0 {
        return Err(CliError::input(format!(
            "c0 = {c0} gives c1 = (1 - c0)/3 = {c1}; the coefficients must have opposite signs"
        )));
    }
    Ok((c0, c1))
}

fn code_state(a: f64, coherence: f64) -> ComplexMatrix {
    let k0 = outer(&basis_state(3, 0b000), &basis_state(3, 0b000));
    let k1 = outer(&basis_state(3, 0b111), &basis_state(3, 0b111));
    let x01 = outer(&basis_state(3, 0b000), &basis_state(3, 0b111));
    k0 * c64(a, 0.0) + k1 * c64(1.0 - a, 0.0) + &x01 * c64(coherence, 0.0) + x01.adjoint() * c64(coherence, 0.0)
}

pub fn reproduce_paper(c0: f64, tol: f64, json: bool, style: OutputStyle) -> Result<Outcome, CliError> {
    let (c0, c1) = bit_flip_parameters(c0)?;
    let ops = bit_flip_map(c0, c1);
    let code = repetition_code();

    let mut outcomes = Vec::new();
    for a in POPULATIONS {
        let out = apply_map(&ops, &code_state(a, 0.0)).map_err(CliError::numerical_from)?;
        let values = OUTCOME_INDICES.map(|i| out[(i, i)].re);
        outcomes.push(OutcomeRow { a, values, expected: [c0 * a, c0 * (1.0 - a), c1 * a, c1 * (1.0 - a)] });
    }

    let report = analyze(&ops, &code, tol).map_err(|e| match analysis_stage(&e) {
        Some(stage) => CliError::at_stage(stage, e.to_string()),
        None => CliError::numerical_from(e),
    })?;
    let witness = report
        .witness
        .as_ref()
        .ok_or_else(|| CliError::at_stage("witness", format!("verdict is {}", report.verdict.as_str())))?;
    let recovery = report.recovery.as_ref().ok_or_else(|| CliError::at_stage("recovery", "no recovery map"))?;

    let mut states: Vec<ComplexMatrix> = POPULATIONS
        .iter()
        .flat_map(|&a| [code_state(a, 0.0), code_state(a, (a * (1.0 - a)).sqrt())])
        .collect();
    let mut rng = seeded(RECOVERY_SEED);
    states.extend((0..RECOVERY_TRIALS).map(|_| random_code_state(&mut rng, &code)));
    let mut deviation: f64 = 0.0;
    for rho in &states {
        let back = apply_map(recovery, &apply_map(&ops, rho).map_err(CliError::numerical_from)?)
            .map_err(CliError::numerical_from)?;
        deviation = deviation.max(max_abs_diff(&back, rho));
    }
    let recovery_exact = deviation <= tol;

    let doc = ReproduceDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        c0,
        c1,
        outcome_labels: OUTCOME_LABELS.map(String::from),
        outcomes,
        negative_probability: witness.probability,
        witness_syndrome_index: witness.syndrome_index,
        recovery_states: states.len(),
        recovery_deviation: deviation,
        recovery_exact,
        verdict: report.verdict.as_str().to_string(),
    };
    let failure = (!recovery_exact).then(|| {
        CliError::at_stage("recovery", format!("recovered states deviate by {deviation:e}"))
    });
    let stdout = if json { style.render(&doc) } else { human_report(&doc) };
    Ok(Outcome { stdout, failure })
}

fn human_report(doc: &ReproduceDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "bit-flip map E(rho) = c0 rho + c1 sum_n X_n rho X_n on three qubits");
    let _ = writeln!(s, "c0 = {:.6}, c1 = {:.6}", doc.c0, doc.c1);
    let _ = writeln!(s, "code space span{{|000>, |111>}}, rho = a|000><000| + (1-a)|111><111|");
    let _ = writeln!(s);
    let _ = writeln!(s, "outcome values tr(|k><k| E(rho)):");
    let mut header = format!("{:>6}", "a");
    for label in &doc.outcome_labels {
        let _ = write!(header, "{:>12}", format!("|{label}>"));
    }
    let _ = writeln!(s, "{header}");
    for row in &doc.outcomes {
        let mut line = format!("{:>6.2}", row.a);
        for v in row.values {
            let _ = write!(line, "{:>12.6}", v + 0.0);
        }
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "negative probability: {:.6} (syndrome {} on a code state)",
        doc.negative_probability, doc.witness_syndrome_index
    );
    let _ = writeln!(
        s,
        "recovery: max |R(E(rho)) - rho| = {:.1e} over {} code states ({})",
        doc.recovery_deviation,
        doc.recovery_states,
        if doc.recovery_exact { "initial state recovered" } else { "NOT recovered" }
    );
    let _ = writeln!(s, "verdict: {}", doc.verdict);
    s
}
