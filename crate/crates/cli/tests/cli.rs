use std::path::{Path, PathBuf};
use std::process::Command;

use ncpqec::linalg::{c64, hermitian_eigenvalues, identity, max_abs_diff};
use ncpqec::models::{basis_state, bit_flip_map, pauli_on, pauli_x, pauli_z};
use ncpqec::random::{random_signed_ops, seeded};
use ncpqec::superop::{reshuffle, AMatrix};
use ncpqec::{ComplexMatrix, Sign, SignedOperatorSum, Signature};
use ncpqec_cli::commands::ReproduceDocument;
use ncpqec_cli::document::{
    matrix_from_json, Channel, ChannelDocument, ClassifyDocument, CodeDocument, EquivDocument,
};
use ncpqec_cli::AnalysisDocument;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ncpqec(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncpqec"));
    cmd.args(args).env_remove("QEC_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    ncpqec(args, &[])
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_channel(dir: &TempDir, name: &str, channel: &Channel) -> PathBuf {
    write(dir, name, &serde_json::to_string(&ChannelDocument::from_channel(channel)).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ops(dim: usize, terms: Vec<(Sign, ComplexMatrix)>) -> SignedOperatorSum {
    let (signs, mats): (Vec<_>, Vec<_>) = terms.into_iter().unzip();
    SignedOperatorSum::from_parts(dim, &signs, mats).unwrap()
}

fn repetition_code_file(dir: &TempDir) -> PathBuf {
    let doc = CodeDocument::from_vectors(8, &[basis_state(3, 0b000), basis_state(3, 0b111)]);
    write(dir, "code.json", &serde_json::to_string(&doc).unwrap())
}

fn cp_bit_flip(p0: f64, p1: f64) -> SignedOperatorSum {
    let mut terms = vec![(Sign::Plus, identity(8) * c64(p0.sqrt(), 0.0))];
    for q in 0..3 {
        terms.push((Sign::Plus, pauli_on(3, q, &pauli_x()) * c64(p1.sqrt(), 0.0)));
    }
    ops(8, terms)
}

fn transpose_map() -> AMatrix {
    // A = SWAP on C² ⊗ C²: vec(ρᵀ) = SWAP vec(ρ).
    let mut m = ComplexMatrix::zeros(4, 4);
    for r in 0..2 {
        for s in 0..2 {
            m[(r * 2 + s, s * 2 + r)] = c64(1.0, 0.0);
        }
    }
    AMatrix::new(2, m).unwrap()
}

fn parse_channel(text: &str) -> Channel {
    ChannelDocument::parse(text).unwrap().to_channel().unwrap()
}

fn b_spectrum(text: &str) -> Vec<f64> {
    let Channel::B(b) = parse_channel(text) else { panic!("expected b_matrix output") };
    hermitian_eigenvalues(b.matrix())
}

#[test]
fn identity_operator_sum_to_b_matrix_has_single_eigenvalue_d() {
    let dir = TempDir::new().unwrap();
    let input = write_channel(&dir, "id.json", &Channel::Ops(SignedOperatorSum::identity_map(3)));
    let r = run(&["convert", s(&input), "--to", "b_matrix"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let ev = b_spectrum(&r.stdout);
    assert!((ev[8] - 3.0).abs() < 1e-12);
    assert!(ev[..8].iter().all(|v| v.abs() < 1e-12), "{ev:?}");
}

#[test]
fn bit_flip_b_matrix_spectrum() {
    let dir = TempDir::new().unwrap();
    let input = write_channel(&dir, "bf.json", &Channel::Ops(bit_flip_map(-0.2, 0.4)));
    let r = run(&["convert", s(&input), "--to", "b_matrix"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let ev = b_spectrum(&r.stdout);
    let nonzero: Vec<f64> = ev.into_iter().filter(|v| v.abs() > 1e-9).collect();
    let want = [-1.6, 3.2, 3.2, 3.2];
    assert_eq!(nonzero.len(), 4, "{nonzero:?}");
    for (g, w) in nonzero.iter().zip(want) {
        assert!((g - w).abs() < 1e-9, "{nonzero:?}");
    }
}

#[test]
fn malformed_and_invalid_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"schema_version\": \"1.0\", \"dim\": 2,");
    assert_eq!(run(&["convert", s(&bad), "--to", "a_matrix"]).code, 2);
    assert_eq!(run(&["classify", "/nonexistent/channel.json"]).code, 2);

    let wrong_shape = write(
        &dir,
        "shape.json",
        r#"{"schema_version":"1.0","dim":2,"representation":"a_matrix","payload":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#,
    );
    let r = run(&["classify", s(&wrong_shape)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("4x4"), "{}", r.stderr);

    let unordered = write(
        &dir,
        "order.json",
        r#"{"schema_version":"1.0","dim":1,"representation":"operator_sum",
            "payload":{"signs":[-1,1],"operators":[[[[1,0]]],[[[2,0]]]]}}"#,
    );
    let r = run(&["classify", s(&unordered)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("+1 block"), "{}", r.stderr);

    let bad_sign = write(
        &dir,
        "sign.json",
        r#"{"schema_version":"1.0","dim":1,"representation":"operator_sum",
            "payload":{"signs":[2],"operators":[[[[1,0]]]]}}"#,
    );
    assert_eq!(run(&["classify", s(&bad_sign)]).code, 2);

    let version = write(
        &dir,
        "version.json",
        r#"{"schema_version":"9","dim":1,"representation":"b_matrix","payload":[[[1,0]]]}"#,
    );
    assert_eq!(run(&["classify", s(&version)]).code, 2);

    assert_eq!(run(&["convert", s(&bad), "--to", "kraus"]).code, 2);
}

#[test]
fn convert_of_non_hermitian_b_matrix_to_operator_sum_exits_3() {
    let dir = TempDir::new().unwrap();
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 1)] = c64(1.0, 0.0);
    let input = write_channel(&dir, "nh.json", &Channel::B(ncpqec::BMatrix::new(2, m).unwrap()));
    let r = run(&["convert", s(&input), "--to", "operator_sum"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("not Hermitian"), "{}", r.stderr);
}

#[test]
fn a_to_b_to_a_roundtrip() {
    let dir = TempDir::new().unwrap();
    let mut rng = seeded(7);
    for (d, sig) in [(2, Signature::new(2, 1)), (3, Signature::new(2, 2)), (4, Signature::new(3, 3))] {
        let a = AMatrix::from_operator_sum(&random_signed_ops(&mut rng, d, sig));
        let input = write_channel(&dir, "a.json", &Channel::A(a.clone()));
        let r = run(&["convert", s(&input), "--to", "b_matrix"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let b_path = write(&dir, "b.json", &r.stdout);
        let r = run(&["convert", s(&b_path), "--to", "a_matrix"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let Channel::A(back) = parse_channel(&r.stdout) else { panic!("expected a_matrix") };
        assert!(max_abs_diff(back.matrix(), a.matrix()) <= 1e-9);

        let r = run(&["convert", s(&input), "--to", "operator_sum"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let Channel::Ops(o) = parse_channel(&r.stdout) else { panic!("expected operator_sum") };
        assert_eq!(o.signature(), sig);
        let again = AMatrix::from_operator_sum(&o);
        assert!(max_abs_diff(again.matrix(), a.matrix()) <= 1e-9);
    }
}

#[test]
fn classify_examples() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (Channel::Ops(bit_flip_map(-0.2, 0.4)), "NCP", [3, 1], true),
        (Channel::Ops(SignedOperatorSum::identity_map(2)), "CP", [1, 0], true),
        (Channel::A(transpose_map()), "NCP", [3, 1], true),
    ];
    for (k, (channel, verdict, signature, tp)) in cases.into_iter().enumerate() {
        let input = write_channel(&dir, &format!("c{k}.json"), &channel);
        let r = run(&["classify", s(&input)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let doc = ClassifyDocument::parse(&r.stdout).unwrap();
        assert_eq!(doc.verdict, verdict, "case {k}");
        assert_eq!(doc.signature, signature, "case {k}");
        assert_eq!(doc.trace_preserving, tp, "case {k}");
        assert!(doc.hermiticity_preserving);
    }
    let transpose_b = reshuffle(&transpose_map());
    let ev = hermitian_eigenvalues(transpose_b.matrix());
    assert!((ev[0] + 1.0).abs() < 1e-12);
}

#[test]
fn classify_rejects_non_hermiticity_preserving_map() {
    let dir = TempDir::new().unwrap();
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 1)] = c64(0.0, 1.0);
    let input = write_channel(&dir, "a.json", &Channel::A(AMatrix::new(2, m).unwrap()));
    assert_eq!(run(&["classify", s(&input)]).code, 3);
}

#[test]
fn qec_bit_flip_is_outside_domain() {
    let dir = TempDir::new().unwrap();
    let channel = write_channel(&dir, "bf.json", &Channel::Ops(bit_flip_map(-0.2, 0.4)));
    let code = repetition_code_file(&dir);
    let r = run(&["qec", s(&channel), "--code", s(&code)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = AnalysisDocument::parse(&r.stdout).unwrap();
    assert_eq!(doc.verdict, "code_outside_domain");
    let w = doc.witness.unwrap();
    assert!((w.probability + 0.2).abs() < 1e-10, "{}", w.probability);
    assert_eq!(doc.signature, [3, 1]);
    assert_eq!(doc.syndrome_projectors.len(), 4);
}

#[test]
fn qec_cp_bit_flip_is_reversible_positive() {
    let dir = TempDir::new().unwrap();
    let channel = write_channel(&dir, "cp.json", &Channel::Ops(cp_bit_flip(0.7, 0.1)));
    let code = repetition_code_file(&dir);
    let r = run(&["qec", s(&channel), "--code", s(&code), "--pretty"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("\n  "), "pretty output is indented");
    let doc = AnalysisDocument::parse(&r.stdout).unwrap();
    assert_eq!(doc.verdict, "reversible_positive");
    assert!(doc.witness.is_none());
    let recovery = doc.recovery.unwrap();
    assert_eq!(recovery.operators.len(), 4);
    assert!(recovery.signs.iter().all(|&s| s == 1));
    let weights = doc.diagonal.unwrap();
    assert!(weights.iter().zip([0.7, 0.1, 0.1, 0.1]).all(|(g, w)| (g - w).abs() < 1e-9), "{weights:?}");
}

#[test]
fn qec_mismatched_dimensions_exit_2() {
    let dir = TempDir::new().unwrap();
    let channel = write_channel(&dir, "bf.json", &Channel::Ops(bit_flip_map(-0.2, 0.4)));
    let small = CodeDocument::from_vectors(4, &[basis_state(2, 0), basis_state(2, 3)]);
    let code = write(&dir, "small.json", &serde_json::to_string(&small).unwrap());
    let r = run(&["qec", s(&channel), "--code", s(&code)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("dimension"), "{}", r.stderr);

    let dependent = CodeDocument::from_vectors(8, &[basis_state(3, 0), basis_state(3, 0)]);
    let code = write(&dir, "dep.json", &serde_json::to_string(&dependent).unwrap());
    assert_eq!(run(&["qec", s(&channel), "--code", s(&code)]).code, 2);
}

#[test]
fn qec_violated_conditions_exit_3_naming_stage() {
    let dir = TempDir::new().unwrap();
    let map = ops(8, vec![(Sign::Plus, identity(8)), (Sign::Plus, pauli_on(3, 0, &pauli_z()))]);
    let channel = write_channel(&dir, "iz.json", &Channel::Ops(map));
    let code = repetition_code_file(&dir);
    let r = run(&["qec", s(&channel), "--code", s(&code)]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("stage conditions"), "{}", r.stderr);
    let doc = AnalysisDocument::parse(&r.stdout).unwrap();
    assert_eq!(doc.verdict, "conditions_violated");
    assert!(doc.residual > 0.1);
}

fn boost_pair(t: f64) -> (SignedOperatorSum, SignedOperatorSum) {
    let z = pauli_z();
    let first = ops(2, vec![(Sign::Plus, identity(2)), (Sign::Minus, z.clone())]);
    let (ch, sh) = (c64(t.cosh(), 0.0), c64(t.sinh(), 0.0));
    let second = ops(
        2,
        vec![
            (Sign::Plus, identity(2) * ch + &z * sh),
            (Sign::Minus, identity(2) * sh + &z * ch),
        ],
    );
    (first, second)
}

fn equiv_files(dir: &TempDir, a: &SignedOperatorSum, b: &SignedOperatorSum) -> Run {
    let p = write_channel(dir, "first.json", &Channel::Ops(a.clone()));
    let q = write_channel(dir, "second.json", &Channel::Ops(b.clone()));
    run(&["equiv", s(&p), s(&q)])
}

#[test]
fn equiv_boost_returns_pseudounitary() {
    let dir = TempDir::new().unwrap();
    let (a, b) = boost_pair(0.7);
    let r = equiv_files(&dir, &a, &b);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = EquivDocument::parse(&r.stdout).unwrap();
    assert!(doc.equal);
    assert!(doc.residual.unwrap() <= 1e-9);
    assert_eq!(doc.signature, Some([1, 1]));
    let u = matrix_from_json(&doc.u.unwrap(), 2, "u").unwrap();
    let want = ComplexMatrix::from_row_slice(
        2,
        2,
        &[c64(0.7f64.cosh(), 0.0), c64(0.7f64.sinh(), 0.0), c64(0.7f64.sinh(), 0.0), c64(0.7f64.cosh(), 0.0)],
    );
    assert!(max_abs_diff(&u, &want) < 1e-9, "{u}");
}

#[test]
fn equiv_of_different_maps_is_false() {
    let dir = TempDir::new().unwrap();
    let r = equiv_files(&dir, &SignedOperatorSum::identity_map(8), &bit_flip_map(-0.2, 0.4));
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.trim(), r#"{"equal":false}"#);
    assert!(!EquivDocument::parse(&r.stdout).unwrap().equal);
}

#[test]
fn equiv_self_gives_identity() {
    let dir = TempDir::new().unwrap();
    let map = bit_flip_map(-0.2, 0.4);
    let r = equiv_files(&dir, &map, &map);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = EquivDocument::parse(&r.stdout).unwrap();
    let u = matrix_from_json(&doc.u.unwrap(), 4, "u").unwrap();
    assert!(max_abs_diff(&u, &identity(4)) < 1e-9, "{u}");
}

#[test]
fn equiv_with_cancelling_terms_exits_3() {
    let dir = TempDir::new().unwrap();
    let x = pauli_x();
    let padded = ops(2, vec![(Sign::Plus, identity(2)), (Sign::Plus, x.clone()), (Sign::Minus, x)]);
    let r = equiv_files(&dir, &padded, &SignedOperatorSum::identity_map(2));
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("base map"), "{}", r.stderr);
}

#[test]
fn reproduce_paper_default() {
    let r = run(&["reproduce-paper", "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = ReproduceDocument::parse(&r.stdout).unwrap();
    assert_eq!(doc.verdict, "code_outside_domain");
    assert!((doc.negative_probability + 0.2).abs() < 1e-10);
    assert!(doc.recovery_exact);
    let last = doc.outcomes.last().unwrap();
    assert_eq!(last.a, 1.0);
    for (g, w) in last.values.iter().zip([-0.2, 0.0, 0.4, 0.0]) {
        assert!((g - w).abs() < 1e-10, "{:?}", last.values);
    }
    for row in &doc.outcomes {
        for (g, w) in row.values.iter().zip(row.expected) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    let text = run(&["reproduce-paper"]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("verdict: code_outside_domain"), "{}", text.stdout);
    assert!(text.stdout.contains("negative probability: -0.200000"), "{}", text.stdout);
}

#[test]
fn reproduce_paper_other_c0() {
    let r = run(&["reproduce-paper", "--c0", "-0.5", "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = ReproduceDocument::parse(&r.stdout).unwrap();
    assert!((doc.c1 - 0.5).abs() < 1e-15);
    let half = &doc.outcomes[1];
    assert_eq!(half.a, 0.5);
    for (g, w) in half.values.iter().zip([-0.25, -0.25, 0.25, 0.25]) {
        assert!((g - w).abs() < 1e-10, "{:?}", half.values);
    }
    assert!(doc.recovery_exact);
}

#[test]
fn reproduce_paper_rejects_same_sign_coefficients() {
    for c0 in ["0.4", "0", "1"] {
        let r = run(&["reproduce-paper", "--c0", c0]);
        assert_eq!(r.code, 2, "c0 = {c0}: {}", r.stderr);
    }
    assert_eq!(run(&["reproduce-paper", "--c0", "1.6"]).code, 0);
}

#[test]
fn tolerance_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let input = write_channel(&dir, "bf.json", &Channel::Ops(bit_flip_map(-0.2, 0.4)));
    assert_eq!(ncpqec(&["classify", s(&input)], &[("QEC_TOL", "-1")]).code, 2);
    assert_eq!(ncpqec(&["classify", s(&input)], &[("QEC_TOL", "1e-9")]).code, 0);
    let r = ncpqec(&["classify", s(&input), "--tol", "1e-9"], &[("QEC_TOL", "-1")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    // A loose tolerance hides the small Hermiticity defect of a perturbed map.
    let mut m = reshuffle(&transpose_map()).matrix().clone();
    m[(0, 1)] += c64(1e-6, 0.0);
    let path = write_channel(&dir, "p.json", &Channel::B(ncpqec::BMatrix::new(2, m).unwrap()));
    assert_eq!(ncpqec(&["classify", s(&path)], &[("QEC_TOL", "1e-9")]).code, 3);
    assert_eq!(ncpqec(&["classify", s(&path)], &[("QEC_TOL", "1e-4")]).code, 0);
    assert_eq!(ncpqec(&["classify", s(&path), "--tol", "1e-9"], &[("QEC_TOL", "1e-4")]).code, 3);
}

#[test]
fn emitted_documents_reparse() {
    let dir = TempDir::new().unwrap();
    let code = repetition_code_file(&dir);
    let channel = write_channel(&dir, "bf.json", &Channel::Ops(bit_flip_map(-0.2, 0.4)));
    for to in ["a_matrix", "b_matrix", "operator_sum"] {
        let r = run(&["convert", s(&channel), "--to", to]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let path = write(&dir, &format!("{to}.json"), &r.stdout);
        let doc = ChannelDocument::parse(&r.stdout).unwrap();
        assert_eq!(serde_json::to_value(doc.representation).unwrap(), to);
        // Every representation analyzes the same way.
        let q = run(&["qec", s(&path), "--code", s(&code)]);
        assert_eq!(q.code, 0, "{}", q.stderr);
        let analysis = AnalysisDocument::parse(&q.stdout).unwrap();
        assert_eq!(analysis.verdict, "code_outside_domain");
        let recovery = analysis.recovery.unwrap();
        let reparsed = recovery.to_ops(8).unwrap();
        assert_eq!(reparsed.len(), 4);
    }
    let classify = run(&["classify", s(&channel), "--pretty"]);
    ClassifyDocument::parse(&classify.stdout).unwrap();
    let code_doc = CodeDocument::parse(&std::fs::read_to_string(&code).unwrap()).unwrap();
    assert_eq!(code_doc.to_code(1e-9).unwrap().rank(), 2);
}
