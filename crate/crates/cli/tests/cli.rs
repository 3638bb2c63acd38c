use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use stagedtree_cli::document::{parse_tree_document, DocumentError};
use stagedtree_cli::{run, Outcome};

const FIXTURES: [&str; 11] = [
    "one_stage_three_children",
    "two_by_three",
    "nested_stages",
    "binary_coloured",
    "binary_uncoloured",
    "repeated_label",
    "cell_decomposable",
    "cell_network",
    "cell_context",
    "cell_positive",
    "star_without_positions",
];

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("stagedtree").chain(args.iter().copied()))
}

fn temp_file(content: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f
}

#[test]
fn every_fixture_validates() {
    for name in FIXTURES {
        let out = cli(&["validate", &fixture(name)]);
        assert_eq!(out.code, 0, "{name}: {}", out.stdout);
        assert!(out.stdout.starts_with("valid:"));
    }
}

#[test]
fn small_tree_counts() {
    let text = std::fs::read_to_string(fixture("two_by_three")).unwrap();
    let t = parse_tree_document(&text).unwrap();
    assert_eq!(t.num_vertices(), 9);
    assert_eq!(t.non_leaf_vertices().count(), 3);
    assert_eq!(t.num_atoms(), 6);
}

#[test]
fn unary_vertex_is_a_validation_error() {
    let doc = r#"{"root": "r", "vertices": [
        {"id": "r", "edges": [{"to": "a", "label": "x0"}, {"to": "b", "label": "x1"}]},
        {"id": "a", "edges": [{"to": "c", "label": "y0"}]}
    ]}"#;
    let err = parse_tree_document(doc).unwrap_err();
    assert!(matches!(err, DocumentError::Invalid(_)));
    assert!(err.to_string().contains("unary vertex"));

    let f = temp_file(doc);
    let out = cli(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("unary vertex `a`"));
}

#[test]
fn overlapping_label_sets_are_rejected() {
    let doc = r#"{"root": "r", "vertices": [
        {"id": "r", "edges": [{"to": "a", "label": "x0"}, {"to": "b", "label": "x1"}]},
        {"id": "a", "edges": [{"to": "c", "label": "x0"}, {"to": "d", "label": "y"}]}
    ]}"#;
    let err = parse_tree_document(doc).unwrap_err();
    assert!(err.to_string().contains("inconsistent stage labels"));
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse_tree_document("{\n  \"root\": \"r\",\n  \"vertices\": [,]\n}").unwrap_err();
    match err {
        DocumentError::Syntax { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let err = parse_tree_document(r#"{"vertices": []}"#).unwrap_err();
    assert!(err.to_string().contains("missing field `root`"));
    let err = parse_tree_document(r#"{"root": "r", "vertices": [], "colour": 1}"#).unwrap_err();
    assert!(err.to_string().contains("unknown field `colour`"));

    let f = temp_file("{ not json");
    let out = cli(&["generators", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.starts_with("error: parse error at line 1"));
}

#[test]
fn duplicate_vertex_entries_are_rejected() {
    let doc = r#"{"root": "r", "vertices": [
        {"id": "r", "edges": [{"to": "a", "label": "x0"}, {"to": "b", "label": "x1"}]},
        {"id": "r", "edges": []}
    ]}"#;
    let err = parse_tree_document(doc).unwrap_err();
    assert!(err.to_string().contains("vertices[1].id"));
}

#[test]
fn json_diagnostics() {
    let f = temp_file(r#"{"root": 3}"#);
    let out = cli(&["--json", "dim", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 2);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 1);

    let f = temp_file(
        r#"{"root": "r", "vertices": [{"id": "r", "edges": [{"to": "a", "label": "x"}]}]}"#,
    );
    let out = cli(&["dim", "--json", f.path().to_str().unwrap()]);
    assert_eq!(out.code, 1);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "validation");
    assert_eq!(v["error"]["violations"][0], "unary vertex `r`");

    let out = cli(&["--json", "frobnicate"]);
    assert_eq!(out.code, 2);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn model_generators_of_the_first_small_tree() {
    let out = cli(&[
        "generators",
        &fixture("one_stage_three_children"),
        "--ideal",
        "model",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "p4*p2 - p1*p5\np4*p3 - p1*p6\np5*p3 - p2*p6\n");
    let out = cli(&["--json", "generators", &fixture("one_stage_three_children")]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["ideal"], "model");
    assert_eq!(v["generators"].as_array().unwrap().len(), 3);
    assert_eq!(v["generators"][0]["origins"].as_array().unwrap().len(), 2);
}

#[test]
fn toric_verdict_with_witness() {
    let out = cli(&["toric", &fixture("repeated_label")]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "not toric\nstages are positions: no\n  v0 ~ v1 at (theta0, theta1): theta0 + theta1 - 1 != 0\n"
    );
    let out = cli(&["--json", "toric", &fixture("binary_coloured")]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["toric"], true);
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 0);
}

#[test]
fn dimension_output() {
    let out = cli(&["dim", &fixture("binary_uncoloured")]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().next(), Some("6"));
    let out = cli(&["--json", "dim", &fixture("binary_coloured")]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["dimension"], 4);
    assert_eq!(v["by_edges"], 4);
}

#[test]
fn positions_output() {
    let out = cli(&["positions", &fixture("cell_context")]);
    assert!(out
        .stdout
        .contains("stage {v3, v4} [die_green, survive_green] positions {v3, v4}\n"));
    assert!(out
        .stdout
        .contains("stage {v1, v2} [high_blue, low_blue] positions {v1} {v2}\n"));
}

#[test]
fn atoms_output() {
    let out = cli(&["atoms", &fixture("one_stage_three_children")]);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "p4\tw_1\ttau0*theta1");
}

#[test]
fn membership_of_points() {
    let tree = fixture("two_by_three");
    let member = temp_file("1/12 1/6 1/4\n1/12, 1/6, 1/4\n");
    let out = cli(&[
        "membership",
        &tree,
        "--point",
        member.path().to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("member\n"));

    let outside = temp_file("1/2 1/10 1/10 1/10 1/10 1/10");
    let out = cli(&[
        "membership",
        &tree,
        "--point",
        outside.path().to_str().unwrap(),
    ]);
    assert_eq!(out.code, 1);
    assert!(out
        .stdout
        .starts_with("not a member\nin simplex: yes\ninvariants vanish: no\n"));
    assert!(out.stdout.contains("p2*p4 + p3*p4 - p1*p5 - p1*p6 = -2/25"));

    let short = temp_file("1/2 1/2");
    let out = cli(&[
        "membership",
        &tree,
        "--point",
        short.path().to_str().unwrap(),
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("expected a point of length 6, got 2"));

    let junk = temp_file("1/2 half");
    let out = cli(&[
        "membership",
        &tree,
        "--point",
        junk.path().to_str().unwrap(),
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("`half` is not a rational number"));
}

#[test]
fn samples_are_seeded_members() {
    let tree = fixture("cell_positive");
    let out = cli(&["sample", &tree, "--seed", "5", "--count", "3"]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("5: ") && lines[2].starts_with("7: "));
    let again = cli(&["sample", &tree, "--seed", "6", "--count", "1"]);
    assert_eq!(again.stdout.trim_end(), lines[1]);

    let out = cli(&["--json", "sample", &tree, "--seed", "1", "--count", "100"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 100);
    assert!(samples.iter().all(|s| s["member"] == true));
}

#[test]
fn m2_export() {
    let out = cli(&["export", &fixture("nested_stages"), "--format", "m2"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "R = QQ[p1, p2, p3, p4, p5, p6];\nI = ideal(\n  p2*p4 - p1*p5,\n  p3*p4 + p3*p5 - p1*p6 - p2*p6\n);\n"
    );
    let out = cli(&[
        "export",
        &fixture("nested_stages"),
        "--format",
        "m2",
        "--annotate-stages",
    ]);
    assert!(out.stdout.starts_with("-- stage 1: v0 [theta0, theta1]\n"));

    let out = cli(&[
        "export",
        &fixture("cell_decomposable"),
        "--format",
        "text",
        "--ideal",
        "mpaths",
    ]);
    assert!(out.stdout.starts_with("ring QQ[p0000, p0001, "));
    assert!(out.stdout.contains("\nideal mpaths\n"));
}

#[test]
fn tree_export_round_trips() {
    for name in FIXTURES {
        let original =
            parse_tree_document(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        for annotate in [false, true] {
            let mut args = vec!["export", "--format", "tree"];
            if annotate {
                args.push("--annotate-stages");
            }
            let path = fixture(name);
            args.insert(1, &path);
            let out = cli(&args);
            assert_eq!(out.code, 0);
            let reparsed = parse_tree_document(&out.stdout).unwrap();
            assert_eq!(reparsed, original, "{name}");
        }
    }
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        vec!["generators", "--ideal", "mpaths"],
        vec!["--json", "toric"],
        vec!["sample", "--seed", "9", "--count", "4"],
        vec!["export", "--format", "m2"],
    ] {
        let path = fixture("cell_context");
        let mut full = args.clone();
        full.push(&path);
        assert_eq!(cli(&full), cli(&full));
    }
}

#[test]
fn help_and_usage_errors() {
    let out = cli(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("membership"));
    let out = cli(&[
        "generators",
        &fixture("one_stage_three_children"),
        "--ideal",
        "prime",
    ]);
    assert_eq!(out.code, 2);
    let out = cli(&["dim", "/nonexistent/tree.json"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("cannot read"));
}

#[test]
fn binary_matches_library_runner() {
    let path = fixture("repeated_label");
    let out = Command::new(env!("CARGO_BIN_EXE_stagedtree"))
        .args(["toric", &path])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        cli(&["toric", &path]).stdout
    );

    let out = Command::new(env!("CARGO_BIN_EXE_stagedtree"))
        .args(["validate", "/nonexistent"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
