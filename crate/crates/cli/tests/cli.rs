//! End-to-end runs of the binary on the fixture files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(dir: &str, file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(dir).join(file).display().to_string()
}

fn ucqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucqa")).args(args).output().expect("binary runs")
}

/// `sub -s .. -c .. -i ..` on one fixture directory, plus extra arguments.
fn on(dir: &str, sub: &str, extra: &[&str]) -> Output {
    let (s, c, i) = (fixture(dir, "schema.txt"), fixture(dir, "constraints.txt"), fixture(dir, "instance.txt"));
    let mut args = vec![sub, "-s", &s, "-c", &c, "-i", &i];
    args.extend_from_slice(extra);
    ucqa(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn inheritance_has_five_repairs_in_canonical_order() {
    let o = on("inheritance", "repairs", &[]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 5);
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted);
    assert!(lines.contains(&"{NF(Mary,no), NF(Steve,no), Parent(Mary,Donald), Parent(Steve,Donald)}".to_string()));
}

#[test]
fn three_conjunct_query_is_not_consistently_true() {
    let q = fixture("support", "query.txt");
    let o = on("support", "cqa", &["-q", &q]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("not consistently true"), "{out}");
    assert!(out.contains("witness repair {P(1,1), Q(1), Q(2), R(1,1,1)}"), "{out}");
    assert_eq!(on("support", "oracle-cqa", &["-q", &q]).status.code(), Some(1));
}

#[test]
fn explain_dumps_supports_and_blocks() {
    let q = fixture("support", "query.txt");
    let o = on("support", "cqa", &["-q", &q, "--explain"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["consistent"], false);
    assert_eq!(v["supports"]["Q(1)"].as_array().unwrap().len(), 2);
    assert!(v["witness"]["repair"].as_array().unwrap().iter().any(|f| f == "P(1,1)"));
}

#[test]
fn coffee_shop_answers() {
    let latte = fixture("coffee", "query.txt");
    let espresso = fixture("coffee", "query_espresso.txt");
    assert_eq!(on("coffee", "cqa", &["-q", &latte]).status.code(), Some(0));
    assert_eq!(on("coffee", "cqa", &["-q", &espresso]).status.code(), Some(1));
    assert_eq!(on("coffee", "oracle-cqa", &["-q", &latte]).status.code(), Some(0));
}

#[test]
fn check_repair_exit_codes() {
    let good = fixture("cascade", "repair.txt");
    let bad = fixture("cascade", "not_repair.txt");
    assert_eq!(on("cascade", "check-repair", &["--candidate", &good]).status.code(), Some(0));
    let o = on("cascade", "check-repair", &["--candidate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("P(2), R(2,3) -> P(3)"));
    let o = ucqa(&["--json", "check-repair", "-s", &fixture("cascade", "schema.txt"), "-c", &fixture("cascade", "constraints.txt"),
        "-i", &fixture("cascade", "instance.txt"), "--candidate", &bad]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], false);
}

#[test]
fn scripted_repair_reaches_the_empty_repair() {
    let order = fixture("trace", "order.txt");
    let script = fixture("trace", "b_script.txt");
    let o = on("trace", "repair", &["--trace", "--order", &order, "--b-script", &script]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("contains a banned set"), "{out}");
    assert_eq!(out.lines().last(), Some("{}"));
}

#[test]
fn seeded_repairs_are_stable() {
    let a = on("cascade", "repair", &["--seed", "7"]);
    let b = on("cascade", "repair", &["--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn hull_rules_and_graph() {
    let hull = stdout(&on("cascade", "hull", &[]));
    assert_eq!(hull.lines().count(), 7);
    assert!(hull.contains("not P(3)"));
    let rules = stdout(&on("cascade", "rules", &[]));
    assert_eq!(rules.lines().collect::<Vec<_>>(), ["P(1), R(1,2) -> P(2)", "P(2), R(2,3) -> P(3)"]);
    let dot = stdout(&on("cascade", "graph", &["--dot"]));
    assert!(dot.starts_with("graph conflicts {"));
    let json: serde_json::Value = serde_json::from_slice(&on("cascade", "graph", &[]).stdout).unwrap();
    assert_eq!(json["conflict_edges"].as_array().unwrap().len(), 2);
}

#[test]
fn unsupported_class_and_cap_and_parse_errors() {
    let q = fixture("inheritance", "query.txt");
    let o = on("inheritance", "cqa", &["-q", &q]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disjunctive"));
    assert_eq!(on("inheritance", "repairs", &["--cap", "3"]).status.code(), Some(4));
    assert_eq!(on("inheritance", "repairs", &["--method", "kept"]).status.code(), Some(3));
    let o = ucqa(&["hull", "-s", &fixture("cascade", "constraints.txt"), "-c", &fixture("cascade", "constraints.txt"),
        "-i", &fixture("cascade", "instance.txt")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(on("cascade", "hull", &[]).status.code(), Some(0));
    let o = ucqa(&["hull", "-s", "/nonexistent/schema.txt", "-c", "x", "-i", "y"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_files_round_trip_through_the_cli() {
    let dir = std::env::temp_dir().join(format!("ucqa-gen-{}", std::process::id()));
    let d = dir.display().to_string();
    let o = ucqa(&["gen", "--out", &d, "3col", "--vertices", "3", "--edges", "0-1,1-2,0-2"]);
    assert_eq!(o.status.code(), Some(0));
    let file = |n: &str| dir.join(n).display().to_string();
    // a triangle is 3-colourable, so some repair drops the query fact
    let o = ucqa(&["oracle-cqa", "-s", &file("schema.txt"), "-c", &file("constraints.txt"), "-i", &file("instance.txt"),
        "-q", &file("query.txt"), "--method", "kept"]);
    assert_eq!(o.status.code(), Some(1));

    let o = ucqa(&["gen", "--out", &d, "qbf", "--universal", "1", "--existential", "1", "--clauses", "1 2 2,-1 -2 -2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ucqa(&["oracle-cqa", "-s", &file("schema.txt"), "-c", &file("constraints.txt"), "-i", &file("instance.txt"),
        "-q", &file("query.txt")]);
    assert_eq!(o.status.code(), Some(0), "forall x exists y. (x or y) and (not x or not y) is valid");
    std::fs::remove_dir_all(&dir).ok();

    let a = ucqa(&["--json", "gen", "random", "--profile", "jd", "--seed", "3"]);
    let b = ucqa(&["--json", "gen", "random", "--profile", "jd", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["constraints"].as_str().unwrap().contains("jd"));
    assert_eq!(ucqa(&["gen", "3col", "--vertices", "2", "--edges", "0-0"]).status.code(), Some(2));
}
