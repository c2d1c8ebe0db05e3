use std::path::Path;
use std::process::{Command, Output};

const EXTERIOR: &str = r#"name = "F_2[x]/(x^2)"

[base]
ring = "prime-field"
prime = 2

[generators]
x = 1

[relations]
"x^2" = "0"

[truncation]
degree = 32

[algebroid]
name = "exterior"
object_ring = "F_2"
objects = 0

[maps.epsilon]
x = "0"

[maps.c]
x = "x"

[maps.delta]
x = "l(x) + r(x)"
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algebroid"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bp3(dir: &Path) {
    let o = run(
        dir,
        &["hopf", "bp", "--prime", "3", "--degree", "40", "--out", "bp3", "--height", "1", "--johnson-wilson", "1"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn generated_algebroids_pass_the_axioms() {
    let dir = tempfile::tempdir().unwrap();
    bp3(dir.path());
    let o = run(dir.path(), &["hopf", "axioms", "bp3/"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("\"pass\"").count(), 3);
}

#[test]
fn certificates() {
    let dir = tempfile::tempdir().unwrap();
    bp3(dir.path());
    let o = run(dir.path(), &["morita", "check", "bp3/jw1.toml", "--degree", "32", "--assume-flat"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"verdict\": \"conditional\""));

    std::fs::write(dir.path().join("standard.toml"), "").unwrap();
    let o = run(
        dir.path(),
        &["morita", "check", "bp3/jw1.toml", "--degree", "32", "--flat-witness", "standard.toml", "--no-corroborate"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"verdict\": \"yes\""));

    let map = std::fs::read_to_string(dir.path().join("bp3/jw1.toml")).unwrap();
    let broken = map.replace("t1 = \"t1\"", "t1 = \"0\"");
    assert_ne!(broken, map);
    std::fs::write(dir.path().join("bp3/broken.toml"), broken).unwrap();
    let o = run(dir.path(), &["morita", "check", "bp3/broken.toml", "--degree", "32", "--assume-flat"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("\"verdict\": \"no\""));
    assert!(stderr(&o).contains("degree"), "{}", stderr(&o));
}

#[test]
fn malformed_input_exits_two_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let text = "name = \"R\"\n\n[base]\nprime = 3\n\n[generators]\nx = 2\n\n[relations]\nx = \"x +* 1\"\n\n[truncation]\ndegree = 8\n";
    std::fs::write(dir.path().join("bad.toml"), text).unwrap();
    let o = run(dir.path(), &["ring", "check", "bad.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.toml:10"), "{}", stderr(&o));
    let o = run(dir.path(), &["ring", "check", "missing.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn ext_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ext.toml"), EXTERIOR).unwrap();
    let args = ["ext", "ext.toml", "--smax", "6", "--tmin", "0", "--tmax", "8", "--stable-weight", "16", "--weight", "16"];
    let mut chart_args = args.to_vec();
    chart_args.extend(["--format", "chart"]);
    let o = run(dir.path(), &chart_args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let chart = stdout(&o);
    let header = chart.lines().next().unwrap();
    let zero = header.find("  0 ").unwrap() + 2;
    let rows: Vec<&str> = chart.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let (_, cells) = row.split_once('|').unwrap();
        assert_eq!(cells.trim(), "1", "{row}");
        assert_eq!(row.rfind('1'), Some(zero), "{row}");
    }
    let mut outputs = Vec::new();
    for threads in ["1", "8", "8"] {
        let mut a = vec!["--threads", threads];
        a.extend(args);
        a.extend(["--format", "json"]);
        let o = run(dir.path(), &a);
        assert_eq!(code(&o), 0);
        outputs.push(o.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
    let csv = stdout(&run(dir.path(), &args));
    assert!(csv.starts_with("s,t,dim\n0,0,1\n"));
}

#[test]
fn comodule_checks() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ext.toml"), EXTERIOR).unwrap();
    let good = "name = \"two\"\nalgebroid = \"ext.toml\"\n\n[generators]\nm = 1\nn = 0\n\n[psi]\nm = \"1⊗m + x⊗n\"\nn = \"1⊗n\"\n";
    std::fs::write(dir.path().join("good.toml"), good).unwrap();
    let o = run(dir.path(), &["comodule", "check", "good.toml", "--rings"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bad = good.replace("n = \"1⊗n\"", "n = \"1⊗n + x⊗n\"");
    std::fs::write(dir.path().join("bad.toml"), bad).unwrap();
    let o = run(dir.path(), &["comodule", "check", "bad.toml"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let counitless = good.replace("\"1⊗m + x⊗n\"", "\"x⊗n\"");
    std::fs::write(dir.path().join("counitless.toml"), counitless).unwrap();
    let o = run(dir.path(), &["comodule", "check", "counitless.toml"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let skewed = good.replace("x⊗n", "0⊗n");
    std::fs::write(dir.path().join("skewed.toml"), skewed).unwrap();
    assert_eq!(code(&run(dir.path(), &["comodule", "check", "skewed.toml"])), 0);
}

#[test]
fn oracles_and_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    bp3(dir.path());
    let o = run(dir.path(), &["oracle", "groupoid", "bp3/k1.toml", "--ring", "F_9", "--budget", "5"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    std::fs::write(dir.path().join("ext.toml"), EXTERIOR).unwrap();
    let o = run(dir.path(), &["oracle", "groupoid", "ext.toml", "--ring", "F_2[e]/(e^2)"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"morphisms\": 2"), "{}", stdout(&o));
}

#[test]
fn descent_files() {
    let dir = tempfile::tempdir().unwrap();
    let cover = "base = \"F_3\"\n\n[[cover]]\nname = \"F_9\"\nroots = [[\"1\", \"0\"]]\n\n[module]\nrank = 2\nrelations = [[\"1\", \"1\"]]\n";
    std::fs::write(dir.path().join("f9.toml"), cover).unwrap();
    let o = run(dir.path(), &["descent", "f9.toml"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let planted = "base = \"F_2×F_2\"\n\n[[cover]]\nname = \"first\"\nideal = [\"(0,1)\"]\n\n[module]\nrank = 1\n";
    std::fs::write(dir.path().join("proj.toml"), planted).unwrap();
    let o = run(dir.path(), &["descent", "proj.toml"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("(0,1)"), "{}", stderr(&o));
}
