use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances").join(name)
}

fn adelic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adelic")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn hasse_ring_has_no_higher_cohomology() {
    let path = instance("hasse.toml");
    let t = json(&adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--format", "json"]));
    assert_eq!(t["degrees"]["0"]["rank"], 1);
    assert_eq!(t["degrees"]["0"]["torsion"].as_array().unwrap().len(), 0);
    assert_eq!(t["degrees"]["1"]["rank"], 0);
    for variant in ["l-lambda", "l-lambda-prime", "lambda-l"] {
        let o = adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--variant", variant, "--policy", "all-closed-points"]);
        assert_eq!(stdout(&o), "H^0 = R^1\nH^1 = 0\n", "{variant}");
    }
}

#[test]
fn torsion_keeps_its_s_part() {
    let path = instance("hasse_torsion.toml");
    let o = adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&o), "degree,multidegree,rank,torsion\n0,,1,2 12\n1,,0,\n");
}

#[test]
fn local_cohomology_table() {
    let path = instance("cech_xy.toml");
    let t = json(&adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--window=-6..2", "--format", "json"]));
    let h2 = t["degrees"]["2"].as_object().unwrap();
    // H^2 is one-dimensional exactly on the negative quadrant
    let mut count = 0;
    for a in -6..=2i64 {
        for b in -6..=2i64 {
            let v = h2.get(&format!("({a},{b})")).and_then(Value::as_u64).unwrap_or(0);
            assert_eq!(v, u64::from(a <= -1 && b <= -1), "({a},{b})");
            count += v;
        }
    }
    assert_eq!(count, 36);
    for s in ["0", "1"] {
        if let Some(m) = t["degrees"][s].as_object() {
            assert!(m.values().all(|v| v == 0));
        }
    }
}

#[test]
fn torus_in_degree_minus_two() {
    let path = instance("torus.toml");
    let o = adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--format", "csv"]);
    assert!(stdout(&o).contains("1,\"(-2)\",5,\n"), "{}", stdout(&o));
    assert!(stdout(&o).contains("0,\"(0)\",1,\n"));
}

#[test]
fn identical_runs_are_byte_identical() {
    for name in ["hasse.toml", "cech_xy.toml", "torus.toml"] {
        let path = instance(name);
        let a = adelic(&["dump", "--instance", path.to_str().unwrap()]);
        let b = adelic(&["dump", "--instance", path.to_str().unwrap()]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn dumps_have_the_expected_cubes() {
    let d = json(&adelic(&["dump", "--instance", instance("hasse.toml").to_str().unwrap()]));
    assert_eq!(d["cube"]["vertices"].as_array().unwrap().len(), 3);
    let d = json(&adelic(&["dump", "--instance", instance("monomial_primes.toml").to_str().unwrap()]));
    assert_eq!(d["cube"]["vertices"].as_array().unwrap().len(), 7);
    // matrices are strings
    let m = &d["complex"]["differentials"][0]["matrix"];
    assert!(m[0][0].is_string());
}

#[test]
fn empty_window_is_an_error() {
    let path = instance("monomial_primes.toml");
    let o = adelic(&["dump", "--instance", path.to_str().unwrap(), "--window=2..1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[window]"), "{}", stderr(&o));
}

#[test]
fn malformed_files_name_the_parse_stage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "format = 1\nkind = \"torus\"\norders = [1\n").unwrap();
    let o = adelic(&["cohomology", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.starts_with("error[parse] parse:") && e.contains("line 3"), "{e}");
    assert_eq!(e.lines().count(), 1);

    std::fs::write(&bad, "format = 1\nkind = \"torus\"\norders = [1]\nwindow = [0, 2]\ncolour = 3\n").unwrap();
    assert!(stderr(&adelic(&["cohomology", "--instance", bad.to_str().unwrap()])).starts_with("error[schema]"));
    std::fs::write(&bad, "format = 2\nkind = \"torus\"\n").unwrap();
    assert!(stderr(&adelic(&["cohomology", "--instance", bad.to_str().unwrap()])).starts_with("error[schema]"));
}

#[test]
fn check_suites() {
    let o = adelic(&["check", "delta-squared", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = json(&adelic(&["check", "subdivision", "--max-vertices", "5", "--cases", "5", "--format", "json"]));
    assert!(r["properties"].as_array().unwrap().iter().all(|p| p["passed"] == true));
    let o = adelic(&["check", "absorbative", "--instance", instance("hasse.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS transitivity pentagon"));
    let o = adelic(&["check", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[unsupported]"));
}

#[test]
fn split_three_quarters() {
    let o = adelic(&["split", "--primes", "2,3", "3/4", "0"]);
    assert_eq!(stdout(&o), "q = -3/4\na_2 = 0\na_3 = -3/4\nverified: true\n");
    let s = json(&adelic(&["split", "--primes", "2,3", "1,1,1@-2", "0", "--format", "json"]));
    assert_eq!(s["q"], "-3/4");
    assert_eq!(s["verified"], true);
    let s = json(&adelic(&["split", "--primes", "2,3", "--format", "json", "--", "-3/4", "0"]));
    assert_eq!(s["q"], "-1/4");
    let o = adelic(&["split", "--primes", "2,3", "1/2"]);
    assert!(stderr(&o).starts_with("error[shape-mismatch]"));
}

#[test]
fn poset_input_gives_the_circle() {
    let path = instance("punctured_square.toml");
    let o = adelic(&["cohomology", "--instance", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(stdout(&o), "degree,multidegree,rank,torsion\n0,,1,\n1,,1,\n", "{}", stderr(&o));
    let d = json(&adelic(&["dump", "--instance", path.to_str().unwrap()]));
    assert_eq!(d["cube"]["vertices"].as_array().unwrap().len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("cycle.toml");
    std::fs::write(&bad, "format = 1\nkind = \"poset\"\nelements = [\"a\", \"b\"]\ncovers = [[\"a\", \"b\"], [\"b\", \"a\"]]\n").unwrap();
    let o = adelic(&["cohomology", "--instance", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[invalid-poset]"), "{}", stderr(&o));
}
