use std::process::{Command, Output};

fn treestrip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treestrip")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_golden_passes() {
    let o = treestrip(&["check", "--A", "G", "--M", "G", "--ray", "f1^inf", "--n", "1..4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("check,ok,detail\n"));
    assert!(s.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")), "{s}");
}

#[test]
fn check_flags_imprimitive_a() {
    let o = treestrip(&["check", "--A", "[[0,1],[1,0]]", "--M", "G", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("A primitive,false,A not primitive"));
}

#[test]
fn check_flags_inadmissible_ray() {
    let o = treestrip(&["check", "--M", "crt:3", "--ray", "f2(f2)^inf", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("ray admissible,false"), "{s}");
    assert!(s.contains("M[2][2] = 0"), "{s}");
}

#[test]
fn bad_config_exits_2() {
    for args in [
        vec!["strip", "--A", "[[1,2],[1,0]]"],
        vec!["strip", "--M", "crt:1"],
        vec!["strip", "--ray", "f1"],
        vec!["strip", "--n", "9..2"],
        vec!["strip", "--M", "crt:3", "--ray", "f2(f2)^inf"],
        vec!["entropy", "--config", "/nonexistent/config.json"],
    ] {
        let o = treestrip(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn runtime_failures_exit_1() {
    let o = treestrip(&["strip", "--M", "E:4", "--n", "12", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("size guard"));
    let o = treestrip(&["strip", "--n", "1", "--iterative", "--m-max", "2", "--ray", "f2(f1 f2)^inf"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn converge_csv_columns() {
    let o = treestrip(&["converge", "--ray", "f1^inf", "--n", "2..14"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("n,h_strip,h_ref,residual,method,fitted_slope"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    let last_residual: f64 = rows[12][3].parse().unwrap();
    assert!(last_residual <= 0.02);
    let slope: f64 = rows[0][5].parse().unwrap();
    assert!(slope < 0.0);
}

#[test]
fn entropy_full_shift_is_constant() {
    let o = treestrip(&["entropy", "--A", "E:2", "--M", "E:2", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in s.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "0.69314718056");
        assert_eq!(cols[4], "0.69314718056");
    }
}

#[test]
fn verify_reports_no_mismatch() {
    let o = treestrip(&["verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains(" 0 mismatches"));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["strip", "--M", "crt:3", "--A", "[[1,1,0],[0,1,1],[1,0,1]]", "--ray", "f1f2(f3 f1 f1)^inf", "--n", "1..6", "--format", "json"];
    let a = treestrip(&args);
    let b = treestrip(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v1 = treestrip(&["verify", "--seed", "7", "--format", "json"]);
    let v2 = treestrip(&["verify", "--seed", "7", "--format", "json", "--jobs", "2"]);
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"A": "G", "M": "G", "ray": {"prefix": [], "period": [1, 2]}, "n": [2, 4], "mode": "exact", "format": "csv", "seed": 1}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let o = treestrip(&["strip", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = std::fs::read_to_string(&out).unwrap();
    assert_eq!(s.lines().count(), 4);
    assert!(s.starts_with("n,method,value,denominator\n2,closed_form,"));

    let o = treestrip(&["strip", "--config", cfg.to_str().unwrap(), "--n", "3"]);
    assert_eq!(stdout(&o).lines().count(), 2);

    std::fs::write(&cfg, r#"{"A": "G", "bogus": 1}"#).unwrap();
    let o = treestrip(&["strip", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strip_iterative_agrees_with_closed_form() {
    let closed = stdout(&treestrip(&["strip", "--ray", "(f1 f2)^inf", "--n", "3"]));
    let iter = stdout(&treestrip(&["strip", "--ray", "(f1 f2)^inf", "--n", "3", "--iterative", "--m-max", "1000"]));
    let value = |s: &str| -> f64 { s.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap() };
    assert!((value(&closed) - value(&iter)).abs() < 1e-9);
    assert!(iter.contains(",iterative,"));
}
