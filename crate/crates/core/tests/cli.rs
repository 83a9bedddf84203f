//! End-to-end runs of the `fas-secrecy` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fas-secrecy"))
        .args(args)
        .env_remove("FAS_SECRECY_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"));
    line[key.len()..].trim().parse().unwrap()
}

#[test]
fn solve_worked_example() {
    let o = run(&["solve", "--gains", "2,1,1,0.5", "--P", "2", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("CASE3_SPLIT (beta = 0.500000000)"), "{text}");
    assert!(text.contains("PASS"), "{text}");
}

#[test]
fn solve_symmetric_is_zero() {
    let o = run(&["solve", "--gains", "1,1,1,1", "--P", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "R_EJ:"), 0.0);
}

#[test]
fn solve_deaf_eve_uses_full_budget_on_message() {
    let o = run(&["solve", "--gains", "2,1,0,0.5", "--P", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "p1:"), 2.0, "{text}");
}

#[test]
fn solve_rejects_malformed_gains() {
    assert_eq!(run(&["solve", "--gains", "1,2,x,4", "--P", "1"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--gains", "1,2,3", "--P", "1"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--P", "1"]).status.code(), Some(1));
}

#[test]
fn oracle_check_passes_and_repeats() {
    let a = run(&["oracle-check", "--count", "1000", "--seed", "4"]);
    let b = run(&["oracle-check", "--count", "1000", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let excess: f64 = text
        .lines()
        .find(|l| l.starts_with("max excess:"))
        .and_then(|l| l.split_whitespace().nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(excess <= 1e-3, "{text}");
}

#[test]
fn oracle_check_rejects_zero_count() {
    assert_eq!(run(&["oracle-check", "--count", "0"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("fig.csv");
    let o = run(&[
        "fig1",
        "--realizations",
        "2",
        "--N",
        "1",
        "--rho",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn fig1_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let path = dir.path().join(name);
        let o = run(&[
            "fig1",
            "--realizations",
            "100",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = read("a.csv");
    assert_eq!(a, read("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("scheme,N,W,rho_db,delta,realizations,seed,mean_rate,std_err\n"));
    assert!(!text.contains('\r'));
    // 2 schemes x 3 port counts x 6 SNR values
    assert_eq!(text.lines().count(), 1 + 36);
}

#[test]
fn fig2_single_port_count_covers_every_width() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let o = run(&[
        "fig2",
        "--N",
        "10",
        "--realizations",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let mut widths: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols[1], "10");
            cols[2].parse().unwrap()
        })
        .collect();
    widths.sort_by(f64::total_cmp);
    widths.dedup();
    let expected: Vec<f64> = (1..=18).map(|i| 0.5 * i as f64).collect();
    assert_eq!(widths, expected);
}
