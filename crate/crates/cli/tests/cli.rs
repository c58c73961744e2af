use std::process::{Command, Output};

fn chowla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chowla")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn avg_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = chowla(&["avg", "--form", "1,0,0,2", "--alpha", "mu", "--N", "10,20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,points,sum,average,envelope,ratio");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,440,"));
    assert!(lines[1].ends_with(",NA,NA"));
}

#[test]
fn thread_count_leaves_output_unchanged() {
    let a = chowla(&["avg", "--form", "1,0,0,2", "--N", "30,60", "--threads", "1"]);
    let b = chowla(&["avg", "--form", "1,0,0,2", "--N", "30,60", "--threads", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn coset_and_coprime_modes() {
    let o = chowla(&["avg", "--form", "1,0,0,2", "--N", "20", "--coset", "coset:5,0,0,1;1,0", "--coprime-only", "--alpha", "lambda"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let points: u64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let want = (-20i64..=20)
        .flat_map(|x| (-20i64..=20).map(move |y| (x, y)))
        .filter(|&(x, y)| (x - 1).rem_euclid(5) == 0 && gcd(x.unsigned_abs(), y.unsigned_abs()) == 1)
        .count() as u64;
    assert_eq!(points, want);
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# example\nform=1,0,0,2\nalpha=omega\nN=10,20\nthreads=2\n").unwrap();
    let from_file = chowla(&["avg", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(stdout(&from_file).lines().count(), 3);
    let overridden = chowla(&["avg", "--config", cfg.to_str().unwrap(), "--N", "10"]);
    assert_eq!(stdout(&overridden).lines().count(), 2);
    std::fs::write(&cfg, "form=1,0,0,2\nN=10\nbogus=1\n").unwrap();
    assert_eq!(chowla(&["avg", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(chowla(&["avg", "--form", "1,0,0,-8", "--N", "10"]).status.code(), Some(2));
    assert_eq!(chowla(&["avg", "--form", "1,0,0,2", "--N", "20,10"]).status.code(), Some(2));
    assert_eq!(chowla(&["avg", "--form", "1,0,0,2", "--N", "10", "--alpha", "zeta"]).status.code(), Some(2));
    assert_eq!(chowla(&["avg", "--N", "10"]).status.code(), Some(2));
    assert_eq!(chowla(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(chowla(&["verify", "--suite", "nope", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn range_errors_exit_3() {
    let o = chowla(&["avg", "--form", "1,0,0,2", "--N", "10,100000000"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("10,440,"));
    assert_eq!(text.lines().nth(2).unwrap(), "100000000,NA,NA,NA,NA,NA");
}

#[test]
fn identities_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = chowla(&["verify", "--suite", "identities", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn injected_fault_fails_with_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let o = chowla(&["verify", "--suite", "sieve", "--out", dir.path().to_str().unwrap(), "--inject-fault", "lambda"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("counterexample: b = "), "{err}");
    let saved = std::fs::read_to_string(dir.path().join("counterexample.txt")).unwrap();
    assert!(saved.contains("buchstab-split"));
}

#[test]
fn all_suite_writes_postulate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = chowla(&["verify", "--suite", "all", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["x3+2y3", "x3+2y3-mod5", "x3+xy2+y3"] {
        let text = std::fs::read_to_string(dir.path().join(format!("postulates_{name}.csv"))).unwrap();
        assert!(text.starts_with("postulate,params,measured,status\n"));
        assert!(!text.contains("FAIL"));
    }
}
