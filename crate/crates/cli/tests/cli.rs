use std::path::PathBuf;
use std::process::{Command, Output};

fn hiercache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiercache")).args(args).env_remove("HIERCACHE_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn row<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    text.lines()
        .find(|l| l.split_whitespace().next() == Some(name))
        .unwrap_or_else(|| panic!("no {name} row in\n{text}"))
        .split_whitespace()
        .collect()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hiercache-cli-{}-{name}", std::process::id()))
}

#[test]
fn simulate_hierarchical_point() {
    let o = hiercache(&[
        "simulate",
        "--k1",
        "3",
        "--k2",
        "2",
        "--n",
        "6",
        "--t",
        "2",
        "--alpha",
        "1/2",
        "--demands",
        "1,2,3,4,5,6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.matches("DECODE OK").count(), 6);
    assert_eq!(row(&out, "R1")[1..], ["3.1667", "3.1667"]);
    assert_eq!(row(&out, "Rbar")[1..], ["7.9667", "7.9667"]);
    assert!(out.contains("R2 mirror 3    1.6000       1.6000"));
}

#[test]
fn simulate_single_mirror() {
    // K = N = 4, alpha = 1/2: R1 = 7/2 - M1, R2 = 7/2
    for (m1, r1) in [("0", "3.5000"), ("1", "2.5000"), ("2", "1.5000")] {
        let o = hiercache(&[
            "simulate",
            "--single-mirror",
            "--k2",
            "4",
            "--n",
            "4",
            "--alpha",
            "1/2",
            "--m1",
            m1,
            "--demands",
            "1,2,3,4",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert_eq!(out.matches("DECODE OK").count(), 4);
        assert_eq!(row(&out, "R1")[1..], [r1, r1]);
        assert_eq!(row(&out, "R2")[1..], ["3.5000", "3.5000"]);
    }
    let o = hiercache(&["simulate", "--single-mirror", "--k1", "2", "--k2", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_demands_exit_3() {
    let base = ["simulate", "--k1", "3", "--k2", "2", "--n", "6", "--t", "2", "--alpha", "1/2"];
    for d in ["1,2,3", "1,2,3,4,5,7", "1,2,x,4,5,6", "0,1,2,3,4,5"] {
        let mut args = base.to_vec();
        args.extend(["--demands", d]);
        assert_eq!(hiercache(&args).status.code(), Some(3), "demands {d}");
    }
}

#[test]
fn bad_config_exit_2() {
    assert_eq!(hiercache(&["simulate", "--k1", "3", "--k2", "2", "--n", "6", "--t", "9"]).status.code(), Some(2));
    assert_eq!(
        hiercache(&["simulate", "--k1", "3", "--k2", "2", "--n", "6", "--t", "2", "--alpha", "3/2"]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_grid_and_determinism() {
    let args = ["sweep", "--k1", "3", "--k2", "2", "--n", "6", "--t", "1..5"];
    let a = hiercache(&args);
    let b = hiercache(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,K1,K2,N,t,alpha,M1,M2,Mbar,R1,R2,Rbar,Rsum,Tconc,Tseq"));
    assert_eq!(lines.filter(|l| l.starts_with("proposed,")).count(), 55);
}

#[test]
fn sweep_writes_file_and_contains_sharing_corners() {
    let path = temp("sweep.csv");
    let o = hiercache(&[
        "sweep",
        "--k1",
        "2",
        "--k2",
        "3",
        "--n",
        "6",
        "--schemes",
        "proposed,kwc",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    // (Mbar, Rbar) corners of the memory-sharing chain
    assert!(text.lines().any(|l| l.contains(",12.000000,") && l.contains(",3.866667,")));
    assert!(text.lines().any(|l| l.contains(",16.800000,") && l.contains(",2.550000,")));
    // alpha = 0 rows for K2 < t < K coincide with KWC rows
    for t in 4..6 {
        let pick = |scheme: &str| {
            text.lines()
                .find(|l| {
                    l.starts_with(&format!("{scheme},2,3,6,{t},"))
                        && (scheme == "KWC" || l.contains(&format!(",{t},0.000000,")))
                })
                .map(|l| l.split(',').skip(6).collect::<Vec<_>>())
        };
        assert_eq!(pick("proposed").unwrap(), pick("KWC").unwrap());
    }
}

#[test]
fn compare_reproduces_comparison_tables() {
    let o = hiercache(&["compare", "--k1", "3", "--k2", "2", "--n", "3", "--mbar", "3.2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(row(&out, "proposed")[1..7], ["0.2667", "0.4000", "3.2000", "1.9167", "1.6000", "6.7167"]);
    assert_eq!(row(&out, "ZWXWL")[4..7], ["2.0333", "1.9500", "7.8833"]);
    let o = hiercache(&["compare", "--k1", "3", "--k2", "2", "--n", "6", "--mbar", "7.2"]);
    let out = stdout(&o);
    assert_eq!(row(&out, "proposed")[1..3], ["0.3755", "1.0122"]);
    assert_eq!(row(&out, "ZWXWL")[6], "7.6500");
    assert_eq!(hiercache(&["compare", "--k1", "3", "--k2", "2", "--n", "6", "--mbar", "100"]).status.code(), Some(2));
}

#[test]
fn region_reports() {
    let out = stdout(&hiercache(&["region", "--k1", "2", "--k2", "3", "--n", "6", "--alpha", "0.2"]));
    assert_eq!(out.lines().last(), Some("Region I"));
    let out = stdout(&hiercache(&["region", "--k1", "3", "--k2", "2", "--n", "6", "--alpha", "0.5"]));
    assert_eq!(out.lines().last(), Some("Region II"));
}

#[test]
fn config_file_with_flag_override() {
    let path = temp("run.conf");
    std::fs::write(&path, "# worked point\nk1 = 3\nk2 = 2\nn = 6\nt = 1\nalpha = 1/2\ndemands = 1,2,3,4,5,6\n")
        .unwrap();
    let o = hiercache(&["simulate", "--config", path.to_str().unwrap(), "--t", "2"]);
    std::fs::remove_file(&path).unwrap();
    assert!(o.status.success());
    assert_eq!(row(&stdout(&o), "Rbar")[1], "7.9667");
}

#[test]
fn seed_env_fallback_is_logged() {
    let o = Command::new(env!("CARGO_BIN_EXE_hiercache"))
        .args(["simulate", "--k1", "2", "--k2", "2", "--n", "2", "--t", "1", "--alpha", "1/2"])
        .env("HIERCACHE_SEED", "42")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed: 42"));
}

#[test]
fn verify_small_bounds() {
    let o = hiercache(&["verify", "--max-k", "3", "--max-n", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
    assert!(out.contains("decode totality"));
}
