use std::fs;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_entpow");

fn entpow(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RMT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn no_flags_is_a_usage_error() {
    let o = entpow(&["ep-curve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--da"));
    assert_eq!(entpow(&[]).status.code(), Some(2));
    assert_eq!(
        entpow(&["ep-curve", "--da", "2", "--db", "2", "--frobnicate"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        entpow(&["opent-curve", "--da", "2", "--db", "2", "--state", "fixed"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_exits_zero() {
    let o = entpow(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify"));
}

#[test]
fn table_matches_exact_rationals() {
    for (da, db) in [("2", "2"), ("4", "5"), ("2", "100")] {
        let o = entpow(&["table", "--da", da, "--db", db]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let rows: Vec<_> = text.lines().skip(2).collect();
        assert_eq!(rows.len(), 6, "{text}");
        for row in rows {
            let fields: Vec<_> = row.split(',').collect();
            let (p, q) = fields[1].split_once('/').unwrap_or((fields[1], "1"));
            // Numerators and denominators here stay far below 2^53, so the
            // quotient is correctly rounded.
            let exact = p.parse::<u64>().unwrap() as f64 / q.parse::<u64>().unwrap() as f64;
            assert_eq!(fields[2].parse::<f64>().unwrap(), exact, "{row}");
            let digits = fields[2]
                .chars()
                .filter(char::is_ascii_digit)
                .skip_while(|&c| c == '0')
                .count();
            assert_eq!(digits, 17, "{row}");
        }
    }
    let o = entpow(&["table", "--da", "4", "--db", "5"]);
    assert!(stdout(&o).contains("ep1 CUE,4/7,0.57142857142857140"));
}

#[test]
fn csv_runs_are_byte_identical() {
    let args = [
        "ep-curve",
        "--ensemble",
        "coe",
        "--state",
        "random-complex",
        "--da",
        "2",
        "--db",
        "3",
        "--samples",
        "700",
        "--seed",
        "5",
    ];
    let a = entpow(&[&args[..], &["--parallelism", "1"]].concat());
    let b = entpow(&[&args[..], &["--parallelism", "4"]].concat());
    let c = entpow(&[&args[..], &["--parallelism", "1"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,mean,stderr,count"));
    assert_eq!(lines.count(), 12);
    assert!(!text.contains('\r'));
}

#[test]
fn seed_comes_from_the_environment() {
    let base = [
        "asymptotic",
        "--da",
        "2",
        "--db",
        "2",
        "--samples",
        "300",
        "--parallelism",
        "1",
    ];
    let flagged = entpow(&[&base[..], &["--seed", "77"]].concat());
    let env = Command::new(BIN)
        .args(base)
        .env("RMT_SEED", "77")
        .output()
        .unwrap();
    let default = entpow(&base);
    assert_eq!(flagged.stdout, env.stdout);
    assert_ne!(flagged.stdout, default.stdout);
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let o = entpow(&[
        "form-factor",
        "--da",
        "2",
        "--db",
        "2",
        "--samples",
        "200",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert_eq!(v["metadata"]["config"]["kind"], "form-factor");
    assert!(v["metadata"]["library_version"].is_string());
    assert!(v["metadata"]["wall_seconds"].is_number());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let o = entpow(&[
        "asymptotic",
        "--da",
        "2",
        "--db",
        "2",
        "--samples",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"da": 2, "db": 3, "samples": 400, "seed": 3, "ensemble": "coe", "state": "random-real"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = entpow(&["asymptotic", "--config", cfg]);
    let explicit = entpow(&[
        "asymptotic",
        "--da",
        "2",
        "--db",
        "3",
        "--samples",
        "400",
        "--seed",
        "3",
        "--ensemble",
        "coe",
        "--state",
        "random-real",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, explicit.stdout);
    let overridden = entpow(&["asymptotic", "--config", cfg, "--seed", "4"]);
    assert_ne!(overridden.stdout, from_file.stdout);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"da": 2, "db": 3, "colour": "blue"}"#).unwrap();
    assert_eq!(
        entpow(&["asymptotic", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("nope.json");
    assert_eq!(
        entpow(&["asymptotic", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verify_without_a_closed_form_exits_two() {
    let o = entpow(&[
        "verify",
        "--kind",
        "opent-curve",
        "--ensemble",
        "coe",
        "--da",
        "4",
        "--db",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no closed-form target"));
}

#[test]
fn verify_small_runs() {
    let o = entpow(&[
        "verify",
        "--kind",
        "opent-curve",
        "--da",
        "2",
        "--db",
        "3",
        "--nmax",
        "3",
        "--samples",
        "4000",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = entpow(&[
        "verify",
        "--kind",
        "form-factor",
        "--da",
        "2",
        "--db",
        "3",
        "--samples",
        "4000",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // A tight gate on the same run must flag some rows.
    let o = entpow(&[
        "verify",
        "--kind",
        "form-factor",
        "--da",
        "2",
        "--db",
        "3",
        "--samples",
        "4000",
        "--seed",
        "1",
        "--gate-sigma",
        "0.01",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn fit_reports_coefficients() {
    let o = entpow(&[
        "fit",
        "--da",
        "2",
        "--db",
        "2",
        "--samples",
        "3000",
        "--seed",
        "2",
    ]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let text = stdout(&o);
    for key in ["c1 =", "c2 =", "c3 =", "c4 =", "residual rms", "plateau"] {
        assert!(text.contains(key), "{text}");
    }
}

/// The desk-scale CUE recipe: passes at n = 1 and on the plateau, and its
/// CSV starts at the n = 1 value.
#[test]
fn cue_ep_curve_recipe_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ep.csv");
    let o = entpow(&[
        "verify",
        "--kind",
        "ep-curve",
        "--ensemble",
        "cue",
        "--da",
        "4",
        "--db",
        "5",
        "--nmax",
        "40",
        "--samples",
        "100000",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let report = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{report}");
    assert!(report.contains("1,ep1,"));
    assert!(report.contains("20,plateau,"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(
        text.lines().nth(1).unwrap().starts_with("1,0.571"),
        "{text}"
    );
}
