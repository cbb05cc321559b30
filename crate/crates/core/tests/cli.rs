use std::path::Path;
use std::process::{Command, Output};

use bfly::bench::{read_csv, CSV_HEADER};

fn bfly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfly"))
        .args(args)
        .output()
        .expect("spawn bfly")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_results_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = bfly(&[
        "run",
        "--algo",
        "Exact",
        "--synth",
        "biclique:3,3",
        "--checkpoint-every",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    let parsed = read_csv(&out).unwrap();
    assert_eq!(parsed.rows.len(), 9);
    assert_eq!(parsed.rows[8].metrics.estimate, 9.0);
    assert_eq!(parsed.summary_value("final_error_pct"), Some("0"));
    assert_eq!(parsed.summary_value("algorithm"), Some("Exact"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let out = path_str(&out);
    let cases: [&[&str]; 5] = [
        &[
            "run",
            "--algo",
            "Fleet1",
            "--synth",
            "biclique:3,3",
            "--out",
            out,
        ],
        &[
            "run",
            "--algo",
            "Exact",
            "--synth",
            "biclique:3,3",
            "--reservoir",
            "5",
            "--out",
            out,
        ],
        &[
            "run",
            "--algo",
            "Nope",
            "--synth",
            "biclique:3,3",
            "--out",
            out,
        ],
        &[
            "run",
            "--algo",
            "Fleet1",
            "--reservoir",
            "0",
            "--synth",
            "biclique:3,3",
            "--out",
            out,
        ],
        &["run", "--algo", "Exact", "--out", out],
    ];
    for args in cases {
        let o = bfly(args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.edges");
    std::fs::write(&bad, "1 2\n1 x\n").unwrap();
    let out = dir.path().join("r.csv");
    let o = bfly(&[
        "run",
        "--algo",
        "Exact",
        "--input",
        path_str(&bad),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("none.edges");
    let o = bfly(&["count", "--input", path_str(&missing)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_list_succeed() {
    assert!(bfly(&["--help"]).status.success());
    let o = bfly(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "Exact", "Bern", "Fleet1", "Fleet2", "Fleet3", "SeqWin", "TimeWin",
    ] {
        assert!(text.contains(name), "{name} missing from list");
    }
}

#[test]
fn count_reports_dataset_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.edges");
    std::fs::write(&input, "% comment\n1 1\n1 2\n2 1\n2 2\n2 2\n").unwrap();
    let o = bfly(&["count", "--input", path_str(&input)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("edges=4\n"));
    assert!(text.contains("butterflies=1\n"));
    assert!(text.contains("duplicates_removed=1\n"));
}

#[test]
fn truth_and_cache_feed_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("s.bin");
    let truth = dir.path().join("t.csv");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let o = bfly(&[
        "cache",
        "--synth",
        "random:30,30,300",
        "--stream-seed",
        "4",
        "--out",
        path_str(&cache),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = bfly(&[
        "truth",
        "--input",
        path_str(&cache),
        "--out",
        path_str(&truth),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let file_truth = format!("file:{}", path_str(&truth));
    let common = [
        "run",
        "--algo",
        "Fleet3",
        "--reservoir",
        "60",
        "--seed",
        "2",
        "--trials",
        "3",
        "--no-timing",
    ];
    let mut a: Vec<&str> = common.to_vec();
    a.extend([
        "--input",
        path_str(&cache),
        "--truth",
        &file_truth,
        "--out",
        path_str(&out_a),
    ]);
    let mut b: Vec<&str> = common.to_vec();
    b.extend([
        "--synth",
        "random:30,30,300",
        "--stream-seed",
        "4",
        "--out",
        path_str(&out_b),
    ]);
    assert!(bfly(&a).status.success());
    assert!(bfly(&b).status.success());
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}
