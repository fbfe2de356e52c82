use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn spl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, shift: &str) {
    let out = spl(
        &["synth", "--seed", "7", "--shift", shift, "--out-dir", "."],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_report(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn adapt_writes_a_report() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "4");
    let out = spl(
        &[
            "adapt",
            "--source",
            "source.txt",
            "--target",
            "target.txt",
            "--d1",
            "20",
            "--report",
            "r.json",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read_report(&dir.path().join("r.json"));
    assert!(report.contains("\"schema_version\": 1"));
    assert!(report.contains("\"fused/progressive\""));
    assert!(report.contains("\"wall_time_s\""));
    assert!(report.contains("\"failed_tasks\": 0"));
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "4");
    for name in ["a.json", "b.json"] {
        let out = spl(
            &[
                "adapt",
                "--source",
                "source.txt",
                "--target",
                "target.txt",
                "--d1",
                "15",
                "--d2",
                "10",
                "--omit-timing",
                "--report",
                name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_file_fails_the_task_but_not_its_siblings() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "4");
    let out = spl(
        &[
            "baseline-1nn",
            "--domain",
            "s=source.txt",
            "--domain",
            "t=target.txt",
            "--domain",
            "x=missing.txt",
            "--report",
            "r.json",
            "--omit-timing",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing.txt"), "{stderr}");
    let report = read_report(&dir.path().join("r.json"));
    // 6 ordered pairs, 4 involve the missing domain.
    assert!(report.contains("\"failed_tasks\": 4"));
    assert!(report.contains("\"1nn\""));
}

#[test]
fn ablate_reports_nine_methods() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "4");
    let out = spl(
        &[
            "ablate",
            "--source",
            "source.txt",
            "--target",
            "target.txt",
            "--d1",
            "20",
            "--iters",
            "3",
            "--report",
            "r.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let report = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    for labeling in ["ncp", "sp", "fused"] {
        for selection in ["none", "all", "progressive"] {
            assert!(report.contains(&format!("\"method\": \"{labeling}/{selection}\"")));
        }
    }
}

#[test]
fn rank_truncation_warning_reaches_stderr_and_report() {
    let dir = TempDir::new().unwrap();
    // The last coordinate is constant, so only 2 principal directions exist.
    let rows = ["0 1 0 5", "0 1.2 0.1 5", "1 0 1 5", "1 0.1 1.3 5"];
    let file = format!("# d=3 n=4 labeled=1\n{}\n", rows.join("\n"));
    std::fs::write(dir.path().join("s.txt"), &file).unwrap();
    std::fs::write(dir.path().join("t.txt"), &file).unwrap();
    let out = spl(
        &[
            "adapt", "--source", "s.txt", "--target", "t.txt", "--d1", "3", "--d2", "2", "--iters",
            "2", "--report", "r.json",
        ],
        dir.path(),
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{stderr}");
    assert!(stderr.contains("warning:"), "{stderr}");
    let report = read_report(&dir.path().join("r.json"));
    assert!(report.contains("\"warnings\": [\n        \""), "{report}");
}

#[test]
fn config_error_reaches_stderr() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "4");
    // d2 above d1 is a configuration error.
    let out = spl(
        &[
            "adapt",
            "--source",
            "source.txt",
            "--target",
            "target.txt",
            "--d1",
            "10",
            "--d2",
            "12",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("d2"));
}

#[test]
fn malformed_feature_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "0");
    std::fs::write(
        dir.path().join("bad.txt"),
        "# d=20 n=1 labeled=1\n0 1 2 3\n",
    )
    .unwrap();
    let out = spl(
        &[
            "baseline-1nn",
            "--source",
            "source.txt",
            "--target",
            "bad.txt",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn bad_domain_syntax_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = spl(
        &["baseline-1nn", "--domain", "nopath", "--domain", "b=x"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
