use std::path::Path;
use std::process::{Command, Output};

fn entrotest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entrotest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn advise_prints_advice() {
    let out = entrotest(&["advise", "--n-bits", "5120", "--c", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["suggested_s"], 16);
    assert_eq!(v["cells_s"], 65536);
    assert_eq!(v["pellets_m"], 320);
}

#[test]
fn generate_randu_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("randu.bin");
    let out = entrotest(&[
        "generate",
        "--source",
        "randu",
        "--n-bits",
        "80",
        "--out",
        path(&file),
    ]);
    assert!(out.status.success());
    let bytes = std::fs::read(&file).unwrap();
    let mut gen = entrotest::processes::Randu::new(1).unwrap();
    assert_eq!(bytes, gen.bytes(10));
    // The eighth output of the stream from X0 = 1 is 1146624417.
    assert_eq!(bytes[7], 136);
}

#[test]
fn generate_is_reproducible() {
    let a = entrotest(&[
        "generate",
        "--source",
        "two-faced",
        "--k",
        "3",
        "--n-bits",
        "4096",
        "--seed",
        "9",
    ]);
    let b = entrotest(&[
        "generate",
        "--source",
        "two-faced",
        "--k",
        "3",
        "--n-bits",
        "4096",
        "--seed",
        "9",
    ]);
    let c = entrotest(&[
        "generate",
        "--source",
        "two-faced",
        "--k",
        "3",
        "--n-bits",
        "4096",
        "--seed",
        "10",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout.len(), 512);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn book_stack_rejects_randu() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("randu.bin");
    entrotest(&[
        "generate",
        "--source",
        "randu",
        "--n-bits",
        "1000000",
        "--out",
        path(&file),
    ]);
    let out = entrotest(&[
        "test",
        "--test",
        "bookstack",
        "--s",
        "20",
        "--a1-size",
        "5120",
        path(&file),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["decision"], "reject");
    assert_eq!(v["parameters"]["cuts"], serde_json::json!([5120, 1048576]));
    assert_eq!(v["parameters"]["words"], 50000);
}

#[test]
fn kt_accepts_fair_coin() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("coin.bin");
    entrotest(&[
        "generate",
        "--source",
        "bernoulli",
        "--n-bits",
        "80000",
        "--seed",
        "1",
        "--out",
        path(&file),
    ]);
    for test in ["kt", "kt-hat", "order"] {
        let out = entrotest(&["test", "--test", test, path(&file)]);
        assert!(out.status.success(), "{test}");
        assert_eq!(json(&out)["decision"], "accept", "{test}");
    }
}

#[test]
fn compressor_byte_rule() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zeros.bin");
    std::fs::write(&file, vec![0u8; 1000]).unwrap();
    let out = entrotest(&[
        "test",
        "--test",
        "compress",
        "--cmd",
        "head -c 999",
        path(&file),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["compressed_bytes"], 999);
    assert_eq!(v["decision"], "reject");
    let out = entrotest(&["test", "--test", "compress", "--cmd", "cat {}", path(&file)]);
    assert_eq!(json(&out)["decision"], "accept");
}

#[test]
fn experiment_csv_has_summary() {
    let out = entrotest(&[
        "experiment",
        "--source",
        "bernoulli",
        "--test",
        "bookstack",
        "--trials",
        "20",
        "--n-bits",
        "20000",
        "--seed",
        "5",
        "--format",
        "csv",
        "--workers",
        "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22);
    assert!(lines[21].starts_with("summary,"));
    assert!(lines[21].contains("trials=20;failures=0"));
}

#[test]
fn experiment_is_deterministic() {
    let run = |workers: &str| {
        let out = entrotest(&[
            "experiment",
            "--source",
            "two-faced",
            "--k",
            "4",
            "--test",
            "order",
            "--s",
            "8",
            "--trials",
            "12",
            "--n-bits",
            "8000",
            "--format",
            "csv",
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn directory_source_reads_every_file() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..3 {
        let file = dir.path().join(format!("f{i}.bin"));
        entrotest(&[
            "generate",
            "--source",
            "bernoulli",
            "--n-bits",
            "16000",
            "--seed",
            &i.to_string(),
            "--out",
            path(&file),
        ]);
    }
    let out = entrotest(&[
        "experiment",
        "--source",
        "dir",
        "--input-dir",
        path(dir.path()),
        "--test",
        "kt",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["trials"], 3);
    assert_eq!(v["outcomes"][2]["input"], "f2.bin");
}

#[test]
fn failed_trials_exit_with_two() {
    let out = entrotest(&[
        "experiment",
        "--source",
        "bernoulli",
        "--test",
        "compress",
        "--compressor-cmd",
        "exit 1",
        "--trials",
        "2",
        "--n-bits",
        "800",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        entrotest(&["experiment", "--test", "kt"]).status.code(),
        Some(1)
    );
    assert_eq!(
        entrotest(&["advise", "--n-bits", "1000", "--c", "-1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        entrotest(&[
            "experiment",
            "--source",
            "bernoulli",
            "--test",
            "kt",
            "--alpha",
            "2"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(entrotest(&["--help"]).status.code(), Some(0));
}
