use std::path::Path;
use std::process::{Command, Output};

fn seqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn census_csv_has_one_row_per_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = seqlab(&[
        "census",
        "--m",
        "8",
        "--limit",
        "1000000",
        "--format",
        "csv",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,x,count,N,empirical,predicted,deviation");
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("8,0,0,1000000,"));
    assert!(out.with_file_name("out.csv.manifest.json").exists());
}

#[test]
fn certify_emits_certificate() {
    let o = seqlab(&["certify", "--x", "0", "--m", "3", "--j", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["e"], 1);
    assert_eq!(v["density_lower_bound"], "1/6");
    assert_eq!(v["certified"], true);
}

#[test]
fn certificate_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    assert_eq!(
        code(&seqlab(&[
            "certify",
            "--x",
            "0",
            "--m",
            "5",
            "--j",
            "4",
            "--out",
            p(&cert)
        ])),
        0
    );
    assert_eq!(
        code(&seqlab(&["verify-certificate", p(&cert), "--full"])),
        0
    );

    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    let e = v["e"].as_u64().unwrap();
    v["e"] = (e + 1).into();
    v["density_lower_bound"] = format!("{}/{}", e + 1, v["denominator"]).into();
    let forged = dir.path().join("forged.json");
    std::fs::write(&forged, serde_json::to_vec(&v).unwrap()).unwrap();
    assert_eq!(code(&seqlab(&["verify-certificate", p(&forged)])), 1);

    let o = seqlab(&[
        "verify",
        "empirical",
        "--certificate",
        p(&cert),
        "--limit",
        "100000",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&seqlab(&[])), 2);
    assert_eq!(code(&seqlab(&["census", "--m", "8"])), 2);
    assert_eq!(code(&seqlab(&["frobnicate"])), 2);
    assert_eq!(
        code(&seqlab(&["certify", "--x", "0", "--m", "16", "--j", "3"])),
        2
    );
    assert_eq!(
        code(&seqlab(&["probe", "--epsilon", "-1", "--limit", "100"])),
        2
    );
    // failing growth range
    assert_eq!(code(&seqlab(&["growth", "--from", "2", "--to", "200"])), 1);
    // tuple budget
    let o = seqlab(&[
        "certify",
        "--x",
        "0",
        "--m",
        "3",
        "--j",
        "12",
        "--tuple-budget",
        "1000",
    ]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certified"], false);
}

#[test]
fn memory_budget_maps_to_exit_3() {
    let o = Command::new(env!("CARGO_BIN_EXE_seqlab"))
        .args(["census", "--m", "8", "--limit", "100000000"])
        .env("SEQLAB_MEM_BUDGET_MB", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn verification_subcommands_pass() {
    for args in [
        &["growth", "--from", "141", "--to", "100000"][..],
        &["lemmas"],
        &["verify", "structure", "--limit", "100000"],
        &["verify", "mod8", "--limit", "100000"],
        &["verify", "window", "--n", "100000", "--j", "8"],
        &["scan", "--max-m", "15", "--limit", "1000000"],
        &["probe", "--epsilon", "0.5", "--limit", "10000"],
    ] {
        let o = seqlab(args);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn interrupted_census_resumes_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let resumed = dir.path().join("resumed.csv");
    let ck = dir.path().join("run.sqlb");
    let limit = "2000000";

    let o = seqlab(&[
        "census",
        "--m",
        "12",
        "--limit",
        limit,
        "--format",
        "csv",
        "--out",
        p(&full),
    ]);
    assert_eq!(code(&o), 0);

    let o = seqlab(&[
        "census",
        "--m",
        "12",
        "--limit",
        limit,
        "--format",
        "csv",
        "--checkpoint",
        p(&ck),
        "--checkpoint-every",
        "300000",
        "--halt-after",
        "777777",
    ]);
    assert_eq!(code(&o), 3);
    let bytes = std::fs::read(&ck).unwrap();
    assert_eq!(&bytes[..4], b"SQLB");
    assert_eq!(
        u64::from_le_bytes(bytes[12..20].try_into().unwrap()),
        777_777
    );

    let o = seqlab(&[
        "census",
        "--m",
        "12",
        "--limit",
        limit,
        "--format",
        "csv",
        "--resume",
        p(&ck),
        "--checkpoint",
        p(&ck),
        "--out",
        p(&resumed),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(&full).unwrap(),
        std::fs::read(&resumed).unwrap()
    );

    // resuming against a different modulus is a usage error
    let o = seqlab(&["census", "--m", "7", "--limit", limit, "--resume", p(&ck)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn certify_checkpoint_resume_gives_same_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("search.json");
    let base = ["certify", "--x", "0", "--m", "7", "--j", "6"];
    let fresh: serde_json::Value = serde_json::from_slice(&seqlab(&base).stdout).unwrap();

    let mut args = base.to_vec();
    args.extend(["--checkpoint", p(&ck), "--tuple-budget", "5000"]);
    assert_eq!(code(&seqlab(&args)), 3);
    assert!(ck.exists());

    let mut args = base.to_vec();
    args.extend(["--checkpoint", p(&ck)]);
    let o = seqlab(&args);
    assert_eq!(code(&o), 0);
    let resumed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(resumed["e"], fresh["e"]);
    assert_eq!(resumed["witness_tuple"], fresh["witness_tuple"]);
}
