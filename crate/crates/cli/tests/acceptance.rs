//! CLI-level acceptance: byte-identical artifacts under a fixed seed
//! (criterion 10), plus the end-to-end pipeline smoke run.

use std::path::Path;
use std::process::Command;

fn dnsamp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnsamp"))
}

fn run_ok(args: &[&str]) -> String {
    let out = dnsamp().args(args).output().expect("spawn dnsamp");
    assert!(
        out.status.success(),
        "dnsamp {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

/// Drive every subcommand once with a fixed seed into `dir`.
fn run_all(dir: &Path) {
    let d = dir.to_str().unwrap();
    let dataset = dir.join("dataset.fds");
    let dataset = dataset.to_str().unwrap();
    let model = dir.join("model.ckpt");
    let model = model.to_str().unwrap();
    let pcap = dir.join("capture.pcap");
    let pcap = pcap.to_str().unwrap();

    run_ok(&[
        "--seed", "7", "--out-dir", d, "synth", "--n-benign", "260", "--n-attack-bursts", "15",
        "--burst-size", "4", "--duration-s", "9000",
    ]);
    run_ok(&["--seed", "7", "--out-dir", d, "ingest", "--pcap", pcap]);
    let flows_csv = dir.join("flows.csv");
    run_ok(&[
        "--seed", "7", "--out-dir", d, "preprocess", "--pcap", pcap, "--export-csv",
        flows_csv.to_str().unwrap(),
    ]);
    run_ok(&[
        "--seed", "7", "--out-dir", d, "select-features", "--pcap", pcap, "--population", "8",
        "--generations", "3",
    ]);
    run_ok(&[
        "--seed", "7", "--out-dir", d, "train", "--dataset", dataset, "--lr", "0.3", "--epochs",
        "4", "--batch", "8",
    ]);
    run_ok(&[
        "--seed", "7", "--out-dir", d, "attack-ead", "--dataset", dataset, "--model", model,
        "--steps", "25",
    ]);
    run_ok(&[
        "--seed", "7", "--out-dir", d, "attack-charswap", "--dataset", dataset, "--model", model,
    ]);
    let ead = dir.join("ead_report.csv");
    let cs = dir.join("charswap_report.csv");
    run_ok(&[
        "--seed", "7", "--out-dir", d, "evaluate", "--dataset", dataset, "--model", model,
        "--ead-report", ead.to_str().unwrap(), "--charswap-report", cs.to_str().unwrap(),
    ]);
    run_ok(&["--seed", "7", "--out-dir", d, "bench", "--sizes", "300,600"]);
}

#[test]
fn criterion_10_identical_seed_identical_artifacts() {
    let base = tempfile::tempdir().unwrap();
    let d1 = base.path().join("run1");
    let d2 = base.path().join("run2");
    std::fs::create_dir_all(&d1).unwrap();
    std::fs::create_dir_all(&d2).unwrap();
    run_all(&d1);
    run_all(&d2);

    // Every artifact must be byte-identical across reruns. The benchmark's
    // timing values are wall-clock and exempt; its generated captures and the
    // table's shape are checked instead.
    let artifacts = [
        "capture.pcap",
        "features.csv",
        "flows.csv",
        "dataset.fds",
        "feature_mask.txt",
        "ga_history.csv",
        "model.ckpt",
        "train_history.csv",
        "ead_report.csv",
        "ead_summary.json",
        "charswap_report.csv",
        "charswap_summary.json",
        "confusion_baseline.json",
        "confusion_baseline.txt",
        "confusion_ead.json",
        "confusion_charswap.json",
        "attack_comparison.csv",
        "bench_300.pcap",
        "bench_600.pcap",
    ];
    for name in artifacts {
        assert_eq!(
            read(&d1, name),
            read(&d2, name),
            "artifact {name} differs between identically-seeded runs"
        );
    }
    let timing = String::from_utf8(read(&d1, "timing.csv")).unwrap();
    let lines: Vec<&str> = timing.lines().collect();
    assert_eq!(lines.len(), 7, "6 stage rows plus header");
    println!("criterion 10: PASS - {} artifacts byte-identical across reruns", artifacts.len());
}

#[test]
fn full_pipeline_smoke_on_2000_packets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let pcap = dir.path().join("capture.pcap");
    let dataset = dir.path().join("dataset.fds");
    let model = dir.path().join("model.ckpt");

    let synth_out = run_ok(&[
        "--seed", "42", "--out-dir", d, "synth", "--n-benign", "1300", "--n-attack-bursts",
        "140", "--burst-size", "5", "--duration-s", "36000",
    ]);
    assert!(synth_out.contains("wrote 2000 packets"));

    run_ok(&["--seed", "42", "--out-dir", d, "preprocess", "--pcap", pcap.to_str().unwrap()]);
    run_ok(&[
        "--seed", "42", "--out-dir", d, "train", "--dataset", dataset.to_str().unwrap(), "--lr",
        "0.3", "--epochs", "6", "--batch", "8",
    ]);
    run_ok(&[
        "--seed", "42", "--out-dir", d, "attack-ead", "--dataset", dataset.to_str().unwrap(),
        "--model", model.to_str().unwrap(), "--steps", "60",
    ]);
    run_ok(&[
        "--seed", "42", "--out-dir", d, "attack-charswap", "--dataset",
        dataset.to_str().unwrap(), "--model", model.to_str().unwrap(),
    ]);
    let eval_out = run_ok(&[
        "--seed", "42", "--out-dir", d, "evaluate", "--dataset", dataset.to_str().unwrap(),
        "--model", model.to_str().unwrap(), "--ead-report",
        dir.path().join("ead_report.csv").to_str().unwrap(), "--charswap-report",
        dir.path().join("charswap_report.csv").to_str().unwrap(),
    ]);

    // A comparison table with both attack rows and the reference columns.
    assert!(eval_out.contains("EAD"), "missing EAD row:\n{eval_out}");
    assert!(eval_out.contains("TextAttack"), "missing char-swap row:\n{eval_out}");
    assert!(eval_out.contains("67.63"), "missing reference point:\n{eval_out}");
    assert!(eval_out.contains("24.95"), "missing reference point:\n{eval_out}");
    assert!(dir.path().join("attack_comparison.csv").exists());
}

#[test]
fn persisted_intermediates_match_the_single_shot_run() {
    // pcap -> archive directly, and pcap -> feature csv -> archive, must be
    // bit-for-bit identical: the file handoff between stages is lossless.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let pcap = dir.path().join("capture.pcap");
    run_ok(&[
        "--seed", "11", "--out-dir", d, "synth", "--n-benign", "200", "--n-attack-bursts", "10",
        "--burst-size", "4", "--duration-s", "8000",
    ]);
    run_ok(&["--seed", "11", "--out-dir", d, "ingest", "--pcap", pcap.to_str().unwrap()]);
    run_ok(&[
        "--seed", "11", "--out-dir", d, "preprocess", "--pcap", pcap.to_str().unwrap(), "--out",
        dir.path().join("direct.fds").to_str().unwrap(),
    ]);
    run_ok(&[
        "--seed", "11", "--out-dir", d, "preprocess", "--features",
        dir.path().join("features.csv").to_str().unwrap(), "--out",
        dir.path().join("via_csv.fds").to_str().unwrap(),
    ]);
    assert_eq!(read(dir.path(), "direct.fds"), read(dir.path(), "via_csv.fds"));
}

#[test]
fn ead_supports_both_bound_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let pcap = dir.path().join("capture.pcap");
    let dataset = dir.path().join("dataset.fds");
    let model = dir.path().join("model.ckpt");
    run_ok(&[
        "--seed", "13", "--out-dir", d, "synth", "--n-benign", "200", "--n-attack-bursts", "12",
        "--burst-size", "4", "--duration-s", "8000",
    ]);
    run_ok(&["--seed", "13", "--out-dir", d, "preprocess", "--pcap", pcap.to_str().unwrap()]);
    run_ok(&[
        "--seed", "13", "--out-dir", d, "train", "--dataset", dataset.to_str().unwrap(),
        "--lr", "0.3", "--epochs", "3", "--batch", "8",
    ]);
    for mode in ["paper", "normalized"] {
        run_ok(&[
            "--seed", "13", "--out-dir", d, "attack-ead", "--dataset",
            dataset.to_str().unwrap(), "--model", model.to_str().unwrap(), "--steps", "15",
            "--bounds", mode, "--out-csv",
            dir.path().join(format!("ead_{mode}.csv")).to_str().unwrap(), "--out-json",
            dir.path().join(format!("ead_{mode}.json")).to_str().unwrap(),
        ]);
        assert!(dir.path().join(format!("ead_{mode}.csv")).exists());
    }
}

#[test]
fn zero_epoch_training_writes_the_initialization() {
    // Two different datasets, same seed and dims: with zero epochs the
    // checkpoints must match because nothing was learned from the data.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for (tag, bursts) in [("a", "12"), ("b", "20")] {
        run_ok(&[
            "--seed", "5", "--out-dir", d, "synth", "--out",
            dir.path().join(format!("{tag}.pcap")).to_str().unwrap(), "--n-benign", "150",
            "--n-attack-bursts", bursts, "--burst-size", "4", "--duration-s", "8000",
        ]);
        run_ok(&[
            "--seed", "5", "--out-dir", d, "preprocess", "--pcap",
            dir.path().join(format!("{tag}.pcap")).to_str().unwrap(), "--out",
            dir.path().join(format!("{tag}.fds")).to_str().unwrap(),
        ]);
        run_ok(&[
            "--seed", "5", "--out-dir", d, "train", "--dataset",
            dir.path().join(format!("{tag}.fds")).to_str().unwrap(), "--epochs", "0", "--out",
            dir.path().join(format!("{tag}.ckpt")).to_str().unwrap(), "--history",
            dir.path().join(format!("{tag}_hist.csv")).to_str().unwrap(),
        ]);
    }
    assert_eq!(read(dir.path(), "a.ckpt"), read(dir.path(), "b.ckpt"));
    // Empty history: header only.
    let hist = String::from_utf8(read(dir.path(), "a_hist.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1);
}

#[test]
fn exit_codes_distinguish_validation_from_io() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    // Missing input file: an I/O failure, exit 2.
    let out = dnsamp()
        .args(["--out-dir", d, "ingest", "--pcap", "/nonexistent/x.pcap"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Not a pcap: validation, exit 1.
    let bad = dir.path().join("bad.pcap");
    std::fs::write(&bad, [0u8; 64]).unwrap();
    let out = dnsamp()
        .args(["--out-dir", d, "ingest", "--pcap", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error:"), "diagnostic missing: {err}");

    // Malformed feature csv content: validation, exit 1.
    let bad_csv = dir.path().join("bad.csv");
    std::fs::write(&bad_csv, "not,a,feature,header\n1,2,3,4\n").unwrap();
    let out = dnsamp()
        .args(["--out-dir", d, "preprocess", "--features", bad_csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // Unknown config key: validation, exit 1.
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "nonsense.key = 3\n").unwrap();
    let out = dnsamp()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            d,
            "synth",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // Bad flag value: validation, exit 1.
    let out = dnsamp()
        .args(["--out-dir", d, "synth", "--burst-size", "1", "--n-attack-bursts", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn config_file_drives_synthesis_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "seed = 9\nsynth.n_benign = 40\nsynth.n_attack_bursts = 0\nsynth.duration_s = 500\n",
    )
    .unwrap();

    let out = run_ok(&["--config", cfg.to_str().unwrap(), "--out-dir", d, "synth"]);
    assert!(out.contains("wrote 40 packets"), "{out}");

    // Flag overrides the config key.
    let out = run_ok(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        d,
        "synth",
        "--n-benign",
        "25",
    ]);
    assert!(out.contains("wrote 25 packets"), "{out}");
}

#[test]
fn synth_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pcap");
    let b = dir.path().join("b.pcap");
    let d = dir.path().to_str().unwrap();
    run_ok(&["--seed", "42", "--out-dir", d, "synth", "--out", a.to_str().unwrap()]);
    run_ok(&["--seed", "42", "--out-dir", d, "synth", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());

    let c = dir.path().join("c.pcap");
    run_ok(&["--seed", "43", "--out-dir", d, "synth", "--out", c.to_str().unwrap()]);
    assert_ne!(std::fs::read(dir.path().join("b.pcap")).unwrap(), std::fs::read(c).unwrap());
}

#[test]
fn feature_mask_gate_accepts_canonical_and_rejects_others() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let pcap = dir.path().join("capture.pcap");
    run_ok(&[
        "--seed", "3", "--out-dir", d, "synth", "--n-benign", "80", "--n-attack-bursts", "5",
        "--burst-size", "4", "--duration-s", "4000",
    ]);

    // Build a canonical mask file by hand from the slot names.
    let canonical: Vec<&str> = vec![
        "dst_addr", "src_addr", "ip_len", "ip_id", "ip_flags", "ip_chksum", "dns_id", "dns_ra",
        "sport", "dport", "seq", "ack", "dataofs", "chksum", "urgptr",
    ];
    let all_names = [
        "frame_len", "ip_version", "ip_ihl", "ip_tos", "ip_len", "ip_id", "ip_flags",
        "ip_frag_off", "ip_ttl", "ip_proto", "ip_chksum", "src_addr", "dst_addr", "sport",
        "dport", "chksum", "udp_len", "seq", "ack", "dataofs", "tcp_reserved", "tcp_flags",
        "tcp_window", "urgptr", "dns_present", "dns_id", "dns_qr", "dns_opcode", "dns_aa",
        "dns_tc", "dns_rd", "dns_ra", "dns_z", "dns_rcode", "dns_qdcount", "dns_ancount",
        "dns_nscount", "dns_arcount", "payload_len", "is_tcp", "is_udp", "is_dns_port",
    ];
    let good = dir.path().join("good_mask.txt");
    let mut text = String::new();
    for name in all_names {
        text.push_str(&format!("{name} {}\n", canonical.contains(&name)));
    }
    std::fs::write(&good, &text).unwrap();
    run_ok(&[
        "--seed", "3", "--out-dir", d, "preprocess", "--pcap", pcap.to_str().unwrap(),
        "--feature-mask", good.to_str().unwrap(),
    ]);

    // A non-canonical mask is a validation error.
    let bad = dir.path().join("bad_mask.txt");
    std::fs::write(&bad, text.replace("urgptr true", "urgptr false")).unwrap();
    let out = dnsamp()
        .args([
            "--seed", "3", "--out-dir", d, "preprocess", "--pcap", pcap.to_str().unwrap(),
            "--feature-mask", bad.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}
