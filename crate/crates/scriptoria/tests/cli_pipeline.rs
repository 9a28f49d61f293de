//! End-to-end tests of the `scriptoria` binary: staged file outputs,
//! re-running later stages from persisted intermediates, error exit codes
//! and the external-embedding route.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scriptoria(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scriptoria"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = scriptoria(args);
    assert!(
        out.status.success(),
        "scriptoria {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn synth_corpus(dir: &Path) -> PathBuf {
    ok(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--witnesses",
        "5",
        "--length",
        "250",
    ]);
    dir.join("corpus.json")
}

#[test]
fn staged_pipeline_produces_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let manifest = synth_corpus(&corpus);
    let out = tmp.path().join("run");
    let m = manifest.to_str().unwrap();
    let o = out.to_str().unwrap();

    let seg = ok(&["segment", "--config", m, "--out", o]);
    assert!(seg.contains("w01:"), "{seg}");
    ok(&["embed", "--config", m, "--out", o]);
    ok(&["cluster", "--config", m, "--out", o, "--snapshots"]);
    let dist_stdout = ok(&["distances", "--config", m, "--out", o]);
    assert!(dist_stdout.starts_with("id,w01,w02"));

    // Per-manuscript artifacts.
    for id in ["w01", "w02", "w03", "w04", "w05"] {
        assert!(out.join(id).join("crops.json").is_file());
        assert!(out.join(id).join("embeddings.txt").is_file());
        assert!(out.join(id).join("clusters.json").is_file());
        assert!(out.join(id).join("cluster_0").is_dir(), "snapshot dirs");
        let crops: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join(id).join("crops.json")).unwrap())
                .unwrap();
        let n = crops["crops"].as_array().unwrap().len();
        assert!(n > 0);
        // One PNG per crop, named <id>_<index>.png.
        let pngs = fs::read_dir(out.join(id).join("crops")).unwrap().count();
        assert_eq!(pngs, n);
    }
    // Pair mapping files and the matrix.
    assert!(out.join("distances.csv").is_file());
    assert!(out.join("mapping_w01_w02.json").is_file());
    assert!(out.join("mapping_w04_w05.json").is_file());
    // Stage run records.
    for stage in ["segment", "embed", "cluster", "distances"] {
        assert!(out.join(format!("run_record_{stage}.json")).is_file());
    }

    let d = out.join("distances.csv");
    let nj = ok(&["tree", "--distances", d.to_str().unwrap(), "--method", "nj", "--out", o]);
    assert!(nj.trim_end().ends_with(';'));
    ok(&["tree", "--distances", d.to_str().unwrap(), "--method", "upgma", "--out", o]);
    assert!(out.join("stemma_nj.nwk").is_file());
    assert!(out.join("tree_upgma.nwk").is_file());

    // Rank agreement against the gold transcripts from the manifest.
    let rank = ok(&[
        "eval-rank",
        "--test",
        d.to_str().unwrap(),
        "--config",
        m,
        "--out",
        o,
    ]);
    assert!(rank.contains("spearman"), "{rank}");
    assert!(out.join("rank_report.csv").is_file());
    // And against an explicit gold matrix file.
    let gold_csv = corpus.join("gold_distances.csv");
    let rank2 = ok(&[
        "eval-rank",
        "--test",
        d.to_str().unwrap(),
        "--gold-matrix",
        gold_csv.to_str().unwrap(),
        "--out",
        o,
    ]);
    assert!(rank2.contains("w01--w02"));
}

#[test]
fn later_stages_rerun_identically_from_persisted_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(&tmp.path().join("corpus"));
    let out = tmp.path().join("run");
    let m = manifest.to_str().unwrap();
    let o = out.to_str().unwrap();

    ok(&["segment", "--config", m, "--out", o]);
    ok(&["embed", "--config", m, "--out", o]);
    ok(&["cluster", "--config", m, "--out", o]);
    ok(&["distances", "--config", m, "--out", o]);
    let first = fs::read(out.join("distances.csv")).unwrap();

    // Delete intermediates; recompute everything after segmentation from the
    // persisted crops.
    for id in ["w01", "w02", "w03", "w04", "w05"] {
        fs::remove_file(out.join(id).join("embeddings.txt")).unwrap();
        fs::remove_file(out.join(id).join("clusters.json")).unwrap();
    }
    fs::remove_file(out.join("distances.csv")).unwrap();
    ok(&["embed", "--config", m, "--out", o]);
    ok(&["cluster", "--config", m, "--out", o]);
    ok(&["distances", "--config", m, "--out", o]);
    let second = fs::read(out.join("distances.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn parallel_jobs_do_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(&tmp.path().join("corpus"));
    let m = manifest.to_str().unwrap();
    let serial = tmp.path().join("serial");
    let parallel = tmp.path().join("parallel");
    for (out, jobs) in [(&serial, "1"), (&parallel, "4")] {
        let o = out.to_str().unwrap();
        ok(&["segment", "--config", m, "--out", o, "--jobs", jobs]);
        ok(&["embed", "--config", m, "--out", o, "--jobs", jobs]);
        ok(&["cluster", "--config", m, "--out", o, "--jobs", jobs]);
        ok(&["distances", "--config", m, "--out", o, "--jobs", jobs]);
    }
    assert_eq!(
        fs::read(serial.join("distances.csv")).unwrap(),
        fs::read(parallel.join("distances.csv")).unwrap()
    );
    assert_eq!(
        fs::read(serial.join("w03").join("embeddings.txt")).unwrap(),
        fs::read(parallel.join("w03").join("embeddings.txt")).unwrap()
    );
}

#[test]
fn external_embeddings_roundtrip_through_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(&tmp.path().join("corpus"));
    let out = tmp.path().join("run");
    let m = manifest.to_str().unwrap();
    let o = out.to_str().unwrap();

    ok(&["segment", "--config", m, "--out", o]);
    ok(&["embed", "--config", m, "--out", o]);

    // Collect the patch embeddings into one external sidecar file covering
    // all manuscripts, as an inference stack would produce.
    let mut combined = String::new();
    for id in ["w01", "w02", "w03", "w04", "w05"] {
        combined.push_str(&fs::read_to_string(out.join(id).join("embeddings.txt")).unwrap());
    }
    let sidecar = tmp.path().join("external_vectors.txt");
    fs::write(&sidecar, &combined).unwrap();

    let out2 = tmp.path().join("run_external");
    let o2 = out2.to_str().unwrap();
    ok(&["segment", "--config", m, "--out", o2]);
    ok(&[
        "embed",
        "--config",
        m,
        "--out",
        o2,
        "--embedding",
        "external",
        "--external-path",
        sidecar.to_str().unwrap(),
    ]);
    ok(&["cluster", "--config", m, "--out", o2]);
    ok(&["distances", "--config", m, "--out", o2]);

    ok(&["cluster", "--config", m, "--out", o]);
    ok(&["distances", "--config", m, "--out", o]);
    // Same vectors, same seed: the imported route reproduces the built-in one.
    assert_eq!(
        fs::read(out.join("distances.csv")).unwrap(),
        fs::read(out2.join("distances.csv")).unwrap()
    );
}

#[test]
fn eval_cer_reports_pages_and_mean() {
    let tmp = tempfile::tempdir().unwrap();
    let g1 = tmp.path().join("g1.txt");
    let g2 = tmp.path().join("g2.txt");
    let h1 = tmp.path().join("h1.txt");
    let h2 = tmp.path().join("h2.txt");
    fs::write(&g1, "Слово о полку").unwrap();
    fs::write(&h1, "слово о полку").unwrap(); // equal after lowercasing
    fs::write(&g2, "абвгд").unwrap();
    fs::write(&h2, "абвгх").unwrap(); // one substitution over five chars
    let csv = ok(&[
        "eval-cer",
        "--gold",
        g1.to_str().unwrap(),
        g2.to_str().unwrap(),
        "--hyp",
        h1.to_str().unwrap(),
        h2.to_str().unwrap(),
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "page,gold,hypothesis,cer");
    assert!(lines[1].starts_with("1,") && lines[1].ends_with("0.0000"));
    assert!(lines[2].starts_with("2,") && lines[2].ends_with("0.2000"));
    assert!(lines[3].starts_with("mean,") && lines[3].ends_with("0.1000"));

    // Without normalization the case difference counts.
    let raw = ok(&[
        "eval-cer",
        "--gold",
        g1.to_str().unwrap(),
        "--hyp",
        h1.to_str().unwrap(),
        "--keep-case",
        "--keep-whitespace",
        "--keep-combining",
    ]);
    assert!(raw.lines().nth(1).unwrap().ends_with("0.0769"), "{raw}");
}

#[test]
fn missing_image_fails_that_manuscript_but_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let manifest_path = synth_corpus(&corpus);
    // Break one manuscript's image path.
    let text = fs::read_to_string(&manifest_path).unwrap();
    let broken = text.replace("w02.png", "missing_w02.png");
    fs::write(&manifest_path, broken).unwrap();

    let out = tmp.path().join("run");
    let res = scriptoria(&[
        "segment",
        "--config",
        manifest_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("missing_w02.png"), "{stderr}");
    assert!(stderr.contains("1 of 5"), "{stderr}");
    // The other manuscripts were still segmented.
    assert!(out.join("w01").join("crops.json").is_file());
    assert!(out.join("w05").join("crops.json").is_file());
    assert!(!out.join("w02").join("crops.json").exists());
}

#[test]
fn exit_codes_and_error_json() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let manifest = synth_corpus(&corpus);
    let out = tmp.path().join("run");
    let m = manifest.to_str().unwrap();
    let o = out.to_str().unwrap();
    ok(&["segment", "--config", m, "--out", o]);
    ok(&["embed", "--config", m, "--out", o]);

    // k larger than the glyph count: input error, exit 1.
    let res = scriptoria(&["cluster", "--config", m, "--out", o, "--k", "100000"]);
    assert_eq!(res.status.code(), Some(1));

    // Nonexistent manifest with machine-readable error output.
    let res = scriptoria(&[
        "segment",
        "--config",
        "/nonexistent/corpus.json",
        "--out",
        o,
        "--error-json",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    let payload: serde_json::Value =
        serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    assert_eq!(payload["kind"], "io");
    assert_eq!(payload["exit_code"], 1);

    // Degenerate distance matrix (one manuscript) is a numerical failure.
    let single = tmp.path().join("single.csv");
    fs::write(&single, "id,a\na,0.000000\n").unwrap();
    let res = scriptoria(&[
        "tree",
        "--distances",
        single.to_str().unwrap(),
        "--method",
        "nj",
        "--out",
        o,
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn multi_page_manuscript_gets_contiguous_indices() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    synth_corpus(&corpus);
    // A manuscript listing the same page twice: indices must continue across
    // pages.
    let manifest = serde_json::json!({
        "manuscripts": [
            { "id": "two_pages", "image_paths": ["w01.png", "w02.png"] }
        ]
    });
    let path = corpus.join("multi.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    let out = tmp.path().join("run");
    ok(&[
        "segment",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let crops: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.join("two_pages").join("crops.json")).unwrap(),
    )
    .unwrap();
    let records = crops["crops"].as_array().unwrap();
    for (i, rec) in records.iter().enumerate() {
        assert_eq!(rec["index"].as_u64().unwrap() as usize, i);
    }
    let pages: Vec<u64> = records.iter().map(|r| r["page"].as_u64().unwrap()).collect();
    assert!(pages.contains(&0) && pages.contains(&1));
}

#[test]
fn synth_writes_gold_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let manifest = synth_corpus(&corpus);
    assert!(manifest.is_file());
    assert!(corpus.join("gold_distances.csv").is_file());
    for i in 1..=5 {
        assert!(corpus.join(format!("w{i:02}.png")).is_file());
        assert!(corpus.join(format!("w{i:02}.txt")).is_file());
    }
    let gold = fs::read_to_string(corpus.join("gold_distances.csv")).unwrap();
    assert!(gold.starts_with("id,w01,w02,w03,w04,w05"));
}
