//! Black-box tests of the `leas` binary: exit codes, flag handling,
//! resolved-config echoes, and the end-to-end artifact flow.

use std::path::{Path, PathBuf};
use std::process::Output;

fn leas(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_leas"))
        .args(args)
        .env("LEAS_LOG_LEVEL", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_status(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

/// Synth a small campaign, build its graph, and write a seeds file.
/// Returns (events, graph, seeds) paths.
fn fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let spec = dir.join("campaign.json");
    std::fs::write(
        &spec,
        r#"{
            "spammer_count": 10,
            "target_pool_size": 800,
            "actions_per_spammer": 8,
            "burst_window": 120,
            "organic_actor_count": 25,
            "organic_rate": 12.0,
            "owner_fanout": 2,
            "rng_seed": 42
        }"#,
    )
    .unwrap();
    let synth_dir = dir.join("synth");
    let out = leas(&[
        "synth",
        "--model",
        "campaign",
        "--spec",
        spec.to_str().unwrap(),
        "--out-dir",
        synth_dir.to_str().unwrap(),
    ]);
    assert_status(&out, 0);
    let events = synth_dir.join("events.jsonl");

    let graph_dir = dir.join("graph");
    let out = leas(&[
        "build-graph",
        "--bipartite",
        events.to_str().unwrap(),
        "--out-dir",
        graph_dir.to_str().unwrap(),
    ]);
    assert_status(&out, 0);
    let graph = graph_dir.join("graph.tsv");

    let seeds = dir.join("seeds.txt");
    std::fs::write(&seeds, "1\n2\n3\n").unwrap();
    (events, graph, seeds)
}

fn no_temp_files(dir: &Path) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        assert!(
            path.extension().map_or(true, |e| e != "tmp"),
            "leftover temp file {path:?}"
        );
    }
}

#[test]
fn help_paths_exit_zero() {
    let out = leas(&["--help"]);
    assert_status(&out, 0);
    assert!(stdout(&out).contains("build-graph"));

    let out = leas(&["expand", "--help"]);
    assert_status(&out, 0);
    let text = stdout(&out);
    for flag in ["--graph", "--seeds", "--out-dir", "--k", "--d-max", "--krylov-order"] {
        assert!(text.contains(flag), "help misses {flag}");
    }
}

#[test]
fn missing_required_flag_exits_one_with_usage() {
    let out = leas(&["expand"]);
    assert_status(&out, 1);
    let text = stderr(&out);
    assert!(text.contains("--graph"), "usage should name the flag: {text}");
}

#[test]
fn unknown_flag_is_rejected() {
    let out = leas(&["pipeline", "--bogus", "1"]);
    assert_status(&out, 1);
}

#[test]
fn malformed_flag_value_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph, seeds) = fixture(dir.path());
    let out = leas(&[
        "expand",
        "--graph",
        graph.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run").to_str().unwrap(),
        "--k",
        "many",
    ]);
    assert_status(&out, 1);
}

#[test]
fn missing_input_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = leas(&[
        "expand",
        "--graph",
        dir.path().join("absent.tsv").to_str().unwrap(),
        "--seeds",
        dir.path().join("absent-seeds.txt").to_str().unwrap(),
        "--out-dir",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_status(&out, 1);
}

#[test]
fn defaults_echo_shows_default_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let run_dir = dir.path().join("run");
    let out = leas(&[
        "pipeline",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        run_dir.to_str().unwrap(),
        "--n-min",
        "3",
    ]);
    assert_status(&out, 0);
    let text = stdout(&out);
    for line in ["k = 3", "l = 3", "d_max = 500", "cap_n = 3000", "n_min = 3"] {
        assert!(text.contains(line), "echo misses {line:?}:\n{text}");
    }
    let echoed = std::fs::read_to_string(run_dir.join("resolved_config.txt")).unwrap();
    assert!(echoed.contains("k = 3"));
    assert!(echoed.contains("command = pipeline"));
}

#[test]
fn pipeline_emits_all_artifacts_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let run_dir = dir.path().join("run");
    let out = leas(&[
        "pipeline",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        run_dir.to_str().unwrap(),
        "--n-min",
        "3",
        "--cap-n",
        "100",
    ]);
    assert_status(&out, 0);

    let clusters = std::fs::read_to_string(run_dir.join("clusters.jsonl")).unwrap();
    let cluster_lines = clusters.lines().count();
    assert!(cluster_lines >= 1);
    for line in clusters.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["seed", "members", "conductance", "density", "tabc", "warnings"] {
            assert!(v.get(key).is_some(), "cluster line misses {key}");
        }
    }

    let tier: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("tier.json")).unwrap())
            .unwrap();
    assert!(tier.get("tier1").is_some() && tier.get("tier2").is_some());

    let timing = std::fs::read_to_string(run_dir.join("timing.csv")).unwrap();
    assert!(timing.starts_with("seed_id,n_sampled,lp_iters,wall_ms\n"));
    assert_eq!(timing.lines().count(), cluster_lines + 1, "one row per processed seed");

    assert!(run_dir.join("skips.txt").exists());
    no_temp_files(&run_dir);
}

#[test]
fn worker_count_leaves_output_bytes_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let mut renders = vec![];
    for workers in ["1", "4"] {
        let run_dir = dir.path().join(format!("run-{workers}"));
        let out = leas(&[
            "pipeline",
            "--graph",
            graph.to_str().unwrap(),
            "--bipartite",
            events.to_str().unwrap(),
            "--seeds",
            seeds.to_str().unwrap(),
            "--out-dir",
            run_dir.to_str().unwrap(),
            "--n-min",
            "3",
            "--workers",
            workers,
        ]);
        assert_status(&out, 0);
        renders.push(std::fs::read(run_dir.join("clusters.jsonl")).unwrap());
    }
    assert_eq!(renders[0], renders[1]);
}

#[test]
fn config_file_applies_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "k = 5\nn_min = 3\n").unwrap();

    let out = leas(&[
        "expand",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run-a").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_status(&out, 0);
    assert!(stdout(&out).contains("k = 5"), "config file value used");

    let out = leas(&[
        "expand",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run-b").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--k",
        "7",
    ]);
    assert_status(&out, 0);
    assert!(stdout(&out).contains("k = 7"), "explicit flag wins");
}

#[test]
fn inputs_are_never_mutated() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let before_graph = std::fs::read(&graph).unwrap();
    let before_events = std::fs::read(&events).unwrap();
    let out = leas(&[
        "pipeline",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run").to_str().unwrap(),
        "--n-min",
        "3",
    ]);
    assert_status(&out, 0);
    assert_eq!(std::fs::read(&graph).unwrap(), before_graph);
    assert_eq!(std::fs::read(&events).unwrap(), before_events);
}

#[test]
fn expand_without_bipartite_still_produces_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let (_, graph, seeds) = fixture(dir.path());
    let run_dir = dir.path().join("run");
    let out = leas(&[
        "expand",
        "--graph",
        graph.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        run_dir.to_str().unwrap(),
        "--n-min",
        "3",
    ]);
    assert_status(&out, 0);
    let clusters = std::fs::read_to_string(run_dir.join("clusters.jsonl")).unwrap();
    assert!(clusters.lines().count() >= 1);
    // Expand never writes a tier report.
    assert!(!run_dir.join("tier.json").exists());
}

#[test]
fn metrics_and_validate_remeasure_cluster_files() {
    let dir = tempfile::tempdir().unwrap();
    let (events, graph, seeds) = fixture(dir.path());
    let run_dir = dir.path().join("run");
    let out = leas(&[
        "pipeline",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
        "--out-dir",
        run_dir.to_str().unwrap(),
        "--n-min",
        "3",
    ]);
    assert_status(&out, 0);
    let clusters = run_dir.join("clusters.jsonl");
    let n_clusters = std::fs::read_to_string(&clusters).unwrap().lines().count();

    let metrics_dir = dir.path().join("metrics");
    let out = leas(&[
        "metrics",
        "--graph",
        graph.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
        "--out-dir",
        metrics_dir.to_str().unwrap(),
    ]);
    assert_status(&out, 0);
    let table = std::fs::read_to_string(metrics_dir.join("metrics.tsv")).unwrap();
    assert!(table.starts_with("seed\tsize\tdensity\tflake_odf\n"));
    assert_eq!(table.lines().count(), n_clusters + 1);

    let validate_dir = dir.path().join("validate");
    let out = leas(&[
        "validate",
        "--graph",
        graph.to_str().unwrap(),
        "--bipartite",
        events.to_str().unwrap(),
        "--clusters",
        clusters.to_str().unwrap(),
        "--out-dir",
        validate_dir.to_str().unwrap(),
        "--n-min",
        "3",
    ]);
    assert_status(&out, 0);
    let validation = std::fs::read_to_string(validate_dir.join("validation.jsonl")).unwrap();
    assert_eq!(validation.lines().count(), n_clusters);
    for line in validation.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["tabc"]["verdict"].is_boolean());
    }
}

#[test]
fn synth_is_reproducible_and_pins_the_rng() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("planted.json");
    std::fs::write(
        &spec,
        r#"{"groups": [[20, 0.8], [20, 0.8]], "overlaps": [[0, 1, 5]],
            "background_p": 0.05, "background_nodes": 10, "rng_seed": 9}"#,
    )
    .unwrap();
    let mut outputs = vec![];
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = leas(&[
            "synth",
            "--model",
            "planted",
            "--spec",
            spec.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert_status(&out, 0);
        outputs.push(std::fs::read(out_dir.join("graph.tsv")).unwrap());
        let meta = std::fs::read_to_string(out_dir.join("meta.json")).unwrap();
        assert!(meta.contains("chacha20"));
        assert!(out_dir.join("labels.tsv").exists());
        assert!(out_dir.join("spec.json").exists());
    }
    assert_eq!(outputs[0], outputs[1]);

    // --rng-seed overrides the spec and changes the output.
    let out_dir = dir.path().join("c");
    let out = leas(&[
        "synth",
        "--model",
        "planted",
        "--spec",
        spec.to_str().unwrap(),
        "--rng-seed",
        "10",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_status(&out, 0);
    assert!(stdout(&out).contains("rng_seed = 10"));
    assert_ne!(std::fs::read(out_dir.join("graph.tsv")).unwrap(), outputs[0]);
}
