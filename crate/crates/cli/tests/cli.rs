use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn slplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slplab"))
        .args(args)
        .env_remove("SLPLAB_SEED")
        .output()
        .expect("binary runs")
}

fn relations() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/kinship.json")
        .display()
        .to_string()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, Value, PathBuf) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.display().to_string();
    full.extend(["--out", &out_s]);
    let o = slplab(&full);
    let text = std::fs::read_to_string(&out).unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&o.stderr)));
    (o.status.code().unwrap(), serde_json::from_str(&text).unwrap(), out)
}

#[test]
fn unknown_flag_is_a_usage_error_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = slplab(&["collapse", "--no-such-flag", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_input_file_is_a_usage_error_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = slplab(&["families", "--relations", "/nonexistent.json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent.json"));
}

#[test]
fn exhaustive_laws_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run_to(dir.path(), "r.json", &["relalg-laws", "--entities", "3", "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], true);
    assert_eq!(r["check"], "relalg-laws");
}

#[test]
fn collapse_matches_twice_the_squared_norm() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run_to(
        dir.path(),
        "r.json",
        &["collapse", "--atoms", "1", "--dim", "4", "--neg-equiv", "--seed", "7"],
    );
    assert_eq!(code, 0);
    let d = &r["details"];
    assert_eq!(d["feasible"], false);
    let norm = d["feature_norms"][0].as_f64().unwrap();
    let res_sq = d["residual_sq"].as_f64().unwrap();
    assert!((res_sq - 2.0 * norm * norm).abs() <= 1e-9 * res_sq, "{res_sq} vs {}", 2.0 * norm * norm);
    assert_eq!(d["provenance"]["seed"], 7);
}

#[test]
fn seed_falls_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_slplab"))
        .args(["collapse", "--neg-equiv"])
        .env("SLPLAB_SEED", "11")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["details"]["provenance"]["seed"], 11);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let rel = relations();
    let args = ["build-slp", "--relations", rel.as_str(), "--seed", "3"];
    let (_, _, a) = run_to(dir.path(), "a.json", &args);
    let (_, _, b) = run_to(dir.path(), "b.json", &args);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(ta.last(), Some(&b'\n'));
}

#[test]
fn built_map_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let rel = relations();
    let f = dir.path().join("f.csv").display().to_string();
    let i = dir.path().join("i.json").display().to_string();
    let (code, r, _) = run_to(
        dir.path(),
        "build.json",
        &["build-slp", "--relations", &rel, "--features-out", &f, "--index-out", &i],
    );
    assert_eq!(code, 0, "{r}");
    let (code, r, _) = run_to(
        dir.path(),
        "verify.json",
        &["verify-slp", "--relations", &rel, "--features", &f, "--index", &i],
    );
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["details"]["slp-independence"]["pass"], true);
}

#[test]
fn families_embed_the_partition() {
    let dir = tempfile::tempdir().unwrap();
    let rel = relations();
    let (code, r, _) = run_to(dir.path(), "r.json", &["families", "--relations", &rel]);
    assert_eq!(code, 0);
    let parts = r["details"]["partition"].as_array().unwrap();
    assert_eq!(parts.len() as u64, r["details"]["family_count"].as_u64().unwrap());
    let members: usize = parts.iter().map(|p| p["members"].as_array().unwrap().len()).sum();
    assert_eq!(members as u64, r["details"]["queries"].as_u64().unwrap());
}

#[test]
fn every_structural_subcommand_passes_on_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let rel = relations();
    for sub in ["factorize", "isotypic", "parity", "audit"] {
        let (code, r, _) = run_to(dir.path(), "r.json", &[sub, "--relations", &rel]);
        assert_eq!(code, 0, "{sub}: {r}");
    }
    for sub in ["kernel-stability", "fit-bilinear"] {
        let (code, r, _) = run_to(dir.path(), "r.json", &[sub, "--atoms", "2", "--dim", "4"]);
        assert_eq!(code, 0, "{sub}: {r}");
    }
}

#[test]
fn gradlab_config_file_writes_histogram_and_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"entity_count": 4, "relations": 2, "density": 0.5, "arch": "slp_linear",
            "epochs": 50, "lr": 0.1, "seed": 5, "block": "head"}"#,
    )
    .unwrap();
    let csv = dir.path().join("h.csv");
    let align = dir.path().join("a.json");
    let (code, r, _) = run_to(
        dir.path(),
        "r.json",
        &[
            "gradlab",
            "--config",
            cfg.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--alignment-out",
            align.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["details"]["provenance"]["seed"], 5);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("bin_lo,bin_hi,count"));
    assert_eq!(text.lines().count(), 41);
    let _: Value = serde_json::from_str(&std::fs::read_to_string(&align).unwrap()).unwrap();
}

#[test]
fn gradlab_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"entity_count": 4, "relations": 2, "density": 0.5, "arch": "mlp", "epochs": 5, "lr": 0.1, "seed": 1, "colour": 3}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = slplab(&["gradlab", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn non_slp_blocks_fail_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let rel = relations();
    let blocks = dir.path().join("blocks.json");
    // A single one-dimensional context cannot separate the families.
    std::fs::write(&blocks, r#"[{"context_dim": 1, "m": 1, "parity": "+"}]"#).unwrap();
    let (code, r, _) = run_to(
        dir.path(),
        "r.json",
        &["build-slp", "--relations", &rel, "--blocks", blocks.to_str().unwrap()],
    );
    assert_eq!(code, 1);
    assert_eq!(r["pass"], false);
}
