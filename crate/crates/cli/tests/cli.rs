use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SIM: &str = r#"
noise_sd = 0.005
rng_seed = 7
base_default = 0.7

[true_effects.COLA]
BigramShift = 0.06

[true_effects.MRPC]
Tense = -0.02

[[true_interactions]]
pair = ["COLA", "MRPC"]
effect = { BigramShift = 0.04 }
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dseffects"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Workspace {
    _dir: TempDir,
    root: PathBuf,
}

impl Workspace {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn store(&self) -> String {
        p(&self.path("records.jsonl")).to_string()
    }
}

/// Plans I, A and C markers for BERT, then simulates records for them.
fn workspace(sim: &str) -> Workspace {
    let dir = TempDir::new().unwrap();
    let root = dir.path().to_path_buf();
    fs::write(root.join("sim.toml"), sim).unwrap();
    let manifest = root.join("manifest.json");
    let o = run(&["plan", "--markers", "I,A,C", "--models", "BERT", "--out", p(&manifest)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&[
        "simulate",
        "--config",
        p(&root.join("sim.toml")),
        "--manifest",
        p(&manifest),
        "--out",
        p(&root.join("records.jsonl")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    Workspace { _dir: dir, root }
}

#[test]
fn plan_prints_marker_table_and_setting_counts() {
    let o = run(&["plan"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("| Marker | N. Groups | N. Tasks | N. Experiments |"));
    assert!(out.contains("| Total | | | 340 |"), "{out}");
    assert!(out.contains("1957 ordered settings, 64 unordered settings"));
}

#[test]
fn plan_json_reports_totals_for_five_markers() {
    let o = run(&[
        "plan",
        "--markers",
        "I,A,B,C,D",
        "--models",
        "BERT,RoBERTa",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 300);
    assert_eq!(v["ordered_settings"], "1957");
}

#[test]
fn plan_rejects_unknown_marker() {
    let o = run(&["plan", "--markers", "I,Z"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn ingest_reports_completeness_against_manifest() {
    let ws = workspace(SIM);
    let o = run(&["ingest", &ws.store(), "--manifest", p(&ws.path("manifest.json"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("complete against 19 scheduled conditions"));
}

#[test]
fn ingest_flags_missing_triples_with_exit_3() {
    let ws = workspace(SIM);
    let text = fs::read_to_string(ws.store()).unwrap();
    let truncated: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let partial = ws.path("partial.jsonl");
    fs::write(&partial, truncated).unwrap();
    let o = run(&["ingest", p(&partial), "--manifest", p(&ws.path("manifest.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("missing: BERT[I] seed 42 Length"), "{}", stdout(&o));
}

#[test]
fn ingest_rejects_duplicates_across_files() {
    let ws = workspace(SIM);
    let o = run(&["ingest", &ws.store(), &ws.store()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate"));
}

#[test]
fn ingest_round_trips_through_out() {
    let ws = workspace(SIM);
    let merged = ws.path("merged.jsonl");
    let o = run(&["ingest", &ws.store(), "--out", p(&merged)]);
    assert!(o.status.success());
    let digest = |s: &str| s.split("digest ").nth(1).unwrap().trim().to_string();
    let again = run(&["ingest", p(&merged)]);
    assert_eq!(digest(&stdout(&o)), digest(&stdout(&again)));
}

#[test]
fn state_table_lists_every_dimension() {
    let ws = workspace(SIM);
    let o = run(&["--store", &ws.store(), "state", "--model", "BERT", "--datasets", "I"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("| Dimension | Mean (%) | Seeds |"));
    assert_eq!(out.lines().filter(|l| l.ends_with("| 5 |")).count(), 9);
}

#[test]
fn state_json_carries_samples() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "--format",
        "json",
        "state",
        "--model",
        "BERT",
        "--datasets",
        "COLA",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n_seeds"], 5);
    assert_eq!(v["dims"].as_array().unwrap().len(), 9);
    assert_eq!(v["dims"][0]["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn effect_recovers_injected_shift() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "--format",
        "json",
        "effect",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cell = v.as_array().unwrap()[0]["cells"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["dimension"] == "BigramShift")
        .unwrap()
        .clone();
    let pp = cell["value_pp"].as_f64().unwrap();
    assert!((pp - 6.0).abs() < 1.0, "{pp}");
    assert_eq!(cell["stars"], 3);
}

#[test]
fn effect_all_references_has_one_row_per_reference() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "effect",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
        "--all-references",
    ]);
    let out = stdout(&o);
    let rows = out.lines().filter(|l| l.starts_with("| COLA |")).count();
    assert_eq!(rows, 5);
    assert!(
        out.contains("Mean over 5 reference states (pp, untested): Length "),
        "{out}"
    );
}

#[test]
fn effect_on_absent_condition_exits_3() {
    let ws = workspace(SIM);
    let o = run(&["--store", &ws.store(), "effect", "--model", "BERT", "--dataset", "NOPE"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("BERT[NOPE]"));
}

#[test]
fn effect_against_overlapping_reference_is_a_validation_error() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "effect",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
        "--reference",
        "COLA",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interact_renders_latex_cells() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "--format",
        "latex",
        "interact",
        "--model",
        "BERT",
        "--x",
        "COLA",
        "--y",
        "MRPC",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("^{***}"), "{out}");
    assert!(out.contains("\\\\"));
}

#[test]
fn interact_without_pair_covers_every_complete_pair() {
    let ws = workspace(SIM);
    let o = run(&["--store", &ws.store(), "--format", "csv", "interact", "--model", "BERT"]);
    assert!(o.status.success());
    // 12 cross-group pairs of the default six-task catalog
    assert_eq!(stdout(&o).lines().count(), 13);
}

#[test]
fn persist_reports_counts() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "persist",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
    ]);
    assert!(o.status.success());
    assert!(
        stdout(&o).contains("| COLA | BigramShift | + | BERT | 5/5 |"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn threshold_above_one_is_rejected() {
    let ws = workspace(SIM);
    let o = run(&[
        "--store",
        &ws.store(),
        "--threshold",
        "1.5",
        "persist",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn card_lists_persistent_effect_and_provenance() {
    let ws = workspace(SIM);
    let out = ws.path("card.md");
    let o = run(&[
        "--store",
        &ws.store(),
        "card",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let card = fs::read_to_string(out).unwrap();
    assert!(card.contains("- BigramShift `+`: significant in 5/5 reference states"));
    assert!(card.contains("COLA × MRPC"));
    assert!(card.contains("## Provenance"));
}

#[test]
fn report_kinds_render() {
    let ws = workspace(SIM);
    for kind in ["individual", "interaction", "persistence"] {
        let o = run(&["--store", &ws.store(), "report", "--kind", kind]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        assert!(stdout(&o).starts_with('|'));
    }
}

#[test]
fn settings_file_supplies_defaults_and_flags_override() {
    let ws = workspace(SIM);
    let settings = ws.path("settings.toml");
    fs::write(&settings, format!("store = {:?}\nformat = \"csv\"\n", ws.store())).unwrap();
    let o = run(&[
        "--settings",
        p(&settings),
        "effect",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("Dataset,Model,"));
    let o = run(&[
        "--settings",
        p(&settings),
        "--format",
        "md",
        "effect",
        "--model",
        "BERT",
        "--dataset",
        "COLA",
    ]);
    assert!(stdout(&o).starts_with("| Dataset |"));
}

#[test]
fn settings_file_with_unknown_key_fails() {
    let dir = TempDir::new().unwrap();
    let settings = dir.path().join("s.toml");
    fs::write(&settings, "colour = \"red\"\n").unwrap();
    let o = run(&["--settings", p(&settings), "plan"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn noise_free_store_is_degenerate_under_strict() {
    let ws = workspace(&SIM.replace("noise_sd = 0.005", "noise_sd = 0.0"));
    let args = ["--store", &ws.store(), "effect", "--model", "BERT", "--dataset", "COLA"];
    assert!(run(&args).status.success());
    let mut strict = vec!["--strict"];
    strict.extend(args);
    let o = run(&strict);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("| COLA | BERT |"));
}

#[test]
fn simulate_is_deterministic() {
    let ws = workspace(SIM);
    let o = run(&[
        "simulate",
        "--config",
        p(&ws.path("sim.toml")),
        "--manifest",
        p(&ws.path("manifest.json")),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), fs::read_to_string(ws.store()).unwrap());
}

#[test]
fn simulate_rejects_unknown_dimension() {
    let ws = workspace(SIM);
    fs::write(ws.path("bad.toml"), SIM.replace("Tense", "tense")).unwrap();
    let o = run(&[
        "simulate",
        "--config",
        p(&ws.path("bad.toml")),
        "--manifest",
        p(&ws.path("manifest.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn calibrate_writes_json_report() {
    let ws = workspace(SIM);
    let out = ws.path("cal.json");
    let o = run(&[
        "calibrate",
        "--config",
        p(&ws.path("sim.toml")),
        "--x",
        "COLA",
        "--y",
        "MRPC",
        "--trials",
        "200",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("200 trials, alpha 0.05"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let fpr = v["false_positive_rate"].as_f64().unwrap();
    assert!((0.0..0.15).contains(&fpr), "{fpr}");
    assert!(v["power"].as_f64().unwrap() > 0.9);
}

#[test]
fn calibrate_needs_enough_trials() {
    let ws = workspace(SIM);
    let o = run(&["calibrate", "--config", p(&ws.path("sim.toml")), "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_writes_svg_with_interaction_arrow() {
    let ws = workspace(SIM);
    let out = ws.path("plane.svg");
    let o = run(&[
        "--store",
        &ws.store(),
        "plot",
        "--model",
        "BERT",
        "--dim-x",
        "BigramShift",
        "--dim-y",
        "Tense",
        "--interaction",
        "COLA,MRPC",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("#7b2cbf"));
}

#[test]
fn plot_of_states_and_unknown_dimension() {
    let ws = workspace(SIM);
    let base = [
        "--store",
        &ws.store(),
        "plot",
        "--model",
        "BERT",
        "--states",
        "I;COLA;MRPC",
        "--dim-x",
        "BigramShift",
    ];
    let mut ok = base.to_vec();
    ok.extend(["--dim-y", "Tense"]);
    let o = run(&ok);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut bad = base.to_vec();
    bad.extend(["--dim-y", "Nope"]);
    assert_eq!(run(&bad).status.code(), Some(3));
}

#[test]
fn csv_store_is_accepted() {
    let ws = workspace(SIM);
    let csv = ws.path("records.csv");
    let mut text = String::from("model,datasets,seed,dimension,accuracy\n");
    for seed in [42, 1, 1234, 123, 10] {
        for (i, d) in [
            "Length",
            "Depth",
            "TopConst",
            "BigramShift",
            "Tense",
            "SubjNumber",
            "ObjNumber",
            "OddManOut",
            "CoordInv",
        ]
        .iter()
        .enumerate()
        {
            text.push_str(&format!("BERT,,{seed},{d},{}\n", 0.5 + i as f64 / 100.0));
        }
    }
    fs::write(&csv, text).unwrap();
    let o = run(&["--store", p(&csv), "state", "--model", "BERT"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("| Tense | 54.00 | 5 |"));
}
