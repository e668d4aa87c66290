use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_macroplace"));
    cmd.env_remove("MACROPLACE_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn gen(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("inst{seed}.json"));
    let out = run(bin().args(["gen", "--macros", "20", "--nets", "30", "--seed", &seed.to_string(), "--out"]).arg(&path));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

/// Two 4x4 macros stacked on the same spot inside a 16x16 area.
fn overlapping_instance(dir: &Path) -> PathBuf {
    let path = dir.join("overlap.json");
    fs::write(
        &path,
        r#"{
  "area": {"width": 16, "height": 16},
  "blockages": [],
  "macros": [{"id": "a", "size_x": 4, "size_y": 4}, {"id": "b", "size_x": 4, "size_y": 4}],
  "nets": [{"members": ["a", "b"]}],
  "initial_placement": [{"id": "a", "x": 8, "y": 8}, {"id": "b", "x": 8, "y": 8}]
}"#,
    )
    .unwrap();
    path
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().args(["place", "--in"]).arg(dir.path().join("nope.json")).arg("--out").arg(dir.path().join("r.json")));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nope.json"));
}

#[test]
fn invalid_instance_names_the_net() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"area": {"width": 4, "height": 4}, "blockages": [], "macros": [{"id": "a", "size_x": 1, "size_y": 1}],
            "nets": [{"name": "dangling", "members": ["a", "ghost"]}]}"#,
    )
    .unwrap();
    let out = run(bin().args(["place", "--in"]).arg(&path).arg("--out").arg(dir.path().join("r.json")));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("dangling"), "{}", stderr(&out));
}

#[test]
fn zero_rounds_without_legalizing_echoes_initial_placement() {
    let dir = tempfile::tempdir().unwrap();
    let inst = overlapping_instance(dir.path());
    let res = dir.path().join("r.json");
    let out = run(bin().args(["place", "--rounds", "0", "--skip-legalize", "--in"]).arg(&inst).arg("--out").arg(&res));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let result = read_json(&res);
    let positions = result["positions"].as_array().unwrap();
    for p in positions {
        assert_eq!((p["x"].as_f64(), p["y"].as_f64()), (Some(8.0), Some(8.0)));
    }
    assert_eq!(result["summary"]["legal"], Value::Bool(false));
    assert_eq!(result["summary"]["overlap_area"].as_f64(), Some(16.0));
    assert_eq!(stdout(&out).trim(), "round,netlength_bb,overlap_area,delta,beta,w");

    let check = run(bin().args(["check", "--instance"]).arg(&inst).arg("--result").arg(&res));
    assert_ne!(code(&check), 0);
    assert!(stdout(&check).contains("overlap: a b"), "{}", stdout(&check));
}

#[test]
fn seeded_run_is_legal_and_checker_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 7);
    let res = dir.path().join("res.json");
    let stats = dir.path().join("stats.csv");
    let out = run(bin()
        .args(["place", "--rounds", "50000", "--seed", "7", "--in"])
        .arg(&inst)
        .arg("--out")
        .arg(&res)
        .arg("--stats")
        .arg(&stats));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let result = read_json(&res);
    assert_eq!(result["summary"]["legal"], Value::Bool(true));
    assert_eq!(result["config"]["seed"].as_u64(), Some(7));
    assert_eq!(result["config"]["max_rounds"].as_u64(), Some(50000));

    let csv = fs::read_to_string(&stats).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,netlength_bb,overlap_area,delta,beta,w"));
    assert_eq!(lines.count(), 50000);

    let check = run(bin().args(["check", "--instance"]).arg(&inst).arg("--result").arg(&res));
    assert_eq!(code(&check), 0, "{}", stdout(&check));
    let report = stdout(&check);
    let checked: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("netlength_bb: "))
        .unwrap()
        .parse()
        .unwrap();
    let reported = result["summary"]["netlength_bb"].as_f64().unwrap();
    assert!((checked - reported).abs() <= 1e-9 * reported, "{checked} vs {reported}");
}

#[test]
fn check_reports_mismatched_macro_sets() {
    let dir = tempfile::tempdir().unwrap();
    let inst = overlapping_instance(dir.path());
    let res = dir.path().join("r.json");
    let out = run(bin().args(["place", "--rounds", "0", "--skip-legalize", "--in"]).arg(&inst).arg("--out").arg(&res));
    assert_eq!(code(&out), 0);
    let mut result = read_json(&res);
    result["positions"][1]["id"] = Value::String("zzz".into());
    fs::write(&res, serde_json::to_string(&result).unwrap()).unwrap();
    let check = run(bin().args(["check", "--instance"]).arg(&inst).arg("--result").arg(&res));
    assert_eq!(code(&check), 1);
    let err = stderr(&check);
    assert!(err.contains("- b") && err.contains("+ zzz"), "{err}");
}

#[test]
fn config_file_keys_override_flags() {
    let dir = tempfile::tempdir().unwrap();
    let inst = overlapping_instance(dir.path());
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 99, "candidates": 3}"#).unwrap();
    let res = dir.path().join("r.json");
    let out = run(bin()
        .args(["place", "--rounds", "20", "--seed", "5", "--in"])
        .arg(&inst)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&res));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let config = &read_json(&res)["config"];
    assert_eq!(config["seed"].as_u64(), Some(99));
    assert_eq!(config["candidates"].as_u64(), Some(3));
    assert_eq!(config["max_rounds"].as_u64(), Some(20));

    fs::write(&cfg, r#"{"sead": 1}"#).unwrap();
    let out = run(bin().args(["place", "--in"]).arg(&inst).arg("--config").arg(&cfg).arg("--out").arg(&res));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sead"));
}

#[test]
fn output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(bin().env("MACROPLACE_OUT_DIR", dir.path()).args(["gen", "--macros", "5", "--nets", "4", "--seed", "3"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let inst = dir.path().join("gen-3.json");
    assert!(inst.exists());
    let out = run(bin()
        .env("MACROPLACE_OUT_DIR", dir.path())
        .args(["place", "--rounds", "10", "--stats"])
        .arg(dir.path().join("s.csv"))
        .arg("--in")
        .arg(&inst));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("gen-3.result.json").exists());
}

#[test]
fn gen_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(fs::read(gen(a.path(), 11)).unwrap(), fs::read(gen(b.path(), 11)).unwrap());
}

#[test]
fn render_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 2);
    let res = dir.path().join("r.json");
    assert_eq!(code(&run(bin().args(["place", "--rounds", "200", "--in"]).arg(&inst).arg("--out").arg(&res))), 0);
    let svgs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let svg = dir.path().join(format!("{i}.svg"));
            let out = run(bin().args(["render", "--instance"]).arg(&inst).arg("--result").arg(&res).arg("--out").arg(&svg));
            assert_eq!(code(&out), 0, "{}", stderr(&out));
            fs::read(svg).unwrap()
        })
        .collect();
    assert_eq!(svgs[0], svgs[1]);
    let text = String::from_utf8(svgs[0].clone()).unwrap();
    assert_eq!(text.matches(r#"class="macro""#).count(), 20);

    let out = run(bin().args(["render", "--instance"]).arg(&inst).arg("--out").arg(dir.path().join("missing/dir/x.svg")));
    assert_eq!(code(&out), 1);
}
