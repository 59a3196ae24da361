use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LEVEL: &str = "------\n-<>-E-\n-[]---\nXXXXXX\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cnet-repair"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::create_dir(dir.path().join("corpus")).unwrap();
        fs::write(dir.path().join("corpus/a.txt"), LEVEL).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, name: &str, epochs: &str) -> PathBuf {
        let model = self.path(name);
        ok(&[
            "train",
            "--corpus",
            s(&self.path("corpus")),
            "--epochs",
            epochs,
            "--lr",
            "0.05",
            "--seed",
            "3",
            "--out",
            s(&model),
        ]);
        model
    }
}

fn differing_cells(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).filter(|(x, y)| x != y).count()
}

#[test]
fn training_is_reproducible() {
    let f = Fixture::new();
    let a = fs::read(f.train("a.cnet", "30")).unwrap();
    let b = fs::read(f.train("b.cnet", "30")).unwrap();
    assert_eq!(a, b);
    let report = fs::read_to_string(f.path("a.cnet.train.csv")).unwrap();
    assert!(report.starts_with("epoch,mean_loss,train_accuracy"));
    assert_eq!(report.lines().count(), 31);
}

#[test]
fn single_tile_corpus_trains() {
    let f = Fixture::new();
    fs::write(f.path("corpus/a.txt"), "X\n").unwrap();
    let out = f.train("m.cnet", "5");
    assert!(out.exists());
}

#[test]
fn empty_corpus_is_an_error() {
    let f = Fixture::new();
    fs::remove_file(f.path("corpus/a.txt")).unwrap();
    let out = run(&["train", "--corpus", s(&f.path("corpus")), "--out", s(&f.path("m.cnet"))]);
    assert!(!out.status.success());
}

#[test]
fn inspect_marks_destroyed_tile() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "1500");
    fs::write(f.path("clean.txt"), LEVEL).unwrap();
    let out = ok(&[
        "inspect",
        "--model",
        s(&model),
        "--level",
        s(&f.path("clean.txt")),
        "--json",
        s(&f.path("c.json")),
    ]);
    assert!(!out.contains('('), "{out}");
    let clean: Value = serde_json::from_str(&fs::read_to_string(f.path("c.json")).unwrap()).unwrap();
    assert_eq!(clean["wrong"].as_array().unwrap().len(), 0);

    fs::write(f.path("broken.txt"), "------\n-<>-E-\n-[-X--\nXXXXXX\n").unwrap();
    let out = ok(&["inspect", "--model", s(&model), "--level", s(&f.path("broken.txt"))]);
    let (grid, json) = out.split_once("\n\n").unwrap();
    assert_eq!(grid.lines().count(), 4);
    assert!(grid.lines().nth(2).unwrap().contains("(-)"), "{grid}");
    let v: Value = serde_json::from_str(json).unwrap();
    assert!(v["wrong"].as_array().unwrap().contains(&serde_json::json!([2, 2])));
    assert_eq!(v["height"], 4);
    assert_eq!(v["theta"], 0.05);
    let uv: usize = v["unstable_value"].as_u64().unwrap() as usize;
    assert!(uv >= 2 * v["unstable"].as_array().unwrap().len());
}

#[test]
fn destroy_changes_exactly_count_cells() {
    let f = Fixture::new();
    fs::write(f.path("l.txt"), LEVEL).unwrap();
    for name in ["d1.txt", "d2.txt"] {
        ok(&[
            "destroy",
            "--level",
            s(&f.path("l.txt")),
            "--count",
            "5",
            "--seed",
            "9",
            "--out",
            s(&f.path(name)),
        ]);
    }
    let d1 = fs::read_to_string(f.path("d1.txt")).unwrap();
    assert_eq!(d1, fs::read_to_string(f.path("d2.txt")).unwrap());
    assert_eq!(differing_cells(LEVEL, &d1), 5);
    ok(&[
        "destroy",
        "--level",
        s(&f.path("l.txt")),
        "--count",
        "2",
        "--pipe-adjacent",
        "--out",
        s(&f.path("d3.txt")),
    ]);
    let too_many = run(&[
        "destroy",
        "--level",
        s(&f.path("l.txt")),
        "--count",
        "25",
        "--out",
        s(&f.path("d4.txt")),
    ]);
    assert!(!too_many.status.success());
}

#[test]
fn repairing_a_clean_level_is_identity() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "1500");
    fs::write(f.path("l.txt"), LEVEL).unwrap();
    ok(&[
        "repair",
        "--model",
        s(&model),
        "--level",
        s(&f.path("l.txt")),
        "--out",
        s(&f.path("r.txt")),
        "--corpus",
        s(&f.path("corpus")),
        "--all-cells",
    ]);
    assert_eq!(fs::read_to_string(f.path("r.txt")).unwrap(), LEVEL);
    let audit: Value = serde_json::from_str(&fs::read_to_string(f.path("r.txt.audit.json")).unwrap()).unwrap();
    assert_eq!(audit["R=R"], 24);
    assert_eq!(audit["audited"], 24);
    assert_eq!(audit["ratio"], 0.0);
}

#[test]
fn repair_writes_level_log_and_audit() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "1500");
    fs::write(f.path("b.txt"), "------\n-<>-E-\n-[-X--\nXXXXXX\n").unwrap();
    fs::write(f.path("ga.cfg"), "# short run\ngenerations = 10\nn = 12\n").unwrap();
    let out = run(&[
        "repair",
        "--model",
        s(&model),
        "--level",
        s(&f.path("b.txt")),
        "--out",
        s(&f.path("r.txt")),
        "--config",
        s(&f.path("ga.cfg")),
        "--seed",
        "4",
        "--weights",
        "5,3,1",
    ]);
    let repaired = fs::read_to_string(f.path("r.txt")).unwrap();
    assert_eq!(repaired.lines().count(), 4);
    let log = fs::read_to_string(f.path("r.txt.log.csv")).unwrap();
    assert!(log.starts_with("generation,best_F,mean_F,wrong,replaced,UV"));
    assert_eq!(log.lines().count(), 12);
    let audit: Value = serde_json::from_str(&fs::read_to_string(f.path("r.txt.audit.json")).unwrap()).unwrap();
    let wb = audit["wrong_before"].as_u64().unwrap();
    let wa = audit["wrong_after"].as_u64().unwrap();
    assert_eq!(out.status.success(), wa <= wb);
    let bucket_sum: u64 = ["W->W", "W->R", "R->W", "R->R", "W=W", "W=R", "R=W", "R=R"]
        .iter()
        .map(|k| audit[k].as_u64().unwrap())
        .sum();
    assert_eq!(bucket_sum, audit["audited"].as_u64().unwrap());

    let again = run(&[
        "repair",
        "--model",
        s(&model),
        "--level",
        s(&f.path("b.txt")),
        "--out",
        s(&f.path("r2.txt")),
        "--config",
        s(&f.path("ga.cfg")),
        "--seed",
        "4",
    ]);
    assert_eq!(again.status.code(), out.status.code());
    assert_eq!(fs::read_to_string(f.path("r2.txt")).unwrap(), repaired);

    let audit_out = ok(&[
        "audit",
        "--before",
        s(&f.path("b.txt")),
        "--after",
        s(&f.path("r.txt")),
        "--corpus",
        s(&f.path("corpus")),
    ]);
    let v: Value = serde_json::from_str(&audit_out).unwrap();
    assert!(v["audited"].as_u64().unwrap() > 0);
}

#[test]
fn bad_config_is_rejected() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "5");
    fs::write(f.path("l.txt"), LEVEL).unwrap();
    fs::write(f.path("ga.cfg"), "mutation = lots\n").unwrap();
    let out = run(&[
        "repair",
        "--model",
        s(&model),
        "--level",
        s(&f.path("l.txt")),
        "--out",
        s(&f.path("r.txt")),
        "--config",
        s(&f.path("ga.cfg")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn experiments_write_four_tables() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "200");
    let out = ok(&[
        "experiments",
        "--model",
        s(&model),
        "--corpus",
        s(&f.path("corpus")),
        "--seed",
        "1",
        "--out",
        s(&f.path("tables")),
    ]);
    assert_eq!(out.lines().count(), 5);
    for (name, header) in [
        ("legal.csv", "tile,total,true_elm,true_rate"),
        ("illegal.csv", "tile,total,true_det,true_rate"),
        ("unstable.csv", "set,tiles,original_u,original_uv"),
        ("summary.csv", "column,legal_elimination_rate"),
    ] {
        let text = fs::read_to_string(f.path("tables").join(name)).unwrap();
        assert!(text.starts_with(header), "{name}: {text}");
    }
}

#[test]
fn version_mismatch_is_reported() {
    let f = Fixture::new();
    let model = f.train("m.cnet", "5");
    let mut bytes = fs::read(&model).unwrap();
    bytes[4] = 9;
    fs::write(&model, bytes).unwrap();
    fs::write(f.path("l.txt"), LEVEL).unwrap();
    let out = run(&["inspect", "--model", s(&model), "--level", s(&f.path("l.txt"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}
