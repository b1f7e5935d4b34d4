use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nss3dqa::io::{write_model, PlyEncoding};
use nss3dqa::synth::{generate, ColorPattern, Shape, SynthSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nss3dqa"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn nss3dqa")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "nss3dqa {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_synth(dir: &Path, name: &str, shape: Shape, count: usize, seed: u64) -> PathBuf {
    let model = generate(&SynthSpec {
        shape,
        count,
        colors: ColorPattern::Random,
        seed,
    })
    .unwrap();
    let path = dir.join(name);
    write_model(&path, &model, PlyEncoding::Ascii).unwrap();
    path
}

fn synth_dataset(dir: &Path, groups: usize) -> PathBuf {
    let data = dir.join("data");
    ok(&[
        "synth", "-o", s(&data), "--groups", &groups.to_string(), "--points", "400", "--levels", "6",
    ]);
    data.join("manifest.csv")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn extract_two_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_synth(dir.path(), "a.ply", Shape::Sphere { radius: 1.0 }, 500, 1);
    let b = write_synth(dir.path(), "b.ply", Shape::Plane, 500, 2);
    let out = ok(&["extract", s(&a), s(&b)]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "model_id");
    for row in &rows[1..] {
        assert_eq!(row[1], "point_cloud");
        let filled = row[2..].iter().filter(|v| !v.is_empty()).count();
        assert_eq!(filled, 88);
        assert!(row[2..].iter().all(|v| v.parse::<f64>().unwrap().is_finite()));
    }
}

#[test]
fn extract_mixed_batch() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = write_synth(dir.path(), "cloud.ply", Shape::Plane, 400, 3);
    let mesh = write_synth(dir.path(), "mesh.ply", Shape::GridMesh, 100, 4);
    let csv = dir.path().join("f.csv");
    ok(&["extract", s(&cloud), s(&mesh), "-o", s(&csv)]);
    let rows = csv_rows(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], "point_cloud");
    assert_eq!(rows[2][1], "mesh");
    assert_eq!(rows[1][2..].iter().filter(|v| !v.is_empty()).count(), 88);
    assert_eq!(rows[2][2..].iter().filter(|v| !v.is_empty()).count(), 77);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_synth(dir.path(), "good.ply", Shape::Plane, 300, 5);
    let missing = dir.path().join("nope.ply");
    let out = run(&["extract", s(&good), s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope.ply"), "{err}");
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_eq!(run(&["extract"]).status.code(), Some(1));
    assert_eq!(run(&["cv", "--manifest"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path(), 2);
    let model = dir.path().join("model.json");
    ok(&["train", "--manifest", s(&manifest), "-o", s(&model)]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert!(json["support_vectors"].as_array().is_some_and(|v| !v.is_empty()));

    let data = manifest.parent().unwrap();
    let a = data.join("g00_l00.ply");
    let b = data.join("g00_l05.ply");
    let out = ok(&["predict", "--model", s(&model), s(&a), s(&b)]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0], ["model_id", "score"]);
    assert_eq!(rows.len(), 3);
    let pa: f64 = rows[1][1].parse().unwrap();
    let pb: f64 = rows[2][1].parse().unwrap();
    assert!(pa.is_finite() && pb.is_finite());
    assert!(pa > pb, "clean {pa} should outscore distorted {pb}");

    let mesh = write_synth(dir.path(), "mesh.ply", Shape::GridMesh, 100, 9);
    let out = run(&["predict", "--model", s(&model), s(&mesh)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cv_reports_one_fold_per_group() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path(), 3);
    let report = dir.path().join("cv.json");
    let out = ok(&["cv", "--manifest", s(&manifest), "-o", s(&report)]);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("SRCC"), "{table}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["folds"].as_array().unwrap().len(), 3);
    assert!(json.get("extraction").is_none());
}

#[test]
fn cv_accepts_precomputed_features_and_groups() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path(), 3);
    let data = manifest.parent().unwrap();
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(data)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ply"))
        .collect();
    inputs.sort();
    let csv = dir.path().join("features.csv");
    let mut args = vec!["extract", "-o", s(&csv)];
    args.extend(inputs.iter().map(|p| s(p)));
    ok(&args);

    let direct = dir.path().join("direct.json");
    let cached = dir.path().join("cached.json");
    ok(&["cv", "--manifest", s(&manifest), "-o", s(&direct)]);
    ok(&["cv", "--manifest", s(&manifest), "--features", s(&csv), "-o", s(&cached)]);
    let a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&direct).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cached).unwrap()).unwrap();
    assert_eq!(a["srcc"], b["srcc"]);

    ok(&["cv", "--manifest", s(&manifest), "--features", s(&csv), "--groups", "F1,F2"]);
    let out = run(&["cv", "--manifest", s(&manifest), "--features", s(&csv), "--groups", "F9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_reports_each_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path(), 5);
    let report = dir.path().join("sweep.json");
    ok(&[
        "sweep", "--manifest", s(&manifest), "--fractions", "0.2,0.4,0.6,0.8", "--seed", "3", "-o", s(&report),
    ]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let entries = json.as_array().unwrap();
    assert_eq!(entries.len(), 4);
    let counts: Vec<u64> = entries.iter().map(|e| e["train_group_count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [1, 2, 3, 4]);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_dataset(dir.path(), 3);
    let mut reports = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let features = dir.path().join(format!("f{i}.csv"));
        let a = manifest.parent().unwrap().join("g01_l02.ply");
        let b = manifest.parent().unwrap().join("g02_l04.ply");
        ok(&["--threads", threads, "extract", s(&a), s(&b), "-o", s(&features)]);
        let cv = dir.path().join(format!("cv{i}.json"));
        ok(&["--threads", threads, "cv", "--manifest", s(&manifest), "-o", s(&cv)]);
        let model = dir.path().join(format!("m{i}.json"));
        ok(&["--threads", threads, "train", "--manifest", s(&manifest), "-o", s(&model)]);
        reports.push([
            std::fs::read(features).unwrap(),
            std::fs::read(cv).unwrap(),
            std::fs::read(model).unwrap(),
        ]);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        ok(&["synth", "-o", s(d), "--groups", "1", "--points", "200", "--levels", "3", "--seed", "11"]);
    }
    for name in ["g00_l00.ply", "g00_l02.ply", "manifest.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
}
