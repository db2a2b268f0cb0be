use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specbench::io::bhsc::{read_cube, write_cube};
use specbench::recon::{read_model, Model};
use specbench::report::parse_leaderboards;
use specbench::robustness::AUX_HEADINGS;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specbench"))
        .args(args)
        .env_remove("SPECBENCH_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, count: usize, extra: &[&str]) -> PathBuf {
    let n = count.to_string();
    let mut args = vec!["synth", "--count", &n, "--height", "12", "--width", "12", "-o", s(dir)];
    args.extend(extra);
    ok(&args);
    dir.join("manifest.jsonl")
}

#[test]
fn simulate_clean_writes_lossless_images_and_sidecar() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 2, &[]);
    let out = t.path().join("sim");
    ok(&["simulate", "--manifest", s(&manifest), "-o", s(&out)]);
    for id in ["scene_000", "scene_001"] {
        let rgb = specbench::io::read_rgb(out.join(format!("{id}.clean.brgb"))).unwrap();
        assert_eq!((rgb.height(), rgb.width()), (12, 12));
    }
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(side["scenes"].as_array().unwrap().len(), 2);
    assert_eq!(side["provenance"]["noise"]["seed"], 0);
    assert_eq!(side["provenance"]["jpeg"]["quality"], 95);
    assert!(side["provenance"]["white_level"].as_f64().unwrap() > 0.0);
    assert_eq!(side["provenance"]["css_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn real_world_jpegs_are_reproducible() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 2, &[]);
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    for out in [&a, &b] {
        ok(&["simulate", "--manifest", s(&manifest), "--track", "real_world", "--noise-seed", "5", "-o", s(out)]);
    }
    for id in ["scene_000", "scene_001"] {
        let f = format!("{id}.real.jpg");
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap());
    }
    let c = t.path().join("c");
    ok(&["simulate", "--manifest", s(&manifest), "--track", "real_world", "--noise-seed", "6", "-o", s(&c)]);
    assert_ne!(
        std::fs::read(a.join("scene_000.real.jpg")).unwrap(),
        std::fs::read(c.join("scene_000.real.jpg")).unwrap()
    );
}

#[test]
fn missing_cube_is_a_partial_failure() {
    let t = tempfile::tempdir().unwrap();
    let data = t.path().join("data");
    let manifest = synth(&data, 2, &[]);
    std::fs::remove_file(data.join("scene_001.bhsc")).unwrap();
    let out = t.path().join("sim");
    let r = run(&["simulate", "--manifest", s(&manifest), "-o", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("scene_001"));
    assert!(out.join("scene_000.clean.brgb").exists());
    assert!(!out.join("scene_001.clean.brgb").exists());
    let side = std::fs::read_to_string(out.join("simulate.json")).unwrap();
    assert!(side.contains("\"error\""));
}

#[test]
fn linear_fit_on_exactly_linear_data() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 4, &["--shared-spectra", "3"]);
    let stdout = ok(&["fit", "--manifest", s(&manifest), "--kind", "linear", "--order", "1", "-o", s(t.path())]);
    let mrae: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("training MRAE: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mrae < 1e-6, "training MRAE {mrae}");
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(t.path().join("model.sbmd.json")).unwrap()).unwrap();
    assert_eq!(side["training_mrae"].as_f64().unwrap(), mrae);
    assert_eq!(side["kind"], "linear");
}

#[test]
fn basis_fit_records_k() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 3, &[]);
    let model = t.path().join("basis.sbmd");
    ok(&[
        "fit", "--manifest", s(&manifest), "--kind", "basis", "-k", "10", "--order", "2", "--iterations", "3",
        "--model-out", s(&model),
    ]);
    match read_model(&model).unwrap() {
        Model::Basis(b) => assert_eq!(b.k, 10),
        other => panic!("expected a basis model, got {}", other.kind()),
    }
    let side = std::fs::read_to_string(t.path().join("basis.sbmd.json")).unwrap();
    assert!(side.contains("\"k\": 10"));
}

#[test]
fn usage_errors_exit_2() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 1, &[]);
    let r = run(&["fit", "--manifest", s(&manifest), "--kind", "forest", "-o", s(t.path())]);
    assert_eq!(r.status.code(), Some(2));
    let cfg = t.path().join("bad.toml");
    std::fs::write(&cfg, "trak = \"clean\"\n").unwrap();
    let r = run(&["--config", s(&cfg), "simulate", "--manifest", s(&manifest), "-o", s(t.path())]);
    assert_eq!(r.status.code(), Some(2));
    let r = run(&["simulate", "--manifest", s(&manifest)]);
    assert_eq!(r.status.code(), Some(2), "no output directory");
}

#[test]
fn config_file_from_environment() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 1, &[]);
    let cfg = t.path().join("run.toml");
    std::fs::write(&cfg, "track = \"real_world\"\noutput_dir = \"sim\"\n[jpeg]\nquality = 80\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_specbench"))
        .args(["simulate", "--manifest", s(&manifest)])
        .env("SPECBENCH_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let side = std::fs::read_to_string(t.path().join("sim/simulate.json")).unwrap();
    assert!(side.contains("\"quality\": 80"));
    assert!(t.path().join("sim/scene_000.real.jpg").exists());
}

#[test]
fn perfect_reconstruction_ranks_first_with_zero_error() {
    let t = tempfile::tempdir().unwrap();
    let data = t.path().join("data");
    let manifest = synth(&data, 2, &[]);
    let pi = t.path().join("pi");
    ok(&["reconstruct", "--manifest", s(&manifest), "--method", "pseudoinverse", "-o", s(&pi)]);
    let out = t.path().join("eval");
    ok(&[
        "evaluate", "--manifest", s(&manifest), "--method", &format!("gt={}", s(&data)), "--method",
        &format!("pinv={}", s(&pi)), "-o", s(&out),
    ]);
    let boards = parse_leaderboards(&std::fs::read_to_string(out.join("leaderboard.csv")).unwrap()).unwrap();
    let top = &boards[0].rows[0];
    assert_eq!((top.rank, top.method.as_str(), top.mrae, top.rmse), (1, "gt", 0.0, 0.0));
    assert!(boards[0].rows[1].mrae > 0.0);
}

#[test]
fn geometry_mismatch_is_flagged_and_excluded() {
    let t = tempfile::tempdir().unwrap();
    let data = t.path().join("data");
    let manifest = synth(&data, 2, &[]);
    let rec = t.path().join("rec");
    std::fs::create_dir(&rec).unwrap();
    let a = read_cube(data.join("scene_000.bhsc")).unwrap();
    write_cube(&a.scale(1.1).unwrap(), rec.join("scene_000.bhsc")).unwrap();
    let b = read_cube(data.join("scene_001.bhsc")).unwrap();
    write_cube(&b.crop(0, 0, 8, 8).unwrap(), rec.join("scene_001.bhsc")).unwrap();
    let out = t.path().join("eval");
    let r = run(&["evaluate", "--manifest", s(&manifest), "--method", &format!("m={}", s(&rec)), "-o", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("geometry mismatch"));
    let boards = parse_leaderboards(&std::fs::read_to_string(out.join("leaderboard.csv")).unwrap()).unwrap();
    // Only scene_000 counts: every entry is off by exactly 10%.
    assert!((boards[0].rows[0].mrae - 0.1).abs() < 1e-12);
    let scores = std::fs::read_to_string(out.join("scores.csv")).unwrap();
    assert!(scores.contains("m,scene_001,,,\"geometry mismatch"), "{scores}");
}

#[test]
fn report_layouts() {
    let t = tempfile::tempdir().unwrap();
    let data = t.path().join("data");
    let manifest = synth(&data, 3, &["--out-of-scope", "1"]);
    let pi = t.path().join("pi");
    ok(&["reconstruct", "--manifest", s(&manifest), "--method", "pseudoinverse", "-o", s(&pi)]);
    let out = t.path().join("eval");
    ok(&[
        "evaluate", "--manifest", s(&manifest), "--method", &format!("pinv={}", s(&pi)), "--aux",
        "pinv=pseudoinverse", "-o", s(&out),
    ]);
    let lb = out.join("leaderboard.csv");
    let aux = format!("pinv={}", s(&out.join("aux_pinv.csv")));

    let plain = ok(&["report", "--leaderboard", s(&lb)]);
    assert!(plain.contains("| Rank | Method | MRAE | RMSE |"));
    assert!(!plain.contains("Auxiliary"));

    let full = ok(&["report", "--leaderboard", s(&lb), "--aux", &aux]);
    let header = full.lines().find(|l| l.starts_with("| Method | Track")).unwrap();
    let cols: Vec<&str> = header.trim_matches('|').split('|').map(str::trim).skip(2).collect();
    assert_eq!(cols, AUX_HEADINGS[1..]);
    assert!(full.contains("config_hash="));
    assert_eq!(full, ok(&["report", "--leaderboard", s(&lb), "--aux", &aux]));

    let text = ok(&["report", "--leaderboard", s(&lb), "--aux", &aux, "--format", "text"]);
    assert!(text.contains("Out-of-Scope"));
    let csv = ok(&["report", "--aux", &aux, "--format", "csv"]);
    assert!(csv.contains("method,track,out_of_scope,spatial"));
    let both = run(&["report", "--leaderboard", s(&lb), "--aux", &aux, "--format", "csv"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let t = tempfile::tempdir().unwrap();
    let manifest = synth(&t.path().join("data"), 4, &[]);
    let mut files = Vec::new();
    for jobs in ["1", "3"] {
        let out = t.path().join(format!("j{jobs}"));
        ok(&["--jobs", jobs, "simulate", "--manifest", s(&manifest), "--track", "real_world", "-o", s(&out)]);
        ok(&["--jobs", jobs, "reconstruct", "--manifest", s(&out.join("manifest.jsonl")), "--track", "real_world",
            "--method", "pseudoinverse", "-o", s(&out.join("rec"))]);
        ok(&["--jobs", jobs, "evaluate", "--manifest", s(&manifest), "--track", "real_world", "--method",
            &format!("pinv={}", s(&out.join("rec"))), "--aux", "pinv=pseudoinverse", "-o", s(&out.join("eval"))]);
        files.push(
            ["eval/leaderboard.csv", "eval/scores.csv", "eval/aux_pinv.csv", "scene_002.real.jpg"]
                .map(|f| std::fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(files[0], files[1]);
    let r = run(&["--jobs", "0", "synth", "-o", s(t.path())]);
    assert_eq!(r.status.code(), Some(2));
}
