use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use slidegym::observation::Image;
use slidegym::RandomSource;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slidegym"));
    c.env_remove("SPGYM_DATASET_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_pngs(dir: &Path, prefix: &str, n: usize, side: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RandomSource::new(seed);
    for i in 0..n {
        let data = (0..side * side * 3).map(|_| rng.index(256) as f32 / 255.0).collect();
        Image::from_data(side, side, data)
            .unwrap()
            .save_png(&dir.join(format!("{prefix}{i}.png")))
            .unwrap();
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_prints_moves_and_replays() {
    let o = run(&["solve", "3,3:1,2,3,4,5,6,7,8,0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("0 moves"));

    let start = "3,3:8,6,7,2,5,4,3,0,1";
    let o = run(&["solve", start]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("31 moves"));
    let mut s: slidegym::PuzzleState = start.parse().unwrap();
    for name in lines.next().unwrap().split_whitespace() {
        assert!(s.apply_move(name.parse().unwrap()));
    }
    assert!(s.is_solved());
}

#[test]
fn exit_codes_separate_domain_and_config_errors() {
    assert_eq!(run(&["solve", "3,3:2,1,3,4,5,6,7,8,0"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "3,3:8,6,7,2,5,4,3,0,1", "--budget", "5"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["enumerate", "--dims", "4x4", "--out", out]).status.code(), Some(1));
    assert_eq!(run(&["play", "--out", out]).status.code(), Some(2), "no dataset dir");
    assert_eq!(run(&["play", "--dims", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(
        run(&["play", "--modality", "onehot", "--policy", "magic", "--out", out]).status.code(),
        Some(2)
    );
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[env]\nsize = 3\n").unwrap();
    let o = run(&["play", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enumerate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate", "--dims", "2x2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("state_count: 12"));
    assert_eq!(json(&dir.path().join("enumeration_2x2.json"))["state_count"], 12);
    assert!(dir.path().join("enumeration_2x2_histogram.csv").exists());
}

#[test]
fn play_writes_logs_metrics_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_pngs(&data, "a", 1, 40, 1);
    let out = dir.path().join("solver");
    let o = bin()
        .args(["play", "--policy", "solver", "--pool-size", "1", "--num-envs", "4"])
        .args(["--total-steps", "100000", "--out", out.to_str().unwrap()])
        .env("SPGYM_DATASET_DIR", &data)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics = json(&out.join("metrics.json"));
    assert_eq!(metrics["success_rate"], 1.0);
    assert_eq!(metrics["early_terminated"], true);
    for f in ["episodes.jsonl", "metrics.csv", "success_curve.csv", "config.toml", "pool_manifest.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let echo = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.contains("schema = 1") && echo.contains("dims = \"3x3\""));
    assert!(echo.contains(data.to_str().unwrap()), "env var recorded in echo");

    // The echoed config reproduces the run.
    let out2 = dir.path().join("again");
    let o = run(&[
        "play", "--policy", "solver", "--config", out.join("config.toml").to_str().unwrap(),
        "--out", out2.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(out.join("episodes.jsonl")).unwrap(),
        std::fs::read(out2.join("episodes.jsonl")).unwrap()
    );
}

#[test]
fn random_play_on_2x2_mostly_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "play", "--policy", "random", "--dims", "2x2", "--modality", "state",
        "--num-envs", "8", "--total-steps", "50000", "--no-early-termination", "--out", out,
    ]);
    assert!(o.status.success());
    let metrics = json(&dir.path().join("metrics.json"));
    assert!(metrics["success_rate"].as_f64().unwrap() >= 0.9);
    assert_eq!(metrics["total_steps"], 50000);
    let logs = std::fs::read_to_string(dir.path().join("episodes.jsonl")).unwrap();
    let total: u64 = logs
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["length"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 50000);
}

fn render_bytes(args: &[&str]) -> Vec<u8> {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

#[test]
fn render_is_deterministic_and_inversion_pipes_back() {
    let dir = tempfile::tempdir().unwrap();
    write_pngs(dir.path(), "s", 1, 90, 2);
    let img = dir.path().join("s0.png");
    let img = img.to_str().unwrap();
    let state = "3,3:1,2,3,4,5,6,7,8,0";
    let plain = render_bytes(&["render", state, "--image", img]);
    assert_eq!(plain, render_bytes(&["render", state, "--image", img]));

    let decoded = Image::decode(&plain).unwrap();
    let source = Image::open(Path::new(img)).unwrap().resize_bilinear(84, 84);
    let source = Image::from_rgb8(&source.to_rgb8());
    for y in 0..84 {
        for x in 0..84 {
            let want = if y >= 56 && x >= 56 { [0.0; 3] } else { source.pixel(y, x) };
            assert_eq!(decoded.pixel(y, x), want);
        }
    }

    let inverted = render_bytes(&["render", state, "--image", img, "--augment", "inversion"]);
    assert_ne!(inverted, plain);
    let mut child = bin()
        .args(["augment", "inversion"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&inverted).unwrap();
    let back = child.wait_with_output().unwrap();
    assert!(back.status.success());
    assert_eq!(back.stdout, plain);
}

#[test]
fn eval_ood_and_probe_export() {
    let dir = tempfile::tempdir().unwrap();
    let (train, held) = (dir.path().join("train"), dir.path().join("held"));
    write_pngs(&train, "t", 2, 40, 3);
    write_pngs(&held, "h", 3, 40, 4);
    let out = dir.path().join("ood");
    let o = run(&[
        "eval-ood", "--policy", "solver", "--pool-size", "2", "--render-size", "24",
        "--dataset-dir", train.to_str().unwrap(), "--heldout-dir", held.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("ood_hard.json"))["success_rate"], 1.0);
    assert_eq!(json(&out.join("ood_easy.json"))["overall_mean"], 1.0);
    assert_eq!(std::fs::read_to_string(out.join("ood_easy.csv")).unwrap().lines().count(), 8);

    let o = run(&[
        "eval-ood", "--dataset-dir", train.to_str().unwrap(), "--heldout-dir",
        train.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "overlap is a configuration error");

    let probe = dir.path().join("probe");
    let o = run(&[
        "export-probe", "--pool-size", "2", "--samples", "25", "--render-size", "30",
        "--dataset-dir", train.to_str().unwrap(), "--out", probe.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ds = slidegym::harness::ProbeDataset::read(&probe).unwrap();
    assert_eq!(ds.len(), 25);
    for i in 0..25 {
        assert_eq!(ds.label_state(i).unwrap(), ds.manifest.states[i]);
    }
}
