//! Acceptance suite: one PASS/FAIL line per criterion. Every expected
//! value comes from an oracle written here (plain BFS over tile vectors,
//! direct summation) or from a frozen golden constant.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use slidegym::augment::{channel_shuffle, grayscale, invert};
use slidegym::env::{
    apply_action, distance_denominator, distance_ratio, is_solvable, sample_uniform_solvable,
    shuffle_from_solved, RewardConfig,
};
use slidegym::harness::{
    eval_ood_easy, eval_ood_hard, ood_catalog, run_episode, PixelMemorizer, RunConfig,
    OOD_EPISODES,
};
use slidegym::observation::{
    patch_bounds, render_image_obs, render_onehot_obs, BlankFill, Image, ImagePool, Modality,
    ObsSpec,
};
use slidegym::solver::{bfs_enumerate, ida_star, DistanceTable, SolverPolicy};
use slidegym::{Action, GridDims, PuzzleState, RandomSource};

/// Σ of BFS depths over all 181,440 3×3 states, frozen after the first run.
const GOLDEN_TOTAL_DEPTH_3X3: u64 = 3_986_672;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slidegym"))
}

fn dims(h: usize, w: usize) -> GridDims {
    GridDims::new(h, w).unwrap()
}

fn oracle_depths(h: usize, w: usize) -> HashMap<Vec<u16>, u32> {
    let n = h * w;
    let start: Vec<u16> = (1..n as u16).chain([0]).collect();
    let mut depth = HashMap::from([(start.clone(), 0u32)]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let d = depth[&t];
        let b = t.iter().position(|&x| x == 0).unwrap();
        let (r, c) = (b / w, b % w);
        let mut nbrs = vec![];
        if r > 0 {
            nbrs.push(b - w);
        }
        if r + 1 < h {
            nbrs.push(b + w);
        }
        if c > 0 {
            nbrs.push(b - 1);
        }
        if c + 1 < w {
            nbrs.push(b + 1);
        }
        for nb in nbrs {
            let mut next = t.clone();
            next.swap(b, nb);
            if !depth.contains_key(&next) {
                depth.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    depth
}

fn write_pngs(dir: &Path, prefix: &str, n: usize, side: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RandomSource::new(seed);
    for i in 0..n {
        let data = (0..side * side * 3).map(|_| rng.index(256) as f32 / 255.0).collect();
        Image::from_data(side, side, data)
            .unwrap()
            .save_png(&dir.join(format!("{prefix}{i:03}.png")))
            .unwrap();
    }
}

fn noise_image(side: usize, rng: &mut RandomSource) -> Image {
    let data = (0..side * side * 3).map(|_| rng.unit_f32()).collect();
    Image::from_data(side, side, data).unwrap()
}

fn enumerate_json(d: &str, out: &Path) -> Result<(serde_json::Value, Duration), String> {
    let t = Instant::now();
    let o = bin()
        .args(["enumerate", "--dims", d, "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure!(o.status.success(), "enumerate {d} failed: {}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join(format!("enumeration_{d}.json"))).map_err(|e| e.to_string())?;
    Ok((serde_json::from_str(&text).map_err(|e| e.to_string())?, elapsed))
}

fn state_counts() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let (j3, t3) = enumerate_json("3x3", dir.path())?;
    let (j2, _) = enumerate_json("2x2", dir.path())?;
    ensure!(j3["state_count"] == 181_440, "3x3 count {}", j3["state_count"]);
    ensure!(j2["state_count"] == 12, "2x2 count {}", j2["state_count"]);
    ensure!(t3 < Duration::from_secs(10), "3x3 took {t3:?}");
    let o = bin().args(["enumerate", "--dims", "4x4", "--out"]).arg(dir.path()).output().unwrap();
    ensure!(!o.status.success(), "4x4 enumeration was not refused");
    Ok(format!("3x3 = 181440 in {t3:.2?}, 2x2 = 12, 4x4 refused"))
}

fn mean_optimal_length() -> Check {
    let t = Instant::now();
    let r = bfs_enumerate(dims(3, 3)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let oracle: u64 = oracle_depths(3, 3).values().map(|&d| d as u64).sum();
    ensure!(r.total_depth == oracle, "total depth {} vs oracle {oracle}", r.total_depth);
    ensure!(r.total_depth == GOLDEN_TOTAL_DEPTH_3X3, "total depth {} vs golden", r.total_depth);
    ensure!((21.5..=22.5).contains(&r.mean_optimal_length), "mean {}", r.mean_optimal_length);
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("mean = {:.6} (golden total {GOLDEN_TOTAL_DEPTH_3X3}) in {elapsed:.2?}", r.mean_optimal_length))
}

fn oracle_denominator(h: usize, w: usize) -> u64 {
    let mut s = 0;
    for i in 1..=h {
        for j in 1..=w {
            s += i.max(h - i) + j.max(w - j);
        }
    }
    s as u64
}

fn reward_formula() -> Check {
    ensure!(oracle_denominator(3, 3) == 42 && oracle_denominator(4, 4) == 96, "oracle sums");
    ensure!(distance_denominator(dims(3, 3)) == 42, "3x3 denominator");
    ensure!(distance_denominator(dims(4, 4)) == 96, "4x4 denominator");
    let cfg = RewardConfig::default();
    ensure!(distance_ratio(&PuzzleState::solved(dims(3, 3)), cfg).0 == 0, "D(solved) != 0");
    let one: PuzzleState = "3,3:1,2,3,4,5,6,7,0,8".parse().unwrap();
    let (num, den) = distance_ratio(&one, cfg);
    ensure!(num * 42 == 2 * den, "one-move D = {num}/{den}");
    let mut rng = RandomSource::new(2025);
    let all = [dims(2, 2), dims(3, 3), dims(4, 4), dims(3, 5), dims(5, 5)];
    for _ in 0..1_000_000 {
        let d = all[rng.index(all.len())];
        let s = sample_uniform_solvable(d, &mut rng);
        let a = Action::ALL[rng.index(4)];
        let r = apply_action(&s, a, 0, 1000).reward;
        ensure!((-1.0..=1.0).contains(&r), "reward {r} for {s} {a}");
    }
    Ok("denominators 42/96, D(solved)=0, one move = 2/42, 1e6 rewards in [-1,1]".into())
}

fn solvability() -> Check {
    let reach2 = oracle_depths(2, 2);
    let mut perm: Vec<u16> = vec![0, 1, 2, 3];
    let mut checked = 0;
    // Heap's algorithm over all 24 permutations.
    let mut c = [0usize; 4];
    let check = |p: &[u16]| -> Result<(), String> {
        let got = is_solvable(dims(2, 2), p).map_err(|e| e.to_string())?;
        ensure!(got == reach2.contains_key(p), "2x2 {p:?}");
        Ok(())
    };
    check(&perm)?;
    checked += 1;
    let mut i = 0;
    while i < 4 {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            check(&perm)?;
            checked += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    ensure!(checked == 24, "visited {checked} permutations");

    let reach3 = oracle_depths(3, 3);
    let mut rng = RandomSource::new(3);
    for _ in 0..10_000 {
        let mut p: Vec<u16> = (0..9).collect();
        rng.shuffle(&mut p);
        ensure!(is_solvable(dims(3, 3), &p).unwrap() == reach3.contains_key(&p), "3x3 {p:?}");
    }
    for _ in 0..100_000 {
        let s = sample_uniform_solvable(dims(3, 3), &mut rng);
        ensure!(reach3.contains_key(s.tiles()), "uniform init produced {s}");
        let n = rng.index(60);
        let s = shuffle_from_solved(dims(3, 3), n, &mut rng);
        ensure!(reach3.contains_key(s.tiles()), "random-walk init produced {s}");
    }
    Ok("2x2 24/24, 3x3 1e4 permutations, 2x1e5 initializer samples".into())
}

fn solver_optimality() -> Check {
    let reach = oracle_depths(3, 3);
    let mut rng = RandomSource::new(4);
    for _ in 0..1000 {
        let s = sample_uniform_solvable(dims(3, 3), &mut rng);
        let r = ida_star(&s, u64::MAX).unwrap().solved().ok_or("budget")?;
        ensure!(r.length as u32 == reach[s.tiles()], "IDA* {} vs BFS {} on {s}", r.length, reach[s.tiles()]);
    }
    let cfg = RunConfig {
        obs: ObsSpec {
            modality: Modality::State,
            ..ObsSpec::default()
        },
        ..RunConfig::default()
    };
    let mut policy = SolverPolicy::default();
    for _ in 0..300 {
        let log = run_episode(&cfg, &mut policy, None, &mut rng).map_err(|e| e.to_string())?;
        ensure!(log.solved && log.length as u32 == reach[log.start_state.tiles()], "episode {log:?}");
    }
    Ok("IDA* = BFS on 1e3 states; 300 solver episodes at BFS depth".into())
}

fn observation_fidelity() -> Check {
    let dir = tempfile::tempdir().unwrap();
    write_pngs(dir.path(), "src", 1, 113, 6);
    for side in [84, 100] {
        let pool = ImagePool::load(dir.path(), 1, side, 0).map_err(|e| e.to_string())?;
        let expect = Image::open(&dir.path().join("src000.png")).unwrap().resize_bilinear(side, side);
        let d = dims(3, 3);
        let out = render_image_obs(&PuzzleState::solved(d), pool.image(0), BlankFill::Black).unwrap();
        let (rows, cols) = (patch_bounds(side, 3, 2), patch_bounds(side, 3, 2));
        for y in 0..side {
            for x in 0..side {
                let blank = rows.contains(&y) && cols.contains(&x);
                let want = if blank { [0.0; 3] } else { expect.pixel(y, x) };
                ensure!(out.pixel(y, x) == want, "{side}px mismatch at ({y},{x})");
            }
        }
    }
    for tiles in oracle_depths(2, 2).into_keys() {
        let s = PuzzleState::from_tiles(dims(2, 2), tiles).unwrap();
        ensure!(render_onehot_obs(&s).decode_state(dims(2, 2)).unwrap() == s, "2x2 {s}");
    }
    let mut rng = RandomSource::new(5);
    for _ in 0..10_000 {
        let s = sample_uniform_solvable(dims(3, 3), &mut rng);
        ensure!(render_onehot_obs(&s).decode_state(dims(3, 3)).unwrap() == s, "3x3 {s}");
    }
    Ok("solved render = resized source outside blank (84, 100 px); one-hot 12 + 1e4 exact".into())
}

fn augmentation_properties() -> Check {
    let mut rng = RandomSource::new(6);
    for i in 0..1000 {
        let side = 8 + rng.index(93);
        let img = noise_image(side, &mut rng);
        ensure!(invert(&invert(&img)) == img, "inversion #{i}");
        let g = grayscale(&img, 1.0, &mut rng);
        ensure!(grayscale(&g, 1.0, &mut rng) == g, "grayscale #{i}");
        let sh = channel_shuffle(&img, &mut rng);
        for (a, b) in img.data().chunks_exact(3).zip(sh.data().chunks_exact(3)) {
            let (mut a, mut b) = ([a[0], a[1], a[2]], [b[0], b[1], b[2]]);
            a.sort_by(f32::total_cmp);
            b.sort_by(f32::total_cmp);
            ensure!(a == b, "channel shuffle #{i}");
        }
        for aug in ood_catalog(side) {
            let out = aug.apply(&img, &mut rng).map_err(|e| e.to_string())?;
            ensure!(out.shape() == img.shape() && out.in_unit_range(), "{aug} #{i}");
        }
    }
    Ok("1e3 images: involution, idempotence, multisets, shape/range x6".into())
}

fn protocol_fidelity() -> Check {
    let root = tempfile::tempdir().unwrap();
    let (train_dir, held_dir) = (root.path().join("train"), root.path().join("held"));
    write_pngs(&train_dir, "train", 4, 60, 7);
    write_pngs(&held_dir, "held", 120, 60, 8);
    let side = 30;
    let cfg = RunConfig {
        pool_size: 4,
        obs: ObsSpec {
            render_size: side,
            ..ObsSpec::default()
        },
        ..RunConfig::default()
    };
    let pool = Arc::new(ImagePool::load(&train_dir, 4, side, 0).map_err(|e| e.to_string())?);

    let mut solver = SolverPolicy::default();
    let easy = eval_ood_easy(&cfg, &mut solver, Arc::clone(&pool)).map_err(|e| e.to_string())?;
    ensure!(easy.per_augmentation.len() == 6, "augmentations");
    for s in &easy.per_augmentation {
        ensure!(s.episodes == OOD_EPISODES && OOD_EPISODES == 100, "{} ran {} episodes", s.augmentation, s.episodes);
        ensure!(s.success_rate == 1.0, "solver {} = {}", s.augmentation, s.success_rate);
    }
    let hard = eval_ood_hard(&cfg, &mut solver, &pool, &held_dir).map_err(|e| e.to_string())?;
    ensure!(hard.episodes.len() == 100 && hard.success_rate == 1.0, "solver hard {}", hard.success_rate);
    ensure!(hard.heldout_images == 100, "held-out pool {}", hard.heldout_images);

    let table = DistanceTable::build(cfg.dims).map_err(|e| e.to_string())?;
    let mut memo = PixelMemorizer::train_exhaustive(&table, &pool, &cfg.obs).map_err(|e| e.to_string())?;
    let hard_memo = eval_ood_hard(&cfg, &mut memo, &pool, &held_dir).map_err(|e| e.to_string())?;
    ensure!(hard_memo.episodes.len() == 100, "memorizer episodes");
    ensure!(hard_memo.success_rate < 0.05, "memorizer hard = {}", hard_memo.success_rate);
    Ok(format!(
        "easy 6x100 + hard 100 episodes; solver 1.00/1.00; memorizer hard {:.2}",
        hard_memo.success_rate
    ))
}

fn play_determinism() -> Check {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    write_pngs(&data, "img", 3, 50, 9);
    let run = |out: &Path, policy: &str| -> Result<Vec<u8>, String> {
        let o = bin()
            .args(["play", "--policy", policy, "--dims", "3x3", "--pool-size", "3", "--seed", "11"])
            .args(["--num-envs", "4", "--total-steps", "6000", "--out"])
            .arg(out)
            .arg("--dataset-dir")
            .arg(&data)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(o.status.success(), "play failed: {}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("episodes.jsonl")).map_err(|e| e.to_string())
    };
    for policy in ["random", "solver"] {
        let a = run(&root.path().join(format!("{policy}-a")), policy)?;
        let b = run(&root.path().join(format!("{policy}-b")), policy)?;
        ensure!(!a.is_empty(), "{policy}: empty log");
        ensure!(a == b, "{policy}: logs differ");
    }
    Ok("random and solver play logs byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("state-count", state_counts),
        ("mean-optimal-length", mean_optimal_length),
        ("reward-formula", reward_formula),
        ("solvability", solvability),
        ("solver-optimality", solver_optimality),
        ("observation-fidelity", observation_fidelity),
        ("augmentation-properties", augmentation_properties),
        ("protocol-fidelity", protocol_fidelity),
        ("determinism", play_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.2?}]", t.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
