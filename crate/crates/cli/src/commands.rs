use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use slidegym::augment::AugmentSpec;
use slidegym::harness::{
    check_disjoint, default_render_size, eval_ood_easy, eval_ood_hard, export_probe_dataset, run_batch, PixelMemorizer, Policy,
    RandomPolicy, ScriptedPolicy,
};
use slidegym::observation::{
    list_images, render_image_obs, BlankFill, Image, ImagePool, Modality,
};
use slidegym::solver::{bfs_enumerate, ida_star, DistanceTable, SolveOutcome, SolverPolicy};
use slidegym::{Action, Error, GridDims, PuzzleState, RandomSource, Result};

use crate::config::{RunArgs, Resolved};

const STDIO: &str = "-";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path.as_os_str() == STDIO {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Error::io("<stdin>", e))?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| Error::io(path, e))
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == STDIO {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)
            .and_then(|()| out.flush())
            .map_err(|e| Error::io("<stdout>", e))
    } else {
        write_file(path, bytes)
    }
}

pub fn enumerate(dims: GridDims, out: &Path) -> Result<()> {
    let report = bfs_enumerate(dims)?;
    create_dir(out)?;
    let (json, csv) = report.write_files(out)?;
    println!("dims: {dims}");
    println!("state_count: {}", report.state_count);
    println!("mean_optimal_length: {:.6}", report.mean_optimal_length);
    println!("max_depth: {}", report.max_depth);
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

pub fn solve(state: &str, budget: u64) -> Result<()> {
    let state: PuzzleState = state.parse()?;
    match ida_star(&state, budget)? {
        SolveOutcome::Solved(r) => {
            println!("{} moves", r.length);
            if !r.path.is_empty() {
                let names: Vec<&str> = r.path.iter().map(|a| a.name()).collect();
                println!("{}", names.join(" "));
            }
            eprintln!("nodes expanded: {}", r.nodes_expanded);
            Ok(())
        }
        SolveOutcome::BudgetExhausted { nodes_expanded, .. } => {
            Err(Error::BudgetExhausted { nodes_expanded })
        }
    }
}

/// Loads the training pool when the observation needs images.
fn load_pool(resolved: &Resolved) -> Result<Option<Arc<ImagePool>>> {
    let run = &resolved.run;
    if run.obs.modality != Modality::Image {
        return Ok(None);
    }
    let dir = resolved.dataset_dir.as_deref().ok_or_else(|| {
        Error::Config("image observations need --dataset-dir or SPGYM_DATASET_DIR".into())
    })?;
    let pool = ImagePool::load(dir, run.pool_size, run.obs.render_size, run.pool_seed)?;
    Ok(Some(Arc::new(pool)))
}

enum PolicyKind {
    Random,
    Solver(u64),
    Scripted(Vec<Action>),
    Memorizer(PixelMemorizer),
}

impl PolicyKind {
    fn build(name: &str, budget: u64, resolved: &Resolved, pool: Option<&ImagePool>) -> Result<Self> {
        let name = name.trim();
        if let Some(list) = name.strip_prefix("scripted:") {
            let actions = list
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<Action>>>()
                .map_err(|e| Error::Config(e.to_string()))?;
            if actions.is_empty() {
                return Err(Error::Config("scripted policy needs actions".into()));
            }
            return Ok(Self::Scripted(actions));
        }
        match name {
            "random" => Ok(Self::Random),
            "solver" => Ok(Self::Solver(budget)),
            "memorizer" => {
                let pool = pool.ok_or_else(|| {
                    Error::Config("the memorizer policy needs image observations".into())
                })?;
                let table = DistanceTable::build(resolved.run.dims)?;
                Ok(Self::Memorizer(PixelMemorizer::train_exhaustive(
                    &table,
                    pool,
                    &resolved.run.obs,
                )?))
            }
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (random, solver, memorizer, scripted:<actions>)"
            ))),
        }
    }

    fn instance(&self, seed: u64, env_index: usize) -> Box<dyn Policy> {
        match self {
            Self::Random => Box::new(RandomPolicy::new(
                RandomSource::with_stream(seed, (1 << 32) | env_index as u64).next_u64(),
            )),
            Self::Solver(budget) => Box::new(SolverPolicy::new(*budget)),
            Self::Scripted(actions) => Box::new(ScriptedPolicy::new(actions.clone())),
            Self::Memorizer(m) => Box::new(m.clone()),
        }
    }
}

fn prepare(run: &RunArgs, out: &Path) -> Result<(Resolved, Option<Arc<ImagePool>>)> {
    let resolved = run.resolve()?;
    let pool = load_pool(&resolved)?;
    create_dir(out)?;
    resolved.echo(out)?;
    if let Some(pool) = &pool {
        pool.write_manifest(&out.join("pool_manifest.txt"))?;
    }
    Ok((resolved, pool))
}

pub fn play(run: &RunArgs, policy: &str, budget: u64, out: &Path) -> Result<()> {
    let (resolved, pool) = prepare(run, out)?;
    let kind = PolicyKind::build(policy, budget, &resolved, pool.as_deref())?;
    let seed = resolved.run.seed;
    let log_path = out.join("episodes.jsonl");
    let mut logs = BufWriter::new(File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
    let factory = |i: usize| kind.instance(seed, i);
    let report = run_batch(&resolved.run, &factory, pool, &mut |log| log.write_jsonl(&mut logs))?;
    logs.flush().map_err(|e| Error::io(&log_path, e))?;
    report.write_files(out)?;
    println!("policy: {}", report.policy);
    println!("total_steps: {}", report.total_steps);
    println!("episodes: {}", report.episodes_finished);
    println!("success_rate: {:.4}", report.success_rate);
    println!(
        "steps_to_threshold: {}{}",
        report.steps_to_threshold,
        if report.censored { " (censored)" } else { "" }
    );
    Ok(())
}

pub fn eval_ood(
    run: &RunArgs,
    policy: &str,
    budget: u64,
    heldout_dir: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (resolved, pool) = prepare(run, out)?;
    let pool = pool.ok_or_else(|| Error::Config("OOD evaluation needs --modality image".into()))?;
    let kind = PolicyKind::build(policy, budget, &resolved, Some(&pool))?;
    if let Some(dir) = heldout_dir {
        check_disjoint(pool.source_ids(), &list_images(dir)?)?;
    }
    let mut policy = kind.instance(resolved.run.seed, 0);

    let easy = eval_ood_easy(&resolved.run, policy.as_mut(), Arc::clone(&pool))?;
    write_file(&out.join("ood_easy.json"), serde_json::to_string_pretty(&easy)?.as_bytes())?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.serialize(&easy.control)?;
    for score in &easy.per_augmentation {
        csv.serialize(score)?;
    }
    let bytes = csv.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))?;
    write_file(&out.join("ood_easy.csv"), &bytes)?;
    println!("control: {:.2}", easy.control.success_rate);
    for s in &easy.per_augmentation {
        println!("{}: {:.2}", s.augmentation, s.success_rate);
    }
    println!("easy_mean: {:.4}", easy.overall_mean);

    if let Some(dir) = heldout_dir {
        let hard = eval_ood_hard(&resolved.run, policy.as_mut(), &pool, dir)?;
        write_file(&out.join("ood_hard.json"), serde_json::to_string_pretty(&hard)?.as_bytes())?;
        println!("hard: {:.2}", hard.success_rate);
    }
    Ok(())
}

fn parse_blank_fill(s: &str) -> Result<BlankFill> {
    match s.trim() {
        "black" => Ok(BlankFill::Black),
        "source" | "source_patch" => Ok(BlankFill::SourcePatch),
        other => match other.strip_prefix("noise:").map(str::parse) {
            Some(Ok(seed)) => Ok(BlankFill::Noise { seed }),
            _ => Err(Error::Config(format!(
                "bad blank fill {other:?} (black, source, noise:<seed>)"
            ))),
        },
    }
}

fn parse_augment(s: &str) -> Result<AugmentSpec> {
    s.parse().map_err(|e: Error| Error::Config(e.to_string()))
}

pub fn render(
    state: &str,
    image: &Path,
    out: &Path,
    render_size: Option<usize>,
    augment: &str,
    seed: u64,
    blank_fill: &str,
) -> Result<()> {
    let state: PuzzleState = state.parse()?;
    let augment = parse_augment(augment)?;
    let blank = parse_blank_fill(blank_fill)?;
    let side = render_size.unwrap_or_else(|| default_render_size(&augment));
    let source = Image::decode(&read_input(image)?)?.resize_bilinear(side, side);
    // Work on the 8-bit grid so that PNG stages compose exactly.
    let rendered = Image::from_rgb8(&render_image_obs(&state, &source, blank)?.to_rgb8());
    let rendered = augment.apply(&rendered, &mut RandomSource::new(seed))?;
    write_output(out, &rendered.encode_png()?)
}

pub fn augment(augment: &str, input: &Path, out: &Path, seed: u64) -> Result<()> {
    let augment = parse_augment(augment)?;
    let img = Image::decode(&read_input(input)?)?;
    let img = augment.apply(&img, &mut RandomSource::new(seed))?;
    write_output(out, &img.encode_png()?)
}

pub fn export_probe(run: &RunArgs, samples: usize, out: &Path) -> Result<()> {
    let (resolved, pool) = prepare(run, out)?;
    let pool = pool.ok_or_else(|| Error::Config("probe export needs --modality image".into()))?;
    let r = &resolved.run;
    let manifest = export_probe_dataset(r.dims, &r.obs, &pool, samples, r.seed, out)?;
    println!(
        "wrote {} samples: observations {:?}, labels {:?}",
        manifest.samples, manifest.observation_shape, manifest.label_shape
    );
    Ok(())
}
