//! Out-of-distribution protocols: augmented training images ("easy") and
//! unseen images ("hard").

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentSpec, Augmentation};
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::env::PuzzleEnv;
use crate::harness::episode::{play_seeded, EpisodeLog};
use crate::harness::policy::Policy;
use crate::observation::{list_images, ImagePool, Modality};
use crate::rng::RandomSource;
use crate::solver::manhattan_heuristic;

/// Episodes per augmentation (easy) and in total (hard).
pub const OOD_EPISODES: usize = 100;
/// Largest held-out pool drawn from the held-out directory.
pub const HELDOUT_POOL_LIMIT: usize = 100;

const EASY_STREAM: u64 = 0x00d_ea5e;
const HARD_STREAM: u64 = 0x00d_4a4d;

/// The six evaluation augmentations for observations of `render_size` px.
/// The crop keeps the 84/100 ratio of the standard pipeline.
pub fn ood_catalog(render_size: usize) -> [Augmentation; 6] {
    let mut catalog = Augmentation::catalog();
    catalog[0] = Augmentation::Crop {
        out_side: (render_size * 84 / 100).max(1),
    };
    catalog
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationScore {
    pub augmentation: String,
    pub episodes: usize,
    pub solved: usize,
    pub success_rate: f64,
}

impl AugmentationScore {
    fn from_logs(name: &str, logs: &[EpisodeLog]) -> Self {
        let solved = logs.iter().filter(|l| l.solved).count();
        Self {
            augmentation: name.to_string(),
            episodes: logs.len(),
            solved,
            success_rate: solved as f64 / logs.len().max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodEasyReport {
    pub policy: String,
    /// Same episodes without augmentation.
    pub control: AugmentationScore,
    pub per_augmentation: Vec<AugmentationScore>,
    /// Mean of the per-augmentation success rates.
    pub overall_mean: f64,
}

fn episode_seeds(seed: u64, stream: u64, n: usize) -> Vec<u64> {
    let mut rng = RandomSource::with_stream(seed, stream);
    (0..n).map(|_| rng.next_u64()).collect()
}

fn require_image(config: &RunConfig) -> Result<RunConfig> {
    if config.obs.modality != Modality::Image {
        return Err(Error::Config("OOD evaluation needs the image modality".into()));
    }
    Ok(RunConfig {
        augment: AugmentSpec::default(),
        ..config.clone()
    })
}

/// Runs [`OOD_EPISODES`] episodes on the training pool under each catalog
/// augmentation, drawn afresh for every observation, plus an
/// unaugmented control. Every augmentation sees the same start states and
/// images.
pub fn eval_ood_easy(
    config: &RunConfig,
    policy: &mut dyn Policy,
    train_pool: Arc<ImagePool>,
) -> Result<OodEasyReport> {
    let base = require_image(config)?;
    let seeds = episode_seeds(config.seed, EASY_STREAM, OOD_EPISODES);
    let mut env = PuzzleEnv::new(&base, Some(train_pool), 0)?;
    let run = |env: &mut PuzzleEnv, policy: &mut dyn Policy| -> Vec<EpisodeLog> {
        seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| play_seeded(env, policy, s, 0, i as u64))
            .collect()
    };
    let control = AugmentationScore::from_logs("none", &run(&mut env, policy));
    let mut per_augmentation = Vec::new();
    for aug in ood_catalog(config.obs.render_size) {
        aug.validate()?;
        let name = aug.name();
        env.set_augment(AugmentSpec(vec![aug]));
        per_augmentation.push(AugmentationScore::from_logs(name, &run(&mut env, policy)));
    }
    let overall_mean = per_augmentation.iter().map(|s| s.success_rate).sum::<f64>()
        / per_augmentation.len() as f64;
    Ok(OodEasyReport {
        policy: policy.name().to_string(),
        control,
        per_augmentation,
        overall_mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardEpisode {
    pub source_id: String,
    pub start_heuristic: u32,
    pub length: usize,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodHardReport {
    pub policy: String,
    pub heldout_images: usize,
    pub episodes: Vec<HardEpisode>,
    pub success_rate: f64,
}

/// Fails with [`Error::HeldoutOverlap`] when any held-out id is also a
/// training source id.
pub fn check_disjoint<'a>(
    train_ids: &[String],
    heldout_ids: impl IntoIterator<Item = &'a String>,
) -> Result<()> {
    let train: HashSet<&str> = train_ids.iter().map(String::as_str).collect();
    let mut shared: Vec<&str> = heldout_ids
        .into_iter()
        .map(String::as_str)
        .filter(|id| train.contains(id))
        .collect();
    if shared.is_empty() {
        return Ok(());
    }
    shared.sort_unstable();
    let shown = shared.iter().take(5).copied().collect::<Vec<_>>().join(", ");
    Err(Error::HeldoutOverlap(format!(
        "{} shared source id(s): {shown}",
        shared.len()
    )))
}

/// Loads up to [`HELDOUT_POOL_LIMIT`] images from `heldout_dir` (after the
/// disjointness check) and evaluates on them.
pub fn eval_ood_hard(
    config: &RunConfig,
    policy: &mut dyn Policy,
    train_pool: &ImagePool,
    heldout_dir: &Path,
) -> Result<OodHardReport> {
    let names = list_images(heldout_dir)?;
    check_disjoint(train_pool.source_ids(), &names)?;
    let n = names.len().min(HELDOUT_POOL_LIMIT);
    if n == 0 {
        return Err(Error::NotEnoughImages {
            dir: heldout_dir.to_path_buf(),
            wanted: 1,
            found: 0,
        });
    }
    let heldout = ImagePool::load(heldout_dir, n, config.obs.render_size, config.seed)?;
    eval_ood_hard_pool(config, policy, train_pool, &heldout)
}

/// Runs [`OOD_EPISODES`] episodes, episode `i` on held-out image
/// `i mod len`.
pub fn eval_ood_hard_pool(
    config: &RunConfig,
    policy: &mut dyn Policy,
    train_pool: &ImagePool,
    heldout: &ImagePool,
) -> Result<OodHardReport> {
    check_disjoint(train_pool.source_ids(), heldout.source_ids())?;
    if heldout.render_size() != config.obs.render_size {
        return Err(Error::Config(format!(
            "held-out pool rendered at {} px, expected {}",
            heldout.render_size(),
            config.obs.render_size
        )));
    }
    let base = require_image(config)?;
    let seeds = episode_seeds(config.seed, HARD_STREAM, OOD_EPISODES);
    let mut episodes = Vec::with_capacity(OOD_EPISODES);
    for (i, &seed) in seeds.iter().enumerate() {
        let k = i % heldout.len();
        let id = heldout.source_ids()[k].clone();
        let single = ImagePool::from_images(
            vec![(id.clone(), heldout.image(k).clone())],
            heldout.render_size(),
            heldout.pool_seed(),
        )?;
        let mut env = PuzzleEnv::new(&base, Some(Arc::new(single)), 0)?;
        let log = play_seeded(&mut env, policy, seed, 0, i as u64);
        episodes.push(HardEpisode {
            source_id: id,
            start_heuristic: manhattan_heuristic(&log.start_state),
            length: log.length,
            solved: log.solved,
        });
    }
    let success_rate = episodes.iter().filter(|e| e.solved).count() as f64 / episodes.len() as f64;
    Ok(OodHardReport {
        policy: policy.name().to_string(),
        heldout_images: heldout.len(),
        episodes,
        success_rate,
    })
}
