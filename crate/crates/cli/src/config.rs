//! Run configuration: a sectioned TOML file, overridden by flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use slidegym::augment::AugmentSpec;
use slidegym::harness::{
    default_render_size, EarlyTermination, RunConfig, DEFAULT_MAX_EPISODE_STEPS, DEFAULT_NUM_ENVS,
    DEFAULT_SUCCESS_THRESHOLD, DEFAULT_TOTAL_STEP_CAP,
};
use slidegym::observation::{dataset_dir_from_env, Modality, ObsSpec};
use slidegym::{Error, GridDims, Result};

pub const CONFIG_SCHEMA: u32 = 1;
pub const ECHO_FILE: &str = "config.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: Option<u32>,
    #[serde(default)]
    pub env: EnvSection,
    #[serde(default)]
    pub pool: PoolSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub dims: Option<GridDims>,
    pub modality: Option<Modality>,
    pub render_size: Option<usize>,
    pub max_episode_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    pub size: Option<usize>,
    pub seed: Option<u64>,
    pub dataset_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub num_envs: Option<usize>,
    pub total_steps: Option<u64>,
    pub augment: Option<String>,
    pub early_termination: Option<bool>,
    pub success_threshold: Option<f64>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        match cfg.schema {
            None | Some(CONFIG_SCHEMA) => Ok(cfg),
            Some(v) => Err(Error::Config(format!(
                "{}: unsupported config schema {v} (expected {CONFIG_SCHEMA})",
                path.display()
            ))),
        }
    }
}

/// Flags shared by the commands that build environments.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid size as HxW.
    #[arg(long)]
    pub dims: Option<GridDims>,
    #[arg(long)]
    pub pool_size: Option<usize>,
    #[arg(long)]
    pub pool_seed: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub num_envs: Option<usize>,
    #[arg(long)]
    pub max_episode_steps: Option<usize>,
    /// Total environment-step cap of the run.
    #[arg(long)]
    pub total_steps: Option<u64>,
    /// image, onehot or state.
    #[arg(long)]
    pub modality: Option<Modality>,
    #[arg(long)]
    pub render_size: Option<usize>,
    /// Comma-separated augmentations, e.g. `crop,shift` or `none`.
    #[arg(long)]
    pub augment: Option<String>,
    /// Disable stopping after a window of fully successful episodes.
    #[arg(long)]
    pub no_early_termination: bool,
    #[arg(long, env = "SPGYM_DATASET_DIR")]
    pub dataset_dir: Option<PathBuf>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub run: RunConfig,
    pub dataset_dir: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => FileConfig::read(p)?,
            None => FileConfig::default(),
        };
        let augment: AugmentSpec = self
            .augment
            .as_deref()
            .or(file.run.augment.as_deref())
            .unwrap_or("none")
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        let modality = self.modality.or(file.env.modality).unwrap_or(Modality::Image);
        let render_size = self
            .render_size
            .or(file.env.render_size)
            .unwrap_or_else(|| default_render_size(&augment));
        let early = if self.no_early_termination {
            false
        } else {
            file.run.early_termination.unwrap_or(true)
        };
        let run = RunConfig {
            dims: match self.dims.or(file.env.dims) {
                Some(d) => d,
                None => GridDims::new(3, 3)?,
            },
            pool_size: self.pool_size.or(file.pool.size).unwrap_or(1),
            pool_seed: self.pool_seed.or(file.pool.seed).unwrap_or(0),
            obs: ObsSpec {
                modality,
                render_size,
                ..ObsSpec::default()
            },
            num_envs: self.num_envs.or(file.run.num_envs).unwrap_or(DEFAULT_NUM_ENVS),
            max_episode_steps: self
                .max_episode_steps
                .or(file.env.max_episode_steps)
                .unwrap_or(DEFAULT_MAX_EPISODE_STEPS),
            total_step_cap: self
                .total_steps
                .or(file.run.total_steps)
                .unwrap_or(DEFAULT_TOTAL_STEP_CAP),
            seed: self.seed.or(file.run.seed).unwrap_or(0),
            augment,
            early_termination: early.then(EarlyTermination::default),
            success_threshold: file.run.success_threshold.unwrap_or(DEFAULT_SUCCESS_THRESHOLD),
            ..RunConfig::default()
        };
        run.validate()?;
        let dataset_dir = self
            .dataset_dir
            .clone()
            .or(file.pool.dataset_dir)
            .or_else(|| dataset_dir_from_env(None));
        Ok(Resolved { run, dataset_dir })
    }
}

impl Resolved {
    /// The effective configuration in the same format as the input file.
    pub fn to_file_config(&self) -> FileConfig {
        let r = &self.run;
        FileConfig {
            schema: Some(CONFIG_SCHEMA),
            env: EnvSection {
                dims: Some(r.dims),
                modality: Some(r.obs.modality),
                render_size: Some(r.obs.render_size),
                max_episode_steps: Some(r.max_episode_steps),
            },
            pool: PoolSection {
                size: Some(r.pool_size),
                seed: Some(r.pool_seed),
                dataset_dir: self.dataset_dir.clone(),
            },
            run: RunSection {
                seed: Some(r.seed),
                num_envs: Some(r.num_envs),
                total_steps: Some(r.total_step_cap),
                augment: Some(r.augment.to_string()),
                early_termination: Some(r.early_termination.is_some()),
                success_threshold: Some(r.success_threshold),
            },
        }
    }

    pub fn echo(&self, out_dir: &Path) -> Result<()> {
        let text = toml::to_string(&self.to_file_config())
            .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
        let path = out_dir.join(ECHO_FILE);
        std::fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
    }
}
