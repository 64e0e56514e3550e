//! Episode execution, batch metrics, and evaluation protocols.

mod batch;
mod config;
mod env;
mod episode;
mod metrics;
mod ood;
mod policy;
mod probe;

pub use batch::{env_seed, run_batch};
pub use config::{
    default_render_size, EarlyTermination, RunConfig, DEFAULT_MAX_EPISODE_STEPS,
    DEFAULT_NUM_ENVS, DEFAULT_SUCCESS_THRESHOLD, DEFAULT_TOTAL_STEP_CAP,
};
pub use env::{EnvStep, PuzzleEnv, StepInfo};
pub use episode::{run_episode, EpisodeLog, EpisodeOutcome, EPISODE_LOG_SCHEMA};
pub use metrics::{
    CurvePoint, Interval, MetricsReport, SeedAggregate, METRICS_SCHEMA, RECENT_EPISODES, Z_95,
};
pub use ood::{
    check_disjoint, eval_ood_easy, eval_ood_hard, eval_ood_hard_pool, ood_catalog,
    AugmentationScore, HardEpisode, OodEasyReport, OodHardReport, HELDOUT_POOL_LIMIT, OOD_EPISODES,
};
pub use policy::{
    observation_fingerprint, PixelMemorizer, Policy, PolicyFactory, PolicyInput, RandomPolicy,
    ScriptedPolicy,
};
pub use probe::{
    export_probe_dataset, ProbeDataset, ProbeManifest, LABELS_FILE, MANIFEST_FILE,
    OBSERVATIONS_FILE, PROBE_SCHEMA,
};
