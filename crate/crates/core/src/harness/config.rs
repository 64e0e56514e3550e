use serde::{Deserialize, Serialize};

use crate::augment::AugmentSpec;
use crate::env::{GridDims, InitMethod, RewardConfig};
use crate::error::{Error, Result};
use crate::observation::{Modality, ObsSpec, CROP_RENDER_SIZE, DEFAULT_RENDER_SIZE};

pub const DEFAULT_NUM_ENVS: usize = 64;
pub const DEFAULT_MAX_EPISODE_STEPS: usize = 1000;
pub const DEFAULT_TOTAL_STEP_CAP: u64 = 10_000_000;
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 0.8;

/// Stop a run once the last `window` finished episodes reach `success` rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyTermination {
    pub window: usize,
    pub success: f64,
}

impl Default for EarlyTermination {
    fn default() -> Self {
        Self {
            window: 100,
            success: 1.0,
        }
    }
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dims: GridDims,
    pub pool_size: usize,
    pub pool_seed: u64,
    pub obs: ObsSpec,
    pub num_envs: usize,
    pub max_episode_steps: usize,
    pub total_step_cap: u64,
    pub seed: u64,
    #[serde(default)]
    pub augment: AugmentSpec,
    #[serde(default)]
    pub init: InitMethod,
    #[serde(default)]
    pub reward: RewardConfig,
    pub early_termination: Option<EarlyTermination>,
    pub success_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: GridDims::new(3, 3).expect("3x3 is valid"),
            pool_size: 1,
            pool_seed: 0,
            obs: ObsSpec::default(),
            num_envs: DEFAULT_NUM_ENVS,
            max_episode_steps: DEFAULT_MAX_EPISODE_STEPS,
            total_step_cap: DEFAULT_TOTAL_STEP_CAP,
            seed: 0,
            augment: AugmentSpec::default(),
            init: InitMethod::Uniform,
            reward: RewardConfig::default(),
            early_termination: Some(EarlyTermination::default()),
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
        }
    }
}

/// Render size to use when none is given: 100 px with crop, 84 otherwise.
pub fn default_render_size(augment: &AugmentSpec) -> usize {
    if augment.has_crop() {
        CROP_RENDER_SIZE
    } else {
        DEFAULT_RENDER_SIZE
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_envs == 0 {
            return fail("num_envs must be at least 1".into());
        }
        if self.max_episode_steps == 0 {
            return fail("max_episode_steps must be positive".into());
        }
        if self.total_step_cap == 0 {
            return fail("total_step_cap must be positive".into());
        }
        if self.pool_size == 0 {
            return fail("pool_size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.success_threshold) {
            return fail(format!("success threshold {} not in [0, 1]", self.success_threshold));
        }
        if let Some(et) = self.early_termination {
            if et.window == 0 || !(0.0..=1.0).contains(&et.success) {
                return fail("early termination needs a positive window and success in [0, 1]".into());
            }
        }
        if self.obs.modality == Modality::Image {
            let side = self.obs.render_size;
            if side < self.dims.height().max(self.dims.width()) {
                return fail(format!("render size {side} is smaller than the {} grid", self.dims));
            }
        } else if !self.augment.is_empty() {
            return fail("augmentations need the image modality".into());
        }
        for aug in &self.augment.0 {
            aug.validate()?;
        }
        Ok(())
    }
}
