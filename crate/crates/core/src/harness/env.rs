//! Single puzzle environment with a reset/step interface.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::augment::AugmentSpec;
use crate::env::{apply_action_with, Action, InitMethod, PuzzleState, RewardConfig, StepOutcome};
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::observation::{ImagePool, Modality, Observation, ObsSpec};
use crate::rng::RandomSource;
use crate::GridDims;

/// Ground truth reported alongside observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub state: PuzzleState,
    pub image_index: Option<usize>,
    pub episode_seed: u64,
    pub step: usize,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    image_index: Option<usize>,
    state: PuzzleState,
    step: usize,
    done: bool,
    augment_rng: RandomSource,
}

/// One environment instance.
///
/// Episode `k` is fully determined by its seed: the start state and image
/// index come from stream 0 of that seed and augmentation draws from
/// stream 1. Without an explicit seed, [`PuzzleEnv::reset`] takes the next
/// word of the environment's own source.
#[derive(Debug, Clone)]
pub struct PuzzleEnv {
    dims: GridDims,
    obs: ObsSpec,
    max_episode_steps: usize,
    init: InitMethod,
    reward: RewardConfig,
    augment: AugmentSpec,
    pool: Option<Arc<ImagePool>>,
    seeds: RandomSource,
    episode: Option<Episode>,
}

impl PuzzleEnv {
    pub fn new(config: &RunConfig, pool: Option<Arc<ImagePool>>, seed: u64) -> Result<Self> {
        config.validate()?;
        if config.obs.modality == Modality::Image {
            let pool = pool
                .as_ref()
                .ok_or_else(|| Error::Config("image modality needs an image pool".into()))?;
            if pool.render_size() != config.obs.render_size {
                return Err(Error::Config(format!(
                    "pool rendered at {} px but the observation spec wants {} px",
                    pool.render_size(),
                    config.obs.render_size
                )));
            }
        }
        Ok(Self {
            dims: config.dims,
            obs: config.obs,
            max_episode_steps: config.max_episode_steps,
            init: config.init,
            reward: config.reward,
            augment: config.augment.clone(),
            pool,
            seeds: RandomSource::new(seed),
            episode: None,
        })
    }

    /// Replaces the augmentation applied to observations.
    pub fn set_augment(&mut self, augment: AugmentSpec) {
        self.augment = augment;
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn obs_spec(&self) -> &ObsSpec {
        &self.obs
    }

    pub fn state(&self) -> Option<&PuzzleState> {
        self.episode.as_ref().map(|e| &e.state)
    }

    pub fn image_index(&self) -> Option<usize> {
        self.episode.as_ref().and_then(|e| e.image_index)
    }

    pub fn episode_seed(&self) -> Option<u64> {
        self.episode.as_ref().map(|e| e.seed)
    }

    pub fn step_index(&self) -> usize {
        self.episode.as_ref().map_or(0, |e| e.step)
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().map_or(true, |e| e.done)
    }

    /// Starts a new episode without rendering.
    pub fn reset_state(&mut self, seed: Option<u64>) -> &PuzzleState {
        let seed = seed.unwrap_or_else(|| self.seeds.next_u64());
        let mut rng = RandomSource::with_stream(seed, 0);
        let state = self.init.sample(self.dims, &mut rng);
        let image_index = match (&self.pool, self.obs.modality) {
            (Some(pool), Modality::Image) => Some(pool.select_episode_image(&mut rng)),
            _ => None,
        };
        let done = state.is_solved();
        self.episode = Some(Episode {
            seed,
            image_index,
            state,
            step: 0,
            done,
            augment_rng: RandomSource::with_stream(seed, 1),
        });
        &self.episode.as_ref().expect("just set").state
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<(Observation, StepInfo)> {
        self.reset_state(seed);
        let observation = self.observe()?;
        Ok((observation, self.info(true)))
    }

    /// Renders the current state, applying the configured augmentations.
    pub fn observe(&mut self) -> Result<Observation> {
        let episode = self
            .episode
            .as_mut()
            .ok_or_else(|| Error::Config("environment has not been reset".into()))?;
        let image = match (episode.image_index, &self.pool) {
            (Some(i), Some(pool)) => Some(pool.image(i)),
            _ => None,
        };
        let obs = Observation::render(&episode.state, &self.obs, image)?;
        match obs {
            Observation::Image(img) if !self.augment.is_empty() => Ok(Observation::Image(
                self.augment.apply(&img, &mut episode.augment_rng)?,
            )),
            other => Ok(other),
        }
    }

    /// Advances the episode without rendering.
    pub fn step_state(&mut self, action: Action) -> Result<StepOutcome> {
        let episode = self
            .episode
            .as_mut()
            .ok_or_else(|| Error::Config("environment has not been reset".into()))?;
        if episode.done {
            return Err(Error::Config("episode is over; call reset".into()));
        }
        let out = apply_action_with(
            &episode.state,
            action,
            episode.step,
            self.max_episode_steps,
            self.reward,
        );
        episode.state = out.next_state.clone();
        episode.step += 1;
        episode.done = out.terminated || out.truncated;
        Ok(out)
    }

    pub fn step(&mut self, action: Action) -> Result<EnvStep> {
        let out = self.step_state(action)?;
        let observation = self.observe()?;
        Ok(EnvStep {
            observation,
            reward: out.reward,
            terminated: out.terminated,
            truncated: out.truncated,
            info: self.info(out.valid),
        })
    }

    fn info(&self, valid: bool) -> StepInfo {
        let e = self.episode.as_ref().expect("episode running");
        StepInfo {
            state: e.state.clone(),
            image_index: e.image_index,
            episode_seed: e.seed,
            step: e.step,
            valid,
        }
    }
}
