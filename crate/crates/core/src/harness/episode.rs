//! Episode records and the single-episode driver.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{Action, PuzzleState};
use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::env::PuzzleEnv;
use crate::harness::policy::{Policy, PolicyInput};
use crate::observation::ImagePool;
use crate::rng::RandomSource;

/// Version of the JSON-lines episode record.
pub const EPISODE_LOG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeOutcome {
    Solved,
    /// Hit the per-episode step cap.
    Truncated,
    /// Cut off by the end of the run (step cap or early termination).
    Interrupted,
    /// The policy failed.
    Aborted,
}

/// Full trajectory of one episode.
///
/// `solved` holds exactly when the last reward is +1, or the episode
/// started solved and has length 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub schema: u32,
    pub env_index: usize,
    pub episode_index: u64,
    pub seed: u64,
    pub image_index: Option<usize>,
    pub start_state: PuzzleState,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub length: usize,
    pub solved: bool,
    pub outcome: EpisodeOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EpisodeLog {
    pub(crate) fn start(env_index: usize, episode_index: u64, env: &PuzzleEnv) -> Self {
        Self {
            schema: EPISODE_LOG_SCHEMA,
            env_index,
            episode_index,
            seed: env.episode_seed().expect("episode started"),
            image_index: env.image_index(),
            start_state: env.state().expect("episode started").clone(),
            actions: Vec::new(),
            rewards: Vec::new(),
            length: 0,
            solved: false,
            outcome: EpisodeOutcome::Interrupted,
            error: None,
        }
    }

    pub(crate) fn push(&mut self, action: Action, reward: f64) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.length += 1;
    }

    pub(crate) fn finish(&mut self, outcome: EpisodeOutcome, error: Option<String>) {
        self.outcome = outcome;
        self.solved = outcome == EpisodeOutcome::Solved;
        self.error = error;
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let line = self.to_json_line()?;
        writeln!(w, "{line}").map_err(|e| Error::io("<episode log>", e))
    }
}

/// What happened in one tick of one environment.
#[derive(Debug)]
pub(crate) struct Tick {
    pub started: Option<EpisodeLog>,
    pub step: Option<(Action, f64)>,
    pub ended: Option<(EpisodeOutcome, Option<String>)>,
}

/// Advances `env` by one step under `policy`, resetting first if the
/// previous episode is over. An episode that starts solved ends in the
/// same tick without consuming a step.
pub(crate) fn tick(
    env: &mut PuzzleEnv,
    policy: &mut dyn Policy,
    env_index: usize,
    episode_index: &mut u64,
) -> Tick {
    let mut out = Tick {
        started: None,
        step: None,
        ended: None,
    };
    if env.is_done() {
        env.reset_state(None);
        policy.begin_episode();
        out.started = Some(EpisodeLog::start(env_index, *episode_index, env));
        *episode_index += 1;
        if env.state().is_some_and(PuzzleState::is_solved) {
            out.ended = Some((EpisodeOutcome::Solved, None));
            return out;
        }
    }
    let observation = if policy.needs_observation() {
        match env.observe() {
            Ok(o) => Some(o),
            Err(e) => {
                out.ended = Some((EpisodeOutcome::Aborted, Some(e.to_string())));
                return out;
            }
        }
    } else {
        None
    };
    let input = PolicyInput {
        observation: observation.as_ref(),
        state: env.state().expect("episode running"),
        step: env.step_index(),
    };
    let action = match policy.act(&input) {
        Ok(a) => a,
        Err(e) => {
            out.ended = Some((EpisodeOutcome::Aborted, Some(e.to_string())));
            return out;
        }
    };
    let result = env.step_state(action).expect("episode running");
    out.step = Some((action, result.reward));
    if result.terminated {
        out.ended = Some((EpisodeOutcome::Solved, None));
    } else if result.truncated {
        out.ended = Some((EpisodeOutcome::Truncated, None));
    }
    out
}

/// Plays one episode from `seed` to completion.
pub(crate) fn play_seeded(
    env: &mut PuzzleEnv,
    policy: &mut dyn Policy,
    seed: u64,
    env_index: usize,
    episode_index: u64,
) -> EpisodeLog {
    env.reset_state(Some(seed));
    policy.begin_episode();
    let mut log = EpisodeLog::start(env_index, episode_index, env);
    if log.start_state.is_solved() {
        log.finish(EpisodeOutcome::Solved, None);
        return log;
    }
    // The reset above already happened, so `tick` will not reset again.
    let mut unused = episode_index;
    loop {
        let t = tick(env, policy, env_index, &mut unused);
        debug_assert!(t.started.is_none());
        if let Some((a, r)) = t.step {
            log.push(a, r);
        }
        if let Some((outcome, error)) = t.ended {
            log.finish(outcome, error);
            return log;
        }
    }
}

/// Runs one episode: a fresh solvable start, one pool image, and steps
/// until solved or the episode cap. The episode seed is drawn from `rng`.
pub fn run_episode(
    config: &RunConfig,
    policy: &mut dyn Policy,
    pool: Option<&Arc<ImagePool>>,
    rng: &mut RandomSource,
) -> Result<EpisodeLog> {
    let mut env = PuzzleEnv::new(config, pool.cloned(), 0)?;
    let seed = rng.next_u64();
    Ok(play_seeded(&mut env, policy, seed, 0, 0))
}
