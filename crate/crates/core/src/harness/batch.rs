//! Round-robin driver over many environments.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::harness::config::RunConfig;
use crate::harness::env::PuzzleEnv;
use crate::harness::episode::{tick, EpisodeLog, EpisodeOutcome, Tick};
use crate::harness::metrics::{CurvePoint, MetricsReport, METRICS_SCHEMA, RECENT_EPISODES};
use crate::harness::policy::{Policy, PolicyFactory};
use crate::observation::ImagePool;
use crate::rng::RandomSource;

struct Worker {
    env: PuzzleEnv,
    policy: Box<dyn Policy>,
    episodes: u64,
    retired: bool,
}

/// Seed of environment `i` in a run seeded with `seed`.
pub fn env_seed(seed: u64, env_index: usize) -> u64 {
    RandomSource::with_stream(seed, env_index as u64).next_u64()
}

/// Aggregator state; consumes ticks strictly in env order.
struct Aggregator<'s> {
    open: Vec<Option<EpisodeLog>>,
    last_solved: Vec<bool>,
    solved_envs: usize,
    recent: VecDeque<(bool, usize)>,
    total_steps: u64,
    finished: u64,
    interrupted: u64,
    aborted: u64,
    threshold: f64,
    crossed_at: Option<u64>,
    early: Option<(usize, f64)>,
    early_fired: bool,
    curve: Vec<CurvePoint>,
    sink: &'s mut dyn FnMut(&EpisodeLog) -> Result<()>,
}

impl Aggregator<'_> {
    fn indicator(&self) -> f64 {
        self.solved_envs as f64 / self.last_solved.len() as f64
    }

    fn consume(&mut self, env_index: usize, t: Tick) -> Result<()> {
        if let Some(log) = t.started {
            self.open[env_index] = Some(log);
        }
        if let Some((a, r)) = t.step {
            self.open[env_index].as_mut().expect("open episode").push(a, r);
            self.total_steps += 1;
        }
        if let Some((outcome, error)) = t.ended {
            let mut log = self.open[env_index].take().expect("open episode");
            log.finish(outcome, error);
            self.close(env_index, &log)?;
        }
        if self.crossed_at.is_none() && self.indicator() >= self.threshold {
            self.crossed_at = Some(self.total_steps);
        }
        Ok(())
    }

    fn close(&mut self, env_index: usize, log: &EpisodeLog) -> Result<()> {
        (self.sink)(log)?;
        if log.outcome == EpisodeOutcome::Aborted {
            self.aborted += 1;
        }
        self.finished += 1;
        if self.last_solved[env_index] != log.solved {
            self.last_solved[env_index] = log.solved;
            if log.solved {
                self.solved_envs += 1;
            } else {
                self.solved_envs -= 1;
            }
        }
        self.recent.push_back((log.solved, log.length));
        if let Some((window, _)) = self.early {
            while self.recent.len() > window.max(RECENT_EPISODES) {
                self.recent.pop_front();
            }
        } else if self.recent.len() > RECENT_EPISODES {
            self.recent.pop_front();
        }
        self.curve.push(CurvePoint {
            steps: self.total_steps,
            episodes: self.finished,
            success_indicator: self.indicator(),
        });
        if let Some((window, success)) = self.early {
            if self.recent.len() >= window {
                let solved = self.recent.iter().rev().take(window).filter(|e| e.0).count();
                if solved as f64 >= success * window as f64 {
                    self.early_fired = true;
                }
            }
        }
        Ok(())
    }
}

/// Runs `config.num_envs` environments round-robin until the step cap,
/// early termination, or every policy has failed.
///
/// Each round ticks every live environment once (in parallel when the
/// policies read observations) and then feeds the results to a single
/// aggregator in env order, so the log stream depends only on the seeds.
/// Episodes still open at the end are flushed as `interrupted`, which keeps
/// the sum of logged lengths equal to `total_steps`.
pub fn run_batch(
    config: &RunConfig,
    factory: &PolicyFactory<'_>,
    pool: Option<Arc<ImagePool>>,
    sink: &mut dyn FnMut(&EpisodeLog) -> Result<()>,
) -> Result<MetricsReport> {
    config.validate()?;
    let mut workers = (0..config.num_envs)
        .map(|i| {
            Ok(Worker {
                env: PuzzleEnv::new(config, pool.clone(), env_seed(config.seed, i))?,
                policy: factory(i),
                episodes: 0,
                retired: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let policy_name = workers[0].policy.name().to_string();
    let parallel = workers.iter().any(|w| w.policy.needs_observation()) && workers.len() > 1;

    let mut agg = Aggregator {
        open: vec![None; config.num_envs],
        last_solved: vec![false; config.num_envs],
        solved_envs: 0,
        recent: VecDeque::new(),
        total_steps: 0,
        finished: 0,
        interrupted: 0,
        aborted: 0,
        threshold: config.success_threshold,
        crossed_at: None,
        early: config.early_termination.map(|e| (e.window, e.success)),
        early_fired: false,
        curve: Vec::new(),
        sink,
    };

    'run: while agg.total_steps < config.total_step_cap && !agg.early_fired {
        // Never tick more envs than there are steps left under the cap.
        let remaining = config.total_step_cap - agg.total_steps;
        let live: Vec<usize> = (0..workers.len())
            .filter(|&i| !workers[i].retired)
            .take(usize::try_from(remaining).unwrap_or(usize::MAX))
            .collect();
        if live.is_empty() {
            break;
        }
        let mut selected: Vec<(usize, &mut Worker)> = workers
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| live.binary_search(i).is_ok())
            .collect();
        let run = |(i, w): &mut (usize, &mut Worker)| {
            let t = tick(&mut w.env, w.policy.as_mut(), *i, &mut w.episodes);
            if matches!(t.ended, Some((EpisodeOutcome::Aborted, _))) {
                w.retired = true;
            }
            (*i, t)
        };
        let ticks: Vec<(usize, Tick)> = if parallel {
            selected.par_iter_mut().map(run).collect()
        } else {
            selected.iter_mut().map(run).collect()
        };
        for (i, t) in ticks {
            agg.consume(i, t)?;
            if agg.early_fired {
                // Ticks after the firing one are discarded; their envs'
                // open episodes are flushed below with the steps counted so far.
                break 'run;
            }
        }
    }

    for i in 0..workers.len() {
        if let Some(mut log) = agg.open[i].take() {
            log.finish(EpisodeOutcome::Interrupted, None);
            (agg.sink)(&log)?;
            agg.interrupted += 1;
        }
    }

    let window: Vec<&(bool, usize)> = agg.recent.iter().rev().take(RECENT_EPISODES).collect();
    let (success_rate, mean_episode_length) = if window.is_empty() {
        (0.0, 0.0)
    } else {
        let n = window.len() as f64;
        (
            window.iter().filter(|e| e.0).count() as f64 / n,
            window.iter().map(|e| e.1 as f64).sum::<f64>() / n,
        )
    };
    Ok(MetricsReport {
        schema: METRICS_SCHEMA,
        policy: policy_name,
        dims: config.dims.to_string(),
        seed: config.seed,
        num_envs: config.num_envs,
        total_step_cap: config.total_step_cap,
        total_steps: agg.total_steps,
        episodes_finished: agg.finished,
        episodes_interrupted: agg.interrupted,
        episodes_aborted: agg.aborted,
        success_rate,
        mean_episode_length,
        success_threshold: config.success_threshold,
        steps_to_threshold: agg.crossed_at.unwrap_or(config.total_step_cap),
        censored: agg.crossed_at.is_none(),
        early_terminated: agg.early_fired,
        curve: agg.curve,
    })
}
