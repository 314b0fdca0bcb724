//! Desk-scale policy training over randomly drawn scenario weeks.

mod dqn;
mod reinforce;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{run_episode, Episode, RewardConfig, TraceDataset};
use crate::policy::{select_action, PolicyNetwork, SelectMode};
use crate::scenario::ScenarioWeek;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ReinforceBaseline,
    Dqn,
}

/// Monotone squashing applied to each step reward before computing returns.
/// Criticality spikes to ~1e6 when a demanded product's buffer is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardTransform {
    None,
    /// `sign(r) * ln(1 + |r|)`
    Symlog,
}

impl RewardTransform {
    pub fn apply(self, r: f64) -> f64 {
        match self {
            RewardTransform::None => r,
            RewardTransform::Symlog => r.signum() * r.abs().ln_1p(),
        }
    }
}

/// Linear decay from `start` to `end` over `decay_episodes`. REINFORCE reads
/// it as the sampling temperature, DQN as epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exploration {
    pub start: f64,
    pub end: f64,
    pub decay_episodes: usize,
}

impl Exploration {
    pub fn at(&self, episode: usize) -> f64 {
        if self.decay_episodes == 0 || episode >= self.decay_episodes {
            return self.end;
        }
        let frac = episode as f64 / self.decay_episodes as f64;
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub exploration: Exploration,
    pub rng_seed: u64,
    pub hidden_layers: Vec<usize>,
    pub reward: RewardConfig,
    pub reward_transform: RewardTransform,
    /// Episodes per gradient step (REINFORCE).
    pub batch_episodes: usize,
    /// Smoothing factor of the per-step return baseline (REINFORCE).
    pub baseline_decay: f64,
    pub entropy_bonus: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::ReinforceBaseline,
            episodes: 2000,
            learning_rate: 3e-3,
            gamma: 0.5,
            exploration: Exploration { start: 1.0, end: 1.0, decay_episodes: 0 },
            rng_seed: 0,
            hidden_layers: vec![64, 64],
            reward: RewardConfig::default(),
            reward_transform: RewardTransform::Symlog,
            batch_episodes: 4,
            baseline_decay: 0.9,
            entropy_bonus: 0.01,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning_rate {} must be finite and nonnegative", self.learning_rate)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if self.batch_episodes == 0 {
            return Err(Error::Config("batch_episodes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::Config("baseline_decay must be in [0, 1)".into()));
        }
        self.reward.validate()
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: PolicyNetwork,
    pub initial_network: PolicyNetwork,
    /// Undiscounted, untransformed return of every training episode.
    pub learning_curve: Vec<f64>,
}

/// Trains a policy, drawing one of `weeks` uniformly for every episode.
/// Deterministic for a given config.
pub fn train(weeks: &[ScenarioWeek], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if weeks.is_empty() {
        return Err(Error::Config("no scenario weeks configured".into()));
    }
    match cfg.algorithm {
        Algorithm::ReinforceBaseline => reinforce::train(weeks, cfg),
        Algorithm::Dqn => dqn::train(weeks, cfg),
    }
}

/// One greedy episode of `net` on `scenario`.
pub fn rollout(net: &PolicyNetwork, scenario: &ScenarioWeek, reward: &RewardConfig) -> Result<Episode> {
    net.expect_dims(crate::mdp::OBS_DIM, crate::NUM_PRODUCTS)?;
    run_episode(scenario, reward, |obs| select_action(&net.forward(obs.as_slice())?, SelectMode::Greedy))
}

pub fn rollout_trace(net: &PolicyNetwork, scenario: &ScenarioWeek, reward: &RewardConfig) -> Result<TraceDataset> {
    Ok(rollout(net, scenario, reward)?.trace)
}

pub fn write_learning_curve<W: Write>(curve: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["episode", "return"])?;
    for (i, r) in curve.iter().enumerate() {
        w.write_record([i.to_string(), r.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<learning curve>", e))?;
    Ok(())
}

pub fn save_learning_curve(curve: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_learning_curve(curve, std::io::BufWriter::new(file))
}
