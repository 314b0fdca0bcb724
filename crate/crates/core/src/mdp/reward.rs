use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::observation::{encode_observation, net_demand, Observation};
use crate::product::Product;
use crate::scenario::ScenarioWeek;
use crate::sim::SimState;

/// Floor applied to the content duration in the criticality ratio.
pub const CRITICALITY_EPS: f64 = 1e-6;

/// Ratio of short-term net demand to buffer content duration (both normalized).
/// Zero demand is never critical.
pub fn criticality(demand_24h: f64, buffer_duration: f64) -> Result<f64> {
    if !(demand_24h >= 0.0) || !(buffer_duration >= 0.0) {
        return Err(Error::Domain(format!(
            "criticality needs nonnegative inputs, got demand {demand_24h}, duration {buffer_duration}"
        )));
    }
    if demand_24h == 0.0 {
        return Ok(0.0);
    }
    Ok(demand_24h / buffer_duration.max(CRITICALITY_EPS))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Penalty per changeover minute.
    pub setup_weight: f64,
    pub margin_threshold_minutes: f64,
    /// Penalty per required product whose content duration is under the threshold.
    pub margin_penalty: f64,
    pub discount: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { setup_weight: 1.0, margin_threshold_minutes: 30.0, margin_penalty: 1.0, discount: 0.99 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.setup_weight >= 0.0) || !(self.margin_penalty >= 0.0) {
            return Err(Error::Config("reward weights must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::Config(format!("discount {} outside [0, 1]", self.discount)));
        }
        Ok(())
    }
}

/// The three penalty terms, each reported as a nonnegative magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardTerms {
    pub criticality: f64,
    pub margin: f64,
    pub setup: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        -(self.criticality + self.margin + self.setup)
    }
}

pub(crate) fn reward_terms(
    prev: &SimState,
    next: &SimState,
    next_obs: &Observation,
    scenario: &ScenarioWeek,
    cfg: &RewardConfig,
) -> RewardTerms {
    let required = net_demand(&next.remaining_demand(scenario), &next.buffer);
    let mut crit = 0.0;
    let mut short = 0usize;
    for p in Product::all() {
        // Observation entries are in [0, 1], so the ratio is always defined.
        crit += criticality(next_obs.next_24h_demand(p), next_obs.buffer_content_duration(p)).unwrap_or(0.0);
        if required[p.index()] > 0
            && (next.buffer_content_duration(scenario, p) as f64) < cfg.margin_threshold_minutes
        {
            short += 1;
        }
    }
    let setup_minutes = next.cumulative_setup_minutes.saturating_sub(prev.cumulative_setup_minutes);
    RewardTerms {
        criticality: crit,
        margin: cfg.margin_penalty * short as f64,
        setup: cfg.setup_weight * setup_minutes as f64,
    }
}

/// Reward for the transition `prev -> next`: minus summed criticality, minus
/// the margin penalty per required product running short, minus weighted
/// changeover minutes. Never positive.
pub fn reward(prev: &SimState, next: &SimState, scenario: &ScenarioWeek, cfg: &RewardConfig) -> f64 {
    let obs = encode_observation(next, scenario);
    reward_terms(prev, next, &obs, scenario, cfg).total()
}
