use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::observation::{encode_observation, Observation};
use crate::mdp::reward::{reward_terms, RewardConfig, RewardTerms};
use crate::mdp::trace::{TraceDataset, TraceRow};
use crate::product::{Product, NUM_PRODUCTS};
use crate::scenario::ScenarioWeek;
use crate::sim::SimState;

#[derive(Debug, Clone)]
pub struct Transition {
    pub state: SimState,
    pub observation: Observation,
    pub reward: f64,
    pub terms: RewardTerms,
    pub done: bool,
}

pub fn reset(scenario: &ScenarioWeek) -> (SimState, Observation) {
    let state = SimState::initial(scenario);
    let obs = encode_observation(&state, scenario);
    (state, obs)
}

/// Produces one lot of product `action + 1`. The episode ends once the
/// planning horizon is reached or every schedule is complete.
pub fn step(scenario: &ScenarioWeek, state: &SimState, action: usize, cfg: &RewardConfig) -> Result<Transition> {
    if state.is_terminal(scenario) {
        return Err(Error::Usage("step called on a finished episode; reset first".into()));
    }
    let product = Product::from_action(action)?;
    let mut next = state.clone();
    next.produce_lot(scenario, product);
    let observation = encode_observation(&next, scenario);
    let terms = reward_terms(state, &next, &observation, scenario, cfg);
    let done = next.is_terminal(scenario);
    Ok(Transition { state: next, observation, reward: terms.total(), terms, done })
}

/// Uniform draw of a week index, reproducible per seed.
pub fn sample_scenario(weeks: &[ScenarioWeek], seed: u64) -> Result<usize> {
    if weeks.is_empty() {
        return Err(Error::Config("no scenario weeks configured".into()));
    }
    Ok(ChaCha8Rng::seed_from_u64(seed).gen_range(0..weeks.len()))
}

/// Stateful wrapper with the usual reset/step contract.
#[derive(Debug, Clone)]
pub struct Env<'a> {
    scenario: &'a ScenarioWeek,
    cfg: RewardConfig,
    state: SimState,
    observation: Observation,
    steps: usize,
    done: bool,
}

impl<'a> Env<'a> {
    pub fn new(scenario: &'a ScenarioWeek, cfg: RewardConfig) -> Self {
        let (state, observation) = reset(scenario);
        let done = state.is_terminal(scenario);
        Env { scenario, cfg, state, observation, steps: 0, done }
    }

    pub fn reset(&mut self) -> Observation {
        *self = Env::new(self.scenario, self.cfg);
        self.observation
    }

    pub fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::Usage("step called on a finished episode; reset first".into()));
        }
        let t = step(self.scenario, &self.state, action, &self.cfg)?;
        self.state = t.state.clone();
        self.observation = t.observation;
        self.done = t.done;
        self.steps += 1;
        Ok(t)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn scenario(&self) -> &ScenarioWeek {
        self.scenario
    }
}

/// One finished episode.
#[derive(Debug, Clone)]
pub struct Episode {
    pub trace: TraceDataset,
    pub rewards: Vec<f64>,
    pub final_state: SimState,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Idle minutes plus weighted changeover minutes.
    pub fn cost(&self, setup_weight: f64) -> f64 {
        self.final_state.total_idle_minutes() as f64 + setup_weight * self.final_state.cumulative_setup_minutes as f64
    }
}

/// Runs `policy` from reset until done, recording every decision.
pub fn run_episode<F>(scenario: &ScenarioWeek, cfg: &RewardConfig, mut policy: F) -> Result<Episode>
where
    F: FnMut(&Observation) -> Result<usize>,
{
    let mut env = Env::new(scenario, *cfg);
    let mut rows = Vec::new();
    let mut rewards = Vec::new();
    while !env.is_done() {
        let obs = *env.observation();
        let action = policy(&obs)?;
        if action >= NUM_PRODUCTS {
            return Err(Error::Domain(format!("policy chose action {action}")));
        }
        let t = env.step(action)?;
        rows.push(TraceRow { step_index: rows.len(), observation: obs, action });
        rewards.push(t.reward);
    }
    Ok(Episode { trace: TraceDataset { rows }, rewards, final_state: env.state().clone() })
}
