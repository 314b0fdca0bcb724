//! The scheduling problem as a Markov decision process: one decision per PAS
//! lot, a normalized 33-feature observation, and a penalty-only reward.

mod env;
mod heuristic;
mod observation;
mod reward;
mod trace;

pub use env::{reset, run_episode, sample_scenario, step, Env, Episode, Transition};
pub use heuristic::Heuristic;
pub use observation::{
    encode_observation, feature_index, feature_info, net_demand, FeatureGroup, Observation, FEATURE_NAMES, OBS_DIM,
};
pub use reward::{criticality, reward, RewardConfig, RewardTerms, CRITICALITY_EPS};
pub use trace::{column_names, TraceDataset, TraceRow, TRACE_COLUMNS};
