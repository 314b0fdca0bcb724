//! Explainable reinforcement learning for a two-stage production scheduling
//! problem: simulator, MDP, policy network, trainer, attribution methods,
//! hypothesis testing and exploratory reports.

pub mod eda;
pub mod error;
pub mod hypotheses;
pub mod mdp;
pub mod policy;
pub mod product;
pub mod scenario;
pub mod sim;
pub mod trainer;
pub mod xattr;

pub use error::{Error, Result};
pub use hypotheses::{Hypothesis, HypothesisFinding, Verdict, VerdictLevel};
pub use mdp::{Observation, RewardConfig, TraceDataset};
pub use policy::PolicyNetwork;
pub use product::{Product, NUM_PRODUCTS};
pub use scenario::{ScenarioWeek, ScheduleItem};
pub use sim::{SimState, StationState};
pub use trainer::{TrainConfig, TrainOutcome};
pub use xattr::{AttributionRecord, BackgroundSet, Method};
