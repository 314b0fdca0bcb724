use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::mdp::observation::Observation;
use crate::mdp::reward::criticality;
use crate::product::{Product, NUM_PRODUCTS};

/// Rule-based baselines for driving the PAS without a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    /// Uniformly random product every decision.
    Random,
    /// Always the same product.
    Constant(Product),
    /// The most critical product; keeps the current product when nothing is critical.
    MostCritical,
}

impl std::str::FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Heuristic::Random),
            "most-critical" => Ok(Heuristic::MostCritical),
            _ => match s.strip_prefix("constant:").map(str::parse::<u8>) {
                Some(Ok(id)) => Ok(Heuristic::Constant(Product::new(id)?)),
                _ => Err(Error::Config(format!(
                    "unknown heuristic {s:?}; expected random, most-critical or constant:<1..8>"
                ))),
            },
        }
    }
}

impl Heuristic {
    pub fn choose(&self, obs: &Observation, rng: &mut dyn RngCore) -> usize {
        match self {
            Heuristic::Random => rng.gen_range(0..NUM_PRODUCTS),
            Heuristic::Constant(p) => p.index(),
            Heuristic::MostCritical => {
                let mut best: Option<(f64, Product)> = None;
                for p in Product::all() {
                    let c = criticality(obs.next_24h_demand(p), obs.buffer_content_duration(p)).unwrap_or(0.0);
                    if c > 0.0 && best.map_or(true, |(b, _)| c > b) {
                        best = Some((c, p));
                    }
                }
                if let Some((_, p)) = best {
                    return p.index();
                }
                if let Some(p) = obs.last_prod_type() {
                    return p.index();
                }
                // Nothing critical and no history: largest remaining demand.
                Product::all()
                    .max_by(|a, b| {
                        obs.end_of_planning_period_demand(*a)
                            .total_cmp(&obs.end_of_planning_period_demand(*b))
                            .then(b.cmp(a))
                    })
                    .map(Product::index)
                    .unwrap_or(0)
            }
        }
    }
}
