use serde::{Deserialize, Serialize};

use crate::product::{Product, NUM_PRODUCTS};
use crate::scenario::{ScenarioWeek, DAY_MINUTES};
use crate::sim::SimState;

pub const OBS_DIM: usize = 3 * NUM_PRODUCTS + 1 + NUM_PRODUCTS;

const NEXT_24H: usize = 0;
const END_OF_PERIOD: usize = NUM_PRODUCTS;
const CONTENT_DURATION: usize = 2 * NUM_PRODUCTS;
const FILL_LEVEL: usize = 3 * NUM_PRODUCTS;
const LAST_TYPE: usize = 3 * NUM_PRODUCTS + 1;

/// Column names in observation order.
pub const FEATURE_NAMES: [&str; OBS_DIM] = [
    "next_24h_demand_prod1",
    "next_24h_demand_prod2",
    "next_24h_demand_prod3",
    "next_24h_demand_prod4",
    "next_24h_demand_prod5",
    "next_24h_demand_prod6",
    "next_24h_demand_prod7",
    "next_24h_demand_prod8",
    "end_of_planning_period_demand_prod1",
    "end_of_planning_period_demand_prod2",
    "end_of_planning_period_demand_prod3",
    "end_of_planning_period_demand_prod4",
    "end_of_planning_period_demand_prod5",
    "end_of_planning_period_demand_prod6",
    "end_of_planning_period_demand_prod7",
    "end_of_planning_period_demand_prod8",
    "buffer_content_duration_prod1",
    "buffer_content_duration_prod2",
    "buffer_content_duration_prod3",
    "buffer_content_duration_prod4",
    "buffer_content_duration_prod5",
    "buffer_content_duration_prod6",
    "buffer_content_duration_prod7",
    "buffer_content_duration_prod8",
    "buffer_fill_level",
    "last_prod_type_is_prod1",
    "last_prod_type_is_prod2",
    "last_prod_type_is_prod3",
    "last_prod_type_is_prod4",
    "last_prod_type_is_prod5",
    "last_prod_type_is_prod6",
    "last_prod_type_is_prod7",
    "last_prod_type_is_prod8",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Next24hDemand,
    EndOfPlanningPeriodDemand,
    BufferContentDuration,
    BufferFillLevel,
    LastProdType,
}

/// Group and product of a feature column.
pub fn feature_info(index: usize) -> Option<(FeatureGroup, Option<Product>)> {
    let product = |base: usize| Product::from_action(index - base).ok();
    Some(match index {
        i if i < END_OF_PERIOD => (FeatureGroup::Next24hDemand, product(NEXT_24H)),
        i if i < CONTENT_DURATION => (FeatureGroup::EndOfPlanningPeriodDemand, product(END_OF_PERIOD)),
        i if i < FILL_LEVEL => (FeatureGroup::BufferContentDuration, product(CONTENT_DURATION)),
        FILL_LEVEL => (FeatureGroup::BufferFillLevel, None),
        i if i < OBS_DIM => (FeatureGroup::LastProdType, product(LAST_TYPE)),
        _ => return None,
    })
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

/// The normalized state vector seen by the policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn next_24h_demand(&self, p: Product) -> f64 {
        self.0[NEXT_24H + p.index()]
    }

    pub fn end_of_planning_period_demand(&self, p: Product) -> f64 {
        self.0[END_OF_PERIOD + p.index()]
    }

    pub fn buffer_content_duration(&self, p: Product) -> f64 {
        self.0[CONTENT_DURATION + p.index()]
    }

    pub fn buffer_fill_level(&self) -> f64 {
        self.0[FILL_LEVEL]
    }

    pub fn last_prod_type(&self) -> Option<Product> {
        (0..NUM_PRODUCTS).find(|&i| self.0[LAST_TYPE + i] == 1.0).and_then(|i| Product::from_action(i).ok())
    }

    pub fn is_valid(&self) -> bool {
        let hot = self.0[LAST_TYPE..].iter().filter(|&&v| v == 1.0).count();
        self.0.iter().all(|v| (0.0..=1.0).contains(v)) && hot <= 1
    }
}

impl TryFrom<&[f64]> for Observation {
    type Error = crate::Error;

    fn try_from(values: &[f64]) -> crate::Result<Self> {
        let arr: [f64; OBS_DIM] = values
            .try_into()
            .map_err(|_| crate::Error::Config(format!("observation needs {OBS_DIM} values, got {}", values.len())))?;
        Ok(Observation(arr))
    }
}

/// Unmet demand per product after deducting buffered stock, in units.
pub fn net_demand(gross: &[u64; NUM_PRODUCTS], buffer: &[u32; NUM_PRODUCTS]) -> [u64; NUM_PRODUCTS] {
    std::array::from_fn(|i| gross[i].saturating_sub(buffer[i] as u64))
}

/// Encodes the simulator state. Demands are net of the buffer and scaled by
/// the week's largest gross demand; content durations are scaled by the
/// planning horizon.
pub fn encode_observation(state: &SimState, scenario: &ScenarioWeek) -> Observation {
    let mut v = [0.0; OBS_DIM];
    let day = net_demand(&state.demand_within(scenario, DAY_MINUTES), &state.buffer);
    let rest = net_demand(&state.remaining_demand(scenario), &state.buffer);
    let horizon = scenario.planning_horizon_minutes as f64;
    for p in Product::all() {
        let i = p.index();
        v[NEXT_24H + i] = (day[i] as f64 / scenario.demand_scale_24h()).min(1.0);
        v[END_OF_PERIOD + i] = (rest[i] as f64 / scenario.demand_scale_horizon()).min(1.0);
        v[CONTENT_DURATION + i] = (state.buffer_content_duration(scenario, p) as f64 / horizon).min(1.0);
    }
    v[FILL_LEVEL] = if scenario.buffer_capacity == 0 {
        0.0
    } else {
        (state.buffer_total() as f64 / scenario.buffer_capacity as f64).min(1.0)
    };
    if let Some(p) = state.last_pas_type {
        v[LAST_TYPE + p.index()] = 1.0;
    }
    Observation(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScheduleItem;

    fn one_station(items: Vec<(u8, u32, u32)>, initial: [u32; 8], capacity: u32) -> ScenarioWeek {
        let schedule = items
            .into_iter()
            .map(|(p, q, m)| ScheduleItem { product: Product::new(p).unwrap(), quantity: q, minutes_per_unit: m })
            .collect();
        let mut setup = [[10; 8]; 8];
        for (i, row) in setup.iter_mut().enumerate() {
            row[i] = 0;
        }
        ScenarioWeek::new("t", 4000, capacity, initial, [1; 8], setup, vec![schedule]).unwrap()
    }

    #[test]
    fn names_and_groups_line_up() {
        assert_eq!(FEATURE_NAMES.len(), 33);
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            let (group, product) = feature_info(i).unwrap();
            if let Some(p) = product {
                assert!(name.ends_with(&p.to_string()), "{name}");
            } else {
                assert_eq!(group, FeatureGroup::BufferFillLevel);
            }
        }
        assert_eq!(feature_index("last_prod_type_is_prod1"), Some(25));
        assert_eq!(feature_index("next_24h_demand_prod5"), Some(4));
        assert!(feature_info(33).is_none());
    }

    #[test]
    fn covered_demand_encodes_as_zero() {
        let w = one_station(vec![(1, 20, 10)], [30, 0, 0, 0, 0, 0, 0, 0], 100);
        let obs = encode_observation(&SimState::initial(&w), &w);
        for p in Product::all() {
            assert_eq!(obs.next_24h_demand(p), 0.0);
        }
    }

    #[test]
    fn empty_buffer_has_zero_fill_level() {
        let w = one_station(vec![(1, 20, 10)], [0; 8], 100);
        let obs = encode_observation(&SimState::initial(&w), &w);
        assert_eq!(obs.buffer_fill_level(), 0.0);
        assert_eq!(obs.last_prod_type(), None);
        assert!(obs.is_valid());
    }

    #[test]
    fn net_demand_is_scaled_by_week_maximum() {
        // 200 units of prod1 at one per minute: the 24h scale is 200.
        let w = one_station(vec![(1, 200, 1)], [100, 0, 0, 0, 0, 0, 0, 0], 200);
        assert_eq!(w.demand_scale_24h(), 200.0);
        // Oracle: sum schedule units starting within 24h, subtract buffer.
        let gross: u32 = w.stations[0].iter().filter(|i| i.product.id() == 1).map(|i| i.quantity.min(1440 / i.minutes_per_unit)).sum();
        let net = gross - 100;
        assert_eq!(net, 100);
        let obs = encode_observation(&SimState::initial(&w), &w);
        assert_eq!(obs.next_24h_demand(Product::new(1).unwrap()), 0.5);
        assert_eq!(obs.end_of_planning_period_demand(Product::new(1).unwrap()), 0.5);
    }

    #[test]
    fn last_type_is_one_hot() {
        let w = one_station(vec![(1, 20, 10)], [0; 8], 1000);
        let mut s = SimState::initial(&w);
        s.produce_lot(&w, Product::new(3).unwrap());
        let obs = encode_observation(&s, &w);
        assert_eq!(obs.last_prod_type(), Product::new(3).ok());
        assert_eq!(obs.0[LAST_TYPE..].iter().sum::<f64>(), 1.0);
    }
}
