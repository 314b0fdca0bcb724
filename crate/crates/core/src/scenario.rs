//! Scenario weeks: the static description of one planning period.
//!
//! A week is read from a TOML file with the following keys (times in
//! minutes, quantities in units):
//!
//! ```toml
//! id = "w01"
//! planning_horizon_minutes = 7200
//! buffer_capacity = 1000
//! initial_buffer = [40, 90, 80, 70, 120, 90, 30, 50]   # per product 1..8
//! pas_minutes_per_unit = [1, 1, 1, 1, 1, 1, 1, 1]      # per product 1..8
//! setup_matrix = [[0, 20, ...], ...]                    # 8x8, [from][to]
//!
//! [[stations]]                                          # one table per FAS station
//! schedule = [[5, 35, 6], [8, 25, 6]]                   # [product, quantity, minutes per unit]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::product::{Product, NUM_PRODUCTS};
use crate::sim::{self, StationState};

/// Minutes in the short-term demand window.
pub const DAY_MINUTES: u64 = 24 * 60;

/// One entry of a final-assembly station's schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleItem {
    pub product: Product,
    pub quantity: u32,
    pub minutes_per_unit: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioWeek {
    pub id: String,
    pub planning_horizon_minutes: u64,
    pub buffer_capacity: u32,
    pub initial_buffer: [u32; NUM_PRODUCTS],
    pub pas_minutes_per_unit: [u32; NUM_PRODUCTS],
    /// Changeover minutes, indexed `[from][to]`.
    pub setup_matrix: [[u32; NUM_PRODUCTS]; NUM_PRODUCTS],
    pub stations: Vec<Vec<ScheduleItem>>,
    demand_scale_24h: f64,
    demand_scale_horizon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeek {
    id: String,
    planning_horizon_minutes: u64,
    buffer_capacity: u32,
    initial_buffer: Vec<u32>,
    pas_minutes_per_unit: Vec<u32>,
    setup_matrix: Vec<Vec<u32>>,
    #[serde(default)]
    stations: Vec<RawStation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStation {
    schedule: Vec<[u32; 3]>,
}

fn per_product(values: &[u32], what: &str, origin: &str) -> Result<[u32; NUM_PRODUCTS]> {
    values
        .try_into()
        .map_err(|_| Error::parse(origin, format!("{what} needs {NUM_PRODUCTS} entries, found {}", values.len())))
}

impl ScenarioWeek {
    /// Builds and validates a week. Demand normalisation scales are derived
    /// from the schedules.
    pub fn new(
        id: impl Into<String>,
        planning_horizon_minutes: u64,
        buffer_capacity: u32,
        initial_buffer: [u32; NUM_PRODUCTS],
        pas_minutes_per_unit: [u32; NUM_PRODUCTS],
        setup_matrix: [[u32; NUM_PRODUCTS]; NUM_PRODUCTS],
        stations: Vec<Vec<ScheduleItem>>,
    ) -> Result<Self> {
        let id = id.into();
        if planning_horizon_minutes == 0 {
            return Err(Error::Config(format!("week {id}: planning horizon must be positive")));
        }
        for (i, row) in setup_matrix.iter().enumerate() {
            if row[i] != 0 {
                return Err(Error::Config(format!(
                    "week {id}: setup_matrix[{i}][{i}] = {}, same-type changeover must be 0",
                    row[i]
                )));
            }
        }
        if let Some(p) = pas_minutes_per_unit.iter().position(|&m| m == 0) {
            return Err(Error::Config(format!(
                "week {id}: pas_minutes_per_unit for prod{} must be at least 1",
                p + 1
            )));
        }
        for (s, schedule) in stations.iter().enumerate() {
            if let Some(k) = schedule.iter().position(|item| item.minutes_per_unit == 0) {
                return Err(Error::Config(format!(
                    "week {id}: station {s} item {k} has zero minutes per unit"
                )));
            }
        }
        let initial_total: u64 = initial_buffer.iter().map(|&u| u as u64).sum();
        if initial_total > buffer_capacity as u64 {
            return Err(Error::Config(format!(
                "week {id}: initial buffer holds {initial_total} units, capacity is {buffer_capacity}"
            )));
        }

        let mut week = ScenarioWeek {
            id,
            planning_horizon_minutes,
            buffer_capacity,
            initial_buffer,
            pas_minutes_per_unit,
            setup_matrix,
            stations,
            demand_scale_24h: 1.0,
            demand_scale_horizon: 1.0,
        };
        week.derive_scales();
        Ok(week)
    }

    /// Normalisation denominators: the largest gross demand any single product
    /// has in a 24h window, and over the whole schedule.
    fn derive_scales(&mut self) {
        let positions = vec![StationState::default(); self.stations.len()];
        let segments = sim::demand_segments(&self.stations, &positions);
        let mut max_day = 0u64;
        let mut max_total = 0u64;
        for p in Product::all() {
            let mut starts: Vec<u64> = segments
                .iter()
                .filter(|s| s.product == p)
                .flat_map(|s| (0..s.count as u64).map(move |k| s.start + k * s.period))
                .collect();
            starts.sort_unstable();
            max_total = max_total.max(starts.len() as u64);
            let mut lo = 0;
            for hi in 0..starts.len() {
                while starts[hi] - starts[lo] >= DAY_MINUTES {
                    lo += 1;
                }
                max_day = max_day.max((hi - lo + 1) as u64);
            }
        }
        self.demand_scale_24h = max_day.max(1) as f64;
        self.demand_scale_horizon = max_total.max(1) as f64;
    }

    pub fn demand_scale_24h(&self) -> f64 {
        self.demand_scale_24h
    }

    pub fn demand_scale_horizon(&self) -> f64 {
        self.demand_scale_horizon
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let raw: RawWeek = toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string().trim().to_string()))?;
        let initial_buffer = per_product(&raw.initial_buffer, "initial_buffer", origin)?;
        let pas_minutes_per_unit = per_product(&raw.pas_minutes_per_unit, "pas_minutes_per_unit", origin)?;
        if raw.setup_matrix.len() != NUM_PRODUCTS {
            return Err(Error::parse(origin, format!("setup_matrix needs {NUM_PRODUCTS} rows")));
        }
        let mut setup_matrix = [[0; NUM_PRODUCTS]; NUM_PRODUCTS];
        for (i, row) in raw.setup_matrix.iter().enumerate() {
            setup_matrix[i] = per_product(row, &format!("setup_matrix row {}", i + 1), origin)?;
        }
        let mut stations = Vec::with_capacity(raw.stations.len());
        for (s, station) in raw.stations.iter().enumerate() {
            let items = station
                .schedule
                .iter()
                .enumerate()
                .map(|(k, &[p, quantity, minutes_per_unit])| {
                    let product = u8::try_from(p)
                        .ok()
                        .and_then(|p| Product::new(p).ok())
                        .ok_or_else(|| Error::parse(format!("{origin}: station {} item {}", s + 1, k + 1), format!("unknown product {p}")))?;
                    Ok(ScheduleItem { product, quantity, minutes_per_unit })
                })
                .collect::<Result<Vec<_>>>()?;
            stations.push(items);
        }
        ScenarioWeek::new(
            raw.id,
            raw.planning_horizon_minutes,
            raw.buffer_capacity,
            initial_buffer,
            pas_minutes_per_unit,
            setup_matrix,
            stations,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Total scheduled units per product over the whole week.
    pub fn total_demand(&self) -> [u64; NUM_PRODUCTS] {
        let mut total = [0u64; NUM_PRODUCTS];
        for item in self.stations.iter().flatten() {
            total[item.product.index()] += item.quantity as u64;
        }
        total
    }

    pub fn demanded_products(&self) -> Vec<Product> {
        let total = self.total_demand();
        Product::all().filter(|p| total[p.index()] > 0).collect()
    }
}

const BUILTIN: [(&str, &str); 7] = [
    ("w01", include_str!("../../../scenarios/w01.toml")),
    ("w02", include_str!("../../../scenarios/w02.toml")),
    ("w03", include_str!("../../../scenarios/w03.toml")),
    ("w04", include_str!("../../../scenarios/w04.toml")),
    ("w05", include_str!("../../../scenarios/w05.toml")),
    ("w06", include_str!("../../../scenarios/w06.toml")),
    ("week42", include_str!("../../../scenarios/week42.toml")),
];

/// Id of the week used for the explanation walkthrough.
pub const PRIMARY_WEEK: &str = "w01";
/// Id of the week held out of training.
pub const HOLDOUT_WEEK: &str = "week42";

fn builtin(id: &str, text: &str) -> ScenarioWeek {
    ScenarioWeek::from_toml_str(text, &format!("builtin:{id}")).expect("shipped scenario files are valid")
}

/// The six training weeks drawn from during domain randomisation.
pub fn training_weeks() -> Vec<ScenarioWeek> {
    BUILTIN.iter().filter(|(id, _)| *id != HOLDOUT_WEEK).map(|(id, text)| builtin(id, text)).collect()
}

/// Every shipped week, training weeks first, then the held-out week.
pub fn shipped_weeks() -> Vec<ScenarioWeek> {
    BUILTIN.iter().map(|(id, text)| builtin(id, text)).collect()
}

pub fn shipped_week(id: &str) -> Option<ScenarioWeek> {
    BUILTIN.iter().find(|(k, _)| *k == id).map(|(id, text)| builtin(id, text))
}

pub fn primary_week() -> ScenarioWeek {
    shipped_week(PRIMARY_WEEK).expect("primary week is shipped")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_weeks_parse() {
        let weeks = shipped_weeks();
        assert_eq!(weeks.len(), 7);
        assert_eq!(training_weeks().len(), 6);
        for w in &weeks {
            assert_eq!(w.stations.len(), 4, "{}", w.id);
            assert!(w.demand_scale_24h() >= 1.0);
        }
    }

    #[test]
    fn primary_week_demands_exactly_four_products() {
        let ids: Vec<u8> = primary_week().demanded_products().iter().map(|p| p.id()).collect();
        assert_eq!(ids, vec![1, 5, 7, 8]);
    }

    #[test]
    fn rejects_nonzero_setup_diagonal() {
        let text = include_str!("../../../scenarios/w01.toml").replacen("[0, 20,", "[5, 20,", 1);
        let err = ScenarioWeek::from_toml_str(&text, "t").unwrap_err();
        assert!(err.to_string().contains("setup_matrix[0][0]"), "{err}");
    }

    #[test]
    fn rejects_unknown_product_with_location() {
        let text = include_str!("../../../scenarios/w01.toml").replacen("[5, 35, 6]", "[9, 35, 6]", 1);
        let err = ScenarioWeek::from_toml_str(&text, "w.toml").unwrap_err();
        assert!(err.to_string().contains("station 1 item 1"), "{err}");
    }

    #[test]
    fn rejects_overfull_initial_buffer() {
        let text = include_str!("../../../scenarios/w01.toml").replace("buffer_capacity = 1000", "buffer_capacity = 10");
        assert!(matches!(ScenarioWeek::from_toml_str(&text, "t"), Err(Error::Config(_))));
    }
}
