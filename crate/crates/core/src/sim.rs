//! Discrete simulator of the two-stage flow line.
//!
//! One pre-assembly station (PAS) makes 50-unit lots of a product type into a
//! capacity-limited buffer. Four final-assembly stations (FAS) work through
//! fixed schedules, pulling one unit from the buffer when a unit starts. A
//! station whose next product is missing waits and accrues idle minutes.
//!
//! Time is integral minutes. Within one call to [`SimState::advance_fas`]
//! stations act in time order, ties broken by station index, so concurrent
//! pulls on the same product are serialized.

use serde::{Deserialize, Serialize};

use crate::product::{Product, NUM_PRODUCTS};
use crate::scenario::{ScenarioWeek, ScheduleItem};

/// Units made per PAS decision.
pub const LOT_SIZE: u32 = 50;

/// Position of one FAS station within its schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StationState {
    /// Index of the schedule item holding the next unit to start.
    pub item: usize,
    /// Units of that item already started.
    pub done: u32,
    /// Minutes left on the unit in progress; 0 when ready for the next unit.
    pub remaining: u32,
}

impl StationState {
    fn is_finished(&self, schedule: &[ScheduleItem]) -> bool {
        self.item >= schedule.len()
    }

    /// Skips exhausted and zero-quantity items.
    fn normalize(&mut self, schedule: &[ScheduleItem]) {
        while self.item < schedule.len() && self.done >= schedule[self.item].quantity {
            self.item += 1;
            self.done = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimState {
    pub clock_minutes: u64,
    pub buffer: [u32; NUM_PRODUCTS],
    pub last_pas_type: Option<Product>,
    pub stations: Vec<StationState>,
    pub cumulative_idle_minutes: Vec<u64>,
    pub cumulative_setup_minutes: u64,
    /// Units accepted into the buffer, per product.
    pub produced: [u64; NUM_PRODUCTS],
    /// Units pulled by FAS stations, per product.
    pub consumed: [u64; NUM_PRODUCTS],
    /// Units finished by the PAS while the buffer was full, per product.
    pub dropped: [u64; NUM_PRODUCTS],
}

/// What one PAS lot did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotReport {
    pub setup_minutes: u64,
    pub accepted: u32,
    pub dropped: u32,
    pub idle_by_station: Vec<u64>,
}

/// A run of consecutive unit starts of one product on one station, assuming
/// unlimited supply from the current instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemandSegment {
    pub product: Product,
    /// Minutes from now until the first unit of the run starts.
    pub start: u64,
    pub count: u32,
    pub period: u64,
}

impl DemandSegment {
    /// Units of this run started at or before `t`.
    fn started_by(&self, t: u64) -> u64 {
        if t < self.start {
            0
        } else {
            ((t - self.start) / self.period + 1).min(self.count as u64)
        }
    }

    /// Units of this run starting strictly before `t`.
    fn started_before(&self, t: u64) -> u64 {
        if t == 0 {
            0
        } else {
            self.started_by(t - 1)
        }
    }
}

/// Future unit starts of every station, ignoring stock-outs.
pub fn demand_segments(stations: &[Vec<ScheduleItem>], positions: &[StationState]) -> Vec<DemandSegment> {
    let mut out = Vec::new();
    for (schedule, pos) in stations.iter().zip(positions) {
        let mut pos = *pos;
        pos.normalize(schedule);
        let mut offset = pos.remaining as u64;
        for (k, item) in schedule.iter().enumerate().skip(pos.item) {
            let first = if k == pos.item { pos.done } else { 0 };
            let count = item.quantity.saturating_sub(first);
            if count == 0 {
                continue;
            }
            let period = item.minutes_per_unit as u64;
            out.push(DemandSegment { product: item.product, start: offset, count, period });
            offset += count as u64 * period;
        }
    }
    out
}

impl SimState {
    pub fn initial(scenario: &ScenarioWeek) -> Self {
        let n = scenario.stations.len();
        let mut stations = vec![StationState::default(); n];
        for (st, schedule) in stations.iter_mut().zip(&scenario.stations) {
            st.normalize(schedule);
        }
        SimState {
            clock_minutes: 0,
            buffer: scenario.initial_buffer,
            last_pas_type: None,
            stations,
            cumulative_idle_minutes: vec![0; n],
            cumulative_setup_minutes: 0,
            produced: [0; NUM_PRODUCTS],
            consumed: [0; NUM_PRODUCTS],
            dropped: [0; NUM_PRODUCTS],
        }
    }

    pub fn buffer_total(&self) -> u64 {
        self.buffer.iter().map(|&u| u as u64).sum()
    }

    pub fn total_idle_minutes(&self) -> u64 {
        self.cumulative_idle_minutes.iter().sum()
    }

    pub fn all_stations_finished(&self, scenario: &ScenarioWeek) -> bool {
        self.stations.iter().zip(&scenario.stations).all(|(st, sch)| st.is_finished(sch) && st.remaining == 0)
    }

    pub fn is_terminal(&self, scenario: &ScenarioWeek) -> bool {
        self.clock_minutes >= scenario.planning_horizon_minutes || self.all_stations_finished(scenario)
    }

    /// Lets the FAS run for `dt` minutes without PAS output. Returns the idle
    /// minutes each station accrued in the interval.
    pub fn advance_fas(&mut self, scenario: &ScenarioWeek, dt: u64) -> Vec<u64> {
        let n = self.stations.len();
        let mut idle = vec![0u64; n];
        if dt == 0 {
            return idle;
        }
        // Next event time per station, relative to the interval start.
        let mut next: Vec<Option<u64>> = self
            .stations
            .iter()
            .zip(&scenario.stations)
            .map(|(st, sch)| {
                if st.is_finished(sch) && st.remaining == 0 {
                    None
                } else {
                    Some(st.remaining as u64)
                }
            })
            .collect();

        loop {
            let Some((s, t)) = next
                .iter()
                .enumerate()
                .filter_map(|(s, t)| t.filter(|&t| t < dt).map(|t| (s, t)))
                .min_by_key(|&(s, t)| (t, s))
            else {
                break;
            };
            let schedule = &scenario.stations[s];
            let st = &mut self.stations[s];
            if st.is_finished(schedule) {
                st.remaining = 0;
                next[s] = None;
                continue;
            }
            let item = schedule[st.item];
            let p = item.product.index();
            if self.buffer[p] > 0 {
                self.buffer[p] -= 1;
                self.consumed[p] += 1;
                st.done += 1;
                st.normalize(schedule);
                next[s] = Some(t + item.minutes_per_unit as u64);
            } else {
                // Buffer only shrinks inside this interval, so the wait lasts to its end.
                idle[s] += dt - t;
                st.remaining = 0;
                next[s] = None;
            }
        }

        for (s, t) in next.into_iter().enumerate() {
            if let Some(t) = t {
                self.stations[s].remaining = (t - dt) as u32;
            }
            self.cumulative_idle_minutes[s] += idle[s];
        }
        self.clock_minutes += dt;
        idle
    }

    /// Runs one PAS decision: an optional changeover, then 50 units of `p`,
    /// each entering the buffer when finished. Units that find the buffer full
    /// are dropped and counted in [`SimState::dropped`].
    pub fn produce_lot(&mut self, scenario: &ScenarioWeek, p: Product) -> LotReport {
        let setup = match self.last_pas_type {
            Some(q) if q != p => scenario.setup_matrix[q.index()][p.index()] as u64,
            _ => 0,
        };
        let mut idle = self.advance_fas(scenario, setup);
        self.cumulative_setup_minutes += setup;

        let unit_minutes = scenario.pas_minutes_per_unit[p.index()] as u64;
        let (mut accepted, mut dropped) = (0, 0);
        for _ in 0..LOT_SIZE {
            for (acc, d) in idle.iter_mut().zip(self.advance_fas(scenario, unit_minutes)) {
                *acc += d;
            }
            if self.buffer_total() < scenario.buffer_capacity as u64 {
                self.buffer[p.index()] += 1;
                self.produced[p.index()] += 1;
                accepted += 1;
            } else {
                self.dropped[p.index()] += 1;
                dropped += 1;
            }
        }
        self.last_pas_type = Some(p);
        LotReport { setup_minutes: setup, accepted, dropped, idle_by_station: idle }
    }

    /// Gross units each product is needed for whose start falls within the
    /// next `window` minutes, assuming unlimited supply.
    pub fn demand_within(&self, scenario: &ScenarioWeek, window: u64) -> [u64; NUM_PRODUCTS] {
        let mut out = [0u64; NUM_PRODUCTS];
        for seg in demand_segments(&scenario.stations, &self.stations) {
            out[seg.product.index()] += seg.started_before(window);
        }
        out
    }

    /// Gross units still to be pulled per product over the rest of the schedules.
    pub fn remaining_demand(&self, scenario: &ScenarioWeek) -> [u64; NUM_PRODUCTS] {
        let mut out = [0u64; NUM_PRODUCTS];
        for seg in demand_segments(&scenario.stations, &self.stations) {
            out[seg.product.index()] += seg.count as u64;
        }
        out
    }

    /// Minutes until the buffered stock of `p` runs out if no more `p` is made.
    /// Other products are assumed available. Capped at the minutes left in the
    /// planning horizon; 0 when nothing of `p` is buffered.
    pub fn buffer_content_duration(&self, scenario: &ScenarioWeek, p: Product) -> u64 {
        let horizon_left = scenario.planning_horizon_minutes.saturating_sub(self.clock_minutes);
        let stock = self.buffer[p.index()] as u64;
        if stock == 0 {
            return 0;
        }
        let segments: Vec<DemandSegment> =
            demand_segments(&scenario.stations, &self.stations).into_iter().filter(|s| s.product == p).collect();
        let total: u64 = segments.iter().map(|s| s.count as u64).sum();
        if total <= stock {
            return horizon_left;
        }
        // First instant at which stock + 1 units have been asked for.
        let last_start = segments.iter().map(|s| s.start + (s.count as u64 - 1) * s.period).max().unwrap_or(0);
        let (mut lo, mut hi) = (0u64, last_start);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let started: u64 = segments.iter().map(|s| s.started_by(mid)).sum();
            if started > stock {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo.min(horizon_left)
    }
}
