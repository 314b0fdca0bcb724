use proptest::prelude::*;
use shopxai::mdp::{reset, step, RewardConfig};
use shopxai::scenario::shipped_weeks;
use shopxai::{Product, NUM_PRODUCTS};

const LOT: u64 = 50;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lots_conserve_units_and_respect_capacity(week_idx in 0usize..7, actions in prop::collection::vec(0usize..NUM_PRODUCTS, 1..200)) {
        let week = &shipped_weeks()[week_idx];
        let cfg = RewardConfig::default();
        let (mut state, _) = reset(week);
        for a in actions {
            if state.is_terminal(week) {
                break;
            }
            let t = step(week, &state, a, &cfg).unwrap();
            let next = &t.state;
            // one lot lands in the buffer or is dropped, nothing else is created
            let before: u64 = state.produced.iter().chain(&state.dropped).sum();
            let after: u64 = next.produced.iter().chain(&next.dropped).sum();
            prop_assert_eq!(after - before, LOT);
            for p in 0..NUM_PRODUCTS {
                prop_assert_eq!(next.buffer[p] as u64 + next.consumed[p], week.initial_buffer[p] as u64 + next.produced[p]);
                prop_assert!(next.consumed[p] >= state.consumed[p]);
            }
            prop_assert!(next.buffer_total() <= week.buffer_capacity as u64);
            prop_assert!(next.clock_minutes >= state.clock_minutes + LOT);
            prop_assert!(next.cumulative_setup_minutes >= state.cumulative_setup_minutes);
            prop_assert!(next.cumulative_idle_minutes.iter().zip(&state.cumulative_idle_minutes).all(|(n, o)| n >= o));

            prop_assert!(t.reward.is_finite() && t.reward <= 0.0);
            prop_assert_eq!(t.reward, t.terms.total());
            prop_assert!(t.observation.as_slice().iter().all(|v| v.is_finite()));
            prop_assert_eq!(next.last_pas_type, Product::from_action(a).ok());
            state = t.state;
        }
    }

    #[test]
    fn repeating_a_product_costs_no_setup(week_idx in 0usize..7, a in 0usize..NUM_PRODUCTS, warmup in 0usize..NUM_PRODUCTS) {
        let week = &shipped_weeks()[week_idx];
        let cfg = RewardConfig::default();
        let (state, _) = reset(week);
        let first = step(week, &state, warmup, &cfg).unwrap();
        prop_assume!(!first.done);
        let second = step(week, &first.state, a, &cfg).unwrap();
        let setup = second.state.cumulative_setup_minutes - first.state.cumulative_setup_minutes;
        prop_assert_eq!(setup, week.setup_matrix[warmup][a] as u64);
        if a == warmup {
            prop_assert_eq!(setup, 0);
            prop_assert_eq!(second.terms.setup, 0.0);
        }
    }

    #[test]
    fn step_is_a_pure_function(week_idx in 0usize..7, actions in prop::collection::vec(0usize..NUM_PRODUCTS, 1..40)) {
        let week = &shipped_weeks()[week_idx];
        let cfg = RewardConfig::default();
        let (mut state, _) = reset(week);
        for a in actions {
            let x = step(week, &state, a, &cfg).unwrap();
            let y = step(week, &state, a, &cfg).unwrap();
            prop_assert_eq!(&x.state, &y.state);
            prop_assert_eq!(x.reward.to_bits(), y.reward.to_bits());
            prop_assert_eq!(x.observation, y.observation);
            if x.done {
                break;
            }
            state = x.state;
        }
    }
}

#[test]
fn out_of_range_action_is_rejected() {
    let week = &shipped_weeks()[0];
    let (state, _) = reset(week);
    assert!(step(week, &state, NUM_PRODUCTS, &RewardConfig::default()).is_err());
}
