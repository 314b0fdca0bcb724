//! Deep Q-learning: epsilon-greedy acting, uniform replay, periodic target sync.

use std::collections::VecDeque;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::{sample_scenario, Env, Observation};
use crate::policy::{argmax, Adam, Gradients};
use crate::scenario::ScenarioWeek;
use crate::trainer::reinforce::initial_network;
use crate::trainer::{TrainConfig, TrainOutcome};
use crate::NUM_PRODUCTS;

const REPLAY_CAPACITY: usize = 20_000;
const BATCH: usize = 32;
const TRAIN_EVERY: usize = 4;
const TARGET_SYNC: usize = 500;
const WARMUP: usize = 256;

struct Experience {
    obs: Observation,
    action: usize,
    reward: f64,
    next: Observation,
    done: bool,
}

pub(super) fn train(weeks: &[ScenarioWeek], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut week_rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x5eed_5eed);
    let mut q = initial_network(cfg, &mut rng)?;
    let initial_network = q.clone();
    let mut target = q.clone();
    let mut opt = Adam::new(&q, cfg.learning_rate);
    let mut replay: VecDeque<Experience> = VecDeque::with_capacity(REPLAY_CAPACITY);
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut steps = 0usize;

    for episode in 0..cfg.episodes {
        let week = &weeks[sample_scenario(weeks, week_rng.next_u64())?];
        let epsilon = cfg.exploration.at(episode).clamp(0.0, 1.0);
        let mut env = Env::new(week, cfg.reward);
        let mut raw_return = 0.0;
        while !env.is_done() {
            let obs = *env.observation();
            let action = if rng.gen::<f64>() < epsilon {
                rng.gen_range(0..NUM_PRODUCTS)
            } else {
                let values = q.forward(obs.as_slice())?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Training { episode, message: "non-finite Q-values".into() });
                }
                argmax(&values)
            };
            let t = env.step(action)?;
            raw_return += t.reward;
            if replay.len() == REPLAY_CAPACITY {
                replay.pop_front();
            }
            replay.push_back(Experience {
                obs,
                action,
                reward: cfg.reward_transform.apply(t.reward),
                next: t.observation,
                done: t.done,
            });
            steps += 1;

            if replay.len() >= WARMUP && steps % TRAIN_EVERY == 0 {
                let mut grads = Gradients::zeros_like(&q);
                for _ in 0..BATCH {
                    let e = &replay[rng.gen_range(0..replay.len())];
                    let bootstrap = if e.done {
                        0.0
                    } else {
                        target.forward(e.next.as_slice())?.into_iter().fold(f64::NEG_INFINITY, f64::max)
                    };
                    let y = e.reward + cfg.gamma * bootstrap;
                    let trace = q.forward_trace(e.obs.as_slice())?;
                    // Huber loss gradient on the taken action only.
                    let err = (trace.logits()[e.action] - y).clamp(-1.0, 1.0);
                    let mut d = vec![0.0; NUM_PRODUCTS];
                    d[e.action] = err;
                    q.backward(&trace, &d, Some(&mut grads));
                }
                grads.scale(1.0 / BATCH as f64);
                if !grads.is_finite() {
                    return Err(Error::Training { episode, message: "non-finite gradient".into() });
                }
                opt.step(&mut q, &grads);
            }
            if steps % TARGET_SYNC == 0 {
                target = q.clone();
            }
        }
        curve.push(raw_return);
    }

    Ok(TrainOutcome { network: q, initial_network, learning_curve: curve })
}
