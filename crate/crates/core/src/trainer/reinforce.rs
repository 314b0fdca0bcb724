//! REINFORCE with a per-step moving-average return baseline.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mdp::{sample_scenario, Env, Observation, OBS_DIM};
use crate::policy::{select_action, softmax, Activation, Adam, Gradients, PolicyNetwork, SelectMode};
use crate::scenario::ScenarioWeek;
use crate::trainer::{TrainConfig, TrainOutcome};
use crate::NUM_PRODUCTS;

struct Sample {
    obs: Observation,
    action: usize,
    reward: f64,
}

pub(crate) fn initial_network(cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<PolicyNetwork> {
    let mut dims = vec![OBS_DIM];
    dims.extend(&cfg.hidden_layers);
    dims.push(NUM_PRODUCTS);
    PolicyNetwork::random(&dims, Activation::Tanh, rng)
}

fn diverged(episode: usize, message: impl Into<String>) -> Error {
    Error::Training { episode, message: message.into() }
}

pub(super) fn train(weeks: &[ScenarioWeek], cfg: &TrainConfig) -> Result<TrainOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut week_rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x5eed_5eed);
    let mut net = initial_network(cfg, &mut rng)?;
    let initial_network = net.clone();
    let mut opt = Adam::new(&net, cfg.learning_rate);
    let mut baseline: Vec<f64> = Vec::new();
    let mut curve = Vec::with_capacity(cfg.episodes);
    let mut grads = Gradients::zeros_like(&net);
    let mut batch_steps = 0usize;

    for episode in 0..cfg.episodes {
        let week = &weeks[sample_scenario(weeks, week_rng.next_u64())?];
        let temperature = cfg.exploration.at(episode);
        let mut env = Env::new(week, cfg.reward);
        let mut samples = Vec::new();
        let mut raw_return = 0.0;
        while !env.is_done() {
            let obs = *env.observation();
            let logits = net.forward(obs.as_slice())?;
            if logits.iter().any(|l| !l.is_finite()) {
                return Err(diverged(episode, "non-finite logits"));
            }
            let action = select_action(&logits, SelectMode::Softmax { temperature, rng: &mut rng })?;
            let t = env.step(action)?;
            raw_return += t.reward;
            samples.push(Sample { obs, action, reward: cfg.reward_transform.apply(t.reward) });
        }
        curve.push(raw_return);

        // Discounted returns and advantages against the per-step baseline.
        let mut returns = vec![0.0; samples.len()];
        let mut acc = 0.0;
        for (i, s) in samples.iter().enumerate().rev() {
            acc = s.reward + cfg.gamma * acc;
            returns[i] = acc;
        }
        if baseline.len() < returns.len() {
            // unseen steps start from their own return
            baseline.extend_from_slice(&returns[baseline.len()..]);
        }
        let mut adv: Vec<f64> = returns.iter().zip(&baseline).map(|(g, b)| g - b).collect();
        for (b, g) in baseline.iter_mut().zip(&returns) {
            *b = cfg.baseline_decay * *b + (1.0 - cfg.baseline_decay) * g;
        }
        let scale = {
            let n = adv.len().max(1) as f64;
            let mean = adv.iter().sum::<f64>() / n;
            let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            var.sqrt().max(1e-8)
        };
        adv.iter_mut().for_each(|a| *a /= scale);

        for (s, a) in samples.iter().zip(&adv) {
            let trace = net.forward_trace(s.obs.as_slice())?;
            let p = softmax(trace.logits(), temperature);
            let entropy: f64 = -p.iter().filter(|&&q| q > 0.0).map(|q| q * q.ln()).sum::<f64>();
            // d/dz of  -A log p_a  -  c H
            let d: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(j, &pj)| {
                    let onehot = if j == s.action { 1.0 } else { 0.0 };
                    let ent = if pj > 0.0 { cfg.entropy_bonus * pj * (pj.ln() + entropy) } else { 0.0 };
                    (a * (pj - onehot) + ent) / temperature
                })
                .collect();
            net.backward(&trace, &d, Some(&mut grads));
        }
        batch_steps += samples.len();

        if (episode + 1) % cfg.batch_episodes == 0 || episode + 1 == cfg.episodes {
            grads.scale(1.0 / batch_steps.max(1) as f64);
            if !grads.is_finite() {
                return Err(diverged(episode, "non-finite gradient"));
            }
            opt.step(&mut net, &grads);
            if net.layers().iter().any(|l| l.w.iter().chain(&l.b).any(|v| !v.is_finite())) {
                return Err(diverged(episode, "non-finite parameters"));
            }
            grads = Gradients::zeros_like(&net);
            batch_steps = 0;
        }
    }

    Ok(TrainOutcome { network: net, initial_network, learning_curve: curve })
}
