//! Weight files: a JSON document
//! `{"layers":[{"activation":"tanh","rows":64,"cols":33,"w":[...],"b":[...]}, ...]}`
//! with `w` row-major (`rows` outputs by `cols` inputs). Numbers are written
//! in shortest round-trip form, so save → load → save is byte-identical.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::OBS_DIM;
use crate::policy::network::{Layer, PolicyNetwork};
use crate::NUM_PRODUCTS;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFile {
    layers: Vec<Layer>,
}

pub fn weights_to_json(net: &PolicyNetwork) -> String {
    let file = WeightFile { layers: net.layers().to_vec() };
    let mut s = serde_json::to_string_pretty(&file).expect("weights serialize");
    s.push('\n');
    s
}

pub fn weights_from_json(text: &str) -> Result<PolicyNetwork> {
    let file: WeightFile = serde_json::from_str(text)?;
    PolicyNetwork::new(file.layers)
}

pub fn save_weights(net: &PolicyNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, weights_to_json(net)).map_err(|e| Error::io(path, e))
}

/// Loads any well-formed network.
pub fn load_weights(path: impl AsRef<Path>) -> Result<PolicyNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    weights_from_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Loads a network and checks it maps observations to one logit per product.
pub fn load_policy(path: impl AsRef<Path>) -> Result<PolicyNetwork> {
    let path = path.as_ref();
    let net = load_weights(path)?;
    net.expect_dims(OBS_DIM, NUM_PRODUCTS).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(net)
}

impl PolicyNetwork {
    /// A freshly initialised network with this network's shape and activations.
    pub fn fresh_like(&self, rng: &mut impl Rng) -> PolicyNetwork {
        let layers = self
            .layers()
            .iter()
            .map(|l| {
                let limit = (6.0 / (l.rows + l.cols) as f64).sqrt();
                Layer {
                    activation: l.activation,
                    rows: l.rows,
                    cols: l.cols,
                    w: (0..l.w.len()).map(|_| rng.gen_range(-limit..=limit)).collect(),
                    b: vec![0.0; l.rows],
                }
            })
            .collect();
        PolicyNetwork::new(layers).expect("same shape as a valid network")
    }
}
