//! Feed-forward scheduling policy with exact reverse-mode gradients.

mod network;
mod optim;
mod select;
mod weights;

pub use network::{Activation, ForwardTrace, Gradients, Layer, PolicyNetwork};
pub use optim::Adam;
pub use select::{argmax, select_action, softmax, SelectMode};
pub use weights::{load_policy, load_weights, save_weights, weights_from_json, weights_to_json};
