use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative at `z`. ReLU uses 0 at the kink.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Dense layer `act(W x + b)`, `W` stored row-major with `rows` outputs and
/// `cols` inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub activation: Activation,
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize, activation: Activation) -> Self {
        Layer { activation, rows, cols, w: vec![0.0; rows * cols], b: vec![0.0; rows] }
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.w[row * self.cols + col]
    }

    /// Pre-activation `W x + b`.
    pub fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .chunks_exact(self.cols)
            .zip(&self.b)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (w, x)| acc + w * x))
            .collect()
    }

    /// `Wᵀ g`: pulls a gradient on the outputs back to the inputs.
    pub fn transpose_mul(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, &gr) in self.w.chunks_exact(self.cols).zip(g) {
            if gr == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * gr;
            }
        }
        out
    }
}

/// Pre- and post-activation values of every layer for one input.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `post[0]` is the input, `post[l + 1]` the output of layer `l`.
    pub post: Vec<Vec<f64>>,
    pub pre: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn logits(&self) -> &[f64] {
        self.post.last().expect("trace has at least the input")
    }
}

/// Parameter gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &PolicyNetwork) -> Self {
        Gradients { layers: net.layers.iter().map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()])).collect() }
    }

    pub fn scale(&mut self, k: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().chain(b.iter_mut()).for_each(|v| *v *= k);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|(w, b)| w.iter().chain(b).all(|v| v.is_finite()))
    }
}

/// Feed-forward network mapping an observation to one logit per action.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    layers: Vec<Layer>,
}

impl PolicyNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.rows == 0 || l.cols == 0 {
                return Err(Error::Config(format!("layer {i} has an empty dimension")));
            }
            if l.w.len() != l.rows * l.cols || l.b.len() != l.rows {
                return Err(Error::Config(format!(
                    "layer {i}: expected {}x{} weights and {} biases, found {} and {}",
                    l.rows,
                    l.cols,
                    l.rows,
                    l.w.len(),
                    l.b.len()
                )));
            }
            if !l.w.iter().chain(&l.b).all(|v| v.is_finite()) {
                return Err(Error::Config(format!("layer {i} holds non-finite parameters")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].rows != pair[1].cols {
                return Err(Error::Config(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    i,
                    pair[0].rows,
                    i + 1,
                    pair[1].cols
                )));
            }
        }
        let last = layers.last().expect("nonempty");
        if last.activation != Activation::Identity {
            return Err(Error::Config("final layer must be identity (logits)".into()));
        }
        Ok(PolicyNetwork { layers })
    }

    /// Glorot-uniform initialisation; the output layer is shrunk so the
    /// initial policy is close to uniform.
    pub fn random(dims: &[usize], hidden: Activation, rng: &mut impl Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("need at least input and output dimensions".into()));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let (cols, rows) = (dims[i], dims[i + 1]);
                let last = i + 1 == n;
                let limit = (6.0 / (rows + cols) as f64).sqrt() * if last { 0.1 } else { 1.0 };
                Layer {
                    activation: if last { Activation::Identity } else { hidden },
                    rows,
                    cols,
                    w: (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect(),
                    b: vec![0.0; rows],
                }
            })
            .collect();
        PolicyNetwork::new(layers)
    }

    /// 33 → 64 → 64 → 8 with tanh hidden units.
    pub fn default_policy(rng: &mut impl Rng) -> Self {
        PolicyNetwork::random(&[crate::mdp::OBS_DIM, 64, 64, crate::NUM_PRODUCTS], Activation::Tanh, rng)
            .expect("default architecture is valid")
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").rows
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim()).chain(self.layers.iter().map(|l| l.rows)).collect()
    }

    pub fn expect_dims(&self, input: usize, output: usize) -> Result<()> {
        if self.input_dim() != input || self.output_dim() != output {
            return Err(Error::Config(format!(
                "expected a {input} -> {output} network, found {} -> {}",
                self.input_dim(),
                self.output_dim()
            )));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Config(format!("network expects {} inputs, got {}", self.input_dim(), x.len())));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        for l in &self.layers {
            a = l.affine(&a).into_iter().map(|z| l.activation.apply(z)).collect();
        }
        Ok(a)
    }

    pub fn forward_trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let mut post = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let z = l.affine(post.last().expect("nonempty"));
            post.push(z.iter().map(|&z| l.activation.apply(z)).collect());
            pre.push(z);
        }
        Ok(ForwardTrace { post, pre })
    }

    /// Backpropagates `d_logits` through a recorded forward pass. Adds
    /// parameter gradients into `grads` when given and returns the gradient
    /// with respect to the input.
    pub fn backward(&self, trace: &ForwardTrace, d_logits: &[f64], mut grads: Option<&mut Gradients>) -> Vec<f64> {
        let mut g = d_logits.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            for (gj, &z) in g.iter_mut().zip(&trace.pre[i]) {
                *gj *= l.activation.derivative(z);
            }
            if let Some(grads) = grads.as_deref_mut() {
                let (dw, db) = &mut grads.layers[i];
                let input = &trace.post[i];
                for (r, &gr) in g.iter().enumerate() {
                    db[r] += gr;
                    if gr != 0.0 {
                        for (d, &x) in dw[r * l.cols..(r + 1) * l.cols].iter_mut().zip(input) {
                            *d += gr * x;
                        }
                    }
                }
            }
            g = l.transpose_mul(&g);
        }
        g
    }

    /// Exact gradient of logit `action` with respect to the input.
    pub fn grad_input(&self, x: &[f64], action: usize) -> Result<Vec<f64>> {
        if action >= self.output_dim() {
            return Err(Error::Domain(format!("action {action} outside 0..{}", self.output_dim())));
        }
        let trace = self.forward_trace(x)?;
        let mut seed = vec![0.0; self.output_dim()];
        seed[action] = 1.0;
        let g = self.backward(&trace, &seed, None);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite input gradient".into()));
        }
        Ok(g)
    }

    pub fn apply_update(&mut self, step: &Gradients) {
        for (l, (dw, db)) in self.layers.iter_mut().zip(&step.layers) {
            l.w.iter_mut().zip(dw).for_each(|(w, d)| *w += d);
            l.b.iter_mut().zip(db).for_each(|(b, d)| *b += d);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear(w: Vec<f64>, b: Vec<f64>, rows: usize, cols: usize) -> PolicyNetwork {
        PolicyNetwork::new(vec![Layer { activation: Activation::Identity, rows, cols, w, b }]).unwrap()
    }

    #[test]
    fn zero_weights_output_final_bias() {
        let mut net = PolicyNetwork::random(&[33, 16, 8], Activation::Relu, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for l in net.layers_mut() {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        let bias: Vec<f64> = (0..8).map(|i| i as f64 * 0.5 - 1.0).collect();
        net.layers_mut()[1].b = bias.clone();
        assert_eq!(net.forward(&[0.3; 33]).unwrap(), bias);
    }

    #[test]
    fn hand_computed_linear_logits() {
        // rows: (1, 2), (0, -1), (3, 0); bias (0.5, 0, -1); x = (2, 1)
        let net = linear(vec![1.0, 2.0, 0.0, -1.0, 3.0, 0.0], vec![0.5, 0.0, -1.0], 3, 2);
        assert_eq!(net.forward(&[2.0, 1.0]).unwrap(), vec![4.5, -1.0, 5.0]);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let net = linear(vec![1.0, 2.0], vec![0.0], 1, 2);
        assert!(matches!(net.forward(&[1.0]), Err(Error::Config(_))));
    }

    #[test]
    fn linear_gradient_is_weight_row() {
        let net = linear(vec![1.0, 2.0, 0.0, -1.0, 3.0, 0.0], vec![0.5, 0.0, -1.0], 3, 2);
        assert_eq!(net.grad_input(&[7.0, -3.0], 1).unwrap(), vec![0.0, -1.0]);
        assert!(matches!(net.grad_input(&[7.0, -3.0], 3), Err(Error::Domain(_))));
    }

    #[test]
    fn dead_relu_unit_contributes_nothing() {
        // hidden unit 0 is dead (pre-activation -1), unit 1 is live.
        let hidden = Layer { activation: Activation::Relu, rows: 2, cols: 2, w: vec![1.0, 0.0, 0.0, 1.0], b: vec![-2.0, 0.0] };
        let out = Layer { activation: Activation::Identity, rows: 1, cols: 2, w: vec![5.0, 7.0], b: vec![0.0] };
        let net = PolicyNetwork::new(vec![hidden, out]).unwrap();
        assert_eq!(net.grad_input(&[1.0, 1.0], 0).unwrap(), vec![0.0, 7.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = Layer::zeros(4, 3, Activation::Tanh);
        let b = Layer::zeros(2, 5, Activation::Identity);
        assert!(PolicyNetwork::new(vec![a.clone(), b]).is_err());
        assert!(PolicyNetwork::new(vec![a]).is_err(), "non-identity head");
        let mut c = Layer::zeros(2, 2, Activation::Identity);
        c.w[0] = f64::NAN;
        assert!(PolicyNetwork::new(vec![c]).is_err());
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = PolicyNetwork::random(&[5, 6, 3], Activation::Tanh, &mut rng).unwrap();
        let x = [0.1, -0.4, 0.7, 0.2, 0.9];
        let trace = net.forward_trace(&x).unwrap();
        let mut grads = Gradients::zeros_like(&net);
        net.backward(&trace, &[0.0, 1.0, 0.0], Some(&mut grads));
        let h = 1e-6;
        for li in 0..2 {
            for k in 0..net.layers()[li].w.len() {
                let mut up = net.clone();
                up.layers_mut()[li].w[k] += h;
                let mut down = net.clone();
                down.layers_mut()[li].w[k] -= h;
                let fd = (up.forward(&x).unwrap()[1] - down.forward(&x).unwrap()[1]) / (2.0 * h);
                assert!((fd - grads.layers[li].0[k]).abs() < 1e-7, "layer {li} w{k}");
            }
        }
    }
}
