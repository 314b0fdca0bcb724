use crate::policy::network::{Gradients, PolicyNetwork};

/// Adam, minimising: parameters move against the supplied gradient.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(net: &PolicyNetwork, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    pub fn step(&mut self, net: &mut PolicyNetwork, grads: &Gradients) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let lr = self.learning_rate;
        let eps = self.eps;
        for (l, ((gw, gb), ((mw, mb), (vw, vb)))) in net
            .layers_mut()
            .iter_mut()
            .zip(grads.layers.iter().zip(self.m.layers.iter_mut().zip(self.v.layers.iter_mut())))
        {
            let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                    p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            };
            update(&mut l.w, gw, mw, vw);
            update(&mut l.b, gb, mb, vb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::network::{Activation, Layer};

    #[test]
    fn minimises_a_quadratic() {
        // one linear unit, loss (w x - 3)^2 at x = 1
        let mut net = PolicyNetwork::new(vec![Layer::zeros(1, 1, Activation::Identity)]).unwrap();
        let mut opt = Adam::new(&net, 0.05);
        for _ in 0..2000 {
            let out = net.forward(&[1.0]).unwrap()[0];
            let trace = net.forward_trace(&[1.0]).unwrap();
            let mut g = Gradients::zeros_like(&net);
            net.backward(&trace, &[2.0 * (out - 3.0)], Some(&mut g));
            opt.step(&mut net, &g);
        }
        assert!((net.forward(&[1.0]).unwrap()[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters() {
        let mut net = PolicyNetwork::new(vec![Layer { activation: Activation::Identity, rows: 1, cols: 2, w: vec![0.5, -1.0], b: vec![0.1] }]).unwrap();
        let before = net.clone();
        let mut opt = Adam::new(&net, 0.0);
        let mut g = Gradients::zeros_like(&net);
        g.layers[0].0 = vec![1.0, 1.0];
        opt.step(&mut net, &g);
        assert_eq!(net, before);
    }
}
