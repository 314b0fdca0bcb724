use crate::error::{Error, Result};
use crate::mdp::TraceDataset;
use crate::policy::PolicyNetwork;
use crate::xattr::{AttributionRecord, BackgroundSet, Method};

/// Largest feature count `exact_shapley` enumerates (2^20 coalitions).
pub const MAX_EXACT_FEATURES: usize = 20;

/// Below this pre-activation difference DeepLIFT falls back to the gradient.
const RESCALE_EPS: f64 = 1e-9;

fn check_action(net: &PolicyNetwork, action: usize) -> Result<()> {
    if action >= net.output_dim() {
        return Err(Error::Domain(format!("action {action} outside 0..{}", net.output_dim())));
    }
    Ok(())
}

fn check_finite(phi: &[f64], what: &str) -> Result<()> {
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("{what} produced a non-finite attribution")));
    }
    Ok(())
}

/// `phi_i = x_i * d logit_action / d x_i`.
pub fn input_x_gradient(net: &PolicyNetwork, x: &[f64], action: usize) -> Result<AttributionRecord> {
    let grad = net.grad_input(x, action)?;
    let phi: Vec<f64> = x.iter().zip(&grad).map(|(x, g)| x * g).collect();
    check_finite(&phi, "input x gradient")?;
    Ok(AttributionRecord {
        method: Method::InputXGradient,
        instance_index: 0,
        action,
        phi,
        base_value: 0.0,
        feature_values: x.to_vec(),
    })
}

/// Shapley values of `model` by enumerating every coalition. Absent features
/// take background values and the model output is averaged over background
/// rows (interventional imputation), so `base_value + sum(phi) == model(x)`.
/// `action` only tags the record.
pub fn exact_shapley<F>(model: F, x: &[f64], background: &BackgroundSet, action: usize) -> Result<AttributionRecord>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let m = x.len();
    if m > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures { features: m, limit: MAX_EXACT_FEATURES });
    }
    if background.dim() != m {
        return Err(Error::Config(format!("background has {} features, instance has {m}", background.dim())));
    }

    let coalitions = 1usize << m;
    let mut value = vec![0.0; coalitions];
    let mut z = vec![0.0; m];
    for (mask, v) in value.iter_mut().enumerate() {
        let mut acc = 0.0;
        for r in background.rows() {
            for i in 0..m {
                z[i] = if mask >> i & 1 == 1 { x[i] } else { r[i] };
            }
            acc += model(&z)?;
        }
        *v = acc / background.len() as f64;
    }

    // weight[s] = s! (m - s - 1)! / m!
    let mut weight = vec![0.0; m.max(1)];
    if m > 0 {
        weight[0] = 1.0 / m as f64;
        for s in 0..m - 1 {
            weight[s + 1] = weight[s] * (s + 1) as f64 / (m - s - 1) as f64;
        }
    }
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        for mask in (0..coalitions).filter(|mask| mask & bit == 0) {
            *p += weight[mask.count_ones() as usize] * (value[mask | bit] - value[mask]);
        }
    }
    check_finite(&phi, "exact Shapley")?;
    Ok(AttributionRecord {
        method: Method::ExactShapley,
        instance_index: 0,
        action,
        phi,
        base_value: value[0],
        feature_values: x.to_vec(),
    })
}

/// `exact_shapley` on one logit of a network.
pub fn exact_shapley_net(net: &PolicyNetwork, x: &[f64], background: &BackgroundSet, action: usize) -> Result<AttributionRecord> {
    check_action(net, action)?;
    if x.len() > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures { features: x.len(), limit: MAX_EXACT_FEATURES });
    }
    exact_shapley(|z| Ok(net.forward(z)?[action]), x, background, action)
}

/// DeepSHAP: DeepLIFT rescale multipliers against every background row,
/// averaged. Sums to `logit(x) - mean logit(background)` up to rounding.
pub fn deep_shap(net: &PolicyNetwork, x: &[f64], background: &BackgroundSet, action: usize) -> Result<AttributionRecord> {
    check_action(net, action)?;
    if background.is_empty() {
        return Err(Error::Config("deep_shap needs a nonempty background set".into()));
    }
    if background.dim() != x.len() {
        return Err(Error::Config(format!("background has {} features, instance has {}", background.dim(), x.len())));
    }
    let tx = net.forward_trace(x)?;
    let mut phi = vec![0.0; x.len()];
    let mut base = 0.0;
    for r in background.rows() {
        let tr = net.forward_trace(r)?;
        base += tr.logits()[action];
        let mut m = vec![0.0; net.output_dim()];
        m[action] = 1.0;
        for (l, layer) in net.layers().iter().enumerate().rev() {
            for (j, mj) in m.iter_mut().enumerate() {
                let dz = tx.pre[l][j] - tr.pre[l][j];
                *mj *= if dz.abs() < RESCALE_EPS {
                    layer.activation.derivative(tx.pre[l][j])
                } else {
                    (tx.post[l + 1][j] - tr.post[l + 1][j]) / dz
                };
            }
            m = layer.transpose_mul(&m);
        }
        for ((p, mi), (xi, ri)) in phi.iter_mut().zip(&m).zip(x.iter().zip(r)) {
            *p += mi * (xi - ri);
        }
    }
    let n = background.len() as f64;
    phi.iter_mut().for_each(|p| *p /= n);
    check_finite(&phi, "DeepSHAP")?;
    Ok(AttributionRecord {
        method: Method::DeepShap,
        instance_index: 0,
        action,
        phi,
        base_value: base / n,
        feature_values: x.to_vec(),
    })
}

/// `base_value + sum(phi) - logit`. Only defined for additive methods.
pub fn completeness_check(record: &AttributionRecord, net: &PolicyNetwork) -> Result<f64> {
    if record.method == Method::InputXGradient {
        return Err(Error::Usage("completeness does not apply to input_x_gradient attributions".into()));
    }
    check_action(net, record.action)?;
    let f = net.forward(&record.feature_values)?[record.action];
    Ok(record.base_value + record.phi.iter().sum::<f64>() - f)
}

/// Explains the logit of the taken action for every row of a trace.
pub fn explain_trace(
    net: &PolicyNetwork,
    trace: &TraceDataset,
    method: Method,
    background: &BackgroundSet,
) -> Result<Vec<AttributionRecord>> {
    trace
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let x = row.observation.as_slice();
            let mut rec = match method {
                Method::InputXGradient => input_x_gradient(net, x, row.action)?,
                Method::DeepShap => deep_shap(net, x, background, row.action)?,
                Method::ExactShapley => exact_shapley_net(net, x, background, row.action)?,
            };
            rec.instance_index = i;
            Ok(rec)
        })
        .collect()
}
