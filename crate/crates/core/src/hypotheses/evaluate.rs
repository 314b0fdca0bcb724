use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{ActionScope, Condition, Hypothesis, HypothesisKind, Sign, Tercile};
use crate::mdp::{TraceDataset, FEATURE_NAMES};
use crate::product::Product;
use crate::xattr::{AttributionRecord, Method};

/// Decision thresholds. Attributions are divided by the largest |phi| of the
/// method before `epsilon` applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub epsilon: f64,
    pub agree_threshold: f64,
    pub n_min: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { epsilon: 1e-3, agree_threshold: 0.7, n_min: 3 }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon {} must be positive", self.epsilon)));
        }
        if !(self.agree_threshold > 0.5 && self.agree_threshold <= 1.0) {
            return Err(Error::Config(format!("agree threshold {} must be in (0.5, 1]", self.agree_threshold)));
        }
        if self.n_min == 0 {
            return Err(Error::Config("n_min must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Supported,
    Contradicted,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Supported => "supported",
            Status::Contradicted => "contradicted",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFinding {
    pub hypothesis_id: String,
    pub kind: HypothesisKind,
    pub method: Method,
    /// Product ids whose decisions were evaluated.
    pub products: Vec<u8>,
    /// Feature read for each product, in `products` order.
    pub features: Vec<String>,
    pub expected_sign: Sign,
    pub n_instances: usize,
    /// Instances with normalized |phi| >= epsilon.
    pub n_decisive: usize,
    pub n_agree: usize,
    /// Share of decisive instances whose sign matches the expectation.
    pub agree_fraction: f64,
    /// Mean raw attribution of the selected feature.
    pub mean_phi: f64,
    pub too_small: bool,
    pub status: Status,
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

struct Terciles {
    cache: HashMap<usize, (f64, f64)>,
}

impl Terciles {
    fn get(&mut self, trace: &TraceDataset, feature: usize) -> (f64, f64) {
        *self.cache.entry(feature).or_insert_with(|| {
            let mut v: Vec<f64> = trace.rows.iter().map(|r| r.observation.0[feature]).collect();
            v.sort_by(f64::total_cmp);
            if v.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (quantile(&v, 1.0 / 3.0), quantile(&v, 2.0 / 3.0))
            }
        })
    }
}

fn scope_products(scope: &ActionScope, trace: &TraceDataset) -> Vec<Product> {
    match scope {
        ActionScope::AllProduced => {
            let taken: BTreeSet<usize> = trace.rows.iter().map(|r| r.action).collect();
            taken.into_iter().filter_map(|a| Product::from_action(a).ok()).collect()
        }
        ActionScope::Products(ps) => {
            let mut ps = ps.clone();
            ps.sort();
            ps.dedup();
            ps
        }
    }
}

fn method_of(records: &[AttributionRecord]) -> Result<Method> {
    let method = records.first().map(|r| r.method).ok_or_else(|| Error::Usage("no attribution records to test".into()))?;
    if records.iter().any(|r| r.method != method) {
        return Err(Error::Usage("attribution records mix several methods; evaluate one method at a time".into()));
    }
    Ok(method)
}

fn evaluate_products(
    h: &Hypothesis,
    products: &[Product],
    records: &[AttributionRecord],
    trace: &TraceDataset,
    params: &EvalParams,
) -> Result<HypothesisFinding> {
    params.validate()?;
    let method = method_of(records)?;
    let scale = records.iter().flat_map(|r| r.phi.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut terciles = Terciles { cache: HashMap::new() };

    let (mut n, mut decisive, mut agree, mut sum_phi) = (0usize, 0usize, 0usize, 0.0);
    for r in records {
        let Ok(product) = Product::from_action(r.action) else { continue };
        if !products.contains(&product) {
            continue;
        }
        let row = trace.rows.get(r.instance_index).ok_or_else(|| {
            Error::Domain(format!("record instance {} outside the {}-row trace", r.instance_index, trace.len()))
        })?;
        if row.action != r.action {
            continue;
        }
        let feature = h.feature_for(product).expect("selector validated at parse time");
        let value = row.observation.0[feature];
        let holds = match h.condition {
            None => true,
            Some(Condition::Equals(t)) => (value - t).abs() < 1e-9,
            Some(Condition::Tercile(side)) => {
                let (lo, hi) = terciles.get(trace, feature);
                match side {
                    Tercile::Low => value <= lo,
                    Tercile::High => value >= hi,
                }
            }
        };
        if !holds {
            continue;
        }
        let phi = *r.phi.get(feature).ok_or_else(|| Error::Domain(format!("record has no attribution for {}", FEATURE_NAMES[feature])))?;
        n += 1;
        sum_phi += phi;
        let normalized = if scale > 0.0 { phi / scale } else { 0.0 };
        if normalized.abs() >= params.epsilon {
            decisive += 1;
            if h.expected_sign.matches(phi) {
                agree += 1;
            }
        }
    }

    let too_small = n > 0 && decisive == 0;
    let disagree = decisive - agree;
    // Counted against all n instances, so raising epsilon can only remove
    // support, never create it.
    let needed = params.agree_threshold * n as f64 - 1e-9;
    let status = if too_small || n < params.n_min {
        Status::Inconclusive
    } else if agree as f64 >= needed {
        Status::Supported
    } else if disagree as f64 >= needed {
        Status::Contradicted
    } else {
        Status::Inconclusive
    };
    Ok(HypothesisFinding {
        hypothesis_id: h.id.clone(),
        kind: h.kind,
        method,
        products: products.iter().map(|p| p.id()).collect(),
        features: products.iter().map(|&p| FEATURE_NAMES[h.feature_for(p).expect("validated")].to_string()).collect(),
        expected_sign: h.expected_sign,
        n_instances: n,
        n_decisive: decisive,
        n_agree: agree,
        agree_fraction: if decisive > 0 { agree as f64 / decisive as f64 } else { 0.0 },
        mean_phi: if n > 0 { sum_phi / n as f64 } else { 0.0 },
        too_small,
        status,
    })
}

/// Tests `h` over every instance in its scope, pooled.
pub fn evaluate_hypothesis(
    h: &Hypothesis,
    records: &[AttributionRecord],
    trace: &TraceDataset,
    params: &EvalParams,
) -> Result<HypothesisFinding> {
    evaluate_products(h, &scope_products(&h.actions, trace), records, trace, params)
}

/// One finding per product in the scope of `h`.
pub fn evaluate_per_product(
    h: &Hypothesis,
    records: &[AttributionRecord],
    trace: &TraceDataset,
    params: &EvalParams,
) -> Result<Vec<HypothesisFinding>> {
    scope_products(&h.actions, trace).into_iter().map(|p| evaluate_products(h, &[p], records, trace, params)).collect()
}

/// Per-product findings for every hypothesis, in file order.
pub fn evaluate_all(
    hypotheses: &[Hypothesis],
    records: &[AttributionRecord],
    trace: &TraceDataset,
    params: &EvalParams,
) -> Result<Vec<HypothesisFinding>> {
    let mut out = Vec::new();
    for h in hypotheses {
        out.extend(evaluate_per_product(h, records, trace, params)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::builtin_hypotheses;
    use crate::mdp::{feature_index, Observation, TraceRow, OBS_DIM};

    fn fixture(phis: &[f64]) -> (Hypothesis, Vec<AttributionRecord>, TraceDataset) {
        let h = builtin_hypotheses().into_iter().find(|h| h.kind == HypothesisKind::SetupEfforts).unwrap();
        let f = feature_index("last_prod_type_is_prod5").unwrap();
        let mut obs = [0.0; OBS_DIM];
        obs[f] = 1.0;
        let trace = TraceDataset {
            rows: (0..phis.len()).map(|i| TraceRow { step_index: i, observation: Observation(obs), action: 4 }).collect(),
        };
        let records = phis
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut phi = vec![0.0; OBS_DIM];
                phi[f] = p;
                phi[0] = 1.0; // fixes the normalizer at 1
                AttributionRecord { method: Method::DeepShap, instance_index: i, action: 4, phi, base_value: 0.0, feature_values: obs.to_vec() }
            })
            .collect();
        (h, records, trace)
    }

    #[test]
    fn always_positive_is_supported() {
        let (h, recs, trace) = fixture(&[0.2, 0.5, 0.1, 0.3]);
        let f = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!(f.agree_fraction, 1.0);
        assert_eq!(f.status, Status::Supported);
        assert_eq!(f.products, vec![5]);
        assert_eq!(f.features, vec!["last_prod_type_is_prod5"]);
    }

    #[test]
    fn tiny_attributions_are_too_small() {
        let (h, recs, trace) = fixture(&[1e-5, -2e-4, 3e-6]);
        let f = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert!(f.too_small);
        assert_eq!(f.status, Status::Inconclusive);
    }

    #[test]
    fn even_sign_mix_is_inconclusive() {
        let (h, recs, trace) = fixture(&[0.2, -0.2, 0.4, -0.4]);
        let f = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!(f.agree_fraction, 0.5);
        assert_eq!(f.status, Status::Inconclusive);
    }

    #[test]
    fn all_negative_is_contradicted() {
        let (h, recs, trace) = fixture(&[-0.2, -0.3, -0.1]);
        assert_eq!(evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap().status, Status::Contradicted);
    }

    #[test]
    fn below_n_min_is_inconclusive() {
        let (h, recs, trace) = fixture(&[0.2, 0.3]);
        let f = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!((f.n_instances, f.status), (2, Status::Inconclusive));
    }

    #[test]
    fn empty_scope_gives_empty_finding() {
        let (mut h, recs, trace) = fixture(&[0.2, 0.3, 0.4]);
        h.actions = ActionScope::Products(vec![Product::new(2).unwrap()]);
        let f = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!((f.n_instances, f.status, f.too_small), (0, Status::Inconclusive, false));
    }

    #[test]
    fn condition_filters_instances() {
        let (h, recs, mut trace) = fixture(&[0.2, 0.3, 0.4, 0.5]);
        let f = feature_index("last_prod_type_is_prod5").unwrap();
        trace.rows[0].observation.0[f] = 0.0;
        let out = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!(out.n_instances, 3);
    }

    #[test]
    fn low_tercile_condition() {
        let h = builtin_hypotheses().into_iter().find(|h| h.kind == HypothesisKind::Criticality).unwrap();
        let f = feature_index("buffer_content_duration_prod1").unwrap();
        let trace = TraceDataset {
            rows: (0..9)
                .map(|i| {
                    let mut obs = [0.0; OBS_DIM];
                    obs[f] = i as f64 / 10.0;
                    TraceRow { step_index: i, observation: Observation(obs), action: 0 }
                })
                .collect(),
        };
        let recs: Vec<_> = trace
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut phi = vec![0.0; OBS_DIM];
                phi[f] = 1.0;
                AttributionRecord { method: Method::InputXGradient, instance_index: i, action: 0, phi, base_value: 0.0, feature_values: r.observation.0.to_vec() }
            })
            .collect();
        // 1/3 quantile of 0.0..0.8 is 0.2667: rows 0, 1, 2.
        let out = evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()).unwrap();
        assert_eq!(out.n_instances, 3);
    }

    #[test]
    fn mixed_methods_rejected() {
        let (h, mut recs, trace) = fixture(&[0.2, 0.3, 0.4]);
        recs[1].method = Method::InputXGradient;
        assert!(matches!(evaluate_hypothesis(&h, &recs, &trace, &EvalParams::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_params_rejected() {
        let (h, recs, trace) = fixture(&[0.2]);
        let bad = EvalParams { epsilon: 0.0, ..EvalParams::default() };
        assert!(evaluate_hypothesis(&h, &recs, &trace, &bad).is_err());
    }
}
