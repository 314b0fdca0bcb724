use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{TraceDataset, FEATURE_NAMES};
use crate::product::NUM_PRODUCTS;
use crate::xattr::{AttributionRecord, Method};

/// Records needed per action before outlier statistics are trusted.
pub const MIN_OUTLIER_RECORDS: usize = 30;

fn feature_name(i: usize) -> String {
    FEATURE_NAMES.get(i).map_or_else(|| format!("x{i}"), |n| n.to_string())
}

fn single_method(records: &[AttributionRecord]) -> Result<Option<Method>> {
    let method = records.first().map(|r| r.method);
    if records.iter().any(|r| Some(r.method) != method) {
        return Err(Error::Usage("attribution records mix several methods; aggregate one method at a time".into()));
    }
    Ok(method)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureStat {
    pub rank: usize,
    pub feature: usize,
    pub name: String,
    pub mean_abs: f64,
    pub mean: f64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSummary {
    pub action: usize,
    pub instances: usize,
    /// Set when no record explains this action; `features` is then empty.
    pub never_taken: bool,
    pub features: Vec<FeatureStat>,
}

/// Ranks features by mean |phi| for every action, using only records that
/// explain the action actually taken at that trace row. Ties go to the
/// lower feature index.
pub fn aggregate_by_action(records: &[AttributionRecord], trace: &TraceDataset) -> Result<Vec<ActionSummary>> {
    single_method(records)?;
    let mut summaries = Vec::with_capacity(NUM_PRODUCTS);
    for action in 0..NUM_PRODUCTS {
        let mut selected = Vec::new();
        for r in records.iter().filter(|r| r.action == action) {
            let row = trace.rows.get(r.instance_index).ok_or_else(|| {
                Error::Domain(format!("record instance {} outside the {}-row trace", r.instance_index, trace.len()))
            })?;
            if row.action == action {
                selected.push(r);
            }
        }
        if selected.is_empty() {
            summaries.push(ActionSummary { action, instances: 0, never_taken: true, features: Vec::new() });
            continue;
        }
        let dim = selected[0].phi.len();
        let n = selected.len() as f64;
        let mut features: Vec<FeatureStat> = (0..dim)
            .map(|i| {
                let vals = selected.iter().map(|r| r.phi[i]);
                FeatureStat {
                    rank: 0,
                    feature: i,
                    name: feature_name(i),
                    mean_abs: vals.clone().map(f64::abs).sum::<f64>() / n,
                    mean: vals.clone().sum::<f64>() / n,
                    positive: vals.clone().filter(|&v| v > 0.0).count(),
                    negative: vals.clone().filter(|&v| v < 0.0).count(),
                    zero: vals.filter(|&v| v == 0.0).count(),
                }
            })
            .collect();
        features.sort_by(|a, b| b.mean_abs.total_cmp(&a.mean_abs).then(a.feature.cmp(&b.feature)));
        for (k, f) in features.iter_mut().enumerate() {
            f.rank = k + 1;
        }
        summaries.push(ActionSummary { action, instances: selected.len(), never_taken: false, features });
    }
    Ok(summaries)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierFlag {
    pub action: usize,
    pub feature: usize,
    pub name: String,
    pub instance_index: usize,
    pub value: f64,
    pub mean: f64,
    pub std: f64,
}

impl OutlierFlag {
    pub fn z_score(&self) -> f64 {
        (self.value - self.mean) / self.std
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionOutliers {
    pub action: usize,
    pub records: usize,
    /// Fewer than `MIN_OUTLIER_RECORDS` records: no statistics computed.
    pub insufficient_data: bool,
    pub flags: Vec<OutlierFlag>,
}

/// Flags attributions more than three sample standard deviations from their
/// (feature, action) mean. Zero-variance columns never flag.
pub fn outlier_flags(records: &[AttributionRecord]) -> Vec<ActionOutliers> {
    let mut actions: Vec<usize> = records.iter().map(|r| r.action).collect();
    actions.sort_unstable();
    actions.dedup();
    actions
        .into_iter()
        .map(|action| {
            let group: Vec<&AttributionRecord> = records.iter().filter(|r| r.action == action).collect();
            let mut out = ActionOutliers {
                action,
                records: group.len(),
                insufficient_data: group.len() < MIN_OUTLIER_RECORDS,
                flags: Vec::new(),
            };
            if out.insufficient_data {
                return out;
            }
            let n = group.len() as f64;
            let dim = group.iter().map(|r| r.phi.len()).min().unwrap_or(0);
            for feature in 0..dim {
                let mean = group.iter().map(|r| r.phi[feature]).sum::<f64>() / n;
                let var = group.iter().map(|r| (r.phi[feature] - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let std = var.sqrt();
                if !(std > 0.0) {
                    continue;
                }
                for r in &group {
                    let value = r.phi[feature];
                    if (value - mean).abs() > 3.0 * std {
                        out.flags.push(OutlierFlag {
                            action,
                            feature,
                            name: feature_name(feature),
                            instance_index: r.instance_index,
                            value,
                            mean,
                            std,
                        });
                    }
                }
            }
            out
        })
        .collect()
}
