//! Post-hoc feature attribution for the policy's logits: Input x Gradient,
//! DeepSHAP (DeepLIFT rescale rule) and brute-force Shapley values.

mod analysis;
mod io;
mod methods;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TraceDataset;

pub use analysis::{aggregate_by_action, outlier_flags, ActionOutliers, ActionSummary, FeatureStat, OutlierFlag, MIN_OUTLIER_RECORDS};
pub use io::{load_attributions, read_attributions, save_attributions, write_attributions};
pub use methods::{
    completeness_check, deep_shap, exact_shapley, exact_shapley_net, explain_trace, input_x_gradient,
    MAX_EXACT_FEATURES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    InputXGradient,
    DeepShap,
    ExactShapley,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::InputXGradient, Method::DeepShap, Method::ExactShapley];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::InputXGradient => "input_x_gradient",
            Method::DeepShap => "deep_shap",
            Method::ExactShapley => "exact_shapley",
        }
    }

    /// Short name used in file names and on the command line.
    pub fn short(self) -> &'static str {
        match self {
            Method::InputXGradient => "ixg",
            Method::DeepShap => "deepshap",
            Method::ExactShapley => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.short() == s)
            .ok_or_else(|| Error::Config(format!("unknown attribution method {s:?}; expected ixg, deepshap or exact")))
    }
}

/// Attribution of one logit for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionRecord {
    pub method: Method,
    pub instance_index: usize,
    pub action: usize,
    pub phi: Vec<f64>,
    /// Expected output over the background (0 for Input x Gradient).
    pub base_value: f64,
    pub feature_values: Vec<f64>,
}

/// Reference inputs standing in for "feature absent".
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSet {
    rows: Vec<Vec<f64>>,
    mean: Vec<f64>,
}

impl BackgroundSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or_else(|| Error::Config("background set is empty".into()))?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Config(format!("background row {i} has {} values, expected {dim}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("background row {i} contains a non-finite value")));
            }
        }
        let mut mean = vec![0.0; dim];
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
        Ok(BackgroundSet { rows, mean })
    }

    pub fn from_trace(trace: &TraceDataset) -> Result<Self> {
        Self::new(trace.rows.iter().map(|r| r.observation.0.to_vec()).collect())
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}
