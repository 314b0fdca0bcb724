//! Sign-directional hypotheses about the agent, tested against attribution
//! records and rolled up into a valid / partly valid / not valid verdict.
//!
//! Hypotheses file (TOML):
//!
//! ```toml
//! [[hypothesis]]
//! id = "setup_efforts"
//! kind = "setup_efforts"            # criticality | setup_efforts | custom
//! description = "..."
//! actions = "all_produced"          # or a list of product ids, e.g. [5, 8]
//! feature = "last_prod_type_is_prod{self}"
//! condition = { equals = 1.0 }      # optional; or { tercile = "low" | "high" }
//! expected_sign = "positive"        # or "negative"
//! ```

mod evaluate;
mod report;
mod verdict;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::feature_index;
use crate::product::Product;

pub use evaluate::{evaluate_hypothesis, evaluate_per_product, evaluate_all, EvalParams, HypothesisFinding, Status};
pub use report::{cross_method_table, render_markdown, CheckReport, CrossMethodRow};
pub use verdict::{validity_check, Verdict, VerdictLevel};

const SELF: &str = "{self}";

/// Text of the two shipped templates.
pub const BUILTIN_HYPOTHESES: &str = include_str!("../../../../hypotheses/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisKind {
    Criticality,
    SetupEfforts,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn matches(self, value: f64) -> bool {
        match self {
            Sign::Positive => value > 0.0,
            Sign::Negative => value < 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tercile {
    Low,
    High,
}

/// Predicate on the raw feature value of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Equals(f64),
    /// Bottom or top third of the feature's distribution over the trace.
    Tercile(Tercile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ActionScope {
    AllProduced,
    Products(Vec<Product>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub id: String,
    pub description: String,
    pub kind: HypothesisKind,
    pub actions: ActionScope,
    /// Feature name, possibly containing `{self}`.
    pub feature: String,
    pub condition: Option<Condition>,
    pub expected_sign: Sign,
}

impl Hypothesis {
    /// Feature column this hypothesis reads when explaining `product`.
    pub fn feature_for(&self, product: Product) -> Option<usize> {
        feature_index(&self.feature.replace(SELF, &product.id().to_string()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    hypothesis: Vec<RawHypothesis>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScope {
    Keyword(String),
    Products(Vec<u8>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHypothesis {
    id: String,
    #[serde(default)]
    description: String,
    #[serde(default = "custom_kind")]
    kind: HypothesisKind,
    actions: RawScope,
    feature: String,
    condition: Option<Condition>,
    expected_sign: Sign,
}

fn custom_kind() -> HypothesisKind {
    HypothesisKind::Custom
}

pub fn parse_hypotheses(text: &str, origin: &str) -> Result<Vec<Hypothesis>> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string().trim().to_string()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.hypothesis.len());
    for (k, h) in raw.hypothesis.into_iter().enumerate() {
        let loc = format!("{origin}: hypothesis {} ({:?})", k + 1, h.id);
        if h.id.trim().is_empty() {
            return Err(Error::parse(loc, "id must not be empty"));
        }
        if !seen.insert(h.id.clone()) {
            return Err(Error::parse(loc, format!("duplicate id {:?}", h.id)));
        }
        let actions = match h.actions {
            RawScope::Keyword(k) if k == "all_produced" => ActionScope::AllProduced,
            RawScope::Keyword(k) => {
                return Err(Error::parse(loc, format!("actions must be \"all_produced\" or a list of product ids, found {k:?}")))
            }
            RawScope::Products(ids) if ids.is_empty() => return Err(Error::parse(loc, "actions list is empty")),
            RawScope::Products(ids) => {
                ActionScope::Products(ids.into_iter().map(Product::new).collect::<Result<_>>().map_err(|e| Error::parse(&loc, e.to_string()))?)
            }
        };
        let hyp = Hypothesis {
            id: h.id,
            description: h.description,
            kind: h.kind,
            actions,
            feature: h.feature,
            condition: h.condition,
            expected_sign: h.expected_sign,
        };
        if let Some(p) = Product::all().find(|&p| hyp.feature_for(p).is_none()) {
            return Err(Error::parse(loc, format!("feature selector {:?} does not name a feature for {p}", hyp.feature)));
        }
        if let Some(Condition::Equals(v)) = hyp.condition {
            if !v.is_finite() {
                return Err(Error::parse(loc, "condition value must be finite"));
            }
        }
        out.push(hyp);
    }
    Ok(out)
}

pub fn load_hypotheses(path: impl AsRef<Path>) -> Result<Vec<Hypothesis>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hypotheses(&text, &path.display().to_string())
}

pub fn builtin_hypotheses() -> Vec<Hypothesis> {
    parse_hypotheses(BUILTIN_HYPOTHESES, "builtin").expect("shipped hypotheses parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_hypotheses("", "t").unwrap().is_empty());
    }

    #[test]
    fn builtin_setup_template_for_product_five() {
        let hs = builtin_hypotheses();
        assert_eq!(hs.len(), 2);
        let setup = hs.iter().find(|h| h.kind == HypothesisKind::SetupEfforts).unwrap();
        let p5 = Product::from_action(4).unwrap();
        assert_eq!(setup.feature_for(p5), feature_index("last_prod_type_is_prod5"));
        assert_eq!(setup.expected_sign, Sign::Positive);
        assert_eq!(setup.condition, Some(Condition::Equals(1.0)));
        let crit = hs.iter().find(|h| h.kind == HypothesisKind::Criticality).unwrap();
        assert_eq!(crit.condition, Some(Condition::Tercile(Tercile::Low)));
    }

    const ONE: &str = "[[hypothesis]]\nid = \"a\"\nactions = [5]\nfeature = \"buffer_fill_level\"\nexpected_sign = \"negative\"\n";

    #[test]
    fn parses_explicit_scope() {
        let hs = parse_hypotheses(ONE, "t").unwrap();
        assert_eq!(hs[0].actions, ActionScope::Products(vec![Product::new(5).unwrap()]));
        assert_eq!(hs[0].kind, HypothesisKind::Custom);
        assert_eq!(hs[0].condition, None);
    }

    #[test]
    fn malformed_sign_rejected() {
        let text = ONE.replace("\"negative\"", "\"downwards\"");
        assert!(matches!(parse_hypotheses(&text, "t"), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicate_id_rejected_with_location() {
        let err = parse_hypotheses(&format!("{ONE}{ONE}"), "h.toml").unwrap_err();
        assert!(err.to_string().contains("h.toml: hypothesis 2"), "{err}");
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn unresolvable_selector_rejected() {
        let text = ONE.replace("buffer_fill_level", "inventory_{self}");
        let err = parse_hypotheses(&text, "t").unwrap_err();
        assert!(err.to_string().contains("inventory_{self}"), "{err}");
    }

    #[test]
    fn bad_product_and_scope_rejected() {
        assert!(parse_hypotheses(&ONE.replace("[5]", "[9]"), "t").is_err());
        assert!(parse_hypotheses(&ONE.replace("[5]", "\"everything\""), "t").is_err());
    }
}
