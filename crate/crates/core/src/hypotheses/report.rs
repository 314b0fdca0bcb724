use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::hypotheses::{validity_check, EvalParams, HypothesisFinding, Status, Verdict};
use crate::xattr::Method;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStatus {
    pub method: Method,
    pub status: Status,
    pub n_instances: usize,
    pub agree_fraction: f64,
}

/// One hypothesis/product pair with its outcome under every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMethodRow {
    pub hypothesis_id: String,
    pub products: Vec<u8>,
    pub methods: Vec<MethodStatus>,
    /// The methods reached different statuses.
    pub disagreement: bool,
}

pub fn cross_method_table(findings: &[HypothesisFinding]) -> Vec<CrossMethodRow> {
    let mut rows: Vec<CrossMethodRow> = Vec::new();
    for f in findings {
        let entry = MethodStatus { method: f.method, status: f.status, n_instances: f.n_instances, agree_fraction: f.agree_fraction };
        match rows.iter_mut().find(|r| r.hypothesis_id == f.hypothesis_id && r.products == f.products) {
            Some(row) => row.methods.push(entry),
            None => rows.push(CrossMethodRow {
                hypothesis_id: f.hypothesis_id.clone(),
                products: f.products.clone(),
                methods: vec![entry],
                disagreement: false,
            }),
        }
    }
    for row in &mut rows {
        row.methods.sort_by_key(|m| m.method);
        row.disagreement = row.methods.windows(2).any(|w| w[0].status != w[1].status);
    }
    rows
}

/// Everything `check` writes to `findings.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub params: EvalParams,
    pub findings: Vec<HypothesisFinding>,
    pub cross_method: Vec<CrossMethodRow>,
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn new(params: EvalParams, findings: Vec<HypothesisFinding>) -> Self {
        let cross_method = cross_method_table(&findings);
        let verdict = validity_check(&findings);
        CheckReport { params, findings, cross_method, verdict }
    }
}

fn products_label(ids: &[u8]) -> String {
    ids.iter().map(|p| format!("prod{p}")).collect::<Vec<_>>().join(", ")
}

pub fn render_markdown(report: &CheckReport) -> String {
    let mut md = String::new();
    let p = &report.params;
    let _ = writeln!(md, "# Hypothesis check\n");
    let _ = writeln!(md, "**Verdict: {}**\n", report.verdict.level.as_str());
    let _ = writeln!(
        md,
        "Thresholds: epsilon = {} (on attributions scaled by the largest |phi| per method), agree threshold = {}, n_min = {}.\n",
        p.epsilon, p.agree_threshold, p.n_min
    );
    let _ = writeln!(md, "## Findings\n");
    let _ = writeln!(md, "| hypothesis | method | product | feature | n | decisive | agree fraction | mean phi | status |");
    let _ = writeln!(md, "|---|---|---|---|---:|---:|---:|---:|---|");
    for f in &report.findings {
        let status = if f.too_small { format!("{} (too small)", f.status.as_str()) } else { f.status.as_str().to_string() };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {:.3} | {:.4e} | {} |",
            f.hypothesis_id,
            f.method,
            products_label(&f.products),
            f.features.join(", "),
            f.n_instances,
            f.n_decisive,
            f.agree_fraction,
            f.mean_phi,
            status
        );
    }
    if report.cross_method.iter().any(|r| r.methods.len() > 1) {
        let _ = writeln!(md, "\n## Method comparison\n");
        let _ = writeln!(md, "| hypothesis | product | statuses | methods disagree |");
        let _ = writeln!(md, "|---|---|---|---|");
        for r in &report.cross_method {
            let statuses: Vec<String> = r.methods.iter().map(|m| format!("{}: {}", m.method.short(), m.status.as_str())).collect();
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} |",
                r.hypothesis_id,
                products_label(&r.products),
                statuses.join("; "),
                if r.disagreement { "**yes**" } else { "no" }
            );
        }
    }
    let _ = writeln!(md, "\n## Validity check\n");
    md.push_str(&report.verdict.narrative);
    md
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::{HypothesisKind, Sign};

    fn f(id: &str, method: Method, status: Status) -> HypothesisFinding {
        HypothesisFinding {
            hypothesis_id: id.into(),
            kind: HypothesisKind::Custom,
            method,
            products: vec![5],
            features: vec!["buffer_fill_level".into()],
            expected_sign: Sign::Positive,
            n_instances: 4,
            n_decisive: 4,
            n_agree: 4,
            agree_fraction: 1.0,
            mean_phi: 0.5,
            too_small: false,
            status,
        }
    }

    #[test]
    fn cross_method_surfaces_disagreement() {
        let rows = cross_method_table(&[
            f("a", Method::DeepShap, Status::Supported),
            f("a", Method::InputXGradient, Status::Contradicted),
            f("b", Method::DeepShap, Status::Supported),
            f("b", Method::InputXGradient, Status::Supported),
        ]);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].disagreement);
        assert!(!rows[1].disagreement);
        assert_eq!(rows[0].methods[0].method, Method::InputXGradient);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = CheckReport::new(EvalParams::default(), vec![f("a", Method::DeepShap, Status::Supported)]);
        let text = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let md = render_markdown(&r);
        assert!(md.contains("**Verdict: valid**"));
        assert!(md.contains("| a | deep_shap | prod5 |"));
    }
}
