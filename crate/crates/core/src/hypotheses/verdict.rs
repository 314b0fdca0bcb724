use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::hypotheses::{HypothesisFinding, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLevel {
    Valid,
    PartlyValid,
    NotValid,
}

impl VerdictLevel {
    /// Process exit code of the `check` command.
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictLevel::Valid => 0,
            VerdictLevel::PartlyValid => 10,
            VerdictLevel::NotValid => 20,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLevel::Valid => "valid",
            VerdictLevel::PartlyValid => "partly_valid",
            VerdictLevel::NotValid => "not_valid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub level: VerdictLevel,
    pub supported: usize,
    pub contradicted: usize,
    pub inconclusive: usize,
    pub narrative: String,
}

/// Valid: every decisive finding supports its hypothesis (and at least one
/// does). Not valid: nothing supported and something contradicted.
/// Everything else is partly valid.
pub fn validity_check(findings: &[HypothesisFinding]) -> Verdict {
    let count = |s: Status| findings.iter().filter(|f| f.status == s).count();
    let (supported, contradicted, inconclusive) =
        (count(Status::Supported), count(Status::Contradicted), count(Status::Inconclusive));
    let level = if supported > 0 && contradicted == 0 {
        VerdictLevel::Valid
    } else if supported == 0 && contradicted > 0 {
        VerdictLevel::NotValid
    } else {
        VerdictLevel::PartlyValid
    };

    let mut text = String::new();
    let _ = writeln!(
        text,
        "Verdict: {} ({supported} supported, {contradicted} contradicted, {inconclusive} inconclusive).",
        level.as_str()
    );
    for f in findings {
        let products: Vec<String> = f.products.iter().map(|p| format!("prod{p}")).collect();
        let _ = write!(
            text,
            "- {} [{}; {}]: {}, n={}, decisive={}, agree_fraction={:.3}, mean_phi={:.4e}",
            f.hypothesis_id,
            f.method,
            products.join(","),
            f.status.as_str(),
            f.n_instances,
            f.n_decisive,
            f.agree_fraction,
            f.mean_phi
        );
        if f.too_small {
            text.push_str(" (attributions too small to interpret)");
        }
        text.push('\n');
    }
    text.push_str(match level {
        VerdictLevel::Valid => "Next step: the explanations are consistent with the hypotheses and can be communicated.\n",
        VerdictLevel::PartlyValid => {
            "Next step: improve your hypotheses where they were contradicted or inconclusive, then check again.\n"
        }
        VerdictLevel::NotValid => {
            "Next step: double-check the validity of the chosen xAI methods and of the trained model before revising hypotheses.\n"
        }
    });
    if level == VerdictLevel::PartlyValid && contradicted > 0 {
        text.push_str("If contradictions persist, double-check the validity of the chosen xAI methods.\n");
    }
    Verdict { level, supported, contradicted, inconclusive, narrative: text }
}
