//! Machine-readable experiment reports wrapping per-quantity estimates,
//! additivity gaps with bound-direction annotations, and timings.
//!
//! Re-running an identical config (seed included) reproduces the payload
//! byte-for-byte once timings are stripped; `canonical_json` is that
//! determinism surface.

use serde::{Deserialize, Serialize};

use crate::channels::ValidationReport;
use crate::dual::{DualSolution, FeasibilityReport};
use crate::harness::config::ExperimentConfig;
use crate::harness::grid::GridBound;
use crate::msw::MswIdentityReport;
use crate::quantities::{Estimate, SuperadditivityGap};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Two-channel (or two-state) additivity comparison. `gap` is
/// tensor − (single_1 + single_2); `bound_note` records which side each
/// number bounds, so a sign alone is never read as a verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdditivityComparison {
    pub tensor: Estimate,
    pub single_1: Estimate,
    pub single_2: Estimate,
    pub sum_of_singles: f64,
    pub gap: f64,
    pub bound_note: String,
    /// Budget doublings performed by the escalation protocol.
    pub escalations: usize,
    /// Gap still beyond tolerance after escalation; recorded, not certified.
    pub candidate_violation: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinentAdditivityResult {
    pub comparison: AdditivityComparison,
    /// Grid scans of the single channels when their inputs are qubits.
    pub grids: Vec<GridBound>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificateResult {
    pub solution: DualSolution,
    pub feasibility: FeasibilityReport,
    /// H(N(ρ)) − f(ρ), the dual capacity bound.
    pub capacity_bound: f64,
    /// Search estimate of χ_N(ρ) for the weak-duality comparison.
    pub capacity_estimate: Estimate,
}

/// Residual summary of one gadget construction check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetVerifyResult {
    pub checks: Vec<GadgetCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrongSuperaddResult {
    pub gap: SuperadditivityGap,
    /// Gap recomputed with doubled restarts.
    pub gap_doubled: f64,
    pub sign_consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ExperimentResult {
    #[serde(rename = "minent-additivity")]
    MinentAdditivity(MinentAdditivityResult),
    #[serde(rename = "chi-additivity")]
    ChiAdditivity(AdditivityComparison),
    #[serde(rename = "eof-additivity")]
    EofAdditivity(AdditivityComparison),
    #[serde(rename = "strong-superadd")]
    StrongSuperadd(StrongSuperaddResult),
    #[serde(rename = "msw-check")]
    MswCheck(MswIdentityReport),
    #[serde(rename = "dual-certificate")]
    DualCertificate(DualCertificateResult),
    #[serde(rename = "gadget-verify")]
    GadgetVerify(GadgetVerifyResult),
    #[serde(rename = "validate")]
    Validate { channels: Vec<ValidationReport> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Vec<ExperimentResult>,
    /// Wall-clock milliseconds; excluded from the determinism surface.
    pub timings_ms: Vec<(String, f64)>,
}

impl Report {
    /// JSON payload with timings stripped; identical configs must reproduce
    /// this byte-for-byte.
    pub fn canonical_json(&self) -> serde_json::Result<String> {
        let mut clone = self.clone();
        clone.timings_ms.clear();
        serde_json::to_string_pretty(&clone)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Flat CSV rows for plotting: one line per comparison or residual.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,lhs,rhs,gap,direction\n");
        let mut push = |kind: &str, name: &str, lhs: f64, rhs: f64, gap: f64, direction: &str| {
            out.push_str(&format!(
                "{kind},{name},{lhs:.12e},{rhs:.12e},{gap:.12e},{direction}\n"
            ));
        };
        for result in &self.results {
            match result {
                ExperimentResult::MinentAdditivity(r) => push(
                    "minent-additivity",
                    "tensor-vs-sum",
                    r.comparison.tensor.value,
                    r.comparison.sum_of_singles,
                    r.comparison.gap,
                    "upper-on-min",
                ),
                ExperimentResult::ChiAdditivity(c) => push(
                    "chi-additivity",
                    "tensor-vs-sum",
                    c.tensor.value,
                    c.sum_of_singles,
                    c.gap,
                    "lower-on-max",
                ),
                ExperimentResult::EofAdditivity(c) => push(
                    "eof-additivity",
                    "tensor-vs-sum",
                    c.tensor.value,
                    c.sum_of_singles,
                    c.gap,
                    "upper-on-min",
                ),
                ExperimentResult::StrongSuperadd(s) => push(
                    "strong-superadd",
                    "whole-vs-parts",
                    s.gap.whole.value,
                    s.gap.whole.value - s.gap.gap,
                    s.gap.gap,
                    "upper-on-min",
                ),
                ExperimentResult::MswCheck(m) => push(
                    "msw-check",
                    "chi-vs-h-minus-ef",
                    m.constrained_chi.value,
                    m.output_entropy - m.eof.value,
                    m.residual,
                    "identity-residual",
                ),
                ExperimentResult::DualCertificate(d) => push(
                    "dual-certificate",
                    "capacity-bound-vs-estimate",
                    d.capacity_bound,
                    d.capacity_estimate.value,
                    d.capacity_bound - d.capacity_estimate.value,
                    "upper-on-max",
                ),
                ExperimentResult::GadgetVerify(g) => {
                    for check in &g.checks {
                        push(
                            "gadget-verify",
                            &check.name,
                            check.residual,
                            check.tolerance,
                            check.residual - check.tolerance,
                            "residual",
                        );
                    }
                }
                ExperimentResult::Validate { channels } => {
                    for (i, r) in channels.iter().enumerate() {
                        push(
                            "validate",
                            &format!("channel-{i}"),
                            r.tp_residual,
                            r.choi_min_eigenvalue,
                            0.0,
                            if r.pass { "pass" } else { "fail" },
                        );
                    }
                }
            }
        }
        out
    }

    /// True when every result in the report passed its own criteria; used
    /// for the process exit code.
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| match r {
            ExperimentResult::Validate { channels } => channels.iter().all(|v| v.pass),
            ExperimentResult::GadgetVerify(g) => g.pass,
            _ => true,
        })
    }
}
