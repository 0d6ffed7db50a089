//! Verification records.
//!
//! Every check is phrased as `margin >= -tolerance`: for an inequality
//! `lhs <= rhs` the margin is `rhs - lhs`, for an equality it is
//! `-|lhs - rhs|`.

use serde::{Deserialize, Serialize};

use crate::measures::DistanceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A violation the theory predicts (e.g. the ρ^X state); a successful
    /// reproduction rather than a defect.
    Finding,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub kind: Option<DistanceKind>,
    pub value_lhs: f64,
    pub value_rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub seeds: Vec<u64>,
    pub converged: bool,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    /// `lhs <= rhs` within `tolerance`.
    pub fn upper_bound(
        theorem: impl Into<String>,
        kind: Option<DistanceKind>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        Self::from_margin(theorem, kind, lhs, rhs, rhs - lhs, tolerance)
    }

    /// `lhs == rhs` within `tolerance`.
    pub fn equality(
        theorem: impl Into<String>,
        kind: Option<DistanceKind>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        Self::from_margin(theorem, kind, lhs, rhs, -(lhs - rhs).abs(), tolerance)
    }

    fn from_margin(
        theorem: impl Into<String>,
        kind: Option<DistanceKind>,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        let verdict = if margin >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        Self {
            theorem: theorem.into(),
            kind,
            value_lhs: lhs,
            value_rhs: rhs,
            margin,
            tolerance,
            seeds: Vec::new(),
            converged: true,
            verdict,
            note: None,
        }
    }

    pub fn skipped(theorem: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            theorem: theorem.into(),
            kind: None,
            value_lhs: f64::NAN,
            value_rhs: f64::NAN,
            margin: f64::NAN,
            tolerance: 0.0,
            seeds: Vec::new(),
            converged: true,
            verdict: Verdict::Skipped,
            note: Some(note.into()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn with_converged(mut self, converged: bool) -> Self {
        self.converged = converged;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-labels a failed check as a predicted violation.
    pub fn as_finding(mut self) -> Self {
        self.verdict = Verdict::Finding;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Aggregate of many verification instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub verdict: Verdict,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
    pub skipped: usize,
    /// Smallest margin among evaluated instances.
    pub worst_margin: f64,
    pub instances: Vec<VerificationReport>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, instances: Vec<VerificationReport>) -> Self {
        let count = |v: Verdict| instances.iter().filter(|r| r.verdict == v).count();
        let (passed, failed, findings, skipped) =
            (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Finding), count(Verdict::Skipped));
        let worst_margin =
            instances.iter().filter(|r| r.verdict != Verdict::Skipped).map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let verdict = if failed > 0 {
            Verdict::Fail
        } else if passed == 0 && findings > 0 {
            Verdict::Finding
        } else if passed == 0 {
            Verdict::Skipped
        } else {
            Verdict::Pass
        };
        Self { suite: suite.into(), verdict, passed, failed, findings, skipped, worst_margin, instances }
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.instances.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn all_converged(&self) -> bool {
        self.instances.iter().all(|r| r.converged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_verdicts() {
        let ok = VerificationReport::upper_bound("t", None, 0.4, 0.5, 1e-6);
        assert_eq!(ok.verdict, Verdict::Pass);
        assert!((ok.margin - 0.1).abs() < 1e-15);
        let slack = VerificationReport::upper_bound("t", None, 0.5 + 5e-7, 0.5, 1e-6);
        assert!(slack.passed());
        let bad = VerificationReport::equality("t", None, 1.0, 1.1, 1e-5);
        assert_eq!(bad.verdict, Verdict::Fail);
        let suite = SuiteReport::new("s", vec![ok, bad.clone().as_finding()]);
        assert_eq!(suite.verdict, Verdict::Pass);
        assert_eq!(suite.findings, 1);
        assert_eq!(SuiteReport::new("s", vec![bad]).verdict, Verdict::Fail);
    }
}
