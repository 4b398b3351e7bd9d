//! JSON reports for decision runs.
//!
//! A report carries everything needed to re-check a verdict offline: the
//! question, the per-set outcomes, and for a negative answer the certified
//! countermodel. Reports are versioned by a schema number.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::countermodel::{
    build_crisp_countermodel, build_valued_countermodel, verify_truth_lemma, CountermodelError,
    SymbolicCountermodel,
};
use crate::decision::{Decision, Logic, OmegaOutcome, OmegaTrace, Problem};
use crate::sequences::OmegaSet;
use crate::syntax::ModalFormula;

/// Current report schema number.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported report schema {0}")]
    Schema(u32),
    #[error("report is not internally consistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Countermodel(#[from] CountermodelError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Verdict tag used in serialized reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Entailed,
    NotEntailed,
    Unknown,
}

/// Serialized outcome of one candidate set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeReport {
    Entailed,
    Counter,
    ResourceLimit { message: String },
    NotEvaluated,
}

impl From<&OmegaOutcome> for OutcomeReport {
    fn from(outcome: &OmegaOutcome) -> Self {
        match outcome {
            OmegaOutcome::Entailed => OutcomeReport::Entailed,
            OmegaOutcome::Counter => OutcomeReport::Counter,
            OmegaOutcome::ResourceLimit(message) => OutcomeReport::ResourceLimit {
                message: message.clone(),
            },
            OmegaOutcome::NotEvaluated => OutcomeReport::NotEvaluated,
        }
    }
}

/// One candidate set and what the decision run did with it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SetReport {
    pub omega: OmegaSet,
    pub outcome: OutcomeReport,
}

/// Self-contained record of one decision run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub logic: Logic,
    pub premises: Vec<ModalFormula>,
    pub conclusion: ModalFormula,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<SymbolicCountermodel>,
    pub sets: Vec<SetReport>,
    pub elapsed_ms: u64,
}

impl Report {
    /// Assemble a report from a finished decision run.
    pub fn new(
        problem: &Problem,
        decision: &Decision,
        traces: &[OmegaTrace],
        elapsed_ms: u64,
    ) -> Report {
        let (verdict, reason, omega_index, countermodel) = match decision {
            Decision::Entailed => (Verdict::Entailed, None, None, None),
            Decision::NotEntailed {
                omega_index,
                countermodel,
                ..
            } => (
                Verdict::NotEntailed,
                None,
                Some(*omega_index),
                Some(countermodel.clone()),
            ),
            Decision::Unknown { reason } => (Verdict::Unknown, Some(reason.clone()), None, None),
        };
        Report {
            schema: SCHEMA_VERSION,
            logic: problem.logic,
            premises: problem.gamma.clone(),
            conclusion: problem.phi.clone(),
            verdict,
            reason,
            omega_index,
            countermodel,
            sets: traces
                .iter()
                .map(|t| SetReport {
                    omega: t.omega.clone(),
                    outcome: (&t.outcome).into(),
                })
                .collect(),
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let report: Report = serde_json::from_str(text)?;
        if report.schema != SCHEMA_VERSION {
            return Err(ReportError::Schema(report.schema));
        }
        Ok(report)
    }

    /// Re-check a deserialized report: a negative verdict must carry a
    /// countermodel that still certifies and satisfies the truth lemma.
    pub fn reverify(&self, truncation_k: usize) -> Result<(), ReportError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ReportError::Schema(self.schema));
        }
        let Some(cm) = &self.countermodel else {
            return match self.verdict {
                Verdict::NotEntailed => Err(ReportError::Inconsistent(
                    "negative verdict without a countermodel".into(),
                )),
                _ => Ok(()),
            };
        };
        if self.verdict != Verdict::NotEntailed {
            return Err(ReportError::Inconsistent(
                "countermodel attached to a non-negative verdict".into(),
            ));
        }
        if cm.crisp != (self.logic == Logic::Crisp) {
            return Err(ReportError::Inconsistent(
                "countermodel logic differs from the report logic".into(),
            ));
        }
        if cm.gamma != self.premises || cm.phi != self.conclusion {
            return Err(ReportError::Inconsistent(
                "countermodel does not answer the reported question".into(),
            ));
        }
        let rebuilt = match self.logic {
            Logic::Crisp => build_crisp_countermodel(&cm.gamma, &cm.phi, &cm.omega, &cm.h)?,
            Logic::Valued => build_valued_countermodel(&cm.gamma, &cm.phi, &cm.omega, &cm.h)?,
        };
        verify_truth_lemma(&rebuilt, truncation_k.max(1))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{decide_with_trace, DecideConfig};
    use crate::pisolver::LogValue;
    use crate::sequences::Sequence;
    use crate::syntax::{parse, ExtVar};

    fn run(logic: Logic, phi: &str) -> (Problem, Report) {
        let problem = Problem {
            logic,
            gamma: Vec::new(),
            phi: parse(phi).unwrap(),
        };
        let (decision, traces) = decide_with_trace(&problem, &DecideConfig::default()).unwrap();
        let report = Report::new(&problem, &decision, &traces, 7);
        (problem, report)
    }

    #[test]
    fn negative_reports_round_trip_and_reverify() {
        let (_, report) = run(Logic::Crisp, "box p -> p");
        let json = report.to_json();
        assert!(json.contains("\"schema\": 1"));
        assert!(json.contains("\"verdict\": \"not_entailed\""));
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back.omega_index, Some(0));
        back.reverify(3).unwrap();
    }

    #[test]
    fn positive_reports_carry_per_set_outcomes() {
        let (_, report) = run(Logic::Crisp, "box (p -> p)");
        assert_eq!(report.verdict, Verdict::Entailed);
        assert!(report.countermodel.is_none());
        assert_eq!(report.sets.len(), 3);
        assert!(report
            .sets
            .iter()
            .all(|s| s.outcome == OutcomeReport::Entailed));
        report.reverify(2).unwrap();
        let back = Report::from_json(&report.to_json()).unwrap();
        assert_eq!(back.sets.len(), 3);
    }

    #[test]
    fn tampered_reports_are_rejected() {
        let (_, report) = run(Logic::Crisp, "box p -> p");
        let mut tampered = Report::from_json(&report.to_json()).unwrap();
        if let Some(cm) = tampered.countermodel.as_mut() {
            cm.h.set(
                ExtVar::BaseVar {
                    name: "p".into(),
                    seq: Sequence::root(),
                },
                LogValue::top(),
            );
        }
        assert!(matches!(
            tampered.reverify(2),
            Err(ReportError::Countermodel(
                CountermodelError::CertificateRejected(_)
            ))
        ));

        let mut wrong_schema = report.clone();
        wrong_schema.schema = 2;
        assert!(matches!(
            Report::from_json(&wrong_schema.to_json()),
            Err(ReportError::Schema(2))
        ));
    }
}
