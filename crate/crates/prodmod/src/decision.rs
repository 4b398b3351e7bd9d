//! Decision procedure for local consequence over crisp and valued models.
//!
//! A question is decided by enumerating the candidate sequence sets in a
//! fixed order, deciding the propositional translation of each one, and
//! certifying the first counter valuation as a symbolic countermodel. A
//! budget overrun never turns into a wrong answer: it is reported as an
//! explicit unknown verdict, and a counter found at a later set still wins.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::countermodel::{
    build_crisp_countermodel, build_valued_countermodel, verify_truth_lemma, CountermodelError,
    SymbolicCountermodel,
};
use crate::pisolver::{decide_p, decide_pd, PropDecision, SolverConfig, SolverError, Valuation};
use crate::reduction::{build_crisp, build_valued, ReductionError, ReductionInstance};
use crate::sequences::{enumerate_coherent, enumerate_simple, EnumerationError, OmegaSet};
use crate::syntax::{levels, parse, ModalFormula};

/// Which class of models the consequence ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    Crisp,
    Valued,
}

impl std::fmt::Display for Logic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Logic::Crisp => "crisp",
            Logic::Valued => "valued",
        })
    }
}

/// A local consequence question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub logic: Logic,
    pub gamma: Vec<ModalFormula>,
    pub phi: ModalFormula,
}

/// Budgets and knobs for the decision procedure.
#[derive(Clone, Debug)]
pub struct DecideConfig {
    pub branch_limit: u64,
    pub omega_limit: usize,
    pub truncation_k: usize,
    pub jobs: usize,
    pub time_limit: Option<Duration>,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            branch_limit: 1_000_000,
            omega_limit: 1_000_000,
            truncation_k: 4,
            jobs: 1,
            time_limit: None,
        }
    }
}

/// The verdict for one problem.
#[derive(Clone, Debug)]
pub enum Decision {
    Entailed,
    NotEntailed {
        omega_index: usize,
        certificate: Valuation,
        countermodel: SymbolicCountermodel,
    },
    Unknown {
        reason: String,
    },
}

impl Decision {
    pub fn is_entailed(&self) -> bool {
        matches!(self, Decision::Entailed)
    }

    pub fn is_not_entailed(&self) -> bool {
        matches!(self, Decision::NotEntailed { .. })
    }
}

/// What happened at one candidate set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OmegaOutcome {
    Entailed,
    Counter,
    ResourceLimit(String),
    NotEvaluated,
}

/// Per-set record of a decision run.
#[derive(Clone, Debug)]
pub struct OmegaTrace {
    pub omega: OmegaSet,
    pub outcome: OmegaOutcome,
}

#[derive(Debug, Error)]
pub enum DecideError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Countermodel(#[from] CountermodelError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `{0}:` line")]
    Missing(&'static str),
}

/// Read a problem from its line-oriented text form: a `logic:` line, any
/// number of `premise:` lines, one `conclusion:` line, `#` comments.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let mut logic = None;
    let mut gamma = Vec::new();
    let mut phi = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, rest)) = trimmed.split_once(':') else {
            return Err(ProblemError::Parse {
                line,
                message: "expected `key: value`".into(),
            });
        };
        let rest = rest.trim();
        let formula = |line| {
            parse(rest).map_err(|e| ProblemError::Parse {
                line,
                message: e.to_string(),
            })
        };
        match key.trim() {
            "logic" => {
                logic = Some(match rest {
                    "crisp" => Logic::Crisp,
                    "valued" => Logic::Valued,
                    other => {
                        return Err(ProblemError::Parse {
                            line,
                            message: format!("unknown logic `{other}`"),
                        })
                    }
                });
            }
            "premise" => gamma.push(formula(line)?),
            "conclusion" => {
                if phi.is_some() {
                    return Err(ProblemError::Parse {
                        line,
                        message: "duplicate `conclusion:` line".into(),
                    });
                }
                phi = Some(formula(line)?);
            }
            other => {
                return Err(ProblemError::Parse {
                    line,
                    message: format!("unknown key `{other}`"),
                });
            }
        }
    }
    Ok(Problem {
        logic: logic.ok_or(ProblemError::Missing("logic"))?,
        gamma,
        phi: phi.ok_or(ProblemError::Missing("conclusion"))?,
    })
}

/// Decide a problem.
pub fn decide(problem: &Problem, cfg: &DecideConfig) -> Result<Decision, DecideError> {
    Ok(decide_with_trace(problem, cfg)?.0)
}

/// Decide a problem and report what happened at every candidate set.
pub fn decide_with_trace(
    problem: &Problem,
    cfg: &DecideConfig,
) -> Result<(Decision, Vec<OmegaTrace>), DecideError> {
    let deadline = cfg.time_limit.map(|d| Instant::now() + d);
    let mut upsilon: BTreeSet<ModalFormula> = problem.gamma.iter().cloned().collect();
    upsilon.insert(problem.phi.clone());
    let lv = levels(&upsilon);
    let enumerated = match problem.logic {
        Logic::Crisp => enumerate_coherent(&lv, cfg.omega_limit),
        Logic::Valued => enumerate_simple(&lv, cfg.omega_limit),
    };
    let omegas = match enumerated {
        Ok(sets) => sets,
        Err(EnumerationError::BudgetExceeded { limit }) => {
            let reason = format!("more than {limit} candidate sets");
            return Ok((Decision::Unknown { reason }, Vec::new()));
        }
    };

    let mut outcomes = if cfg.jobs > 1 {
        scan_parallel(problem, cfg, deadline, &omegas)?
    } else {
        scan_sequential(problem, cfg, deadline, &omegas)?
    };

    let decision = match summarize(&outcomes) {
        Summary::Entailed => Decision::Entailed,
        Summary::Unknown(reason) => Decision::Unknown { reason },
        Summary::Counter(index) => {
            let h = match outcomes[index].1.take() {
                Some(h) => h,
                None => {
                    return Err(
                        SolverError::Internal("counter outcome without a valuation".into()).into(),
                    )
                }
            };
            let cm = match problem.logic {
                Logic::Crisp => {
                    build_crisp_countermodel(&problem.gamma, &problem.phi, &omegas[index], &h)?
                }
                Logic::Valued => {
                    build_valued_countermodel(&problem.gamma, &problem.phi, &omegas[index], &h)?
                }
            };
            verify_truth_lemma(&cm, cfg.truncation_k.max(1))?;
            Decision::NotEntailed {
                omega_index: index,
                certificate: cm.h.clone(),
                countermodel: cm,
            }
        }
    };
    let traces = omegas
        .into_iter()
        .zip(&outcomes)
        .map(|(omega, (outcome, _))| OmegaTrace {
            omega,
            outcome: outcome.clone(),
        })
        .collect();
    Ok((decision, traces))
}

enum Summary {
    Entailed,
    Counter(usize),
    Unknown(String),
}

/// A counter anywhere wins; otherwise any overrun makes the answer unknown.
fn summarize(outcomes: &[(OmegaOutcome, Option<Valuation>)]) -> Summary {
    let mut unknown = None;
    for (i, (outcome, _)) in outcomes.iter().enumerate() {
        match outcome {
            OmegaOutcome::Counter => return Summary::Counter(i),
            OmegaOutcome::ResourceLimit(msg) if unknown.is_none() => {
                unknown = Some(msg.clone());
            }
            OmegaOutcome::NotEvaluated if unknown.is_none() => {
                unknown = Some("candidate sets left unevaluated".into());
            }
            _ => {}
        }
    }
    match unknown {
        Some(reason) => Summary::Unknown(reason),
        None => Summary::Entailed,
    }
}

fn solve_omega(
    problem: &Problem,
    cfg: &DecideConfig,
    deadline: Option<Instant>,
    omega: &OmegaSet,
) -> Result<(OmegaOutcome, Option<Valuation>), DecideError> {
    let instance: ReductionInstance = match problem.logic {
        Logic::Crisp => build_crisp(&problem.gamma, &problem.phi, omega)?,
        Logic::Valued => build_valued(&problem.gamma, &problem.phi, omega)?,
    };
    let solver_cfg = SolverConfig {
        branch_limit: cfg.branch_limit,
        deadline,
    };
    let premises = instance.premise_formulas();
    let decision = match problem.logic {
        Logic::Crisp => decide_pd(&premises, &instance.goal, &solver_cfg),
        Logic::Valued => decide_p(&premises, &instance.goal, &solver_cfg),
    };
    match decision {
        Ok(PropDecision::Entailed) => Ok((OmegaOutcome::Entailed, None)),
        Ok(PropDecision::Counter(mut h)) => {
            instance.complete_valuation(&mut h);
            Ok((OmegaOutcome::Counter, Some(h)))
        }
        Err(SolverError::ResourceLimit(msg)) => Ok((OmegaOutcome::ResourceLimit(msg), None)),
        Err(e) => Err(e.into()),
    }
}

fn scan_sequential(
    problem: &Problem,
    cfg: &DecideConfig,
    deadline: Option<Instant>,
    omegas: &[OmegaSet],
) -> Result<Vec<(OmegaOutcome, Option<Valuation>)>, DecideError> {
    let mut outcomes = vec![(OmegaOutcome::NotEvaluated, None); omegas.len()];
    for (i, omega) in omegas.iter().enumerate() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            outcomes[i] = (
                OmegaOutcome::ResourceLimit("time limit reached".into()),
                None,
            );
            break;
        }
        outcomes[i] = solve_omega(problem, cfg, deadline, omega)?;
        if matches!(outcomes[i].0, OmegaOutcome::Counter) {
            break;
        }
    }
    Ok(outcomes)
}

fn scan_parallel(
    problem: &Problem,
    cfg: &DecideConfig,
    deadline: Option<Instant>,
    omegas: &[OmegaSet],
) -> Result<Vec<(OmegaOutcome, Option<Valuation>)>, DecideError> {
    let next = AtomicUsize::new(0);
    let best = AtomicUsize::new(usize::MAX);
    let slots: Vec<Mutex<(OmegaOutcome, Option<Valuation>)>> = omegas
        .iter()
        .map(|_| Mutex::new((OmegaOutcome::NotEvaluated, None)))
        .collect();
    let failure: Mutex<Option<DecideError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= omegas.len() || i > best.load(Ordering::SeqCst) {
                    break;
                }
                if failure.lock().unwrap().is_some() {
                    break;
                }
                match solve_omega(problem, cfg, deadline, &omegas[i]) {
                    Ok(result) => {
                        if matches!(result.0, OmegaOutcome::Counter) {
                            best.fetch_min(i, Ordering::SeqCst);
                        }
                        *slots[i].lock().unwrap() = result;
                    }
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    // Every index up to the lowest counter was claimed and finished, so the
    // ascending scan in `summarize` still picks the lowest counter index.
    Ok(slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap())
        .collect())
}
