//! Translation of modal consequence queries into propositional ones.
//!
//! Given premises, a conclusion and one coherent or simple sequence set,
//! the builder emits subscripted clauses constraining the variables of the
//! set, tagged by the clause family they belong to, together with the goal
//! formula whose failure describes a counter valuation.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::pisolver::{LogValue, Valuation};
use crate::sequences::{is_coherent, is_simple, OmegaKind, OmegaSet, Sequence};
use crate::syntax::{
    alpha_subscript, gens, levels, subscript, ExtVar, Generator, ModalFormula, PropFormula,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the sequence set is not coherent for these formulas")]
    IncoherentOmega,
    #[error("the sequence set is not simple for these formulas")]
    NotSimpleOmega,
}

/// Clause family tags used in dumps and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Premise,
    WitnessedDia,
    WitnessedBox,
    UnwitnessedBox,
    AlphaDia,
    AlphaBox,
    TwoVal,
    Negation,
    Implication,
    WitnessValue,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Premise => "premise",
            Family::WitnessedDia => "wDia",
            Family::WitnessedBox => "wBox",
            Family::UnwitnessedBox => "uwBox",
            Family::AlphaDia => "alphaDia",
            Family::AlphaBox => "alphaBox",
            Family::TwoVal => "2V",
            Family::Negation => "neg",
            Family::Implication => "imp",
            Family::WitnessValue => "wV",
        };
        f.write_str(name)
    }
}

/// One propositional consequence instance for one sequence set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionInstance {
    pub omega: OmegaSet,
    pub variables: Vec<ExtVar>,
    pub premises: Vec<(Family, PropFormula)>,
    pub goal: PropFormula,
    pub side_disjunct: PropFormula,
}

impl ReductionInstance {
    /// Premise formulas without their family tags.
    pub fn premise_formulas(&self) -> Vec<PropFormula> {
        self.premises.iter().map(|(_, f)| f.clone()).collect()
    }

    /// Bind every declared variable the valuation does not mention to one.
    pub fn complete_valuation(&self, val: &mut Valuation) {
        for v in &self.variables {
            if val.get(v).is_none() {
                val.set(v.clone(), LogValue::top());
            }
        }
    }

    /// Human readable listing of the instance.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "omega: {}", self.omega);
        let _ = writeln!(out, "variables ({}):", self.variables.len());
        for v in &self.variables {
            let _ = writeln!(out, "  {v}");
        }
        let _ = writeln!(out, "clauses ({}):", self.premises.len());
        for (family, f) in &self.premises {
            let _ = writeln!(out, "  [{family}] {f}");
        }
        let _ = writeln!(out, "goal: {}", self.goal);
        let _ = writeln!(out, "side: {}", self.side_disjunct);
        out
    }
}

fn upsilon_of(gamma: &[ModalFormula], phi: &ModalFormula) -> BTreeSet<ModalFormula> {
    let mut set: BTreeSet<ModalFormula> = gamma.iter().cloned().collect();
    set.insert(phi.clone());
    set
}

fn modal_gens(level: &BTreeSet<ModalFormula>) -> Vec<ModalFormula> {
    gens(level)
        .into_iter()
        .filter_map(|g| match g {
            Generator::Modal(m) => Some(m),
            Generator::Var(_) => None,
        })
        .collect()
}

fn atom(m: &ModalFormula, seq: &Sequence) -> PropFormula {
    PropFormula::EVar(ExtVar::ModalAtom {
        formula: m.clone(),
        seq: seq.clone(),
    })
}

fn alpha_var(seq: &Sequence, g: Generator) -> PropFormula {
    PropFormula::EVar(ExtVar::Alpha {
        seq: seq.clone(),
        gen: g,
    })
}

fn rel_var(parent: &Sequence, child: &Sequence) -> PropFormula {
    PropFormula::EVar(ExtVar::RelVar {
        parent: parent.clone(),
        child: child.clone(),
    })
}

fn declare_variables(
    omega: &OmegaSet,
    lv: &[BTreeSet<ModalFormula>],
    with_alphas: bool,
    with_rels: bool,
) -> Vec<ExtVar> {
    let mut out = BTreeSet::new();
    for sigma in &omega.members {
        let level = &lv[sigma.depth()];
        for g in gens(level) {
            match &g {
                Generator::Var(name) => {
                    out.insert(ExtVar::BaseVar {
                        name: name.clone(),
                        seq: sigma.clone(),
                    });
                }
                Generator::Modal(m) => {
                    out.insert(ExtVar::ModalAtom {
                        formula: m.clone(),
                        seq: sigma.clone(),
                    });
                }
            }
            if with_alphas && sigma.sigma_minus() != *sigma {
                out.insert(ExtVar::Alpha {
                    seq: sigma.clone(),
                    gen: g,
                });
            }
        }
        if with_rels {
            for child in omega.children_of(sigma) {
                out.insert(ExtVar::RelVar {
                    parent: sigma.clone(),
                    child: child.clone(),
                });
            }
        }
    }
    out.into_iter().collect()
}

/// Build the propositional instance for a coherent set.
pub fn build_crisp(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    omega: &OmegaSet,
) -> Result<ReductionInstance, ReductionError> {
    let upsilon = upsilon_of(gamma, phi);
    let lv = levels(&upsilon);
    if omega.kind != OmegaKind::Coherent || !is_coherent(&omega.members, &lv) {
        return Err(ReductionError::IncoherentOmega);
    }

    let root = Sequence::root();
    let mut premises: Vec<(Family, PropFormula)> = Vec::new();
    for g in &upsilon {
        if gamma.contains(g) {
            premises.push((Family::Premise, subscript(g, &root)));
        }
    }

    let mut side_parts: Vec<PropFormula> = Vec::new();

    for sigma in &omega.members {
        let level = &lv[sigma.depth()];
        let children: Vec<Sequence> = omega.children_of(sigma).into_iter().cloned().collect();
        let primed = sigma.sigma_minus() != *sigma;

        for m in modal_gens(level) {
            let body = m.modal_body().expect("modal generator");
            let var = atom(&m, sigma);
            if m.is_box_headed() && omega.contains(&sigma.child(m.clone(), true)) {
                premises.push((Family::UnwitnessedBox, PropFormula::neg(var)));
                continue;
            }
            let witness = sigma.child(m.clone(), false);
            if m.is_box_headed() {
                let clause = if omega.contains(&witness) {
                    let bound = PropFormula::conj(children.iter().map(|c| subscript(body, c)));
                    PropFormula::strong_and(
                        PropFormula::iff(var.clone(), subscript(body, &witness)),
                        PropFormula::imp(var, bound),
                    )
                } else {
                    PropFormula::iff(var, PropFormula::Top)
                };
                premises.push((Family::WitnessedBox, clause));
            } else {
                let clause = if omega.contains(&witness) {
                    let bound = PropFormula::disj(children.iter().map(|c| subscript(body, c)));
                    PropFormula::strong_and(
                        PropFormula::iff(var.clone(), subscript(body, &witness)),
                        PropFormula::imp(bound, var),
                    )
                } else {
                    PropFormula::iff(var, PropFormula::Bot)
                };
                premises.push((Family::WitnessedDia, clause));
            }
        }

        if primed {
            for m in modal_gens(level) {
                if m.is_box_headed() && omega.contains(&sigma.child(m.clone(), true)) {
                    continue;
                }
                let body = m.modal_body().expect("modal generator");
                let avar = alpha_var(sigma, Generator::Modal(m.clone()));
                let witness = sigma.child(m.clone(), false);
                if m.is_box_headed() {
                    let clause = if omega.contains(&witness) {
                        let aw = alpha_subscript(body, &witness);
                        let bound =
                            PropFormula::conj(children.iter().map(|c| alpha_subscript(body, c)));
                        PropFormula::strong_and(
                            PropFormula::iff(avar, aw.clone()),
                            PropFormula::imp(aw, bound),
                        )
                    } else {
                        PropFormula::iff(avar, PropFormula::Top)
                    };
                    premises.push((Family::AlphaBox, clause));
                } else {
                    let clause = if omega.contains(&witness) {
                        let aw = alpha_subscript(body, &witness);
                        let bound =
                            PropFormula::disj(children.iter().map(|c| alpha_subscript(body, c)));
                        PropFormula::strong_and(
                            PropFormula::iff(avar, aw.clone()),
                            PropFormula::imp(bound, aw),
                        )
                    } else {
                        PropFormula::iff(avar, PropFormula::Bot)
                    };
                    premises.push((Family::AlphaDia, clause));
                }
            }

            let minus = sigma.sigma_minus();
            for psi in level {
                let clause = PropFormula::iff(
                    subscript(psi, sigma),
                    PropFormula::strong_and(subscript(psi, &minus), alpha_subscript(psi, sigma)),
                );
                premises.push((Family::TwoVal, clause));
            }
            for psi in level {
                let clause = PropFormula::iff(
                    PropFormula::neg(alpha_subscript(psi, sigma)),
                    PropFormula::neg(subscript(psi, &minus)),
                );
                premises.push((Family::Negation, clause));
            }
            for psi in level {
                for chi in level {
                    if psi == chi {
                        continue;
                    }
                    let clause = PropFormula::imp(
                        PropFormula::delta(PropFormula::imp(
                            subscript(psi, &minus),
                            subscript(chi, &minus),
                        )),
                        PropFormula::imp(alpha_subscript(psi, sigma), alpha_subscript(chi, sigma)),
                    );
                    premises.push((Family::Implication, clause));
                }
            }
        }

        for m in modal_gens(level).into_iter().filter(|m| m.is_box_headed()) {
            let body = m.modal_body().expect("modal generator");
            let var = atom(&m, sigma);
            for child in &children {
                let Some((last, true)) = child.last() else {
                    continue;
                };
                if !last.is_box_headed() {
                    continue;
                }
                let clause = PropFormula::imp(
                    PropFormula::neg(PropFormula::neg(var.clone())),
                    alpha_subscript(body, child),
                );
                premises.push((Family::WitnessValue, clause));
                if *last == m {
                    side_parts.push(alpha_subscript(body, child));
                }
            }
        }
    }

    let side = PropFormula::disj(side_parts);
    let phi0 = subscript(phi, &root);
    let goal = if side == PropFormula::Bot {
        phi0
    } else {
        PropFormula::weak_or(phi0, side.clone())
    };
    Ok(ReductionInstance {
        omega: omega.clone(),
        variables: declare_variables(omega, &lv, true, false),
        premises,
        goal,
        side_disjunct: side,
    })
}

/// Build the propositional instance for a simple set.
pub fn build_valued(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    omega: &OmegaSet,
) -> Result<ReductionInstance, ReductionError> {
    let upsilon = upsilon_of(gamma, phi);
    let lv = levels(&upsilon);
    if omega.kind != OmegaKind::Simple || !is_simple(&omega.members, &lv) {
        return Err(ReductionError::NotSimpleOmega);
    }

    let root = Sequence::root();
    let mut premises: Vec<(Family, PropFormula)> = Vec::new();
    for g in &upsilon {
        if gamma.contains(g) {
            premises.push((Family::Premise, subscript(g, &root)));
        }
    }

    let mut side_parts: Vec<PropFormula> = Vec::new();

    for sigma in &omega.members {
        let level = &lv[sigma.depth()];
        let children: Vec<Sequence> = omega.children_of(sigma).into_iter().cloned().collect();

        for m in modal_gens(level) {
            let body = m.modal_body().expect("modal generator");
            let var = atom(&m, sigma);
            if m.is_box_headed() && omega.contains(&sigma.child(m.clone(), true)) {
                premises.push((Family::UnwitnessedBox, PropFormula::neg(var)));
                continue;
            }
            let witness = sigma.child(m.clone(), false);
            if m.is_box_headed() {
                let clause = if omega.contains(&witness) {
                    let w = PropFormula::imp(rel_var(sigma, &witness), subscript(body, &witness));
                    let bound = PropFormula::conj(
                        children
                            .iter()
                            .map(|c| PropFormula::imp(rel_var(sigma, c), subscript(body, c))),
                    );
                    PropFormula::strong_and(
                        PropFormula::iff(var.clone(), w),
                        PropFormula::imp(var, bound),
                    )
                } else {
                    PropFormula::iff(var, PropFormula::Top)
                };
                premises.push((Family::WitnessedBox, clause));
            } else {
                let clause = if omega.contains(&witness) {
                    let w = PropFormula::strong_and(
                        rel_var(sigma, &witness),
                        subscript(body, &witness),
                    );
                    let bound =
                        PropFormula::disj(children.iter().map(|c| {
                            PropFormula::strong_and(rel_var(sigma, c), subscript(body, c))
                        }));
                    PropFormula::strong_and(
                        PropFormula::iff(var.clone(), w),
                        PropFormula::imp(bound, var),
                    )
                } else {
                    PropFormula::iff(var, PropFormula::Bot)
                };
                premises.push((Family::WitnessedDia, clause));
            }
        }

        for m in modal_gens(level).into_iter().filter(|m| m.is_box_headed()) {
            let body = m.modal_body().expect("modal generator");
            let var = atom(&m, sigma);
            for child in &children {
                let Some((last, true)) = child.last() else {
                    continue;
                };
                if !last.is_box_headed() {
                    continue;
                }
                let value = PropFormula::imp(rel_var(sigma, child), subscript(body, child));
                let clause = PropFormula::imp(
                    PropFormula::neg(PropFormula::neg(var.clone())),
                    value.clone(),
                );
                premises.push((Family::WitnessValue, clause));
                if *last == m {
                    side_parts.push(value);
                }
            }
        }
    }

    let side = PropFormula::disj(side_parts);
    let phi0 = subscript(phi, &root);
    let goal = if side == PropFormula::Bot {
        phi0
    } else {
        PropFormula::weak_or(phi0, side.clone())
    };
    Ok(ReductionInstance {
        omega: omega.clone(),
        variables: declare_variables(omega, &lv, false, true),
        premises,
        goal,
        side_disjunct: side,
    })
}
