//! Symbolic countermodels reconstructed from counter valuations.
//!
//! A verified counter valuation for one sequence set determines an infinite
//! tree model: primed positions unravel into countably many decaying copies.
//! The model is kept symbolic, worlds are sequence entries with duplication
//! indices, and verification checks every modal generator clause-wise, using
//! decay ratios to certify the infinitary infima that a finite truncation
//! cannot reach.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pisolver::{eval_prop, verify_certificate, LogValue, SolverError, Valuation};
use crate::reduction::{build_crisp, build_valued, ReductionError, ReductionInstance};
use crate::sequences::{OmegaSet, Sequence};
use crate::syntax::{
    alpha_subscript, levels, subscript, ExtVar, Generator, ModalFormula, PropFormula,
};

#[derive(Debug, Error)]
pub enum CountermodelError {
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("truth lemma violated at {world}: {message}")]
    TruthLemma { world: String, message: String },
    #[error("the index bound must be at least one")]
    BadTruncation,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// A world of the unravelled product model: sequence entries carrying a
/// duplication index at primed positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProdWorld {
    entries: Vec<(ModalFormula, Option<usize>)>,
}

impl ProdWorld {
    pub fn root() -> Self {
        ProdWorld {
            entries: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn child_plain(&self, formula: ModalFormula) -> ProdWorld {
        let mut entries = self.entries.clone();
        entries.push((formula, None));
        ProdWorld { entries }
    }

    pub fn child_indexed(&self, formula: ModalFormula, k: usize) -> ProdWorld {
        let mut entries = self.entries.clone();
        entries.push((formula, Some(k)));
        ProdWorld { entries }
    }

    /// The fully unprimed sequence under this world.
    pub fn underline(&self) -> Sequence {
        Sequence::from_entries(
            self.entries
                .iter()
                .map(|(f, _)| (f.clone(), false))
                .collect(),
        )
    }

    /// The sequence with primes at the indexed positions.
    pub fn tilde(&self) -> Sequence {
        Sequence::from_entries(
            self.entries
                .iter()
                .map(|(f, k)| (f.clone(), k.is_some()))
                .collect(),
        )
    }

    /// Sum of all duplication indices.
    pub fn theta(&self) -> usize {
        self.entries.iter().filter_map(|(_, k)| *k).sum()
    }

    fn exponent(&self) -> usize {
        self.theta().max(1)
    }

    /// One member per indexed position: the prefix up to it kept intact,
    /// later indices stripped. Returned with the index at that position.
    pub fn init(&self) -> Vec<(ProdWorld, usize)> {
        let mut out = Vec::new();
        for (i, (_, idx)) in self.entries.iter().enumerate() {
            if let Some(k) = idx {
                let entries = self
                    .entries
                    .iter()
                    .enumerate()
                    .map(|(j, (f, ix))| (f.clone(), if j <= i { *ix } else { None }))
                    .collect();
                out.push((ProdWorld { entries }, *k));
            }
        }
        out
    }
}

impl fmt::Display for ProdWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<0")?;
        for (formula, idx) in &self.entries {
            write!(f, ", {}", formula.word_form())?;
            if let Some(k) = idx {
                write!(f, "#{k}")?;
            }
        }
        f.write_str(">")
    }
}

/// All worlds over a sequence with indices drawn from the given range.
pub fn prods(seq: &Sequence, k_min: usize, k_max: usize) -> Vec<ProdWorld> {
    let primed: Vec<usize> = seq
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(i, (_, p))| p.then_some(i))
        .collect();
    let mut out = Vec::new();
    let mut digits = vec![k_min; primed.len()];
    loop {
        let entries = seq
            .entries()
            .iter()
            .enumerate()
            .map(|(i, (f, _))| {
                let k = primed.iter().position(|p| *p == i).map(|slot| digits[slot]);
                (f.clone(), k)
            })
            .collect();
        out.push(ProdWorld { entries });
        let mut slot = 0;
        loop {
            if slot == digits.len() {
                return out;
            }
            digits[slot] += 1;
            if digits[slot] <= k_max {
                break;
            }
            digits[slot] = k_min;
            slot += 1;
        }
    }
}

/// Assignment of algebra values to generators.
pub type GenValuation = BTreeMap<Generator, LogValue>;

/// Evaluate a formula over a generator assignment.
pub fn eval_gen(f: &ModalFormula, v: &GenValuation) -> Result<LogValue, SolverError> {
    match f {
        ModalFormula::Var(p) => v
            .get(&Generator::Var(p.clone()))
            .cloned()
            .ok_or_else(|| SolverError::UnboundVariable(p.clone())),
        ModalFormula::Top => Ok(LogValue::top()),
        ModalFormula::Bot => Ok(LogValue::Zero),
        ModalFormula::WeakAnd(l, r) => Ok(eval_gen(l, v)?.and_weak(&eval_gen(r, v)?)),
        ModalFormula::WeakOr(l, r) => Ok(eval_gen(l, v)?.or_weak(&eval_gen(r, v)?)),
        ModalFormula::StrongAnd(l, r) => Ok(eval_gen(l, v)?.and_strong(&eval_gen(r, v)?)),
        ModalFormula::Imp(l, r) => Ok(eval_gen(l, v)?.imp(&eval_gen(r, v)?)),
        ModalFormula::Necc(_) | ModalFormula::Poss(_) => v
            .get(&Generator::Modal(f.clone()))
            .cloned()
            .ok_or_else(|| SolverError::UnboundVariable(f.word_form())),
    }
}

/// Pointwise strong product on the shared generators.
pub fn product_valuation(a: &GenValuation, b: &GenValuation) -> GenValuation {
    a.iter()
        .filter_map(|(g, x)| b.get(g).map(|y| (g.clone(), x.and_strong(y))))
        .collect()
}

/// Whether two assignments order the given formulas identically and vanish
/// together on them.
pub fn is_opd(
    a: &GenValuation,
    b: &GenValuation,
    formulas: &[ModalFormula],
) -> Result<bool, SolverError> {
    let mut va = Vec::new();
    let mut vb = Vec::new();
    for f in formulas {
        va.push(eval_gen(f, a)?);
        vb.push(eval_gen(f, b)?);
    }
    for i in 0..va.len() {
        if va[i].is_zero() != vb[i].is_zero() {
            return Ok(false);
        }
        for j in 0..va.len() {
            if (va[i] <= va[j]) != (vb[i] <= vb[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A certified counter valuation plus the data unravelling it into a model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolicCountermodel {
    pub crisp: bool,
    pub gamma: Vec<ModalFormula>,
    pub phi: ModalFormula,
    pub omega: OmegaSet,
    pub h: Valuation,
}

/// Check the valuation against the crisp translation and wrap it.
pub fn build_crisp_countermodel(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    omega: &OmegaSet,
    h: &Valuation,
) -> Result<SymbolicCountermodel, CountermodelError> {
    let instance = build_crisp(gamma, phi, omega)?;
    certify(&instance, gamma, phi, h, true)
}

/// Check the valuation against the valued translation and wrap it.
pub fn build_valued_countermodel(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    omega: &OmegaSet,
    h: &Valuation,
) -> Result<SymbolicCountermodel, CountermodelError> {
    let instance = build_valued(gamma, phi, omega)?;
    certify(&instance, gamma, phi, h, false)
}

fn certify(
    instance: &ReductionInstance,
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    h: &Valuation,
    crisp: bool,
) -> Result<SymbolicCountermodel, CountermodelError> {
    let mut h = h.clone();
    instance.complete_valuation(&mut h);
    if !verify_certificate(&instance.premise_formulas(), &instance.goal, &h)? {
        return Err(CountermodelError::CertificateRejected(
            "the valuation does not falsify the translated goal".into(),
        ));
    }
    Ok(SymbolicCountermodel {
        crisp,
        gamma: gamma.to_vec(),
        phi: phi.clone(),
        omega: instance.omega.clone(),
        h,
    })
}

impl SymbolicCountermodel {
    fn level_sets(&self) -> Vec<std::collections::BTreeSet<ModalFormula>> {
        let mut upsilon: std::collections::BTreeSet<ModalFormula> =
            self.gamma.iter().cloned().collect();
        upsilon.insert(self.phi.clone());
        levels(&upsilon)
    }

    /// Model value of a level formula at a world: the closed-form law on
    /// generators, the product algebra on compounds.
    pub fn world_value(
        &self,
        world: &ProdWorld,
        f: &ModalFormula,
    ) -> Result<LogValue, CountermodelError> {
        Ok(match f {
            ModalFormula::Top => LogValue::top(),
            ModalFormula::Bot => LogValue::Zero,
            ModalFormula::WeakAnd(l, r) => self
                .world_value(world, l)?
                .and_weak(&self.world_value(world, r)?),
            ModalFormula::WeakOr(l, r) => self
                .world_value(world, l)?
                .or_weak(&self.world_value(world, r)?),
            ModalFormula::StrongAnd(l, r) => self
                .world_value(world, l)?
                .and_strong(&self.world_value(world, r)?),
            ModalFormula::Imp(l, r) => self
                .world_value(world, l)?
                .imp(&self.world_value(world, r)?),
            ModalFormula::Var(_) | ModalFormula::Necc(_) | ModalFormula::Poss(_) => {
                self.law_value(world, f)?
            }
        })
    }

    fn law_value(
        &self,
        world: &ProdWorld,
        f: &ModalFormula,
    ) -> Result<LogValue, CountermodelError> {
        if self.crisp {
            let mut acc = eval_prop(&subscript(f, &world.underline()), &self.h)?;
            for (member, mult) in world.init() {
                let decay = eval_prop(&alpha_subscript(f, &member.tilde()), &self.h)?;
                acc = acc.and_strong(&decay.pow(mult));
            }
            Ok(acc)
        } else {
            let base = eval_prop(&subscript(f, &world.tilde()), &self.h)?;
            Ok(base.pow(world.exponent()))
        }
    }

    fn edge_weight(
        &self,
        parent: &ProdWorld,
        child: &ProdWorld,
    ) -> Result<LogValue, CountermodelError> {
        if self.crisp {
            return Ok(LogValue::top());
        }
        let var = ExtVar::RelVar {
            parent: parent.tilde(),
            child: child.tilde(),
        };
        let r = eval_prop(&PropFormula::EVar(var), &self.h)?;
        Ok(r.pow(child.exponent()))
    }

    /// The successor term a child contributes to a box or diamond value.
    fn child_term(
        &self,
        parent: &ProdWorld,
        child: &ProdWorld,
        body: &ModalFormula,
        boxed: bool,
    ) -> Result<LogValue, CountermodelError> {
        let value = self.world_value(child, body)?;
        let weight = self.edge_weight(parent, child)?;
        Ok(if boxed {
            weight.imp(&value)
        } else {
            weight.and_strong(&value)
        })
    }

    /// The exact per-copy decay of a family: the successor terms of the
    /// copies of a primed child form a geometric family with this ratio.
    fn family_ratio(
        &self,
        tau: &Sequence,
        body: &ModalFormula,
        boxed: bool,
    ) -> Result<LogValue, CountermodelError> {
        if self.crisp {
            Ok(eval_prop(&alpha_subscript(body, tau), &self.h)?)
        } else {
            let parent = tau.parent().expect("primed child has a parent");
            let var = ExtVar::RelVar {
                parent,
                child: tau.clone(),
            };
            let r = eval_prop(&PropFormula::EVar(var), &self.h)?;
            let v = eval_prop(&subscript(body, tau), &self.h)?;
            Ok(if boxed { r.imp(&v) } else { r.and_strong(&v) })
        }
    }

    fn first_index(&self) -> usize {
        if self.crisp {
            1
        } else {
            0
        }
    }

    /// Children of a world in the truncated unravelling.
    pub fn world_children(&self, world: &ProdWorld, k_max: usize) -> Vec<ProdWorld> {
        let sigma = world.tilde();
        let mut out = Vec::new();
        for tau in self.omega.children_of(&sigma) {
            let (f, primed) = tau.last().expect("child sequence is not empty");
            if *primed {
                for k in self.first_index()..=k_max {
                    out.push(world.child_indexed(f.clone(), k));
                }
            } else {
                out.push(world.child_plain(f.clone()));
            }
        }
        out
    }

    /// Finite unravelling with duplication indices up to the bound.
    pub fn truncate(&self, k_max: usize) -> Result<TruncatedModel, CountermodelError> {
        if k_max == 0 {
            return Err(CountermodelError::BadTruncation);
        }
        let lv = self.level_sets();
        let mut worlds = vec![ProdWorld::root()];
        let mut rel = Vec::new();
        let mut values = Vec::new();
        let mut next = 0;
        while next < worlds.len() {
            let world = worlds[next].clone();
            let d = world.depth();
            let mut assignment = BTreeMap::new();
            if d < lv.len() {
                for f in &lv[d] {
                    if let ModalFormula::Var(p) = f {
                        assignment.insert(p.clone(), self.world_value(&world, f)?);
                    }
                }
            }
            values.push(assignment);
            for child in self.world_children(&world, k_max) {
                let weight = self.edge_weight(&world, &child)?;
                rel.push((next, worlds.len(), weight));
                worlds.push(child);
            }
            next += 1;
        }
        Ok(TruncatedModel {
            crisp: self.crisp,
            worlds,
            rel,
            values,
        })
    }
}

/// Verify the truth lemma clause-wise against the closed-form values,
/// sampling each infinite family up to the index bound and certifying its
/// limit by the exact decay ratio.
pub fn verify_truth_lemma(
    cm: &SymbolicCountermodel,
    k_max: usize,
) -> Result<(), CountermodelError> {
    if k_max == 0 {
        return Err(CountermodelError::BadTruncation);
    }
    let lv = cm.level_sets();
    let fail = |world: &ProdWorld, message: String| CountermodelError::TruthLemma {
        world: world.to_string(),
        message,
    };

    let root = ProdWorld::root();
    for g in &cm.gamma {
        if !cm.world_value(&root, g)?.is_top() {
            return Err(fail(&root, format!("premise {g} does not take value one")));
        }
    }
    if cm.world_value(&root, &cm.phi)?.is_top() {
        return Err(fail(
            &root,
            format!("conclusion {} takes value one", cm.phi),
        ));
    }

    let mut queue = vec![root];
    while let Some(world) = queue.pop() {
        let d = world.depth();
        if d >= lv.len() {
            continue;
        }
        let sigma = world.tilde();
        let children: Vec<Sequence> = cm.omega.children_of(&sigma).into_iter().cloned().collect();
        for m in lv[d].iter().filter(|f| f.is_modal_headed()) {
            let body = m.modal_body().expect("modal generator");
            let boxed = m.is_box_headed();
            let expected = cm.world_value(&world, m)?;

            if children.is_empty() {
                let ok = if boxed {
                    expected.is_top()
                } else {
                    expected.is_zero()
                };
                if !ok {
                    return Err(fail(&world, format!("{m} is not trivial at a leaf")));
                }
                continue;
            }

            if boxed && cm.omega.contains(&sigma.child(m.clone(), true)) {
                if !expected.is_zero() {
                    return Err(fail(&world, format!("unwitnessed {m} is not zero")));
                }
                let tau = sigma.child(m.clone(), true);
                let ratio = cm.family_ratio(&tau, body, true)?;
                let first = cm.child_term(
                    &world,
                    &world.child_indexed(m.clone(), cm.first_index()),
                    body,
                    true,
                )?;
                if ratio.is_top() && !first.is_zero() {
                    return Err(fail(
                        &world,
                        format!("the copies of {tau} do not push {m} to zero"),
                    ));
                }
                check_family_samples(cm, &world, m, body, k_max, &ratio)?;
                continue;
            }

            let witness = world.child_plain(m.clone());
            let witness_term = cm.child_term(&world, &witness, body, boxed)?;
            if witness_term != expected {
                return Err(fail(
                    &world,
                    format!("witness value for {m} differs from the closed form"),
                ));
            }

            for tau in &children {
                let (f, primed) = tau.last().expect("child sequence is not empty");
                if *primed {
                    let ratio = cm.family_ratio(tau, body, boxed)?;
                    let first = cm.child_term(
                        &world,
                        &world.child_indexed(f.clone(), cm.first_index()),
                        body,
                        boxed,
                    )?;
                    if boxed {
                        let constant = ratio.is_top() || (!cm.crisp && first.is_top());
                        if constant {
                            if first < expected {
                                return Err(fail(&world, format!("a copy of {tau} undercuts {m}")));
                            }
                        } else if !expected.is_zero() {
                            return Err(fail(
                                &world,
                                format!("the copies of {tau} decay below {m}"),
                            ));
                        }
                    } else if first > expected {
                        return Err(fail(&world, format!("a copy of {tau} exceeds {m}")));
                    }
                    check_family_samples(cm, &world, f, body, k_max, &ratio)?;
                } else {
                    let child = world.child_plain(f.clone());
                    let term = cm.child_term(&world, &child, body, boxed)?;
                    let ok = if boxed {
                        term >= expected
                    } else {
                        term <= expected
                    };
                    if !ok {
                        return Err(fail(
                            &world,
                            format!("successor {child} breaks the bound for {m}"),
                        ));
                    }
                }
            }
        }
        queue.extend(cm.world_children(&world, k_max));
    }
    Ok(())
}

/// Cross-check the sampled copies of one family against its closed ratio.
fn check_family_samples(
    cm: &SymbolicCountermodel,
    world: &ProdWorld,
    formula: &ModalFormula,
    body: &ModalFormula,
    k_max: usize,
    ratio: &LogValue,
) -> Result<(), CountermodelError> {
    if !cm.crisp {
        return Ok(());
    }
    let mut prev: Option<LogValue> = None;
    for k in cm.first_index()..=k_max {
        let value = cm.world_value(&world.child_indexed(formula.clone(), k), body)?;
        if let Some(p) = prev {
            if value != p.and_strong(ratio) {
                return Err(CountermodelError::TruthLemma {
                    world: world.to_string(),
                    message: format!(
                        "the copies of {} under {world} are not geometric",
                        formula.word_form()
                    ),
                });
            }
        }
        prev = Some(value);
    }
    Ok(())
}

/// A finite unravelling of a symbolic countermodel.
#[derive(Clone, Debug)]
pub struct TruncatedModel {
    pub crisp: bool,
    pub worlds: Vec<ProdWorld>,
    pub rel: Vec<(usize, usize, LogValue)>,
    pub values: Vec<BTreeMap<String, LogValue>>,
}

impl fmt::Display for TruncatedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "crisp: {}", self.crisp)?;
        for (i, w) in self.worlds.iter().enumerate() {
            let mut line = String::new();
            for (p, v) in &self.values[i] {
                let _ = write!(line, " {p} = {:.6}", v.approx_unit());
            }
            writeln!(f, "world {w}:{line}")?;
        }
        for (a, b, weight) in &self.rel {
            writeln!(
                f,
                "edge {} -> {} = {:.6}",
                self.worlds[*a],
                self.worlds[*b],
                weight.approx_unit()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pisolver::{decide_p, decide_pd, PropDecision, SolverConfig};
    use crate::sequences::{enumerate_coherent, enumerate_simple};
    use crate::syntax::parse;
    use num_rational::BigRational;

    fn pos(n: i64, d: i64) -> LogValue {
        LogValue::pos(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn prod_world_machinery() {
        let a = parse("box a").unwrap();
        let b = parse("box b").unwrap();
        let nu = ProdWorld::root()
            .child_indexed(a.clone(), 2)
            .child_plain(b.clone())
            .child_indexed(a.clone(), 3);
        assert_eq!(nu.theta(), 5);
        assert_eq!(nu.to_string(), "<0, box a#2, box b, box a#3>");
        assert_eq!(nu.underline().to_string(), "<0, box a, box b, box a>");
        assert_eq!(nu.tilde().to_string(), "<0, box a', box b, box a'>");
        let init = nu.init();
        assert_eq!(init.len(), 2);
        assert_eq!(init[0].0.tilde().to_string(), "<0, box a', box b, box a>");
        assert_eq!(init[0].1, 2);
        assert_eq!(init[1].0.tilde().to_string(), "<0, box a', box b, box a'>");
        assert_eq!(init[1].1, 3);

        let seq = crate::sequences::parse_sequence("<0, box a', box b, box a'>").unwrap();
        assert_eq!(prods(&seq, 1, 3).len(), 9);
        assert_eq!(prods(&seq.underline(), 1, 3).len(), 1);
    }

    fn crisp_counter(
        gamma: &[&str],
        phi: &str,
        pick: impl Fn(&OmegaSet) -> bool,
    ) -> SymbolicCountermodel {
        let gamma: Vec<ModalFormula> = gamma.iter().map(|s| parse(s).unwrap()).collect();
        let phi = parse(phi).unwrap();
        let mut upsilon: std::collections::BTreeSet<ModalFormula> = gamma.iter().cloned().collect();
        upsilon.insert(phi.clone());
        let omegas = enumerate_coherent(&levels(&upsilon), 10_000).unwrap();
        let omega = omegas.iter().find(|o| pick(o)).expect("requested set");
        let inst = build_crisp(&gamma, &phi, omega).unwrap();
        let decision = decide_pd(
            &inst.premise_formulas(),
            &inst.goal,
            &SolverConfig::default(),
        )
        .unwrap();
        let PropDecision::Counter(h) = decision else {
            panic!("expected a counter valuation");
        };
        build_crisp_countermodel(&gamma, &phi, omega, &h).unwrap()
    }

    #[test]
    fn witnessed_countermodel_verifies() {
        let cm = crisp_counter(&[], "box p", |o| {
            o.len() == 2 && o.members.iter().all(|s| s.is_prime_free())
        });
        for k in [1, 2, 4] {
            verify_truth_lemma(&cm, k).unwrap();
        }
        let boxed = parse("box p").unwrap();
        let value = cm.world_value(&ProdWorld::root(), &boxed).unwrap();
        assert!(!value.is_top());
        let t = cm.truncate(3).unwrap();
        assert_eq!(t.worlds.len(), 2);
        assert_eq!(t.rel.len(), 1);
    }

    #[test]
    fn unwitnessed_countermodel_verifies() {
        let cm = crisp_counter(&[], "box p", |o| {
            o.members.iter().any(|s| !s.is_prime_free())
        });
        for k in [1, 2, 4] {
            verify_truth_lemma(&cm, k).unwrap();
        }
        let boxed = parse("box p").unwrap();
        assert!(cm
            .world_value(&ProdWorld::root(), &boxed)
            .unwrap()
            .is_zero());
        let t = cm.truncate(2).unwrap();
        assert_eq!(t.worlds.len(), 4);
        let shown = t.to_string();
        assert!(shown.contains("world <0, box p#2>"));
        assert!(shown.contains("edge <0> -> <0, box p> = 1.000000"));
    }

    #[test]
    fn premise_countermodel_verifies() {
        let cm = crisp_counter(&["box p"], "p", |o| o.len() == 1);
        verify_truth_lemma(&cm, 2).unwrap();
        let p = parse("p").unwrap();
        let boxed = parse("box p").unwrap();
        assert!(cm.world_value(&ProdWorld::root(), &boxed).unwrap().is_top());
        assert!(!cm.world_value(&ProdWorld::root(), &p).unwrap().is_top());
    }

    #[test]
    fn valued_countermodel_verifies() {
        let phi = parse("box p").unwrap();
        let upsilon: std::collections::BTreeSet<ModalFormula> = [phi.clone()].into();
        let omegas = enumerate_simple(&levels(&upsilon), 10_000).unwrap();
        for omega in &omegas {
            let inst = build_valued(&[], &phi, omega).unwrap();
            let decision = decide_p(
                &inst.premise_formulas(),
                &inst.goal,
                &SolverConfig::default(),
            )
            .unwrap();
            let PropDecision::Counter(h) = decision else {
                continue;
            };
            let cm = build_valued_countermodel(&[], &phi, omega, &h).unwrap();
            assert!(!cm.crisp);
            for k in [1, 3] {
                verify_truth_lemma(&cm, k).unwrap();
            }
        }
    }

    #[test]
    fn corrupted_valuations_are_caught() {
        let cm = crisp_counter(&[], "box p", |o| {
            o.members.iter().any(|s| !s.is_prime_free())
        });

        let mut broken = cm.clone();
        let alpha = ExtVar::Alpha {
            seq: crate::sequences::parse_sequence("<0, box p'>").unwrap(),
            gen: Generator::Var("p".into()),
        };
        assert!(broken.h.get(&alpha).is_some());
        broken.h.set(alpha, LogValue::top());
        assert!(matches!(
            verify_truth_lemma(&broken, 2),
            Err(CountermodelError::TruthLemma { .. })
        ));

        let mut rejected = cm.h.clone();
        rejected.set(
            ExtVar::ModalAtom {
                formula: parse("box p").unwrap(),
                seq: Sequence::root(),
            },
            LogValue::top(),
        );
        let phi = parse("box p").unwrap();
        assert!(matches!(
            build_crisp_countermodel(&[], &phi, &cm.omega, &rejected),
            Err(CountermodelError::CertificateRejected(_))
        ));
    }

    #[test]
    fn opd_pairs_multiply() {
        let mut f = GenValuation::new();
        f.insert(Generator::Var("a".into()), pos(1, 1));
        f.insert(Generator::Var("b".into()), pos(3, 1));
        f.insert(Generator::Modal(parse("box a").unwrap()), pos(2, 1));
        let c = BigRational::new(2.into(), 3.into());
        let g: GenValuation = f
            .iter()
            .map(|(k, v)| (k.clone(), v.pow_rational(&c)))
            .collect();
        let formulas: Vec<ModalFormula> = [
            "a",
            "b",
            "a & b",
            "a /\\ b",
            "a \\/ box a",
            "a -> b",
            "b -> a",
            "(a -> b) & box a",
        ]
        .iter()
        .map(|s| parse(s).unwrap())
        .collect();
        assert!(is_opd(&f, &g, &formulas).unwrap());
        let fg = product_valuation(&f, &g);
        assert!(is_opd(&f, &fg, &formulas).unwrap());
        for formula in &formulas {
            let left = eval_gen(formula, &fg).unwrap();
            let right = eval_gen(formula, &f)
                .unwrap()
                .and_strong(&eval_gen(formula, &g).unwrap());
            assert_eq!(left, right, "law fails for {formula}");
        }
    }

    #[test]
    fn crossed_orders_are_not_opd() {
        let mut f = GenValuation::new();
        f.insert(Generator::Var("a".into()), pos(1, 1));
        f.insert(Generator::Var("b".into()), pos(2, 1));
        let mut g = GenValuation::new();
        g.insert(Generator::Var("a".into()), pos(2, 1));
        g.insert(Generator::Var("b".into()), pos(1, 1));
        let formulas = vec![parse("a").unwrap(), parse("b").unwrap()];
        assert!(!is_opd(&f, &g, &formulas).unwrap());
        let fg = product_valuation(&f, &g);
        let min = parse("a /\\ b").unwrap();
        let left = eval_gen(&min, &fg).unwrap();
        let right = eval_gen(&min, &f)
            .unwrap()
            .and_strong(&eval_gen(&min, &g).unwrap());
        assert_ne!(left, right);
    }
}
