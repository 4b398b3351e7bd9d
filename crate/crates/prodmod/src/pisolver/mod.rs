//! Consequence checking for propositional product logic with Delta over the
//! standard algebra.
//!
//! The entailment question is folded into a single formula whose failure
//! describes a counter valuation. A backtracking search assigns each
//! subformula a zero flag, a top flag and, where needed, a comparison
//! between siblings; each fully decided branch compiles to a linear system
//! over value exponents whose feasibility is settled exactly. Witness
//! assignments are re-evaluated against the original input before they are
//! reported.

mod logvalue;
mod lra;
mod smt;

pub use logvalue::{LogValue, Valuation};
pub use lra::{fourier_motzkin_feasible, lra_feasible, Cmp, Constraint, LinearConstraintSystem};
pub use smt::export_smtlib;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero as _;
use thiserror::Error;

use crate::syntax::{ExtVar, PropFormula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("resource limit reached: {0}")]
    ResourceLimit(String),
    #[error("delta occurs in plain product input")]
    DeltaInInput,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// Search budget for one propositional query.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub branch_limit: u64,
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            branch_limit: 1_000_000,
            deadline: None,
        }
    }
}

/// Outcome of a propositional consequence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropDecision {
    Entailed,
    Counter(Valuation),
}

/// Evaluate a formula under a valuation.
pub fn eval_prop(f: &PropFormula, v: &Valuation) -> Result<LogValue, SolverError> {
    match f {
        PropFormula::EVar(x) => v
            .get(x)
            .cloned()
            .ok_or_else(|| SolverError::UnboundVariable(x.to_string())),
        PropFormula::Top => Ok(LogValue::top()),
        PropFormula::Bot => Ok(LogValue::Zero),
        PropFormula::WeakAnd(l, r) => Ok(eval_prop(l, v)?.and_weak(&eval_prop(r, v)?)),
        PropFormula::WeakOr(l, r) => Ok(eval_prop(l, v)?.or_weak(&eval_prop(r, v)?)),
        PropFormula::StrongAnd(l, r) => Ok(eval_prop(l, v)?.and_strong(&eval_prop(r, v)?)),
        PropFormula::Imp(l, r) => Ok(eval_prop(l, v)?.imp(&eval_prop(r, v)?)),
        PropFormula::Delta(b) => Ok(eval_prop(b, v)?.delta()),
    }
}

/// True when the valuation makes every premise one and the goal less than
/// one.
pub fn verify_certificate(
    premises: &[PropFormula],
    goal: &PropFormula,
    v: &Valuation,
) -> Result<bool, SolverError> {
    for p in premises {
        if !eval_prop(p, v)?.is_top() {
            return Ok(false);
        }
    }
    Ok(!eval_prop(goal, v)?.is_top())
}

/// Local consequence in product logic with Delta.
pub fn decide_pd(
    premises: &[PropFormula],
    goal: &PropFormula,
    cfg: &SolverConfig,
) -> Result<PropDecision, SolverError> {
    let mut sorted: Vec<PropFormula> = premises.to_vec();
    sorted.sort_by_key(|p| p.to_string());
    sorted.dedup();

    let mut dag = Dag::default();
    let goal_id = dag.add(goal);
    let mut root = goal_id;
    for p in sorted.iter().rev() {
        let pid = dag.add(p);
        let delta = dag.intern(Op::Delta(pid));
        root = dag.intern(Op::Imp(delta, root));
    }

    let mut search = Search {
        dag: &dag,
        cfg,
        branches: 0,
        premises: &sorted,
        goal,
    };
    let mut st = State::new(dag.ops.len());
    let mut queue = VecDeque::new();
    search.demand(&mut st, &mut queue, root);
    if search.set_t(&mut st, &mut queue, root, TF::Not).is_err()
        || search.propagate(&mut st, &mut queue).is_err()
    {
        return Ok(PropDecision::Entailed);
    }
    match search.solve(st)? {
        Some(v) => Ok(PropDecision::Counter(v)),
        None => Ok(PropDecision::Entailed),
    }
}

/// Local consequence in plain product logic; the input must be Delta free.
pub fn decide_p(
    premises: &[PropFormula],
    goal: &PropFormula,
    cfg: &SolverConfig,
) -> Result<PropDecision, SolverError> {
    if premises.iter().any(|p| p.contains_delta()) || goal.contains_delta() {
        return Err(SolverError::DeltaInInput);
    }
    decide_pd(premises, goal, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Op {
    Var(u32),
    Top,
    Bot,
    SAnd(u32, u32),
    WAnd(u32, u32),
    WOr(u32, u32),
    Imp(u32, u32),
    Delta(u32),
}

impl Op {
    fn children(self) -> [Option<u32>; 2] {
        match self {
            Op::Var(_) | Op::Top | Op::Bot => [None, None],
            Op::Delta(a) => [Some(a), None],
            Op::SAnd(l, r) | Op::WAnd(l, r) | Op::WOr(l, r) | Op::Imp(l, r) => [Some(l), Some(r)],
        }
    }
}

#[derive(Default)]
pub(crate) struct Dag {
    pub(crate) ops: Vec<Op>,
    memo: HashMap<Op, u32>,
    pub(crate) vars: Vec<ExtVar>,
    var_ids: BTreeMap<ExtVar, u32>,
    parents: Vec<Vec<u32>>,
}

impl Dag {
    pub(crate) fn intern(&mut self, op: Op) -> u32 {
        if let Some(&id) = self.memo.get(&op) {
            return id;
        }
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.parents.push(Vec::new());
        for c in op.children().into_iter().flatten() {
            self.parents[c as usize].push(id);
        }
        self.memo.insert(op, id);
        id
    }

    fn var(&mut self, x: &ExtVar) -> u32 {
        if let Some(&id) = self.var_ids.get(x) {
            return id;
        }
        let vi = self.vars.len() as u32;
        self.vars.push(x.clone());
        let id = self.intern(Op::Var(vi));
        self.var_ids.insert(x.clone(), id);
        id
    }

    pub(crate) fn add(&mut self, f: &PropFormula) -> u32 {
        match f {
            PropFormula::EVar(x) => self.var(x),
            PropFormula::Top => self.intern(Op::Top),
            PropFormula::Bot => self.intern(Op::Bot),
            PropFormula::WeakAnd(l, r) => {
                let (a, b) = (self.add(l), self.add(r));
                self.intern(Op::WAnd(a, b))
            }
            PropFormula::WeakOr(l, r) => {
                let (a, b) = (self.add(l), self.add(r));
                self.intern(Op::WOr(a, b))
            }
            PropFormula::StrongAnd(l, r) => {
                let (a, b) = (self.add(l), self.add(r));
                self.intern(Op::SAnd(a, b))
            }
            PropFormula::Imp(l, r) => {
                let (a, b) = (self.add(l), self.add(r));
                self.intern(Op::Imp(a, b))
            }
            PropFormula::Delta(b) => {
                let a = self.add(b);
                self.intern(Op::Delta(a))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ZF {
    U,
    Zero,
    Pos,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum TF {
    U,
    Top,
    Not,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum AF {
    U,
    L,
    R,
}

#[derive(Clone)]
struct State {
    z: Vec<ZF>,
    t: Vec<TF>,
    attn: Vec<AF>,
    demanded: Vec<bool>,
}

impl State {
    fn new(n: usize) -> Self {
        State {
            z: vec![ZF::U; n],
            t: vec![TF::U; n],
            attn: vec![AF::U; n],
            demanded: vec![false; n],
        }
    }
}

struct Clash;

#[derive(Clone, Copy, Debug)]
enum Branch {
    VarZ(u32),
    NodeT(u32),
    Attn(u32),
}

struct Search<'a> {
    dag: &'a Dag,
    cfg: &'a SolverConfig,
    branches: u64,
    premises: &'a [PropFormula],
    goal: &'a PropFormula,
}

impl<'a> Search<'a> {
    fn demand(&self, st: &mut State, q: &mut VecDeque<u32>, n: u32) {
        if !st.demanded[n as usize] {
            st.demanded[n as usize] = true;
            q.push_back(n);
        }
    }

    fn set_z(&self, st: &mut State, q: &mut VecDeque<u32>, n: u32, v: ZF) -> Result<(), Clash> {
        let cur = st.z[n as usize];
        if cur == v {
            return Ok(());
        }
        if cur != ZF::U {
            return Err(Clash);
        }
        st.z[n as usize] = v;
        q.push_back(n);
        for &p in &self.dag.parents[n as usize] {
            q.push_back(p);
        }
        if v == ZF::Zero {
            self.set_t(st, q, n, TF::Not)?;
        }
        Ok(())
    }

    fn set_t(&self, st: &mut State, q: &mut VecDeque<u32>, n: u32, v: TF) -> Result<(), Clash> {
        let cur = st.t[n as usize];
        if cur == v {
            return Ok(());
        }
        if cur != TF::U {
            return Err(Clash);
        }
        st.t[n as usize] = v;
        q.push_back(n);
        for &p in &self.dag.parents[n as usize] {
            q.push_back(p);
        }
        if v == TF::Top {
            self.set_z(st, q, n, ZF::Pos)?;
        }
        Ok(())
    }

    fn propagate(&self, st: &mut State, q: &mut VecDeque<u32>) -> Result<(), Clash> {
        while let Some(n) = q.pop_front() {
            self.step(st, q, n)?;
        }
        Ok(())
    }

    fn step(&self, st: &mut State, q: &mut VecDeque<u32>, n: u32) -> Result<(), Clash> {
        let op = self.dag.ops[n as usize];
        let i = n as usize;

        if st.demanded[i] {
            match op {
                Op::Delta(a) => self.demand(st, q, a),
                Op::SAnd(l, r) | Op::WAnd(l, r) => {
                    let lz = st.z[l as usize] == ZF::Zero;
                    let rz = st.z[r as usize] == ZF::Zero;
                    if st.z[i] == ZF::Zero && (lz || rz) {
                        if lz {
                            self.demand(st, q, l);
                        }
                        if rz {
                            self.demand(st, q, r);
                        }
                    } else {
                        self.demand(st, q, l);
                        self.demand(st, q, r);
                    }
                }
                Op::WOr(l, r) => {
                    self.demand(st, q, l);
                    self.demand(st, q, r);
                }
                Op::Imp(l, r) => {
                    self.demand(st, q, l);
                    if st.z[l as usize] != ZF::Zero {
                        self.demand(st, q, r);
                    }
                }
                _ => {}
            }
        }

        match op {
            Op::Var(_) => {}
            Op::Top => {
                self.set_t(st, q, n, TF::Top)?;
            }
            Op::Bot => {
                self.set_z(st, q, n, ZF::Zero)?;
            }
            Op::Delta(a) => {
                if st.t[a as usize] == TF::Top {
                    self.set_t(st, q, n, TF::Top)?;
                }
                if st.t[a as usize] == TF::Not {
                    self.set_z(st, q, n, ZF::Zero)?;
                }
                if st.z[i] == ZF::Pos || st.t[i] == TF::Top {
                    self.set_t(st, q, n, TF::Top)?;
                    self.set_t(st, q, a, TF::Top)?;
                }
                if st.z[i] == ZF::Zero || st.t[i] == TF::Not {
                    self.set_z(st, q, n, ZF::Zero)?;
                    self.set_t(st, q, a, TF::Not)?;
                }
            }
            Op::SAnd(l, r) | Op::WAnd(l, r) => {
                if st.z[l as usize] == ZF::Zero || st.z[r as usize] == ZF::Zero {
                    self.set_z(st, q, n, ZF::Zero)?;
                }
                if st.z[l as usize] == ZF::Pos && st.z[r as usize] == ZF::Pos {
                    self.set_z(st, q, n, ZF::Pos)?;
                }
                if st.z[i] == ZF::Zero && st.z[l as usize] == ZF::Pos {
                    self.set_z(st, q, r, ZF::Zero)?;
                }
                if st.z[i] == ZF::Zero && st.z[r as usize] == ZF::Pos {
                    self.set_z(st, q, l, ZF::Zero)?;
                }
                if st.z[i] == ZF::Pos {
                    self.set_z(st, q, l, ZF::Pos)?;
                    self.set_z(st, q, r, ZF::Pos)?;
                }
                if st.t[l as usize] == TF::Top && st.t[r as usize] == TF::Top {
                    self.set_t(st, q, n, TF::Top)?;
                }
                if st.t[l as usize] == TF::Not || st.t[r as usize] == TF::Not {
                    self.set_t(st, q, n, TF::Not)?;
                }
                if st.t[i] == TF::Top {
                    self.set_t(st, q, l, TF::Top)?;
                    self.set_t(st, q, r, TF::Top)?;
                }
                if st.t[i] == TF::Not && st.t[l as usize] == TF::Top {
                    self.set_t(st, q, r, TF::Not)?;
                }
                if st.t[i] == TF::Not && st.t[r as usize] == TF::Top {
                    self.set_t(st, q, l, TF::Not)?;
                }
            }
            Op::WOr(l, r) => {
                if st.z[l as usize] == ZF::Zero && st.z[r as usize] == ZF::Zero {
                    self.set_z(st, q, n, ZF::Zero)?;
                }
                if st.z[l as usize] == ZF::Pos || st.z[r as usize] == ZF::Pos {
                    self.set_z(st, q, n, ZF::Pos)?;
                }
                if st.z[i] == ZF::Zero {
                    self.set_z(st, q, l, ZF::Zero)?;
                    self.set_z(st, q, r, ZF::Zero)?;
                }
                if st.z[i] == ZF::Pos && st.z[l as usize] == ZF::Zero {
                    self.set_z(st, q, r, ZF::Pos)?;
                }
                if st.z[i] == ZF::Pos && st.z[r as usize] == ZF::Zero {
                    self.set_z(st, q, l, ZF::Pos)?;
                }
                if st.t[l as usize] == TF::Top || st.t[r as usize] == TF::Top {
                    self.set_t(st, q, n, TF::Top)?;
                }
                if st.t[l as usize] == TF::Not && st.t[r as usize] == TF::Not {
                    self.set_t(st, q, n, TF::Not)?;
                }
                if st.t[i] == TF::Not {
                    self.set_t(st, q, l, TF::Not)?;
                    self.set_t(st, q, r, TF::Not)?;
                }
                if st.t[i] == TF::Top && st.t[l as usize] == TF::Not {
                    self.set_t(st, q, r, TF::Top)?;
                }
                if st.t[i] == TF::Top && st.t[r as usize] == TF::Not {
                    self.set_t(st, q, l, TF::Top)?;
                }
            }
            Op::Imp(l, r) => {
                if st.z[l as usize] == ZF::Zero {
                    self.set_t(st, q, n, TF::Top)?;
                }
                if st.z[r as usize] == ZF::Pos {
                    self.set_z(st, q, n, ZF::Pos)?;
                }
                if st.z[l as usize] == ZF::Pos && st.z[r as usize] == ZF::Zero {
                    self.set_z(st, q, n, ZF::Zero)?;
                }
                if st.z[i] == ZF::Zero {
                    self.set_z(st, q, l, ZF::Pos)?;
                    self.set_z(st, q, r, ZF::Zero)?;
                }
                if st.t[r as usize] == TF::Top {
                    self.set_t(st, q, n, TF::Top)?;
                }
                if st.t[l as usize] == TF::Top && st.t[r as usize] == TF::Not {
                    self.set_t(st, q, n, TF::Not)?;
                }
                if st.t[i] == TF::Top && st.z[r as usize] == ZF::Zero {
                    self.set_z(st, q, l, ZF::Zero)?;
                }
                if st.t[i] == TF::Top && st.t[l as usize] == TF::Top {
                    self.set_t(st, q, r, TF::Top)?;
                }
                if st.t[i] == TF::Top && st.z[l as usize] == ZF::Pos {
                    self.set_z(st, q, r, ZF::Pos)?;
                }
                if st.t[i] == TF::Not {
                    self.set_z(st, q, l, ZF::Pos)?;
                    self.set_t(st, q, r, TF::Not)?;
                }
            }
        }
        Ok(())
    }

    fn find_decision(&self, st: &State) -> Option<Branch> {
        for (i, op) in self.dag.ops.iter().enumerate() {
            if !st.demanded[i] {
                continue;
            }
            match *op {
                Op::Var(_) if st.z[i] == ZF::U => return Some(Branch::VarZ(i as u32)),
                Op::Delta(a) if st.z[a as usize] == ZF::Pos && st.t[a as usize] == TF::U => {
                    return Some(Branch::NodeT(a))
                }
                Op::Imp(l, r)
                    if st.z[l as usize] == ZF::Pos
                        && st.z[r as usize] == ZF::Pos
                        && st.t[i] == TF::U =>
                {
                    return Some(Branch::NodeT(i as u32))
                }
                Op::WAnd(l, r) | Op::WOr(l, r)
                    if st.z[l as usize] == ZF::Pos
                        && st.z[r as usize] == ZF::Pos
                        && st.attn[i] == AF::U =>
                {
                    return Some(Branch::Attn(i as u32))
                }
                _ => {}
            }
        }
        None
    }

    fn solve(&mut self, st: State) -> Result<Option<Valuation>, SolverError> {
        let Some(branch) = self.find_decision(&st) else {
            return self.try_leaf(&st);
        };
        self.branches += 1;
        if self.branches > self.cfg.branch_limit {
            return Err(SolverError::ResourceLimit(format!(
                "more than {} case splits",
                self.cfg.branch_limit
            )));
        }
        if let Some(deadline) = self.cfg.deadline {
            if Instant::now() >= deadline {
                return Err(SolverError::ResourceLimit("time budget exhausted".into()));
            }
        }
        for alt in [0, 1] {
            let mut next = st.clone();
            let mut q = VecDeque::new();
            let ok = match branch {
                Branch::VarZ(n) => self
                    .set_z(
                        &mut next,
                        &mut q,
                        n,
                        if alt == 0 { ZF::Pos } else { ZF::Zero },
                    )
                    .is_ok(),
                Branch::NodeT(n) => self
                    .set_t(
                        &mut next,
                        &mut q,
                        n,
                        if alt == 0 { TF::Top } else { TF::Not },
                    )
                    .is_ok(),
                Branch::Attn(n) => {
                    next.attn[n as usize] = if alt == 0 { AF::L } else { AF::R };
                    true
                }
            };
            if ok && self.propagate(&mut next, &mut q).is_ok() {
                if let Some(v) = self.solve(next)? {
                    return Ok(Some(v));
                }
            }
        }
        Ok(None)
    }

    fn try_leaf(&self, st: &State) -> Result<Option<Valuation>, SolverError> {
        let n = self.dag.ops.len();
        let mut coords: Vec<Option<Coord>> = vec![None; n];
        let mut unknowns: HashMap<u32, usize> = HashMap::new();
        let mut rows: Vec<(Vec<(usize, BigRational)>, Cmp)> = Vec::new();

        for i in 0..n {
            if !st.demanded[i] {
                continue;
            }
            let coord = self.node_coord(st, i, &coords, &mut unknowns, &mut rows)?;
            match st.t[i] {
                TF::Top => {
                    if let Coord::Aff(e) = &coord {
                        if !e.terms.is_empty() {
                            rows.push((e.rows(1), Cmp::Eq));
                        }
                    }
                }
                TF::Not => {
                    if st.z[i] == ZF::Pos {
                        if let Coord::Aff(e) = &coord {
                            rows.push((e.rows(-1), Cmp::Lt));
                        }
                    }
                }
                TF::U => {}
            }
            coords[i] = Some(coord);
        }

        let mut sys = LinearConstraintSystem::new(unknowns.len());
        for (coeffs, cmp) in rows {
            sys.add(coeffs, cmp, BigRational::zero());
        }
        let Some(assignment) = lra_feasible(&sys) else {
            return Ok(None);
        };

        let mut valuation = Valuation::new();
        for (x, &id) in &self.dag.var_ids {
            let value = if !st.demanded[id as usize] {
                LogValue::top()
            } else {
                match st.z[id as usize] {
                    ZF::Zero => LogValue::Zero,
                    ZF::Pos => {
                        let u = unknowns[&id];
                        LogValue::pos(assignment[u].clone())
                    }
                    ZF::U => {
                        return Err(SolverError::Internal("undecided variable at leaf".into()))
                    }
                }
            };
            valuation.set(x.clone(), value);
        }
        if !verify_certificate(self.premises, self.goal, &valuation)? {
            return Err(SolverError::Internal(
                "candidate valuation failed verification".into(),
            ));
        }
        Ok(Some(valuation))
    }

    fn node_coord(
        &self,
        st: &State,
        i: usize,
        coords: &[Option<Coord>],
        unknowns: &mut HashMap<u32, usize>,
        rows: &mut Vec<(Vec<(usize, BigRational)>, Cmp)>,
    ) -> Result<Coord, SolverError> {
        let aff = |coords: &[Option<Coord>], c: u32| -> Result<Aff, SolverError> {
            match &coords[c as usize] {
                Some(Coord::Aff(e)) => Ok(e.clone()),
                _ => Err(SolverError::Internal("missing child coordinate".into())),
            }
        };
        let op = self.dag.ops[i];
        let coord = match op {
            Op::Var(_) => match st.z[i] {
                ZF::Zero => Coord::Zero,
                ZF::Pos => {
                    let next = unknowns.len();
                    let u = *unknowns.entry(i as u32).or_insert(next);
                    rows.push((vec![(u, BigRational::from_integer((-1).into()))], Cmp::Le));
                    Coord::Aff(Aff::unknown(u))
                }
                ZF::U => return Err(SolverError::Internal("undecided variable".into())),
            },
            Op::Top => Coord::Aff(Aff::zero()),
            Op::Bot => Coord::Zero,
            Op::Delta(a) => match st.t[a as usize] {
                TF::Top => Coord::Aff(Aff::zero()),
                TF::Not => Coord::Zero,
                TF::U => return Err(SolverError::Internal("undecided delta argument".into())),
            },
            Op::SAnd(l, r) => match st.z[i] {
                ZF::Zero => Coord::Zero,
                ZF::Pos => Coord::Aff(aff(coords, l)?.add(&aff(coords, r)?)),
                ZF::U => return Err(SolverError::Internal("undecided conjunction".into())),
            },
            Op::WAnd(l, r) => match st.z[i] {
                ZF::Zero => Coord::Zero,
                ZF::Pos => {
                    let (el, er) = (aff(coords, l)?, aff(coords, r)?);
                    match st.attn[i] {
                        AF::L => {
                            rows.push((er.sub(&el).rows(1), Cmp::Le));
                            Coord::Aff(el)
                        }
                        AF::R => {
                            rows.push((el.sub(&er).rows(1), Cmp::Le));
                            Coord::Aff(er)
                        }
                        AF::U => return Err(SolverError::Internal("undecided minimum".into())),
                    }
                }
                ZF::U => return Err(SolverError::Internal("undecided minimum".into())),
            },
            Op::WOr(l, r) => match st.z[i] {
                ZF::Zero => Coord::Zero,
                ZF::Pos => {
                    if st.z[l as usize] == ZF::Zero {
                        Coord::Aff(aff(coords, r)?)
                    } else if st.z[r as usize] == ZF::Zero {
                        Coord::Aff(aff(coords, l)?)
                    } else {
                        let (el, er) = (aff(coords, l)?, aff(coords, r)?);
                        match st.attn[i] {
                            AF::L => {
                                rows.push((el.sub(&er).rows(1), Cmp::Le));
                                Coord::Aff(el)
                            }
                            AF::R => {
                                rows.push((er.sub(&el).rows(1), Cmp::Le));
                                Coord::Aff(er)
                            }
                            AF::U => return Err(SolverError::Internal("undecided maximum".into())),
                        }
                    }
                }
                ZF::U => return Err(SolverError::Internal("undecided maximum".into())),
            },
            Op::Imp(l, r) => {
                if st.z[l as usize] == ZF::Zero {
                    Coord::Aff(Aff::zero())
                } else if st.z[r as usize] == ZF::Zero {
                    Coord::Zero
                } else {
                    let (el, er) = (aff(coords, l)?, aff(coords, r)?);
                    match st.t[i] {
                        TF::Top => {
                            rows.push((er.sub(&el).rows(1), Cmp::Le));
                            Coord::Aff(Aff::zero())
                        }
                        TF::Not => {
                            rows.push((el.sub(&er).rows(1), Cmp::Lt));
                            Coord::Aff(er.sub(&el))
                        }
                        TF::U => return Err(SolverError::Internal("undecided implication".into())),
                    }
                }
            }
        };
        Ok(coord)
    }
}

#[derive(Clone)]
enum Coord {
    Zero,
    Aff(Aff),
}

#[derive(Clone, Default)]
struct Aff {
    terms: BTreeMap<usize, BigRational>,
}

impl Aff {
    fn zero() -> Self {
        Aff::default()
    }

    fn unknown(u: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(u, BigRational::from_integer(1.into()));
        Aff { terms }
    }

    fn add(&self, other: &Aff) -> Aff {
        let mut terms = self.terms.clone();
        for (u, c) in &other.terms {
            let sum = terms.get(u).map(|x| x + c).unwrap_or_else(|| c.clone());
            if sum.is_zero() {
                terms.remove(u);
            } else {
                terms.insert(*u, sum);
            }
        }
        Aff { terms }
    }

    fn sub(&self, other: &Aff) -> Aff {
        let mut terms = self.terms.clone();
        for (u, c) in &other.terms {
            let sum = terms.get(u).map(|x| x - c).unwrap_or_else(|| -c);
            if sum.is_zero() {
                terms.remove(u);
            } else {
                terms.insert(*u, sum);
            }
        }
        Aff { terms }
    }

    /// Rows for the constraint builder: the expression scaled by the sign.
    fn rows(&self, sign: i64) -> Vec<(usize, BigRational)> {
        let s = BigRational::from_integer(sign.into());
        self.terms.iter().map(|(u, c)| (*u, c * &s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_prop;

    fn prop(text: &str) -> PropFormula {
        parse_prop(text).unwrap()
    }

    fn var(name: &str) -> ExtVar {
        use crate::sequences::Sequence;
        ExtVar::BaseVar {
            name: name.into(),
            seq: Sequence::root(),
        }
    }

    fn decide(premises: &[&str], goal: &str) -> PropDecision {
        let ps: Vec<PropFormula> = premises.iter().map(|p| prop(p)).collect();
        decide_pd(&ps, &prop(goal), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let mut v = Valuation::new();
        v.set(var("p"), LogValue::pos(BigRational::from_integer(1.into())));
        v.set(var("q"), LogValue::Zero);
        let half = LogValue::pos(BigRational::from_integer(1.into()));
        assert_eq!(
            eval_prop(&prop("p & p"), &v).unwrap().to_string(),
            "exp2(-2)"
        );
        assert_eq!(eval_prop(&prop("p -> q"), &v).unwrap(), LogValue::Zero);
        assert_eq!(eval_prop(&prop("q -> p"), &v).unwrap(), LogValue::top());
        assert_eq!(eval_prop(&prop("p \\/ q"), &v).unwrap(), half);
        assert_eq!(eval_prop(&prop("! p"), &v).unwrap(), LogValue::Zero);
        assert_eq!(eval_prop(&prop("! (p -> p)"), &v).unwrap(), LogValue::top());
        assert!(matches!(
            eval_prop(&prop("r"), &v),
            Err(SolverError::UnboundVariable(_))
        ));
    }

    #[test]
    fn tautologies_are_entailed() {
        assert_eq!(decide(&[], "~(p /\\ ~p)"), PropDecision::Entailed);
        assert_eq!(decide(&[], "! p -> p"), PropDecision::Entailed);
        assert_eq!(decide(&[], "p -> p"), PropDecision::Entailed);
        assert_eq!(decide(&[], "(p -> q) \\/ (q -> p)"), PropDecision::Entailed);
        assert_eq!(
            decide(&[], "((a & b) -> c) <-> (a -> (b -> c))"),
            PropDecision::Entailed
        );
        assert_eq!(
            decide(&[], "(a /\\ b) <-> (a & (a -> b))"),
            PropDecision::Entailed
        );
        assert_eq!(
            decide(&[], "~~c -> (((a & c) -> (b & c)) -> (a -> b))"),
            PropDecision::Entailed
        );
        assert_eq!(decide(&[], "(a /\\ ~a) <-> 0"), PropDecision::Entailed);
    }

    #[test]
    fn excluded_middle_fails_with_witness() {
        let goal = prop("p \\/ ~p");
        match decide_pd(&[], &goal, &SolverConfig::default()).unwrap() {
            PropDecision::Counter(v) => {
                assert!(verify_certificate(&[], &goal, &v).unwrap());
                let p = v.get(&var("p")).unwrap();
                assert!(!p.is_top() && !p.is_zero());
            }
            other => panic!("expected a counter valuation, got {other:?}"),
        }
    }

    #[test]
    fn idempotence_fails() {
        let goal = prop("p <-> (p & p)");
        match decide_pd(&[], &goal, &SolverConfig::default()).unwrap() {
            PropDecision::Counter(v) => {
                assert!(verify_certificate(&[], &goal, &v).unwrap());
            }
            other => panic!("expected a counter valuation, got {other:?}"),
        }
    }

    #[test]
    fn premises_constrain_goals() {
        assert_eq!(decide(&["p"], "p & p"), PropDecision::Entailed);
        assert_eq!(decide(&["p -> q", "p"], "q"), PropDecision::Entailed);
        assert!(matches!(
            decide(&["p -> q"], "q -> p"),
            PropDecision::Counter(_)
        ));
        assert!(matches!(
            decide(&["p \\/ q"], "p"),
            PropDecision::Counter(_)
        ));
        assert_eq!(decide(&["p /\\ q"], "p"), PropDecision::Entailed);
    }

    #[test]
    fn delta_deduction_examples() {
        assert_eq!(decide(&["p"], "! p"), PropDecision::Entailed);
        assert_eq!(decide(&["! p -> q", "p"], "q"), PropDecision::Entailed);
        assert!(matches!(decide(&[], "p -> ! p"), PropDecision::Counter(_)));
    }

    #[test]
    fn plain_product_rejects_delta() {
        let p = prop("! p -> p");
        assert_eq!(
            decide_p(&[], &p, &SolverConfig::default()),
            Err(SolverError::DeltaInInput)
        );
        assert_eq!(
            decide_p(&[], &prop("p -> p"), &SolverConfig::default()),
            Ok(PropDecision::Entailed)
        );
    }

    #[test]
    fn branch_limit_errors_out() {
        let cfg = SolverConfig {
            branch_limit: 1,
            deadline: None,
        };
        let goal = prop("(a -> b) \\/ (c -> d) \\/ (b -> a)");
        assert!(matches!(
            decide_pd(&[], &goal, &cfg),
            Err(SolverError::ResourceLimit(_))
        ));
    }

    #[test]
    fn verify_rejects_bad_certificates() {
        let goal = prop("p -> p");
        let mut v = Valuation::new();
        v.set(var("p"), LogValue::top());
        assert!(!verify_certificate(&[], &goal, &v).unwrap());
    }
}
