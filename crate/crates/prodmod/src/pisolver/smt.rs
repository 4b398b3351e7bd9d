//! SMT-LIB export of propositional consequence queries.
//!
//! Each subformula gets a Boolean marker for taking value zero and a real
//! exponent coordinate used when it does not. The emitted script is
//! satisfiable exactly when a counter valuation exists, so an external
//! QF_LRA solver can cross check the built-in search.

use std::fmt::Write as _;

use super::{Dag, Op};
use crate::syntax::PropFormula;

/// Render a consequence query as an SMT-LIB 2 script.
pub fn export_smtlib(premises: &[PropFormula], goal: &PropFormula) -> String {
    let mut sorted: Vec<PropFormula> = premises.to_vec();
    sorted.sort_by_key(|p| p.to_string());
    sorted.dedup();

    let mut dag = Dag::default();
    let premise_ids: Vec<u32> = sorted.iter().map(|p| dag.add(p)).collect();
    let goal_id = dag.add(goal);

    let mut out = String::new();
    out.push_str("; sat here means the premises do not entail the goal\n");
    for (i, p) in sorted.iter().enumerate() {
        let _ = writeln!(out, "; premise {i}: {p}");
    }
    let _ = writeln!(out, "; goal: {goal}");
    out.push_str("(set-logic QF_LRA)\n(set-option :produce-models true)\n");

    for (i, op) in dag.ops.iter().enumerate() {
        let _ = writeln!(out, "(declare-const z{i} Bool)");
        let _ = writeln!(out, "(declare-const x{i} Real)");
        let _ = writeln!(out, "(assert (>= x{i} 0))");
        match *op {
            Op::Var(v) => {
                let _ = writeln!(out, "; node {i} is {}", dag.vars[v as usize]);
            }
            Op::Top => {
                let _ = writeln!(out, "(assert (and (not z{i}) (= x{i} 0)))");
            }
            Op::Bot => {
                let _ = writeln!(out, "(assert (and z{i} (= x{i} 0)))");
            }
            Op::SAnd(l, r) => {
                let _ = writeln!(out, "(assert (= z{i} (or z{l} z{r})))");
                let _ = writeln!(out, "(assert (=> (not z{i}) (= x{i} (+ x{l} x{r}))))");
            }
            Op::WAnd(l, r) => {
                let _ = writeln!(out, "(assert (= z{i} (or z{l} z{r})))");
                let _ = writeln!(
                    out,
                    "(assert (=> (and (not z{l}) (not z{r})) (= x{i} (ite (>= x{l} x{r}) x{l} x{r}))))"
                );
            }
            Op::WOr(l, r) => {
                let _ = writeln!(out, "(assert (= z{i} (and z{l} z{r})))");
                let _ = writeln!(
                    out,
                    "(assert (=> (and (not z{l}) (not z{r})) (= x{i} (ite (<= x{l} x{r}) x{l} x{r}))))"
                );
                let _ = writeln!(out, "(assert (=> (and z{l} (not z{r})) (= x{i} x{r})))");
                let _ = writeln!(out, "(assert (=> (and (not z{l}) z{r}) (= x{i} x{l})))");
            }
            Op::Imp(l, r) => {
                let _ = writeln!(out, "(assert (= z{i} (and (not z{l}) z{r})))");
                let _ = writeln!(
                    out,
                    "(assert (=> (and (not z{l}) (not z{r})) (= x{i} (ite (<= x{r} x{l}) 0 (- x{r} x{l})))))"
                );
                let _ = writeln!(out, "(assert (=> z{l} (= x{i} 0)))");
            }
            Op::Delta(a) => {
                let _ = writeln!(out, "(assert (= z{i} (or z{a} (> x{a} 0))))");
                let _ = writeln!(out, "(assert (=> (not z{i}) (= x{i} 0)))");
            }
        }
    }

    for id in &premise_ids {
        let _ = writeln!(out, "(assert (and (not z{id}) (= x{id} 0)))");
    }
    let _ = writeln!(out, "(assert (or z{goal_id} (> x{goal_id} 0)))");
    out.push_str("(check-sat)\n(get-model)\n");
    out
}
