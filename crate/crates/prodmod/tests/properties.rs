//! Randomized invariants tying the layers together: parsing, translation,
//! enumeration, the propositional solver, and the model-side checkers.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use proptest::strategy::Union;

use prodmod::countermodel::{eval_gen, is_opd, product_valuation, GenValuation};
use prodmod::pisolver::{
    decide_pd, eval_prop, fourier_motzkin_feasible, lra_feasible, Cmp, LinearConstraintSystem,
    LogValue, PropDecision, SolverConfig, Valuation,
};
use prodmod::semantics::{grid_falsify, random_falsify, KripkeModel};
use prodmod::sequences::{
    coherent_sets_by_filter, enumerate_coherent, enumerate_simple, sigma_universe,
    simple_sets_by_filter, Sequence,
};
use prodmod::syntax::{gens, levels, parse, sfm, subscript, ExtVar, ModalFormula, PropFormula};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_formula(depth: u32, md: u32) -> BoxedStrategy<ModalFormula> {
    let leaf = prop_oneof![
        4 => prop_oneof![Just("p"), Just("q")].prop_map(|v| ModalFormula::var(v)),
        1 => Just(ModalFormula::Top),
        1 => Just(ModalFormula::Bot),
    ]
    .boxed();
    if depth == 0 {
        return leaf;
    }
    let binary = (
        arb_formula(depth - 1, md),
        arb_formula(depth - 1, md),
        0..4u8,
    )
        .prop_map(|(l, r, op)| match op {
            0 => ModalFormula::weak_and(l, r),
            1 => ModalFormula::weak_or(l, r),
            2 => ModalFormula::strong_and(l, r),
            _ => ModalFormula::imp(l, r),
        })
        .boxed();
    let mut cases = vec![(2u32, leaf), (3, binary)];
    if md > 0 {
        let modal = (arb_formula(depth - 1, md - 1), any::<bool>())
            .prop_map(|(body, necc)| {
                if necc {
                    ModalFormula::necc(body)
                } else {
                    ModalFormula::poss(body)
                }
            })
            .boxed();
        cases.push((2, modal));
    }
    Union::new_weighted(cases).boxed()
}

fn arb_prop(depth: u32) -> BoxedStrategy<PropFormula> {
    arb_formula(depth, depth).prop_map(|f| to_prop(&f)).boxed()
}

// Reuse the modal strategy, reading modal operators as Delta.
fn to_prop(f: &ModalFormula) -> PropFormula {
    match f {
        ModalFormula::Var(name) => PropFormula::EVar(ExtVar::BaseVar {
            name: name.clone(),
            seq: Sequence::root(),
        }),
        ModalFormula::Top => PropFormula::Top,
        ModalFormula::Bot => PropFormula::Bot,
        ModalFormula::WeakAnd(l, r) => PropFormula::weak_and(to_prop(l), to_prop(r)),
        ModalFormula::WeakOr(l, r) => PropFormula::weak_or(to_prop(l), to_prop(r)),
        ModalFormula::StrongAnd(l, r) => PropFormula::strong_and(to_prop(l), to_prop(r)),
        ModalFormula::Imp(l, r) => PropFormula::imp(to_prop(l), to_prop(r)),
        ModalFormula::Necc(b) | ModalFormula::Poss(b) => PropFormula::delta(to_prop(b)),
    }
}

fn classical(f: &PropFormula, bits: &dyn Fn(&ExtVar) -> bool) -> bool {
    match f {
        PropFormula::EVar(v) => bits(v),
        PropFormula::Top => true,
        PropFormula::Bot => false,
        PropFormula::WeakAnd(l, r) | PropFormula::StrongAnd(l, r) => {
            classical(l, bits) && classical(r, bits)
        }
        PropFormula::WeakOr(l, r) => classical(l, bits) || classical(r, bits),
        PropFormula::Imp(l, r) => !classical(l, bits) || classical(r, bits),
        PropFormula::Delta(b) => classical(b, bits),
    }
}

fn arb_system() -> BoxedStrategy<LinearConstraintSystem> {
    (1..=4usize)
        .prop_flat_map(|unknowns| {
            let row = (
                proptest::collection::vec((0..unknowns, -3..=3i64), 1..=2),
                0..5u8,
                -4..=4i64,
                1..=2i64,
            );
            (Just(unknowns), proptest::collection::vec(row, 0..=6))
        })
        .prop_map(|(unknowns, rows)| {
            let mut sys = LinearConstraintSystem::new(unknowns);
            for (terms, cmp, num, den) in rows {
                let coeffs = terms
                    .into_iter()
                    .filter(|(_, c)| *c != 0)
                    .map(|(i, c)| (i, rat(c, 1)))
                    .collect();
                let cmp = match cmp {
                    0 | 1 => Cmp::Le,
                    2 | 3 => Cmp::Lt,
                    _ => Cmp::Eq,
                };
                sys.add(coeffs, cmp, rat(num, den));
            }
            sys
        })
        .boxed()
}

fn arb_model() -> BoxedStrategy<(KripkeModel, Vec<String>)> {
    (
        1..=3usize,
        proptest::collection::vec(any::<bool>(), 9),
        proptest::collection::vec(0..=2u8, 6),
    )
        .prop_map(|(n, rel, vals)| {
            let mut m = KripkeModel::new(true);
            let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
            for name in &names {
                m.add_world(name).unwrap();
            }
            for i in 0..n {
                for j in 0..n {
                    if rel[i * 3 + j] {
                        m.set_rel(&names[i], &names[j], rat(1, 1)).unwrap();
                    }
                }
            }
            for (i, name) in names.iter().enumerate() {
                for (k, var) in ["p", "q"].iter().enumerate() {
                    let v = match vals[i * 2 + k] {
                        0 => rat(0, 1),
                        1 => rat(1, 2),
                        _ => rat(1, 1),
                    };
                    m.set_val(name, var, v).unwrap();
                }
            }
            (m, names)
        })
        .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        .. ProptestConfig::default()
    })]

    #[test]
    fn printed_formulas_parse_back(f in arb_formula(4, 3)) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f.clone());
        prop_assert_eq!(parse(&f.word_form()).unwrap(), f);
    }

    #[test]
    fn subscripting_commutes_with_connectives(
        l in arb_formula(2, 1),
        r in arb_formula(2, 1),
        idx in 0..3usize,
    ) {
        let seqs = [
            Sequence::root(),
            Sequence::root().child(ModalFormula::necc(ModalFormula::var("p")), false),
            Sequence::root().child(ModalFormula::necc(ModalFormula::var("p")), true),
        ];
        let seq = &seqs[idx];
        prop_assert_eq!(
            subscript(&ModalFormula::weak_and(l.clone(), r.clone()), seq),
            PropFormula::weak_and(subscript(&l, seq), subscript(&r, seq))
        );
        prop_assert_eq!(
            subscript(&ModalFormula::imp(l.clone(), r.clone()), seq),
            PropFormula::imp(subscript(&l, seq), subscript(&r, seq))
        );
        for v in subscript(&l, seq).ext_vars() {
            let at = match v {
                ExtVar::BaseVar { seq: s, .. } | ExtVar::ModalAtom { seq: s, .. } => s,
                other => panic!("unexpected variable {other}"),
            };
            prop_assert_eq!(&at, seq);
        }
    }

    #[test]
    fn enumeration_agrees_with_subset_filtering(f in arb_formula(2, 1)) {
        let ls = levels(&BTreeSet::from([f]));
        let universe = sigma_universe(&ls);
        prop_assert!(universe.len() <= 9);
        prop_assert_eq!(
            enumerate_coherent(&ls, 1_000_000).unwrap(),
            coherent_sets_by_filter(&ls)
        );
        prop_assert_eq!(
            enumerate_simple(&ls, 1_000_000).unwrap(),
            simple_sets_by_filter(&ls)
        );
    }

    #[test]
    fn boolean_points_evaluate_classically(f in arb_prop(4), mask in any::<u32>()) {
        let vars: Vec<ExtVar> = f.ext_vars().into_iter().collect();
        let bit = |v: &ExtVar| -> bool {
            let i = vars.iter().position(|w| w == v).unwrap();
            mask >> i & 1 == 1
        };
        let mut point = Valuation::new();
        for v in &vars {
            point.set(
                v.clone(),
                if bit(v) { LogValue::top() } else { LogValue::zero() },
            );
        }
        let algebraic = eval_prop(&f, &point).unwrap();
        if classical(&f, &bit) {
            prop_assert!(algebraic.is_top());
        } else {
            prop_assert!(algebraic.is_zero());
        }
    }

    #[test]
    fn lra_agrees_with_fourier_motzkin(sys in arb_system()) {
        let witness = lra_feasible(&sys);
        prop_assert_eq!(witness.is_some(), fourier_motzkin_feasible(&sys));
        if let Some(w) = witness {
            prop_assert!(sys.satisfied_by(&w));
        }
    }

    #[test]
    fn falsifiers_return_real_countermodels(
        g in arb_formula(2, 1),
        f in arb_formula(3, 1),
        seed in any::<u64>(),
    ) {
        let gamma = vec![g];
        if let Some((model, world)) = random_falsify(&gamma, &f, 300, true, seed) {
            prop_assert!(gamma.iter().all(|p| model.eval(&world, p).unwrap().is_one()));
            prop_assert!(!model.eval(&world, &f).unwrap().is_one());
        }
        if let Some((model, world)) = grid_falsify(&gamma, &f, 2, 2) {
            prop_assert!(gamma.iter().all(|p| model.eval(&world, p).unwrap().is_one()));
            prop_assert!(!model.eval(&world, &f).unwrap().is_one());
            prop_assert_eq!(model.check_local(&gamma, &f), Some(world));
        }
    }

    #[test]
    fn unravelling_preserves_root_values(
        (m, names) in arb_model(),
        f in arb_formula(2, 2),
    ) {
        let tree = m.unravel_crop(&names[0], 2).unwrap();
        prop_assert_eq!(
            tree.eval("0", &f).unwrap(),
            m.eval(&names[0], &f).unwrap()
        );
    }

    #[test]
    fn opd_powers_stay_opd_and_multiply(
        f in arb_formula(3, 2),
        exps in proptest::collection::vec((0..=6i64, 1..=3i64), 8),
        zero_mask in 0..256u32,
        c_num in 1..=4i64,
        c_den in 1..=3i64,
    ) {
        let closed: BTreeSet<ModalFormula> = sfm(&f);
        let formulas: Vec<ModalFormula> = closed.iter().cloned().collect();
        let pool = gens(&closed);
        let base: GenValuation = pool
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let slot = i % 8;
                let v = if zero_mask >> slot & 1 == 1 {
                    LogValue::zero()
                } else {
                    LogValue::pos(rat(exps[slot].0, exps[slot].1))
                };
                (g.clone(), v)
            })
            .collect();
        let c = rat(c_num, c_den);
        let power: GenValuation = base
            .iter()
            .map(|(k, v)| (k.clone(), v.pow_rational(&c)))
            .collect();
        prop_assert!(is_opd(&base, &power, &formulas).unwrap());
        let both = product_valuation(&base, &power);
        for formula in &formulas {
            prop_assert_eq!(
                eval_gen(formula, &both).unwrap(),
                eval_gen(formula, &base)
                    .unwrap()
                    .and_strong(&eval_gen(formula, &power).unwrap())
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        .. ProptestConfig::default()
    })]

    #[test]
    fn deduction_roundtrip_holds(phi in arb_prop(3), psi in arb_prop(3)) {
        let cfg = SolverConfig::default();
        let direct = decide_pd(&[phi.clone()], &psi, &cfg).unwrap();
        let folded = decide_pd(
            &[],
            &PropFormula::imp(PropFormula::delta(phi), psi),
            &cfg,
        )
        .unwrap();
        prop_assert_eq!(
            matches!(direct, PropDecision::Entailed),
            matches!(folded, PropDecision::Entailed)
        );
    }
}
