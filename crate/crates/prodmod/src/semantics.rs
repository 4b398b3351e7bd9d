//! Product Kripke models with rational weights and exact evaluation.
//!
//! Worlds carry rational valuations, edges carry rational weights, and
//! formulas evaluate over the standard product algebra with infima and
//! suprema taken over successors. Searchers enumerate or sample small
//! models looking for worlds that falsify a consequence claim.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::ModalFormula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("duplicate world {0}")]
    DuplicateWorld(String),
    #[error("weight {0} is outside [0, 1]")]
    WeightOutOfRange(String),
    #[error("crisp relation weight must be 0 or 1, got {0}")]
    NotCrisp(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A finite Kripke model over the product algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub crisp: bool,
    pub worlds: Vec<String>,
    pub rel: BTreeMap<(String, String), BigRational>,
    pub val: BTreeMap<(String, String), BigRational>,
}

fn in_unit(q: &BigRational) -> bool {
    !q.is_negative() && *q <= BigRational::one()
}

trait Signed {
    fn is_negative(&self) -> bool;
}

impl Signed for BigRational {
    fn is_negative(&self) -> bool {
        *self < BigRational::zero()
    }
}

impl KripkeModel {
    pub fn new(crisp: bool) -> Self {
        KripkeModel {
            crisp,
            worlds: Vec::new(),
            rel: BTreeMap::new(),
            val: BTreeMap::new(),
        }
    }

    pub fn add_world(&mut self, name: &str) -> Result<(), ModelError> {
        if self.worlds.iter().any(|w| w == name) {
            return Err(ModelError::DuplicateWorld(name.into()));
        }
        self.worlds.push(name.into());
        Ok(())
    }

    fn check_world(&self, name: &str) -> Result<(), ModelError> {
        if self.worlds.iter().any(|w| w == name) {
            Ok(())
        } else {
            Err(ModelError::UnknownWorld(name.into()))
        }
    }

    pub fn set_rel(&mut self, from: &str, to: &str, weight: BigRational) -> Result<(), ModelError> {
        self.check_world(from)?;
        self.check_world(to)?;
        if !in_unit(&weight) {
            return Err(ModelError::WeightOutOfRange(weight.to_string()));
        }
        if self.crisp && !weight.is_zero() && !weight.is_one() {
            return Err(ModelError::NotCrisp(weight.to_string()));
        }
        if weight.is_zero() {
            self.rel.remove(&(from.into(), to.into()));
        } else {
            self.rel.insert((from.into(), to.into()), weight);
        }
        Ok(())
    }

    pub fn set_val(
        &mut self,
        world: &str,
        var: &str,
        value: BigRational,
    ) -> Result<(), ModelError> {
        self.check_world(world)?;
        if !in_unit(&value) {
            return Err(ModelError::WeightOutOfRange(value.to_string()));
        }
        if value.is_zero() {
            self.val.remove(&(world.into(), var.into()));
        } else {
            self.val.insert((world.into(), var.into()), value);
        }
        Ok(())
    }

    pub fn rel_weight(&self, from: &str, to: &str) -> BigRational {
        self.rel
            .get(&(from.into(), to.into()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn val_of(&self, world: &str, var: &str) -> BigRational {
        self.val
            .get(&(world.into(), var.into()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Successors with positive weight, in world order.
    pub fn successors(&self, world: &str) -> Vec<(String, BigRational)> {
        self.worlds
            .iter()
            .filter_map(|u| {
                let w = self.rel_weight(world, u);
                (!w.is_zero()).then(|| (u.clone(), w))
            })
            .collect()
    }

    /// Exact evaluation at a world.
    pub fn eval(&self, world: &str, f: &ModalFormula) -> Result<BigRational, ModelError> {
        self.check_world(world)?;
        Ok(self.eval_at(world, f))
    }

    fn eval_at(&self, world: &str, f: &ModalFormula) -> BigRational {
        match f {
            ModalFormula::Var(p) => self.val_of(world, p),
            ModalFormula::Top => BigRational::one(),
            ModalFormula::Bot => BigRational::zero(),
            ModalFormula::WeakAnd(l, r) => self.eval_at(world, l).min(self.eval_at(world, r)),
            ModalFormula::WeakOr(l, r) => self.eval_at(world, l).max(self.eval_at(world, r)),
            ModalFormula::StrongAnd(l, r) => self.eval_at(world, l) * self.eval_at(world, r),
            ModalFormula::Imp(l, r) => imp(&self.eval_at(world, l), &self.eval_at(world, r)),
            ModalFormula::Necc(b) => {
                let mut acc = BigRational::one();
                for (u, w) in self.successors(world) {
                    acc = acc.min(imp(&w, &self.eval_at(&u, b)));
                }
                acc
            }
            ModalFormula::Poss(b) => {
                let mut acc = BigRational::zero();
                for (u, w) in self.successors(world) {
                    acc = acc.max(w * self.eval_at(&u, b));
                }
                acc
            }
        }
    }

    /// First world where every premise is one and the conclusion is not.
    pub fn check_local(&self, gamma: &[ModalFormula], phi: &ModalFormula) -> Option<String> {
        self.worlds.iter().find_map(|w| {
            let holds =
                gamma.iter().all(|g| self.eval_at(w, g).is_one()) && !self.eval_at(w, phi).is_one();
            holds.then(|| w.clone())
        })
    }

    /// Unravel into a tree of the given depth rooted at a world; formulas of
    /// modal depth up to the crop depth keep their root value.
    pub fn unravel_crop(&self, root: &str, depth: usize) -> Result<KripkeModel, ModelError> {
        self.check_world(root)?;
        let mut out = KripkeModel::new(self.crisp);
        let name = |path: &[usize]| {
            path.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        let index = |w: &str| self.worlds.iter().position(|x| x == w).unwrap();
        let mut frontier = vec![vec![index(root)]];
        out.add_world(&name(&frontier[0]))?;
        self.copy_vals(&mut out, root, &name(&frontier[0]))?;
        for _ in 0..depth {
            let mut next = Vec::new();
            for path in &frontier {
                let here = &self.worlds[*path.last().unwrap()];
                for (u, w) in self.successors(here) {
                    let mut child = path.clone();
                    child.push(index(&u));
                    out.add_world(&name(&child))?;
                    self.copy_vals(&mut out, &u, &name(&child))?;
                    out.set_rel(&name(path), &name(&child), w)?;
                    next.push(child);
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    fn copy_vals(&self, out: &mut KripkeModel, from: &str, to: &str) -> Result<(), ModelError> {
        for ((w, p), v) in &self.val {
            if w == from {
                out.set_val(to, p, v.clone())?;
            }
        }
        Ok(())
    }
}

fn imp(a: &BigRational, b: &BigRational) -> BigRational {
    if a <= b {
        BigRational::one()
    } else {
        b / a
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "crisp: {}", self.crisp)?;
        write!(f, "worlds:")?;
        for w in &self.worlds {
            write!(f, " {w}")?;
        }
        writeln!(f)?;
        for ((a, b), w) in &self.rel {
            writeln!(f, "rel: {a} {b} = {w}")?;
        }
        for ((w, p), v) in &self.val {
            writeln!(f, "val: {w} {p} = {v}")?;
        }
        Ok(())
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Parse the line-oriented model format.
pub fn parse_model(text: &str) -> Result<KripkeModel, ModelError> {
    let fail = |line: usize, message: &str| ModelError::Parse {
        line,
        message: message.into(),
    };
    let mut crisp = false;
    let mut body: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(fail(i + 1, "expected `key: value`"));
        };
        match key.trim() {
            "crisp" => {
                crisp = match rest.trim() {
                    "true" => true,
                    "false" => false,
                    other => return Err(fail(i + 1, &format!("bad crisp flag {other}"))),
                }
            }
            k @ ("worlds" | "rel" | "val") => body.push((i + 1, k, rest)),
            other => return Err(fail(i + 1, &format!("unknown directive {other}"))),
        }
    }
    let mut model = KripkeModel::new(crisp);
    let with_line = |line: usize, e: ModelError| match e {
        ModelError::Parse { .. } => e,
        other => ModelError::Parse {
            line,
            message: other.to_string(),
        },
    };
    for (line, key, rest) in &body {
        if *key == "worlds" {
            for w in rest.split_whitespace() {
                model.add_world(w).map_err(|e| with_line(*line, e))?;
            }
        }
    }
    for (line, key, rest) in &body {
        if *key == "worlds" {
            continue;
        }
        let Some((lhs, rhs)) = rest.split_once('=') else {
            return Err(fail(*line, "expected `= weight`"));
        };
        let parts: Vec<&str> = lhs.split_whitespace().collect();
        let [a, b] = parts.as_slice() else {
            return Err(fail(*line, "expected two names before `=`"));
        };
        let Some(weight) = parse_rational(rhs) else {
            return Err(fail(*line, &format!("bad weight {}", rhs.trim())));
        };
        let result = if *key == "rel" {
            model.set_rel(a, b, weight)
        } else {
            model.set_val(a, b, weight)
        };
        result.map_err(|e| with_line(*line, e))?;
    }
    Ok(model)
}

fn variables_of(gamma: &[ModalFormula], phi: &ModalFormula) -> Vec<String> {
    let mut vars = phi.variables();
    for g in gamma {
        vars.extend(g.variables());
    }
    vars.into_iter().collect()
}

fn rational_pool(max_den: u64) -> Vec<BigRational> {
    let mut pool = std::collections::BTreeSet::new();
    for den in 1..=max_den {
        for num in 0..=den {
            pool.insert(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
    }
    pool.into_iter().collect()
}

/// Sample random small models looking for a falsifying world.
pub fn random_falsify(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    attempts: u64,
    crisp: bool,
    seed: u64,
) -> Option<(KripkeModel, String)> {
    let vars = variables_of(gamma, phi);
    let pool = rational_pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let n = rng.random_range(1..=4usize);
        let mut model = KripkeModel::new(crisp);
        for i in 0..n {
            model.add_world(&format!("w{i}")).expect("fresh world");
        }
        for i in 0..n {
            for j in 0..n {
                let weight = if crisp {
                    BigRational::from_integer(BigInt::from(rng.random_range(0..=1)))
                } else {
                    pool[rng.random_range(0..pool.len())].clone()
                };
                model
                    .set_rel(&format!("w{i}"), &format!("w{j}"), weight)
                    .expect("valid weight");
            }
        }
        for i in 0..n {
            for p in &vars {
                let value = pool[rng.random_range(0..pool.len())].clone();
                model
                    .set_val(&format!("w{i}"), p, value)
                    .expect("valid value");
            }
        }
        if let Some(w) = model.check_local(gamma, phi) {
            return Some((model, w));
        }
    }
    None
}

fn exhaustive_crisp_search(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    max_worlds: usize,
    pool: &[BigRational],
) -> Option<(KripkeModel, String)> {
    let vars = variables_of(gamma, phi);
    for n in 1..=max_worlds {
        assert!(n * n <= 32, "relation mask too wide");
        let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        for rel_mask in 0..(1u64 << (n * n)) {
            let mut digits = vec![0usize; n * vars.len()];
            loop {
                let mut model = KripkeModel::new(true);
                for w in &names {
                    model.add_world(w).expect("fresh world");
                }
                for i in 0..n {
                    for j in 0..n {
                        if rel_mask >> (i * n + j) & 1 == 1 {
                            model
                                .set_rel(&names[i], &names[j], BigRational::one())
                                .expect("valid weight");
                        }
                    }
                }
                for (k, digit) in digits.iter().enumerate() {
                    let (i, v) = (k / vars.len(), k % vars.len());
                    model
                        .set_val(&names[i], &vars[v], pool[*digit].clone())
                        .expect("valid value");
                }
                let root = &names[0];
                if gamma.iter().all(|g| model.eval_at(root, g).is_one())
                    && !model.eval_at(root, phi).is_one()
                {
                    return Some((model, root.clone()));
                }
                let mut k = 0;
                loop {
                    if k == digits.len() {
                        break;
                    }
                    digits[k] += 1;
                    if digits[k] < pool.len() {
                        break;
                    }
                    digits[k] = 0;
                    k += 1;
                }
                if k == digits.len() {
                    break;
                }
            }
        }
    }
    None
}

/// Exhaustive search over two-valued models with a fixed root world.
pub fn classical_falsify(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    max_worlds: usize,
) -> Option<(KripkeModel, String)> {
    exhaustive_crisp_search(gamma, phi, max_worlds, &rational_pool(1))
}

/// Exhaustive search over crisp-relation models whose world values range
/// over the rationals with bounded denominator, with a fixed root world.
pub fn grid_falsify(
    gamma: &[ModalFormula],
    phi: &ModalFormula,
    max_worlds: usize,
    max_den: u64,
) -> Option<(KripkeModel, String)> {
    exhaustive_crisp_search(gamma, phi, max_worlds, &rational_pool(max_den))
}
