//! Feasibility of linear rational constraint systems with strict
//! inequalities.
//!
//! The decision procedure is the bounded simplex of Dutertre and de Moura:
//! strict bounds are tracked symbolically over Q[eps] and a concrete witness
//! is recovered by substituting a small enough rational for eps. A naive
//! Fourier Motzkin eliminator doubles as an independent reference for tests.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Comparison of a linear expression against a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
}

/// One constraint: sum of coeff * unknown, compared against a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, BigRational)>,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

/// A conjunction of linear constraints over unknowns indexed from zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearConstraintSystem {
    pub unknowns: usize,
    pub constraints: Vec<Constraint>,
}

impl LinearConstraintSystem {
    pub fn new(unknowns: usize) -> Self {
        LinearConstraintSystem {
            unknowns,
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, BigRational)>, cmp: Cmp, rhs: BigRational) {
        for (i, _) in &coeffs {
            assert!(*i < self.unknowns, "unknown out of range");
        }
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    /// Check one assignment against every constraint.
    pub fn satisfied_by(&self, assignment: &[BigRational]) -> bool {
        self.constraints.iter().all(|c| {
            let lhs: BigRational = c
                .coeffs
                .iter()
                .map(|(i, coeff)| coeff * &assignment[*i])
                .sum();
            match c.cmp {
                Cmp::Le => lhs <= c.rhs,
                Cmp::Lt => lhs < c.rhs,
                Cmp::Eq => lhs == c.rhs,
            }
        })
    }
}

/// An element of Q[eps]: q + k*eps under the lexicographic order, for an
/// infinitesimal positive eps.
#[derive(Clone, Debug, PartialEq, Eq)]
struct EpsRat {
    q: BigRational,
    k: BigRational,
}

impl EpsRat {
    fn zero() -> Self {
        EpsRat {
            q: BigRational::zero(),
            k: BigRational::zero(),
        }
    }

    fn rational(q: BigRational) -> Self {
        EpsRat {
            q,
            k: BigRational::zero(),
        }
    }

    fn with_eps(q: BigRational, k: i64) -> Self {
        EpsRat {
            q,
            k: BigRational::from_integer(k.into()),
        }
    }

    fn at(&self, eps: &BigRational) -> BigRational {
        &self.q + &self.k * eps
    }
}

impl Ord for EpsRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.q.cmp(&other.q).then_with(|| self.k.cmp(&other.k))
    }
}

impl PartialOrd for EpsRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &EpsRat {
    type Output = EpsRat;
    fn add(self, other: &EpsRat) -> EpsRat {
        EpsRat {
            q: &self.q + &other.q,
            k: &self.k + &other.k,
        }
    }
}

impl Sub for &EpsRat {
    type Output = EpsRat;
    fn sub(self, other: &EpsRat) -> EpsRat {
        EpsRat {
            q: &self.q - &other.q,
            k: &self.k - &other.k,
        }
    }
}

impl Mul<&BigRational> for &EpsRat {
    type Output = EpsRat;
    fn mul(self, other: &BigRational) -> EpsRat {
        EpsRat {
            q: &self.q * other,
            k: &self.k * other,
        }
    }
}

impl Neg for &EpsRat {
    type Output = EpsRat;
    fn neg(self) -> EpsRat {
        EpsRat {
            q: -&self.q,
            k: -&self.k,
        }
    }
}

struct Simplex {
    n: usize,
    total: usize,
    rows: Vec<Vec<BigRational>>,
    basic: Vec<usize>,
    row_of: Vec<Option<usize>>,
    lower: Vec<Option<EpsRat>>,
    upper: Vec<Option<EpsRat>>,
    beta: Vec<EpsRat>,
}

impl Simplex {
    fn new(sys: &LinearConstraintSystem) -> Self {
        let n = sys.unknowns;
        let m = sys.constraints.len();
        let total = n + m;
        let mut rows = Vec::with_capacity(m);
        let mut basic = Vec::with_capacity(m);
        let mut row_of = vec![None; total];
        let mut lower = vec![None; total];
        let mut upper = vec![None; total];
        for (i, c) in sys.constraints.iter().enumerate() {
            let slack = n + i;
            let mut row = vec![BigRational::zero(); total];
            for (j, coeff) in &c.coeffs {
                let sum = &row[*j] + coeff;
                row[*j] = sum;
            }
            rows.push(row);
            basic.push(slack);
            row_of[slack] = Some(i);
            match c.cmp {
                Cmp::Le => upper[slack] = Some(EpsRat::rational(c.rhs.clone())),
                Cmp::Lt => upper[slack] = Some(EpsRat::with_eps(c.rhs.clone(), -1)),
                Cmp::Eq => {
                    lower[slack] = Some(EpsRat::rational(c.rhs.clone()));
                    upper[slack] = Some(EpsRat::rational(c.rhs.clone()));
                }
            }
        }
        Simplex {
            n,
            total,
            rows,
            basic,
            row_of,
            lower,
            upper,
            beta: vec![EpsRat::zero(); total],
        }
    }

    fn out_of_bounds(&self, v: usize) -> Option<bool> {
        if let Some(lb) = &self.lower[v] {
            if self.beta[v] < *lb {
                return Some(true);
            }
        }
        if let Some(ub) = &self.upper[v] {
            if self.beta[v] > *ub {
                return Some(false);
            }
        }
        None
    }

    fn pivot(&mut self, row: usize, entering: usize) {
        let leaving = self.basic[row];
        let coeff = self.rows[row][entering].clone();
        debug_assert!(!coeff.is_zero());
        let mut new_row = vec![BigRational::zero(); self.total];
        for j in 0..self.total {
            if j == entering {
                continue;
            }
            if !self.rows[row][j].is_zero() {
                new_row[j] = -(&self.rows[row][j] / &coeff);
            }
        }
        new_row[leaving] = BigRational::one() / &coeff;
        self.rows[row] = new_row.clone();
        self.basic[row] = entering;
        self.row_of[leaving] = None;
        self.row_of[entering] = Some(row);
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][entering].clone();
            if factor.is_zero() {
                continue;
            }
            self.rows[r][entering] = BigRational::zero();
            for j in 0..self.total {
                if !new_row[j].is_zero() {
                    let sum = &self.rows[r][j] + &new_row[j] * &factor;
                    self.rows[r][j] = sum;
                }
            }
        }
    }

    fn pivot_and_update(&mut self, row: usize, entering: usize, target: EpsRat) {
        let basic = self.basic[row];
        let coeff = self.rows[row][entering].clone();
        let theta = &(&target - &self.beta[basic]) * &(BigRational::one() / &coeff);
        self.beta[basic] = target;
        let moved = &self.beta[entering] + &theta;
        self.beta[entering] = moved;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let a = self.rows[r][entering].clone();
            if !a.is_zero() {
                let b = self.basic[r];
                let moved = &self.beta[b] + &(&theta * &a);
                self.beta[b] = moved;
            }
        }
        self.pivot(row, entering);
    }

    fn check(&mut self) -> bool {
        loop {
            let violated = (0..self.total)
                .filter(|v| self.row_of[*v].is_some())
                .find_map(|v| self.out_of_bounds(v).map(|below| (v, below)));
            let Some((v, below)) = violated else {
                return true;
            };
            let row = self.row_of[v].unwrap();
            let target = if below {
                self.lower[v].clone().unwrap()
            } else {
                self.upper[v].clone().unwrap()
            };
            let mut entering = None;
            for j in 0..self.total {
                if self.row_of[j].is_some() || j == v {
                    continue;
                }
                let a = &self.rows[row][j];
                if a.is_zero() {
                    continue;
                }
                let want_increase = below == a.is_positive();
                let movable = if want_increase {
                    self.upper[j]
                        .as_ref()
                        .map(|ub| self.beta[j] < *ub)
                        .unwrap_or(true)
                } else {
                    self.lower[j]
                        .as_ref()
                        .map(|lb| self.beta[j] > *lb)
                        .unwrap_or(true)
                };
                if movable {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return false;
            };
            self.pivot_and_update(row, j, target);
        }
    }

    fn extract(&self) -> Vec<BigRational> {
        let mut eps = BigRational::one();
        for v in 0..self.total {
            if let Some(ub) = &self.upper[v] {
                let val = &self.beta[v];
                if val.q < ub.q && val.k > ub.k {
                    eps = eps.min((&ub.q - &val.q) / (&val.k - &ub.k));
                }
            }
            if let Some(lb) = &self.lower[v] {
                let val = &self.beta[v];
                if val.q > lb.q && val.k < lb.k {
                    eps = eps.min((&val.q - &lb.q) / (&lb.k - &val.k));
                }
            }
        }
        (0..self.n).map(|v| self.beta[v].at(&eps)).collect()
    }
}

/// Decide feasibility; on success return a satisfying rational assignment.
pub fn lra_feasible(sys: &LinearConstraintSystem) -> Option<Vec<BigRational>> {
    let mut simplex = Simplex::new(sys);
    if !simplex.check() {
        return None;
    }
    let assignment = simplex.extract();
    assert!(
        sys.satisfied_by(&assignment),
        "simplex produced an invalid witness"
    );
    Some(assignment)
}

/// Reference feasibility check by Fourier Motzkin elimination.
pub fn fourier_motzkin_feasible(sys: &LinearConstraintSystem) -> bool {
    // rows: (coeffs dense, strict, rhs) meaning sum <= rhs or sum < rhs
    let mut rows: Vec<(Vec<BigRational>, bool, BigRational)> = Vec::new();
    for c in &sys.constraints {
        let mut dense = vec![BigRational::zero(); sys.unknowns];
        for (i, coeff) in &c.coeffs {
            dense[*i] = &dense[*i] + coeff;
        }
        match c.cmp {
            Cmp::Le => rows.push((dense, false, c.rhs.clone())),
            Cmp::Lt => rows.push((dense, true, c.rhs.clone())),
            Cmp::Eq => {
                let neg: Vec<BigRational> = dense.iter().map(|x| -x).collect();
                rows.push((dense, false, c.rhs.clone()));
                rows.push((neg, false, -&c.rhs));
            }
        }
    }
    for v in 0..sys.unknowns {
        let (mut uppers, mut lowers, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            match row.0[v].cmp(&BigRational::zero()) {
                Ordering::Greater => uppers.push(row),
                Ordering::Less => lowers.push(row),
                Ordering::Equal => rest.push(row),
            }
        }
        for up in &uppers {
            for lo in &lowers {
                let a = &up.0[v];
                let b = -&lo.0[v];
                let coeffs: Vec<BigRational> = (0..sys.unknowns)
                    .map(|j| &up.0[j] * &b + &lo.0[j] * a)
                    .collect();
                let rhs = &up.2 * &b + &lo.2 * a;
                rest.push((coeffs, up.1 || lo.1, rhs));
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, strict, rhs)| {
        if *strict {
            *rhs > BigRational::zero()
        } else {
            *rhs >= BigRational::zero()
        }
    })
}
