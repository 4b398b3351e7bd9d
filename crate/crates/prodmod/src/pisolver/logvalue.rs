//! Exact truth values for the standard product algebra with Delta.
//!
//! A positive value 2^(-x) is stored as its exponent x, a nonnegative
//! rational; zero is kept apart. Multiplication becomes exponent addition
//! and residuation a truncated difference, so every connective stays inside
//! exact rational arithmetic. The representable values form a subalgebra of
//! [0,1] closed under all connectives, which keeps counter valuations sound.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero as _};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::syntax::ExtVar;

/// A truth value: zero, or 2^(-x) for a nonnegative rational exponent x.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogValue {
    Zero,
    Pos(BigRational),
}

impl LogValue {
    pub fn top() -> Self {
        LogValue::Pos(BigRational::zero())
    }

    pub fn zero() -> Self {
        LogValue::Zero
    }

    /// The value 2^(-exponent); the exponent must be nonnegative.
    pub fn pos(exponent: BigRational) -> Self {
        assert!(
            exponent >= BigRational::zero(),
            "exponent must be nonnegative"
        );
        LogValue::Pos(exponent)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, LogValue::Pos(x) if x.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogValue::Zero)
    }

    pub fn exponent(&self) -> Option<&BigRational> {
        match self {
            LogValue::Zero => None,
            LogValue::Pos(x) => Some(x),
        }
    }

    /// Strong conjunction: multiplication of values.
    pub fn and_strong(&self, other: &LogValue) -> LogValue {
        match (self, other) {
            (LogValue::Pos(a), LogValue::Pos(b)) => LogValue::Pos(a + b),
            _ => LogValue::Zero,
        }
    }

    /// Residuated implication: 1 when the antecedent is below the
    /// consequent, the quotient otherwise.
    pub fn imp(&self, other: &LogValue) -> LogValue {
        match (self, other) {
            (LogValue::Zero, _) => LogValue::top(),
            (LogValue::Pos(_), LogValue::Zero) => LogValue::Zero,
            (LogValue::Pos(a), LogValue::Pos(b)) => {
                if b <= a {
                    LogValue::top()
                } else {
                    LogValue::Pos(b - a)
                }
            }
        }
    }

    /// Weak conjunction: minimum.
    pub fn and_weak(&self, other: &LogValue) -> LogValue {
        match (self, other) {
            (LogValue::Pos(a), LogValue::Pos(b)) => LogValue::Pos(a.max(b).clone()),
            _ => LogValue::Zero,
        }
    }

    /// Weak disjunction: maximum.
    pub fn or_weak(&self, other: &LogValue) -> LogValue {
        match (self, other) {
            (LogValue::Pos(a), LogValue::Pos(b)) => LogValue::Pos(a.min(b).clone()),
            (LogValue::Zero, b) => b.clone(),
            (a, LogValue::Zero) => a.clone(),
        }
    }

    /// The Delta operator: 1 on 1, 0 elsewhere.
    pub fn delta(&self) -> LogValue {
        if self.is_top() {
            LogValue::top()
        } else {
            LogValue::Zero
        }
    }

    /// The k-th power of the value.
    pub fn pow(&self, k: usize) -> LogValue {
        match self {
            LogValue::Zero => {
                if k == 0 {
                    LogValue::top()
                } else {
                    LogValue::Zero
                }
            }
            LogValue::Pos(x) => LogValue::Pos(x * BigRational::from_integer(k.into())),
        }
    }

    /// The value raised to a positive rational power.
    pub fn pow_rational(&self, c: &BigRational) -> LogValue {
        assert!(*c > BigRational::zero(), "power must be positive");
        match self {
            LogValue::Zero => LogValue::Zero,
            LogValue::Pos(x) => LogValue::Pos(x * c),
        }
    }

    /// Approximate magnitude in [0,1], for display only.
    pub fn approx_unit(&self) -> f64 {
        match self {
            LogValue::Zero => 0.0,
            LogValue::Pos(x) => (-x.to_f64().unwrap_or(f64::MAX)).exp2(),
        }
    }
}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogValue::Zero, LogValue::Zero) => Ordering::Equal,
            (LogValue::Zero, LogValue::Pos(_)) => Ordering::Less,
            (LogValue::Pos(_), LogValue::Zero) => Ordering::Greater,
            (LogValue::Pos(a), LogValue::Pos(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Zero => f.write_str("0"),
            LogValue::Pos(x) if x.is_zero() => f.write_str("1"),
            LogValue::Pos(x) => write!(f, "exp2(-{})", x),
        }
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LogValue::Zero => s.serialize_str("bot"),
            LogValue::Pos(x) => s.serialize_str(&x.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "bot" {
            return Ok(LogValue::Zero);
        }
        let x = BigRational::from_str(&text).map_err(serde::de::Error::custom)?;
        if x < BigRational::zero() {
            return Err(serde::de::Error::custom("negative exponent"));
        }
        Ok(LogValue::Pos(x))
    }
}

/// An assignment of truth values to extended variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    entries: BTreeMap<ExtVar, LogValue>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn get(&self, var: &ExtVar) -> Option<&LogValue> {
        self.entries.get(var)
    }

    pub fn set(&mut self, var: ExtVar, value: LogValue) {
        self.entries.insert(var, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExtVar, &LogValue)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(ExtVar, LogValue)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (ExtVar, LogValue)>>(iter: I) -> Self {
        Valuation {
            entries: iter.into_iter().collect(),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(&ExtVar, &LogValue)> = self.entries.iter().collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(ExtVar, LogValue)>::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn order_reverses_exponents() {
        let half = LogValue::pos(rat(1, 1));
        let quarter = LogValue::pos(rat(2, 1));
        assert!(LogValue::Zero < quarter);
        assert!(quarter < half);
        assert!(half < LogValue::top());
    }

    #[test]
    fn connective_tables() {
        let top = LogValue::top();
        let bot = LogValue::Zero;
        let half = LogValue::pos(rat(1, 1));
        let quarter = LogValue::pos(rat(2, 1));

        assert_eq!(half.and_strong(&half), quarter);
        assert_eq!(half.and_strong(&bot), bot);
        assert_eq!(top.and_strong(&half), half);

        assert_eq!(half.imp(&quarter), half);
        assert_eq!(quarter.imp(&half), top);
        assert_eq!(bot.imp(&bot), top);
        assert_eq!(half.imp(&bot), bot);

        assert_eq!(half.and_weak(&quarter), quarter);
        assert_eq!(half.or_weak(&quarter), half);
        assert_eq!(bot.and_weak(&half), bot);
        assert_eq!(bot.or_weak(&half), half);

        assert_eq!(top.delta(), top);
        assert_eq!(half.delta(), bot);
        assert_eq!(bot.delta(), bot);
    }

    #[test]
    fn powers() {
        let half = LogValue::pos(rat(1, 1));
        assert_eq!(half.pow(3), LogValue::pos(rat(3, 1)));
        assert_eq!(half.pow(0), LogValue::top());
        assert_eq!(LogValue::Zero.pow(2), LogValue::Zero);
        assert_eq!(half.pow_rational(&rat(1, 2)), LogValue::pos(rat(1, 2)));
    }

    #[test]
    fn serde_round_trip() {
        for v in [LogValue::Zero, LogValue::top(), LogValue::pos(rat(7, 3))] {
            let text = serde_json::to_string(&v).unwrap();
            let back: LogValue = serde_json::from_str(&text).unwrap();
            assert_eq!(back, v);
        }
        assert_eq!(serde_json::to_string(&LogValue::Zero).unwrap(), "\"bot\"");
    }

    #[test]
    fn display_forms() {
        assert_eq!(LogValue::Zero.to_string(), "0");
        assert_eq!(LogValue::top().to_string(), "1");
        assert_eq!(LogValue::pos(rat(3, 2)).to_string(), "exp2(-3/2)");
        assert!((LogValue::pos(rat(1, 1)).approx_unit() - 0.5).abs() < 1e-12);
    }
}
