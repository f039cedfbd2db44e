use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value as Json;

use super::AlgebraError;

/// Extended rational number: ℚ ∪ {−∞, +∞}.
///
/// Variant order matters: the derived `Ord` places `NegInf` below every
/// finite value and `PosInf` above.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Num {
    NegInf,
    Finite(BigRational),
    PosInf,
}

impl Num {
    pub fn int(i: i64) -> Num {
        Num::Finite(BigRational::from_integer(BigInt::from(i)))
    }

    /// Builds `n/d` in lowest terms. Panics on `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Num {
        Num::Finite(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Num {
        Num::Finite(BigRational::zero())
    }

    pub fn one() -> Num {
        Num::Finite(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Num::Finite(r) if r.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Num::Finite(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Num::Finite(r) if r.is_integer())
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::NegInf => true,
            Num::Finite(r) => r.is_negative(),
            Num::PosInf => false,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Num::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// Addition where −∞ absorbs everything, including +∞.
    pub fn add(&self, other: &Num) -> Num {
        match (self, other) {
            (Num::NegInf, _) | (_, Num::NegInf) => Num::NegInf,
            (Num::PosInf, _) | (_, Num::PosInf) => Num::PosInf,
            (Num::Finite(a), Num::Finite(b)) => Num::Finite(a + b),
        }
    }

    pub fn neg(&self) -> Num {
        match self {
            Num::NegInf => Num::PosInf,
            Num::PosInf => Num::NegInf,
            Num::Finite(a) => Num::Finite(-a),
        }
    }

    pub fn sub(&self, other: &Num) -> Num {
        self.add(&other.neg())
    }

    /// Multiplication with `0 × ±∞ = 0`.
    pub fn mul(&self, other: &Num) -> Num {
        if self.is_zero() || other.is_zero() {
            return Num::zero();
        }
        match (self, other) {
            (Num::Finite(a), Num::Finite(b)) => Num::Finite(a * b),
            _ => {
                if self.is_negative() != other.is_negative() {
                    Num::NegInf
                } else {
                    Num::PosInf
                }
            }
        }
    }

    /// Finite division; `None` when the divisor is zero or either side is infinite.
    pub fn div(&self, other: &Num) -> Option<Num> {
        match (self, other) {
            (Num::Finite(a), Num::Finite(b)) if !b.is_zero() => Some(Num::Finite(a / b)),
            _ => None,
        }
    }

    pub fn min_of(&self, other: &Num) -> Num {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max_of(&self, other: &Num) -> Num {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::NegInf => f64::NEG_INFINITY,
            Num::PosInf => f64::INFINITY,
            Num::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::NegInf => write!(f, "-inf"),
            Num::PosInf => write!(f, "inf"),
            Num::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// A plausibility, feasibility or utility value, or the unfeasible marker ⋄.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Num(Num),
    Bool(bool),
    Pair(Box<Value>, Box<Value>),
    Unfeasible,
}

impl Value {
    pub fn int(i: i64) -> Value {
        Value::Num(Num::int(i))
    }

    pub fn ratio(n: i64, d: i64) -> Value {
        Value::Num(Num::ratio(n, d))
    }

    pub fn pos_inf() -> Value {
        Value::Num(Num::PosInf)
    }

    pub fn neg_inf() -> Value {
        Value::Num(Num::NegInf)
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_unfeasible(&self) -> bool {
        matches!(self, Value::Unfeasible)
    }

    pub fn as_num(&self) -> Option<&Num> {
        match self {
            Value::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub(crate) fn num(&self) -> &Num {
        self.as_num()
            .unwrap_or_else(|| panic!("numeric operator applied to {self}"))
    }

    pub(crate) fn boolean(&self) -> bool {
        self.as_bool()
            .unwrap_or_else(|| panic!("boolean operator applied to {self}"))
    }

    /// Parses a value literal: integer, `a/b`, decimal, `inf`, `-inf`,
    /// `true`, `false`, `[v1,v2]` or `unfeasible`.
    pub fn parse_literal(text: &str) -> Result<Value, AlgebraError> {
        let t = text.trim();
        let bad = || AlgebraError::Literal(text.to_string());
        match t {
            "true" | "t" => return Ok(Value::Bool(true)),
            "false" | "f" => return Ok(Value::Bool(false)),
            "inf" | "+inf" => return Ok(Value::pos_inf()),
            "-inf" => return Ok(Value::neg_inf()),
            "unfeasible" => return Ok(Value::Unfeasible),
            _ => {}
        }
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let split = split_top_level(inner).ok_or_else(bad)?;
            let a = Value::parse_literal(split.0)?;
            let b = Value::parse_literal(split.1)?;
            return Ok(Value::pair(a, b));
        }
        parse_rational(t).map(|r| Value::Num(Num::Finite(r))).ok_or_else(bad)
    }

    /// JSON form: booleans and small integers natively, everything else as a
    /// literal string, pairs as two-element arrays.
    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Num(Num::Finite(r)) if r.is_integer() => match r.numer().to_i64() {
                Some(i) => Json::from(i),
                None => Json::String(self.to_string()),
            },
            Value::Pair(a, b) => Json::Array(vec![a.to_json(), b.to_json()]),
            _ => Json::String(self.to_string()),
        }
    }

    pub fn from_json(j: &Json) -> Result<Value, AlgebraError> {
        match j {
            Json::Bool(b) => Ok(Value::Bool(*b)),
            Json::Number(n) => Value::parse_literal(&n.to_string()),
            Json::String(s) => Value::parse_literal(s),
            Json::Array(items) if items.len() == 2 => Ok(Value::pair(
                Value::from_json(&items[0])?,
                Value::from_json(&items[1])?,
            )),
            other => Err(AlgebraError::Literal(other.to_string())),
        }
    }
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn parse_rational(t: &str) -> Option<BigRational> {
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Some(if negative { -r } else { r });
    }
    t.parse::<BigInt>().ok().map(BigRational::from_integer)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Pair(a, b) => write!(f, "[{a},{b}]"),
            Value::Unfeasible => write!(f, "unfeasible"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        for lit in ["0", "7", "-3", "3/5", "inf", "-inf", "true", "false", "[1/2,1]", "unfeasible"] {
            let v = Value::parse_literal(lit).unwrap();
            assert_eq!(v.to_string(), lit);
            assert_eq!(Value::from_json(&v.to_json()).unwrap(), v);
        }
    }

    #[test]
    fn rationals_are_reduced() {
        assert_eq!(Value::parse_literal("6/10").unwrap(), Value::ratio(3, 5));
        assert_eq!(Value::parse_literal("0.6").unwrap(), Value::ratio(3, 5));
        assert_eq!(Value::parse_literal("-0.25").unwrap(), Value::ratio(-1, 4));
        assert_eq!(Value::parse_literal("2/-4").unwrap(), Value::ratio(-1, 2));
        assert!(Value::parse_literal("1/0").is_err());
        assert!(Value::parse_literal("abc").is_err());
    }

    #[test]
    fn infinity_arithmetic() {
        let ninf = Num::NegInf;
        assert_eq!(Num::int(5).add(&ninf), Num::NegInf);
        assert_eq!(Num::PosInf.add(&ninf), Num::NegInf);
        assert_eq!(Num::zero().mul(&ninf), Num::zero());
        assert_eq!(Num::ratio(1, 2).mul(&ninf), Num::NegInf);
        assert_eq!(Num::int(3).add(&Num::PosInf), Num::PosInf);
        assert!(Num::NegInf < Num::int(-1000) && Num::int(1000) < Num::PosInf);
    }
}
