use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::value::{Num, Value};
use super::{AlgebraError, StructureSpec};

type BinFn = Arc<dyn Fn(&Value, &Value) -> Value + Send + Sync>;
type OrdFn = Arc<dyn Fn(&Value, &Value) -> Option<Ordering> + Send + Sync>;
type UniformFn = Arc<dyn Fn(usize) -> Value + Send + Sync>;

/// A named binary operator on plain values.
///
/// The raw function never sees ⋄; [`Operator::combine`] and
/// [`Operator::eliminate`] provide the two extensions to ⋄.
#[derive(Clone)]
pub struct Operator {
    name: String,
    f: BinFn,
}

impl Operator {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Value, &Value) -> Value + Send + Sync + 'static,
    ) -> Operator {
        Operator { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, a: &Value, b: &Value) -> Value {
        (self.f)(a, b)
    }

    /// Extension used when the operator combines: ⋄ is absorbing.
    pub fn combine(&self, a: &Value, b: &Value) -> Value {
        if a.is_unfeasible() || b.is_unfeasible() {
            Value::Unfeasible
        } else {
            self.apply(a, b)
        }
    }

    /// Extension used when the operator eliminates: ⋄ is the identity.
    pub fn eliminate(&self, a: &Value, b: &Value) -> Value {
        match (a.is_unfeasible(), b.is_unfeasible()) {
            (true, _) => b.clone(),
            (false, true) => a.clone(),
            _ => self.apply(a, b),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({})", self.name)
    }
}

/// A (partial) order ⪯ given by a comparison returning `None` for
/// incomparable elements.
#[derive(Clone)]
pub struct Order {
    name: String,
    f: OrdFn,
    total: bool,
}

impl Order {
    pub fn new(
        name: impl Into<String>,
        total: bool,
        f: impl Fn(&Value, &Value) -> Option<Ordering> + Send + Sync + 'static,
    ) -> Order {
        Order { name: name.into(), f: Arc::new(f), total }
    }

    /// The usual numeric order.
    pub fn numeric() -> Order {
        Order::new("<=", true, |a, b| Some(a.num().cmp(b.num())))
    }

    /// The reversed numeric order used by κ-rankings.
    pub fn reversed_numeric() -> Order {
        Order::new(">=", true, |a, b| Some(b.num().cmp(a.num())))
    }

    /// f ≺ t.
    pub fn boolean() -> Order {
        Order::new("f<t", true, |a, b| Some(a.boolean().cmp(&b.boolean())))
    }

    pub fn componentwise(a: Order, b: Order) -> Order {
        let name = format!("({},{})", a.name, b.name);
        Order::new(name, false, move |x, y| {
            let (x1, x2) = x.as_pair().expect("pair value");
            let (y1, y2) = y.as_pair().expect("pair value");
            let c1 = a.compare(x1, y1)?;
            let c2 = b.compare(x2, y2)?;
            match (c1, c2) {
                (Ordering::Equal, c) | (c, Ordering::Equal) => Some(c),
                (c, d) if c == d => Some(c),
                _ => None,
            }
        })
    }

    /// Lexicographic refinement of a pair order; total when both parts are.
    pub fn lexicographic(a: Order, b: Order) -> Order {
        let total = a.total && b.total;
        let name = format!("lex({},{})", a.name, b.name);
        Order::new(name, total, move |x, y| {
            let (x1, x2) = x.as_pair().expect("pair value");
            let (y1, y2) = y.as_pair().expect("pair value");
            match a.compare(x1, y1)? {
                Ordering::Equal => b.compare(x2, y2),
                c => Some(c),
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_total(&self) -> bool {
        self.total
    }

    pub fn compare(&self, a: &Value, b: &Value) -> Option<Ordering> {
        (self.f)(a, b)
    }

    pub fn leq(&self, a: &Value, b: &Value) -> bool {
        matches!(self.compare(a, b), Some(Ordering::Less | Ordering::Equal))
    }

    /// Strict improvement `a ≻ b`.
    pub fn gt(&self, a: &Value, b: &Value) -> bool {
        matches!(self.compare(a, b), Some(Ordering::Greater))
    }

    pub fn lt(&self, a: &Value, b: &Value) -> bool {
        matches!(self.compare(a, b), Some(Ordering::Less))
    }
}

impl fmt::Debug for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Order({})", self.name)
    }
}

/// The underlying set of a plausibility or utility structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    /// ℚ⁺ (stands for ℝ⁺).
    NonNegRational,
    /// ℚ ∪ {−∞}.
    RationalNegInf,
    /// [0,1] ∩ ℚ.
    UnitInterval,
    /// ℕ ∪ {∞}.
    ExtNatural,
    Boolean,
    /// The integers 0..k.
    Scale(usize),
    Product(Box<Carrier>, Box<Carrier>),
}

impl Carrier {
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Carrier::Boolean, Value::Bool(_)) => true,
            (Carrier::NonNegRational, Value::Num(Num::Finite(r))) => !num_traits::Signed::is_negative(r),
            (Carrier::RationalNegInf, Value::Num(n)) => !matches!(n, Num::PosInf),
            (Carrier::UnitInterval, Value::Num(n)) => *n >= Num::zero() && *n <= Num::one(),
            (Carrier::ExtNatural, Value::Num(n)) => {
                matches!(n, Num::PosInf) || (n.is_integer() && !n.is_negative())
            }
            (Carrier::Scale(k), Value::Num(n)) => {
                n.is_integer() && !n.is_negative() && *n < Num::int(*k as i64)
            }
            (Carrier::Product(a, b), Value::Pair(x, y)) => a.contains(x) && b.contains(y),
            _ => false,
        }
    }

    /// All elements when the carrier is finite.
    pub fn elements(&self) -> Option<Vec<Value>> {
        match self {
            Carrier::Boolean => Some(vec![Value::Bool(false), Value::Bool(true)]),
            Carrier::Scale(k) => Some((0..*k as i64).map(Value::int).collect()),
            Carrier::Product(a, b) => {
                let xs = a.elements()?;
                let ys = b.elements()?;
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone())))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Draws an element, biased towards identities and infinities so that
    /// boundary cases show up in small samples.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        let roll: f64 = rng.gen();
        match self {
            Carrier::Boolean => Value::Bool(rng.gen()),
            Carrier::Scale(k) => Value::int(rng.gen_range(0..*k as i64)),
            Carrier::NonNegRational => {
                if roll < 0.15 {
                    Value::int(0)
                } else if roll < 0.25 {
                    Value::int(1)
                } else {
                    Value::ratio(rng.gen_range(0..30), rng.gen_range(1..9))
                }
            }
            Carrier::RationalNegInf => {
                if roll < 0.12 {
                    Value::neg_inf()
                } else if roll < 0.22 {
                    Value::int(0)
                } else {
                    Value::ratio(rng.gen_range(-30..30), rng.gen_range(1..9))
                }
            }
            Carrier::UnitInterval => {
                if roll < 0.12 {
                    Value::int(0)
                } else if roll < 0.24 {
                    Value::int(1)
                } else {
                    let d = rng.gen_range(1..13);
                    Value::ratio(rng.gen_range(0..=d), d)
                }
            }
            Carrier::ExtNatural => {
                if roll < 0.12 {
                    Value::pos_inf()
                } else if roll < 0.22 {
                    Value::int(0)
                } else {
                    Value::int(rng.gen_range(0..30))
                }
            }
            Carrier::Product(a, b) => Value::pair(a.sample(rng), b.sample(rng)),
        }
    }
}

/// Canonical conditioning data for a conditionable plausibility structure.
#[derive(Clone)]
pub struct Conditioning {
    divide: BinFn,
    uniform: UniformFn,
}

impl Conditioning {
    pub fn new(
        divide: impl Fn(&Value, &Value) -> Value + Send + Sync + 'static,
        uniform: impl Fn(usize) -> Value + Send + Sync + 'static,
    ) -> Conditioning {
        Conditioning { divide: Arc::new(divide), uniform: Arc::new(uniform) }
    }
}

impl fmt::Debug for Conditioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Conditioning")
    }
}

#[derive(Clone, Debug)]
pub struct PlausibilityStructure {
    pub name: String,
    pub carrier: Carrier,
    pub elim: Operator,
    pub comb: Operator,
    pub zero: Value,
    pub one: Value,
    pub order: Order,
    pub conditioning: Option<Conditioning>,
}

impl PlausibilityStructure {
    pub fn conditionable(&self) -> bool {
        self.conditioning.is_some()
    }

    pub fn is_zero(&self, v: &Value) -> bool {
        *v == self.zero
    }

    /// The feasibility structure ({t,f}, ∨, ∧).
    pub fn feasibility() -> PlausibilityStructure {
        PlausibilityStructure {
            name: "feasibility".into(),
            carrier: Carrier::Boolean,
            elim: or_op(),
            comb: and_op(),
            zero: Value::Bool(false),
            one: Value::Bool(true),
            order: Order::boolean(),
            conditioning: Some(Conditioning::new(|num, _| num.clone(), |_| Value::Bool(true))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct UtilityStructure {
    pub carrier: Carrier,
    pub comb: Operator,
    pub one: Value,
    pub order: Order,
}

/// Plausibility structure, utility monoid and the semimodule operators
/// (⊕_u, ⊗_pu) tying them together.
#[derive(Clone, Debug)]
pub struct ExpectedUtilityStructure {
    pub name: String,
    pub spec: StructureSpec,
    pub plaus: PlausibilityStructure,
    pub util: UtilityStructure,
    pub elim_u: Operator,
    pub zero_u: Value,
    pub comb_pu: Operator,
    pub ax1: bool,
    pub ax2: bool,
}

impl ExpectedUtilityStructure {
    pub fn conditionable(&self) -> bool {
        self.plaus.conditionable()
    }

    /// Whether min/max over utilities is well defined.
    pub fn queryable(&self) -> bool {
        self.util.order.is_total()
    }

    /// Replaces ⪯_u by a total refinement supplied by the caller.
    pub fn with_utility_order(mut self, order: Order) -> ExpectedUtilityStructure {
        self.util.order = order;
        self
    }

    pub fn p_contains(&self, v: &Value) -> bool {
        self.plaus.carrier.contains(v)
    }

    pub fn u_contains(&self, v: &Value) -> bool {
        self.util.carrier.contains(v)
    }
}

/// Canonical conditioning max{p | num = p ⊗_p den}.
pub fn cond_div(num: &Value, den: &Value, s: &PlausibilityStructure) -> Result<Value, AlgebraError> {
    let c = s.conditioning.as_ref().ok_or_else(|| AlgebraError::NotConditionable(s.name.clone()))?;
    if s.is_zero(den) {
        return Err(AlgebraError::UndefinedConditioning);
    }
    if !s.order.leq(num, den) {
        return Err(AlgebraError::Domain(format!("{num} is not below {den}")));
    }
    Ok((c.divide)(num, den))
}

/// The unique p₀ whose n-fold ⊕_p-sum is 1_p.
pub fn uniform(n: usize, s: &PlausibilityStructure) -> Result<Value, AlgebraError> {
    let c = s.conditioning.as_ref().ok_or_else(|| AlgebraError::NotConditionable(s.name.clone()))?;
    if n == 0 {
        return Err(AlgebraError::Domain("uniform over an empty domain".into()));
    }
    Ok((c.uniform)(n))
}

/// `b ⋆ e`: e when b holds, ⋄ otherwise.
pub fn truncate(b: bool, e: &Value) -> Value {
    if b {
        e.clone()
    } else {
        Value::Unfeasible
    }
}

pub(crate) fn num_op(
    name: &str,
    f: impl Fn(&Num, &Num) -> Num + Send + Sync + 'static,
) -> Operator {
    Operator::new(name, move |a, b| Value::Num(f(a.num(), b.num())))
}

pub(crate) fn bool_op(name: &str, f: impl Fn(bool, bool) -> bool + Send + Sync + 'static) -> Operator {
    Operator::new(name, move |a, b| Value::Bool(f(a.boolean(), b.boolean())))
}

pub(crate) fn or_op() -> Operator {
    bool_op("or", |a, b| a || b)
}

pub(crate) fn and_op() -> Operator {
    bool_op("and", |a, b| a && b)
}

pub(crate) fn pair_op(a: Operator, b: Operator) -> Operator {
    let name = format!("({},{})", a.name(), b.name());
    Operator::new(name, move |x, y| {
        let (x1, x2) = x.as_pair().expect("pair value");
        let (y1, y2) = y.as_pair().expect("pair value");
        Value::pair(a.apply(x1, y1), b.apply(x2, y2))
    })
}
