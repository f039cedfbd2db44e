use std::fmt;
use std::str::FromStr;

use super::structure::{
    and_op, bool_op, num_op, or_op, pair_op, Carrier, Conditioning, ExpectedUtilityStructure,
    Operator, Order, PlausibilityStructure, UtilityStructure,
};
use super::value::{Num, Value};
use super::AlgebraError;

/// The nine rows of the built-in catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogId {
    ProbAdditive,
    ProbSat,
    PossOptimistic,
    PossPessimistic,
    Kappa,
    BoolOptConj,
    BoolPessConj,
    BoolOptDisj,
    BoolPessDisj,
}

impl CatalogId {
    pub const ALL: [CatalogId; 9] = [
        CatalogId::ProbAdditive,
        CatalogId::ProbSat,
        CatalogId::PossOptimistic,
        CatalogId::PossPessimistic,
        CatalogId::Kappa,
        CatalogId::BoolOptConj,
        CatalogId::BoolPessConj,
        CatalogId::BoolOptDisj,
        CatalogId::BoolPessDisj,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogId::ProbAdditive => "prob-additive",
            CatalogId::ProbSat => "prob-sat",
            CatalogId::PossOptimistic => "poss-optimistic",
            CatalogId::PossPessimistic => "poss-pessimistic",
            CatalogId::Kappa => "kappa",
            CatalogId::BoolOptConj => "bool-opt-conj",
            CatalogId::BoolPessConj => "bool-pess-conj",
            CatalogId::BoolOptDisj => "bool-opt-disj",
            CatalogId::BoolPessDisj => "bool-pess-disj",
        }
    }

    /// 1-based row number in the catalog table.
    pub fn row(self) -> usize {
        CatalogId::ALL.iter().position(|c| *c == self).unwrap() + 1
    }

    pub fn structure(self) -> ExpectedUtilityStructure {
        build_row(self)
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| AlgebraError::UnknownStructure(s.to_string()))
    }
}

/// Valuation structures accepted by the valued-CSP construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// ℕ ∪ {∞} with +.
    Weighted,
    /// [0,1] with max.
    Fuzzy,
    /// {0..k} with a user table; 0 is the identity and k−1 the top.
    Table(Vec<Vec<usize>>),
}

/// Serializable description of a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureSpec {
    Catalog(CatalogId),
    Product(Box<StructureSpec>, Box<StructureSpec>),
    Vcsp(Valuation),
}

impl StructureSpec {
    pub fn build(&self) -> Result<ExpectedUtilityStructure, AlgebraError> {
        match self {
            StructureSpec::Catalog(id) => Ok(id.structure()),
            StructureSpec::Product(a, b) => Ok(product_structure(&a.build()?, &b.build()?)),
            StructureSpec::Vcsp(v) => vcsp_structure(v.clone()),
        }
    }
}

pub fn builtin_structure(id: &str) -> Result<ExpectedUtilityStructure, AlgebraError> {
    Ok(id.parse::<CatalogId>()?.structure())
}

fn probabilistic() -> PlausibilityStructure {
    PlausibilityStructure {
        name: "probability".into(),
        carrier: Carrier::NonNegRational,
        elim: num_op("+", |a, b| a.add(b)),
        comb: num_op("*", |a, b| a.mul(b)),
        zero: Value::int(0),
        one: Value::int(1),
        order: Order::numeric(),
        conditioning: Some(Conditioning::new(
            |num, den| Value::Num(num.num().div(den.num()).expect("finite nonzero divisor")),
            |n| Value::ratio(1, n as i64),
        )),
    }
}

fn possibilistic() -> PlausibilityStructure {
    PlausibilityStructure {
        name: "possibility".into(),
        carrier: Carrier::UnitInterval,
        elim: num_op("max", |a, b| a.max_of(b)),
        comb: num_op("min", |a, b| a.min_of(b)),
        zero: Value::int(0),
        one: Value::int(1),
        order: Order::numeric(),
        conditioning: Some(Conditioning::new(
            |num, den| if num.num() < den.num() { num.clone() } else { Value::int(1) },
            |_| Value::int(1),
        )),
    }
}

fn kappa() -> PlausibilityStructure {
    PlausibilityStructure {
        name: "kappa".into(),
        carrier: Carrier::ExtNatural,
        elim: num_op("min", |a, b| a.min_of(b)),
        comb: num_op("+", |a, b| a.add(b)),
        zero: Value::pos_inf(),
        one: Value::int(0),
        order: Order::reversed_numeric(),
        conditioning: Some(Conditioning::new(|num, den| Value::Num(num.num().sub(den.num())), |_| Value::int(0))),
    }
}

fn boolean() -> PlausibilityStructure {
    PlausibilityStructure { name: "boolean".into(), ..PlausibilityStructure::feasibility() }
}

fn implies() -> Operator {
    bool_op("->", |p, u| !p || u)
}

fn build_row(id: CatalogId) -> ExpectedUtilityStructure {
    let spec = super::StructureSpec::Catalog(id);
    let name = id.as_str().to_string();
    let eu = |plaus, util, elim_u, zero_u, comb_pu, ax1, ax2| ExpectedUtilityStructure {
        name: name.clone(),
        spec: spec.clone(),
        plaus,
        util,
        elim_u,
        zero_u,
        comb_pu,
        ax1,
        ax2,
    };
    let bool_util = |comb: Operator, one: bool| UtilityStructure {
        carrier: Carrier::Boolean,
        comb,
        one: Value::Bool(one),
        order: Order::boolean(),
    };
    match id {
        CatalogId::ProbAdditive => eu(
            probabilistic(),
            UtilityStructure {
                carrier: Carrier::RationalNegInf,
                comb: num_op("+", |a, b| a.add(b)),
                one: Value::int(0),
                order: Order::numeric(),
            },
            num_op("+", |a, b| a.add(b)),
            Value::int(0),
            num_op("*", |p, u| p.mul(u)),
            false,
            true,
        ),
        CatalogId::ProbSat => eu(
            probabilistic(),
            UtilityStructure {
                carrier: Carrier::NonNegRational,
                comb: num_op("*", |a, b| a.mul(b)),
                one: Value::int(1),
                order: Order::numeric(),
            },
            num_op("+", |a, b| a.add(b)),
            Value::int(0),
            num_op("*", |p, u| p.mul(u)),
            true,
            false,
        ),
        CatalogId::PossOptimistic => eu(
            possibilistic(),
            UtilityStructure {
                carrier: Carrier::UnitInterval,
                comb: num_op("min", |a, b| a.min_of(b)),
                one: Value::int(1),
                order: Order::numeric(),
            },
            num_op("max", |a, b| a.max_of(b)),
            Value::int(0),
            num_op("min", |p, u| p.min_of(u)),
            true,
            false,
        ),
        CatalogId::PossPessimistic => eu(
            possibilistic(),
            UtilityStructure {
                carrier: Carrier::UnitInterval,
                comb: num_op("min", |a, b| a.min_of(b)),
                one: Value::int(1),
                order: Order::numeric(),
            },
            num_op("min", |a, b| a.min_of(b)),
            Value::int(1),
            num_op("max(1-p,u)", |p, u| Num::one().sub(p).max_of(u)),
            false,
            true,
        ),
        CatalogId::Kappa => eu(
            kappa(),
            UtilityStructure {
                carrier: Carrier::ExtNatural,
                comb: num_op("+", |a, b| a.add(b)),
                one: Value::int(0),
                order: Order::reversed_numeric(),
            },
            num_op("min", |a, b| a.min_of(b)),
            Value::pos_inf(),
            num_op("+", |p, u| p.add(u)),
            true,
            false,
        ),
        CatalogId::BoolOptConj => {
            eu(boolean(), bool_util(and_op(), true), or_op(), Value::Bool(false), and_op(), true, false)
        }
        CatalogId::BoolPessConj => {
            eu(boolean(), bool_util(and_op(), true), and_op(), Value::Bool(true), implies(), false, true)
        }
        CatalogId::BoolOptDisj => {
            eu(boolean(), bool_util(or_op(), false), or_op(), Value::Bool(false), and_op(), false, true)
        }
        CatalogId::BoolPessDisj => {
            eu(boolean(), bool_util(or_op(), false), and_op(), Value::Bool(true), implies(), false, false)
        }
    }
}

/// Componentwise product of two structures. The utility order is the
/// componentwise (partial) order; see [`ExpectedUtilityStructure::with_utility_order`].
pub fn product_structure(a: &ExpectedUtilityStructure, b: &ExpectedUtilityStructure) -> ExpectedUtilityStructure {
    let conditioning = match (&a.plaus.conditioning, &b.plaus.conditioning) {
        (Some(_), Some(_)) => {
            let (pa, pb) = (a.plaus.clone(), b.plaus.clone());
            let (ua, ub) = (a.plaus.clone(), b.plaus.clone());
            Some(Conditioning::new(
                move |num, den| {
                    let (n1, n2) = num.as_pair().expect("pair value");
                    let (d1, d2) = den.as_pair().expect("pair value");
                    Value::pair(divide_or_one(n1, d1, &pa), divide_or_one(n2, d2, &pb))
                },
                move |n| {
                    Value::pair(
                        super::uniform(n, &ua).expect("conditionable"),
                        super::uniform(n, &ub).expect("conditionable"),
                    )
                },
            ))
        }
        _ => None,
    };
    let plaus = PlausibilityStructure {
        name: format!("{}x{}", a.plaus.name, b.plaus.name),
        carrier: Carrier::Product(Box::new(a.plaus.carrier.clone()), Box::new(b.plaus.carrier.clone())),
        elim: pair_op(a.plaus.elim.clone(), b.plaus.elim.clone()),
        comb: pair_op(a.plaus.comb.clone(), b.plaus.comb.clone()),
        zero: Value::pair(a.plaus.zero.clone(), b.plaus.zero.clone()),
        one: Value::pair(a.plaus.one.clone(), b.plaus.one.clone()),
        order: Order::componentwise(a.plaus.order.clone(), b.plaus.order.clone()),
        conditioning,
    };
    let util = UtilityStructure {
        carrier: Carrier::Product(Box::new(a.util.carrier.clone()), Box::new(b.util.carrier.clone())),
        comb: pair_op(a.util.comb.clone(), b.util.comb.clone()),
        one: Value::pair(a.util.one.clone(), b.util.one.clone()),
        order: Order::componentwise(a.util.order.clone(), b.util.order.clone()),
    };
    ExpectedUtilityStructure {
        name: format!("product({},{})", a.name, b.name),
        spec: StructureSpec::Product(Box::new(a.spec.clone()), Box::new(b.spec.clone())),
        plaus,
        util,
        elim_u: pair_op(a.elim_u.clone(), b.elim_u.clone()),
        zero_u: Value::pair(a.zero_u.clone(), b.zero_u.clone()),
        comb_pu: pair_op(a.comb_pu.clone(), b.comb_pu.clone()),
        ax1: a.ax1 && b.ax1,
        ax2: a.ax2 && b.ax2,
    }
}

// A pair denominator may be zero in one component only; that component's
// conditional is then undefined and any value satisfies the defining
// equation, so 1 is used.
fn divide_or_one(n: &Value, d: &Value, s: &PlausibilityStructure) -> Value {
    if s.is_zero(d) {
        s.one.clone()
    } else {
        super::cond_div(n, d, s).unwrap_or_else(|_| s.one.clone())
    }
}

/// Structure for valued CSPs: boolean plausibilities, utilities in the
/// valuation set with ⊕_u = min, and ⊗_pu sending `false` to the top
/// element.
pub fn vcsp_structure(v: Valuation) -> Result<ExpectedUtilityStructure, AlgebraError> {
    let (carrier, comb, bottom, top) = match &v {
        Valuation::Weighted => (
            Carrier::ExtNatural,
            num_op("+", |a, b| a.add(b)),
            Value::int(0),
            Value::pos_inf(),
        ),
        Valuation::Fuzzy => (
            Carrier::UnitInterval,
            num_op("max", |a, b| a.max_of(b)),
            Value::int(0),
            Value::int(1),
        ),
        Valuation::Table(rows) => {
            let k = rows.len();
            if k == 0 || rows.iter().any(|r| r.len() != k || r.iter().any(|&x| x >= k)) {
                return Err(AlgebraError::Domain("valuation table must be k x k over 0..k".into()));
            }
            let table = rows.clone();
            let comb = Operator::new("table", move |a, b| {
                let i = index_of(a.num());
                let j = index_of(b.num());
                Value::int(table[i][j] as i64)
            });
            (Carrier::Scale(k), comb, Value::int(0), Value::int(k as i64 - 1))
        }
    };
    let top_pu = top.clone();
    let name = match &v {
        Valuation::Weighted => "vcsp-weighted",
        Valuation::Fuzzy => "vcsp-fuzzy",
        Valuation::Table(_) => "vcsp-table",
    };
    Ok(ExpectedUtilityStructure {
        name: name.into(),
        spec: StructureSpec::Vcsp(v),
        plaus: boolean(),
        util: UtilityStructure { carrier, comb, one: bottom, order: Order::numeric() },
        elim_u: num_op("min", |a, b| a.min_of(b)),
        zero_u: top,
        comb_pu: Operator::new("vcsp-pu", move |p, u| if p.boolean() { u.clone() } else { top_pu.clone() }),
        ax1: false,
        ax2: false,
    })
}

fn index_of(n: &Num) -> usize {
    n.as_rational()
        .and_then(|r| num_traits::ToPrimitive::to_usize(&r.to_integer()))
        .expect("scale element")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cond_div, uniform};

    #[test]
    fn ids_round_trip() {
        for id in CatalogId::ALL {
            assert_eq!(id.as_str().parse::<CatalogId>().unwrap(), id);
            assert_eq!(builtin_structure(id.as_str()).unwrap().name, id.as_str());
        }
        assert!(builtin_structure("bogus").is_err());
    }

    #[test]
    fn row_one_operators() {
        let s = builtin_structure("prob-additive").unwrap();
        assert_eq!(s.plaus.zero, Value::int(0));
        assert_eq!(s.plaus.one, Value::int(1));
        assert_eq!(s.zero_u, Value::int(0));
        assert_eq!(s.util.one, Value::int(0));
        assert_eq!(s.comb_pu.apply(&Value::ratio(1, 2), &Value::int(10)), Value::int(5));
        assert_eq!(s.util.comb.apply(&Value::int(3), &Value::neg_inf()), Value::neg_inf());
        assert_eq!(s.comb_pu.apply(&Value::int(0), &Value::neg_inf()), Value::int(0));
    }

    #[test]
    fn pessimistic_possibility() {
        let s = builtin_structure("poss-pessimistic").unwrap();
        let v = s.comb_pu.apply(&Value::ratio(3, 10), &Value::ratio(1, 2));
        assert_eq!(v, Value::ratio(7, 10));
        assert_eq!(s.elim_u.apply(&Value::ratio(1, 4), &Value::ratio(1, 2)), Value::ratio(1, 4));
        assert_eq!(s.zero_u, Value::int(1));
        assert_eq!(s.util.one, Value::int(1));
    }

    #[test]
    fn kappa_row() {
        let s = builtin_structure("kappa").unwrap();
        assert_eq!(s.plaus.zero, Value::pos_inf());
        assert_eq!(s.plaus.one, Value::int(0));
        assert_eq!(s.plaus.elim.apply(&Value::int(2), &Value::int(5)), Value::int(2));
        assert_eq!(s.plaus.comb.apply(&Value::int(2), &Value::int(5)), Value::int(7));
        assert!(s.util.order.gt(&Value::int(1), &Value::int(4)));
    }

    #[test]
    fn axiom_flags_per_row() {
        let ax1: Vec<_> = CatalogId::ALL.iter().filter(|c| c.structure().ax1).map(|c| c.row()).collect();
        let ax2: Vec<_> = CatalogId::ALL.iter().filter(|c| c.structure().ax2).map(|c| c.row()).collect();
        assert_eq!(ax1, vec![2, 3, 5, 6]);
        assert_eq!(ax2, vec![1, 4, 7, 8]);
        assert!(CatalogId::ALL.iter().all(|c| c.structure().conditionable()));
    }

    #[test]
    fn conditioning_examples() {
        let prob = builtin_structure("prob-sat").unwrap().plaus;
        assert_eq!(cond_div(&Value::ratio(3, 10), &Value::ratio(3, 5), &prob).unwrap(), Value::ratio(1, 2));
        let kap = builtin_structure("kappa").unwrap().plaus;
        assert_eq!(cond_div(&Value::int(5), &Value::int(2), &kap).unwrap(), Value::int(3));
        let poss = builtin_structure("poss-optimistic").unwrap().plaus;
        assert_eq!(cond_div(&Value::ratio(4, 10), &Value::ratio(7, 10), &poss).unwrap(), Value::ratio(2, 5));
        assert_eq!(cond_div(&Value::ratio(7, 10), &Value::ratio(7, 10), &poss).unwrap(), Value::int(1));
        assert!(matches!(cond_div(&Value::int(0), &Value::int(0), &prob), Err(AlgebraError::UndefinedConditioning)));
        assert!(matches!(cond_div(&Value::int(1), &Value::ratio(1, 2), &prob), Err(AlgebraError::Domain(_))));
        assert!(matches!(cond_div(&Value::int(1), &Value::int(3), &kap), Err(AlgebraError::Domain(_))));
    }

    #[test]
    fn uniform_examples() {
        let prob = builtin_structure("prob-additive").unwrap().plaus;
        assert_eq!(uniform(4, &prob).unwrap(), Value::ratio(1, 4));
        let poss = builtin_structure("poss-pessimistic").unwrap().plaus;
        assert_eq!(uniform(7, &poss).unwrap(), Value::int(1));
        let kap = builtin_structure("kappa").unwrap().plaus;
        assert_eq!(uniform(3, &kap).unwrap(), Value::int(0));
        assert!(uniform(0, &kap).is_err());
    }

    #[test]
    fn product_examples() {
        let a = builtin_structure("prob-sat").unwrap();
        let b = builtin_structure("poss-optimistic").unwrap();
        let p = product_structure(&a, &b);
        let x = Value::pair(Value::ratio(1, 2), Value::ratio(1, 3));
        let y = Value::pair(Value::ratio(1, 4), Value::ratio(1, 5));
        assert_eq!(p.plaus.comb.apply(&x, &y), Value::pair(Value::ratio(1, 8), Value::ratio(1, 5)));
        assert_eq!(p.plaus.one, Value::pair(Value::int(1), Value::int(1)));
        assert!(p.conditionable());
        assert!(!p.queryable());
        let pp = product_structure(&builtin_structure("prob-additive").unwrap(), &builtin_structure("prob-additive").unwrap());
        assert_eq!(pp.plaus.comb.apply(&x, &y), Value::pair(Value::ratio(1, 8), Value::ratio(1, 15)));
        let refined = pp.with_utility_order(Order::lexicographic(Order::numeric(), Order::numeric()));
        assert!(refined.queryable());
    }

    #[test]
    fn vcsp_pu_absorbs_to_top() {
        let s = vcsp_structure(Valuation::Weighted).unwrap();
        assert_eq!(s.comb_pu.apply(&Value::Bool(false), &Value::int(3)), Value::pos_inf());
        assert_eq!(s.comb_pu.apply(&Value::Bool(true), &Value::int(3)), Value::int(3));
        assert_eq!(s.zero_u, Value::pos_inf());
        assert!(vcsp_structure(Valuation::Table(vec![vec![0, 1], vec![1]])).is_err());
    }
}
