use std::sync::Arc;

use crate::algebra::{CatalogId, Num, Value};
use crate::network::{NetworkBuilder, VarId, VarKind};
use crate::query::{validate_query, BoundedQuery, QuantOp, Sov};

use super::{check_valid, EncodeError, Encoded, Quantifier, BOOL_DOMAIN};

/// A CNF formula over variables 1..=num_vars, optionally quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: usize,
    /// Clauses as DIMACS signed literals.
    pub clauses: Vec<Vec<i64>>,
    /// Outermost first. Variables missing from a prefix are existential
    /// and placed before it.
    pub prefix: Option<Vec<(Quantifier, usize)>>,
    pub threshold: Option<Value>,
}

impl CnfInstance {
    pub fn sat(num_vars: usize, clauses: Vec<Vec<i64>>) -> CnfInstance {
        CnfInstance { num_vars, clauses, prefix: None, threshold: None }
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        for (i, c) in self.clauses.iter().enumerate() {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.num_vars {
                    return Err(EncodeError::Malformed(format!("clause {i} has literal {l} outside 1..={}", self.num_vars)));
                }
            }
        }
        if let Some(prefix) = &self.prefix {
            let mut seen = vec![false; self.num_vars + 1];
            for &(_, v) in prefix {
                if v == 0 || v > self.num_vars {
                    return Err(EncodeError::Malformed(format!("prefix variable {v} outside 1..={}", self.num_vars)));
                }
                if seen[v] {
                    return Err(EncodeError::Malformed(format!("prefix quantifies variable {v} twice")));
                }
                seen[v] = true;
            }
        } else if self.threshold.is_some() {
            return Err(EncodeError::Malformed("a threshold needs a quantifier prefix".into()));
        }
        if let Some(t) = &self.threshold {
            let ok = t.as_num().is_some_and(|n| *n >= Num::zero() && *n <= Num::one());
            if !ok {
                return Err(EncodeError::Malformed(format!("threshold {t} is outside [0,1]")));
            }
        }
        Ok(())
    }

    /// The full prefix, with unquantified variables added as outermost ∃.
    pub fn full_prefix(&self) -> Vec<(Quantifier, usize)> {
        let Some(prefix) = &self.prefix else {
            return (1..=self.num_vars).map(|v| (Quantifier::Exists, v)).collect();
        };
        let mut out: Vec<(Quantifier, usize)> = (1..=self.num_vars)
            .filter(|v| !prefix.iter().any(|&(_, p)| p == *v))
            .map(|v| (Quantifier::Exists, v))
            .collect();
        out.extend_from_slice(prefix);
        out
    }

    /// Whether `assignment` (indexed by variable − 1) satisfies every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }
}

/// SAT without a prefix becomes (max, V) on bool-opt-conj. With a prefix
/// the formula becomes a prob-sat query whose ℜ variables share one
/// environment component carrying the constant 0.5^|ℜ|; ∃, ∀ and ℜ turn
/// into max, min and +. A prefix without ℜ and without a threshold is a
/// QBF and gets the threshold 1.
pub fn encode_cnf(c: &CnfInstance) -> Result<Encoded, EncodeError> {
    c.validate()?;
    let quantified = c.prefix.is_some();
    let id = if quantified { CatalogId::ProbSat } else { CatalogId::BoolOptConj };
    let mut b = NetworkBuilder::new(Arc::new(id.structure()));
    let prefix = c.full_prefix();
    let kind_of = |v: usize| {
        let q = prefix.iter().find(|&&(_, p)| p == v).map(|&(q, _)| q).unwrap_or(Quantifier::Exists);
        if q == Quantifier::Random {
            VarKind::Environment
        } else {
            VarKind::Decision
        }
    };
    let ids: Vec<VarId> = (1..=c.num_vars).map(|v| b.variable(&format!("x{v}"), kind_of(v), &BOOL_DOMAIN)).collect();
    let random: Vec<VarId> = (1..=c.num_vars).filter(|&v| kind_of(v) == VarKind::Environment).map(|v| ids[v - 1]).collect();
    for v in 1..=c.num_vars {
        if kind_of(v) == VarKind::Decision {
            b.component(&format!("c{v}"), &[ids[v - 1]], &[]);
        }
    }
    if !random.is_empty() {
        let env = b.typed_component("random", VarKind::Environment, &random, &[]);
        let k = random.len() as u32;
        let half = Value::Num(Num::ratio(1, 2i64.pow(k.min(62))));
        if k > 62 {
            return Err(EncodeError::Unsupported(format!("{k} random variables")));
        }
        b.plausibility(env, &[], vec![half])?;
    }
    for clause in &c.clauses {
        let mut scope: Vec<VarId> = clause.iter().map(|l| ids[l.unsigned_abs() as usize - 1]).collect();
        scope.sort_unstable();
        scope.dedup();
        let lits = clause.clone();
        let idx = ids.clone();
        let sat = |a: &[usize]| {
            lits.iter().any(|&l| {
                let v = idx[l.unsigned_abs() as usize - 1];
                let pos = scope.iter().position(|&s| s == v).expect("literal in scope");
                (a[pos] == 1) == (l > 0)
            })
        };
        if quantified {
            b.utility_fn(&scope, |a| Value::int(sat(a) as i64))?;
        } else {
            b.utility_fn(&scope, |a| Value::Bool(sat(a)))?;
        }
    }
    let n = Arc::new(b.build()?);
    check_valid(&n)?;

    let mut sov = Sov::default();
    for (q, v) in prefix {
        let op = match q {
            Quantifier::Exists => QuantOp::Max,
            Quantifier::Forall => QuantOp::Min,
            Quantifier::Random => QuantOp::Elim,
        };
        match sov.pairs.last_mut() {
            Some(last) if last.op == op => last.vars.push(ids[v - 1]),
            _ => sov.push(op, vec![ids[v - 1]]),
        }
    }
    let query = validate_query(n, sov)?;
    let threshold = match (&c.threshold, quantified, random_count(c)) {
        (Some(t), _, _) => Some(t.clone()),
        (None, true, 0) => Some(Value::int(1)),
        _ => None,
    };
    Ok(match threshold {
        Some(t) => Encoded::Bounded(BoundedQuery::new(query, t)?),
        None => Encoded::Query(query),
    })
}

fn random_count(c: &CnfInstance) -> usize {
    c.prefix.as_ref().map_or(0, |p| p.iter().filter(|(q, _)| *q == Quantifier::Random).count())
}
