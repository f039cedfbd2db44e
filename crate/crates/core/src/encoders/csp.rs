use std::fmt;
use std::sync::Arc;

use crate::algebra::{vcsp_structure, Carrier, CatalogId, ExpectedUtilityStructure, Num, Valuation, Value};
use crate::network::{NetworkBuilder, VarId, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov, SovPair};

use super::{check_valid, EncodeError, Quantifier};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspVariable {
    pub name: String,
    pub domain: Vec<String>,
}

impl CspVariable {
    pub fn new(name: &str, domain: &[&str]) -> CspVariable {
        CspVariable { name: name.to_string(), domain: domain.iter().map(|s| s.to_string()).collect() }
    }
}

/// A table over `scope`, row-major. Hard constraints hold booleans, valued
/// ones hold valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub scope: Vec<usize>,
    pub table: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CspFlavor {
    Hard,
    Valued(Valuation),
    /// Quantifier per variable, outermost first; ∃ and ∀ only.
    Quantified(Vec<(Quantifier, usize)>),
    /// `probabilities[v]` is `Some` for stochastic variables; `order` lists
    /// every variable in stage order.
    Stochastic { probabilities: Vec<Option<Vec<Value>>>, order: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CspTask {
    Consistency,
    Solve,
    Count,
    Optimize,
    Quantified,
    StochasticPolicy,
}

impl CspTask {
    pub fn as_str(self) -> &'static str {
        match self {
            CspTask::Consistency => "consistency",
            CspTask::Solve => "solve",
            CspTask::Count => "count",
            CspTask::Optimize => "optimize",
            CspTask::Quantified => "quantified",
            CspTask::StochasticPolicy => "stochastic-policy",
        }
    }

    pub fn parse(s: &str) -> Option<CspTask> {
        [
            CspTask::Consistency,
            CspTask::Solve,
            CspTask::Count,
            CspTask::Optimize,
            CspTask::Quantified,
            CspTask::StochasticPolicy,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
    }
}

impl fmt::Display for CspTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspInstance {
    pub variables: Vec<CspVariable>,
    pub constraints: Vec<Constraint>,
    pub flavor: CspFlavor,
}

impl CspInstance {
    fn dims(&self, scope: &[usize]) -> Vec<usize> {
        scope.iter().map(|&v| self.variables[v].domain.len()).collect()
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let nv = self.variables.len();
        for v in &self.variables {
            if v.domain.is_empty() {
                return Err(EncodeError::Malformed(format!("variable `{}` has an empty domain", v.name)));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(v) = c.scope.iter().find(|&&v| v >= nv) {
                return Err(EncodeError::Malformed(format!("constraint {i} mentions unknown variable {v}")));
            }
            let size: usize = self.dims(&c.scope).iter().product();
            if size != c.table.len() {
                return Err(EncodeError::Malformed(format!("constraint {i} has {} entries, expected {size}", c.table.len())));
            }
            let hard = !matches!(self.flavor, CspFlavor::Valued(_));
            if hard && c.table.iter().any(|v| v.as_bool().is_none()) {
                return Err(EncodeError::Malformed(format!("hard constraint {i} holds a non-boolean entry")));
            }
        }
        match &self.flavor {
            CspFlavor::Quantified(prefix) => {
                if prefix.iter().any(|(q, _)| *q == Quantifier::Random) {
                    return Err(EncodeError::Malformed("quantified CSPs use ∃ and ∀ only".into()));
                }
                check_permutation(prefix.iter().map(|&(_, v)| v), nv, "prefix")?;
            }
            CspFlavor::Stochastic { probabilities, order } => {
                if probabilities.len() != nv {
                    return Err(EncodeError::Malformed("one probability entry per variable is required".into()));
                }
                check_permutation(order.iter().copied(), nv, "stage order")?;
                for (v, p) in probabilities.iter().enumerate() {
                    let Some(p) = p else { continue };
                    if p.len() != self.variables[v].domain.len() {
                        return Err(EncodeError::Malformed(format!("variable `{}` needs one probability per value", self.variables[v].name)));
                    }
                    let mut total = Num::zero();
                    for x in p {
                        match x.as_num() {
                            Some(n) if n.is_finite() && !n.is_negative() => total = total.add(n),
                            _ => return Err(EncodeError::Malformed(format!("bad probability {x}"))),
                        }
                    }
                    if total != Num::one() {
                        return Err(EncodeError::Normalization(format!(
                            "probabilities of `{}` sum to {total}",
                            self.variables[v].name
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn check_permutation(vars: impl Iterator<Item = usize>, n: usize, what: &str) -> Result<(), EncodeError> {
    let mut seen = vec![false; n];
    for v in vars {
        if v >= n || seen[v] {
            return Err(EncodeError::Malformed(format!("{what} repeats or misses variable {v}")));
        }
        seen[v] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(EncodeError::Malformed(format!("{what} does not cover every variable")));
    }
    Ok(())
}

/// Consistency and solving use (max, V) on bool-opt-conj, counting uses
/// (+, V) on prob-sat with the constant 1/|dom(V)|, valued CSPs (min, V) on
/// the valuation's structure, quantified CSPs min/max per quantifier and
/// stochastic CSPs one (+) or (max) pair per variable in stage order.
pub fn encode_csp(c: &CspInstance, task: CspTask) -> Result<Query, EncodeError> {
    c.validate()?;
    let incompatible = || EncodeError::Unsupported(format!("task {task} on this CSP flavor"));
    let structure: ExpectedUtilityStructure = match (task, &c.flavor) {
        (CspTask::Consistency | CspTask::Solve, CspFlavor::Hard) => CatalogId::BoolOptConj.structure(),
        (CspTask::Quantified, CspFlavor::Quantified(_)) => CatalogId::BoolOptConj.structure(),
        (CspTask::Count, CspFlavor::Hard) => CatalogId::ProbSat.structure(),
        (CspTask::Optimize, CspFlavor::Valued(v)) => vcsp_structure(v.clone())?,
        (CspTask::StochasticPolicy, CspFlavor::Stochastic { .. }) => CatalogId::ProbSat.structure(),
        _ => return Err(incompatible()),
    };
    let numeric = structure.plaus.carrier == Carrier::NonNegRational;
    let mut b = NetworkBuilder::new(Arc::new(structure));
    if let CspFlavor::Stochastic { probabilities, .. } = &c.flavor {
        let stochastic: Vec<bool> = probabilities.iter().map(|p| p.is_some()).collect();
        return encode_stochastic(c, b, &stochastic);
    }
    let kind = if task == CspTask::Count { VarKind::Environment } else { VarKind::Decision };
    let ids: Vec<VarId> = c
        .variables
        .iter()
        .map(|v| {
            let dom: Vec<&str> = v.domain.iter().map(String::as_str).collect();
            b.variable(&v.name, kind, &dom)
        })
        .collect();
    let comp = b.component("V", &ids, &[]);
    if task == CspTask::Count {
        let size: usize = c.dims(&(0..c.variables.len()).collect::<Vec<_>>()).iter().product();
        b.plausibility(comp, &[], vec![Value::ratio(1, size as i64)])?;
    }
    add_constraints(c, &mut b, numeric)?;
    let n = Arc::new(b.build()?);
    check_valid(&n)?;
    let sov = match (&c.flavor, task) {
        (CspFlavor::Quantified(prefix), _) => {
            let mut sov = Sov::default();
            for &(q, v) in prefix {
                let op = if q == Quantifier::Forall { QuantOp::Min } else { QuantOp::Max };
                match sov.pairs.last_mut() {
                    Some(last) if last.op == op => last.vars.push(v),
                    _ => sov.push(op, vec![v]),
                }
            }
            sov
        }
        (_, CspTask::Count) => Sov::new(vec![SovPair { op: QuantOp::Elim, vars: ids }]),
        (_, CspTask::Optimize) => Sov::new(vec![SovPair { op: QuantOp::Min, vars: ids }]),
        _ => Sov::new(vec![SovPair { op: QuantOp::Max, vars: ids }]),
    };
    Ok(validate_query(n, sov)?)
}

fn add_constraints(c: &CspInstance, b: &mut NetworkBuilder, numeric: bool) -> Result<(), EncodeError> {
    for con in &c.constraints {
        let table = if numeric && !matches!(c.flavor, CspFlavor::Valued(_)) {
            con.table.iter().map(|v| Value::int(v.as_bool().map_or(0, i64::from))).collect()
        } else {
            con.table.clone()
        };
        b.utility(&con.scope, table)?;
    }
    Ok(())
}

fn encode_stochastic(c: &CspInstance, mut b: NetworkBuilder, stochastic: &[bool]) -> Result<Query, EncodeError> {
    let CspFlavor::Stochastic { probabilities, order } = &c.flavor else { unreachable!() };
    let mut comps = Vec::with_capacity(c.variables.len());
    for (i, v) in c.variables.iter().enumerate() {
        let dom: Vec<&str> = v.domain.iter().map(String::as_str).collect();
        let kind = if stochastic[i] { VarKind::Environment } else { VarKind::Decision };
        let id = b.variable(&v.name, kind, &dom);
        comps.push(b.component(&v.name, &[id], &[]));
    }
    for (v, p) in probabilities.iter().enumerate() {
        if let Some(p) = p {
            b.plausibility(comps[v], &[v], p.clone())?;
        }
    }
    add_constraints(c, &mut b, true)?;
    let n = Arc::new(b.build()?);
    check_valid(&n)?;
    let mut sov = Sov::default();
    for &v in order {
        sov.push(if stochastic[v] { QuantOp::Elim } else { QuantOp::Max }, vec![v]);
    }
    Ok(validate_query(n, sov)?)
}
