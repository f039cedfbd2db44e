//! Queries over PFU networks, answer tables and policies.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ExpectedUtilityStructure, Value};
use crate::network::{table_size, PfuNetwork, VarId, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantOp {
    Min,
    Max,
    /// ⊕_u
    Elim,
}

impl QuantOp {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantOp::Min => "min",
            QuantOp::Max => "max",
            QuantOp::Elim => "elim",
        }
    }

    pub fn parse(s: &str) -> Option<QuantOp> {
        match s {
            "min" => Some(QuantOp::Min),
            "max" => Some(QuantOp::Max),
            "elim" | "sum" | "+" => Some(QuantOp::Elim),
            _ => None,
        }
    }

    pub fn is_decision(self) -> bool {
        self != QuantOp::Elim
    }
}

impl fmt::Display for QuantOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SovPair {
    pub op: QuantOp,
    pub vars: Vec<VarId>,
}

/// Operator-variables sequence, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sov {
    pub pairs: Vec<SovPair>,
}

impl Sov {
    pub fn new(pairs: Vec<SovPair>) -> Sov {
        Sov { pairs }
    }

    pub fn push(&mut self, op: QuantOp, vars: Vec<VarId>) {
        self.pairs.push(SovPair { op, vars });
    }

    pub fn from_names(n: &PfuNetwork, pairs: &[(QuantOp, &[&str])]) -> Result<Sov, QueryError> {
        let mut sov = Sov::default();
        for (op, names) in pairs {
            let vars = names
                .iter()
                .map(|name| n.var_id(name).ok_or_else(|| QueryError::UnknownVariable(name.to_string())))
                .collect::<Result<_, _>>()?;
            sov.push(*op, vars);
        }
        Ok(sov)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("condition 1 violated: variables {0:?} are quantified more than once")]
    NotDisjoint(Vec<String>),
    #[error("condition 2 violated: pair {index} applies {op} to {kind} variables {vars:?}")]
    OperatorKind { index: usize, op: QuantOp, kind: VarKind, vars: Vec<String> },
    #[error("condition 3 violated: environment variables {0:?} are free")]
    FreeEnvironment(Vec<String>),
    #[error("condition 4 violated: `{ancestor}` is an ancestor of `{descendant}` of the other kind but appears to its right")]
    Causality { ancestor: String, descendant: String },
    #[error("pair index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("threshold {0} is not a utility value")]
    Threshold(String),
}

impl QueryError {
    /// Which numbered query condition the error reports, if any.
    pub fn condition(&self) -> Option<u8> {
        match self {
            QueryError::NotDisjoint(_) => Some(1),
            QueryError::OperatorKind { .. } => Some(2),
            QueryError::FreeEnvironment(_) => Some(3),
            QueryError::Causality { .. } => Some(4),
            _ => None,
        }
    }
}

/// A validated query. Each pair's variables are kept in declaration order.
#[derive(Clone, Debug)]
pub struct Query {
    network: Arc<PfuNetwork>,
    sov: Sov,
    free_vars: Vec<VarId>,
}

impl Query {
    pub fn network(&self) -> &Arc<PfuNetwork> {
        &self.network
    }

    pub fn structure(&self) -> &ExpectedUtilityStructure {
        self.network.structure()
    }

    pub fn sov(&self) -> &Sov {
        &self.sov
    }

    pub fn free_vars(&self) -> &[VarId] {
        &self.free_vars
    }

    /// l(S_i), sorted.
    pub fn left_set(&self, i: usize) -> Result<Vec<VarId>, QueryError> {
        if i >= self.sov.len() {
            return Err(QueryError::IndexOutOfRange(i));
        }
        let mut out = self.free_vars.clone();
        for p in &self.sov.pairs[..i] {
            out.extend(&p.vars);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// r(S_i), sorted.
    pub fn right_set(&self, i: usize) -> Result<Vec<VarId>, QueryError> {
        if i >= self.sov.len() {
            return Err(QueryError::IndexOutOfRange(i));
        }
        let mut out: Vec<VarId> = self.sov.pairs[i + 1..].iter().flat_map(|p| p.vars.iter().copied()).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Position used by the causality condition: 0 for free variables,
    /// pair index + 1 otherwise.
    pub fn position(&self, v: VarId) -> usize {
        self.sov.pairs.iter().position(|p| p.vars.contains(&v)).map_or(0, |i| i + 1)
    }
}

pub fn left_set(q: &Query, i: usize) -> Result<Vec<VarId>, QueryError> {
    q.left_set(i)
}

pub fn right_set(q: &Query, i: usize) -> Result<Vec<VarId>, QueryError> {
    q.right_set(i)
}

/// Checks the four query conditions and computes the free variables.
pub fn validate_query(n: Arc<PfuNetwork>, sov: Sov) -> Result<Query, QueryError> {
    let name = |v: VarId| n.variable(v).name.clone();
    let nv = n.num_vars();
    let mut seen = vec![false; nv];
    let mut repeated = Vec::new();
    for p in &sov.pairs {
        for &v in &p.vars {
            if v >= nv {
                return Err(QueryError::UnknownVariable(format!("#{v}")));
            }
            if seen[v] {
                repeated.push(name(v));
            }
            seen[v] = true;
        }
    }
    if !repeated.is_empty() {
        return Err(QueryError::NotDisjoint(repeated));
    }
    for (index, p) in sov.pairs.iter().enumerate() {
        let wrong = if p.op.is_decision() { VarKind::Environment } else { VarKind::Decision };
        let bad: Vec<String> = p.vars.iter().filter(|&&v| n.variable(v).kind == wrong).map(|&v| name(v)).collect();
        if !bad.is_empty() {
            return Err(QueryError::OperatorKind { index, op: p.op, kind: wrong, vars: bad });
        }
    }
    let free_vars: Vec<VarId> = (0..nv).filter(|&v| !seen[v]).collect();
    let free_env: Vec<String> =
        free_vars.iter().filter(|&&v| n.variable(v).kind == VarKind::Environment).map(|&v| name(v)).collect();
    if !free_env.is_empty() {
        return Err(QueryError::FreeEnvironment(free_env));
    }
    let mut sov = sov;
    for p in &mut sov.pairs {
        p.vars.sort_unstable();
    }
    let q = Query { network: n.clone(), sov, free_vars };

    let dag = n.dag();
    let comp: Vec<Option<usize>> = (0..nv).map(|v| dag.component_of(v)).collect();
    let desc: Vec<Vec<bool>> = (0..dag.len()).map(|c| dag.descendants(c)).collect();
    let pos: Vec<usize> = (0..nv).map(|v| q.position(v)).collect();
    for x in 0..nv {
        for y in 0..nv {
            if n.variable(x).kind == n.variable(y).kind {
                continue;
            }
            let (Some(cx), Some(cy)) = (comp[x], comp[y]) else { continue };
            if desc[cx][cy] && pos[x] > pos[y] {
                return Err(QueryError::Causality { ancestor: name(x), descendant: name(y) });
            }
        }
    }
    Ok(q)
}

/// A query together with a utility threshold θ.
#[derive(Clone, Debug)]
pub struct BoundedQuery {
    pub query: Query,
    pub threshold: Value,
}

impl BoundedQuery {
    pub fn new(query: Query, threshold: Value) -> Result<BoundedQuery, QueryError> {
        if !query.structure().u_contains(&threshold) {
            return Err(QueryError::Threshold(threshold.to_string()));
        }
        Ok(BoundedQuery { query, threshold })
    }
}

/// Answer as a function of the free variables; ⋄ marks unfeasible cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerTable {
    pub vars: Vec<VarId>,
    pub dims: Vec<usize>,
    pub entries: Vec<Value>,
}

impl AnswerTable {
    pub fn scalar(v: Value) -> AnswerTable {
        AnswerTable { vars: Vec::new(), dims: Vec::new(), entries: vec![v] }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.dims).fold(0, |acc, (&a, &d)| acc * d + a)
    }

    pub fn get(&self, local: &[usize]) -> &Value {
        &self.entries[self.index_of(local)]
    }

    /// The single entry of an answer with no free variables.
    pub fn value(&self) -> Option<&Value> {
        (self.entries.len() == 1 && self.vars.is_empty()).then(|| &self.entries[0])
    }

    pub fn size_for(dims: &[usize]) -> usize {
        table_size(dims).expect("answer table size")
    }
}

/// Boolean table: t where the entry reaches θ, f elsewhere (⋄ included).
pub fn apply_threshold(a: &AnswerTable, theta: &Value, s: &ExpectedUtilityStructure) -> AnswerTable {
    AnswerTable {
        vars: a.vars.clone(),
        dims: a.dims.clone(),
        entries: a
            .entries
            .iter()
            .map(|e| Value::Bool(!e.is_unfeasible() && s.util.order.leq(theta, e)))
            .collect(),
    }
}

/// What a decision rule prescribes at one context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Choice {
    /// Domain indices of the decision variables, in declaration order.
    Assign(Vec<usize>),
    /// No feasible extension exists at this context.
    Unfeasible,
}

/// Decision rule of one (min|max, S) pair, keyed by assignments of l(S).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionRule {
    pub pair_index: usize,
    pub context: Vec<VarId>,
    pub decision: Vec<VarId>,
    pub entries: BTreeMap<Vec<usize>, Choice>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    pub rules: Vec<DecisionRule>,
}

impl Policy {
    /// Empty rules for every decision pair of `q`.
    pub fn for_query(q: &Query) -> Policy {
        let rules = q
            .sov()
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.op.is_decision())
            .map(|(i, p)| DecisionRule {
                pair_index: i,
                context: q.left_set(i).unwrap(),
                decision: p.vars.clone(),
                entries: BTreeMap::new(),
            })
            .collect();
        Policy { rules }
    }

    pub fn rule(&self, pair_index: usize) -> Option<&DecisionRule> {
        self.rules.iter().find(|r| r.pair_index == pair_index)
    }

    pub fn rule_mut(&mut self, pair_index: usize) -> Option<&mut DecisionRule> {
        self.rules.iter_mut().find(|r| r.pair_index == pair_index)
    }

    /// Records a choice; the context is read off a global assignment.
    pub fn record(&mut self, pair_index: usize, global: &[usize], choice: Choice) {
        if let Some(r) = self.rule_mut(pair_index) {
            let ctx: Vec<usize> = r.context.iter().map(|&v| global[v]).collect();
            r.entries.insert(ctx, choice);
        }
    }

    /// Every context recorded here is recorded identically in `other`.
    /// Returns the first disagreement.
    pub fn agrees_on(&self, other: &Policy) -> Result<(), PolicyMismatch> {
        for r in &self.rules {
            let Some(o) = other.rule(r.pair_index) else {
                return Err(PolicyMismatch { pair_index: r.pair_index, context: Vec::new(), left: None, right: None });
            };
            for (ctx, c) in &r.entries {
                let oc = o.entries.get(ctx);
                if oc != Some(c) {
                    return Err(PolicyMismatch {
                        pair_index: r.pair_index,
                        context: ctx.clone(),
                        left: Some(c.clone()),
                        right: oc.cloned(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn num_entries(&self) -> usize {
        self.rules.iter().map(|r| r.entries.len()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyMismatch {
    pub pair_index: usize,
    pub context: Vec<usize>,
    pub left: Option<Choice>,
    pub right: Option<Choice>,
}

impl fmt::Display for PolicyMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair {} context {:?}: {:?} vs {:?}", self.pair_index, self.context, self.left, self.right)
    }
}
