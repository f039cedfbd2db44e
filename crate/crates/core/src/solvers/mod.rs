//! Tree search, variable elimination and the decision-tree oracle.

mod ax1;
mod ax2;
mod conditioning;
mod oracle;
mod tree;
mod ve;

use thiserror::Error;

use crate::algebra::{AlgebraError, Operator, Order, Value};
use crate::network::{advance, NetworkError, VarId, DEFAULT_TABLE_CAP};
use crate::query::{AnswerTable, Choice, Policy, QuantOp, Query};

pub use ax1::ve_ax1;
pub use ax2::ve_ax2;
pub use conditioning::{completion, conditional, ConditionalDistribution};
pub use oracle::semantic_oracle;
pub use tree::{operational_value, tree_search};
pub use ve::ve_naive;

/// Default cap on the number of variables the oracle accepts.
pub const DEFAULT_ORACLE_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub table_cap: usize,
    pub oracle_var_cap: usize,
    pub record_policy: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { table_cap: DEFAULT_TABLE_CAP, oracle_var_cap: DEFAULT_ORACLE_CAP, record_policy: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Search nodes visited (tree search and oracle).
    pub nodes: u64,
    /// Variables eliminated (elimination solvers).
    pub eliminations: u64,
    /// Largest table built while eliminating a variable.
    pub peak_table: usize,
    /// Order in which quantified variables were eliminated.
    pub elimination_order: Vec<VarId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    pub answer: AnswerTable,
    pub policy: Policy,
    pub stats: SolveStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("table of {size} cells exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("{count} variables exceed the oracle cap of {cap}")]
    OracleCap { count: usize, cap: usize },
    #[error("structure `{0}` does not satisfy Ax1")]
    NotAx1(String),
    #[error("structure `{0}` does not satisfy Ax2")]
    NotAx2(String),
    #[error("structure `{0}` is not conditionable")]
    NotConditionable(String),
    #[error("structure `{0}` has no total utility order, min/max are undefined")]
    NonTotalOrder(String),
    #[error("network inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<NetworkError> for SolveError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::CapExceeded { size, cap } => SolveError::CapExceeded { size, cap },
            other => SolveError::Inconsistent(other.to_string()),
        }
    }
}

/// Which solver to run, by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Tree,
    Ve,
    VeAx1,
    VeAx2,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Tree, Algorithm::Ve, Algorithm::VeAx1, Algorithm::VeAx2, Algorithm::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tree => "tree",
            Algorithm::Ve => "ve",
            Algorithm::VeAx1 => "ve-ax1",
            Algorithm::VeAx2 => "ve-ax2",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Algorithm::ALL.iter().copied().find(|a| a.as_str() == s)
    }

    /// Whether the structure flags allow this solver on `q`.
    pub fn applicable(self, q: &Query) -> bool {
        let s = q.structure();
        match self {
            Algorithm::Tree | Algorithm::Ve => true,
            Algorithm::VeAx1 => s.ax1,
            Algorithm::VeAx2 => s.ax2,
            Algorithm::Oracle => s.conditionable(),
        }
    }

    pub fn run(self, q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
        match self {
            Algorithm::Tree => tree_search(q, opts),
            Algorithm::Ve => ve_naive(q, opts),
            Algorithm::VeAx1 => ve_ax1(q, opts),
            Algorithm::VeAx2 => ve_ax2(q, opts),
            Algorithm::Oracle => semantic_oracle(q, opts),
        }
    }
}

pub(crate) fn check_queryable(q: &Query) -> Result<(), SolveError> {
    let has_opt = q.sov().pairs.iter().any(|p| p.op.is_decision());
    if has_opt && !q.structure().queryable() {
        return Err(SolveError::NonTotalOrder(q.structure().name.clone()));
    }
    Ok(())
}

/// Running argmin/argmax with the shared tie rule: candidates arrive in
/// row-major order and only a strictly better value replaces the incumbent,
/// so ties go to the lexicographically smallest assignment. ⋄ is skipped.
pub(crate) struct Optimizer<'a> {
    maximize: bool,
    order: &'a Order,
    best: Value,
    arg: Option<Vec<usize>>,
}

impl<'a> Optimizer<'a> {
    pub(crate) fn new(op: QuantOp, order: &'a Order) -> Optimizer<'a> {
        Optimizer { maximize: op == QuantOp::Max, order, best: Value::Unfeasible, arg: None }
    }

    pub(crate) fn offer(&mut self, v: &Value, a: &[usize]) {
        if v.is_unfeasible() {
            return;
        }
        let better = self.best.is_unfeasible()
            || if self.maximize { self.order.gt(v, &self.best) } else { self.order.lt(v, &self.best) };
        if better {
            self.best = v.clone();
            self.arg = Some(a.to_vec());
        }
    }

    pub(crate) fn finish(self) -> (Value, Choice) {
        match self.arg {
            Some(a) => (self.best, Choice::Assign(a)),
            None => (Value::Unfeasible, Choice::Unfeasible),
        }
    }
}

/// min or max under ⪯_u as an elimination operator.
pub(crate) fn opt_operator(op: QuantOp, order: &Order) -> Operator {
    let order = order.clone();
    let maximize = op == QuantOp::Max;
    Operator::new(op.as_str(), move |a, b| {
        let take_b = if maximize { order.gt(b, a) } else { order.lt(b, a) };
        if take_b {
            b.clone()
        } else {
            a.clone()
        }
    })
}

/// Calls `f` for every assignment of `vars`, written into `global`.
pub(crate) fn for_each_assignment(vars: &[VarId], dims: &[usize], global: &mut [usize], mut f: impl FnMut(&mut [usize], &[usize])) {
    let mut a = vec![0; vars.len()];
    loop {
        for (k, &v) in vars.iter().enumerate() {
            global[v] = a[k];
        }
        f(global, &a);
        if !advance(&mut a, dims) {
            break;
        }
    }
}

/// Tabulates one answer cell per free-variable assignment.
pub(crate) fn answer_over_free<E>(
    q: &Query,
    mut cell: impl FnMut(&mut [usize]) -> Result<Value, E>,
) -> Result<AnswerTable, E> {
    let n = q.network();
    let vars = q.free_vars().to_vec();
    let dims = n.dims(&vars);
    let mut global = vec![0; n.num_vars()];
    let mut entries = Vec::with_capacity(AnswerTable::size_for(&dims));
    let mut err = None;
    for_each_assignment(&vars, &dims, &mut global, |g, _| {
        if err.is_none() {
            match cell(g) {
                Ok(v) => entries.push(v),
                Err(e) => err = Some(e),
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(AnswerTable { vars, dims, entries }),
    }
}

/// Records argmin/argmax rules of decision pair `i` from a function over
/// l(S_i) ∪ S_i (or a superset-free evaluator of it).
pub(crate) fn record_rule(
    q: &Query,
    policy: &mut Policy,
    i: usize,
    value_at: impl Fn(&[usize]) -> Value,
) {
    let n = q.network();
    let pair = &q.sov().pairs[i];
    let ctx = q.left_set(i).expect("pair index");
    let cdims = n.dims(&ctx);
    let sdims = n.dims(&pair.vars);
    let order = &q.structure().util.order;
    let mut global = vec![0; n.num_vars()];
    for_each_assignment(&ctx, &cdims, &mut global, |g, _| {
        let mut opt = Optimizer::new(pair.op, order);
        let mut g2 = g.to_vec();
        for_each_assignment(&pair.vars, &sdims, &mut g2, |g3, a| {
            opt.offer(&value_at(g3), a);
        });
        policy.record(i, g, opt.finish().1);
    });
}
