use std::collections::HashMap;

use crate::algebra::{cond_div, Value};
use crate::network::{ScopedFunction, VarId};
use crate::query::{Policy, QuantOp, Query};

use super::conditioning::{completion, ConditionalDistribution};
use super::{answer_over_free, check_queryable, for_each_assignment, Optimizer, SolveError, SolveOptions, SolveResult, SolveStats};

/// Marginals of the completed joints, cached per variable set.
struct Marginals {
    joint_p: ConditionalDistribution,
    joint_f: ConditionalDistribution,
    p: HashMap<Vec<VarId>, ScopedFunction>,
    f: HashMap<Vec<VarId>, ScopedFunction>,
}

impl Marginals {
    fn plausibility(&mut self, vars: &[VarId]) -> &ScopedFunction {
        let joint = &self.joint_p;
        self.p.entry(vars.to_vec()).or_insert_with(|| joint.marginal(vars))
    }

    fn feasibility(&mut self, vars: &[VarId]) -> &ScopedFunction {
        let joint = &self.joint_f;
        self.f.entry(vars.to_vec()).or_insert_with(|| joint.marginal(vars))
    }
}

struct Step {
    context: Vec<VarId>,
    extended: Vec<VarId>,
    dims: Vec<usize>,
}

struct Oracle<'a> {
    q: &'a Query,
    steps: Vec<Step>,
    marginals: Marginals,
    policy: Policy,
    record: bool,
    nodes: u64,
}

impl Oracle<'_> {
    fn conditional_p(&mut self, i: usize, g: &[usize]) -> Result<Option<Value>, SolveError> {
        let s = &self.q.structure().plaus;
        let den = self.marginals.plausibility(&self.steps[i].context).eval(g).clone();
        if s.is_zero(&den) {
            return Ok(None);
        }
        let num = self.marginals.plausibility(&self.steps[i].extended).eval(g).clone();
        Ok(Some(cond_div(&num, &den, s)?))
    }

    fn feasible(&mut self, vars_at: usize, g: &[usize], extended: bool) -> bool {
        let vars = if extended { &self.steps[vars_at].extended } else { &self.steps[vars_at].context };
        let vars = vars.clone();
        self.marginals.feasibility(&vars).eval(g).as_bool() == Some(true)
    }

    fn value(&mut self, i: usize, g: &mut [usize]) -> Result<Value, SolveError> {
        self.nodes += 1;
        let q = self.q;
        let n = q.network();
        if i == q.sov().len() {
            return Ok(n.utility_at(g));
        }
        let pair = &q.sov().pairs[i];
        let s = q.structure();
        let dims = self.steps[i].dims.clone();
        let mut err = None;
        match pair.op {
            QuantOp::Elim => {
                let mut acc = Value::Unfeasible;
                let mut seen = false;
                for_each_assignment(&pair.vars, &dims, g, |g, _| {
                    if err.is_some() {
                        return;
                    }
                    let p = match self.conditional_p(i, g) {
                        Ok(Some(p)) => p,
                        Ok(None) => {
                            err = Some(SolveError::Inconsistent(format!(
                                "conditional plausibility of pair {i} is undefined in a reached context"
                            )));
                            return;
                        }
                        Err(e) => {
                            err = Some(e);
                            return;
                        }
                    };
                    if s.plaus.is_zero(&p) {
                        return;
                    }
                    seen = true;
                    match self.value(i + 1, g) {
                        Ok(v) => acc = s.elim_u.eliminate(&acc, &s.comb_pu.combine(&p, &v)),
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                if !seen {
                    return Err(SolveError::Inconsistent(format!("no plausible assignment for pair {i}")));
                }
                Ok(acc)
            }
            op => {
                if !self.feasible(i, g, false) {
                    return Err(SolveError::Inconsistent(format!(
                        "conditional feasibility of pair {i} is undefined in a reached context"
                    )));
                }
                let mut opt = Optimizer::new(op, &s.util.order);
                for_each_assignment(&pair.vars, &dims, g, |g, a| {
                    if err.is_some() || !self.feasible(i, g, true) {
                        return;
                    }
                    match self.value(i + 1, g) {
                        Ok(v) => opt.offer(&v, a),
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                let (best, choice) = opt.finish();
                if best.is_unfeasible() {
                    return Err(SolveError::Inconsistent(format!("no feasible decision for pair {i}")));
                }
                if self.record {
                    self.policy.record(i, g, choice);
                }
                Ok(best)
            }
        }
    }
}

/// Semantic answer computed on the decision tree built from conditional
/// plausibilities and feasibilities of the completed joints.
pub fn semantic_oracle(q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let n = q.network();
    let s = q.structure();
    if !s.conditionable() {
        return Err(SolveError::NotConditionable(s.name.clone()));
    }
    check_queryable(q)?;
    if n.num_vars() > opts.oracle_var_cap {
        return Err(SolveError::OracleCap { count: n.num_vars(), cap: opts.oracle_var_cap });
    }
    let (joint_p, joint_f) = completion(n, opts.table_cap)?;
    let steps = (0..q.sov().len())
        .map(|i| {
            let context = q.left_set(i).expect("pair index");
            let mut extended = context.clone();
            extended.extend_from_slice(&q.sov().pairs[i].vars);
            extended.sort_unstable();
            Step { context, extended, dims: n.dims(&q.sov().pairs[i].vars) }
        })
        .collect();
    let mut oracle = Oracle {
        q,
        steps,
        marginals: Marginals { joint_p, joint_f, p: HashMap::new(), f: HashMap::new() },
        policy: Policy::for_query(q),
        record: opts.record_policy,
        nodes: 0,
    };
    let free = q.free_vars().to_vec();
    let answer = answer_over_free::<SolveError>(q, |g| {
        if oracle.marginals.feasibility(&free).eval(g).as_bool() != Some(true) {
            return Ok(Value::Unfeasible);
        }
        oracle.value(0, g)
    })?;
    Ok(SolveResult {
        answer,
        policy: oracle.policy,
        stats: SolveStats { nodes: oracle.nodes, ..SolveStats::default() },
    })
}
