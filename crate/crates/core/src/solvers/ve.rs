use crate::network::{Codomain, ScopedFunction};
use crate::query::{AnswerTable, Policy, QuantOp, Query};

use super::{check_queryable, opt_operator, record_rule, SolveError, SolveOptions, SolveResult, SolveStats};

/// Materializes the whole leaf function over every variable, then
/// eliminates the pairs from right to left.
pub fn ve_naive(q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    check_queryable(q)?;
    let n = q.network();
    let s = q.structure();
    let all: Vec<usize> = (0..n.num_vars()).collect();
    let size = n.state_space(&all).unwrap_or(usize::MAX);
    if size > opts.table_cap {
        return Err(SolveError::CapExceeded { size, cap: opts.table_cap });
    }
    let mut phi = ScopedFunction::from_fn(all.clone(), n.dims(&all), Codomain::Extended, |a| n.leaf_value(a));
    let mut policy = Policy::for_query(q);
    let mut stats = SolveStats { peak_table: phi.len(), ..SolveStats::default() };
    for i in (0..q.sov().len()).rev() {
        let pair = &q.sov().pairs[i];
        let op = match pair.op {
            QuantOp::Elim => s.elim_u.clone(),
            o => {
                if opts.record_policy {
                    let f = &phi;
                    record_rule(q, &mut policy, i, |g| f.eval(g).clone());
                }
                opt_operator(o, &s.util.order)
            }
        };
        phi = phi.eliminate(&pair.vars, &op);
        stats.eliminations += pair.vars.len() as u64;
        stats.elimination_order.extend(&pair.vars);
    }
    let answer = AnswerTable { vars: phi.scope().to_vec(), dims: phi.dims().to_vec(), entries: phi.into_table() };
    debug_assert_eq!(answer.vars, q.free_vars());
    Ok(SolveResult { answer, policy, stats })
}
