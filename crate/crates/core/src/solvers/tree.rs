use crate::algebra::Value;
use crate::query::{Policy, QuantOp, Query};

use super::{answer_over_free, check_queryable, for_each_assignment, Optimizer, SolveError, SolveOptions, SolveResult, SolveStats};

struct Search<'a> {
    q: &'a Query,
    dims: Vec<Vec<usize>>,
    policy: Policy,
    record: bool,
    nodes: u64,
}

impl Search<'_> {
    fn value(&mut self, i: usize, global: &mut [usize]) -> Value {
        self.nodes += 1;
        let q = self.q;
        let n = q.network();
        let pairs = &q.sov().pairs;
        if i == pairs.len() {
            return n.leaf_value(global);
        }
        let pair = &pairs[i];
        let s = q.structure();
        let dims = self.dims[i].clone();
        match pair.op {
            QuantOp::Elim => {
                let mut acc = Value::Unfeasible;
                for_each_assignment(&pair.vars, &dims, global, |g, _| {
                    let v = self.value(i + 1, g);
                    acc = s.elim_u.eliminate(&acc, &v);
                });
                acc
            }
            op => {
                let mut opt = Optimizer::new(op, &s.util.order);
                for_each_assignment(&pair.vars, &dims, global, |g, a| {
                    let v = self.value(i + 1, g);
                    opt.offer(&v, a);
                });
                let (best, choice) = opt.finish();
                if self.record {
                    self.policy.record(i, global, choice);
                }
                best
            }
        }
    }
}

/// Depth-first evaluation of the operational answer, leftmost pair first.
pub fn tree_search(q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    check_queryable(q)?;
    let n = q.network();
    let mut search = Search {
        q,
        dims: q.sov().pairs.iter().map(|p| n.dims(&p.vars)).collect(),
        policy: Policy::for_query(q),
        record: opts.record_policy,
        nodes: 0,
    };
    let answer = answer_over_free::<SolveError>(q, |g| Ok(search.value(0, g)))?;
    Ok(SolveResult {
        answer,
        policy: search.policy,
        stats: SolveStats { nodes: search.nodes, ..SolveStats::default() },
    })
}

/// `Qo` of the suffix of the sequence starting at pair `i`, with the
/// variables to its left read from `global`. Nothing is recorded.
pub fn operational_value(q: &Query, i: usize, global: &mut [usize]) -> Value {
    let n = q.network();
    let mut search = Search {
        q,
        dims: q.sov().pairs.iter().map(|p| n.dims(&p.vars)).collect(),
        policy: Policy::default(),
        record: false,
        nodes: 0,
    };
    search.value(i, global)
}
