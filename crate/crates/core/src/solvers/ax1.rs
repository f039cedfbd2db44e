use crate::algebra::{Operator, Value};
use crate::network::{Codomain, ScopedFunction, VarId};
use crate::query::{AnswerTable, Policy, QuantOp, Query};

use super::{check_queryable, opt_operator, record_rule, SolveError, SolveOptions, SolveResult, SolveStats};

/// Bucket elimination for structures where plausibilities, utilities and
/// their combinations share one semiring. Feasibilities enter as 1 or ⋄.
pub fn ve_ax1(q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let s = q.structure();
    if !s.ax1 {
        return Err(SolveError::NotAx1(s.name.clone()));
    }
    check_queryable(q)?;
    let n = q.network();
    let one = s.util.one.clone();
    let comb = s.util.comb.clone();

    let mut funcs: Vec<ScopedFunction> = Vec::new();
    funcs.extend(n.plausibilities().iter().map(|f| f.function.clone().with_codomain(Codomain::Extended)));
    funcs.extend(n.feasibilities().iter().map(|f| {
        f.function.map(Codomain::Extended, |b| if b.as_bool() == Some(true) { one.clone() } else { Value::Unfeasible })
    }));
    funcs.extend(n.utilities().iter().map(|f| f.clone().with_codomain(Codomain::Extended)));

    let mut policy = Policy::for_query(q);
    let mut stats = SolveStats::default();
    for i in (0..q.sov().len()).rev() {
        let pair = &q.sov().pairs[i];
        let op = match pair.op {
            QuantOp::Elim => s.elim_u.clone(),
            o => {
                if opts.record_policy {
                    let snapshot = &funcs;
                    record_rule(q, &mut policy, i, |g| evaluate(snapshot, g, &comb, &one));
                }
                opt_operator(o, &s.util.order)
            }
        };
        for &x in &pair.vars {
            let combined = bucket(&mut funcs, x, n.variable(x).size(), &comb, &one, opts.table_cap, n)?;
            stats.peak_table = stats.peak_table.max(combined.len());
            funcs.push(combined.eliminate(&[x], &op));
            stats.eliminations += 1;
            stats.elimination_order.push(x);
        }
    }
    let answer = final_answer(q, |g| evaluate(&funcs, g, &comb, &one));
    Ok(SolveResult { answer, policy, stats })
}

/// Removes the functions mentioning `x` and returns their combination,
/// always scoped over `x`.
pub(crate) fn bucket(
    funcs: &mut Vec<ScopedFunction>,
    x: VarId,
    dom: usize,
    comb: &Operator,
    one: &Value,
    cap: usize,
    n: &crate::network::PfuNetwork,
) -> Result<ScopedFunction, SolveError> {
    let (inside, outside): (Vec<_>, Vec<_>) = funcs.drain(..).partition(|f| f.scope().contains(&x));
    *funcs = outside;
    let mut scope: Vec<VarId> = vec![x];
    for f in &inside {
        for &v in f.scope() {
            if !scope.contains(&v) {
                scope.push(v);
            }
        }
    }
    let size = n.state_space(&scope).unwrap_or(usize::MAX);
    if size > cap {
        return Err(SolveError::CapExceeded { size, cap });
    }
    let start = ScopedFunction::from_fn(vec![x], vec![dom], Codomain::Extended, |_| one.clone());
    let mut acc = start;
    for f in &inside {
        acc = acc.combine(f, comb, Codomain::Extended)?;
    }
    Ok(acc)
}

/// ⊗ of every function at a global assignment, ⋄ absorbing.
pub(crate) fn evaluate(funcs: &[ScopedFunction], g: &[usize], comb: &Operator, one: &Value) -> Value {
    funcs.iter().fold(one.clone(), |acc, f| comb.combine(&acc, f.eval(g)))
}

pub(crate) fn final_answer(q: &Query, cell: impl Fn(&[usize]) -> Value) -> AnswerTable {
    super::answer_over_free::<()>(q, |g| Ok(cell(g))).expect("infallible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::algebra::CatalogId;
    use crate::network::{NetworkBuilder, VarKind};
    use crate::query::{validate_query, Sov};
    use crate::solvers::tree_search;

    #[test]
    fn rejects_non_ax1() {
        let mut b = NetworkBuilder::new(Arc::new(CatalogId::ProbAdditive.structure()));
        let x = b.variable("x", VarKind::Decision, &["a", "b"]);
        b.component("cx", &[x], &[]);
        b.utility(&[x], vec![Value::int(3), Value::int(7)]).unwrap();
        let n = Arc::new(b.build().unwrap());
        let q = validate_query(n.clone(), Sov::from_names(&n, &[(QuantOp::Max, &["x"])]).unwrap()).unwrap();
        assert!(matches!(ve_ax1(&q, &SolveOptions::default()), Err(SolveError::NotAx1(_))));
        let r = tree_search(&q, &SolveOptions::default()).unwrap();
        assert_eq!(r.answer.value(), Some(&Value::int(7)));
    }
}
