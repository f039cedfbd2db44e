use crate::algebra::{ExpectedUtilityStructure, Operator, Value};
use crate::network::{Codomain, ScopedFunction};
use crate::query::{Policy, QuantOp, Query};

use super::ax1::{bucket, evaluate, final_answer};
use super::{check_queryable, record_rule, SolveError, SolveOptions, SolveResult, SolveStats};

/// Variable elimination over plausibility/utility pairs `(p, v)`, where `v`
/// is the utility already weighted by `p`.
///
/// With ⊕_u = ⊗_u, pairs combine as
/// `(p1, v1) ⊗ (p2, v2) = (p1 ⊗_p p2, (p1 ⊗_pu v2) ⊗_u (p2 ⊗_pu v1))`
/// and environment variables are eliminated componentwise. A decision
/// variable can be eliminated inside its bucket when the bucket's
/// plausibility part does not depend on it; otherwise every remaining
/// function is merged first.
pub fn ve_ax2(q: &Query, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    let s = q.structure();
    if !s.ax2 {
        return Err(SolveError::NotAx2(s.name.clone()));
    }
    check_queryable(q)?;
    let n = q.network();
    let one = Value::pair(s.plaus.one.clone(), s.zero_u.clone());
    let comb = pair_combination(s);
    let elim = pair_elimination(s);

    let mut funcs: Vec<ScopedFunction> = Vec::new();
    funcs.extend(
        n.plausibilities()
            .iter()
            .map(|f| f.function.map(Codomain::Extended, |p| Value::pair(p.clone(), s.zero_u.clone()))),
    );
    funcs.extend(n.feasibilities().iter().map(|f| {
        f.function.map(Codomain::Extended, |b| if b.as_bool() == Some(true) { one.clone() } else { Value::Unfeasible })
    }));
    funcs.extend(
        n.utilities()
            .iter()
            .map(|f| f.map(Codomain::Extended, |u| Value::pair(s.plaus.one.clone(), u.clone()))),
    );

    let mut policy = Policy::for_query(q);
    let mut stats = SolveStats::default();
    for i in (0..q.sov().len()).rev() {
        let pair = &q.sov().pairs[i];
        if pair.op.is_decision() && opts.record_policy {
            let snapshot = &funcs;
            record_rule(q, &mut policy, i, |g| utility_part(&evaluate(snapshot, g, &comb, &one)));
        }
        for &x in &pair.vars {
            let dom = n.variable(x).size();
            let mut combined = bucket(&mut funcs, x, dom, &comb, &one, opts.table_cap, n)?;
            let result = match pair.op {
                QuantOp::Elim => combined.eliminate(&[x], &elim),
                op => {
                    let order = s.util.order.clone();
                    let maximize = op == QuantOp::Max;
                    if !plausibility_independent(&combined, x) {
                        for f in funcs.drain(..) {
                            combined = combined.combine(&f, &comb, Codomain::Extended)?;
                        }
                        let size = combined.len();
                        if size > opts.table_cap {
                            return Err(SolveError::CapExceeded { size, cap: opts.table_cap });
                        }
                    }
                    let pick = Operator::new(op.as_str(), move |a, b| {
                        let (va, vb) = (utility_part(a), utility_part(b));
                        let take_b = if maximize { order.gt(&vb, &va) } else { order.lt(&vb, &va) };
                        if take_b {
                            b.clone()
                        } else {
                            a.clone()
                        }
                    });
                    combined.eliminate(&[x], &pick)
                }
            };
            stats.peak_table = stats.peak_table.max(combined.len());
            funcs.push(result);
            stats.eliminations += 1;
            stats.elimination_order.push(x);
        }
    }
    let answer = final_answer(q, |g| utility_part(&evaluate(&funcs, g, &comb, &one)));
    Ok(SolveResult { answer, policy, stats })
}

fn utility_part(v: &Value) -> Value {
    match v {
        Value::Pair(_, u) => (**u).clone(),
        _ => Value::Unfeasible,
    }
}

fn pair_combination(s: &ExpectedUtilityStructure) -> Operator {
    let (pmul, pu, umul) = (s.plaus.comb.clone(), s.comb_pu.clone(), s.util.comb.clone());
    Operator::new("pair-combine", move |a, b| {
        let (p1, v1) = a.as_pair().expect("pair value");
        let (p2, v2) = b.as_pair().expect("pair value");
        Value::pair(pmul.apply(p1, p2), umul.apply(&pu.apply(p1, v2), &pu.apply(p2, v1)))
    })
}

fn pair_elimination(s: &ExpectedUtilityStructure) -> Operator {
    let (padd, uadd) = (s.plaus.elim.clone(), s.elim_u.clone());
    Operator::new("pair-eliminate", move |a, b| {
        let (p1, v1) = a.as_pair().expect("pair value");
        let (p2, v2) = b.as_pair().expect("pair value");
        Value::pair(padd.apply(p1, p2), uadd.apply(v1, v2))
    })
}

/// Whether, for every assignment of the other variables, the non-⋄ entries
/// share one plausibility part across the values of `x`.
fn plausibility_independent(f: &ScopedFunction, x: usize) -> bool {
    let pos = f.scope().iter().position(|&v| v == x).expect("bucket mentions x");
    let dims = f.dims();
    let stride: usize = dims[pos + 1..].iter().product();
    let dx = dims[pos];
    let table = f.table();
    for base in 0..table.len() {
        if !(base / stride).is_multiple_of(dx) {
            continue;
        }
        let mut seen: Option<&Value> = None;
        for k in 0..dx {
            if let Value::Pair(p, _) = &table[base + k * stride] {
                match seen {
                    None => seen = Some(p),
                    Some(q) if q != &**p => return false,
                    _ => {}
                }
            }
        }
    }
    true
}
