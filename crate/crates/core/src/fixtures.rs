//! The business-dinner network and its four example queries.

use std::sync::Arc;

use crate::algebra::{CatalogId, Value};
use crate::encoders::{IdInstance, IdNode};
use crate::network::{NetworkBuilder, PfuNetwork, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov};

const T: usize = 0;
const F: usize = 1;

/// Peter's dinner with John and Mary on the prob-additive structure.
///
/// Variables in id order: bp_J, bp_M, mc, w, ep_J, ep_M. Booleans have
/// domain (t, f), mc has (fish, meat) and w has (white, red).
pub fn dinner() -> PfuNetwork {
    let mut b = NetworkBuilder::new(Arc::new(CatalogId::ProbAdditive.structure()));
    let bp_j = b.variable("bp_J", VarKind::Environment, &["t", "f"]);
    let bp_m = b.variable("bp_M", VarKind::Environment, &["t", "f"]);
    let mc = b.variable("mc", VarKind::Decision, &["fish", "meat"]);
    let w = b.variable("w", VarKind::Decision, &["white", "red"]);
    let ep_j = b.variable("ep_J", VarKind::Environment, &["t", "f"]);
    let ep_m = b.variable("ep_M", VarKind::Environment, &["t", "f"]);
    let c1 = b.component("c1", &[bp_j, bp_m], &[]);
    let c2 = b.component("c2", &[mc, w], &[]);
    let c3 = b.component("c3", &[ep_j], &[c1, c2]);
    let c4 = b.component("c4", &[ep_m], &[c1, c2]);
    let hard = |ok: bool| Value::int(ok as i64);

    b.plausibility(c1, &[bp_j, bp_m], vec![Value::int(0), Value::ratio(3, 5), Value::ratio(2, 5), Value::int(0)])
        .expect("P1");
    b.plausibility_fn(c1, &[bp_j, bp_m], |a| hard(a[0] != a[1])).expect("P2");
    b.plausibility_fn(c3, &[bp_j, ep_j], |a| hard(a[0] == T || a[1] == F)).expect("P3");
    b.plausibility_fn(c3, &[bp_j, w, ep_j], |a| hard(a[0] == F || ((a[2] == T) == (a[1] != 0)))).expect("P4");
    b.plausibility_fn(c4, &[bp_m, ep_m], |a| hard(a[0] == T || a[1] == F)).expect("P5");
    b.plausibility_fn(c4, &[bp_m, mc, ep_m], |a| hard(a[0] == F || ((a[2] == T) == (a[1] != 1)))).expect("P6");
    b.feasibility_fn(c2, &[mc, w], |a| !(a[0] == 0 && a[1] == 1)).expect("F1");
    b.utility_fn(&[bp_j, ep_j], |a| if a[0] == F || a[1] == T { Value::int(0) } else { Value::neg_inf() })
        .expect("U1");
    b.utility(&[ep_j], vec![Value::int(10), Value::int(0)]).expect("U2");
    b.utility(&[ep_m], vec![Value::int(50), Value::int(0)]).expect("U3");
    b.build().expect("dinner network is well formed")
}

/// Operator-variable sequence of dinner query `k` in 1..=4:
/// 1. (max,{mc,w})·(+,env)
/// 2. (+,{bp_J,bp_M})·(max,{mc,w})·(+,{ep_J,ep_M})
/// 3. (min,{mc})·(+,{bp_J,bp_M})·(max,{w})·(+,{ep_J,ep_M})
/// 4. (+,env) with mc and w free
pub fn dinner_sov(k: usize) -> Vec<(QuantOp, Vec<&'static str>)> {
    use QuantOp::{Elim, Max, Min};
    match k {
        1 => vec![(Max, vec!["mc", "w"]), (Elim, vec!["bp_J", "bp_M", "ep_J", "ep_M"])],
        2 => vec![(Elim, vec!["bp_J", "bp_M"]), (Max, vec!["mc", "w"]), (Elim, vec!["ep_J", "ep_M"])],
        3 => vec![(Min, vec!["mc"]), (Elim, vec!["bp_J", "bp_M"]), (Max, vec!["w"]), (Elim, vec!["ep_J", "ep_M"])],
        4 => vec![(Elim, vec!["bp_J", "bp_M", "ep_J", "ep_M"])],
        _ => panic!("dinner queries are numbered 1 to 4"),
    }
}

/// Validated dinner query `k` over `network`.
pub fn dinner_query(network: Arc<PfuNetwork>, k: usize) -> Query {
    let pairs = dinner_sov(k);
    let named: Vec<(QuantOp, &[&str])> = pairs.iter().map(|(op, v)| (*op, v.as_slice())).collect();
    let sov = Sov::from_names(&network, &named).expect("dinner variables");
    validate_query(network, sov).expect("dinner queries are valid")
}

/// The dinner problem as an influence diagram: John's presence is a chance
/// node, Mary's is its negation, the menu and wine are decisions observing
/// both, and the unfeasible fish with red wine gets utility −∞.
pub fn dinner_id() -> IdInstance {
    let r = Value::ratio;
    let b = |x: bool| Value::int(x as i64);
    let tf = ["t", "f"];
    let mut ep_j = Vec::new();
    for bj in [T, F] {
        for w in 0..2 {
            let present = bj == T && w == 1;
            ep_j.extend([b(present), b(!present)]);
        }
    }
    let mut ep_m = Vec::new();
    for bm in [T, F] {
        for mc in 0..2 {
            let present = bm == T && mc == 0;
            ep_m.extend([b(present), b(!present)]);
        }
    }
    IdInstance {
        nodes: vec![
            IdNode::chance("bp_J", &tf, &[], vec![r(3, 5), r(2, 5)]),
            IdNode::chance("bp_M", &tf, &[0], vec![b(false), b(true), b(true), b(false)]),
            IdNode::decision("mc", &["fish", "meat"], &[0, 1]),
            IdNode::decision("w", &["white", "red"], &[0, 1, 2]),
            IdNode::chance("ep_J", &tf, &[0, 3], ep_j),
            IdNode::chance("ep_M", &tf, &[1, 2], ep_m),
            IdNode::utility("U1", &[0, 4], vec![Value::int(0), Value::neg_inf(), Value::int(0), Value::int(0)]),
            IdNode::utility("U2", &[4], vec![Value::int(10), Value::int(0)]),
            IdNode::utility("U3", &[5], vec![Value::int(50), Value::int(0)]),
            IdNode::utility("F1", &[2, 3], vec![Value::int(0), Value::neg_inf(), Value::int(0), Value::int(0)]),
        ],
    }
}
