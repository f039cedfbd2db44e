//! Seeded generators of small valid networks and queries.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{Carrier, ExpectedUtilityStructure, PlausibilityStructure, Value};
use crate::network::{advance, validate_network, NetworkBuilder, PfuNetwork, VarId, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub min_vars: usize,
    pub max_vars: usize,
    pub max_domain: usize,
    pub max_factors: usize,
    /// Chance that an earlier component becomes a parent.
    pub parent_prob: f64,
    /// Chance that a decision component gets a feasibility factor.
    pub feasibility_prob: f64,
    /// Allow a prefix of decision variables to stay free.
    pub free_vars: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            min_vars: 2,
            max_vars: 8,
            max_domain: 3,
            max_factors: 10,
            parent_prob: 0.4,
            feasibility_prob: 0.7,
            free_vars: true,
        }
    }
}

/// A small element of `c`, drawn from a coarse grid so that ties occur.
pub fn small_value<R: Rng + ?Sized>(c: &Carrier, rng: &mut R) -> Value {
    match c {
        Carrier::Boolean => Value::Bool(rng.gen()),
        Carrier::Scale(k) => Value::int(rng.gen_range(0..*k as i64)),
        Carrier::NonNegRational => {
            if rng.gen_bool(0.3) {
                Value::ratio(rng.gen_range(0..7), 2)
            } else {
                Value::int(rng.gen_range(0..6))
            }
        }
        Carrier::RationalNegInf => {
            if rng.gen_bool(0.05) {
                Value::neg_inf()
            } else {
                Value::int(rng.gen_range(-3..10))
            }
        }
        Carrier::UnitInterval => Value::ratio(rng.gen_range(0..=4), 4),
        Carrier::ExtNatural => {
            if rng.gen_bool(0.1) {
                Value::pos_inf()
            } else {
                Value::int(rng.gen_range(0..5))
            }
        }
        Carrier::Product(a, b) => Value::pair(small_value(a, rng), small_value(b, rng)),
    }
}

/// A table over `size` cells whose ⊕_p-sum is 1_p.
///
/// Idempotent ⊕_p (max, min, ∨) gets a random grid table with one cell
/// forced to 1_p; probabilities are integer weights divided by their sum.
pub fn normalized_table<R: Rng + ?Sized>(s: &PlausibilityStructure, size: usize, rng: &mut R) -> Vec<Value> {
    let idempotent = s.elim.apply(&s.one, &s.one) == s.one;
    if idempotent {
        let mut t: Vec<Value> = (0..size).map(|_| small_value(&s.carrier, rng)).collect();
        t[rng.gen_range(0..size)] = s.one.clone();
        t
    } else {
        let mut w: Vec<i64> = (0..size).map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..5) }).collect();
        if w.iter().all(|&x| x == 0) {
            w[rng.gen_range(0..size)] = 1;
        }
        let total: i64 = w.iter().sum();
        w.into_iter().map(|x| Value::ratio(x, total)).collect()
    }
}

/// A random network on `structure` that passes validation.
pub fn random_network<R: Rng + ?Sized>(
    structure: Arc<ExpectedUtilityStructure>,
    params: &RandomParams,
    rng: &mut R,
) -> PfuNetwork {
    let s = structure.clone();
    let mut b = NetworkBuilder::new(structure);
    let nv = rng.gen_range(params.min_vars..=params.max_vars);
    let mut sizes = Vec::with_capacity(nv);
    let labels = ["a", "b", "c", "d", "e", "f"];
    for i in 0..nv {
        let kind = if rng.gen_bool(0.5) { VarKind::Decision } else { VarKind::Environment };
        let d = rng.gen_range(1..=params.max_domain.min(labels.len()));
        let prefix = if kind == VarKind::Decision { "d" } else { "e" };
        b.variable(&format!("{prefix}{i}"), kind, &labels[..d]);
        sizes.push(d);
    }

    // Components: runs of one or two same-kind variables, in id order.
    let mut comps: Vec<(Vec<VarId>, VarKind)> = Vec::new();
    let mut i = 0;
    while i < nv {
        let kind = b.variables()[i].kind;
        let mut vars = vec![i];
        if i + 1 < nv && b.variables()[i + 1].kind == kind && rng.gen_bool(0.3) {
            vars.push(i + 1);
        }
        i += vars.len();
        comps.push((vars, kind));
    }
    let mut parents_of: Vec<Vec<usize>> = Vec::new();
    for (c, (vars, _)) in comps.iter().enumerate() {
        let parents: Vec<usize> = (0..c).filter(|_| rng.gen_bool(params.parent_prob)).collect();
        b.component(&format!("c{c}"), vars, &parents);
        parents_of.push(parents);
    }

    let mut factors = 0;
    let space = |scope: &[VarId]| scope.iter().map(|&v| sizes[v]).product::<usize>();
    for (c, (vars, kind)) in comps.iter().enumerate() {
        let pa: Vec<VarId> = parents_of[c].iter().flat_map(|&p| comps[p].0.clone()).collect();
        let mut ctx: Vec<VarId> = pa.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        ctx.sort_unstable();
        let ctx_size = space(&ctx);
        let own_size = space(vars);
        let mut scope = ctx.clone();
        scope.extend_from_slice(vars);
        match kind {
            VarKind::Environment => {
                let mut table = Vec::with_capacity(ctx_size * own_size);
                for _ in 0..ctx_size {
                    table.extend(normalized_table(&s.plaus, own_size, rng));
                }
                b.plausibility(c, &scope, table).expect("generated plausibility");
                factors += 1;
            }
            VarKind::Decision => {
                if !rng.gen_bool(params.feasibility_prob) {
                    continue;
                }
                let mut table = Vec::with_capacity(ctx_size * own_size);
                for _ in 0..ctx_size {
                    let mut row: Vec<bool> = (0..own_size).map(|_| rng.gen_bool(0.7)).collect();
                    let k = rng.gen_range(0..own_size);
                    row[k] = true;
                    table.extend(row.into_iter().map(Value::Bool));
                }
                b.feasibility(c, &scope, table).expect("generated feasibility");
                factors += 1;
            }
        }
    }
    let n_util = rng.gen_range(1..=params.max_factors.saturating_sub(factors).clamp(1, 4));
    for _ in 0..n_util {
        let k = rng.gen_range(1..=nv.min(3));
        let mut scope: Vec<VarId> = (0..nv).collect();
        scope.shuffle(rng);
        scope.truncate(k);
        let size = space(&scope);
        let table = (0..size).map(|_| small_value(&s.util.carrier, rng)).collect();
        b.utility(&scope, table).expect("generated utility");
    }
    let n = b.build().expect("generated network is well formed");
    debug_assert!(validate_network(&n).is_valid(), "{}", validate_network(&n));
    n
}

/// A random valid operator-variable sequence: a random topological order of
/// the components cut into same-kind blocks, optionally with a prefix of
/// decision variables left free.
pub fn random_sov<R: Rng + ?Sized>(n: &PfuNetwork, params: &RandomParams, rng: &mut R) -> Sov {
    let dag = n.dag();
    let mut placed = vec![false; dag.len()];
    let mut order: Vec<VarId> = Vec::with_capacity(n.num_vars());
    for _ in 0..dag.len() {
        let ready: Vec<usize> = (0..dag.len())
            .filter(|&c| !placed[c] && dag.component(c).parents.iter().all(|&p| placed[p]))
            .collect();
        let &c = ready.choose(rng).expect("acyclic component graph");
        placed[c] = true;
        let mut vars = dag.component(c).vars.clone();
        vars.shuffle(rng);
        order.extend(vars);
    }
    let mut start = 0;
    if params.free_vars {
        let lead = order.iter().take_while(|&&v| n.variable(v).kind == VarKind::Decision).count();
        if lead > 0 && rng.gen_bool(0.3) {
            start = rng.gen_range(1..=lead);
        }
    }
    let mut sov = Sov::default();
    let mut block: Vec<VarId> = Vec::new();
    let flush = |block: &mut Vec<VarId>, sov: &mut Sov, rng: &mut R| {
        if block.is_empty() {
            return;
        }
        let op = match n.variable(block[0]).kind {
            VarKind::Environment => QuantOp::Elim,
            VarKind::Decision if rng.gen_bool(0.5) => QuantOp::Max,
            VarKind::Decision => QuantOp::Min,
        };
        sov.push(op, std::mem::take(block));
    };
    for &v in &order[start..] {
        if let Some(&last) = block.last() {
            if n.variable(last).kind != n.variable(v).kind || rng.gen_bool(0.4) {
                flush(&mut block, &mut sov, rng);
            }
        }
        block.push(v);
    }
    flush(&mut block, &mut sov, rng);
    sov
}

/// A validated random query on a random network.
pub fn random_query<R: Rng + ?Sized>(
    structure: Arc<ExpectedUtilityStructure>,
    params: &RandomParams,
    rng: &mut R,
) -> Query {
    let n = Arc::new(random_network(structure, params, rng));
    let sov = random_sov(&n, params, rng);
    validate_query(n, sov).expect("generated sequence respects the query conditions")
}

/// Random table over `dims` with entries from `c`.
pub fn random_table<R: Rng + ?Sized>(c: &Carrier, dims: &[usize], rng: &mut R) -> Vec<Value> {
    let mut out = Vec::new();
    let mut a = vec![0; dims.len()];
    loop {
        out.push(small_value(c, rng));
        if !advance(&mut a, dims) {
            break;
        }
    }
    out
}
