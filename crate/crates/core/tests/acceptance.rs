//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails for a reason not covered by its analysis.
//!
//! All comparisons are exact over rationals; the only tolerances are the
//! runtime limits below.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pfu::algebra::{check_axioms, product_structure, CatalogId, Num, Value};
use pfu::encoders::{
    encode_bn, encode_cnf, encode_csp, encode_id, encode_mdp, BnInstance, BnNode, BnTask, CnfInstance, Constraint,
    CspFlavor, CspInstance, CspTask, CspVariable, IdInstance, IdNode, MdpFlavor, MdpInstance, Quantifier,
};
use pfu::fixtures::{dinner, dinner_id, dinner_query};
use pfu::network::{
    validate_network, Clause, Codomain, Component, ComponentDag, Factor, PfuNetwork, ScopedFunction, VarKind,
    Variable,
};
use pfu::query::{apply_threshold, Choice, Query};
use pfu::random::{random_query, RandomParams};
use pfu::solvers::{operational_value, semantic_oracle, tree_search, ve_ax1, ve_ax2, ve_naive, SolveOptions};

/// Per dinner query, all four solvers together.
const DINNER_LIMIT: Duration = Duration::from_secs(1);
/// Whole of criterion 2.
const CROSS_CHECK_LIMIT: Duration = Duration::from_secs(300);
const SEED: u64 = 0;
const RANDOM_QUERIES_PER_ROW: usize = 200;
const VE_QUERIES_PER_ROW: usize = 100;
const AXIOM_SAMPLES: usize = 1000;

enum Status {
    Pass,
    /// Red, with an analysis that the suite has verified.
    Explained,
    Fail,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>) -> Outcome {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail: detail.into() }
    }
}

type Rat = BigRational;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn to_rat(v: &Value) -> Option<Rat> {
    match v.as_num()? {
        Num::Finite(r) => Some(r.clone()),
        _ => None,
    }
}

fn from_rat(r: &Rat) -> Value {
    Value::Num(Num::Finite(r.clone()))
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn solve_tree(q: &Query) -> pfu::solvers::SolveResult {
    tree_search(q, &opts()).expect("tree search")
}

/// Random weights normalized to a distribution; some entries may be 0.
fn distribution(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rat> {
    loop {
        let w: Vec<i64> = (0..k).map(|_| if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..5) }).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| rat(x, total)).collect();
        }
    }
}

/// Mixed-radix enumeration of all assignments over `dims`.
fn assignments(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dims.len()]];
    if dims.contains(&0) {
        return Vec::new();
    }
    loop {
        let mut a = out.last().unwrap().clone();
        let mut i = dims.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            a[i] += 1;
            if a[i] < dims[i] {
                break;
            }
            a[i] = 0;
        }
        out.push(a);
    }
}

fn row_index(vals: &[usize], dims: &[usize]) -> usize {
    vals.iter().zip(dims).fold(0, |acc, (&v, &d)| acc * d + v)
}

// ---------------------------------------------------------------- criterion 1

/// Joint of the dinner environment given (mc, w), hand-derived: John and
/// Mary attend exclusively with P(John) = 3/5; John comes iff the wine is
/// red, Mary iff the menu is fish.
fn dinner_by_hand(mc: usize, w: usize) -> Option<Option<Rat>> {
    if mc == 0 && w == 1 {
        return None;
    }
    // None marks −∞
    let mut total: Option<Rat> = Some(Rat::zero());
    for (p, john) in [(rat(3, 5), true), (rat(2, 5), false)] {
        let mary = !john;
        let ep_j = john && w == 1;
        let ep_m = mary && mc == 0;
        let u = if john && !ep_j { None } else { Some(Rat::from_integer((10 * ep_j as i64 + 50 * ep_m as i64).into())) };
        total = match (total, u) {
            (Some(t), Some(u)) => Some(t + p * u),
            _ => None,
        };
    }
    Some(total)
}

fn criterion_1() -> Outcome {
    let n = Arc::new(dinner());
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut answers = Vec::new();
    for k in 1..=4 {
        let q = dinner_query(n.clone(), k);
        let start = Instant::now();
        let t = solve_tree(&q);
        let others = [ve_naive(&q, &opts()), ve_ax2(&q, &opts()), semantic_oracle(&q, &opts())];
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        if elapsed > DINNER_LIMIT {
            problems.push(format!("query {k} took {elapsed:?}"));
        }
        for r in others {
            match r {
                Ok(r) if r.answer == t.answer => {}
                _ => problems.push(format!("query {k}: solvers disagree")),
            }
        }
        answers.push(t);
    }
    if answers[0].answer.value() != Some(&Value::int(6)) {
        problems.push("query 1 is not 6".into());
    }
    let rule = answers[0].policy.rule(0).and_then(|r| r.entries.get(&vec![]).cloned());
    if rule != Some(Choice::Assign(vec![1, 1])) {
        problems.push("query 1 does not choose meat and red".into());
    }
    if answers[1].answer.value() != Some(&Value::int(26)) {
        problems.push("query 2 is not 26".into());
    }
    if let Some(r) = answers[1].policy.rule(1) {
        for bj in 0..2 {
            for bm in 0..2 {
                let want = if bj == 0 && bm == 1 { vec![1, 1] } else { vec![0, 0] };
                if r.entries.get(&vec![bj, bm]) != Some(&Choice::Assign(want)) {
                    problems.push(format!("query 2 rule at ({bj},{bm})"));
                }
            }
        }
    } else {
        problems.push("query 2 has no decision rule".into());
    }
    if answers[2].answer.value() != Some(&Value::neg_inf()) {
        problems.push("query 3 is not -inf".into());
    }
    let hand: Vec<Value> = (0..2)
        .flat_map(|mc| (0..2).map(move |w| (mc, w)))
        .map(|(mc, w)| match dinner_by_hand(mc, w) {
            None => Value::Unfeasible,
            Some(None) => Value::neg_inf(),
            Some(Some(r)) => from_rat(&r),
        })
        .collect();
    let expected = vec![Value::neg_inf(), Value::Unfeasible, Value::neg_inf(), Value::int(6)];
    if hand != expected || answers[3].answer.entries != expected {
        problems.push(format!("query 4 table {:?}", answers[3].answer.entries));
    }
    let detail = format!("answers 6, 26, -inf, [-inf, unfeasible, -inf, 6]; slowest query {slowest:?} (limit {DINNER_LIMIT:?})");
    if problems.is_empty() {
        Outcome::check(true, detail)
    } else {
        Outcome::check(false, problems.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 2

struct RowTally {
    row: CatalogId,
    queries: usize,
    answer_diffs: usize,
    ve_diffs: usize,
    policy_diffs: usize,
    unexplained: usize,
}

/// Compares the oracle's choice against the tree's at every recorded
/// context. A differing choice is explained when both reach the same
/// operational value, i.e. the oracle picked another optimal decision.
fn policy_differences(q: &Query, oracle: &pfu::query::Policy, tree: &pfu::query::Policy) -> (usize, usize) {
    let (mut diffs, mut unexplained) = (0, 0);
    for r in &oracle.rules {
        let Some(tr) = tree.rule(r.pair_index) else {
            unexplained += 1;
            continue;
        };
        for (ctx, c) in &r.entries {
            let tc = tr.entries.get(ctx);
            if tc == Some(c) {
                continue;
            }
            diffs += 1;
            let (Choice::Assign(a), Some(Choice::Assign(b))) = (c, tc) else {
                unexplained += 1;
                continue;
            };
            let value_of = |choice: &[usize]| {
                let mut g = vec![0; q.network().num_vars()];
                for (&v, &x) in r.context.iter().zip(ctx) {
                    g[v] = x;
                }
                for (&v, &x) in r.decision.iter().zip(choice) {
                    g[v] = x;
                }
                operational_value(q, r.pair_index + 1, &mut g)
            };
            if value_of(a) != value_of(b) {
                unexplained += 1;
            }
        }
    }
    (diffs, unexplained)
}

fn criterion_2() -> Outcome {
    let rows = [
        CatalogId::ProbAdditive,
        CatalogId::ProbSat,
        CatalogId::PossOptimistic,
        CatalogId::PossPessimistic,
        CatalogId::Kappa,
        CatalogId::BoolOptConj,
    ];
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut tallies = Vec::new();
    for row in rows {
        let s = Arc::new(row.structure());
        let mut t = RowTally { row, queries: 0, answer_diffs: 0, ve_diffs: 0, policy_diffs: 0, unexplained: 0 };
        for _ in 0..RANDOM_QUERIES_PER_ROW {
            let q = random_query(s.clone(), &RandomParams::default(), &mut rng);
            t.queries += 1;
            let tree = solve_tree(&q);
            let ve = ve_naive(&q, &opts()).expect("ve");
            if ve.answer != tree.answer || ve.policy != tree.policy {
                t.ve_diffs += 1;
            }
            let oracle = semantic_oracle(&q, &opts()).expect("oracle");
            if oracle.answer != tree.answer {
                t.answer_diffs += 1;
                continue;
            }
            let (d, u) = policy_differences(&q, &oracle.policy, &tree.policy);
            t.policy_diffs += (d > 0) as usize;
            t.unexplained += u;
        }
        tallies.push(t);
    }
    let elapsed = start.elapsed();
    let summary: Vec<String> = tallies
        .iter()
        .map(|t| format!("{} {}/{} policy", t.row.as_str(), t.policy_diffs, t.queries))
        .collect();
    let answers_ok = tallies.iter().all(|t| t.answer_diffs == 0 && t.ve_diffs == 0);
    let fast = elapsed <= CROSS_CHECK_LIMIT;
    let policy_ok = tallies.iter().all(|t| t.policy_diffs == 0);
    let drowning_only = tallies.iter().all(|t| {
        t.unexplained == 0 && (t.policy_diffs == 0 || matches!(t.row, CatalogId::PossOptimistic | CatalogId::PossPessimistic))
    });
    let base = format!(
        "{} queries, answers all equal: {answers_ok}; {}; {elapsed:.1?} (limit {CROSS_CHECK_LIMIT:?})",
        RANDOM_QUERIES_PER_ROW * rows.len(),
        summary.join(", ")
    );
    if answers_ok && fast && policy_ok {
        return Outcome::check(true, base);
    }
    if answers_ok && fast && drowning_only {
        // Possibilistic ⊗_pu = min or max(1−p, u) is not strictly monotone:
        // a zero-plausibility or fully drowned branch makes two decisions
        // tie in the oracle's conditioned semantics while tree search keeps
        // the first optimum. Every differing choice was re-evaluated and is
        // optimal, so only the tie-breaking differs.
        return Outcome {
            status: Status::Explained,
            detail: format!(
                "{base}. Policy differences occur only on the possibilistic rows, where drowning by the non-strict \
                 plausibility-utility combination creates ties; every differing oracle choice reaches the same \
                 operational value as the tree's choice"
            ),
        };
    }
    Outcome::check(false, base)
}

// ---------------------------------------------------------------- criteria 3 and 6

/// Induced width of the primal graph of `q`'s network along `order`.
fn induced_width(q: &Query, order: &[usize]) -> usize {
    let n = q.network();
    let nv = n.num_vars();
    let mut adj = vec![vec![false; nv]; nv];
    let scopes = n
        .plausibilities()
        .iter()
        .chain(n.feasibilities())
        .map(|f| f.function.scope())
        .chain(n.utilities().iter().map(|u| u.scope()));
    for s in scopes {
        for &a in s {
            for &b in s {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    let mut gone = vec![false; nv];
    let mut width = 0;
    for &x in order {
        let nbrs: Vec<usize> = (0..nv).filter(|&y| adj[x][y] && !gone[y]).collect();
        width = width.max(nbrs.len());
        for &a in &nbrs {
            for &b in &nbrs {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
        gone[x] = true;
    }
    width
}

struct VeTally {
    mismatches: Vec<String>,
    width_violations: Vec<String>,
    ax1_runs: usize,
    max_width: usize,
}

fn criteria_3_and_6() -> (Outcome, Outcome) {
    let ax1_rows = [CatalogId::ProbSat, CatalogId::PossOptimistic, CatalogId::Kappa, CatalogId::BoolOptConj];
    let ax2_rows = [CatalogId::ProbAdditive, CatalogId::PossPessimistic, CatalogId::BoolPessConj, CatalogId::BoolOptDisj];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut t = VeTally { mismatches: Vec::new(), width_violations: Vec::new(), ax1_runs: 0, max_width: 0 };
    for (rows, ax1) in [(&ax1_rows, true), (&ax2_rows, false)] {
        for &row in rows {
            let s = Arc::new(row.structure());
            for i in 0..VE_QUERIES_PER_ROW {
                let q = random_query(s.clone(), &RandomParams::default(), &mut rng);
                let tree = solve_tree(&q);
                let ve = if ax1 { ve_ax1(&q, &opts()) } else { ve_ax2(&q, &opts()) }.expect("ve");
                if ve.answer != tree.answer || ve.policy != tree.policy {
                    t.mismatches.push(format!("{} #{i}", row.as_str()));
                }
                if ax1 {
                    t.ax1_runs += 1;
                    let w = induced_width(&q, &ve.stats.elimination_order);
                    t.max_width = t.max_width.max(w);
                    let d = q.network().variables().iter().map(Variable::size).max().unwrap_or(1);
                    let bound = d.checked_pow(w as u32 + 1).unwrap_or(usize::MAX);
                    if ve.stats.peak_table > bound {
                        t.width_violations.push(format!("{} #{i}: {} > {d}^{}", row.as_str(), ve.stats.peak_table, w + 1));
                    }
                }
            }
        }
    }
    let c3 = Outcome::check(
        t.mismatches.is_empty(),
        if t.mismatches.is_empty() {
            format!("{} queries per row on 8 rows, answers and policies identical to tree search", VE_QUERIES_PER_ROW)
        } else {
            format!("mismatches: {}", t.mismatches.join(", "))
        },
    );
    let c6 = Outcome::check(
        t.width_violations.is_empty(),
        if t.width_violations.is_empty() {
            format!("{} Ax1 runs, peak table <= d^(w+1) in all, max induced width {}", t.ax1_runs, t.max_width)
        } else {
            t.width_violations.join(", ")
        },
    );
    (c3, c6)
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> Outcome {
    let mut failed = Vec::new();
    let mut structures: Vec<_> = CatalogId::ALL.iter().map(|c| c.structure()).collect();
    structures.push(product_structure(&CatalogId::ProbSat.structure(), &CatalogId::Kappa.structure()));
    for s in &structures {
        let report = check_axioms(s, &mut ChaCha8Rng::seed_from_u64(SEED), AXIOM_SAMPLES);
        if !report.all_passed() {
            failed.push(format!("{}: {}", s.name, report.failures().map(|c| c.axiom.as_str()).collect::<Vec<_>>().join(", ")));
        }
    }
    Outcome::check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} structures, {AXIOM_SAMPLES} samples each (boolean rows exhaustive), all axioms hold", structures.len())
        } else {
            failed.join("; ")
        },
    )
}

// ---------------------------------------------------------------- criterion 5

fn random_clauses(rng: &mut ChaCha8Rng, nv: usize) -> Vec<Vec<i64>> {
    let nc = rng.gen_range(1..=15);
    (0..nc)
        .map(|_| {
            let len = rng.gen_range(1..=3.min(nv));
            let mut vars: Vec<i64> = (1..=nv as i64).collect();
            vars.shuffle(rng);
            vars[..len].iter().map(|&v| if rng.gen_bool(0.5) { v } else { -v }).collect()
        })
        .collect()
}

/// Value of the quantifier prefix over the clauses, by full expansion.
fn prefix_value(c: &CnfInstance, prefix: &[(Quantifier, usize)], assign: &mut Vec<bool>) -> Rat {
    let Some((&(q, v), rest)) = prefix.split_first() else {
        return if c.satisfied_by(assign) { Rat::one() } else { Rat::zero() };
    };
    let mut branch = |x: bool| {
        assign[v - 1] = x;
        prefix_value(c, rest, assign)
    };
    let (a, b) = (branch(false), branch(true));
    match q {
        Quantifier::Exists => a.max(b),
        Quantifier::Forall => a.min(b),
        Quantifier::Random => (a + b) / BigInt::from(2),
    }
}

fn cnf_cases(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let thresholds = [rat(1, 4), rat(1, 2), rat(3, 4)];
    let total = 50;
    for i in 0..total {
        let nv = rng.gen_range(1..=10);
        let clauses = random_clauses(rng, nv);
        let mut order: Vec<usize> = (1..=nv).collect();
        order.shuffle(rng);
        let kind = i % 5;
        let prefix: Option<Vec<(Quantifier, usize)>> = match kind {
            0 => None,
            1 => Some(order.iter().map(|&v| (if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall }, v)).collect()),
            2 => Some(order.iter().map(|&v| (Quantifier::Random, v)).collect()),
            3 => {
                let k = rng.gen_range(0..=nv);
                Some(order.iter().enumerate().map(|(j, &v)| (if j < k { Quantifier::Exists } else { Quantifier::Random }, v)).collect())
            }
            _ => {
                let qs = [Quantifier::Exists, Quantifier::Forall, Quantifier::Random];
                Some(order.iter().map(|&v| (*qs.choose(rng).unwrap(), v)).collect())
            }
        };
        let threshold = matches!(kind, 2 | 3).then(|| from_rat(thresholds.choose(rng).unwrap()));
        let c = CnfInstance { num_vars: nv, clauses, prefix, threshold };
        let expected = prefix_value(&c, &c.full_prefix(), &mut vec![false; nv]);
        let enc = match encode_cnf(&c) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("cnf {i}: {e}"));
                continue;
            }
        };
        let q = enc.query();
        if !validate_network(q.network()).is_valid() {
            failures.push(format!("cnf {i}: encoded network invalid"));
        }
        let answer = solve_tree(q).answer;
        let got = answer.value().cloned().unwrap_or(Value::Unfeasible);
        let ok = match c.prefix {
            None => got == Value::Bool(expected.is_one()),
            Some(_) => to_rat(&got) == Some(expected.clone()),
        };
        if !ok {
            failures.push(format!("cnf {i}: got {got}, expected {expected}"));
        }
        if let Some(t) = enc.threshold() {
            let decided = apply_threshold(&answer, t, q.structure());
            let want = expected >= to_rat(t).unwrap();
            if decided.value() != Some(&Value::Bool(want)) {
                failures.push(format!("cnf {i}: threshold {t} decided wrongly"));
            }
        }
        if q.structure().ax1 {
            if let Ok(v) = ve_ax1(q, &opts()) {
                if v.answer != answer {
                    failures.push(format!("cnf {i}: ve-ax1 disagrees"));
                }
            }
        }
    }
    (total, failures)
}

fn csp_cases(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let total = 20;
    for i in 0..total {
        let nv = rng.gen_range(2..=5);
        let variables: Vec<CspVariable> = (0..nv)
            .map(|v| {
                let k = rng.gen_range(2..=3);
                let labels: Vec<String> = (0..k).map(|x| x.to_string()).collect();
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                CspVariable::new(&format!("v{v}"), &refs)
            })
            .collect();
        let dims_all: Vec<usize> = variables.iter().map(|v| v.domain.len()).collect();
        let constraints: Vec<Constraint> = (0..rng.gen_range(1..=5))
            .map(|_| {
                let arity = rng.gen_range(1..=2);
                let mut vs: Vec<usize> = (0..nv).collect();
                vs.shuffle(rng);
                let scope = vs[..arity].to_vec();
                let size: usize = scope.iter().map(|&v| dims_all[v]).product();
                Constraint { scope, table: (0..size).map(|_| Value::Bool(rng.gen_bool(0.7))).collect() }
            })
            .collect();
        let c = CspInstance { variables, constraints, flavor: CspFlavor::Hard };
        let count = assignments(&dims_all)
            .iter()
            .filter(|a| {
                c.constraints.iter().all(|con| {
                    let vals: Vec<usize> = con.scope.iter().map(|&v| a[v]).collect();
                    let dims: Vec<usize> = con.scope.iter().map(|&v| dims_all[v]).collect();
                    con.table[row_index(&vals, &dims)] == Value::Bool(true)
                })
            })
            .count();
        let size: usize = dims_all.iter().product();
        let counted = encode_csp(&c, CspTask::Count).map(|q| solve_tree(&q).answer);
        match counted.as_ref().ok().and_then(|a| a.value()).and_then(to_rat) {
            Some(r) if &r * BigInt::from(size) == Rat::from_integer(BigInt::from(count)) => {}
            _ => failures.push(format!("csp {i}: count is not {count}")),
        }
        let solved = encode_csp(&c, CspTask::Solve).map(|q| solve_tree(&q).answer);
        if solved.as_ref().ok().and_then(|a| a.value()) != Some(&Value::Bool(count > 0)) {
            failures.push(format!("csp {i}: consistency is not {}", count > 0));
        }
    }
    (total, failures)
}

fn random_bn(rng: &mut ChaCha8Rng) -> Vec<BnNode> {
    let n = rng.gen_range(2..=7);
    let mut nodes: Vec<BnNode> = Vec::new();
    for i in 0..n {
        let k = rng.gen_range(2..=3);
        let mut parents: Vec<usize> = (0..i).collect();
        parents.shuffle(rng);
        parents.truncate(rng.gen_range(0..=2.min(i)));
        parents.sort_unstable();
        let rows: usize = parents.iter().map(|&p| nodes[p].domain.len()).product();
        let cpt: Vec<Value> = (0..rows).flat_map(|_| distribution(rng, k)).map(|r| from_rat(&r)).collect();
        let labels: Vec<String> = (0..k).map(|x| x.to_string()).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        nodes.push(BnNode::new(&format!("n{i}"), &refs, &parents, cpt));
    }
    nodes
}

/// Joint probability of a full assignment.
fn bn_joint(nodes: &[BnNode], a: &[usize]) -> Rat {
    let mut p = Rat::one();
    for (i, node) in nodes.iter().enumerate() {
        let mut vals: Vec<usize> = node.parents.iter().map(|&q| a[q]).collect();
        vals.push(a[i]);
        let mut dims: Vec<usize> = node.parents.iter().map(|&q| nodes[q].domain.len()).collect();
        dims.push(node.domain.len());
        p *= to_rat(&node.cpt[row_index(&vals, &dims)]).unwrap();
    }
    p
}

fn random_evidence(rng: &mut ChaCha8Rng, nodes: &[BnNode], max: usize, exclude: &[usize]) -> Vec<(usize, usize)> {
    let mut vs: Vec<usize> = (0..nodes.len()).filter(|v| !exclude.contains(v)).collect();
    vs.shuffle(rng);
    vs.truncate(rng.gen_range(0..=max.min(vs.len())));
    vs.sort_unstable();
    vs.into_iter().map(|v| (v, rng.gen_range(0..nodes[v].domain.len()))).collect()
}

fn bn_cases(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let total = 30;
    for i in 0..total {
        let nodes = random_bn(rng);
        let n = nodes.len();
        let dims: Vec<usize> = nodes.iter().map(|x| x.domain.len()).collect();
        let joint: Vec<(Vec<usize>, Rat)> = assignments(&dims).into_iter().map(|a| { let p = bn_joint(&nodes, &a); (a, p) }).collect();
        let consistent = |a: &[usize], e: &[(usize, usize)]| e.iter().all(|&(v, x)| a[v] == x);
        let task = match i % 4 {
            0 => {
                let mut t: Vec<usize> = (0..n).collect();
                t.shuffle(rng);
                t.truncate(rng.gen_range(1..=2.min(n)));
                t.sort_unstable();
                BnTask::Marginal(t)
            }
            1 => BnTask::Evidence(random_evidence(rng, &nodes, 2, &[])),
            2 => BnTask::Mpe(random_evidence(rng, &nodes, 1, &[])),
            _ => {
                let mut d: Vec<usize> = (0..n).collect();
                d.shuffle(rng);
                d.truncate(rng.gen_range(1..=2.min(n - 1)));
                d.sort_unstable();
                let evidence = random_evidence(rng, &nodes, 1, &d);
                BnTask::Map { explanation: d, evidence }
            }
        };
        let b = BnInstance { nodes: nodes.clone(), task: task.clone() };
        let q = match encode_bn(&b) {
            Ok(q) => q,
            Err(e) => {
                failures.push(format!("bn {i}: {e}"));
                continue;
            }
        };
        if !validate_network(q.network()).is_valid() {
            failures.push(format!("bn {i}: encoded network invalid"));
        }
        let r = solve_tree(&q);
        let ok = match &task {
            BnTask::Marginal(t) => {
                let tdims: Vec<usize> = t.iter().map(|&v| dims[v]).collect();
                let mut table = vec![Rat::zero(); tdims.iter().product()];
                for (a, p) in &joint {
                    let vals: Vec<usize> = t.iter().map(|&v| a[v]).collect();
                    table[row_index(&vals, &tdims)] += p;
                }
                r.answer.entries.iter().map(to_rat).collect::<Vec<_>>() == table.into_iter().map(Some).collect::<Vec<_>>()
            }
            BnTask::Evidence(e) => {
                let pe: Rat = joint.iter().filter(|(a, _)| consistent(a, e)).map(|(_, p)| p.clone()).sum();
                r.answer.value().and_then(to_rat) == Some(pe)
            }
            BnTask::Mpe(e) => {
                let best = joint.iter().filter(|(a, _)| consistent(a, e)).map(|(_, p)| p.clone()).max().unwrap();
                r.answer.value().and_then(to_rat) == Some(best)
            }
            BnTask::Map { explanation, evidence } => {
                let mut by_d: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
                for (a, p) in joint.iter().filter(|(a, _)| consistent(a, evidence)) {
                    *by_d.entry(explanation.iter().map(|&v| a[v]).collect()).or_insert_with(Rat::zero) += p;
                }
                let best = by_d.values().max().cloned().unwrap();
                // the returned explanation must attain the maximum
                let chosen = r.policy.rule(0).and_then(|rule| rule.entries.get(&vec![]).cloned());
                let attains = match chosen {
                    Some(Choice::Assign(x)) => by_d.get(&x) == Some(&best),
                    _ => false,
                };
                attains && r.answer.value().and_then(to_rat) == Some(best)
            }
        };
        if !ok {
            failures.push(format!("bn {i} ({task:?}): got {:?}", r.answer.entries));
        }
    }
    (total, failures)
}

/// Extended reals for expected utilities: `None` is −∞.
type Ext = Option<Rat>;

/// Maximum expected utility by enumerating every reduced strategy: each
/// decision maps the chance variables it observes to an action; earlier
/// decisions are already fixed by the strategy.
fn id_meu(d: &IdInstance) -> Ext {
    use pfu::encoders::IdNodeKind::{Chance, Decision, Utility};
    let nodes = &d.nodes;
    let chance: Vec<usize> = (0..nodes.len()).filter(|&v| nodes[v].kind == Chance).collect();
    let decisions: Vec<usize> = (0..nodes.len()).filter(|&v| nodes[v].kind == Decision).collect();
    let observed: Vec<Vec<usize>> =
        decisions.iter().map(|&x| nodes[x].parents.iter().copied().filter(|p| nodes[*p].kind == Chance).collect()).collect();
    let size = |vs: &[usize]| vs.iter().map(|&v| nodes[v].domain.len()).product::<usize>();
    let chance_dims: Vec<usize> = chance.iter().map(|&v| nodes[v].domain.len()).collect();
    let worlds = assignments(&chance_dims);

    // a strategy is one table per decision, indexed by its observed context
    let rule_dims: Vec<Vec<usize>> = decisions
        .iter()
        .zip(&observed)
        .map(|(&x, obs)| vec![nodes[x].domain.len(); size(obs)])
        .collect();
    let all_rules: Vec<Vec<Vec<usize>>> = rule_dims.iter().map(|dims| assignments(dims)).collect();
    let strategy_dims: Vec<usize> = all_rules.iter().map(Vec::len).collect();

    let mut best: Option<Ext> = None;
    for pick in assignments(&strategy_dims) {
        let mut eu: Ext = Some(Rat::zero());
        for world in &worlds {
            let mut a = vec![0; nodes.len()];
            for (&v, &x) in chance.iter().zip(world) {
                a[v] = x;
            }
            for (k, &x) in decisions.iter().enumerate() {
                let ctx: Vec<usize> = observed[k].iter().map(|&v| a[v]).collect();
                let dims: Vec<usize> = observed[k].iter().map(|&v| nodes[v].domain.len()).collect();
                a[x] = all_rules[k][pick[k]][row_index(&ctx, &dims)];
            }
            let mut p = Rat::one();
            let mut u: Ext = Some(Rat::zero());
            for (v, node) in nodes.iter().enumerate() {
                let mut vals: Vec<usize> = node.parents.iter().map(|&q| a[q]).collect();
                let mut dims: Vec<usize> = node.parents.iter().map(|&q| nodes[q].domain.len()).collect();
                match node.kind {
                    Chance => {
                        vals.push(a[v]);
                        dims.push(node.domain.len());
                        p *= to_rat(&node.table[row_index(&vals, &dims)]).unwrap();
                    }
                    Utility => {
                        let x = to_rat(&node.table[row_index(&vals, &dims)]);
                        u = u.zip(x).map(|(s, x)| s + x);
                    }
                    Decision => {}
                }
            }
            if p.is_zero() {
                continue;
            }
            eu = eu.zip(u).map(|(s, u)| s + p * u);
        }
        best = Some(match best {
            None => eu,
            Some(b) => std::cmp::max_by(b, eu, |x, y| match (x, y) {
                (None, None) => std::cmp::Ordering::Equal,
                (None, _) => std::cmp::Ordering::Less,
                (_, None) => std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => x.cmp(y),
            }),
        });
    }
    best.expect("at least one strategy")
}

/// Random no-forgetting influence diagram with binary chance and decision
/// nodes: each decision observes everything its predecessor did plus
/// possibly one more chance node.
fn random_id(rng: &mut ChaCha8Rng) -> IdInstance {
    let tf = ["0", "1"];
    let mut nodes: Vec<IdNode> = Vec::new();
    let chance_node = |rng: &mut ChaCha8Rng, nodes: &Vec<IdNode>, name: String| {
        let i = nodes.len();
        let mut parents: Vec<usize> = (0..i).collect();
        parents.shuffle(rng);
        parents.truncate(rng.gen_range(0..=2.min(i)));
        parents.sort_unstable();
        let rows = 1usize << parents.len();
        let cpt: Vec<Value> = (0..rows).flat_map(|_| distribution(rng, 2)).map(|r| from_rat(&r)).collect();
        IdNode::chance(&name, &tf, &parents, cpt)
    };
    let k = rng.gen_range(1..=3);
    let mut n_chance = 0;
    for _ in 0..rng.gen_range(1..=2) {
        let node = chance_node(rng, &nodes, format!("c{n_chance}"));
        nodes.push(node);
        n_chance += 1;
    }
    let mut last_parents: Vec<usize> = Vec::new();
    let mut last_decision: Option<usize> = None;
    let mut n_observed = 0;
    for j in 0..k {
        let mut parents = last_parents.clone();
        if let Some(d) = last_decision {
            parents.push(d);
        }
        let unobserved: Vec<usize> =
            (0..nodes.len()).filter(|&v| nodes[v].kind == pfu::encoders::IdNodeKind::Chance && !parents.contains(&v)).collect();
        if n_observed < 3 && !unobserved.is_empty() && (j == 0 || rng.gen_bool(0.5)) {
            parents.push(*unobserved.choose(rng).unwrap());
            n_observed += 1;
        }
        parents.sort_unstable();
        let d = nodes.len();
        nodes.push(IdNode::decision(&format!("d{j}"), &tf, &parents));
        last_parents = parents;
        last_decision = Some(d);
        if n_chance < 4 && rng.gen_bool(0.6) {
            let node = chance_node(rng, &nodes, format!("c{n_chance}"));
            nodes.push(node);
            n_chance += 1;
        }
    }
    let decided = nodes.len();
    for u in 0..rng.gen_range(1..=3) {
        let mut parents: Vec<usize> = (0..decided).collect();
        parents.shuffle(rng);
        parents.truncate(rng.gen_range(1..=2));
        parents.sort_unstable();
        let table = (0..1usize << parents.len()).map(|_| Value::int(rng.gen_range(-3..=10))).collect();
        nodes.push(IdNode::utility(&format!("u{u}"), &parents, table));
    }
    IdInstance { nodes }
}

fn id_cases(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut instances = vec![dinner_id()];
    instances.extend((0..19).map(|_| random_id(rng)));
    for (i, d) in instances.iter().enumerate() {
        let q = match encode_id(d) {
            Ok(q) => q,
            Err(e) => {
                failures.push(format!("id {i}: {e}"));
                continue;
            }
        };
        if !validate_network(q.network()).is_valid() {
            failures.push(format!("id {i}: encoded network invalid"));
        }
        let got = solve_tree(&q).answer.value().cloned();
        let want = match id_meu(d) {
            Some(r) => from_rat(&r),
            None => Value::neg_inf(),
        };
        if i == 0 && want != Value::int(26) {
            failures.push(format!("dinner diagram enumerates to {want}"));
        }
        if got.as_ref() != Some(&want) {
            failures.push(format!("id {i}: got {got:?}, expected {want}"));
        }
    }
    (instances.len(), failures)
}

fn random_mdp(rng: &mut ChaCha8Rng, flavor: MdpFlavor) -> MdpInstance {
    let (ns, na) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let possibility = |rng: &mut ChaCha8Rng| from_rat(&rat(rng.gen_range(0..=4), 4));
    let transition = (0..ns)
        .map(|_| {
            (0..na)
                .map(|_| match flavor {
                    MdpFlavor::Probabilistic => distribution(rng, ns).iter().map(from_rat).collect(),
                    _ => {
                        let mut row: Vec<Value> = (0..ns).map(|_| possibility(rng)).collect();
                        row[rng.gen_range(0..ns)] = Value::int(1);
                        row
                    }
                })
                .collect()
        })
        .collect();
    let feasible = (0..ns)
        .map(|_| {
            let mut row: Vec<bool> = (0..na).map(|_| rng.gen_bool(0.8)).collect();
            row[rng.gen_range(0..na)] = true;
            row
        })
        .collect();
    let reward = (0..ns)
        .map(|_| {
            (0..na)
                .map(|_| match flavor {
                    MdpFlavor::Probabilistic => Value::int(rng.gen_range(-2..=6)),
                    _ => possibility(rng),
                })
                .collect()
        })
        .collect();
    MdpInstance {
        horizon: rng.gen_range(1..=4),
        states: (0..ns).map(|s| format!("s{s}")).collect(),
        actions: (0..na).map(|a| format!("a{a}")).collect(),
        transition,
        feasible,
        reward,
        flavor,
    }
}

/// Finite-horizon backward induction.
fn backward_induction(m: &MdpInstance) -> Vec<Rat> {
    let ns = m.states.len();
    let r = |s: usize, a: usize| to_rat(&m.reward[s][a]).unwrap();
    let p = |s: usize, a: usize, t: usize| to_rat(&m.transition[s][a][t]).unwrap();
    let mut next: Option<Vec<Rat>> = None;
    for _ in 0..m.horizon {
        let v: Vec<Rat> = (0..ns)
            .map(|s| {
                (0..m.actions.len())
                    .filter(|&a| m.feasible[s][a])
                    .map(|a| match (&next, m.flavor) {
                        (None, _) => r(s, a),
                        (Some(vn), MdpFlavor::Probabilistic) => {
                            r(s, a) + (0..ns).map(|t| p(s, a, t) * &vn[t]).sum::<Rat>()
                        }
                        (Some(vn), _) => {
                            let future = (0..ns)
                                .map(|t| (Rat::one() - p(s, a, t)).max(vn[t].clone()))
                                .min()
                                .unwrap();
                            r(s, a).min(future)
                        }
                    })
                    .max()
                    .unwrap()
            })
            .collect();
        next = Some(v);
    }
    next.unwrap()
}

fn mdp_cases(rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    let mut total = 0;
    for flavor in [MdpFlavor::Probabilistic, MdpFlavor::PossibilisticPessimistic] {
        for i in 0..10 {
            total += 1;
            let m = random_mdp(rng, flavor);
            let q = match encode_mdp(&m) {
                Ok(q) => q,
                Err(e) => {
                    failures.push(format!("{flavor} mdp {i}: {e}"));
                    continue;
                }
            };
            if !validate_network(q.network()).is_valid() {
                failures.push(format!("{flavor} mdp {i}: encoded network invalid"));
            }
            let got: Vec<Option<Rat>> = solve_tree(&q).answer.entries.iter().map(to_rat).collect();
            let want: Vec<Option<Rat>> = backward_induction(&m).into_iter().map(Some).collect();
            if got != want {
                failures.push(format!("{flavor} mdp {i}: got {got:?}, expected {want:?}"));
            }
        }
    }
    (total, failures)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let parts = [
        ("cnf", cnf_cases(&mut rng)),
        ("csp", csp_cases(&mut rng)),
        ("bn", bn_cases(&mut rng)),
        ("id", id_cases(&mut rng)),
        ("mdp", mdp_cases(&mut rng)),
    ];
    let counts: Vec<String> = parts.iter().map(|(name, (n, f))| format!("{name} {}/{n}", n - f.len())).collect();
    let failures: Vec<&String> = parts.iter().flat_map(|(_, (_, f))| f).collect();
    let mut detail = format!("encoded answers match brute force: {}", counts.join(", "));
    if !failures.is_empty() {
        detail.push_str(&format!("; first failures: {:?}", &failures[..failures.len().min(3)]));
    }
    Outcome::check(failures.is_empty(), detail)
}

// ---------------------------------------------------------------- criterion 7

struct Parts {
    variables: Vec<Variable>,
    components: Vec<Component>,
    plausibilities: Vec<Factor>,
    feasibilities: Vec<Factor>,
    utilities: Vec<ScopedFunction>,
}

fn parts(n: &PfuNetwork) -> Parts {
    Parts {
        variables: n.variables().to_vec(),
        components: n.dag().components().to_vec(),
        plausibilities: n.plausibilities().to_vec(),
        feasibilities: n.feasibilities().to_vec(),
        utilities: n.utilities().to_vec(),
    }
}

fn table(scope: &[usize], dims: &[usize], codomain: Codomain, values: Vec<Value>) -> ScopedFunction {
    ScopedFunction::new(scope.to_vec(), dims.to_vec(), codomain, values).expect("well-shaped table")
}

/// One corrupted copy of the dinner network per well-formedness clause.
fn broken_dinners() -> Vec<(Clause, Parts)> {
    let base = dinner();
    let id = |name: &str| base.var_id(name).unwrap();
    let (bp_j, mc, ep_j, ep_m) = (id("bp_J"), id("mc"), id("ep_J"), id("ep_M"));
    let bool_p = |n: usize| vec![Value::int(1); n];
    let mut out = Vec::new();

    let mut p = parts(&base);
    p.components[0].parents.push(2);
    out.push((Clause::DagAcyclic, p));

    let mut p = parts(&base);
    p.variables.push(Variable::new("z", VarKind::Environment, &["a"]));
    out.push((Clause::ComponentPartition, p));

    let mut p = parts(&base);
    let z = p.variables.len();
    p.variables.push(Variable::new("z", VarKind::Decision, &["a"]));
    p.components.push(Component { name: "cz".into(), kind: VarKind::Environment, vars: vec![z], parents: vec![] });
    out.push((Clause::ComponentTyping, p));

    let mut p = parts(&base);
    p.plausibilities.push(Factor { owner: 1, function: table(&[mc], &[2], Codomain::Plausibility, bool_p(2)) });
    out.push((Clause::PlausibilityOwner, p));

    let mut p = parts(&base);
    p.feasibilities.push(Factor { owner: 0, function: table(&[bp_j], &[2], Codomain::Feasibility, vec![Value::Bool(true); 2]) });
    out.push((Clause::FeasibilityOwner, p));

    let mut p = parts(&base);
    p.plausibilities.push(Factor { owner: 2, function: table(&[ep_m, ep_j], &[2, 2], Codomain::Plausibility, bool_p(4)) });
    out.push((Clause::PlausibilityScope, p));

    let mut p = parts(&base);
    p.feasibilities.push(Factor { owner: 1, function: table(&[bp_j, mc], &[2, 2], Codomain::Feasibility, vec![Value::Bool(true); 4]) });
    out.push((Clause::FeasibilityScope, p));

    let mut p = parts(&base);
    let f = &p.plausibilities[0].function;
    p.plausibilities[0].function =
        table(f.scope(), f.dims(), Codomain::Plausibility, vec![Value::int(0), Value::ratio(3, 5), Value::int(0), Value::int(0)]);
    out.push((Clause::PlausibilityNormalization, p));

    let mut p = parts(&base);
    let f = &p.feasibilities[0].function;
    p.feasibilities[0].function = table(f.scope(), f.dims(), Codomain::Feasibility, vec![Value::Bool(false); 4]);
    out.push((Clause::FeasibilityNormalization, p));

    let mut p = parts(&base);
    p.utilities.push(table(&[ep_j], &[2], Codomain::Utility, vec![Value::pos_inf(), Value::int(0)]));
    out.push((Clause::Codomain, p));
    out
}

fn criterion_7() -> Outcome {
    let mut problems = Vec::new();
    let base = dinner();
    let mut fixtures = 1;
    if !validate_network(&base).is_valid() {
        problems.push("dinner fails validation".to_string());
    }
    if let Ok(q) = encode_id(&dinner_id()) {
        fixtures += 1;
        if !validate_network(q.network()).is_valid() {
            problems.push("dinner diagram fails validation".to_string());
        }
    }
    let broken = broken_dinners();
    for (clause, p) in &broken {
        let n = PfuNetwork::new(
            base.structure().clone(),
            p.variables.clone(),
            ComponentDag::new(p.components.clone()),
            p.plausibilities.clone(),
            p.feasibilities.clone(),
            p.utilities.clone(),
        );
        match n {
            Ok(n) => {
                let failed = validate_network(&n).failed_clauses();
                if failed != vec![*clause] {
                    problems.push(format!("{} fixture fails {:?}", clause.name(), failed.iter().map(|c| c.name()).collect::<Vec<_>>()));
                }
            }
            Err(e) => problems.push(format!("{} fixture rejected at construction: {e}", clause.name())),
        }
    }
    let detail = format!(
        "{fixtures} fixtures valid, {} broken variants each rejected by exactly their clause",
        broken.len()
    );
    if problems.is_empty() {
        Outcome::check(true, detail)
    } else {
        Outcome::check(false, problems.join("; "))
    }
}

fn main() -> ExitCode {
    // cargo passes harness flags such as --nocapture or filters; none apply here
    let (c3, c6) = criteria_3_and_6();
    let results = [
        (1, "dinner queries", criterion_1()),
        (2, "random cross-check against the oracle", criterion_2()),
        (3, "structured elimination equals tree search", c3),
        (4, "algebra axioms", criterion_4()),
        (5, "encodings against brute force", criterion_5()),
        (6, "elimination tables bounded by induced width", c6),
        (7, "network validation", criterion_7()),
    ];
    let mut unexpected = 0;
    for (k, title, o) in &results {
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Explained => "FAIL (analyzed)",
            Status::Fail => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {k} [{tag}] {title}: {}", o.detail);
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed without an analysis");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
