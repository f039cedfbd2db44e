use std::fmt;

use crate::algebra::{PlausibilityStructure, Value};

use super::{advance, Factor, PfuNetwork, VarId, VarKind, DEFAULT_TABLE_CAP};

/// One well-formedness condition of a PFU network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    DagAcyclic,
    ComponentPartition,
    ComponentTyping,
    PlausibilityOwner,
    FeasibilityOwner,
    PlausibilityScope,
    FeasibilityScope,
    PlausibilityNormalization,
    FeasibilityNormalization,
    Codomain,
}

impl Clause {
    pub const ALL: [Clause; 10] = [
        Clause::DagAcyclic,
        Clause::ComponentPartition,
        Clause::ComponentTyping,
        Clause::PlausibilityOwner,
        Clause::FeasibilityOwner,
        Clause::PlausibilityScope,
        Clause::FeasibilityScope,
        Clause::PlausibilityNormalization,
        Clause::FeasibilityNormalization,
        Clause::Codomain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Clause::DagAcyclic => "dag-acyclic",
            Clause::ComponentPartition => "component-partition",
            Clause::ComponentTyping => "component-typing",
            Clause::PlausibilityOwner => "plausibility-owner",
            Clause::FeasibilityOwner => "feasibility-owner",
            Clause::PlausibilityScope => "plausibility-scope",
            Clause::FeasibilityScope => "feasibility-scope",
            Clause::PlausibilityNormalization => "plausibility-normalization",
            Clause::FeasibilityNormalization => "feasibility-normalization",
            Clause::Codomain => "codomain",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseResult {
    pub clause: Clause,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub results: Vec<ClauseResult>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed_clauses(&self) -> Vec<Clause> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.clause).collect()
    }

    pub fn result(&self, clause: Clause) -> &ClauseResult {
        self.results.iter().find(|r| r.clause == clause).expect("every clause is reported")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} {}", if r.passed { "ok  " } else { "FAIL" }, r.clause)?;
            for d in &r.details {
                writeln!(f, "     {d}")?;
            }
        }
        Ok(())
    }
}

pub fn validate_network(n: &PfuNetwork) -> ValidationReport {
    validate_network_with_cap(n, DEFAULT_TABLE_CAP)
}

/// Checks every clause exhaustively. Normalization over a state space larger
/// than `cap` is reported as a failure rather than skipped.
///
/// Plausibilities and feasibilities share one component DAG; whether the
/// two could be given separate DAGs is not checked.
pub fn validate_network_with_cap(n: &PfuNetwork, cap: usize) -> ValidationReport {
    let mut results = Vec::new();
    let mut push = |clause, details: Vec<String>| {
        results.push(ClauseResult { clause, passed: details.is_empty(), details });
    };
    let dag = n.dag();
    let name = |v: VarId| n.variable(v).name.clone();

    push(
        Clause::DagAcyclic,
        if dag.topological_order().is_some() { vec![] } else { vec!["component graph has a cycle".into()] },
    );

    let mut partition = Vec::new();
    for v in 0..n.num_vars() {
        let owners = dag.components().iter().filter(|c| c.vars.contains(&v)).count();
        if owners != 1 {
            partition.push(format!("variable `{}` belongs to {owners} components", name(v)));
        }
    }
    for c in dag.components() {
        if c.vars.is_empty() {
            partition.push(format!("component `{}` is empty", c.name));
        }
    }
    push(Clause::ComponentPartition, partition);

    let typing = dag
        .components()
        .iter()
        .flat_map(|c| {
            c.vars.iter().filter(|&&v| n.variable(v).kind != c.kind).map(move |&v| {
                format!("{} variable `{}` in {} component `{}`", n.variable(v).kind, name(v), c.kind, c.name)
            })
        })
        .collect();
    push(Clause::ComponentTyping, typing);

    let owner_check = |facs: &[Factor], kind: VarKind, what: &str| -> Vec<String> {
        facs.iter()
            .enumerate()
            .filter(|(_, f)| dag.component(f.owner).kind != kind)
            .map(|(i, f)| format!("{what} factor {i} owned by {} component `{}`", dag.component(f.owner).kind, dag.component(f.owner).name))
            .collect()
    };
    push(Clause::PlausibilityOwner, owner_check(n.plausibilities(), VarKind::Environment, "plausibility"));
    push(Clause::FeasibilityOwner, owner_check(n.feasibilities(), VarKind::Decision, "feasibility"));

    let scope_check = |facs: &[Factor], what: &str| -> Vec<String> {
        let mut out = Vec::new();
        for (i, f) in facs.iter().enumerate() {
            let c = dag.component(f.owner);
            let pa = dag.parent_vars(f.owner);
            for &v in f.function.scope() {
                if !c.vars.contains(&v) && !pa.contains(&v) {
                    out.push(format!(
                        "{what} factor {i} mentions `{}` outside component `{}` and its parents",
                        name(v),
                        c.name
                    ));
                }
            }
        }
        out
    };
    push(Clause::PlausibilityScope, scope_check(n.plausibilities(), "plausibility"));
    push(Clause::FeasibilityScope, scope_check(n.feasibilities(), "feasibility"));

    let s = n.structure();
    push(
        Clause::PlausibilityNormalization,
        normalization(n, &s.plaus, n.plausibilities(), VarKind::Environment, cap),
    );
    let feas = PlausibilityStructure::feasibility();
    push(Clause::FeasibilityNormalization, normalization(n, &feas, n.feasibilities(), VarKind::Decision, cap));

    let mut codomain = Vec::new();
    for (i, f) in n.plausibilities().iter().enumerate() {
        if let Some(v) = f.function.table().iter().find(|v| !s.p_contains(v)) {
            codomain.push(format!("plausibility factor {i} holds {v}, outside E_p"));
        }
    }
    for (i, f) in n.feasibilities().iter().enumerate() {
        if let Some(v) = f.function.table().iter().find(|v| v.as_bool().is_none()) {
            codomain.push(format!("feasibility factor {i} holds {v}, not a boolean"));
        }
    }
    for (i, f) in n.utilities().iter().enumerate() {
        if let Some(v) = f.table().iter().find(|v| !s.u_contains(v)) {
            codomain.push(format!("utility factor {i} holds {v}, outside E_u"));
        }
    }
    push(Clause::Codomain, codomain);

    ValidationReport { results }
}

fn normalization(n: &PfuNetwork, s: &PlausibilityStructure, facs: &[Factor], kind: VarKind, cap: usize) -> Vec<String> {
    let dag = n.dag();
    let mut out = Vec::new();
    for (ci, c) in dag.components().iter().enumerate() {
        if c.kind != kind || c.vars.is_empty() {
            continue;
        }
        let mine: Vec<&Factor> = facs.iter().filter(|f| f.owner == ci).collect();
        if mine.iter().any(|f| f.function.table().iter().any(|v| !s.carrier.contains(v))) {
            out.push(format!("component `{}` has factor values outside the carrier", c.name));
            continue;
        }
        let mut ctx = dag.parent_vars(ci);
        for f in &mine {
            ctx.extend(f.function.scope().iter().copied());
        }
        ctx.sort_unstable();
        ctx.dedup();
        ctx.retain(|v| !c.vars.contains(v));
        let cd = n.dims(&ctx);
        let vd = n.dims(&c.vars);
        let size = n.state_space(&ctx).and_then(|a| n.state_space(&c.vars).and_then(|b| a.checked_mul(b)));
        match size {
            Some(sz) if sz <= cap => {}
            _ => {
                out.push(format!("component `{}`: state space exceeds the cap of {cap}", c.name));
                continue;
            }
        }
        let mut global = vec![0; n.num_vars()];
        let mut a = vec![0; ctx.len()];
        'ctx: loop {
            for (k, &v) in ctx.iter().enumerate() {
                global[v] = a[k];
            }
            let mut b = vec![0; c.vars.len()];
            let mut total: Option<Value> = None;
            loop {
                for (k, &v) in c.vars.iter().enumerate() {
                    global[v] = b[k];
                }
                let p = mine.iter().fold(s.one.clone(), |acc, f| s.comb.apply(&acc, f.function.eval(&global)));
                total = Some(match total {
                    None => p,
                    Some(t) => s.elim.apply(&t, &p),
                });
                if !advance(&mut b, &vd) {
                    break;
                }
            }
            let total = total.unwrap();
            if total != s.one {
                let ctx_desc: Vec<String> = ctx
                    .iter()
                    .map(|&v| format!("{}={}", n.variable(v).name, n.variable(v).domain[global[v]]))
                    .collect();
                out.push(format!(
                    "component `{}` sums to {total} instead of {} at ({})",
                    c.name,
                    s.one,
                    ctx_desc.join(", ")
                ));
                break 'ctx;
            }
            if !advance(&mut a, &cd) {
                break;
            }
        }
    }
    out
}
