use std::sync::Arc;

use crate::algebra::{CatalogId, Num, Value};
use crate::network::{NetworkBuilder, VarId, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov};

use super::{check_valid, EncodeError};

/// A chance node with its conditional table over `parents` followed by the
/// node itself, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BnNode {
    pub name: String,
    pub domain: Vec<String>,
    pub parents: Vec<usize>,
    pub cpt: Vec<Value>,
}

impl BnNode {
    pub fn new(name: &str, domain: &[&str], parents: &[usize], cpt: Vec<Value>) -> BnNode {
        BnNode {
            name: name.to_string(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.to_vec(),
            cpt,
        }
    }
}

/// Evidence as (variable, value index) pairs.
pub type Evidence = Vec<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BnTask {
    /// Joint distribution of the target set.
    Marginal(Vec<usize>),
    /// Probability of the evidence.
    Evidence(Evidence),
    /// Most probable assignment of the unobserved variables.
    Mpe(Evidence),
    /// Most probable assignment of `explanation` given the evidence.
    Map { explanation: Vec<usize>, evidence: Evidence },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BnInstance {
    pub nodes: Vec<BnNode>,
    pub task: BnTask,
}

impl BnInstance {
    fn dims(&self, vars: &[usize]) -> Vec<usize> {
        vars.iter().map(|&v| self.nodes[v].domain.len()).collect()
    }

    pub fn evidence(&self) -> &[(usize, usize)] {
        match &self.task {
            BnTask::Marginal(_) => &[],
            BnTask::Evidence(e) | BnTask::Mpe(e) | BnTask::Map { evidence: e, .. } => e,
        }
    }

    /// Variables turned into decisions: the explanation set, or the target
    /// set of a marginal.
    pub fn decision_vars(&self) -> Vec<usize> {
        let mut d = match &self.task {
            BnTask::Marginal(s) => s.clone(),
            BnTask::Evidence(_) => Vec::new(),
            BnTask::Mpe(e) => (0..self.nodes.len()).filter(|v| !e.iter().any(|(o, _)| o == v)).collect(),
            BnTask::Map { explanation, .. } => explanation.clone(),
        };
        d.sort_unstable();
        d
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.domain.is_empty() {
                return Err(EncodeError::Malformed(format!("node `{}` has an empty domain", node.name)));
            }
            if node.parents.iter().any(|&p| p >= n || p == i) {
                return Err(EncodeError::Malformed(format!("node `{}` has a bad parent", node.name)));
            }
            let mut scope = node.parents.clone();
            scope.push(i);
            let dims = self.dims(&scope);
            let size: usize = dims.iter().product();
            if node.cpt.len() != size {
                return Err(EncodeError::Malformed(format!(
                    "table of `{}` has {} entries, expected {size}",
                    node.name,
                    node.cpt.len()
                )));
            }
            let k = node.domain.len();
            for (r, row) in node.cpt.chunks(k).enumerate() {
                let mut total = Num::zero();
                for x in row {
                    match x.as_num() {
                        Some(v) if v.is_finite() && !v.is_negative() => total = total.add(v),
                        _ => return Err(EncodeError::Malformed(format!("table of `{}` holds {x}", node.name))),
                    }
                }
                if total != Num::one() {
                    return Err(EncodeError::Normalization(format!("row {r} of `{}` sums to {total}", node.name)));
                }
            }
        }
        if topological(self).is_none() {
            return Err(EncodeError::Malformed("the network has a directed cycle".into()));
        }
        let mut observed = vec![false; n];
        for &(v, x) in self.evidence() {
            if v >= n || x >= self.nodes[v].domain.len() {
                return Err(EncodeError::Malformed(format!("evidence ({v}, {x}) is outside the domains")));
            }
            if observed[v] {
                return Err(EncodeError::Malformed(format!("variable {v} is observed twice")));
            }
            observed[v] = true;
        }
        let d = self.decision_vars();
        if let Some(&v) = d.iter().find(|&&v| v >= n || observed[v]) {
            return Err(EncodeError::Malformed(format!("variable {v} is both explained and observed, or unknown")));
        }
        if d.windows(2).any(|w| w[0] == w[1]) {
            return Err(EncodeError::Malformed("explanation set repeats a variable".into()));
        }
        Ok(())
    }
}

fn topological(b: &BnInstance) -> Option<Vec<usize>> {
    let n = b.nodes.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&v| !done[v] && b.nodes[v].parents.iter().all(|&p| done[p]))?;
        done[next] = true;
        order.push(next);
    }
    Some(order)
}

/// Builds the prob-sat query for the task. Components are single nodes;
/// nodes in the explanation or evidence are split off: their tables move
/// to the utilities, explained nodes become decisions and observed nodes
/// carry the constant p₀ = 1/|dom| with p₁ = |dom| and the indicator of
/// the observed value among the utilities.
pub fn encode_bn(b: &BnInstance) -> Result<Query, EncodeError> {
    b.validate()?;
    let n_nodes = b.nodes.len();
    let decisions = b.decision_vars();
    let evidence = b.evidence().to_vec();
    let observed = |v: usize| evidence.iter().find(|(o, _)| *o == v).map(|&(_, x)| x);
    let split = |v: usize| decisions.contains(&v) || observed(v).is_some();

    let mut nb = NetworkBuilder::new(Arc::new(CatalogId::ProbSat.structure()));
    let ids: Vec<VarId> = b
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let dom: Vec<&str> = node.domain.iter().map(String::as_str).collect();
            let kind = if decisions.contains(&i) { VarKind::Decision } else { VarKind::Environment };
            nb.variable(&node.name, kind, &dom)
        })
        .collect();
    let comps: Vec<usize> = (0..n_nodes).map(|i| nb.component(&b.nodes[i].name, &[ids[i]], &[])).collect();
    for (i, node) in b.nodes.iter().enumerate() {
        if !split(i) {
            for &p in &node.parents {
                nb.add_parent(comps[i], comps[p]);
            }
        }
    }
    for (i, node) in b.nodes.iter().enumerate() {
        let mut scope: Vec<VarId> = node.parents.iter().map(|&p| ids[p]).collect();
        scope.push(ids[i]);
        if !split(i) {
            nb.plausibility(comps[i], &scope, node.cpt.clone())?;
            continue;
        }
        nb.utility(&scope, node.cpt.clone())?;
        if let Some(x) = observed(i) {
            let k = node.domain.len() as i64;
            nb.plausibility(comps[i], &[], vec![Value::ratio(1, k)])?;
            nb.utility(&[], vec![Value::int(k)])?;
            nb.utility(&[ids[i]], (0..node.domain.len()).map(|y| Value::int((y == x) as i64)).collect())?;
        }
    }
    let network = Arc::new(nb.build()?);
    check_valid(&network)?;

    let rest: Vec<VarId> = (0..n_nodes).filter(|v| !decisions.contains(v)).map(|v| ids[v]).collect();
    let mut sov = Sov::default();
    if !matches!(b.task, BnTask::Marginal(_)) && !decisions.is_empty() {
        sov.push(QuantOp::Max, decisions.iter().map(|&v| ids[v]).collect());
    }
    if !rest.is_empty() {
        sov.push(QuantOp::Elim, rest);
    }
    Ok(validate_query(network, sov)?)
}
