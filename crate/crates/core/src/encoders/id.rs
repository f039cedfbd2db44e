use std::sync::Arc;

use crate::algebra::{CatalogId, Num, Value};
use crate::network::{NetworkBuilder, VarId, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov};

use super::{check_valid, EncodeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdNodeKind {
    Chance,
    Decision,
    Utility,
}

impl IdNodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IdNodeKind::Chance => "chance",
            IdNodeKind::Decision => "decision",
            IdNodeKind::Utility => "utility",
        }
    }

    pub fn parse(s: &str) -> Option<IdNodeKind> {
        match s {
            "chance" => Some(IdNodeKind::Chance),
            "decision" => Some(IdNodeKind::Decision),
            "utility" => Some(IdNodeKind::Utility),
            _ => None,
        }
    }
}

/// A node of an influence diagram. Chance nodes hold a table over parents
/// followed by the node, utility nodes a table over their parents, and
/// decision nodes no table. Utility nodes have an empty domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdNode {
    pub name: String,
    pub kind: IdNodeKind,
    pub domain: Vec<String>,
    pub parents: Vec<usize>,
    pub table: Vec<Value>,
}

impl IdNode {
    pub fn chance(name: &str, domain: &[&str], parents: &[usize], cpt: Vec<Value>) -> IdNode {
        IdNode::new(name, IdNodeKind::Chance, domain, parents, cpt)
    }

    pub fn decision(name: &str, domain: &[&str], parents: &[usize]) -> IdNode {
        IdNode::new(name, IdNodeKind::Decision, domain, parents, Vec::new())
    }

    pub fn utility(name: &str, parents: &[usize], table: Vec<Value>) -> IdNode {
        IdNode::new(name, IdNodeKind::Utility, &[], parents, table)
    }

    fn new(name: &str, kind: IdNodeKind, domain: &[&str], parents: &[usize], table: Vec<Value>) -> IdNode {
        IdNode {
            name: name.to_string(),
            kind,
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.to_vec(),
            table,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdInstance {
    pub nodes: Vec<IdNode>,
}

impl IdInstance {
    fn size(&self, vars: &[usize]) -> usize {
        vars.iter().map(|&v| self.nodes[v].domain.len()).product()
    }

    fn ancestors(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = self.nodes[v].parents.clone();
        while let Some(p) = stack.pop() {
            if !seen[p] {
                seen[p] = true;
                stack.extend(self.nodes[p].parents.iter().copied());
            }
        }
        seen
    }

    /// Decisions in their total order, first decision first.
    pub fn decision_order(&self) -> Result<Vec<usize>, EncodeError> {
        let mut d: Vec<usize> = (0..self.nodes.len()).filter(|&v| self.nodes[v].kind == IdNodeKind::Decision).collect();
        let anc: Vec<Vec<bool>> = d.iter().map(|&x| self.ancestors(x)).collect();
        let pos = |x: usize| d.iter().position(|&y| y == x).unwrap();
        let count = |x: usize| d.iter().filter(|&&y| anc[pos(x)][y]).count();
        let mut keyed: Vec<(usize, usize)> = d.iter().map(|&x| (count(x), x)).collect();
        keyed.sort_unstable();
        for (k, &(c, x)) in keyed.iter().enumerate() {
            if c != k {
                return Err(EncodeError::Malformed(format!(
                    "decisions are not totally ordered: `{}` has {c} earlier decisions, expected {k}",
                    self.nodes[x].name
                )));
            }
        }
        d = keyed.into_iter().map(|(_, x)| x).collect();
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.parents.iter().any(|&p| p >= n || p == i) {
                return Err(EncodeError::Malformed(format!("node `{}` has a bad parent", node.name)));
            }
            if node.parents.iter().any(|&p| self.nodes[p].kind == IdNodeKind::Utility) {
                return Err(EncodeError::Malformed(format!("node `{}` has a utility parent", node.name)));
            }
            match node.kind {
                IdNodeKind::Utility => {
                    if node.table.len() != self.size(&node.parents) {
                        return Err(EncodeError::Malformed(format!("utility `{}` has a wrong table size", node.name)));
                    }
                }
                IdNodeKind::Decision | IdNodeKind::Chance if node.domain.is_empty() => {
                    return Err(EncodeError::Malformed(format!("node `{}` has an empty domain", node.name)));
                }
                IdNodeKind::Decision => {}
                IdNodeKind::Chance => {
                    let k = node.domain.len();
                    if node.table.len() != self.size(&node.parents) * k {
                        return Err(EncodeError::Malformed(format!("chance node `{}` has a wrong table size", node.name)));
                    }
                    for (r, row) in node.table.chunks(k).enumerate() {
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
            }
        }
        if (0..n).any(|v| self.ancestors(v)[v]) {
            return Err(EncodeError::Malformed("the diagram has a directed cycle".into()));
        }
        self.decision_order()?;
        Ok(())
    }
}

/// prob-additive query: one component per chance or decision node, arcs
/// into decisions dropped, utility nodes turned into utility functions on
/// their parents. The sequence is built decision by decision as
/// (+, unvisited chance parents)·(max, {d}), then (+, remaining chance).
pub fn encode_id(d: &IdInstance) -> Result<Query, EncodeError> {
    d.validate()?;
    let order = d.decision_order()?;
    let mut b = NetworkBuilder::new(Arc::new(CatalogId::ProbAdditive.structure()));
    let mut id_of: Vec<Option<VarId>> = vec![None; d.nodes.len()];
    let mut comp: Vec<Option<usize>> = vec![None; d.nodes.len()];
    for (i, node) in d.nodes.iter().enumerate() {
        let kind = match node.kind {
            IdNodeKind::Chance => VarKind::Environment,
            IdNodeKind::Decision => VarKind::Decision,
            IdNodeKind::Utility => continue,
        };
        let dom: Vec<&str> = node.domain.iter().map(String::as_str).collect();
        let v = b.variable(&node.name, kind, &dom);
        id_of[i] = Some(v);
        comp[i] = Some(b.component(&node.name, &[v], &[]));
    }
    let var = |i: usize| id_of[i].expect("chance or decision node");
    for (i, node) in d.nodes.iter().enumerate() {
        match node.kind {
            IdNodeKind::Chance => {
                let c = comp[i].unwrap();
                for &p in &node.parents {
                    b.add_parent(c, comp[p].unwrap());
                }
                let mut scope: Vec<VarId> = node.parents.iter().map(|&p| var(p)).collect();
                scope.push(var(i));
                b.plausibility(c, &scope, node.table.clone())?;
            }
            IdNodeKind::Utility => {
                let scope: Vec<VarId> = node.parents.iter().map(|&p| var(p)).collect();
                b.utility(&scope, node.table.clone())?;
            }
            IdNodeKind::Decision => {}
        }
    }
    let n = Arc::new(b.build()?);
    check_valid(&n)?;

    let mut remaining: Vec<bool> = d.nodes.iter().map(|x| x.kind == IdNodeKind::Chance).collect();
    let mut sov = Sov::default();
    for &x in &order {
        let pa: Vec<VarId> = d.nodes[x].parents.iter().filter(|&&p| remaining[p]).map(|&p| var(p)).collect();
        for &p in &d.nodes[x].parents {
            remaining[p] = false;
        }
        if !pa.is_empty() {
            sov.push(QuantOp::Elim, pa);
        }
        sov.push(QuantOp::Max, vec![var(x)]);
    }
    let rest: Vec<VarId> = (0..d.nodes.len()).filter(|&v| remaining[v]).map(var).collect();
    if !rest.is_empty() {
        sov.push(QuantOp::Elim, rest);
    }
    Ok(validate_query(n, sov)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{tree_search, SolveOptions};

    fn answer(d: &IdInstance) -> Value {
        let r = tree_search(&encode_id(d).unwrap(), &SolveOptions::default()).unwrap();
        r.answer.value().unwrap().clone()
    }

    #[test]
    fn single_decision_is_a_plain_max() {
        let d = IdInstance {
            nodes: vec![
                IdNode::decision("d", &["a", "b", "c"], &[]),
                IdNode::utility("u", &[0], vec![Value::int(4), Value::int(9), Value::int(-1)]),
            ],
        };
        assert_eq!(answer(&d), Value::int(9));
    }

    #[test]
    fn observation_before_decision() {
        // s uniform over {0,1}; d observes s; reward 1 when d matches s
        let h = Value::ratio(1, 2);
        let d = IdInstance {
            nodes: vec![
                IdNode::chance("s", &["0", "1"], &[], vec![h.clone(), h]),
                IdNode::decision("d", &["0", "1"], &[0]),
                IdNode::utility("u", &[0, 1], vec![Value::int(1), Value::int(0), Value::int(0), Value::int(1)]),
            ],
        };
        assert_eq!(answer(&d), Value::int(1));
        let q = encode_id(&d).unwrap();
        let ops: Vec<QuantOp> = q.sov().pairs.iter().map(|p| p.op).collect();
        assert_eq!(ops, vec![QuantOp::Elim, QuantOp::Max]);
        let mut blind = d.clone();
        blind.nodes[1].parents.clear();
        assert_eq!(answer(&blind), Value::ratio(1, 2));
    }

    #[test]
    fn unordered_decisions_are_rejected() {
        let d = IdInstance {
            nodes: vec![
                IdNode::decision("d1", &["a"], &[]),
                IdNode::decision("d2", &["a"], &[]),
                IdNode::utility("u", &[0, 1], vec![Value::int(0)]),
            ],
        };
        assert!(matches!(encode_id(&d), Err(EncodeError::Malformed(_))));
    }
}
