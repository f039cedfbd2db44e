//! Variables, scoped functions, component DAGs and PFU networks.

mod function;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ExpectedUtilityStructure, Value};

pub use function::{advance, table_size, Codomain, ScopedFunction};
pub use validate::{validate_network, validate_network_with_cap, Clause, ClauseResult, ValidationReport};

pub type VarId = usize;

/// Default cap on the number of cells of any materialized table.
pub const DEFAULT_TABLE_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("malformed network: {0}")]
    Malformed(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("table of {size} cells exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Decision,
    Environment,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::Decision => "decision",
            VarKind::Environment => "environment",
        }
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, kind: VarKind, domain: &[&str]) -> Variable {
        Variable { name: name.into(), kind, domain: domain.iter().map(|s| s.to_string()).collect() }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|l| l == label)
    }
}

/// Partial assignment: variable to domain index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bindings: BTreeMap<VarId, usize>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, usize)>) -> Assignment {
        Assignment { bindings: pairs.into_iter().collect() }
    }

    pub fn bind(&mut self, v: VarId, value: usize) {
        self.bindings.insert(v, value);
    }

    pub fn get(&self, v: VarId) -> Option<usize> {
        self.bindings.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.bindings.iter().map(|(&k, &v)| (k, v))
    }

    /// `A.A′`, defined only for disjoint variable sets.
    pub fn concat(&self, other: &Assignment) -> Option<Assignment> {
        if other.bindings.keys().any(|k| self.bindings.contains_key(k)) {
            return None;
        }
        let mut out = self.clone();
        out.bindings.extend(other.bindings.iter());
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub kind: VarKind,
    pub vars: Vec<VarId>,
    pub parents: Vec<usize>,
}

/// Typed DAG of components, stored as parent lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComponentDag {
    components: Vec<Component>,
}

impl ComponentDag {
    pub fn new(components: Vec<Component>) -> ComponentDag {
        ComponentDag { components }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, c: usize) -> &Component {
        &self.components[c]
    }

    pub fn component_of(&self, v: VarId) -> Option<usize> {
        self.components.iter().position(|c| c.vars.contains(&v))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    /// pa_G(c): variables of the parent components, sorted.
    pub fn parent_vars(&self, c: usize) -> Vec<VarId> {
        let mut vs: Vec<VarId> =
            self.components[c].parents.iter().flat_map(|&p| self.components[p].vars.iter().copied()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn children(&self, c: usize) -> Vec<usize> {
        (0..self.components.len()).filter(|&k| self.components[k].parents.contains(&c)).collect()
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.components.len();
        let mut indeg: Vec<usize> = self.components.iter().map(|c| c.parents.len()).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(c) = ready.pop() {
            order.push(c);
            for (k, comp) in self.components.iter().enumerate() {
                for &p in &comp.parents {
                    if p == c {
                        indeg[k] -= 1;
                        if indeg[k] == 0 {
                            ready.push(k);
                        }
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Components reachable from `c` through at least one arc.
    pub fn descendants(&self, c: usize) -> Vec<bool> {
        let mut seen = vec![false; self.components.len()];
        let mut stack = self.children(c);
        while let Some(k) = stack.pop() {
            if !seen[k] {
                seen[k] = true;
                stack.extend(self.children(k));
            }
        }
        seen
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.descendants(from)[to]
    }
}

/// A factor attached to the component that owns it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub owner: usize,
    pub function: ScopedFunction,
}

/// A plausibility-feasibility-utility network.
///
/// Construction only checks that the pieces fit together (indices, table
/// sizes); the semantic conditions are reported by [`validate_network`].
#[derive(Clone, Debug)]
pub struct PfuNetwork {
    structure: Arc<ExpectedUtilityStructure>,
    variables: Vec<Variable>,
    dag: ComponentDag,
    plausibilities: Vec<Factor>,
    feasibilities: Vec<Factor>,
    utilities: Vec<ScopedFunction>,
}

impl PfuNetwork {
    pub fn new(
        structure: Arc<ExpectedUtilityStructure>,
        variables: Vec<Variable>,
        dag: ComponentDag,
        plausibilities: Vec<Factor>,
        feasibilities: Vec<Factor>,
        utilities: Vec<ScopedFunction>,
    ) -> Result<PfuNetwork, NetworkError> {
        let bad = |m: String| Err(NetworkError::Malformed(m));
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return bad(format!("duplicate variable `{}`", v.name));
            }
            if v.domain.is_empty() {
                return bad(format!("variable `{}` has an empty domain", v.name));
            }
            for (j, l) in v.domain.iter().enumerate() {
                if v.domain[..j].contains(l) {
                    return bad(format!("variable `{}` repeats label `{l}`", v.name));
                }
            }
        }
        let n = variables.len();
        for c in dag.components() {
            if c.vars.iter().any(|&v| v >= n) || c.parents.iter().any(|&p| p >= dag.len()) {
                return bad(format!("component `{}` references an unknown variable or component", c.name));
            }
        }
        let check_fn = |f: &ScopedFunction| -> Result<(), NetworkError> {
            for (&v, &d) in f.scope().iter().zip(f.dims()) {
                if v >= n || variables[v].size() != d {
                    return Err(NetworkError::Malformed(format!("function scope mismatch on variable {v}")));
                }
            }
            Ok(())
        };
        for fac in plausibilities.iter().chain(&feasibilities) {
            if fac.owner >= dag.len() {
                return bad(format!("factor owner {} is not a component", fac.owner));
            }
            check_fn(&fac.function)?;
        }
        for u in &utilities {
            check_fn(u)?;
        }
        Ok(PfuNetwork { structure, variables, dag, plausibilities, feasibilities, utilities })
    }

    pub fn structure(&self) -> &Arc<ExpectedUtilityStructure> {
        &self.structure
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn var_ids(&self, names: &[&str]) -> Result<Vec<VarId>, NetworkError> {
        names
            .iter()
            .map(|n| self.var_id(n).ok_or_else(|| NetworkError::UnknownVariable(n.to_string())))
            .collect()
    }

    pub fn dims(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|&v| self.variables[v].size()).collect()
    }

    pub fn vars_of_kind(&self, kind: VarKind) -> Vec<VarId> {
        (0..self.variables.len()).filter(|&v| self.variables[v].kind == kind).collect()
    }

    pub fn dag(&self) -> &ComponentDag {
        &self.dag
    }

    pub fn plausibilities(&self) -> &[Factor] {
        &self.plausibilities
    }

    pub fn feasibilities(&self) -> &[Factor] {
        &self.feasibilities
    }

    pub fn utilities(&self) -> &[ScopedFunction] {
        &self.utilities
    }

    /// Number of cells of a table over `vars`, `None` on overflow.
    pub fn state_space(&self, vars: &[VarId]) -> Option<usize> {
        table_size(&self.dims(vars))
    }

    pub fn feasible_at(&self, global: &[usize]) -> bool {
        self.feasibilities.iter().all(|f| f.function.eval(global).as_bool() == Some(true))
    }

    pub fn plausibility_at(&self, global: &[usize]) -> Value {
        let s = &self.structure.plaus;
        self.plausibilities.iter().fold(s.one.clone(), |acc, f| s.comb.apply(&acc, f.function.eval(global)))
    }

    pub fn utility_at(&self, global: &[usize]) -> Value {
        let s = &self.structure.util;
        self.utilities.iter().fold(s.one.clone(), |acc, f| s.comb.apply(&acc, f.eval(global)))
    }

    /// `(∧F) ⋆ ((⊗_p P) ⊗_pu (⊗_u U))` at a complete assignment.
    pub fn leaf_value(&self, global: &[usize]) -> Value {
        if !self.feasible_at(global) {
            return Value::Unfeasible;
        }
        self.structure.comb_pu.apply(&self.plausibility_at(global), &self.utility_at(global))
    }

    /// Combined P, F and U tables over their natural scopes.
    pub fn global_functions(&self, cap: usize) -> Result<(ScopedFunction, ScopedFunction, ScopedFunction), NetworkError> {
        let s = &self.structure;
        let all: Vec<&ScopedFunction> = self
            .plausibilities
            .iter()
            .map(|f| &f.function)
            .chain(self.feasibilities.iter().map(|f| &f.function))
            .chain(&self.utilities)
            .collect();
        let mut vars: Vec<VarId> = all.iter().flat_map(|f| f.scope().iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        let size = self.state_space(&vars).unwrap_or(usize::MAX);
        if size > cap {
            return Err(NetworkError::CapExceeded { size, cap });
        }
        let fold = |fs: Vec<&ScopedFunction>, one: Value, op: &crate::algebra::Operator, cod: Codomain| {
            fs.into_iter().try_fold(ScopedFunction::constant(cod, one), |acc, f| acc.combine(f, op, cod))
        };
        let p = fold(self.plausibilities.iter().map(|f| &f.function).collect(), s.plaus.one.clone(), &s.plaus.comb, Codomain::Plausibility)?;
        let feas = crate::algebra::PlausibilityStructure::feasibility();
        let f = fold(self.feasibilities.iter().map(|f| &f.function).collect(), Value::Bool(true), &feas.comb, Codomain::Feasibility)?;
        let u = fold(self.utilities.iter().collect(), s.util.one.clone(), &s.util.comb, Codomain::Utility)?;
        Ok((p, f, u))
    }
}

/// Incremental construction by name.
#[derive(Debug)]
pub struct NetworkBuilder {
    structure: Arc<ExpectedUtilityStructure>,
    variables: Vec<Variable>,
    components: Vec<Component>,
    plausibilities: Vec<Factor>,
    feasibilities: Vec<Factor>,
    utilities: Vec<ScopedFunction>,
}

impl NetworkBuilder {
    pub fn new(structure: Arc<ExpectedUtilityStructure>) -> NetworkBuilder {
        NetworkBuilder {
            structure,
            variables: Vec::new(),
            components: Vec::new(),
            plausibilities: Vec::new(),
            feasibilities: Vec::new(),
            utilities: Vec::new(),
        }
    }

    pub fn structure(&self) -> &Arc<ExpectedUtilityStructure> {
        &self.structure
    }

    pub fn variable(&mut self, name: &str, kind: VarKind, domain: &[&str]) -> VarId {
        self.variables.push(Variable::new(name, kind, domain));
        self.variables.len() - 1
    }

    pub fn add_variable(&mut self, v: Variable) -> VarId {
        self.variables.push(v);
        self.variables.len() - 1
    }

    pub fn var(&self, name: &str) -> Result<VarId, NetworkError> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| NetworkError::UnknownVariable(name.to_string()))
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// Adds a component whose kind is taken from its first variable.
    pub fn component(&mut self, name: &str, vars: &[VarId], parents: &[usize]) -> usize {
        let kind = vars.first().map(|&v| self.variables[v].kind).unwrap_or(VarKind::Environment);
        self.typed_component(name, kind, vars, parents)
    }

    pub fn typed_component(&mut self, name: &str, kind: VarKind, vars: &[VarId], parents: &[usize]) -> usize {
        self.components.push(Component { name: name.to_string(), kind, vars: vars.to_vec(), parents: parents.to_vec() });
        self.components.len() - 1
    }

    pub fn add_parent(&mut self, child: usize, parent: usize) {
        if !self.components[child].parents.contains(&parent) {
            self.components[child].parents.push(parent);
        }
    }

    fn function(&self, scope: &[VarId], codomain: Codomain, table: Vec<Value>) -> Result<ScopedFunction, NetworkError> {
        if let Some(&v) = scope.iter().find(|&&v| v >= self.variables.len()) {
            return Err(NetworkError::Malformed(format!("unknown variable id {v}")));
        }
        let dims = scope.iter().map(|&v| self.variables[v].size()).collect();
        ScopedFunction::new(scope.to_vec(), dims, codomain, table)
    }

    pub fn plausibility(&mut self, owner: usize, scope: &[VarId], table: Vec<Value>) -> Result<(), NetworkError> {
        let function = self.function(scope, Codomain::Plausibility, table)?;
        self.plausibilities.push(Factor { owner, function });
        Ok(())
    }

    pub fn feasibility(&mut self, owner: usize, scope: &[VarId], table: Vec<Value>) -> Result<(), NetworkError> {
        let function = self.function(scope, Codomain::Feasibility, table)?;
        self.feasibilities.push(Factor { owner, function });
        Ok(())
    }

    pub fn utility(&mut self, scope: &[VarId], table: Vec<Value>) -> Result<(), NetworkError> {
        let function = self.function(scope, Codomain::Utility, table)?;
        self.utilities.push(function);
        Ok(())
    }

    /// Tabulates a plausibility factor from a closure over local assignments.
    pub fn plausibility_fn(&mut self, owner: usize, scope: &[VarId], f: impl FnMut(&[usize]) -> Value) -> Result<(), NetworkError> {
        let table = tabulate(&self.variables, scope, f);
        self.plausibility(owner, scope, table)
    }

    pub fn feasibility_fn(&mut self, owner: usize, scope: &[VarId], mut f: impl FnMut(&[usize]) -> bool) -> Result<(), NetworkError> {
        let table = tabulate(&self.variables, scope, |a| Value::Bool(f(a)));
        self.feasibility(owner, scope, table)
    }

    pub fn utility_fn(&mut self, scope: &[VarId], f: impl FnMut(&[usize]) -> Value) -> Result<(), NetworkError> {
        let table = tabulate(&self.variables, scope, f);
        self.utility(scope, table)
    }

    pub fn build(self) -> Result<PfuNetwork, NetworkError> {
        PfuNetwork::new(
            self.structure,
            self.variables,
            ComponentDag::new(self.components),
            self.plausibilities,
            self.feasibilities,
            self.utilities,
        )
    }
}

fn tabulate(variables: &[Variable], scope: &[VarId], mut f: impl FnMut(&[usize]) -> Value) -> Vec<Value> {
    let dims: Vec<usize> = scope.iter().map(|&v| variables.get(v).map_or(1, |x| x.size())).collect();
    ScopedFunction::from_fn(scope.to_vec(), dims, Codomain::Extended, &mut f).into_table()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> ComponentDag {
        let c = |name: &str, parents: &[usize]| Component {
            name: name.into(),
            kind: VarKind::Environment,
            vars: vec![],
            parents: parents.to_vec(),
        };
        ComponentDag::new(vec![c("a", &[]), c("b", &[0]), c("c", &[1]), c("d", &[])])
    }

    #[test]
    fn dag_reachability() {
        let g = chain();
        assert!(g.reaches(0, 2));
        assert!(!g.reaches(2, 0));
        assert!(!g.reaches(0, 3));
        assert!(!g.reaches(0, 0));
        assert!(g.topological_order().is_some());
        let mut cyc = g.components().to_vec();
        cyc[0].parents.push(2);
        assert!(ComponentDag::new(cyc).topological_order().is_none());
    }

    #[test]
    fn assignment_concat() {
        let a = Assignment::from_pairs([(0, 1)]);
        let b = Assignment::from_pairs([(1, 0)]);
        assert_eq!(a.concat(&b).unwrap().len(), 2);
        assert!(a.concat(&a).is_none());
    }
}
