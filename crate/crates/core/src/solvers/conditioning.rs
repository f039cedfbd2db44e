use crate::algebra::{cond_div, uniform, AlgebraError, PlausibilityStructure, Value};
use crate::network::{advance, Codomain, PfuNetwork, ScopedFunction, VarId, VarKind};

use super::SolveError;

/// A plausibility (or feasibility) distribution over `target` given
/// `given`. Rows whose given-marginal is 0_p are undefined and hold ⋄.
#[derive(Clone, Debug)]
pub struct ConditionalDistribution {
    target: Vec<VarId>,
    given: Vec<VarId>,
    function: ScopedFunction,
    defined: Vec<bool>,
    structure: PlausibilityStructure,
}

impl ConditionalDistribution {
    /// An unconditioned distribution; `function` must be scoped on `target`.
    pub fn joint(function: ScopedFunction, structure: PlausibilityStructure) -> ConditionalDistribution {
        ConditionalDistribution {
            target: function.scope().to_vec(),
            given: Vec::new(),
            function,
            defined: vec![true],
            structure,
        }
    }

    pub fn target(&self) -> &[VarId] {
        &self.target
    }

    pub fn given(&self) -> &[VarId] {
        &self.given
    }

    pub fn structure(&self) -> &PlausibilityStructure {
        &self.structure
    }

    /// Table scoped on `given` followed by `target`.
    pub fn function(&self) -> &ScopedFunction {
        &self.function
    }

    /// Whether the row for a local assignment of `given` is well defined.
    pub fn is_defined(&self, given_local: &[usize]) -> bool {
        let dims = &self.function.dims()[..self.given.len()];
        let idx = given_local.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
        self.defined[idx]
    }

    /// Value at a global assignment, `None` where the row is undefined.
    pub fn value(&self, global: &[usize]) -> Option<&Value> {
        let v = self.function.eval(global);
        if v.is_unfeasible() {
            None
        } else {
            Some(v)
        }
    }

    /// ⊕_p-marginal of an unconditioned distribution onto `vars`, kept in
    /// the order of the distribution's scope.
    pub fn marginal(&self, vars: &[VarId]) -> ScopedFunction {
        let drop: Vec<VarId> = self.function.scope().iter().copied().filter(|v| !vars.contains(v)).collect();
        self.function.eliminate(&drop, &self.structure.elim)
    }

    /// `P_{S | given}` from an unconditioned distribution.
    pub fn conditional(&self, s: &[VarId], given: &[VarId]) -> Result<ConditionalDistribution, SolveError> {
        if !self.given.is_empty() {
            return Err(SolveError::Inconsistent("conditioning requires an unconditioned distribution".into()));
        }
        if s.iter().any(|v| given.contains(v)) {
            return Err(AlgebraError::Domain("conditioned and conditioning sets overlap".into()).into());
        }
        for v in s.iter().chain(given) {
            if !self.target.contains(v) {
                return Err(SolveError::Inconsistent(format!("variable {v} is outside the distribution")));
            }
        }
        let mut union = given.to_vec();
        union.extend_from_slice(s);
        let num = self.marginal(&union).reorder(&union)?;
        let den = self.marginal(given).reorder(given)?;
        let gdims = den.dims().to_vec();
        let mut defined = Vec::with_capacity(den.len());
        let mut a = vec![0; gdims.len()];
        loop {
            defined.push(!self.structure.is_zero(den.at(&a)));
            if !advance(&mut a, &gdims) {
                break;
            }
        }
        let mut table = Vec::with_capacity(num.len());
        let glen = given.len();
        let mut err = None;
        let mut a = vec![0; num.dims().len()];
        for v in num.table() {
            let d = den.at(&a[..glen]);
            if self.structure.is_zero(d) {
                table.push(Value::Unfeasible);
            } else {
                match cond_div(v, d, &self.structure) {
                    Ok(c) => table.push(c),
                    Err(e) => {
                        err.get_or_insert(e);
                        table.push(Value::Unfeasible);
                    }
                }
            }
            advance(&mut a, num.dims());
        }
        if let Some(e) = err {
            return Err(e.into());
        }
        let function = ScopedFunction::new(union, num.dims().to_vec(), Codomain::Extended, table)?;
        Ok(ConditionalDistribution {
            target: s.to_vec(),
            given: given.to_vec(),
            function,
            defined,
            structure: self.structure.clone(),
        })
    }
}

/// Completed joint plausibility `(⊗P) ⊗_p p₀` and joint feasibility
/// `(∧F) ∧ t` over every variable, p₀ being uniform over decision
/// assignments.
pub fn completion(
    n: &PfuNetwork,
    cap: usize,
) -> Result<(ConditionalDistribution, ConditionalDistribution), SolveError> {
    let s = n.structure();
    if !s.conditionable() {
        return Err(SolveError::NotConditionable(s.name.clone()));
    }
    let all: Vec<VarId> = (0..n.num_vars()).collect();
    let size = n.state_space(&all).unwrap_or(usize::MAX);
    if size > cap {
        return Err(SolveError::CapExceeded { size, cap });
    }
    let decisions = n.vars_of_kind(VarKind::Decision);
    let count = n.state_space(&decisions).unwrap_or(usize::MAX);
    let p0 = uniform(count, &s.plaus)?;
    let dims = n.dims(&all);
    // `all` is every variable in id order, so local and global assignments coincide
    let joint_p = ScopedFunction::from_fn(all.clone(), dims.clone(), Codomain::Plausibility, |a| {
        s.plaus.comb.apply(&n.plausibility_at(a), &p0)
    });
    let joint_f = ScopedFunction::from_fn(all, dims, Codomain::Feasibility, |a| Value::Bool(n.feasible_at(a)));
    Ok((
        ConditionalDistribution::joint(joint_p, s.plaus.clone()),
        ConditionalDistribution::joint(joint_f, PlausibilityStructure::feasibility()),
    ))
}

/// Free-function form of [`ConditionalDistribution::conditional`].
pub fn conditional(
    joint: &ConditionalDistribution,
    s: &[VarId],
    given: &[VarId],
) -> Result<ConditionalDistribution, SolveError> {
    joint.conditional(s, given)
}
