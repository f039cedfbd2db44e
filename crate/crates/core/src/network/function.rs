use crate::algebra::{Operator, Value};

use super::{NetworkError, VarId};

/// What set a scoped function maps into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Codomain {
    Plausibility,
    Feasibility,
    Utility,
    /// Intermediate solver tables: any value, ⋄ included.
    Extended,
}

/// Dense table over the assignments of an ordered scope, row-major with the
/// first scope variable slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopedFunction {
    scope: Vec<VarId>,
    dims: Vec<usize>,
    codomain: Codomain,
    table: Vec<Value>,
}

impl ScopedFunction {
    pub fn new(
        scope: Vec<VarId>,
        dims: Vec<usize>,
        codomain: Codomain,
        table: Vec<Value>,
    ) -> Result<ScopedFunction, NetworkError> {
        if scope.len() != dims.len() {
            return Err(NetworkError::Malformed("scope and dimension lists differ in length".into()));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(NetworkError::Malformed(format!("variable {v} repeated in scope")));
            }
        }
        let size = table_size(&dims).ok_or(NetworkError::CapExceeded { size: usize::MAX, cap: usize::MAX })?;
        if table.len() != size {
            return Err(NetworkError::Malformed(format!(
                "table has {} entries, scope requires {size}",
                table.len()
            )));
        }
        if codomain != Codomain::Extended && table.iter().any(Value::is_unfeasible) {
            return Err(NetworkError::Malformed("unfeasible value stored in a network table".into()));
        }
        Ok(ScopedFunction { scope, dims, codomain, table })
    }

    pub fn constant(codomain: Codomain, v: Value) -> ScopedFunction {
        ScopedFunction { scope: Vec::new(), dims: Vec::new(), codomain, table: vec![v] }
    }

    /// Tabulates `f` over the scope; `f` receives the local assignment.
    pub fn from_fn(
        scope: Vec<VarId>,
        dims: Vec<usize>,
        codomain: Codomain,
        mut f: impl FnMut(&[usize]) -> Value,
    ) -> ScopedFunction {
        let size = table_size(&dims).expect("table size overflow");
        let mut table = Vec::with_capacity(size);
        let mut a = vec![0; dims.len()];
        for _ in 0..size {
            table.push(f(&a));
            advance(&mut a, &dims);
        }
        ScopedFunction { scope, dims, codomain, table }
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn codomain(&self) -> Codomain {
        self.codomain
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn dim_of(&self, v: VarId) -> Option<usize> {
        self.scope.iter().position(|&x| x == v).map(|i| self.dims[i])
    }

    /// Row-major index of a local assignment.
    pub fn index_of(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.dims).fold(0, |acc, (&a, &d)| acc * d + a)
    }

    /// Inverse of [`ScopedFunction::index_of`].
    pub fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut a = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            a[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        a
    }

    pub fn at(&self, local: &[usize]) -> &Value {
        &self.table[self.index_of(local)]
    }

    /// Value under a global assignment indexed by variable id.
    pub fn eval(&self, global: &[usize]) -> &Value {
        let idx = self.scope.iter().zip(&self.dims).fold(0, |acc, (&v, &d)| acc * d + global[v]);
        &self.table[idx]
    }

    pub fn into_table(self) -> Vec<Value> {
        self.table
    }

    pub fn with_codomain(mut self, codomain: Codomain) -> ScopedFunction {
        self.codomain = codomain;
        self
    }

    pub fn map(&self, codomain: Codomain, f: impl Fn(&Value) -> Value) -> ScopedFunction {
        ScopedFunction {
            scope: self.scope.clone(),
            dims: self.dims.clone(),
            codomain,
            table: self.table.iter().map(f).collect(),
        }
    }

    /// Pointwise `op(self(A), other(A))` over the union scope, which is this
    /// function's scope followed by the other's new variables.
    pub fn combine_with(
        &self,
        other: &ScopedFunction,
        codomain: Codomain,
        op: impl Fn(&Value, &Value) -> Value,
    ) -> Result<ScopedFunction, NetworkError> {
        let mut scope = self.scope.clone();
        let mut dims = self.dims.clone();
        for (&v, &d) in other.scope.iter().zip(&other.dims) {
            match self.dim_of(v) {
                Some(d0) if d0 != d => {
                    return Err(NetworkError::Malformed(format!("variable {v} has inconsistent domain sizes")))
                }
                Some(_) => {}
                None => {
                    scope.push(v);
                    dims.push(d);
                }
            }
        }
        table_size(&dims).ok_or(NetworkError::CapExceeded { size: usize::MAX, cap: usize::MAX })?;
        let pos_a: Vec<usize> = (0..self.scope.len()).collect();
        let pos_b: Vec<usize> = other.scope.iter().map(|v| scope.iter().position(|x| x == v).unwrap()).collect();
        Ok(ScopedFunction::from_fn(scope, dims, codomain, |a| {
            let ia = pos_a.iter().zip(&self.dims).fold(0, |acc, (&p, &d)| acc * d + a[p]);
            let ib = pos_b.iter().zip(&other.dims).fold(0, |acc, (&p, &d)| acc * d + a[p]);
            op(&self.table[ia], &other.table[ib])
        }))
    }

    /// Combination through an operator's ⋄-absorbing extension.
    pub fn combine(&self, other: &ScopedFunction, op: &Operator, codomain: Codomain) -> Result<ScopedFunction, NetworkError> {
        self.combine_with(other, codomain, |a, b| op.combine(a, b))
    }

    /// Folds `op` over the assignments of `vars`. Variables outside the scope
    /// are ignored; the fold order is row-major over the eliminated variables.
    pub fn eliminate_with(&self, vars: &[VarId], op: impl Fn(&Value, &Value) -> Value) -> ScopedFunction {
        let keep: Vec<usize> = (0..self.scope.len()).filter(|&i| !vars.contains(&self.scope[i])).collect();
        if keep.len() == self.scope.len() {
            return self.clone();
        }
        let scope: Vec<VarId> = keep.iter().map(|&i| self.scope[i]).collect();
        let dims: Vec<usize> = keep.iter().map(|&i| self.dims[i]).collect();
        let out_size = table_size(&dims).unwrap();
        let mut acc: Vec<Option<Value>> = vec![None; out_size];
        let mut a = vec![0; self.dims.len()];
        for v in &self.table {
            let o = keep.iter().zip(&dims).fold(0, |s, (&i, &d)| s * d + a[i]);
            acc[o] = Some(match acc[o].take() {
                None => v.clone(),
                Some(x) => op(&x, v),
            });
            advance(&mut a, &self.dims);
        }
        ScopedFunction { scope, dims, codomain: self.codomain, table: acc.into_iter().map(|x| x.unwrap()).collect() }
    }

    /// Elimination through an operator's ⋄-identity extension.
    pub fn eliminate(&self, vars: &[VarId], op: &Operator) -> ScopedFunction {
        self.eliminate_with(vars, |a, b| op.eliminate(a, b))
    }

    /// Fixes `var` to `value`, dropping it from the scope.
    pub fn restrict(&self, var: VarId, value: usize) -> ScopedFunction {
        let Some(p) = self.scope.iter().position(|&x| x == var) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut dims = self.dims.clone();
        scope.remove(p);
        dims.remove(p);
        let full_dims = self.dims.clone();
        ScopedFunction::from_fn(scope, dims, self.codomain, |a| {
            let mut full = a.to_vec();
            full.insert(p, value);
            let idx = full.iter().zip(&full_dims).fold(0, |acc, (&x, &d)| acc * d + x);
            self.table[idx].clone()
        })
    }

    /// Same function over a permuted scope.
    pub fn reorder(&self, scope: &[VarId]) -> Result<ScopedFunction, NetworkError> {
        if scope.len() != self.scope.len() || scope.iter().any(|v| !self.scope.contains(v)) {
            return Err(NetworkError::Malformed("reorder requires a permutation of the scope".into()));
        }
        let dims: Vec<usize> = scope.iter().map(|&v| self.dim_of(v).unwrap()).collect();
        let pos: Vec<usize> = self.scope.iter().map(|v| scope.iter().position(|x| x == v).unwrap()).collect();
        Ok(ScopedFunction::from_fn(scope.to_vec(), dims, self.codomain, |a| {
            let idx = pos.iter().zip(&self.dims).fold(0, |acc, (&p, &d)| acc * d + a[p]);
            self.table[idx].clone()
        }))
    }
}

/// Product of dimensions, `None` on overflow.
pub fn table_size(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

/// Odometer step over a row-major assignment; returns false after the last one.
pub fn advance(a: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..a.len()).rev() {
        a[k] += 1;
        if a[k] < dims[k] {
            return true;
        }
        a[k] = 0;
    }
    false
}
