use std::fmt;
use std::sync::Arc;

use crate::algebra::{CatalogId, ExpectedUtilityStructure, Value};
use crate::network::{NetworkBuilder, VarId, VarKind};
use crate::query::{validate_query, QuantOp, Query, Sov};

use super::{check_valid, EncodeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MdpFlavor {
    Probabilistic,
    PossibilisticPessimistic,
    PossibilisticOptimistic,
    Kappa,
}

impl MdpFlavor {
    pub const ALL: [MdpFlavor; 4] = [
        MdpFlavor::Probabilistic,
        MdpFlavor::PossibilisticPessimistic,
        MdpFlavor::PossibilisticOptimistic,
        MdpFlavor::Kappa,
    ];

    pub fn catalog(self) -> CatalogId {
        match self {
            MdpFlavor::Probabilistic => CatalogId::ProbAdditive,
            MdpFlavor::PossibilisticPessimistic => CatalogId::PossPessimistic,
            MdpFlavor::PossibilisticOptimistic => CatalogId::PossOptimistic,
            MdpFlavor::Kappa => CatalogId::Kappa,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MdpFlavor::Probabilistic => "probabilistic",
            MdpFlavor::PossibilisticPessimistic => "possibilistic-pessimistic",
            MdpFlavor::PossibilisticOptimistic => "possibilistic-optimistic",
            MdpFlavor::Kappa => "kappa",
        }
    }

    pub fn parse(s: &str) -> Option<MdpFlavor> {
        MdpFlavor::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for MdpFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A stationary finite-horizon MDP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpInstance {
    pub horizon: usize,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    /// `transition[s][a][s']`
    pub transition: Vec<Vec<Vec<Value>>>,
    /// `feasible[s][a]`
    pub feasible: Vec<Vec<bool>>,
    /// `reward[s][a]`
    pub reward: Vec<Vec<Value>>,
    pub flavor: MdpFlavor,
}

/// Observation model of a partially observable MDP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PomdpObservations {
    pub observations: Vec<String>,
    /// `table[s][o]`: plausibility of observing `o` in state `s`.
    pub table: Vec<Vec<Value>>,
    /// Plausibility of each initial state.
    pub initial: Vec<Value>,
}

impl MdpInstance {
    pub fn structure(&self) -> ExpectedUtilityStructure {
        self.flavor.catalog().structure()
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let (ns, na) = (self.states.len(), self.actions.len());
        if self.horizon == 0 || ns == 0 || na == 0 {
            return Err(EncodeError::Malformed("horizon, states and actions must be non-empty".into()));
        }
        let shape_ok = self.transition.len() == ns
            && self.transition.iter().all(|r| r.len() == na && r.iter().all(|x| x.len() == ns))
            && self.feasible.len() == ns
            && self.feasible.iter().all(|r| r.len() == na)
            && self.reward.len() == ns
            && self.reward.iter().all(|r| r.len() == na);
        if !shape_ok {
            return Err(EncodeError::Malformed("tables must be indexed by state and action".into()));
        }
        let s = self.structure();
        for (i, row) in self.feasible.iter().enumerate() {
            if !row.iter().any(|&f| f) {
                return Err(EncodeError::Normalization(format!("state `{}` has no feasible action", self.states[i])));
            }
        }
        for (i, by_action) in self.transition.iter().enumerate() {
            for (a, dist) in by_action.iter().enumerate() {
                check_distribution(&s, dist, &format!("transition from `{}` under `{}`", self.states[i], self.actions[a]))?;
            }
        }
        if let Some(v) = self.reward.iter().flatten().find(|v| !s.u_contains(v)) {
            return Err(EncodeError::Malformed(format!("reward {v} is not a utility of {}", s.name)));
        }
        Ok(())
    }
}

fn check_distribution(s: &ExpectedUtilityStructure, dist: &[Value], what: &str) -> Result<(), EncodeError> {
    if let Some(v) = dist.iter().find(|v| !s.p_contains(v)) {
        return Err(EncodeError::Malformed(format!("{what} holds {v}, outside E_p")));
    }
    let total = dist.iter().fold(s.plaus.zero.clone(), |acc, v| s.plaus.elim.apply(&acc, v));
    if total != s.plaus.one {
        return Err(EncodeError::Normalization(format!("{what} sums to {total}")));
    }
    Ok(())
}

fn labels(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Components {d_t} with parent {s_t} and {s_{t+1}} with parents {s_t} and
/// {d_t}; s_1 stays a free decision variable, so the answer is indexed by
/// the initial state. The sequence is (max,{d_1})·(⊕_u,{s_2})·…·(max,{d_T}).
pub fn encode_mdp(m: &MdpInstance) -> Result<Query, EncodeError> {
    m.validate()?;
    let mut b = NetworkBuilder::new(Arc::new(m.structure()));
    let states = labels(&m.states);
    let actions = labels(&m.actions);
    let mut s_vars: Vec<VarId> = Vec::new();
    let mut d_vars: Vec<VarId> = Vec::new();
    let mut s_comps = Vec::new();
    let mut d_comps = Vec::new();
    for t in 1..=m.horizon {
        let kind = if t == 1 { VarKind::Decision } else { VarKind::Environment };
        let s = b.variable(&format!("s{t}"), kind, &states);
        let d = b.variable(&format!("d{t}"), VarKind::Decision, &actions);
        let sc = if t == 1 {
            b.component("s1", &[s], &[])
        } else {
            b.component(&format!("s{t}"), &[s], &[s_comps[t - 2], d_comps[t - 2]])
        };
        let dc = b.component(&format!("d{t}"), &[d], &[sc]);
        s_vars.push(s);
        d_vars.push(d);
        s_comps.push(sc);
        d_comps.push(dc);
    }
    for t in 0..m.horizon {
        let (s, d) = (s_vars[t], d_vars[t]);
        b.feasibility_fn(d_comps[t], &[s, d], |a| m.feasible[a[0]][a[1]])?;
        b.utility_fn(&[s, d], |a| m.reward[a[0]][a[1]].clone())?;
        if t + 1 < m.horizon {
            b.plausibility_fn(s_comps[t + 1], &[s, d, s_vars[t + 1]], |a| m.transition[a[0]][a[1]][a[2]].clone())?;
        }
    }
    let n = Arc::new(b.build()?);
    check_valid(&n)?;
    let mut sov = Sov::default();
    for t in 0..m.horizon {
        if t > 0 {
            sov.push(QuantOp::Elim, vec![s_vars[t]]);
        }
        sov.push(QuantOp::Max, vec![d_vars[t]]);
    }
    Ok(validate_query(n, sov)?)
}

/// Policy-tree query of a partially observable MDP: states and
/// observations are environment variables, decisions have no parents, and
/// the sequence is (max,{d_1})·(⊕_u,{o_2})·(max,{d_2})·…·(max,{d_T})
/// followed by (⊕_u,{s_1,…,s_T}). Every action must be feasible.
pub fn encode_pomdp(m: &MdpInstance, obs: &PomdpObservations) -> Result<Query, EncodeError> {
    m.validate()?;
    if m.feasible.iter().flatten().any(|f| !f) {
        return Err(EncodeError::Unsupported("partially observable MDPs with unfeasible actions".into()));
    }
    let structure = m.structure();
    if obs.table.len() != m.states.len() || obs.table.iter().any(|r| r.len() != obs.observations.len()) {
        return Err(EncodeError::Malformed("observation table must be indexed by state and observation".into()));
    }
    if obs.initial.len() != m.states.len() {
        return Err(EncodeError::Malformed("initial distribution needs one entry per state".into()));
    }
    check_distribution(&structure, &obs.initial, "initial distribution")?;
    for (i, row) in obs.table.iter().enumerate() {
        check_distribution(&structure, row, &format!("observations in `{}`", m.states[i]))?;
    }
    let mut b = NetworkBuilder::new(Arc::new(structure));
    let (states, actions, observations) = (labels(&m.states), labels(&m.actions), labels(&obs.observations));
    let mut s_vars = Vec::new();
    let mut d_vars = Vec::new();
    let mut o_vars: Vec<Option<VarId>> = Vec::new();
    let mut s_comps = Vec::new();
    let mut d_comps = Vec::new();
    for t in 1..=m.horizon {
        let s = b.variable(&format!("s{t}"), VarKind::Environment, &states);
        let o = (t > 1).then(|| b.variable(&format!("o{t}"), VarKind::Environment, &observations));
        let d = b.variable(&format!("d{t}"), VarKind::Decision, &actions);
        let parents = if t == 1 { vec![] } else { vec![s_comps[t - 2], d_comps[t - 2]] };
        let sc = b.component(&format!("s{t}"), &[s], &parents);
        if let Some(o) = o {
            let oc = b.component(&format!("o{t}"), &[o], &[sc]);
            b.plausibility_fn(oc, &[s, o], |a| obs.table[a[0]][a[1]].clone())?;
        }
        d_comps.push(b.component(&format!("d{t}"), &[d], &[]));
        if t == 1 {
            b.plausibility(sc, &[s], obs.initial.clone())?;
        } else {
            let (ps, pd) = (s_vars[t - 2], d_vars[t - 2]);
            b.plausibility_fn(sc, &[ps, pd, s], |a| m.transition[a[0]][a[1]][a[2]].clone())?;
        }
        b.utility_fn(&[s, d], |a| m.reward[a[0]][a[1]].clone())?;
        s_vars.push(s);
        d_vars.push(d);
        o_vars.push(o);
        s_comps.push(sc);
    }
    let n = Arc::new(b.build()?);
    check_valid(&n)?;
    let mut sov = Sov::default();
    for t in 0..m.horizon {
        if let Some(o) = o_vars[t] {
            sov.push(QuantOp::Elim, vec![o]);
        }
        sov.push(QuantOp::Max, vec![d_vars[t]]);
    }
    sov.push(QuantOp::Elim, s_vars);
    Ok(validate_query(n, sov)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{tree_search, SolveOptions};

    fn one_state(rewards: [i64; 2]) -> MdpInstance {
        MdpInstance {
            horizon: 1,
            states: vec!["s".into()],
            actions: vec!["a".into(), "b".into()],
            transition: vec![vec![vec![Value::int(1)], vec![Value::int(1)]]],
            feasible: vec![vec![true, true]],
            reward: vec![rewards.iter().map(|&r| Value::int(r)).collect()],
            flavor: MdpFlavor::Probabilistic,
        }
    }

    #[test]
    fn one_step_is_a_max() {
        let q = encode_mdp(&one_state([2, 5])).unwrap();
        let r = tree_search(&q, &SolveOptions::default()).unwrap();
        assert_eq!(r.answer.entries, vec![Value::int(5)]);
        assert_eq!(q.free_vars().len(), 1);
    }

    // two states, "stay" keeps the state, "move" flips it; reward 1 in state 1
    fn flip(horizon: usize) -> MdpInstance {
        let (one, zero) = (Value::int(1), Value::int(0));
        MdpInstance {
            horizon,
            states: vec!["0".into(), "1".into()],
            actions: vec!["stay".into(), "move".into()],
            transition: vec![
                vec![vec![one.clone(), zero.clone()], vec![Value::ratio(1, 2), Value::ratio(1, 2)]],
                vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]],
            ],
            feasible: vec![vec![true, true], vec![true, false]],
            reward: vec![vec![zero.clone(), zero], vec![one.clone(), one]],
            flavor: MdpFlavor::Probabilistic,
        }
    }

    #[test]
    fn flip_values() {
        let q = encode_mdp(&flip(3)).unwrap();
        let r = tree_search(&q, &SolveOptions::default()).unwrap();
        // from 1 stay three times; from 0 move: s2 = 1 earns 2, s2 = 0 moves again for 1/2
        assert_eq!(r.answer.entries, vec![Value::ratio(5, 4), Value::int(3)]);
    }

    #[test]
    fn pomdp_shape() {
        let m = flip(2);
        let mut m = m;
        m.feasible = vec![vec![true, true], vec![true, true]];
        let h = Value::ratio(1, 2);
        let obs = PomdpObservations {
            observations: vec!["0".into(), "1".into()],
            table: vec![vec![Value::int(1), Value::int(0)], vec![Value::int(0), Value::int(1)]],
            initial: vec![h.clone(), h],
        };
        let q = encode_pomdp(&m, &obs).unwrap();
        let ops: Vec<QuantOp> = q.sov().pairs.iter().map(|p| p.op).collect();
        assert_eq!(ops, vec![QuantOp::Max, QuantOp::Elim, QuantOp::Max, QuantOp::Elim]);
        let r = tree_search(&q, &SolveOptions::default()).unwrap();
        // 1/2 at step 1 whatever d1 is; staying keeps P(s2 = 1) at 1/2,
        // moving drops it to 1/4
        assert_eq!(r.answer.value(), Some(&Value::int(1)));
    }

    #[test]
    fn rejects_unnormalized_transitions() {
        let mut m = flip(2);
        m.transition[0][0] = vec![Value::int(1), Value::int(1)];
        assert!(matches!(encode_mdp(&m), Err(EncodeError::Normalization(_))));
        let mut m = flip(2);
        m.feasible[1] = vec![false, false];
        assert!(encode_mdp(&m).is_err());
    }
}
