//! JSON instance files for the CSP, influence-diagram and MDP encoders.
//! Variables and nodes are referred to by name; table entries use the
//! PFU-JSON value syntax.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::algebra::{Valuation, Value};
use crate::encoders::{
    Constraint, CspFlavor, CspInstance, CspTask, CspVariable, IdInstance, IdNode, IdNodeKind, MdpFlavor,
    MdpInstance, PomdpObservations, Quantifier,
};

use super::{schema, FormatError};

fn values(j: &[Json]) -> Result<Vec<Value>, FormatError> {
    j.iter().map(|x| Ok(Value::from_json(x)?)).collect()
}

fn to_json(v: &[Value]) -> Vec<Json> {
    v.iter().map(Value::to_json).collect()
}

fn index_of(names: &HashMap<&str, usize>, name: &str, what: &str) -> Result<usize, FormatError> {
    names.get(name).copied().ok_or_else(|| FormatError::Schema(format!("unknown {what} `{name}`")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CspVarJson {
    name: String,
    domain: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintJson {
    scope: Vec<String>,
    table: Vec<Json>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CspJson {
    variables: Vec<CspVarJson>,
    constraints: Vec<ConstraintJson>,
    #[serde(default = "hard_flavor")]
    flavor: Json,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    task: Option<String>,
}

fn hard_flavor() -> Json {
    Json::String("hard".into())
}

fn valuation_from_json(j: &Json) -> Result<Valuation, FormatError> {
    match j {
        Json::String(s) if s == "weighted" => Ok(Valuation::Weighted),
        Json::String(s) if s == "fuzzy" => Ok(Valuation::Fuzzy),
        Json::Object(o) if o.contains_key("table") => {
            let rows: Vec<Vec<usize>> = serde_json::from_value(o["table"].clone())?;
            Ok(Valuation::Table(rows))
        }
        _ => schema("valuation must be \"weighted\", \"fuzzy\" or {\"table\": [[..]]}"),
    }
}

fn valuation_to_json(v: &Valuation) -> Json {
    match v {
        Valuation::Weighted => json!("weighted"),
        Valuation::Fuzzy => json!("fuzzy"),
        Valuation::Table(t) => json!({ "table": t }),
    }
}

fn flavor_from_json(j: &Json, names: &HashMap<&str, usize>, nv: usize) -> Result<CspFlavor, FormatError> {
    if j.as_str() == Some("hard") {
        return Ok(CspFlavor::Hard);
    }
    let Some(o) = j.as_object().filter(|o| o.len() == 1) else {
        return schema("flavor must be \"hard\" or an object with one key");
    };
    let (key, body) = o.iter().next().expect("one key");
    match key.as_str() {
        "valued" => Ok(CspFlavor::Valued(valuation_from_json(body)?)),
        "quantified" => {
            let entries: Vec<(String, String)> = serde_json::from_value(body.clone())?;
            let mut prefix = Vec::with_capacity(entries.len());
            for (q, name) in entries {
                let q = Quantifier::parse(&q).ok_or_else(|| FormatError::Schema(format!("unknown quantifier `{q}`")))?;
                prefix.push((q, index_of(names, &name, "variable")?));
            }
            Ok(CspFlavor::Quantified(prefix))
        }
        "stochastic" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Body {
                probabilities: HashMap<String, Vec<Json>>,
                order: Vec<String>,
            }
            let b: Body = serde_json::from_value(body.clone())?;
            let mut probabilities = vec![None; nv];
            for (name, p) in &b.probabilities {
                probabilities[index_of(names, name, "variable")?] = Some(values(p)?);
            }
            let order = b.order.iter().map(|n| index_of(names, n, "variable")).collect::<Result<_, _>>()?;
            Ok(CspFlavor::Stochastic { probabilities, order })
        }
        other => schema(format!("unknown flavor `{other}`")),
    }
}

/// Parses a CSP instance and its optional `task` field.
pub fn csp_from_json(text: &str) -> Result<(CspInstance, Option<CspTask>), FormatError> {
    let raw: CspJson = serde_json::from_str(text)?;
    let names: HashMap<&str, usize> = raw.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    if names.len() != raw.variables.len() {
        return schema("duplicate variable name");
    }
    let mut constraints = Vec::with_capacity(raw.constraints.len());
    for c in &raw.constraints {
        let scope = c.scope.iter().map(|n| index_of(&names, n, "variable")).collect::<Result<_, _>>()?;
        constraints.push(Constraint { scope, table: values(&c.table)? });
    }
    let flavor = flavor_from_json(&raw.flavor, &names, raw.variables.len())?;
    let task = match &raw.task {
        None => None,
        Some(t) => Some(CspTask::parse(t).ok_or_else(|| FormatError::Schema(format!("unknown task `{t}`")))?),
    };
    let variables = raw.variables.into_iter().map(|v| CspVariable { name: v.name, domain: v.domain }).collect();
    let inst = CspInstance { variables, constraints, flavor };
    inst.validate()?;
    Ok((inst, task))
}

pub fn csp_to_json(c: &CspInstance, task: Option<CspTask>) -> Json {
    let name = |v: usize| c.variables[v].name.clone();
    let flavor = match &c.flavor {
        CspFlavor::Hard => hard_flavor(),
        CspFlavor::Valued(v) => json!({ "valued": valuation_to_json(v) }),
        CspFlavor::Quantified(p) => {
            json!({ "quantified": p.iter().map(|(q, v)| json!([q.as_str(), name(*v)])).collect::<Vec<_>>() })
        }
        CspFlavor::Stochastic { probabilities, order } => {
            let mut probs = serde_json::Map::new();
            for (v, p) in probabilities.iter().enumerate() {
                if let Some(p) = p {
                    probs.insert(name(v), Json::Array(to_json(p)));
                }
            }
            json!({ "stochastic": { "probabilities": probs, "order": order.iter().map(|&v| name(v)).collect::<Vec<_>>() } })
        }
    };
    let raw = CspJson {
        variables: c.variables.iter().map(|v| CspVarJson { name: v.name.clone(), domain: v.domain.clone() }).collect(),
        constraints: c
            .constraints
            .iter()
            .map(|k| ConstraintJson { scope: k.scope.iter().map(|&v| name(v)).collect(), table: to_json(&k.table) })
            .collect(),
        flavor,
        task: task.map(|t| t.as_str().to_string()),
    };
    serde_json::to_value(raw).expect("serializable")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdNodeJson {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    domain: Vec<String>,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    table: Vec<Json>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdJson {
    nodes: Vec<IdNodeJson>,
}

pub fn id_from_json(text: &str) -> Result<IdInstance, FormatError> {
    let raw: IdJson = serde_json::from_str(text)?;
    let names: HashMap<&str, usize> = raw.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
    if names.len() != raw.nodes.len() {
        return schema("duplicate node name");
    }
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for n in &raw.nodes {
        let kind = IdNodeKind::parse(&n.kind).ok_or_else(|| FormatError::Schema(format!("unknown node kind `{}`", n.kind)))?;
        nodes.push(IdNode {
            name: n.name.clone(),
            kind,
            domain: n.domain.clone(),
            parents: n.parents.iter().map(|p| index_of(&names, p, "node")).collect::<Result<_, _>>()?,
            table: values(&n.table)?,
        });
    }
    let d = IdInstance { nodes };
    d.validate()?;
    Ok(d)
}

pub fn id_to_json(d: &IdInstance) -> Json {
    let raw = IdJson {
        nodes: d
            .nodes
            .iter()
            .map(|n| IdNodeJson {
                name: n.name.clone(),
                kind: n.kind.as_str().into(),
                domain: n.domain.clone(),
                parents: n.parents.iter().map(|&p| d.nodes[p].name.clone()).collect(),
                table: to_json(&n.table),
            })
            .collect(),
    };
    serde_json::to_value(raw).expect("serializable")
}

/// An MDP file, with an observation block for the partially observable case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpFile {
    pub mdp: MdpInstance,
    pub observations: Option<PomdpObservations>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObsJson {
    labels: Vec<String>,
    table: Vec<Vec<Json>>,
    initial: Vec<Json>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdpJson {
    flavor: String,
    horizon: usize,
    states: Vec<String>,
    actions: Vec<String>,
    transition: Vec<Vec<Vec<Json>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feasible: Option<Vec<Vec<bool>>>,
    reward: Vec<Vec<Json>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observations: Option<ObsJson>,
}

/// Parses an MDP file. A missing `feasible` table makes every action
/// feasible everywhere.
pub fn mdp_from_json(text: &str) -> Result<MdpFile, FormatError> {
    let raw: MdpJson = serde_json::from_str(text)?;
    let flavor = MdpFlavor::parse(&raw.flavor).ok_or_else(|| FormatError::Schema(format!("unknown flavor `{}`", raw.flavor)))?;
    let feasible = raw.feasible.unwrap_or_else(|| vec![vec![true; raw.actions.len()]; raw.states.len()]);
    let transition = raw
        .transition
        .iter()
        .map(|row| row.iter().map(|p| values(p)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let reward = raw.reward.iter().map(|r| values(r)).collect::<Result<_, _>>()?;
    let mdp = MdpInstance { horizon: raw.horizon, states: raw.states, actions: raw.actions, transition, feasible, reward, flavor };
    mdp.validate()?;
    let observations = match raw.observations {
        None => None,
        Some(o) => Some(PomdpObservations {
            observations: o.labels,
            table: o.table.iter().map(|r| values(r)).collect::<Result<_, _>>()?,
            initial: values(&o.initial)?,
        }),
    };
    Ok(MdpFile { mdp, observations })
}

pub fn mdp_to_json(f: &MdpFile) -> Json {
    let m = &f.mdp;
    let raw = MdpJson {
        flavor: m.flavor.as_str().into(),
        horizon: m.horizon,
        states: m.states.clone(),
        actions: m.actions.clone(),
        transition: m.transition.iter().map(|r| r.iter().map(|p| to_json(p)).collect()).collect(),
        feasible: Some(m.feasible.clone()),
        reward: m.reward.iter().map(|r| to_json(r)).collect(),
        observations: f.observations.as_ref().map(|o| ObsJson {
            labels: o.observations.clone(),
            table: o.table.iter().map(|r| to_json(r)).collect(),
            initial: to_json(&o.initial),
        }),
    };
    serde_json::to_value(raw).expect("serializable")
}
