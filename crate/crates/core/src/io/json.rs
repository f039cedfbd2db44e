use std::sync::Arc;

use serde_json::{json, Map, Value as Json};

use crate::algebra::{ExpectedUtilityStructure, StructureSpec, Valuation, Value};
use crate::network::{Component, ComponentDag, Factor, PfuNetwork, ScopedFunction, Variable, VarId, VarKind};
use crate::network::Codomain;
use crate::query::{validate_query, AnswerTable, Choice, DecisionRule, Policy, QuantOp, Query, Sov};

use super::{schema, FormatError};

fn field<'a>(o: &'a Json, key: &str) -> Result<&'a Json, FormatError> {
    o.get(key).ok_or_else(|| FormatError::Schema(format!("missing field `{key}`")))
}

fn str_of<'a>(j: &'a Json, what: &str) -> Result<&'a str, FormatError> {
    j.as_str().ok_or_else(|| FormatError::Schema(format!("{what} must be a string")))
}

fn array_of<'a>(j: &'a Json, what: &str) -> Result<&'a Vec<Json>, FormatError> {
    j.as_array().ok_or_else(|| FormatError::Schema(format!("{what} must be an array")))
}

fn strings(j: &Json, what: &str) -> Result<Vec<String>, FormatError> {
    array_of(j, what)?.iter().map(|x| str_of(x, what).map(str::to_string)).collect()
}

fn values(j: &Json, what: &str) -> Result<Vec<Value>, FormatError> {
    array_of(j, what)?.iter().map(|x| Ok(Value::from_json(x)?)).collect()
}

pub fn structure_to_json(s: &StructureSpec) -> Json {
    match s {
        StructureSpec::Catalog(id) => Json::String(id.as_str().into()),
        StructureSpec::Product(a, b) => json!({ "product": [structure_to_json(a), structure_to_json(b)] }),
        StructureSpec::Vcsp(Valuation::Weighted) => json!({ "vcsp": "weighted" }),
        StructureSpec::Vcsp(Valuation::Fuzzy) => json!({ "vcsp": "fuzzy" }),
        StructureSpec::Vcsp(Valuation::Table(t)) => json!({ "vcsp": { "table": t } }),
    }
}

fn spec_from_json(j: &Json) -> Result<StructureSpec, FormatError> {
    if let Some(id) = j.as_str() {
        return Ok(StructureSpec::Catalog(id.parse()?));
    }
    if let Some(p) = j.get("product") {
        let parts = array_of(p, "product")?;
        if parts.len() != 2 {
            return schema("a product has two factors");
        }
        return Ok(StructureSpec::Product(Box::new(spec_from_json(&parts[0])?), Box::new(spec_from_json(&parts[1])?)));
    }
    if let Some(v) = j.get("vcsp") {
        let valuation = match v.as_str() {
            Some("weighted") => Valuation::Weighted,
            Some("fuzzy") => Valuation::Fuzzy,
            Some(other) => return schema(format!("unknown valuation `{other}`")),
            None => {
                let rows: Vec<Vec<usize>> = serde_json::from_value(field(v, "table")?.clone())?;
                Valuation::Table(rows)
            }
        };
        return Ok(StructureSpec::Vcsp(valuation));
    }
    schema("structure must be a catalog id, {product: [a, b]} or {vcsp: ...}")
}

pub fn structure_from_json(j: &Json) -> Result<ExpectedUtilityStructure, FormatError> {
    Ok(spec_from_json(j)?.build()?)
}

fn kind_from_str(s: &str) -> Result<VarKind, FormatError> {
    match s {
        "decision" => Ok(VarKind::Decision),
        "environment" => Ok(VarKind::Environment),
        other => schema(format!("unknown variable kind `{other}`")),
    }
}

fn table_json(f: &ScopedFunction) -> Json {
    Json::Array(f.table().iter().map(Value::to_json).collect())
}

pub fn network_to_json(n: &PfuNetwork) -> Json {
    let var_names = |scope: &[VarId]| -> Json { scope.iter().map(|&v| n.variable(v).name.clone()).collect() };
    let comp_name = |c: usize| n.dag().component(c).name.clone();
    let factor = |f: &Factor| {
        json!({ "owner": comp_name(f.owner), "scope": var_names(f.function.scope()), "table": table_json(&f.function) })
    };
    json!({
        "structure": structure_to_json(&n.structure().spec),
        "variables": n.variables().iter().map(|v| json!({ "name": v.name, "kind": v.kind.as_str(), "domain": v.domain })).collect::<Vec<_>>(),
        "dag": { "components": n.dag().components().iter().map(|c| json!({
            "id": c.name,
            "kind": c.kind.as_str(),
            "vars": var_names(&c.vars),
            "parents": c.parents.iter().map(|&p| comp_name(p)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>() },
        "P": n.plausibilities().iter().map(factor).collect::<Vec<_>>(),
        "F": n.feasibilities().iter().map(factor).collect::<Vec<_>>(),
        "U": n.utilities().iter().map(|u| json!({ "scope": var_names(u.scope()), "table": table_json(u) })).collect::<Vec<_>>(),
    })
}

pub fn network_from_json(j: &Json) -> Result<PfuNetwork, FormatError> {
    let structure = Arc::new(structure_from_json(field(j, "structure")?)?);
    let mut variables = Vec::new();
    for v in array_of(field(j, "variables")?, "variables")? {
        variables.push(Variable {
            name: str_of(field(v, "name")?, "variable name")?.to_string(),
            kind: kind_from_str(str_of(field(v, "kind")?, "variable kind")?)?,
            domain: strings(field(v, "domain")?, "domain")?,
        });
    }
    let var_id = |name: &str| {
        variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| FormatError::Schema(format!("unknown variable `{name}`")))
    };
    let scope_of = |j: &Json| -> Result<Vec<VarId>, FormatError> {
        strings(j, "scope")?.iter().map(|s| var_id(s)).collect()
    };
    let comps_json = array_of(field(field(j, "dag")?, "components")?, "components")?;
    let comp_names: Vec<String> = comps_json
        .iter()
        .map(|c| str_of(field(c, "id")?, "component id").map(str::to_string))
        .collect::<Result<_, _>>()?;
    let comp_id = |name: &str| {
        comp_names.iter().position(|c| c == name).ok_or_else(|| FormatError::Schema(format!("unknown component `{name}`")))
    };
    let mut components = Vec::new();
    for (c, name) in comps_json.iter().zip(&comp_names) {
        components.push(Component {
            name: name.clone(),
            kind: kind_from_str(str_of(field(c, "kind")?, "component kind")?)?,
            vars: scope_of(field(c, "vars")?)?,
            parents: strings(field(c, "parents")?, "parents")?.iter().map(|p| comp_id(p)).collect::<Result<_, _>>()?,
        });
    }
    let function = |f: &Json, codomain: Codomain| -> Result<ScopedFunction, FormatError> {
        let scope = scope_of(field(f, "scope")?)?;
        let dims = scope.iter().map(|&v| variables[v].size()).collect();
        Ok(ScopedFunction::new(scope, dims, codomain, values(field(f, "table")?, "table")?)?)
    };
    let factors = |key: &str, codomain: Codomain| -> Result<Vec<Factor>, FormatError> {
        let Some(list) = j.get(key) else { return Ok(Vec::new()) };
        array_of(list, key)?
            .iter()
            .map(|f| Ok(Factor { owner: comp_id(str_of(field(f, "owner")?, "owner")?)?, function: function(f, codomain)? }))
            .collect()
    };
    let plausibilities = factors("P", Codomain::Plausibility)?;
    let feasibilities = factors("F", Codomain::Feasibility)?;
    let utilities = match j.get("U") {
        None => Vec::new(),
        Some(list) => array_of(list, "U")?.iter().map(|f| function(f, Codomain::Utility)).collect::<Result<_, _>>()?,
    };
    Ok(PfuNetwork::new(structure, variables, ComponentDag::new(components), plausibilities, feasibilities, utilities)?)
}

pub fn query_to_json(q: &Query, threshold: Option<&Value>) -> Json {
    let n = q.network();
    let mut o = Map::new();
    o.insert(
        "sov".into(),
        q.sov()
            .pairs
            .iter()
            .map(|p| json!({ "op": p.op.as_str(), "vars": p.vars.iter().map(|&v| n.variable(v).name.clone()).collect::<Vec<_>>() }))
            .collect(),
    );
    if let Some(t) = threshold {
        o.insert("threshold".into(), t.to_json());
    }
    Json::Object(o)
}

/// Parses and validates a query block. Unknown variable names are schema
/// errors; violated query conditions come back as [`FormatError::Query`].
pub fn query_from_json(j: &Json, n: Arc<PfuNetwork>) -> Result<(Query, Option<Value>), FormatError> {
    let mut sov = Sov::default();
    for p in array_of(field(j, "sov")?, "sov")? {
        let op_name = str_of(field(p, "op")?, "op")?;
        let op = QuantOp::parse(op_name).ok_or_else(|| FormatError::Schema(format!("unknown operator `{op_name}`")))?;
        let vars = strings(field(p, "vars")?, "vars")?
            .iter()
            .map(|name| n.var_id(name).ok_or_else(|| FormatError::Schema(format!("unknown variable `{name}`"))))
            .collect::<Result<_, _>>()?;
        sov.push(op, vars);
    }
    let threshold = j.get("threshold").map(Value::from_json).transpose()?;
    let q = validate_query(n, sov)?;
    if let Some(t) = &threshold {
        crate::query::BoundedQuery::new(q.clone(), t.clone())?;
    }
    Ok((q, threshold))
}

fn labels_of(n: &PfuNetwork, vars: &[VarId], local: &[usize]) -> Json {
    let mut o = Map::new();
    for (&v, &x) in vars.iter().zip(local) {
        o.insert(n.variable(v).name.clone(), Json::String(n.variable(v).domain[x].clone()));
    }
    Json::Object(o)
}

fn indices_of(n: &PfuNetwork, vars: &[VarId], j: &Json) -> Result<Vec<usize>, FormatError> {
    vars.iter()
        .map(|&v| {
            let var = n.variable(v);
            let label = str_of(field(j, &var.name)?, "label")?;
            var.label_index(label).ok_or_else(|| FormatError::Schema(format!("`{label}` is not a value of `{}`", var.name)))
        })
        .collect()
}

/// `{free_vars, entries, policy}`; entries are row-major over the free
/// variables and the policy maps each decision pair index to its recorded
/// `{context, choice}` entries.
pub fn answer_to_json(q: &Query, answer: &AnswerTable, policy: &Policy, threshold: Option<&Value>) -> Json {
    let n = q.network();
    let mut rules = Map::new();
    for r in &policy.rules {
        let entries: Vec<Json> = r
            .entries
            .iter()
            .map(|(ctx, choice)| {
                let c = match choice {
                    Choice::Assign(a) => labels_of(n, &r.decision, a),
                    Choice::Unfeasible => Json::String("unfeasible".into()),
                };
                json!({ "context": labels_of(n, &r.context, ctx), "choice": c })
            })
            .collect();
        rules.insert(r.pair_index.to_string(), Json::Array(entries));
    }
    let mut o = Map::new();
    o.insert("free_vars".into(), answer.vars.iter().map(|&v| Json::String(n.variable(v).name.clone())).collect());
    o.insert("entries".into(), answer.entries.iter().map(Value::to_json).collect());
    if let Some(t) = threshold {
        o.insert("threshold".into(), t.to_json());
    }
    o.insert("policy".into(), Json::Object(rules));
    Json::Object(o)
}

pub fn answer_from_json(j: &Json, q: &Query) -> Result<(AnswerTable, Policy), FormatError> {
    let n = q.network();
    let vars: Vec<VarId> = strings(field(j, "free_vars")?, "free_vars")?
        .iter()
        .map(|name| n.var_id(name).ok_or_else(|| FormatError::Schema(format!("unknown variable `{name}`"))))
        .collect::<Result<_, _>>()?;
    let dims = n.dims(&vars);
    let entries = values(field(j, "entries")?, "entries")?;
    if entries.len() != AnswerTable::size_for(&dims) {
        return schema("answer entries do not match the free variables");
    }
    let mut policy = Policy::for_query(q);
    let rules = field(j, "policy")?.as_object().ok_or_else(|| FormatError::Schema("policy must be an object".into()))?;
    for (key, list) in rules {
        let index: usize = key.parse().map_err(|_| FormatError::Schema(format!("bad pair index `{key}`")))?;
        let Some(rule) = policy.rule_mut(index) else {
            return schema(format!("pair {index} is not a decision pair"));
        };
        let DecisionRule { context, decision, entries: map, .. } = rule;
        for e in array_of(list, "policy entries")? {
            let ctx = indices_of(n, context, field(e, "context")?)?;
            let choice = match field(e, "choice")? {
                Json::String(s) if s == "unfeasible" => Choice::Unfeasible,
                c => Choice::Assign(indices_of(n, decision, c)?),
            };
            map.insert(ctx, choice);
        }
    }
    Ok((AnswerTable { vars, dims, entries }, policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dinner, dinner_query};
    use crate::solvers::{tree_search, SolveOptions};

    #[test]
    fn network_round_trip() {
        let j = network_to_json(&dinner());
        let back = network_from_json(&j).unwrap();
        assert_eq!(network_to_json(&back), j);
    }

    #[test]
    fn query_and_answer_round_trip() {
        let n = Arc::new(dinner());
        let q = dinner_query(n.clone(), 2);
        let j = query_to_json(&q, Some(&Value::int(0)));
        let (q2, t) = query_from_json(&j, n).unwrap();
        assert_eq!(q2.sov(), q.sov());
        assert_eq!(t, Some(Value::int(0)));
        let r = tree_search(&q, &SolveOptions::default()).unwrap();
        let a = answer_to_json(&q, &r.answer, &r.policy, None);
        let (answer, policy) = answer_from_json(&a, &q).unwrap();
        assert_eq!(answer, r.answer);
        assert_eq!(policy, r.policy);
    }

    #[test]
    fn structures_round_trip() {
        for text in [r#""kappa""#, r#"{"product":["prob-additive","kappa"]}"#, r#"{"vcsp":{"table":[[0,1],[1,1]]}}"#] {
            let j: Json = serde_json::from_str(text).unwrap();
            let s = structure_from_json(&j).unwrap();
            assert_eq!(structure_to_json(&s.spec), j);
        }
        assert!(structure_from_json(&json!("nope")).is_err());
    }

    #[test]
    fn query_conditions_surface() {
        let n = Arc::new(dinner());
        let j = json!({ "sov": [ { "op": "elim", "vars": ["ep_J", "ep_M", "bp_J", "bp_M"] }, { "op": "max", "vars": ["mc", "w"] } ] });
        match query_from_json(&j, n) {
            Err(FormatError::Query(e)) => assert_eq!(e.condition(), Some(4)),
            other => panic!("{other:?}"),
        }
    }
}
