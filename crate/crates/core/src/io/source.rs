use std::fmt;
use std::str::FromStr;

use crate::algebra::Value;
use crate::encoders::{
    encode_bn, encode_cnf, encode_csp, encode_id, encode_mdp, encode_pomdp, BnInstance, BnTask, CspFlavor, CspTask,
};
use crate::query::Query;

use super::{csp_from_json, id_from_json, mdp_from_json, parse_cnf, parse_uai, parse_uai_evidence, CnfDialect, FormatError};

/// Instance formats accepted by [`encode_source`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SourceFormat {
    Dimacs,
    Qdimacs,
    Ssat,
    Uai,
    Csp,
    Id,
    Mdp,
}

impl SourceFormat {
    pub const ALL: [SourceFormat; 7] = [
        SourceFormat::Dimacs,
        SourceFormat::Qdimacs,
        SourceFormat::Ssat,
        SourceFormat::Uai,
        SourceFormat::Csp,
        SourceFormat::Id,
        SourceFormat::Mdp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::Dimacs => "dimacs",
            SourceFormat::Qdimacs => "qdimacs",
            SourceFormat::Ssat => "ssat",
            SourceFormat::Uai => "uai",
            SourceFormat::Csp => "csp",
            SourceFormat::Id => "id",
            SourceFormat::Mdp => "mdp",
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceFormat {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| FormatError::Schema(format!("unknown source format `{s}`")))
    }
}

/// Task selection for formats whose files do not fix one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    /// CSP task, or one of `marginal`, `evidence`, `mpe`, `map` for UAI.
    pub task: Option<String>,
    /// Contents of a UAI evidence file.
    pub evidence: Option<String>,
    /// UAI marginal targets or MAP explanation, as indices or `x<i>` names.
    pub vars: Vec<String>,
}

fn uai_var(s: &str, n: usize) -> Result<usize, FormatError> {
    let v: usize = s
        .strip_prefix('x')
        .unwrap_or(s)
        .parse()
        .map_err(|_| FormatError::Schema(format!("bad variable `{s}`")))?;
    if v >= n {
        return Err(FormatError::Schema(format!("variable {v} out of range")));
    }
    Ok(v)
}

fn encode_uai(text: &str, opts: &EncodeOptions) -> Result<Query, FormatError> {
    let nodes = parse_uai(text)?;
    let evidence = match &opts.evidence {
        Some(e) => parse_uai_evidence(e)?,
        None => Vec::new(),
    };
    let vars = opts.vars.iter().map(|s| uai_var(s, nodes.len())).collect::<Result<Vec<_>, _>>()?;
    let task = match opts.task.as_deref().unwrap_or("marginal") {
        "marginal" if evidence.is_empty() => BnTask::Marginal(vars),
        "marginal" => return Err(FormatError::Schema("marginal tasks take no evidence".into())),
        "evidence" => BnTask::Evidence(evidence),
        "mpe" => BnTask::Mpe(evidence),
        "map" => BnTask::Map { explanation: vars, evidence },
        other => return Err(FormatError::Schema(format!("unknown task `{other}`"))),
    };
    Ok(encode_bn(&BnInstance { nodes, task })?)
}

fn default_csp_task(flavor: &CspFlavor) -> CspTask {
    match flavor {
        CspFlavor::Hard => CspTask::Solve,
        CspFlavor::Valued(_) => CspTask::Optimize,
        CspFlavor::Quantified(_) => CspTask::Quantified,
        CspFlavor::Stochastic { .. } => CspTask::StochasticPolicy,
    }
}

/// Parses `text` in `format` and encodes it as a query, with the threshold
/// an SSAT file or QBF prefix carries.
pub fn encode_source(
    format: SourceFormat,
    text: &str,
    opts: &EncodeOptions,
) -> Result<(Query, Option<Value>), FormatError> {
    let cnf = |dialect| -> Result<(Query, Option<Value>), FormatError> {
        let e = encode_cnf(&parse_cnf(text, dialect)?)?;
        let t = e.threshold().cloned();
        Ok((e.into_query(), t))
    };
    match format {
        SourceFormat::Dimacs => cnf(CnfDialect::Dimacs),
        SourceFormat::Qdimacs => cnf(CnfDialect::Qdimacs),
        SourceFormat::Ssat => cnf(CnfDialect::Ssat),
        SourceFormat::Uai => Ok((encode_uai(text, opts)?, None)),
        SourceFormat::Csp => {
            let (c, file_task) = csp_from_json(text)?;
            let task = match &opts.task {
                Some(t) => CspTask::parse(t).ok_or_else(|| FormatError::Schema(format!("unknown task `{t}`")))?,
                None => file_task.unwrap_or_else(|| default_csp_task(&c.flavor)),
            };
            Ok((encode_csp(&c, task)?, None))
        }
        SourceFormat::Id => Ok((encode_id(&id_from_json(text)?)?, None)),
        SourceFormat::Mdp => {
            let f = mdp_from_json(text)?;
            let q = match &f.observations {
                Some(o) => encode_pomdp(&f.mdp, o)?,
                None => encode_mdp(&f.mdp)?,
            };
            Ok((q, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_parse() {
        for f in SourceFormat::ALL {
            assert_eq!(f.as_str().parse::<SourceFormat>().unwrap(), f);
        }
        assert!("xml".parse::<SourceFormat>().is_err());
    }

    #[test]
    fn uai_tasks() {
        let chain = "BAYES\n2\n2 2\n2\n1 0\n2 0 1\n2\n0.7 0.3\n4\n0.5 0.5 0.2 0.8\n";
        let opts = EncodeOptions { task: Some("mpe".into()), ..EncodeOptions::default() };
        let (q, t) = encode_source(SourceFormat::Uai, chain, &opts).unwrap();
        assert!(t.is_none());
        let r = crate::solvers::tree_search(&q, &crate::solvers::SolveOptions::default()).unwrap();
        assert_eq!(r.answer.value(), Some(&Value::ratio(7, 20)));
        let bad = EncodeOptions { task: Some("marginal".into()), evidence: Some("1 0 1".into()), vars: vec![] };
        assert!(encode_source(SourceFormat::Uai, chain, &bad).is_err());
    }
}
