use crate::algebra::Value;
use crate::encoders::{BnNode, Evidence};

use super::FormatError;

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Tokens<'a> {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| FormatError::Syntax {
            line: self.items.last().map_or(0, |t| t.0),
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn usize(&mut self, what: &str) -> Result<usize, FormatError> {
        let (line, t) = self.next(what)?;
        t.parse().map_err(|_| FormatError::Syntax { line, message: format!("expected {what}, found `{t}`") })
    }

    fn done(&self) -> Result<(), FormatError> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&(line, t)) => Err(FormatError::Syntax { line, message: format!("trailing token `{t}`") }),
        }
    }
}

/// Parses a `BAYES` UAI file. Variable i is named `x{i}` with values
/// `0..card`; each factor's last scope variable is the node it defines.
/// Decimal entries are read as exact rationals.
pub fn parse_uai(text: &str) -> Result<Vec<BnNode>, FormatError> {
    let mut t = Tokens::new(text);
    let (line, kind) = t.next("network type")?;
    if kind != "BAYES" {
        return Err(FormatError::Syntax { line, message: format!("only BAYES networks are supported, found `{kind}`") });
    }
    let n = t.usize("variable count")?;
    let cards: Vec<usize> = (0..n).map(|_| t.usize("cardinality")).collect::<Result<_, _>>()?;
    let nf = t.usize("factor count")?;
    let mut scopes = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k = t.usize("scope size")?;
        let mut scope = Vec::with_capacity(k);
        for _ in 0..k {
            let line = t.items.get(t.pos).map_or(0, |x| x.0);
            let v = t.usize("variable index")?;
            if v >= n {
                return Err(FormatError::Syntax { line, message: format!("variable {v} out of range") });
            }
            scope.push(v);
        }
        if scope.is_empty() {
            return Err(FormatError::Syntax { line, message: "empty factor scope".into() });
        }
        scopes.push(scope);
    }
    let mut nodes: Vec<Option<BnNode>> = vec![None; n];
    for scope in scopes {
        let size = t.usize("table size")?;
        let expected: usize = scope.iter().map(|&v| cards[v]).product();
        if size != expected {
            return Err(FormatError::Syntax { line: 0, message: format!("table size {size}, scope needs {expected}") });
        }
        let mut table = Vec::with_capacity(size);
        for _ in 0..size {
            let (line, tok) = t.next("table entry")?;
            table.push(Value::parse_literal(tok).map_err(|_| FormatError::Syntax { line, message: format!("bad entry `{tok}`") })?);
        }
        let child = *scope.last().unwrap();
        if nodes[child].is_some() {
            return Err(FormatError::Syntax { line: 0, message: format!("variable {child} has two tables") });
        }
        let labels: Vec<String> = (0..cards[child]).map(|x| x.to_string()).collect();
        nodes[child] = Some(BnNode {
            name: format!("x{child}"),
            domain: labels,
            parents: scope[..scope.len() - 1].to_vec(),
            cpt: table,
        });
    }
    t.done()?;
    nodes
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or(FormatError::Syntax { line: 0, message: format!("variable {i} has no table") }))
        .collect()
}

/// Parses a UAI evidence file: a count followed by (variable, value) pairs.
pub fn parse_uai_evidence(text: &str) -> Result<Evidence, FormatError> {
    let mut t = Tokens::new(text);
    if t.items.is_empty() {
        return Ok(Vec::new());
    }
    let k = t.usize("evidence count")?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push((t.usize("variable")?, t.usize("value")?));
    }
    t.done()?;
    Ok(out)
}
