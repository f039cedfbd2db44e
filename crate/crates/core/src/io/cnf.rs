use std::fmt::Write;

use crate::algebra::Value;
use crate::encoders::{CnfInstance, Quantifier};

use super::FormatError;

/// Which quantifier lines a CNF file may contain: none, `e`/`a`, or
/// `e`/`a`/`r` plus a `t <threshold>` line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnfDialect {
    Dimacs,
    Qdimacs,
    Ssat,
}

fn syntax<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Syntax { line, message: message.into() })
}

fn int(tok: &str, line: usize) -> Result<i64, FormatError> {
    tok.parse().map_err(|_| FormatError::Syntax { line, message: format!("`{tok}` is not an integer") })
}

pub fn parse_cnf(text: &str, dialect: CnfDialect) -> Result<CnfInstance, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut prefix: Vec<(Quantifier, usize)> = Vec::new();
    let mut threshold = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        let mut toks = t.split_whitespace();
        let first = toks.next().unwrap();
        if first == "p" {
            if header.is_some() {
                return syntax(line, "second problem line");
            }
            if toks.next() != Some("cnf") {
                return syntax(line, "expected `p cnf <vars> <clauses>`");
            }
            let nv = toks.next().map(|x| int(x, line)).transpose()?;
            let nc = toks.next().map(|x| int(x, line)).transpose()?;
            match (nv, nc) {
                (Some(v), Some(c)) if v >= 0 && c >= 0 => header = Some((v as usize, c as usize)),
                _ => return syntax(line, "expected `p cnf <vars> <clauses>`"),
            }
            continue;
        }
        if header.is_none() {
            return syntax(line, "content before the problem line");
        }
        if first == "t" {
            if dialect != CnfDialect::Ssat {
                return syntax(line, "threshold lines need the ssat dialect");
            }
            let v = toks.next().ok_or(FormatError::Syntax { line, message: "missing threshold".into() })?;
            threshold = Some(Value::parse_literal(v)?);
            continue;
        }
        if let Some(q) = ["e", "a", "r"].contains(&first).then(|| Quantifier::parse(first)).flatten() {
            let allowed = match dialect {
                CnfDialect::Dimacs => false,
                CnfDialect::Qdimacs => q != Quantifier::Random,
                CnfDialect::Ssat => true,
            };
            if !allowed {
                return syntax(line, format!("quantifier `{first}` is not allowed in this dialect"));
            }
            if !clauses.is_empty() || !current.is_empty() {
                return syntax(line, "quantifier lines must precede the clauses");
            }
            let mut closed = false;
            for tok in toks {
                let v = int(tok, line)?;
                if v == 0 {
                    closed = true;
                    break;
                }
                if v < 0 {
                    return syntax(line, "quantified variables are positive");
                }
                prefix.push((q, v as usize));
            }
            if !closed {
                return syntax(line, "quantifier line must end with 0");
            }
            continue;
        }
        for tok in std::iter::once(first).chain(toks) {
            let l = int(tok, line)?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(l);
            }
        }
    }
    let Some((num_vars, num_clauses)) = header else {
        return syntax(0, "missing problem line");
    };
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != num_clauses {
        return syntax(0, format!("header announces {num_clauses} clauses, found {}", clauses.len()));
    }
    let c = CnfInstance {
        num_vars,
        clauses,
        prefix: (dialect != CnfDialect::Dimacs).then_some(prefix),
        threshold,
    };
    c.validate()?;
    Ok(c)
}

/// Writes the instance in the smallest dialect that holds it.
pub fn write_cnf(c: &CnfInstance) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", c.num_vars, c.clauses.len()).unwrap();
    if let Some(t) = &c.threshold {
        writeln!(out, "t {t}").unwrap();
    }
    if let Some(prefix) = &c.prefix {
        let mut i = 0;
        while i < prefix.len() {
            let q = prefix[i].0;
            let letter = match q {
                Quantifier::Exists => "e",
                Quantifier::Forall => "a",
                Quantifier::Random => "r",
            };
            write!(out, "{letter}").unwrap();
            while i < prefix.len() && prefix[i].0 == q {
                write!(out, " {}", prefix[i].1).unwrap();
                i += 1;
            }
            writeln!(out, " 0").unwrap();
        }
    }
    for clause in &c.clauses {
        for l in clause {
            write!(out, "{l} ").unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ3: &str = "c example\np cnf 3 2\ne 1 0\na 2 0\ne 3 0\n-1 3 0\n2 3 0\n";

    #[test]
    fn qdimacs_prefix() {
        let c = parse_cnf(EQ3, CnfDialect::Qdimacs).unwrap();
        assert_eq!(c.num_vars, 3);
        assert_eq!(c.clauses, vec![vec![-1, 3], vec![2, 3]]);
        let p = c.prefix.as_ref().unwrap();
        assert_eq!(p, &vec![(Quantifier::Exists, 1), (Quantifier::Forall, 2), (Quantifier::Exists, 3)]);
        assert_eq!(parse_cnf(&write_cnf(&c), CnfDialect::Qdimacs).unwrap(), c);
    }

    #[test]
    fn ssat_threshold_round_trip() {
        let text = "p cnf 2 1\nt 1/2\nr 1 2 0\n1 2 0\n";
        let c = parse_cnf(text, CnfDialect::Ssat).unwrap();
        assert_eq!(c.threshold, Some(Value::ratio(1, 2)));
        assert_eq!(parse_cnf(&write_cnf(&c), CnfDialect::Ssat).unwrap(), c);
    }

    #[test]
    fn dialect_errors() {
        assert!(parse_cnf(EQ3, CnfDialect::Dimacs).is_err());
        assert!(parse_cnf("p cnf 1 1\nr 1 0\n1 0\n", CnfDialect::Qdimacs).is_err());
        assert!(parse_cnf("1 0\n", CnfDialect::Dimacs).is_err());
        assert!(parse_cnf("p cnf 1 2\n1 0\n", CnfDialect::Dimacs).is_err());
        assert!(parse_cnf("p cnf 1 1\n2 0\n", CnfDialect::Dimacs).is_err());
        let multi = parse_cnf("p cnf 2 2\n1\n -2 0 2 0\n", CnfDialect::Dimacs).unwrap();
        assert_eq!(multi.clauses, vec![vec![1, -2], vec![2]]);
    }
}
