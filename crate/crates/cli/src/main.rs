mod encode;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

use pfu::algebra::{check_axioms, product_structure, CatalogId, ExpectedUtilityStructure, Value};
use pfu::encoders::EncodeError;
use pfu::io::{answer_to_json, network_from_json, query_from_json, structure_from_json, FormatError};
use pfu::network::{validate_network_with_cap, PfuNetwork, DEFAULT_TABLE_CAP};
use pfu::query::{apply_threshold, BoundedQuery, Query};
use pfu::solvers::{semantic_oracle, tree_search, Algorithm, SolveError, SolveOptions, SolveResult, DEFAULT_ORACLE_CAP};

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_MISMATCH: u8 = 4;
pub const EXIT_AXIOM: u8 = 5;

#[derive(Parser)]
#[command(name = "pfu", version, about = "Solve and check plausibility-feasibility-utility networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Caps {
    /// Largest table any solver may build.
    #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
    table_cap: usize,
    /// Most variables the semantic oracle accepts.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
}

impl Caps {
    fn options(&self) -> SolveOptions {
        SolveOptions { table_cap: self.table_cap, oracle_var_cap: self.oracle_cap, record_policy: true }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a network and, optionally, a query against it.
    Validate {
        network: PathBuf,
        query: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TABLE_CAP)]
        table_cap: usize,
    },
    /// Solve a query and print the answer table and policy.
    Solve {
        network: PathBuf,
        query: PathBuf,
        /// tree, ve, ve-ax1, ve-ax2, oracle or all.
        #[arg(long, default_value = "tree")]
        algo: String,
        /// Threshold θ; overrides one given in the query file.
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<String>,
        /// Write the answer here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Translate an instance of another formalism into network and query files.
    Encode(encode::EncodeArgs),
    /// Check the algebraic axioms of the catalog structures.
    CheckAlgebra {
        /// Samples per axiom family for infinite carriers.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Structure to check instead of the catalog: a catalog id, JSON
        /// text or a JSON file. Repeatable.
        #[arg(long)]
        structure: Vec<String>,
    },
    /// Compare the semantic oracle with tree search.
    OracleDiff {
        network: PathBuf,
        query: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
}

/// A failed command: what to print and which status to exit with.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }

    fn prefixed(self, what: &str) -> Failure {
        Failure { code: self.code, message: format!("{what}: {}", self.message) }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match &e {
            FormatError::Query(_) => EXIT_INVALID,
            FormatError::Encode(e) => return e.clone().into(),
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<EncodeError> for Failure {
    fn from(e: EncodeError) -> Self {
        let code = match &e {
            EncodeError::Malformed(_) | EncodeError::Network(_) | EncodeError::Algebra(_) => EXIT_PARSE,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match &e {
            SolveError::CapExceeded { .. } | SolveError::OracleCap { .. } => EXIT_CAP,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

pub fn read_json(path: &Path) -> Result<Json, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

pub fn pretty(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("serializable");
    s.push('\n');
    s
}

fn load_network(path: &Path) -> Result<Arc<PfuNetwork>, Failure> {
    Ok(Arc::new(network_from_json(&read_json(path)?)?))
}

fn load_query(path: &Path, n: Arc<PfuNetwork>) -> Result<(Query, Option<Value>), Failure> {
    Ok(query_from_json(&read_json(path)?, n)?)
}

fn require_valid(n: &PfuNetwork, cap: usize) -> Result<(), Failure> {
    let report = validate_network_with_cap(n, cap);
    if report.is_valid() {
        return Ok(());
    }
    let names: Vec<&str> = report.failed_clauses().iter().map(|c| c.name()).collect();
    Err(Failure::new(EXIT_INVALID, format!("network fails {}\n{report}", names.join(", "))))
}

fn validate(network: &Path, query: Option<&Path>, table_cap: usize) -> Result<(), Failure> {
    let n = load_network(network)?;
    let report = validate_network_with_cap(&n, table_cap);
    print!("{report}");
    if !report.is_valid() {
        let names: Vec<&str> = report.failed_clauses().iter().map(|c| c.name()).collect();
        return Err(Failure::new(EXIT_INVALID, format!("network fails {}", names.join(", "))));
    }
    if let Some(q) = query {
        load_query(q, n)?;
        println!("ok   query");
    }
    Ok(())
}

fn algorithms(name: &str, q: &Query) -> Result<Vec<Algorithm>, Failure> {
    if name == "all" {
        return Ok(Algorithm::ALL.into_iter().filter(|a| a.applicable(q)).collect());
    }
    let a = Algorithm::parse(name).ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown algorithm `{name}`")))?;
    if !a.applicable(q) {
        return Err(Failure::new(
            EXIT_INVALID,
            format!("{name} does not apply to structure `{}`", q.structure().name),
        ));
    }
    Ok(vec![a])
}

fn solve(
    network: &Path,
    query: &Path,
    algo: &str,
    threshold: Option<&str>,
    out: Option<&Path>,
    opts: &SolveOptions,
) -> Result<(), Failure> {
    let n = load_network(network)?;
    require_valid(&n, opts.table_cap)?;
    let (q, file_threshold) = load_query(query, n)?;
    let threshold = match threshold {
        Some(t) => Some(Value::parse_literal(t).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?),
        None => file_threshold,
    };
    if let Some(t) = &threshold {
        BoundedQuery::new(q.clone(), t.clone()).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    }
    let algos = algorithms(algo, &q)?;
    let mut results: Vec<(Algorithm, SolveResult)> = Vec::new();
    for a in algos {
        let r = a.run(&q, opts).map_err(|e| Failure::from(e).prefixed(a.as_str()))?;
        eprintln!("{}: nodes {} eliminations {} peak table {}", a.as_str(), r.stats.nodes, r.stats.eliminations, r.stats.peak_table);
        results.push((a, r));
    }
    let (first, reference) = &results[0];
    for (a, r) in &results[1..] {
        if r.answer != reference.answer {
            return Err(Failure::new(
                EXIT_MISMATCH,
                format!("{} and {} disagree: {:?} vs {:?}", first.as_str(), a.as_str(), show(&reference.answer.entries), show(&r.answer.entries)),
            ));
        }
    }
    let answer = match &threshold {
        Some(t) => apply_threshold(&reference.answer, t, q.structure()),
        None => reference.answer.clone(),
    };
    let text = pretty(&answer_to_json(&q, &answer, &reference.policy, threshold.as_ref()));
    match out {
        Some(path) => {
            write_text(path, &text)?;
            println!("answer: {}", show(&answer.entries).join(" "));
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn show(entries: &[Value]) -> Vec<String> {
    entries.iter().map(Value::to_string).collect()
}

fn oracle_diff(network: &Path, query: &Path, opts: &SolveOptions) -> Result<(), Failure> {
    let n = load_network(network)?;
    require_valid(&n, opts.table_cap)?;
    let (q, _) = load_query(query, n)?;
    if !q.structure().conditionable() {
        return Err(SolveError::NotConditionable(q.structure().name.clone()).into());
    }
    let oracle = semantic_oracle(&q, opts)?;
    let tree = tree_search(&q, opts)?;
    println!("oracle: {}", show(&oracle.answer.entries).join(" "));
    println!("tree:   {}", show(&tree.answer.entries).join(" "));
    if oracle.answer != tree.answer {
        return Err(Failure::new(EXIT_MISMATCH, "answers differ"));
    }
    if let Err(m) = oracle.policy.agrees_on(&tree.policy) {
        return Err(Failure::new(EXIT_MISMATCH, format!("policies differ: {m}")));
    }
    println!("answers and policies agree");
    Ok(())
}

fn structure_arg(s: &str) -> Result<ExpectedUtilityStructure, Failure> {
    if let Ok(id) = s.parse::<CatalogId>() {
        return Ok(id.structure());
    }
    let path = Path::new(s);
    let j = if path.exists() {
        read_json(path)?
    } else {
        serde_json::from_str(s).map_err(|e| Failure::new(EXIT_PARSE, format!("structure `{s}`: {e}")))?
    };
    Ok(structure_from_json(&j)?)
}

fn check_algebra(samples: usize, seed: u64, structures: &[String]) -> Result<(), Failure> {
    let list: Vec<ExpectedUtilityStructure> = if structures.is_empty() {
        let mut l: Vec<_> = CatalogId::ALL.iter().map(|id| id.structure()).collect();
        l.push(product_structure(&CatalogId::ProbSat.structure(), &CatalogId::Kappa.structure()));
        l
    } else {
        structures.iter().map(|s| structure_arg(s)).collect::<Result<_, _>>()?
    };
    let mut failed = Vec::new();
    for s in &list {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let report = check_axioms(s, &mut rng, samples);
        print!("{report}");
        if !report.all_passed() {
            failed.push(s.name.clone());
        }
    }
    println!("{} structures checked, {} failed", list.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_AXIOM, format!("axioms fail for {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { network, query, table_cap } => validate(&network, query.as_deref(), table_cap),
        Command::Solve { network, query, algo, threshold, out, caps } => {
            solve(&network, &query, &algo, threshold.as_deref(), out.as_deref(), &caps.options())
        }
        Command::Encode(args) => encode::run(&args),
        Command::CheckAlgebra { samples, seed, structure } => check_algebra(samples, seed, &structure),
        Command::OracleDiff { network, query, caps } => oracle_diff(&network, &query, &caps.options()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
