use std::path::{Path, PathBuf};
use std::sync::Arc;

use pfu::io::{
    encode_source, network_from_json, network_to_json, query_from_json, query_to_json, EncodeOptions, SourceFormat,
};

use crate::{pretty, read_text, write_text, Failure, EXIT_MISMATCH};

#[derive(clap::Args)]
pub struct EncodeArgs {
    /// dimacs, qdimacs, ssat, uai, csp, id or mdp.
    #[arg(long)]
    from: SourceFormat,
    input: PathBuf,
    /// Output prefix; writes `<prefix>.net.json` and `<prefix>.query.json`.
    #[arg(long)]
    out: PathBuf,
    /// CSP task, or UAI task: marginal, evidence, mpe or map.
    #[arg(long)]
    task: Option<String>,
    /// UAI evidence file.
    #[arg(long)]
    evidence: Option<PathBuf>,
    /// UAI marginal targets or MAP explanation variables, by index or `x<i>` name.
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(args: &EncodeArgs) -> Result<(), Failure> {
    let text = read_text(&args.input)?;
    let opts = EncodeOptions {
        task: args.task.clone(),
        evidence: args.evidence.as_deref().map(read_text).transpose()?,
        vars: args.vars.clone(),
    };
    let (q, threshold) = encode_source(args.from, &text, &opts)?;
    let net_json = network_to_json(q.network());
    let query_json = query_to_json(&q, threshold.as_ref());

    // emitted files must parse back to the same network and query
    let back = Arc::new(network_from_json(&net_json)?);
    let (bq, bt) = query_from_json(&query_json, back.clone())?;
    if network_to_json(&back) != net_json || query_to_json(&bq, bt.as_ref()) != query_json {
        return Err(Failure::new(EXIT_MISMATCH, "encoded files do not round-trip"));
    }

    let net_path = with_suffix(&args.out, ".net.json");
    let query_path = with_suffix(&args.out, ".query.json");
    write_text(&net_path, &pretty(&net_json))?;
    write_text(&query_path, &pretty(&query_json))?;
    let n = q.network();
    println!(
        "{}: {} variables, {} components, {} plausibilities, {} feasibilities, {} utilities",
        n.structure().name,
        n.num_vars(),
        n.dag().len(),
        n.plausibilities().len(),
        n.feasibilities().len(),
        n.utilities().len()
    );
    let sov: Vec<String> = q.sov().pairs.iter().map(|p| format!("({}, {})", p.op.as_str(), p.vars.len())).collect();
    println!("sov: {}", sov.join("."));
    if let Some(t) = &threshold {
        println!("threshold: {t}");
    }
    println!("wrote {} and {}", net_path.display(), query_path.display());
    Ok(())
}
