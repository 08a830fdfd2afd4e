use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use forestdec::algebra::{examples, load_algebra, AlgebraError, Valuation};
use forestdec::augmented::StableContextSet;
use forestdec::bounds::{self, check_r_aligned_bounded, default_scope, depth_bound, BoundsError};
use forestdec::counterexample::{
    brute_force_min_depth, build_cx_algebra, check_audit, gen_family, idempotent_audit, metric, CxError,
};
use forestdec::gendec::{fmt_gen, GenError, GenKind, GeneralDecomposition};
use forestdec::search::{Basis, SearchError, SearchScope, State};
use forestdec::semigroup::{classify, green_classes, idempotents_and_exponent, FiniteSemigroup, Green};
use forestdec::terms::Term;

const CAP_VAR: &str = "FORESTDEC_DEPTH_CAP";

#[derive(Parser)]
#[command(name = "forestdec", about = "Decompositions of forests over finite forest algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a bounded-depth decomposition and report its depth against the bound.
    Decompose {
        /// Algebra file; defaults to node count modulo 2 over letters a, b.
        #[arg(long)]
        algebra: Option<String>,
        /// Forest text, or @path to read it from a file.
        #[arg(long)]
        forest: String,
        #[arg(long, value_enum, default_value = "auto")]
        strategy: Strategy,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write the tree here instead of stdout.
        #[arg(long)]
        output: Option<String>,
    },
    /// Search forests up to a size for an alignment violation.
    CheckAlignment {
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        /// Forests allowed under default holes, comma separated.
        #[arg(long, value_delimiter = ',')]
        holes: Vec<String>,
    },
    /// Green's classes and the structural class of a semigroup.
    Green {
        #[arg(long)]
        semigroup: String,
    },
    /// Search oracles.
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
    /// Members of the non-aligned family and their least decomposition depth.
    Counterexample {
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Largest depth tried by the exhaustive search.
        #[arg(long, default_value_t = 4)]
        cap: usize,
        /// Also audit the idempotents of the context span.
        #[arg(long)]
        audit: bool,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Contexts usable at the root of a decomposition, as a sorted JSON array.
    Nxtctx {
        #[arg(long)]
        forest: String,
        /// Restrict to contexts valued by this algebra; all contexts otherwise.
        #[arg(long)]
        algebra: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Auto,
    Group,
    Simple,
    Null,
    Main,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    NotDecomposable(String),
    Cap(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::NotDecomposable(_) => 3,
            Failure::Cap(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::NotDecomposable(m) | Failure::Cap(m) | Failure::Check(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn is_cap(e: &SearchError) -> bool {
    matches!(e, SearchError::DepthCapExceeded(_))
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        let msg = e.to_string();
        match e {
            BoundsError::Search(s) if is_cap(&s) => Failure::Cap(msg),
            BoundsError::Gen(GenError::Search(s)) if is_cap(&s) => Failure::Cap(msg),
            BoundsError::NotDecomposable
            | BoundsError::InnerNotDecomposable(..)
            | BoundsError::AlignmentRequired(_) => Failure::NotDecomposable(msg),
            _ => Failure::Invalid(msg),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        if is_cap(&e) {
            Failure::Cap(e.to_string())
        } else {
            invalid(e)
        }
    }
}

impl From<CxError> for Failure {
    fn from(e: CxError) -> Self {
        match e {
            CxError::SearchCapExceeded(_) => Failure::Cap(e.to_string()),
            CxError::AuditMismatch(_) => Failure::Check(e.to_string()),
            _ => invalid(e),
        }
    }
}

fn read_text(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| invalid(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{path}: {e}")))
}

fn load_valuation(path: Option<&str>) -> Result<Arc<Valuation>, Failure> {
    match path {
        None => Ok(examples::count_mod(2)),
        Some(p) => Ok(load_algebra(&read_file(p)?).map_err(|e: AlgebraError| invalid(e))?.valuation),
    }
}

fn parse_forest(text: &str) -> Result<Term, Failure> {
    Term::parse_forest(&read_text(text)?).map_err(invalid)
}

fn cap_override() -> Result<Option<usize>, Failure> {
    match std::env::var(CAP_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(invalid(format!("{CAP_VAR} must be a positive integer, got {v:?}"))),
        },
    }
}

fn render_text(g: &GeneralDecomposition, val: &Valuation) -> String {
    let mut s = String::new();
    for (addr, n) in g.walk() {
        let indent = "  ".repeat(addr.len());
        let kind = match &n.kind {
            GenKind::Idempotent { value, .. } => format!("I[{}]", val.target().name(*value)),
            k => k.symbol().to_string(),
        };
        s.push_str(&format!("{indent}{} {kind} {}", fmt_gen(&addr), n.forest));
        if n.ctx != Term::hole() {
            s.push_str(&format!(" ctx={}", n.ctx));
        }
        s.push('\n');
    }
    s
}

fn cmd_decompose(
    algebra: Option<&str>,
    forest: &str,
    strategy: Strategy,
    format: Format,
    output: Option<&str>,
) -> Result<(), Failure> {
    let val = load_valuation(algebra)?;
    let f = parse_forest(forest)?;
    val.morphism().alpha(&f).map_err(invalid)?;
    let scope = default_scope(&val).with_cap(cap_override()?);
    let g = match strategy {
        Strategy::Auto => bounds::decompose_auto(&f, &val, &scope),
        Strategy::Group => bounds::decompose_group(&f, &val, &scope),
        Strategy::Simple => bounds::decompose_simple(&f, &val, &scope),
        Strategy::Null => bounds::decompose_null(&f, &val, &scope),
        Strategy::Main => bounds::decompose_main(&f, &val, &scope),
    }?;
    let tag = match strategy {
        Strategy::Main => forestdec::semigroup::ClassTag::General,
        _ => classify(val.target()).tag,
    };
    let bound = depth_bound(tag, val.target().len());
    let artifact = match format {
        Format::Json => g.to_json(),
        Format::Dot => g.to_dot(Some(&val)),
        Format::Text => render_text(&g, &val),
    };
    match output {
        Some(p) => std::fs::write(p, &artifact).map_err(|e| invalid(format!("{p}: {e}")))?,
        None => println!("{}", artifact.trim_end()),
    }
    println!("depth={} bound={bound} ok={}", g.depth(), g.depth() <= bound);
    Ok(())
}

fn cmd_check_alignment(algebra: &str, max_nodes: usize, holes: &[String]) -> Result<(), Failure> {
    if max_nodes == 0 {
        return Err(invalid("--max-nodes must be positive"));
    }
    let val = load_valuation(Some(algebra))?;
    let pool = holes.iter().map(|h| parse_forest(h)).collect::<Result<Vec<_>, _>>()?;
    let report = check_r_aligned_bounded(&val, max_nodes, &pool)?;
    println!("{}", report.to_json());
    Ok(())
}

fn names(s: &FiniteSemigroup, classes: &[Vec<usize>]) -> Vec<Vec<String>> {
    classes
        .iter()
        .map(|c| c.iter().map(|&u| s.name(u).to_string()).collect())
        .collect()
}

fn cmd_green(path: &str) -> Result<(), Failure> {
    let s = FiniteSemigroup::from_json(&read_file(path)?).map_err(invalid)?;
    let g = green_classes(&s);
    let class = classify(&s);
    let (idem, omega) = idempotents_and_exponent(&s);
    let out = json!({
        "elements": s.names(),
        "class": class.tag,
        "unit": s.unit().map(|u| s.name(u)),
        "zero": s.zero().map(|z| s.name(z)),
        "idempotents": idem.iter().map(|&e| s.name(e)).collect::<Vec<_>>(),
        "exponent": omega,
        "J": names(&s, g.classes(Green::J)),
        "L": names(&s, g.classes(Green::L)),
        "R": names(&s, g.classes(Green::R)),
        "H": names(&s, g.classes(Green::H)),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn cmd_nxtctx(forest: &str, algebra: Option<&str>) -> Result<(), Failure> {
    let f = parse_forest(forest)?;
    let scope = match algebra {
        Some(p) => default_scope(&load_valuation(Some(p))?),
        None => SearchScope::new(StableContextSet::Universal, Basis::Standard),
    }
    .with_cap(cap_override()?);
    let ctxs: Vec<String> = scope.nxt_ctx(&State::plain(f))?.iter().map(Term::to_string).collect();
    println!("{}", serde_json::to_string(&ctxs).expect("json"));
    Ok(())
}

fn cmd_counterexample(n: usize, cap: usize, audit: bool) -> Result<(), Failure> {
    if n == 0 {
        return Err(invalid("--n must be positive"));
    }
    let cap = cap_override()?.unwrap_or(cap);
    let alg = build_cx_algebra();
    let f = gen_family(n);
    let mut out = json!({
        "n": n,
        "forest": f.to_string(),
        "nodes": f.node_count(),
        "value": alg.bundle.algebra.h().name(alg.bundle.morphism.alpha(&f).map_err(invalid)?),
        "metric": metric(&f),
    });
    let report = if audit { Some(idempotent_audit(&alg)?) } else { None };
    if let Some(a) = &report {
        out["audit"] = serde_json::to_value(a).expect("json");
        out["audit"]["passes"] = json!(a.passes());
    }
    let depth = brute_force_min_depth(&alg, &f, cap);
    match &depth {
        Ok(d) => out["min_depth"] = json!(d),
        Err(_) => out["min_depth"] = json!(null),
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    depth?;
    if let Some(a) = &report {
        check_audit(a)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Decompose {
            algebra,
            forest,
            strategy,
            format,
            output,
        } => cmd_decompose(algebra.as_deref(), &forest, strategy, format, output.as_deref()),
        Cmd::CheckAlignment {
            algebra,
            max_nodes,
            holes,
        } => cmd_check_alignment(&algebra, max_nodes, &holes),
        Cmd::Green { semigroup } => cmd_green(&semigroup),
        Cmd::Oracle {
            which: OracleCmd::Nxtctx { forest, algebra },
        } => cmd_nxtctx(&forest, algebra.as_deref()),
        Cmd::Counterexample { n, cap, audit } => cmd_counterexample(n, cap, audit),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
