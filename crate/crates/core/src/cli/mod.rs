//! Command-line front end: enumeration, the eleven-row table, guessing,
//! certification, refined counts and closed forms, each writing a JSON
//! artifact with its full configuration.

mod cache;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::formulas::{ballot_count, eval_closed_form, verify_entry, Catalog, Form, FormulaError};
use crate::guess::{
    lift_to_time, required_terms, search_quasi, search_univariate, specialize, Ansatz, GuessError,
};
use crate::opalgebra::{certify_table, walk_symbols, CertDomain, OpError, OperatorJson, ShiftOperator};
use crate::walks::{
    enumerate_with, gessel_g, refined_enumerate_with_budget, EnumerateOptions, Region, Retention,
    StepSet, WalkError, WalkTable, DEFAULT_CELL_BUDGET,
};

pub use cache::{load_or_enumerate, sha256_hex, table_hash, CacheStatus, BOX_POLICY_VERSION};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "latwalk",
    version,
    about = "Exact lattice walk enumeration, recurrence guessing and operator certification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON artifact to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reuse enumerated tables stored in this directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Format of standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Recorded in every artifact; the computations themselves are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Count restricted walks and print the return sequence.
    Enumerate(WalkArgs),
    /// Check the eleven quarter-plane rows against enumeration.
    Table(TableArgs),
    /// Fit a recurrence to the return sequence, or a quasi operator to the table.
    Guess(GuessArgs),
    /// Certify an operator against an enumerated table.
    Certify(CertifyArgs),
    /// Count walks by step multiplicities.
    Refined(RefinedArgs),
    /// Evaluate a catalog closed form, optionally against enumeration.
    Closedform(ClosedformArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct WalkArgs {
    /// Steps `x,y;x,y;...` or a preset: kreweras, gessel, kreweras3d, dyck, row1..row11.
    #[arg(long, allow_hyphen_values = true)]
    pub steps: String,
    /// Region preset (quadrant, halfline, octant3d, ballot:d, none) or atoms
    /// `c1,...,cd>=b;...`. Defaults to the nonnegative orthant.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Maximum walk length.
    #[arg(long = "m", default_value_t = 30)]
    pub m: usize,
    /// Largest number of table cells held in memory.
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TableArgs {
    /// Comma-separated row numbers; all eleven by default.
    #[arg(long)]
    pub rows: Option<String>,
    #[arg(long = "m", default_value_t = 24)]
    pub m: usize,
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct GuessArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Largest recurrence order tried.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Largest coefficient degree tried.
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    /// Fit the quasi ansatz over the whole table instead.
    #[arg(long)]
    pub quasi: bool,
    /// Quasi ansatz: largest exponent of each generator.
    #[arg(long, default_value_t = 2)]
    pub shift_max: u32,
    /// Quasi ansatz: largest total coefficient degree.
    #[arg(long, default_value_t = 2)]
    pub total_degree: u32,
    /// Write the found operator, in walk symbols, to this file.
    #[arg(long)]
    pub emit_operator: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Region,
    Origin,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Operator file, in text form or as JSON.
    #[arg(long)]
    pub operator: PathBuf,
    #[arg(long, value_enum, default_value_t = DomainArg::Region)]
    pub domain: DomainArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fiber {
    /// `f(k, ..., k)` against `F(rk; origin)`.
    Diagonal,
    /// `G(k) = sum_a f(a, a, k-a, k-a)` against `F(2k; origin)`.
    Gessel,
}

#[derive(Debug, Args, Serialize)]
pub struct RefinedArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub steps: String,
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Largest fiber index.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Fiber::Diagonal)]
    pub fiber: Fiber,
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET / 8)]
    pub budget: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ClosedformArgs {
    /// Catalog key: 1..11, kreweras, gessel or ballot.
    #[arg(long)]
    pub key: String,
    /// Evaluate for n = 0..=N (for zero rows and the ballot entry: walk
    /// lengths up to N).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Ballot shape `n1,n2,...`.
    #[arg(long)]
    pub shape: Option<String>,
    /// Compare against enumeration.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = DEFAULT_CELL_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Fail(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fail(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Resource { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OpError> for CliError {
    fn from(e: OpError) -> Self {
        match e {
            OpError::Walk(w) => w.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GuessError> for CliError {
    fn from(e: GuessError) -> Self {
        match e {
            GuessError::Op(o) => o.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FormulaError> for CliError {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::Walk(w) => w.into(),
            FormulaError::Integrity { .. } => CliError::Fail(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

/// Result of one command before it is written out.
struct Outcome {
    result: Value,
    text: String,
    inputs: BTreeMap<String, String>,
    code: i32,
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    box_policy: u32,
    config: &'a Cli,
    inputs: &'a BTreeMap<String, String>,
}

/// Parse `args` (including the program name) and run the command. Returns
/// the exit status: 0 success or VALID, 1 FAIL/REFUTED/INVALID, 2 usage
/// error, 3 resource error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                0
            } else {
                let _ = write!(err, "{e}");
                2
            };
        }
    };
    match execute(&cli, err) {
        Ok(o) => match emit(&cli, &o, out) {
            Ok(()) => o.code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, o: &Outcome, out: &mut dyn Write) -> Result<(), CliError> {
    let artifact = json!({
        "provenance": Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            box_policy: BOX_POLICY_VERSION,
            config: cli,
            inputs: &o.inputs,
        },
        "result": o.result,
    });
    let mut bytes = serde_json::to_vec_pretty(&artifact).expect("artifact serializes");
    bytes.push(b'\n');
    if let Some(path) = &cli.out {
        cache::write_file(path, &bytes).map_err(|e| io_error(path, e))?;
    }
    let shown = match cli.format {
        Format::Json => out.write_all(&bytes),
        Format::Text => out.write_all(o.text.as_bytes()),
    };
    shown.map_err(|e| CliError::Usage(format!("stdout: {e}")))
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let cache_dir = cli.cache_dir.as_deref();
    let mut load = |steps: &StepSet, region: &Region, m: usize, budget: u64| {
        let (t, status) = load_or_enumerate(steps, region, m, budget, cache_dir)?;
        match status {
            CacheStatus::Hit => {
                let _ = writeln!(err, "cache hit for {steps} in {region} to m = {m}");
            }
            CacheStatus::Corrupt => {
                let _ = writeln!(err, "cache entry for {steps} failed its hash check; recomputed");
            }
            _ => {}
        }
        Ok::<_, CliError>(t)
    };
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a, &mut load),
        Command::Table(a) => cmd_table(a, &mut load),
        Command::Guess(a) => cmd_guess(a, cache_dir.is_some(), &mut load),
        Command::Certify(a) => cmd_certify(a, &mut load),
        Command::Refined(a) => cmd_refined(a),
        Command::Closedform(a) => cmd_closedform(a, &mut load),
    }
}

type Loader<'a> = dyn FnMut(&StepSet, &Region, usize, u64) -> Result<WalkTable, CliError> + 'a;

/// Step set from literal text or a preset name.
pub fn resolve_steps(text: &str) -> Result<StepSet, CliError> {
    let literal = match text.trim() {
        "kreweras" => "-1,0;0,-1;1,1",
        "gessel" => "1,1;-1,-1;1,0;-1,0",
        "kreweras3d" => "-1,-1,-1;1,0,0;0,1,0;0,0,1",
        "dyck" => "1;-1",
        t => {
            if let Some(row) = t.strip_prefix("row") {
                let e = Catalog::builtin().get(row)?;
                return Ok(e.steps.clone());
            }
            t
        }
    };
    Ok(StepSet::parse(literal)?)
}

fn resolve_region(text: Option<&str>, dim: usize) -> Result<Region, CliError> {
    match text {
        None => Ok(Region::orthant(dim)),
        Some(t) => Ok(Region::parse(t, dim)?),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

fn strings(xs: &[BigInt]) -> Vec<String> {
    xs.iter().map(BigInt::to_string).collect()
}

fn cmd_enumerate(a: &WalkArgs, load: &mut Loader) -> Result<Outcome, CliError> {
    let steps = resolve_steps(&a.steps)?;
    let region = resolve_region(a.region.as_deref(), steps.dim())?;
    let t = load(&steps, &region, a.m, a.budget)?;
    let table = t.to_json();
    let hash = table_hash(&table);
    let returns = t.return_sequence();
    let mut text = String::new();
    let _ = writeln!(text, "steps    {steps}");
    let _ = writeln!(text, "region   {region}");
    let _ = writeln!(text, "box      {}", t.bbox().describe());
    let _ = writeln!(text, "returns  {}", join(&returns));
    Ok(Outcome {
        result: json!({
            "steps": steps.to_string(),
            "region": region.to_string(),
            "m_max": a.m,
            "box": t.bbox().describe(),
            "return_sequence": strings(&returns),
            "table_sha256": hash,
            "table": table,
        }),
        text,
        inputs: BTreeMap::from([("table_sha256".to_string(), hash)]),
        code: 0,
    })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad {what} '{}'", s.trim())))
        })
        .collect()
}

fn cmd_table(a: &TableArgs, load: &mut Loader) -> Result<Outcome, CliError> {
    let catalog = Catalog::builtin();
    let keys: Vec<String> = match &a.rows {
        None => catalog.rows().map(|e| e.key.clone()).collect(),
        Some(r) => parse_list::<u32>(r, "row")?.iter().map(u32::to_string).collect(),
    };
    let mut rows = Vec::new();
    let mut inputs = BTreeMap::new();
    let mut sequences: BTreeMap<String, Vec<BigInt>> = BTreeMap::new();
    let mut text = format!("{:>3}  {:<16} {:>6}  {:<6} {}\n", "row", "steps", "period", "status", "returns");
    let mut all_pass = true;
    for key in &keys {
        let e = catalog.get(key)?;
        if !catalog.rows().any(|r| r.key == *key) {
            return Err(CliError::Usage(format!("'{key}' is not a table row")));
        }
        let t = load(&e.steps, &e.region, a.m, a.budget)?;
        let (period, n_max) = match &e.form {
            Form::Closed(cf) => (Some(cf.period), a.m / cf.period),
            _ => (None, 0),
        };
        let rep = verify_entry(key, &t, n_max)?;
        let returns = t.return_sequence();
        all_pass &= rep.pass();
        let shown = match period {
            Some(p) => join(&returns.iter().step_by(p).cloned().collect::<Vec<_>>()),
            None => format!("0 at lengths 1..{}", a.m),
        };
        let _ = writeln!(
            text,
            "{:>3}  {:<16} {:>6}  {:<6} {}",
            key,
            e.steps.to_string(),
            period.map_or("-".to_string(), |p| p.to_string()),
            if rep.pass() { "PASS" } else { "FAIL" },
            shown
        );
        inputs.insert(format!("row{key}_table_sha256"), table_hash(&t.to_json()));
        rows.push(json!({
            "row": key,
            "steps": e.steps.to_string(),
            "period": period,
            "n_max": n_max,
            "pass": rep.pass(),
            "checked": rep.checked,
            "returns": strings(&returns),
            "mismatches": rep.mismatches,
        }));
        sequences.insert(key.clone(), returns);
    }
    let mut identical = Vec::new();
    for (x, y) in [("5", "6"), ("8", "9"), ("2", "4")] {
        if let (Some(s), Some(u)) = (sequences.get(x), sequences.get(y)) {
            let same = s == u;
            all_pass &= same;
            let _ = writeln!(text, "rows {x} and {y}: {}", if same { "identical" } else { "DIFFERENT" });
            identical.push(json!({ "rows": [x, y], "identical": same }));
        }
    }
    let passed = rows.iter().filter(|r| r["pass"] == true).count();
    let _ = writeln!(text, "{passed}/{} PASS", rows.len());
    Ok(Outcome {
        result: json!({ "m_max": a.m, "rows": rows, "identical": identical, "passed": passed, "total": keys.len() }),
        text,
        inputs,
        code: if all_pass { 0 } else { 1 },
    })
}

fn cmd_guess(a: &GuessArgs, cached: bool, load: &mut Loader) -> Result<Outcome, CliError> {
    let steps = resolve_steps(&a.walk.steps)?;
    let region = resolve_region(a.walk.region.as_deref(), steps.dim())?;
    let dim = steps.dim();
    if a.quasi {
        let t = load(&steps, &region, a.walk.m, a.walk.budget)?;
        let ansatz = Ansatz::quasi(dim, a.shift_max, a.total_degree)?;
        let found = search_quasi(&t, &ansatz)?;
        let specialized = found.as_ref().map(specialize).transpose()?;
        let mut text = format!(
            "quasi ansatz: shifts <= {}, total degree <= {}, {} unknowns\n",
            a.shift_max,
            a.total_degree,
            ansatz.unknowns()
        );
        match (&found, &specialized) {
            (Some(c), Some(r0)) => {
                let _ = writeln!(text, "candidate ({:?}): {}", c.status, c.operator);
                let _ = writeln!(text, "specialized: {r0}");
            }
            _ => text.push_str("none found\n"),
        }
        if let (Some(path), Some(c)) = (&a.emit_operator, &found) {
            cache::write_file(path, format!("{}\n", c.operator).as_bytes()).map_err(|e| io_error(path, e))?;
        }
        return Ok(Outcome {
            result: json!({
                "mode": "quasi",
                "steps": steps.to_string(),
                "region": region.to_string(),
                "m_max": a.walk.m,
                "unknowns": ansatz.unknowns(),
                "candidate": found.as_ref().map(|c| c.to_json()),
                "specialized": specialized.map(|r| r.to_string()),
            }),
            text,
            inputs: BTreeMap::from([("table_sha256".to_string(), table_hash(&t.to_json()))]),
            code: 0,
        });
    }

    let returns = if cached {
        load(&steps, &region, a.walk.m, a.walk.budget)?.return_sequence()
    } else {
        let opts = EnumerateOptions {
            retention: Retention::Latest,
            cell_budget: a.walk.budget,
        };
        enumerate_with(&steps, &region, a.walk.m, &opts)?.return_sequence()
    };
    let report = search_univariate(&returns, a.order, a.degree)?;
    if report.all_skipped() {
        let need = required_terms(1, 0);
        return Err(CliError::Usage(format!(
            "insufficient data: {} terms of the period-{} subsequence, order 1 and degree 0 already need {need}; rerun with --m {} or more",
            report.terms,
            report.period,
            report.offset + (need - 1) * report.period
        )));
    }
    let lifted = match (&report.found, report.offset) {
        (Some(c), 0) => Some(lift_to_time(&c.operator, report.period, dim)?),
        _ => None,
    };
    let mut text = format!(
        "returns  {}\nperiod {} from offset {}, {} terms\n",
        join(&returns),
        report.period,
        report.offset,
        report.terms
    );
    for at in &report.attempts {
        let _ = writeln!(text, "  order {} degree {}: {}", at.order, at.degree, at.outcome);
    }
    match &report.found {
        Some(c) => {
            let _ = writeln!(text, "candidate ({:?}): {}", c.status, c.operator);
            if let Some(l) = &lifted {
                let _ = writeln!(text, "in walk symbols: {l}");
            }
        }
        None => text.push_str("none found\n"),
    }
    if let (Some(path), Some(l)) = (&a.emit_operator, &lifted) {
        cache::write_file(path, format!("{l}\n").as_bytes()).map_err(|e| io_error(path, e))?;
    }
    let code = if report.refuted.is_empty() { 0 } else { 1 };
    Ok(Outcome {
        result: json!({
            "mode": "univariate",
            "steps": steps.to_string(),
            "region": region.to_string(),
            "m_max": a.walk.m,
            "return_sequence": strings(&returns),
            "offset": report.offset,
            "period": report.period,
            "terms": report.terms,
            "attempts": report.attempts,
            "candidate": report.found.as_ref().map(|c| c.to_json()),
            "lifted": lifted.map(|l| l.to_string()),
            "refuted": report.refuted.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        }),
        text,
        inputs: BTreeMap::from([("return_sequence_sha256".to_string(), sha256_hex(strings(&returns).join(",").as_bytes()))]),
        code,
    })
}

/// Operator in walk symbols of dimension `dim`, from text or JSON.
pub fn parse_operator(text: &str, dim: usize) -> Result<ShiftOperator, CliError> {
    if text.trim_start().starts_with('{') {
        let json: OperatorJson =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("operator JSON: {e}")))?;
        return Ok(ShiftOperator::from_json(&json)?);
    }
    let (vars, gens) = walk_symbols(dim);
    ShiftOperator::parse(text.trim(), vars, gens)
        .map_err(|e| CliError::Usage(format!("operator: parse error at position {}: {}", e.pos, e.msg)))
}

fn cmd_certify(a: &CertifyArgs, load: &mut Loader) -> Result<Outcome, CliError> {
    let steps = resolve_steps(&a.walk.steps)?;
    let region = resolve_region(a.walk.region.as_deref(), steps.dim())?;
    let bytes = std::fs::read(&a.operator).map_err(|e| io_error(&a.operator, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Usage(format!("{}: not UTF-8", a.operator.display())))?;
    let op = parse_operator(&text, steps.dim())?;
    let t = load(&steps, &region, a.walk.m, a.walk.budget)?;
    let domain = match a.domain {
        DomainArg::Region => CertDomain::Region,
        DomainArg::Origin => CertDomain::Origin,
    };
    let cert = certify_table(&op, &t, domain)?;
    let mut out = format!("{}\n", if cert.valid { "VALID" } else { "INVALID" });
    let _ = writeln!(out, "operator          {}", cert.operator);
    let _ = writeln!(out, "chain length      {}", cert.chain.len());
    let _ = writeln!(out, "identities hold   {}", cert.identities_hold);
    let _ = writeln!(out, "checked times     {}..={}", cert.checked_times.0, cert.checked_times.1);
    let _ = writeln!(out, "points evaluated  {}", cert.evaluated);
    if let Some(w) = &cert.witness {
        let _ = writeln!(out, "witness           {:?} -> {}", w.point, w.value);
    }
    Ok(Outcome {
        result: serde_json::to_value(&cert).expect("certificate serializes"),
        text: out,
        inputs: BTreeMap::from([
            ("operator_sha256".to_string(), sha256_hex(&bytes)),
            ("table_sha256".to_string(), table_hash(&t.to_json())),
        ]),
        code: if cert.valid { 0 } else { 1 },
    })
}

fn cmd_refined(a: &RefinedArgs) -> Result<Outcome, CliError> {
    let steps = resolve_steps(&a.steps)?;
    let region = resolve_region(a.region.as_deref(), steps.dim())?;
    let r = steps.len();
    let (per, label) = match a.fiber {
        Fiber::Diagonal => (r, "f(k,...,k)"),
        Fiber::Gessel => {
            if r != 4 {
                return Err(CliError::Usage(format!("the gessel fiber needs 4 steps, got {r}")));
            }
            (2, "G(k)")
        }
    };
    let rt = refined_enumerate_with_budget(&steps, &region, per * a.n, a.budget)?;
    let opts = EnumerateOptions {
        retention: Retention::Latest,
        cell_budget: DEFAULT_CELL_BUDGET,
    };
    let returns = enumerate_with(&steps, &region, per * a.n, &opts)?.return_sequence();
    let mut rows = Vec::new();
    let mut text = format!("{:>3}  {:>24}  {:>24}  equal\n", "k", label, format!("F({per}k; origin)"));
    for k in 0..=a.n {
        let v = match a.fiber {
            Fiber::Diagonal => rt.get(&vec![k as u32; r])?,
            Fiber::Gessel => gessel_g(&rt, k)?,
        };
        let f = &returns[per * k];
        let _ = writeln!(text, "{k:>3}  {v:>24}  {f:>24}  {}", v == *f);
        rows.push(json!({ "k": k, "value": v.to_string(), "return_count": f.to_string(), "equal": v == *f }));
    }
    Ok(Outcome {
        result: json!({
            "steps": steps.to_string(),
            "region": region.to_string(),
            "refined_region": rt.region_refined().to_string(),
            "fiber": a.fiber,
            "rows": rows,
        }),
        text,
        inputs: BTreeMap::new(),
        code: 0,
    })
}

fn cmd_closedform(a: &ClosedformArgs, load: &mut Loader) -> Result<Outcome, CliError> {
    let entry = Catalog::builtin().get(&a.key)?;
    let mut text = String::new();
    let mut result = json!({ "key": a.key, "steps": entry.steps.to_string() });
    match &entry.form {
        Form::Closed(cf) => {
            let values: Vec<BigInt> = (0..=a.n)
                .map(|n| eval_closed_form(&a.key, cf, n))
                .collect::<Result<_, _>>()?;
            let _ = writeln!(text, "period {}: {}", cf.period, join(&values));
            result["period"] = json!(cf.period);
            result["values"] = json!(strings(&values));
        }
        Form::Zero => {
            let _ = writeln!(text, "no closed walks of positive length");
        }
        Form::Ballot => {
            if let Some(s) = &a.shape {
                let shape: Vec<u64> = parse_list(s, "shape part")?;
                let v = ballot_count(&shape)?;
                let _ = writeln!(text, "shape ({s}): {v}");
                result["shape"] = json!(shape);
                result["value"] = json!(v.to_string());
            } else if !a.verify {
                return Err(CliError::Usage("the ballot entry needs --shape or --verify".into()));
            }
        }
    }
    let mut code = 0;
    let mut inputs = BTreeMap::new();
    if a.verify {
        let (m, n_max) = match &entry.form {
            Form::Closed(cf) => (cf.period * a.n, a.n),
            _ => (a.n, 0),
        };
        let t = load(&entry.steps, &entry.region, m, a.budget)?;
        let rep = verify_entry(&a.key, &t, n_max)?;
        let _ = writeln!(
            text,
            "{} against enumeration to m = {m} ({} checks)",
            if rep.pass() { "PASS" } else { "FAIL" },
            rep.checked
        );
        for mm in &rep.mismatches {
            let _ = writeln!(text, "  at {:?}: expected {}, enumerated {}", mm.at, mm.expected, mm.actual);
        }
        code = if rep.pass() { 0 } else { 1 };
        inputs.insert("table_sha256".to_string(), table_hash(&t.to_json()));
        result["verification"] = serde_json::to_value(&rep).expect("report serializes");
    }
    Ok(Outcome { result, text, inputs, code })
}
