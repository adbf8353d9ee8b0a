//! `chorepick` command-line front end. Every invocation prints one JSON
//! document on standard output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chorepick::algchores::{alg_chores, ratio_report};
use chorepick::entitle::{build_order, verify_guarantee, PipelineOptions, Scaling};
use chorepick::fairness::{
    ef_ra_audit, envy_tension_example, preliminary_stage, suffix_envy_condition, tension_analysis, StageMode,
};
use chorepick::rational::{self, Rational};
use chorepick::ridge::{
    best_ratio_search, covering_test_with, fixed_order, ridge_periods, synthesize_order, CoveringOptions, Mode, Verdict,
};
use chorepick::shares::{chore_share, share_report, OracleLimits};
use chorepick::simulate::{evaluate_order, greedy_play, worst_case, Normalization};
use chorepick::{Allocation, ChoreInstance, Error, PeriodicOrder, PickingSequence};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

const SCHEMA_VERSION: u32 = 1;

mod exit {
    pub const INTERNAL: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const FILE: u8 = 3;
    pub const SIZE_GUARD: u8 = 4;
    pub const GUARANTEE: u8 = 5;
}

#[derive(Parser)]
#[command(name = "chorepick", version, about = "Picking sequences for indivisible chores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Proportional, chore, maximin and anyprice shares of an instance.
    Shares(SharesArgs),
    /// Build a picking order.
    Build(BuildArgs),
    /// Play an order greedily on an instance.
    Simulate(SimulateArgs),
    /// Worst-case ratio of an order against the chore share.
    Evaluate(EvaluateArgs),
    /// Covering test of a ridge schedule.
    RatioTest(RatioTestArgs),
    /// Smallest passing ratio on a grid.
    Search(SearchArgs),
    /// Envy-cycle allocation with its ratio report.
    Algchores(AlgchoresArgs),
    /// Envy checks and audits of picking sequences.
    Envy(EnvyArgs),
    /// Check the arbitrary-entitlement guarantee on random instances.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Comma-separated entitlements; equal when omitted.
    #[arg(long, value_parser = parse_rational, value_delimiter = ',')]
    entitlements: Option<Vec<Rational>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Costs are drawn from `0..=max-cost`.
    #[arg(long, default_value_t = 100)]
    max_cost: u32,
    /// Sort every row nonincreasing (a common cost order).
    #[arg(long)]
    ido: bool,
    /// Write the instance file here as well.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Largest chore count for the exhaustive oracles.
    #[arg(long, default_value_t = 12)]
    max_chores: usize,
    /// Largest agent count for the maximin oracle.
    #[arg(long, default_value_t = 4)]
    max_agents: usize,
}

impl OracleArgs {
    fn limits(&self) -> OracleLimits {
        OracleLimits {
            max_chores: self.max_chores,
            max_agents: self.max_agents,
        }
    }
}

#[derive(Args)]
struct SharesArgs {
    #[arg(long)]
    input: PathBuf,
    /// Skip the exhaustive oracles.
    #[arg(long)]
    no_oracles: bool,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildMode {
    Arbitrary,
    Agent,
    Super,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Threshold,
    HalfPlusX,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum, default_value = "arbitrary")]
    mode: BuildMode,
    #[arg(long, value_parser = parse_rational, value_delimiter = ',')]
    entitlements: Option<Vec<Rational>>,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_rational)]
    rho: Option<Rational>,
    #[arg(long, value_enum, default_value = "threshold")]
    scaling: ScalingArg,
    /// Rounds to check when the covering ratio is at most one; at least `--m`.
    #[arg(long)]
    fallback_horizon: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Fixed order name, order file or literal order; built from the
    /// instance's entitlements when omitted.
    #[arg(long)]
    order: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    order: String,
    #[arg(long)]
    m: usize,
    /// Agent count; taken from the order when omitted.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct RatioTestArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_rational)]
    rho: Rational,
    #[arg(long, value_parser = parse_mode, default_value = "agent")]
    mode: Mode,
    /// Rounds to check when the covering ratio is at most one.
    #[arg(long)]
    fallback_horizon: Option<u64>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_mode, default_value = "agent")]
    mode: Mode,
    #[arg(long, value_parser = parse_rational, default_value = "1/1000")]
    tol: Rational,
}

#[derive(Args)]
struct AlgchoresArgs {
    #[arg(long)]
    input: PathBuf,
    /// Omit the share comparison.
    #[arg(long)]
    no_ratio: bool,
    #[command(flatten)]
    oracle: OracleArgs,
}

#[derive(Args)]
#[group(skip)]
struct EnvyArgs {
    /// Suffix condition between pickers `--i` and `--j` of `--sequence`.
    #[arg(long, group = "action")]
    check_suffix: bool,
    /// Ex-ante audit of `--sequence` on the instance `--input`.
    #[arg(long, group = "action")]
    audit: bool,
    /// Responsibility tension example for this many agents.
    #[arg(long, value_name = "N", group = "action")]
    tension_example: Option<usize>,
    /// Picking sequence, e.g. `112` or `1,2,10`.
    #[arg(long)]
    sequence: Option<String>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse_stage, default_value = "label_pick")]
    stage: StageMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required = true, value_parser = parse_rational, value_delimiter = ',')]
    entitlements: Vec<Rational>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Largest chore count drawn.
    #[arg(long, default_value_t = 40)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_stage(s: &str) -> Result<StageMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failed run: exit code plus message.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    report: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io(_) => (exit::FILE, "file"),
            Error::SizeGuard { .. } => (exit::SIZE_GUARD, "size_guard"),
            Error::StuckRound { .. } | Error::RidgeViolation { .. } | Error::Domination { .. } => {
                (exit::GUARANTEE, "guarantee")
            }
            Error::Overflow(_) => (exit::INTERNAL, "internal"),
            _ => (exit::VALIDATION, "validation"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
            report: None,
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::VALIDATION,
        kind: "validation",
        message: message.into(),
        report: None,
    }
}

type Outcome = Result<Value, Failure>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn rat_str(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn rat_list(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(rat_str).collect())
}

/// Bundles with 1-based chores.
fn bundles_json(alloc: &Allocation) -> Value {
    json!(alloc
        .bundles
        .iter()
        .map(|b| b.iter().map(|j| j + 1).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn load(path: &Path) -> Result<ChoreInstance, Failure> {
    ChoreInstance::load(path).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn equal(n: usize) -> Vec<Rational> {
    vec![rational::rat(1, n as i64); n]
}

/// Fixed order name, path to a file holding an order, or a literal order.
fn resolve_order(spec: &str) -> Result<PeriodicOrder, Failure> {
    if let Ok(order) = fixed_order(spec) {
        return Ok(order);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        return Ok(PeriodicOrder::parse(text.trim())?);
    }
    PeriodicOrder::parse(spec).map_err(|_| invalid(format!("{spec:?} is neither a fixed order, a file, nor an order")))
}

fn gen(a: GenArgs) -> Outcome {
    if a.n == 0 {
        return Err(invalid("--n must be positive"));
    }
    let b = a.entitlements.unwrap_or_else(|| equal(a.n));
    if b.len() != a.n {
        return Err(invalid(format!("{} entitlements for {} agents", b.len(), a.n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let costs: Vec<Vec<Rational>> = (0..a.n)
        .map(|_| {
            let mut row: Vec<i64> = (0..a.m).map(|_| rng.random_range(0..=i64::from(a.max_cost))).collect();
            if a.ido {
                row.sort_unstable_by(|x, y| y.cmp(x));
            }
            row.into_iter().map(rational::int).collect()
        })
        .collect();
    let inst = ChoreInstance::new(b, costs)?;
    if let Some(path) = &a.output {
        inst.save(path)?;
    }
    let instance: Value = serde_json::from_str(&inst.to_json()).expect("instance JSON parses");
    Ok(json!({ "seed": a.seed, "ido": inst.is_ido(), "instance": instance }))
}

fn shares(a: SharesArgs) -> Outcome {
    let inst = load(&a.input)?;
    let limits = (!a.no_oracles).then(|| a.oracle.limits());
    Ok(to_value(&share_report(&inst, limits)?))
}

fn build(a: BuildArgs) -> Outcome {
    match a.mode {
        BuildMode::Arbitrary => {
            let b = a.entitlements.ok_or_else(|| invalid("--entitlements is required for --mode arbitrary"))?;
            let opts = PipelineOptions {
                scaling: match a.scaling {
                    ScalingArg::Threshold => Scaling::default_threshold(),
                    ScalingArg::HalfPlusX => Scaling::half_plus_x(),
                },
                ..Default::default()
            };
            let (trace, order) = build_order(&b, a.m, &opts)?;
            Ok(json!({
                "mode": "arbitrary",
                "order": order.to_string(),
                "sequence": order.to_sequence().to_string(),
                "guarantee": rat_str(&opts.scaling.guarantee()),
                "trace": to_value(&trace),
            }))
        }
        BuildMode::Agent | BuildMode::Super => {
            let mode = if matches!(a.mode, BuildMode::Agent) { Mode::Agent } else { Mode::Super };
            let n = a.n.ok_or_else(|| invalid("--n is required for ridge orders"))?;
            let rho = a.rho.ok_or_else(|| invalid("--rho is required for ridge orders"))?;
            let sched = ridge_periods(n, &rho, mode)?;
            let m = a.m as u64;
            let opts = CoveringOptions {
                fallback_horizon: Some(a.fallback_horizon.unwrap_or(m).max(m)),
                ..Default::default()
            };
            let verdict = covering_test_with(&sched, opts)?;
            // Without a certificate, the rounds checked must reach `m`.
            let covered = verdict.passed() || (verdict.verdict == Verdict::Inconclusive && verdict.horizon >= m);
            let mut report = json!({
                "mode": mode,
                "n": n,
                "rho": rat_str(&rho),
                "covering": to_value(&verdict),
            });
            if !(covered && verdict.ridge_feasible) {
                return Err(Failure {
                    code: exit::GUARANTEE,
                    kind: "guarantee",
                    message: "the schedule fails the covering test or its ridge".into(),
                    report: Some(report),
                });
            }
            let order = synthesize_order(&sched, a.m)?;
            report["order"] = json!(order.to_string());
            Ok(report)
        }
    }
}

fn simulate(a: SimulateArgs) -> Outcome {
    let inst = load(&a.input)?;
    let (n, m) = (inst.agents(), inst.chores());
    if !inst.is_ido() {
        return Err(invalid("simulate needs a common cost order (every row nonincreasing in the same order)"));
    }
    let order = match &a.order {
        Some(spec) => resolve_order(spec)?.expand(m)?,
        None => build_order(inst.entitlements(), m, &PipelineOptions::default())?.1,
    };
    order.validate(n)?;
    let alloc = greedy_play(&order.to_sequence(), &inst)?;
    let mut agents = Vec::with_capacity(n);
    let mut max_ratio: Option<Rational> = None;
    for i in 0..n {
        let b = inst.entitlement(i);
        let cost = inst.bundle_cost(i, &alloc.bundles[i]);
        let cs = chore_share(inst.row(i), b)?;
        let ratio = (cs != rational::int(0)).then(|| &cost / &cs);
        if let Some(r) = &ratio {
            max_ratio = Some(max_ratio.map_or(r.clone(), |x: Rational| x.max(r.clone())));
        }
        let positions = order.positions(i);
        let worst = worst_case(&positions, m, &Normalization::entitlement(b))?;
        agents.push(json!({
            "agent": i + 1,
            "positions": positions,
            "cost": rat_str(&cost),
            "chore_share": rat_str(&cs),
            "ratio": ratio.as_ref().map(rat_str),
            "worst_case": to_value(&worst),
        }));
    }
    Ok(json!({
        "order": order.to_string(),
        "bundles": bundles_json(&alloc),
        "max_ratio": max_ratio.as_ref().map(rat_str),
        "agents": agents,
    }))
}

fn evaluate(a: EvaluateArgs) -> Outcome {
    let periodic = resolve_order(&a.order)?;
    let n = a.n.unwrap_or_else(|| periodic.agents());
    let order = periodic.expand(a.m)?;
    let eval = evaluate_order(&order, n, a.m)?;
    let mut report = to_value(&eval);
    report["order"] = json!(order.to_string());
    report["n"] = json!(n);
    Ok(report)
}

fn ratio_test(a: RatioTestArgs) -> Outcome {
    let sched = ridge_periods(a.n, &a.rho, a.mode)?;
    let opts = CoveringOptions {
        fallback_horizon: a.fallback_horizon,
        ..Default::default()
    };
    let verdict = covering_test_with(&sched, opts)?;
    let mut report = to_value(&verdict);
    // Exact sums over thousands of agents run to thousands of digits.
    if verdict.ratio_exact.as_ref().is_some_and(|r| r.denom().bits() > 128) {
        report.as_object_mut().expect("verdict is an object").remove("ratio_exact");
    }
    report["n"] = json!(a.n);
    report["rho"] = rat_str(&a.rho);
    report["mode"] = to_value(&a.mode);
    Ok(report)
}

fn search(a: SearchArgs) -> Outcome {
    let rho = best_ratio_search(a.n, a.mode, &a.tol)?;
    Ok(json!({
        "n": a.n,
        "mode": a.mode,
        "tol": rat_str(&a.tol),
        "rho": rat_str(&rho),
        "rho_f64": rational::to_f64(&rho),
    }))
}

fn algchores(a: AlgchoresArgs) -> Outcome {
    let inst = load(&a.input)?;
    let run = alg_chores(&inst)?;
    let mut report = json!({
        "bundles": bundles_json(&run.allocation),
        "costs": rat_list(&run.allocation.costs(&inst)),
        "reduced": run.reduced,
        "rounds": to_value(&run.rounds),
    });
    if !a.no_ratio {
        report["ratio"] = to_value(&ratio_report(&inst, &run.allocation, a.oracle.limits())?);
    }
    Ok(report)
}

fn sequence(arg: &Option<String>) -> Result<PickingSequence, Failure> {
    let text = arg.as_deref().ok_or_else(|| invalid("--sequence is required"))?;
    Ok(PickingSequence::parse(text)?)
}

fn picker(arg: Option<usize>, flag: &str) -> Result<usize, Failure> {
    match arg {
        Some(p) if p >= 1 => Ok(p - 1),
        Some(_) => Err(invalid(format!("{flag} is 1-based"))),
        None => Err(invalid(format!("{flag} is required"))),
    }
}

fn envy(a: EnvyArgs) -> Outcome {
    if a.check_suffix {
        let seq = sequence(&a.sequence)?;
        let (i, j) = (picker(a.i, "--i")?, picker(a.j, "--j")?);
        let pickers = seq.picks().iter().max().map_or(0, |&p| p + 1).max(i + 1).max(j + 1);
        seq.validate(pickers)?;
        let check = suffix_envy_condition(&seq, i, j)?;
        let mut report = to_value(&check);
        report["sequence"] = json!(seq.to_string());
        report["i"] = json!(i + 1);
        report["j"] = json!(j + 1);
        return Ok(report);
    }
    if a.audit {
        let seq = sequence(&a.sequence)?;
        let path = a.input.as_ref().ok_or_else(|| invalid("--input is required for --audit"))?;
        let inst = load(path)?;
        let audit = ef_ra_audit(&seq, a.stage, inst.costs(), inst.entitlements())?;
        let draw = preliminary_stage(a.stage, &seq, inst.costs(), inst.entitlements(), a.seed)?;
        let mut report = to_value(&audit);
        report["sequence"] = json!(seq.to_string());
        report["draw"] = json!({
            "seed": a.seed,
            "order": draw.order.iter().map(|x| x + 1).collect::<Vec<_>>(),
            "labels": draw.labels.iter().map(|x| x + 1).collect::<Vec<_>>(),
        });
        return Ok(report);
    }
    let n = a
        .tension_example
        .ok_or_else(|| invalid("one of --check-suffix, --audit or --tension-example is required"))?;
    let example = envy_tension_example(n)?;
    let mut report = json!({ "example": to_value(&example) });
    if a.sequence.is_some() {
        let seq = sequence(&a.sequence)?;
        report["analysis"] = to_value(&tension_analysis(&example, &seq)?);
    }
    Ok(report)
}

fn verify(a: VerifyArgs) -> Outcome {
    let report = verify_guarantee(&a.entitlements, a.trials, a.seed, a.m)?;
    let holds = report.holds();
    let mut value = to_value(&report);
    value["holds"] = json!(holds);
    value["seed"] = json!(a.seed);
    if holds {
        Ok(value)
    } else {
        Err(Failure {
            code: exit::GUARANTEE,
            kind: "guarantee",
            message: format!("observed ratio {} exceeds the bound {}", report.max_ratio(), report.bound),
            report: Some(value),
        })
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("command".into(), json!(command));
    match body {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

/// Prints the report; a closed pipe is not an error.
fn emit(report: &Value) {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, outcome) = match cli.command {
        Command::Gen(a) => ("gen", gen(a)),
        Command::Shares(a) => ("shares", shares(a)),
        Command::Build(a) => ("build", build(a)),
        Command::Simulate(a) => ("simulate", simulate(a)),
        Command::Evaluate(a) => ("evaluate", evaluate(a)),
        Command::RatioTest(a) => ("ratio-test", ratio_test(a)),
        Command::Search(a) => ("search", search(a)),
        Command::Algchores(a) => ("algchores", algchores(a)),
        Command::Envy(a) => ("envy", envy(a)),
        Command::Verify(a) => ("verify", verify(a)),
    };
    match outcome {
        Ok(body) => {
            emit(&envelope(name, body));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let mut body = json!({ "error": { "kind": f.kind, "message": f.message } });
            if let Some(report) = f.report {
                body["report"] = report;
            }
            emit(&envelope(name, body));
            eprintln!("chorepick {name}: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
