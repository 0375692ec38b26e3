//! Command-line surface and dispatch.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use qhm_core::closure::{self, ClosureOp, ClosureOptions};
use qhm_core::engine::{self, DistanceMatrix, FixpointOptions, LdOptions, PartitionSource, Provenance};
use qhm_core::quantale::{QValue, Quantale, QuantaleKind};
use qhm_core::random;
use qhm_core::rational::{self, Rat};
use qhm_core::systems::{Backend, Coalgebra};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::format::{self, CoalgebraDoc, QuantaleDoc, VCatDoc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qhm", version, about = "Quantale-valued behavioural distances and quantitative modal logic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Quantale: bool2, diamond4, luk01, max01, chainN, products such as
    /// `luk01*luk01`, or a JSON descriptor file.
    #[arg(long, global = true)]
    pub quantale: Option<String>,
    /// Lifting backend: auto, lp or enum.
    #[arg(long, global = true, default_value = "auto")]
    pub backend: String,
    /// Value grid step, a rational dividing 1 (defaults: 1/16 for
    /// enumeration, 1/8 for formula constants, 1/4 for closure checks).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Residual at which unit-interval fixpoint iteration stops.
    #[arg(long, global = true, default_value = "1e-9")]
    pub eps: String,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Cap on formulas added by propositional closure per layer.
    #[arg(long, global = true, default_value_t = 256)]
    pub width: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: OutputFormat,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Re-run a single trial with this per-trial seed.
    #[arg(long, global = true)]
    pub replay: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs every validator on a coalgebra, V-category or quantale file.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Behavioural distance by fixpoint iteration.
    Bd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
    },
    /// Logical distance up to `--depth` with its formula basis.
    Ld {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Best distinguishing formula for two states within `--depth`.
    Distinguish {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Property suites.
    Check {
        #[command(subcommand)]
        suite: CheckSuite,
    },
    /// Seeded random coalgebra.
    Gen {
        #[arg(long)]
        functor: String,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        labels: usize,
        /// Edge probability for successor sets.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CheckSuite {
    /// No formula separates states by more than their distance.
    Adequacy {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Generate instances of this functor instead of reading a file.
        #[arg(long)]
        functor: Option<String>,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Gap between logical and behavioural distance along a schedule.
    Expressivity {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0,1,2,4")]
        schedule: String,
    },
    /// Density characterisations of initiality and the decomposition
    /// identity.
    Sw {
        #[arg(long, default_value = "id")]
        op: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long)]
        decomposition: bool,
    },
    /// Quantale laws for a built-in quantale or a table file.
    Laws {
        /// JSON quantale descriptor, loaded without law validation.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Quotient by bisimilarity (bool2 lts) or the distance kernel and
    /// compare distances and formula values.
    Invariance {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Largest accepted instance, from `QHM_MAX_STATES` (default 64).
pub fn max_states() -> usize {
    std::env::var("QHM_MAX_STATES").ok().and_then(|v| v.parse().ok()).unwrap_or(64)
}

/// Parses `p/q`, decimals and `1e-9` style numbers.
pub fn parse_number(text: &str) -> Result<Rat, CliError> {
    let t = text.trim();
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let mantissa = format::parse_rat_text(m)?;
        let exp: i32 = e.parse().map_err(|_| CliError::Parse(format!("bad exponent in `{text}`")))?;
        let ten = Rat::from_integer(10.into());
        let mut scale = rational::one();
        for _ in 0..exp.unsigned_abs() {
            scale *= &ten;
        }
        return Ok(if exp >= 0 { mantissa * scale } else { mantissa / scale });
    }
    format::parse_rat_text(t)
}

struct Settings {
    fix: FixpointOptions,
    ld: LdOptions,
    closure: ClosureOptions,
}

fn grid_or(cli: &Cli, default: Rat) -> Result<Rat, CliError> {
    let g = match &cli.grid {
        Some(t) => parse_number(t)?,
        None => default,
    };
    if !rational::divides_one(&g) {
        return Err(CliError::Invalid(format!("grid step {} does not divide 1", rational::format_rat(&g))));
    }
    Ok(g)
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let backend = match cli.backend.as_str() {
        "auto" => Backend::Auto,
        "lp" => Backend::Lp,
        "enum" => Backend::Enumerate { grid: grid_or(cli, rational::rat(1, 16))? },
        other => return Err(CliError::Invalid(format!("unknown backend `{other}`"))),
    };
    let eps = parse_number(&cli.eps)?;
    if eps <= rational::zero() {
        return Err(CliError::Invalid("eps must be positive".into()));
    }
    let fix = FixpointOptions { backend: backend.clone(), eps, ..FixpointOptions::default() };
    let ld = LdOptions { width: cli.width, grid: grid_or(cli, rational::rat(1, 8))?, backend, synthesize: true };
    let closure = ClosureOptions { grid: grid_or(cli, rational::rat(1, 4))?, ..ClosureOptions::default() };
    Ok(Settings { fix, ld, closure })
}

fn read_json(path: &PathBuf) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_coalgebra(path: &PathBuf) -> Result<Coalgebra, CliError> {
    let doc: CoalgebraDoc = serde_json::from_value(read_json(path)?)?;
    let c = format::coalgebra_from_doc(&doc)?;
    if c.len() > max_states() {
        return Err(CliError::Invalid(format!("{} states exceed QHM_MAX_STATES={}", c.len(), max_states())));
    }
    let report = c.validate();
    if !report.passed() {
        return Err(CliError::Invalid(format!("coalgebra fails validation: {}", validation_summary(&report))));
    }
    Ok(c)
}

fn validation_summary(report: &qhm_core::systems::CoalgebraReport) -> String {
    if !report.base.is_symmetric_vcat() {
        return format!("base structure: {:?}", report.base);
    }
    if let Some((x, issue)) = report.values.first() {
        return format!("state {x}: {issue:?}");
    }
    if let Some((x, y)) = report.not_nonexpansive {
        return format!("structure map is not nonexpansive at ({x}, {y})");
    }
    if let Some(e) = &report.lifting_error {
        return e.to_string();
    }
    "ok".into()
}

fn state_index(c: &Coalgebra, name: &str) -> Result<usize, CliError> {
    c.states().iter().position(|s| s == name).ok_or_else(|| CliError::Invalid(format!("unknown state `{name}`")))
}

fn rat_json(r: &Option<Rat>) -> Value {
    r.as_ref().map_or(Value::Null, |r| Value::String(rational::format_rat(r)))
}

fn matrix_json(d: &DistanceMatrix) -> Value {
    let (provenance, depth) = match d.provenance {
        Provenance::Bd => ("bd", Value::Null),
        Provenance::Ld { depth } => ("ld", json!(depth)),
        Provenance::Bisim => ("bisim", Value::Null),
    };
    let mut v = serde_json::to_value(format::vcat_to_doc(&d.vcat)).expect("documents serialize");
    let obj = v.as_object_mut().expect("object");
    obj.insert("provenance".into(), json!(provenance));
    if !depth.is_null() {
        obj.insert("depth".into(), depth);
    }
    obj.insert("steps".into(), json!(d.steps));
    obj.insert("residual".into(), rat_json(&d.residual));
    obj.insert("converged".into(), json!(d.converged));
    v
}

fn render_values(q: &Quantale, v: &[QValue]) -> Vec<String> {
    v.iter().map(|x| q.render(x)).collect()
}

/// Runs a parsed command line and returns the report text.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let s = settings(cli)?;
    let csv = cli.format == OutputFormat::Csv;
    match &cli.command {
        Command::Validate { input } => cmd_validate(input),
        Command::Bd { input, max_iter } => {
            let c = load_coalgebra(input)?;
            let fix = FixpointOptions { max_iter: *max_iter, ..s.fix };
            let run = engine::bd_fixpoint(&c, &fix)?;
            if csv {
                return Ok(format::matrix_csv(c.quantale(), &run.matrix.vcat));
            }
            format::to_json(&matrix_json(&run.matrix))
        }
        Command::Ld { input } => {
            let c = load_coalgebra(input)?;
            let depth = cli.depth.unwrap_or(2);
            let ld = engine::logical_distance(&c, depth, &s.ld)?;
            if csv {
                return Ok(format::matrix_csv(c.quantale(), &ld.matrix.vcat));
            }
            let q = c.quantale();
            let basis: Vec<Value> = ld
                .basis
                .iter()
                .map(|e| json!({"formula": e.formula.render(q), "depth": e.depth, "size": e.size, "values": render_values(q, &e.values)}))
                .collect();
            let mut out = matrix_json(&ld.matrix);
            let obj = out.as_object_mut().expect("object");
            obj.insert("requested_depth".into(), json!(depth));
            obj.insert("saturated_at".into(), ld.saturated_at.map_or(Value::Null, |d| json!(d)));
            obj.insert("basis".into(), Value::Array(basis));
            format::to_json(&out)
        }
        Command::Distinguish { input, x, y } => {
            let c = load_coalgebra(input)?;
            let (xi, yi) = (state_index(&c, x)?, state_index(&c, y)?);
            let budget = cli.depth.unwrap_or(2);
            let (f, gap) = engine::distinguishing_formula(&c, xi, yi, budget, &s.ld)?;
            let q = c.quantale();
            let values = engine::eval_formula(&f, &c)?;
            format::to_json(&json!({
                "x": x,
                "y": y,
                "budget": budget,
                "formula": f.render(q),
                "depth": f.depth(),
                "size": f.size(),
                "gap": q.render(&gap),
                "value_x": q.render(&values[xi]),
                "value_y": q.render(&values[yi]),
            }))
        }
        Command::Check { suite } => run_check(cli, suite, &s),
        Command::Gen { functor, states, labels, density } => {
            if *states > max_states() {
                return Err(CliError::Invalid(format!("{states} states exceed QHM_MAX_STATES={}", max_states())));
            }
            let c = generate(cli, functor, *states, *labels, *density)?;
            format::to_json(&format::coalgebra_to_doc(&c))
        }
    }
}

fn generate(cli: &Cli, functor: &str, n: usize, labels: usize, density: f64) -> Result<Coalgebra, CliError> {
    let mut r = random::rng(cli.seed);
    let named = |default: &str| -> Result<Quantale, CliError> { format::quantale_from_name(cli.quantale.as_deref().unwrap_or(default)) };
    if !(0.0..=1.0).contains(&density) {
        return Err(CliError::Invalid("density must lie in [0, 1]".into()));
    }
    let labels = labels.max(1);
    Ok(match functor {
        "lts" => random::random_lts(&mut r, &named("bool2")?, n, labels, density),
        "metric_ts" => {
            let q = named("luk01")?;
            if !q.is_unit_interval() {
                return Err(CliError::Invalid("metric_ts needs luk01 or max01".into()));
            }
            random::random_metric_ts(&mut r, &q, n, 8, density)
        }
        "para_powerset" => random::random_para(&mut r, n, density),
        "dist_maybe" => random::random_dist(&mut r, n, labels, 4),
        "signed_weighted" => random::random_signed(&mut r, n, labels),
        other => return Err(CliError::Invalid(format!("unknown functor `{other}`"))),
    })
}

fn cmd_validate(input: &PathBuf) -> Result<String, CliError> {
    let v = read_json(input)?;
    if v.get("functor").is_some() {
        let doc: CoalgebraDoc = serde_json::from_value(v)?;
        let q = format::quantale_from_doc_unchecked(&doc.quantale)?;
        let laws = q.validate(Some(&rational::rat(1, 50)));
        let c = format::coalgebra_from_doc(&doc)?;
        let report = c.validate();
        return format::to_json(&json!({
            "kind": "coalgebra",
            "quantale_laws": laws.all_passed(),
            "base_vcat": report.base.is_symmetric_vcat(),
            "value_issues": report.values.iter().map(|(x, i)| json!({"state": c.states()[*x], "issue": format!("{i:?}")})).collect::<Vec<_>>(),
            "not_nonexpansive": report.not_nonexpansive.map(|(x, y)| json!([c.states()[x], c.states()[y]])),
            "lifting_error": report.lifting_error.as_ref().map(|e| e.to_string()),
            "passed": laws.all_passed() && report.passed(),
        }));
    }
    if v.get("matrix").is_some() {
        let doc: VCatDoc = serde_json::from_value(v)?;
        let x = format::vcat_from_doc(&doc)?;
        let r = x.validate();
        return format::to_json(&json!({
            "kind": "vcat",
            "reflexive": r.reflexivity.is_none(),
            "transitive": r.transitivity.is_none(),
            "symmetric": r.symmetry.is_none(),
            "passed": r.is_vcat(),
        }));
    }
    let doc: QuantaleDoc = serde_json::from_value(v)?;
    let q = format::quantale_from_doc_unchecked(&doc)?;
    format::to_json(&law_report(&q))
}

fn law_report(q: &Quantale) -> Value {
    let report = q.validate(Some(&rational::rat(1, 50)));
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "law": c.law.name(),
                "passed": c.passed,
                "checked": c.checked,
                "failure": c.failure.as_ref().map(|f| json!({"equation": f.equation, "witness": f.rendered})),
            })
        })
        .collect();
    json!({"kind": "quantale", "quantale": q.kind().name(), "sampled": report.sampled, "checks": checks, "passed": report.all_passed()})
}

fn run_check(cli: &Cli, suite: &CheckSuite, s: &Settings) -> Result<String, CliError> {
    match suite {
        CheckSuite::Adequacy { input, functor, states, trials } => {
            let depth = cli.depth.unwrap_or(3);
            let instances: Vec<(Option<u64>, Coalgebra)> = match (input, functor) {
                (Some(path), _) => vec![(None, load_coalgebra(path)?)],
                (None, Some(f)) => {
                    let seeds = match cli.replay {
                        Some(seed) => vec![seed],
                        None => random::trial_seeds(cli.seed, *trials),
                    };
                    let mut out = Vec::new();
                    for seed in seeds {
                        let q = default_quantale(cli, f)?;
                        let mut r = random::rng(seed);
                        let c = random::random_coalgebra(&mut r, f, &q, (*states).min(max_states()))
                            .ok_or_else(|| CliError::Invalid(format!("unknown functor `{f}`")))?;
                        out.push((Some(seed), c));
                    }
                    out
                }
                (None, None) => return Err(CliError::Invalid("adequacy needs --in or --functor".into())),
            };
            let mut results = Vec::new();
            let mut violations = 0;
            for (seed, c) in &instances {
                let report = engine::check_adequacy(c, depth, &s.fix, &s.ld)?;
                violations += report.violations.len();
                let q = c.quantale();
                results.push(json!({
                    "seed": seed,
                    "formulas": report.formulas,
                    "bd_steps": report.bd_steps,
                    "residual": rat_json(&report.residual),
                    "violations": report.violations.iter().map(|v| json!({
                        "formula": v.formula, "x": c.states()[v.x], "y": c.states()[v.y], "gap": q.render(&v.gap), "bd": q.render(&v.bd),
                    })).collect::<Vec<_>>(),
                }));
            }
            format::to_json(&json!({"suite": "adequacy", "depth": depth, "instances": results, "violations": violations, "passed": violations == 0}))
        }
        CheckSuite::Expressivity { input, schedule } => {
            let c = load_coalgebra(input)?;
            let schedule: Vec<usize> = schedule
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| CliError::Parse(format!("bad schedule entry `{t}`"))))
                .collect::<Result<_, _>>()?;
            let report = engine::check_expressivity(&c, &schedule, &s.fix, &s.ld)?;
            let counted = !c.quantale().is_unit_interval();
            format::to_json(&json!({
                "suite": "expressivity",
                "gap_measure": if counted { "pairs where ld differs from bd" } else { "largest numeric bd - ld" },
                "points": report.points.iter().map(|p| json!({"depth": p.depth, "gap": rational::format_rat(&p.gap)})).collect::<Vec<_>>(),
                "monotone": report.monotone,
                "saturated_at": report.saturated_at,
                "bd_residual": rat_json(&report.bd_residual),
                "passed": report.monotone,
            }))
        }
        CheckSuite::Sw { op, trials, size, decomposition } => {
            let q = format::quantale_from_name(cli.quantale.as_deref().unwrap_or("bool2"))?;
            if *decomposition {
                let trials = match cli.replay {
                    Some(seed) => vec![closure::decomposition_trial(&q, *size, seed)?],
                    None => closure::decomposition_trials(&q, *size, *trials, cli.seed)?,
                };
                let passed = trials.iter().filter(|t| t.holds).count();
                let items: Vec<Value> = trials
                    .iter()
                    .map(|t| {
                        let mut v = json!({"seed": t.seed, "holds": t.holds});
                        if !t.holds {
                            v["generators"] = json!(t.generators.iter().map(|g| render_values(&q, g)).collect::<Vec<_>>());
                            v["f"] = json!(render_values(&q, &t.f));
                        }
                        v
                    })
                    .collect();
                return format::to_json(&json!({
                    "suite": "decomposition", "quantale": q.kind().name(), "trials": items, "passed": passed, "total": trials.len(),
                }));
            }
            let op = ClosureOp::parse(op).ok_or_else(|| CliError::Invalid(format!("unknown closure operator `{op}`")))?;
            let report = match cli.replay {
                Some(seed) => closure::InitialityReport {
                    op,
                    quantale: q.kind().name().into(),
                    trials: vec![closure::initiality_trial(op, &q, *size, seed, &s.closure)?],
                },
                None => closure::check_characterizes_initiality(op, &q, *size, *trials, cli.seed, &s.closure)?,
            };
            let items: Vec<Value> = report
                .trials
                .iter()
                .map(|t| {
                    let mut v = json!({"seed": t.seed, "points": t.vcat.len(), "c_dense": t.c_dense, "fun_dense": t.fun_dense, "passed": t.passed()});
                    if !t.passed() || cli.replay.is_some() {
                        v["vcat"] = serde_json::to_value(format::vcat_to_doc(&t.vcat)).expect("serializable");
                        v["generators"] = json!(t.generators.iter().map(|g| render_values(&q, g)).collect::<Vec<_>>());
                    }
                    v
                })
                .collect();
            format::to_json(&json!({
                "suite": "sw", "op": op.name(), "quantale": report.quantale, "trials": items,
                "passed": report.passed(), "total": report.trials.len(),
            }))
        }
        CheckSuite::Laws { table } => {
            let q = match table {
                Some(path) => {
                    let doc: QuantaleDoc = serde_json::from_value(read_json(path)?)?;
                    format::quantale_from_doc_unchecked(&doc)?
                }
                None => format::quantale_from_name(cli.quantale.as_deref().unwrap_or("bool2"))?,
            };
            let mut report = law_report(&q);
            if q.is_finite() && q.kind() != QuantaleKind::Product {
                if let Ok(d) = q.check_k_decomposition() {
                    report["k_decomposition"] = json!(d.holds);
                }
            }
            format::to_json(&report)
        }
        CheckSuite::Invariance { input } => {
            let c = load_coalgebra(input)?;
            let source = if c.quantale().kind() == QuantaleKind::Bool2 && c.functor().name() == "lts" {
                PartitionSource::Bisimilarity
            } else {
                PartitionSource::BdKernel
            };
            let (target, g) = engine::quotient_by(&c, source, &s.fix)?;
            let depth = cli.depth.unwrap_or(c.len().min(4));
            let report = engine::check_morphism_invariance(&c, &target, &g, depth, &s.fix, &s.ld)?;
            format::to_json(&json!({
                "suite": "invariance",
                "partition": if source == PartitionSource::Bisimilarity { "bisimilarity" } else { "bd_kernel" },
                "classes": report.classes,
                "projection": g.iter().map(|&i| target.states()[i].clone()).collect::<Vec<_>>(),
                "formulas_checked": report.formulas_checked,
                "bd_mismatch": report.bd_mismatch.map(|(x, y)| json!([c.states()[x], c.states()[y]])),
                "formula_mismatch": report.formula_mismatch.clone().map(|(f, x)| json!({"formula": f, "state": c.states()[x]})),
                "passed": report.passed(),
            }))
        }
    }
}

fn default_quantale(cli: &Cli, functor: &str) -> Result<Quantale, CliError> {
    let default = match functor {
        "lts" => "bool2",
        "para_powerset" => "diamond4",
        _ => "luk01",
    };
    format::quantale_from_name(cli.quantale.as_deref().unwrap_or(default))
}

/// Writes the report to `--out` or returns it for stdout.
pub fn emit(cli: &Cli, text: &str) -> Result<Option<String>, CliError> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}
