//! `renyi`: command-line front end for Rényi capacities, exponents and bounds.

mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use renyi::bounds::{
    arimoto_outer_product, gallager_inner, spb_feedback, spb_product, spb_special_cases,
    tradeoff_channel, BoundReport, CodeParams, SpecialCase,
};
use renyi::capacity::solve_capacity;
use renyi::channels::{DiscreteChannel, InputDistribution};
use renyi::exponents::{
    average_sp_exponent, haroutunian_solve, sphere_packing_exponent, sub_one_exponent,
    ExponentCurve, HaroutunianOptions, OrderGrid,
};
use renyi::oracle::{feedback_check, run_suite, sandwich_check, Suite};
use renyi::poisson::{poisson_capacity, poisson_spb, poisson_spb_parametric, PoissonChannelSpec};
use renyi::Order;
use serde_json::{json, Value};

use config::Params;
use report::{emit, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Precondition(String),
    #[error("hypotheses do not hold; the bound is not binding")]
    NotBinding,
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl From<renyi::Error> for CliError {
    fn from(e: renyi::Error) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::NotBinding => 3,
            CliError::Io(_) => 4,
        }
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "renyi",
    version,
    about = "Rényi capacities, sphere-packing exponents and finite-length bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file of parameters; flags take precedence over its keys.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Exit with status 3 when the computed bound is not binding.
    #[arg(long, global = true)]
    require_binding: bool,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Order-α Rényi capacity with its center and duality gap.
    Capacity,
    /// Error exponents at a rate.
    Exponent {
        #[arg(value_enum)]
        kind: ExponentKind,
    },
    /// Finite-length bounds on the error probability.
    Bound {
        #[arg(value_enum)]
        kind: BoundKind,
    },
    /// Poisson channel capacities and bounds.
    Poisson {
        #[arg(value_enum)]
        kind: PoissonKind,
    },
    /// Runs named verification suites against the exact oracles.
    Verify,
    /// Plot-ready tables.
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExponentKind {
    Sp,
    SubOne,
    Average,
    Haroutunian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    Gallager,
    Arimoto,
    SpbProduct,
    SpbFeedback,
    MonotoneCenter,
    ConstantCenter,
    FixedDensity,
    Tradeoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PoissonKind {
    Capacity,
    Spb,
    SpbParametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Curve,
    Exponent,
    Sandwich,
    Feedback,
}

/// Output of one run before formatting.
struct Outcome {
    result: Value,
    table: Table,
    binding: Option<bool>,
    failed: Option<String>,
}

impl Outcome {
    fn plain(result: Value, table: Table) -> Self {
        Outcome {
            result,
            table,
            binding: None,
            failed: None,
        }
    }
}

fn parse_channel(spec: &str) -> Res<DiscreteChannel> {
    let prob = |s: &str| -> Res<f64> {
        s.parse()
            .map_err(|_| CliError::Precondition(format!("channel parameter {s:?} is not a number")))
    };
    if let Some(p) = spec.strip_prefix("bsc:") {
        return Ok(DiscreteChannel::bsc(prob(p)?)?);
    }
    if let Some(p) = spec.strip_prefix("bec:") {
        return Ok(DiscreteChannel::bec(prob(p)?)?);
    }
    if spec == "haroutunian" {
        return Ok(DiscreteChannel::haroutunian());
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Io(format!("{spec}: {e}")))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{spec}: {e}")))?;
    let rows = match &value {
        Value::Array(_) => value.clone(),
        Value::Object(o) => o
            .get("rows")
            .cloned()
            .ok_or_else(|| CliError::Io(format!("{spec}: no \"rows\" key")))?,
        _ => return Err(CliError::Io(format!("{spec}: expected an array of rows"))),
    };
    let rows: Vec<Vec<f64>> =
        serde_json::from_value(rows).map_err(|e| CliError::Io(format!("{spec}: {e}")))?;
    Ok(DiscreteChannel::new(rows)?)
}

fn channel(p: &Params) -> Res<DiscreteChannel> {
    parse_channel(
        p.channel
            .as_deref()
            .ok_or_else(|| CliError::Precondition("missing --channel".into()))?,
    )
}

fn code_params(p: &Params) -> Res<CodeParams> {
    let n = Params::need(p.n, "n")?;
    match (p.m, p.ln_ratio) {
        (Some(m), None) => Ok(CodeParams::new(m, p.l.unwrap_or(1), n)?),
        (None, Some(r)) => Ok(CodeParams::from_log_ratio(r, n)?),
        _ => Err(CliError::Precondition(
            "give exactly one of --messages and --ln-ratio".into(),
        )),
    }
}

fn poisson_spec(p: &Params) -> Res<PoissonChannelSpec> {
    if let Some(path) = &p.spec {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let spec: PoissonChannelSpec =
            serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        spec.validate()?;
        return Ok(spec);
    }
    Ok(PoissonChannelSpec::free(
        Params::need(p.duration, "duration")?,
        p.floor.unwrap_or(0.0),
        Params::need(p.ceiling, "ceiling")?,
    )?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn bound_outcome(report: BoundReport) -> Outcome {
    let mut cols = vec!["lemma", "direction", "binding", "value", "ln_value"];
    cols.extend(report.constants.keys().map(String::as_str));
    let mut table = Table::new(&cols);
    let mut row: Vec<Cell> = vec![
        report.lemma.as_str().into(),
        format!("{:?}", report.direction).to_lowercase().into(),
        report.hypothesis_satisfied.into(),
        report.value.into(),
        report.ln_value.into(),
    ];
    row.extend(report.constants.values().map(|&v| Cell::from(v)));
    table.push(row);
    Outcome {
        binding: Some(report.hypothesis_satisfied),
        result: to_value(&report),
        table,
        failed: None,
    }
}

fn run_capacity(p: &Params) -> Res<Outcome> {
    let w = channel(p)?;
    let order = Order::new(p.order.unwrap_or(1.0))?;
    let sol = solve_capacity(order, &w, p.tol())?;
    let mut table = Table::new(&["order", "value", "primal", "gap", "converged"]);
    table.push(vec![
        order.value().into(),
        sol.value.into(),
        sol.primal.into(),
        sol.duality_gap.into(),
        sol.converged.into(),
    ]);
    let mut out = Outcome::plain(to_value(&sol), table);
    if !sol.converged {
        out.failed = Some(format!("solver stopped with gap {}", sol.duality_gap));
    }
    Ok(out)
}

fn run_exponent(kind: ExponentKind, p: &Params) -> Res<Outcome> {
    let w = channel(p)?;
    let rate = Params::need(p.rate, "rate")?;
    let tol = p.tol();
    let mut table = Table::new(&["kind", "rate", "value"]);
    let (result, value) = match kind {
        ExponentKind::Sp => {
            let curve = ExponentCurve::for_channel(&w, &OrderGrid::default(), tol)?;
            let r = sphere_packing_exponent(rate, &curve, tol)?;
            (to_value(&r), r.value.to_f64())
        }
        ExponentKind::SubOne => {
            let curve = ExponentCurve::for_channel(&w, &OrderGrid::default(), tol)?;
            let v = sub_one_exponent(rate, &curve)?;
            (json!({ "rate": rate, "value": v }), v)
        }
        ExponentKind::Average => {
            let width = Params::need(p.width, "width")?;
            let v = average_sp_exponent(width, rate, &w, tol)?;
            (json!({ "rate": rate, "width": width, "value": v }), v)
        }
        ExponentKind::Haroutunian => {
            let opts = HaroutunianOptions {
                seed: p.seed(),
                ..Default::default()
            };
            let r = haroutunian_solve(rate, &w, &opts)?;
            (to_value(&r), r.value)
        }
    };
    table.push(vec![kind_name(kind).into(), rate.into(), value.into()]);
    Ok(Outcome::plain(result, table))
}

fn run_bound(kind: BoundKind, p: &Params) -> Res<Outcome> {
    let w = channel(p)?;
    if kind == BoundKind::Tradeoff {
        let rate = Params::need(p.rate, "rate")?;
        let r = tradeoff_channel(&w, rate, Params::need(p.eps, "eps")?)?;
        let mut table = Table::new(&[
            "input",
            "case",
            "tilt_order",
            "center_divergence",
            "channel_divergence",
            "center_slack",
            "channel_slack",
        ]);
        for c in &r.inputs {
            table.push(vec![
                (c.input as f64).into(),
                format!("{:?}", r.auxiliary.cases[c.input])
                    .to_lowercase()
                    .into(),
                c.order.into(),
                c.center_divergence.into(),
                c.channel_divergence.into(),
                c.center_slack.into(),
                c.channel_slack.into(),
            ]);
        }
        return Ok(Outcome {
            binding: Some(r.certified),
            result: to_value(&r),
            table,
            failed: None,
        });
    }
    let params = code_params(p)?;
    let n = params.n() as usize;
    let parts = || vec![w.clone(); n];
    let phi = || -> Res<Order> { Ok(Order::new(Params::need(p.phi, "phi")?)?) };
    let report = match kind {
        BoundKind::Gallager => {
            let prior = InputDistribution::uniform(w.input_size())?;
            gallager_inner(&params, Order::new(p.order.unwrap_or(0.5))?, &prior, &w)?
        }
        BoundKind::Arimoto => {
            let orders = match p.order {
                Some(a) => vec![a],
                None => vec![0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 3.0, 4.0],
            };
            arimoto_outer_product(&params, &w, &orders)?
        }
        BoundKind::SpbProduct => spb_product(
            &params,
            &parts(),
            phi()?,
            Params::need(p.eps, "eps")?,
            p.kappa.unwrap_or(3.0),
        )?,
        BoundKind::SpbFeedback => {
            let kappa = Params::need(p.kappa, "kappa")?;
            if kappa.fract() != 0.0 || kappa < 1.0 {
                return Err(CliError::Precondition(format!(
                    "kappa must be a positive integer, got {kappa}"
                )));
            }
            spb_feedback(
                &params,
                &w,
                kappa as u64,
                Params::need(p.eps, "eps")?,
                (Params::need(p.a0, "a0")?, Params::need(p.a1, "a1")?),
            )?
        }
        BoundKind::MonotoneCenter | BoundKind::ConstantCenter | BoundKind::FixedDensity => {
            let case = match kind {
                BoundKind::MonotoneCenter => SpecialCase::MonotoneCenter,
                BoundKind::ConstantCenter => SpecialCase::ConstantCenter,
                _ => SpecialCase::FixedDensity,
            };
            spb_special_cases(&params, &parts(), phi()?, p.kappa.unwrap_or(3.0), case)?
        }
        BoundKind::Tradeoff => unreachable!(),
    };
    Ok(bound_outcome(report))
}

fn run_poisson(kind: PoissonKind, p: &Params) -> Res<Outcome> {
    let spec = poisson_spec(p)?;
    match kind {
        PoissonKind::Capacity => {
            let order = Order::new(p.order.unwrap_or(1.0))?;
            let v = poisson_capacity(order, &spec)?;
            let mut table = Table::new(&["order", "capacity"]);
            table.push(vec![order.value().into(), v.into()]);
            Ok(Outcome::plain(
                json!({ "order": order.value(), "capacity": v, "spec": spec }),
                table,
            ))
        }
        PoissonKind::Spb => {
            let params = code_params(p)?;
            Ok(bound_outcome(poisson_spb(
                &params,
                &spec,
                Order::new(Params::need(p.phi, "phi")?)?,
            )?))
        }
        PoissonKind::SpbParametric => {
            let params = code_params(p)?;
            Ok(bound_outcome(poisson_spb_parametric(
                &params,
                &spec,
                Order::new(Params::need(p.phi, "phi")?)?,
                Params::need(p.eps, "eps")?,
                p.kappa.unwrap_or(3.0),
            )?))
        }
    }
}

fn run_verify(p: &Params) -> Res<Outcome> {
    let name = p.suite.as_deref().unwrap_or("all");
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        name.split(',')
            .map(|s| {
                Suite::parse(s.trim())
                    .ok_or_else(|| CliError::Precondition(format!("unknown suite {s:?}")))
            })
            .collect::<Res<_>>()?
    };
    let instances = p.instances.unwrap_or(1000);
    if instances == 0 {
        return Err(CliError::Precondition("instances must be positive".into()));
    }
    let mut table = Table::new(&[
        "suite",
        "instances",
        "checks",
        "violations",
        "worst_slack",
        "tolerance",
        "passed",
    ]);
    let mut reports = Vec::new();
    for s in suites {
        let r = run_suite(s, instances, p.seed())?;
        table.push(vec![
            r.suite.as_str().into(),
            (r.instances as f64).into(),
            (r.checks as f64).into(),
            (r.violations as f64).into(),
            r.worst_slack.into(),
            r.tolerance.into(),
            r.passed.into(),
        ]);
        reports.push(r);
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.suite.as_str())
        .collect();
    let failed = (!failed.is_empty()).then(|| format!("suites failed: {}", failed.join(", ")));
    Ok(Outcome {
        result: to_value(&reports),
        table,
        binding: None,
        failed,
    })
}

fn run_report(kind: ReportKind, p: &Params) -> Res<Outcome> {
    match kind {
        ReportKind::Curve => {
            let w = channel(p)?;
            let points = p.points.unwrap_or(64);
            let alpha_max = p.alpha_max.unwrap_or(4.0);
            if !(alpha_max > 0.0 && alpha_max.is_finite()) {
                return Err(CliError::Precondition(format!(
                    "alpha_max must be positive, got {alpha_max}"
                )));
            }
            let tol = p.tol();
            let rows: Vec<(f64, f64, f64)> = (1..=points)
                .into_par_iter()
                .map(|k| {
                    let a = alpha_max * k as f64 / points as f64;
                    let s = solve_capacity(Order::new(a)?, &w, tol)?;
                    Ok((a, s.value, s.duality_gap))
                })
                .collect::<Result<_, renyi::Error>>()?;
            let mut table = Table::new(&["order", "capacity", "gap"]);
            for &(a, c, g) in &rows {
                table.push(vec![a.into(), c.into(), g.into()]);
            }
            let result = rows
                .iter()
                .map(|r| json!({ "order": r.0, "capacity": r.1, "gap": r.2 }))
                .collect();
            Ok(Outcome::plain(Value::Array(result), table))
        }
        ReportKind::Exponent => {
            let w = channel(p)?;
            let points = p.points.unwrap_or(32);
            let tol = p.tol();
            let curve = ExponentCurve::for_channel(&w, &OrderGrid::default(), tol)?;
            let lo = curve.zero_plus().upper;
            let hi = curve.capacity_at(1.0)?;
            let mut table = Table::new(&["rate", "e_sp"]);
            let mut result = Vec::new();
            for k in 0..points {
                let rate = lo + (hi - lo) * (k as f64 + 0.5) / points as f64;
                let e = sphere_packing_exponent(rate, &curve, tol)?.value.to_f64();
                table.push(vec![rate.into(), e.into()]);
                result.push(json!({ "rate": rate, "e_sp": e }));
            }
            Ok(Outcome::plain(Value::Array(result), table))
        }
        ReportKind::Sandwich => {
            let codes = p.instances.unwrap_or(10_000);
            let rows = sandwich_check(&[3, 4, 5], &[4, 8], codes, p.seed())?;
            let mut table = Table::new(&[
                "n",
                "M",
                "codes",
                "outer",
                "min_error",
                "best_search_error",
                "gallager",
                "ordered",
            ]);
            for r in &rows {
                table.push(vec![
                    (r.n as f64).into(),
                    (r.messages as f64).into(),
                    (r.codes as f64).into(),
                    r.outer.into(),
                    r.min_error.into(),
                    r.best_search_error.into(),
                    r.gallager.into(),
                    (r.slack() >= -1e-12).into(),
                ]);
            }
            Ok(Outcome::plain(to_value(&rows), table))
        }
        ReportKind::Feedback => {
            let strategies = p.instances.unwrap_or(1000);
            let rows = feedback_check(&[2, 3, 4], strategies, p.seed())?;
            let mut table = Table::new(&[
                "n",
                "kappa",
                "M",
                "strategies",
                "bound",
                "binding",
                "min_error",
                "plan_ok",
            ]);
            for r in &rows {
                table.push(vec![
                    (r.n as f64).into(),
                    (r.kappa as f64).into(),
                    (r.messages as f64).into(),
                    (r.strategies as f64).into(),
                    r.bound.into(),
                    r.binding.into(),
                    r.min_error.into(),
                    r.plan_ok.into(),
                ]);
            }
            Ok(Outcome::plain(to_value(&rows), table))
        }
    }
}

fn dispatch(cli: &Cli, p: &Params) -> Res<Outcome> {
    match cli.command {
        Command::Capacity => run_capacity(p),
        Command::Exponent { kind } => run_exponent(kind, p),
        Command::Bound { kind } => run_bound(kind, p),
        Command::Poisson { kind } => run_poisson(kind, p),
        Command::Verify => run_verify(p),
        Command::Report { kind } => run_report(kind, p),
    }
}

fn kind_name(kind: impl ValueEnum) -> String {
    kind.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn command_name(c: &Command) -> String {
    match *c {
        Command::Capacity => "capacity".into(),
        Command::Exponent { kind } => format!("exponent {}", kind_name(kind)),
        Command::Bound { kind } => format!("bound {}", kind_name(kind)),
        Command::Poisson { kind } => format!("poisson {}", kind_name(kind)),
        Command::Verify => "verify".into(),
        Command::Report { kind } => format!("report {}", kind_name(kind)),
    }
}

fn run(cli: Cli) -> Res<()> {
    let file = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    let mut p = cli.params.clone().over(file);
    let format = p.format()?;
    if let Some(workers) = p.workers {
        if workers == 0 {
            return Err(CliError::Precondition("workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    p.tol = Some(p.tol());
    p.seed = Some(p.seed());
    p.workers = Some(rayon::current_num_threads());
    let mut config = serde_json::to_value(&p).expect("config serializes");
    config["command"] = Value::String(command_name(&cli.command));
    config["require_binding"] = Value::Bool(cli.require_binding);
    let outcome = dispatch(&cli, &p)?;
    print!("{}", emit(format, &config, &outcome.result, &outcome.table));
    if let Some(msg) = outcome.failed {
        return Err(CliError::Failed(msg));
    }
    if cli.require_binding && outcome.binding == Some(false) {
        return Err(CliError::NotBinding);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
