//! Command-line surface for the qhist engine.
//!
//! Exit codes: 0 = analysis completed (substantive "incompatible" or
//! "inconsistent" verdicts are answers, not failures), 1 = input or
//! validation error, 2 = internal numerical failure. In JSON mode exactly
//! one JSON document goes to standard output; diagnostics go to standard
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qhist::inference::{three_box, three_box_scenario, RetrodictionReport, ScanOutcome};
use qhist::run::{
    run_ch_check, run_gc_build, run_query, run_scan, run_validate, select_queries,
    CompatibilityDoc, ConsistencyDoc, Invocation, QueryResultDoc, ReportDoc, ValidationDoc,
};
use qhist::scenario::{canonical_json, parse_scenario, serialize_scenario, Compiled, Scenario};
use qhist::{Error, DEFAULT_CONSISTENCY_TOLERANCE, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "qhist",
    about = "Quantum contexts, consistent histories and generalized contexts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output mode.
    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Human)]
    output: OutputMode,

    /// Numerical tolerance; also sets the consistency tolerance unless
    /// --consistency-tolerance is given.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Threshold on off-diagonal |D| for the consistency test.
    #[arg(long, global = true)]
    consistency_tolerance: Option<f64>,

    /// Seed echoed into reports (reserved for randomized suites).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a scenario document.
    Validate { scenario: PathBuf },
    /// Single-time probabilities (born and conditional queries).
    Born {
        scenario: PathBuf,
        /// Run only this query index.
        #[arg(long)]
        query: Option<usize>,
    },
    /// Build the generalized context over every scenario context.
    GcBuild { scenario: PathBuf },
    /// Generalized-context probabilities (gc_probability queries).
    GcProb {
        scenario: PathBuf,
        #[arg(long)]
        query: Option<usize>,
    },
    /// Consistency check of the history family over every scenario context.
    ChCheck { scenario: PathBuf },
    /// Consistent-histories probabilities (ch_probability queries).
    ChProb {
        scenario: PathBuf,
        #[arg(long)]
        query: Option<usize>,
    },
    /// Retrodiction analyses (retrodiction queries).
    Retrodict {
        scenario: PathBuf,
        #[arg(long)]
        query: Option<usize>,
    },
    /// Run a built-in fixture (currently: three-box).
    Demo {
        name: String,
        /// Print the fixture as a scenario document instead of running it.
        #[arg(long)]
        emit_scenario: bool,
    },
    /// Scan scenario contexts for contrary property pairs.
    ScanContrary {
        scenario: PathBuf,
        /// Maximum number of candidate pairs to examine.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Born { .. } => "born",
            Command::GcBuild { .. } => "gc-build",
            Command::GcProb { .. } => "gc-prob",
            Command::ChCheck { .. } => "ch-check",
            Command::ChProb { .. } => "ch-prob",
            Command::Retrodict { .. } => "retrodict",
            Command::Demo { .. } => "demo",
            Command::ScanContrary { .. } => "scan-contrary",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let tol = cli.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let tol_c = cli
        .consistency_tolerance
        .or(cli.tolerance)
        .unwrap_or(DEFAULT_CONSISTENCY_TOLERANCE);
    if tol <= 0.0 || tol_c <= 0.0 {
        eprintln!("error: tolerances must be positive");
        return ExitCode::from(1);
    }

    let invocation = Invocation {
        command: cli.command.name().to_string(),
        tolerance: tol,
        consistency_tolerance: tol_c,
        seed: cli.seed,
    };

    match execute(&cli.command, invocation, tol, tol_c) {
        Ok(Output::Report(report)) => {
            match cli.output {
                OutputMode::Json => print!("{}", canonical_json(&report)),
                OutputMode::Human => print!("{}", render_human(&report)),
            }
            ExitCode::SUCCESS
        }
        Ok(Output::Scenario(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if cli.output == OutputMode::Json {
                let doc = serde_json::json!({
                    "schema_version": qhist::scenario::SCHEMA_VERSION,
                    "error": { "message": e.to_string() },
                });
                print!("{}", canonical_json(&doc));
            }
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum Output {
    Report(ReportDoc),
    Scenario(String),
}

fn load(path: &Path, tol: f64) -> Result<(Scenario, Compiled), Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let scenario = parse_scenario(&text, tol)?;
    let compiled = scenario.compile(tol)?;
    Ok((scenario, compiled))
}

fn execute(
    command: &Command,
    invocation: Invocation,
    tol: f64,
    tol_c: f64,
) -> Result<Output, Error> {
    let mut report = ReportDoc::new(invocation);
    match command {
        Command::Validate { scenario } => {
            let (s, compiled) = load(scenario, tol)?;
            report.validation = Some(run_validate(&s, &compiled));
        }
        Command::Born { scenario, query } => {
            let (s, compiled) = load(scenario, tol)?;
            let picked = select_queries(&s, &["born", "conditional"], *query)?;
            report.results = Some(run_selected(&s, &compiled, &picked, tol, tol_c)?);
        }
        Command::GcBuild { scenario } => {
            let (_, compiled) = load(scenario, tol)?;
            report.compatibility = Some(run_gc_build(&compiled, tol)?);
        }
        Command::GcProb { scenario, query } => {
            let (s, compiled) = load(scenario, tol)?;
            let picked = select_queries(&s, &["gc_probability"], *query)?;
            report.results = Some(run_selected(&s, &compiled, &picked, tol, tol_c)?);
        }
        Command::ChCheck { scenario } => {
            let (_, compiled) = load(scenario, tol)?;
            report.consistency = Some(run_ch_check(&compiled, tol, tol_c)?);
        }
        Command::ChProb { scenario, query } => {
            let (s, compiled) = load(scenario, tol)?;
            let picked = select_queries(&s, &["ch_probability"], *query)?;
            report.results = Some(run_selected(&s, &compiled, &picked, tol, tol_c)?);
        }
        Command::Retrodict { scenario, query } => {
            let (s, compiled) = load(scenario, tol)?;
            let picked = select_queries(&s, &["retrodiction"], *query)?;
            report.results = Some(run_selected(&s, &compiled, &picked, tol, tol_c)?);
        }
        Command::Demo {
            name,
            emit_scenario,
        } => {
            if name != "three-box" {
                return Err(Error::Scenario {
                    path: name.clone(),
                    detail: "unknown fixture (available: three-box)".to_string(),
                });
            }
            if *emit_scenario {
                return Ok(Output::Scenario(serialize_scenario(&three_box_scenario())));
            }
            let f = three_box();
            report.retrodiction = Some(qhist::inference::analyze_retrodiction(
                &f.state,
                &f.p,
                &f.q,
                &f.r,
                &f.propagator,
                f.t0,
                f.t1,
                f.t2,
                tol,
                tol_c,
            )?);
        }
        Command::ScanContrary { scenario, budget } => {
            let (_, compiled) = load(scenario, tol)?;
            report.scan = Some(run_scan(&compiled, *budget, tol)?);
        }
    }
    Ok(Output::Report(report))
}

fn run_selected(
    scenario: &Scenario,
    compiled: &Compiled,
    picked: &[usize],
    tol: f64,
    tol_c: f64,
) -> Result<Vec<QueryResultDoc>, Error> {
    picked
        .iter()
        .map(|&i| run_query(scenario, compiled, i, tol, tol_c))
        .collect()
}

/// Six significant digits: positional in a moderate range, scientific
/// outside it. Human mode rounds only here, at display time.
fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

fn render_human(report: &ReportDoc) -> String {
    let mut out = String::new();
    if let Some(v) = &report.validation {
        render_validation(&mut out, v);
    }
    if let Some(results) = &report.results {
        for r in results {
            render_query_result(&mut out, r);
        }
        if results.is_empty() {
            out.push_str("no matching queries in scenario\n");
        }
    }
    if let Some(c) = &report.compatibility {
        render_compatibility(&mut out, c);
    }
    if let Some(c) = &report.consistency {
        render_consistency(&mut out, c);
    }
    if let Some(r) = &report.retrodiction {
        render_retrodiction(&mut out, r);
    }
    if let Some(s) = &report.scan {
        render_scan(&mut out, s);
    }
    out
}

fn render_validation(out: &mut String, v: &ValidationDoc) {
    out.push_str(&format!(
        "scenario OK: dimension {}, {} context(s), {} query(ies)\n",
        v.dimension, v.contexts, v.queries
    ));
}

fn render_query_result(out: &mut String, r: &QueryResultDoc) {
    match (&r.value, &r.verdict, &r.retrodiction) {
        (Some(v), _, _) => {
            out.push_str(&format!(
                "query {} ({}): probability {}\n",
                r.query,
                r.kind,
                fmt_sig6(*v)
            ));
        }
        (_, Some(verdict), _) => {
            out.push_str(&format!("query {} ({}): {}", r.query, r.kind, verdict));
            if let Some(d) = &r.detail {
                out.push_str(&format!(" — {d}"));
            }
            out.push('\n');
        }
        (_, _, Some(retro)) => {
            out.push_str(&format!("query {} ({}):\n", r.query, r.kind));
            render_retrodiction(out, retro);
        }
        _ => out.push_str(&format!("query {} ({}): no result\n", r.query, r.kind)),
    }
}

fn render_compatibility(out: &mut String, c: &CompatibilityDoc) {
    if c.compatible {
        let zeros = c.zero_atoms.as_ref().map_or(0, Vec::len);
        out.push_str(&format!(
            "generalized context: COMPATIBLE — shape {:?}, {} atoms ({} zero-rank)\n",
            c.shape.as_deref().unwrap_or(&[]),
            c.atom_count.unwrap_or(0),
            zeros
        ));
    } else {
        let pairs = c.noncommuting.as_ref().map_or(0, Vec::len);
        out.push_str(&format!(
            "generalized context: INCOMPATIBLE — {} non-commuting pair(s), worst commutator norm {}\n",
            pairs,
            fmt_sig6(c.worst_commutator_norm.unwrap_or(0.0))
        ));
        if let Some(nc) = &c.noncommuting {
            for p in nc {
                out.push_str(&format!(
                    "  context {} atom {} vs context {} atom {}: norm {}{}\n",
                    p.first[0],
                    p.first[1],
                    p.second[0],
                    p.second[1],
                    fmt_sig6(p.commutator_norm),
                    if p.marginal { " (marginal)" } else { "" }
                ));
            }
        }
    }
}

fn render_consistency(out: &mut String, c: &ConsistencyDoc) {
    if c.consistent {
        out.push_str(&format!(
            "family of {} histories: CONSISTENT — max off-diagonal |D| = {} (threshold {})\n",
            c.histories,
            fmt_sig6(c.max_offdiagonal),
            fmt_sig6(c.threshold)
        ));
        if let Some(probs) = &c.probabilities {
            for p in probs {
                out.push_str(&format!(
                    "  Pr{:?} = {}\n",
                    p.history,
                    fmt_sig6(p.probability)
                ));
            }
        }
    } else {
        out.push_str(&format!(
            "family of {} histories: INCONSISTENT — max off-diagonal |D| = {} (threshold {})",
            c.histories,
            fmt_sig6(c.max_offdiagonal),
            fmt_sig6(c.threshold)
        ));
        if let Some([a, b]) = &c.worst_pair {
            out.push_str(&format!("; worst pair {a:?} vs {b:?}"));
        }
        out.push('\n');
        out.push_str("  probabilities are undefined for this state\n");
    }
}

fn render_retrodiction(out: &mut String, r: &RetrodictionReport) {
    out.push_str("retrodiction analysis:\n");
    out.push_str(&format!("  contrary(p, q): {}\n", r.contrary));
    for (label, fam) in [("p", &r.p_family), ("q", &r.q_family)] {
        let mut line = format!(
            "  {label}-family: {}",
            if fam.consistent {
                "consistent"
            } else {
                "INCONSISTENT"
            }
        );
        match (&fam.conditional, &fam.note) {
            (Some(c), _) => {
                line.push_str(&format!(", Pr({label},t1 | r,t2) = {}", fmt_sig6(*c)));
                if let Some(w) = fam.conditioning_probability {
                    line.push_str(&format!(" (conditioning weight {})", fmt_sig6(w)));
                }
            }
            (None, Some(note)) => line.push_str(&format!(", conditional undefined ({note})")),
            (None, None) => line.push_str(", conditional undefined"),
        }
        line.push_str(&format!(
            " [max off-diagonal |D| = {}]",
            fmt_sig6(fam.max_offdiagonal)
        ));
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("  commutation at t0:");
    for check in &r.pair_checks {
        out.push_str(&format!(
            " [{},{}] {} (norm {}){}",
            check.pair.0,
            check.pair.1,
            if check.commutes {
                "commute"
            } else {
                "DO NOT commute"
            },
            fmt_sig6(check.commutator_norm),
            if check.marginal { " marginal" } else { "" }
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "  conclusion: {}\n",
        match r.conclusion {
            qhist::inference::Conclusion::ContraryInferenceInCh => "CONTRARY_INFERENCE_IN_CH",
            qhist::inference::Conclusion::BlockedByGcIncompatibility =>
                "BLOCKED_BY_GC_INCOMPATIBILITY",
            qhist::inference::Conclusion::BothFrameworksAgree => "BOTH_FRAMEWORKS_AGREE",
            qhist::inference::Conclusion::NotContrary => "NOT_CONTRARY",
        }
    ));
}

fn render_scan(out: &mut String, s: &ScanOutcome) {
    out.push_str(&format!(
        "contrary pairs: {} found, {} pair(s) examined{}\n",
        s.pairs.len(),
        s.examined,
        if s.truncated {
            " (budget exceeded, list truncated)"
        } else {
            ""
        }
    ));
    for (a, b) in &s.pairs {
        out.push_str(&format!(
            "  context {} atoms {:?}  |  context {} atoms {:?}\n",
            a.context, a.atoms, b.context, b.atoms
        ));
    }
}
