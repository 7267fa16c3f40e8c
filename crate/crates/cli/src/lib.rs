//! Batch front-end for `tsncalc_core`.
//!
//! Exit codes: 0 success, 1 a conformance or soundness check failed,
//! 2 bad input (I/O, parse, configuration, utilization).

pub mod render;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tsncalc_core::conformance::{check_arrival_curve, check_gx_server, check_service_curve, Violation};
use tsncalc_core::sim::{
    adversarial_max_delay, build_counterexample, Counterexample, CounterexampleKind, Scenario,
};
use tsncalc_core::tsn::{analyze_queue, literature_bounds, LiteratureBounds};
use tsncalc_core::{
    compare_table, AnalyzerResult, BoundReport, Error, Extended, PacketTrace, PortConfig,
    QueueConfig, Rational, Selection, SimResult, TrafficPattern,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "tsncalc", version, about = "Delay bounds and packet-level simulation for TSN egress ports")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Service models and delay bounds for the queues of a port.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Only this priority (1 is highest).
        #[arg(long)]
        queue: Option<usize>,
    },
    /// Run the traffic given in the config through the port.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the seeds of seeded random traffic patterns.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for per-queue trace CSVs and the credit CSV.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Check bounds and models against simulated or supplied traces.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        queue: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random scenarios per queue on top of the structured ones.
        #[arg(long, default_value_t = 16)]
        trials: usize,
        /// Arrival trace CSV of `--queue`; needs `--departures`.
        #[arg(long, requires = "departures")]
        arrivals: Option<PathBuf>,
        #[arg(long, requires = "arrivals")]
        departures: Option<PathBuf>,
    },
    /// The four analyses for each flow alone on the link, and the SP
    /// comparison bounds.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Packetization counterexamples: link_arrival, link_service, sp_service,
    /// cbs_service, or all.
    Counterexample {
        #[arg(default_value = "all")]
        kind: String,
    },
}

/// Failure that prevents a report; always exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub code: u8,
}

impl Outcome {
    fn ok(report: String) -> Self {
        Outcome { report, code: 0 }
    }
}

/// Config file: a port, optionally with one traffic pattern per queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigFile {
    pub link_rate: Rational,
    pub queues: Vec<QueueConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<Vec<TrafficPattern>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedConfig {
    pub port: PortConfig,
    pub scenario: Option<Scenario>,
}

impl ParsedConfig {
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            link_rate: self.port.link_rate.clone(),
            queues: self.port.queues.clone(),
            traffic: self.scenario.as_ref().map(|s| s.traffic.clone()),
            horizon: self.scenario.as_ref().map(|s| s.horizon.clone()),
        }
    }
}

/// Parses a config file, or a scenario as written by `verify`
/// (`{"config": ..., "traffic": ..., "horizon": ...}`).
pub fn parse_config(bytes: &[u8]) -> Result<ParsedConfig, CliError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CliError(format!("config is not UTF-8: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError(format!("config is not valid JSON: {e}")))?;
    if value.get("config").is_some() {
        let scenario: Scenario =
            serde_json::from_value(value).map_err(|e| CliError(format!("invalid scenario: {e}")))?;
        return Ok(ParsedConfig {
            port: scenario.config.clone(),
            scenario: Some(scenario),
        });
    }
    let file: ConfigFile =
        serde_json::from_value(value).map_err(|e| CliError(format!("invalid config: {e}")))?;
    let port = PortConfig::new(file.link_rate, file.queues)
        .map_err(|e| CliError(format!("invalid config: {e}")))?;
    let scenario = match (file.traffic, file.horizon) {
        (None, None) => None,
        (Some(traffic), Some(horizon)) => {
            if traffic.len() != port.queues.len() {
                return Err(CliError(format!(
                    "invalid config: traffic: expected one pattern per queue ({}), got {}",
                    port.queues.len(),
                    traffic.len()
                )));
            }
            if horizon.is_negative() {
                return Err(CliError(format!("invalid config: horizon: must be >= 0, got {horizon}")));
            }
            Some(Scenario {
                config: port.clone(),
                traffic,
                horizon,
            })
        }
        (Some(_), None) => return Err(CliError("invalid config: horizon: required when traffic is given".into())),
        (None, Some(_)) => return Err(CliError("invalid config: traffic: required when horizon is given".into())),
    };
    Ok(ParsedConfig { port, scenario })
}

pub fn render_config(cfg: &ParsedConfig) -> String {
    serde_json::to_string_pretty(&cfg.to_file()).expect("config serializes")
}

fn load(path: &Path) -> Result<ParsedConfig, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&bytes).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn read_trace(path: &Path) -> Result<PacketTrace, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    PacketTrace::read_csv(file).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn opt(v: &Option<Rational>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze { config, queue } => analyze(&load(config)?, *queue, cli.format),
        Command::Simulate { config, seed, traces } => {
            simulate(&load(config)?, *seed, traces.as_deref(), cli.format)
        }
        Command::Verify {
            config,
            queue,
            seed,
            trials,
            arrivals,
            departures,
        } => {
            let cfg = load(config)?;
            match (arrivals, departures) {
                (Some(a), Some(d)) => {
                    let priority = queue.ok_or_else(|| CliError("--arrivals needs --queue".into()))?;
                    verify_traces(&cfg, priority, &read_trace(a)?, &read_trace(d)?, cli.format)
                }
                _ => verify(&cfg, *queue, *seed, *trials, cli.format),
            }
        }
        Command::Compare { config } => compare(&load(config)?, cli.format),
        Command::Counterexample { kind } => counterexample(kind, cli.format),
    }
}

struct Analyzed {
    priority: usize,
    result: Result<AnalyzerResult, String>,
    literature: Option<LiteratureBounds>,
}

/// Analyzer results per queue. Queues whose setting is not covered are
/// reported as skipped unless `only` names them; capacity errors always fail.
fn analyze_all(port: &PortConfig, only: Option<usize>) -> Result<Vec<Analyzed>, CliError> {
    let priorities: Vec<usize> = match only {
        Some(p) => {
            port.queue(p)?;
            vec![p]
        }
        None => (1..=port.queues.len()).collect(),
    };
    let mut out = Vec::new();
    for priority in priorities {
        let result = match analyze_queue(port, priority) {
            Ok(r) => Ok(r),
            Err(Error::Config(msg)) if only.is_none() => Err(msg),
            Err(e) => return Err(e.into()),
        };
        let literature = match (&port.queues[priority - 1].selection, &result) {
            (Selection::Sp, Ok(_)) => literature_bounds(port, priority).ok(),
            _ => None,
        };
        debug!("queue {priority}: {:?}", result.as_ref().map(|r| &r.delay_bound));
        out.push(Analyzed {
            priority,
            result,
            literature,
        });
    }
    Ok(out)
}

fn analyze(cfg: &ParsedConfig, only: Option<usize>, format: Format) -> Result<Outcome, CliError> {
    let port = &cfg.port;
    let entries = analyze_all(port, only)?;
    info!("analyzed {} queues", entries.len());
    let report = match format {
        Format::Json => to_json(&json!({
            "linkRate": port.link_rate,
            "queues": entries.iter().map(|e| match &e.result {
                Ok(r) => json!({"priority": e.priority, "result": r, "literature": e.literature}),
                Err(msg) => json!({"priority": e.priority, "skipped": msg}),
            }).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("priority,setting,delayBound,rate,e,e2,creditMax,timingAnalysisBound,fluidServiceCurveBound\n");
            for e in &entries {
                if let Ok(r) = &e.result {
                    let (ta, fl) = match &e.literature {
                        Some(l) => (l.timing_analysis.to_string(), l.fluid_service_curve.to_string()),
                        None => (String::new(), String::new()),
                    };
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        e.priority,
                        r.setting.describe(),
                        r.delay_bound,
                        opt(&r.constants.rate),
                        opt(&r.constants.e),
                        opt(&r.constants.e2),
                        opt(&r.constants.credit_max),
                        ta,
                        fl
                    );
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!("link rate {}, queues: {}\n", port.link_rate, port.queues.len());
            for e in &entries {
                match &e.result {
                    Err(msg) => {
                        let _ = write!(s, "\nqueue {}: not analyzed: {msg}\n", e.priority);
                    }
                    Ok(r) => {
                        let _ = writeln!(s, "\nqueue {} ({})", e.priority, r.setting.describe());
                        let mut rows = vec![
                            ("delay bound".to_string(), render::value(&r.delay_bound)),
                            ("service curve".to_string(), render::curve(&r.service_curve, "t", false, &Rational::zero())),
                        ];
                        for (k, m) in r.gx_models.iter().enumerate() {
                            rows.push((format!("g^x model {}", k + 1), render::gx_model(m)));
                        }
                        let c = &r.constants;
                        for (name, v) in [("rate", &c.rate), ("E", &c.e), ("E2", &c.e2), ("creditMax", &c.credit_max)] {
                            if let Some(v) = v {
                                rows.push((name.to_string(), render::rational(v)));
                            }
                        }
                        if let Some(l) = &e.literature {
                            rows.push(("timing-analysis bound".into(), render::value(&l.timing_analysis)));
                            rows.push(("fluid service-curve bound".into(), render::value(&l.fluid_service_curve)));
                        }
                        s.push_str(&render::table(&rows, "  "));
                        for note in &r.notes {
                            let _ = writeln!(s, "  note: {note}");
                        }
                    }
                }
            }
            s
        }
    };
    Ok(Outcome::ok(report))
}

fn scenario_with_seed(cfg: &ParsedConfig, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut scenario = cfg.scenario.clone().ok_or_else(|| {
        CliError("config has no traffic: add `traffic` (one pattern per queue) and `horizon`".into())
    })?;
    if let Some(seed) = seed {
        for (k, p) in scenario.traffic.iter_mut().enumerate() {
            if let TrafficPattern::SeededRandomConforming { seed: s, .. } = p {
                *s = seed.wrapping_add(k as u64);
            }
        }
    }
    Ok(scenario)
}

fn write_traces(dir: &Path, sim: &SimResult) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for q in &sim.queues {
        fs::write(dir.join(format!("queue-{}-arrivals.csv", q.priority)), q.input.to_csv_string()).map_err(io)?;
        fs::write(dir.join(format!("queue-{}-departures.csv", q.priority)), q.output.to_csv_string()).map_err(io)?;
    }
    if let Some(credit) = &sim.credit {
        fs::write(dir.join("credit.csv"), credit.to_csv_string()).map_err(io)?;
    }
    Ok(())
}

fn simulate(cfg: &ParsedConfig, seed: Option<u64>, traces: Option<&Path>, format: Format) -> Result<Outcome, CliError> {
    let scenario = scenario_with_seed(cfg, seed)?;
    let sim = scenario.run()?;
    info!("simulated {} queues", sim.queues.len());
    if let Some(dir) = traces {
        write_traces(dir, &sim)?;
    }
    let report = match format {
        Format::Json => to_json(&sim),
        Format::Csv => {
            let mut s = String::from("priority,n,arrival,length,start,departure,delay\n");
            for q in &sim.queues {
                for (i, (a, d)) in q.input.packets().iter().zip(q.output.packets()).enumerate() {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        q.priority,
                        i + 1,
                        a.time,
                        a.length,
                        q.transmission_start[i],
                        d.time,
                        &d.time - &a.time
                    );
                }
            }
            s
        }
        Format::Text => {
            let bounds = analyze_all(&cfg.port, None).ok();
            let mut rows = Vec::new();
            for q in &sim.queues {
                let max = q
                    .max_delay()
                    .map(|(d, n)| format!("{} (packet {n})", render::rational(&d)))
                    .unwrap_or_else(|| "-".into());
                let bound = bounds
                    .as_ref()
                    .and_then(|b| b.iter().find(|e| e.priority == q.priority))
                    .and_then(|e| e.result.as_ref().ok())
                    .map(|r| render::value(&r.delay_bound))
                    .unwrap_or_else(|| "-".into());
                rows.push((
                    format!("queue {}", q.priority),
                    format!("{} packets, max delay {max}, bound {bound}", q.input.len()),
                ));
            }
            let mut s = format!(
                "link rate {}, horizon {}, {} busy periods\n",
                sim.link_rate,
                scenario.horizon,
                sim.busy_periods.len()
            );
            s.push_str(&render::table(&rows, "  "));
            if let Some(credit) = &sim.credit {
                let _ = writeln!(
                    s,
                    "  credit: {} segments, {} resets",
                    credit.segments.len(),
                    credit.resets.len()
                );
            }
            s
        }
    };
    Ok(Outcome::ok(report))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckLine {
    priority: usize,
    check: String,
    passed: bool,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Scenario>,
}

/// Arrival conformance, analyzer models, and the delay bound on one queue's traces.
fn check_queue_traces(
    port: &PortConfig,
    priority: usize,
    result: &AnalyzerResult,
    input: &PacketTrace,
    output: &PacketTrace,
) -> Result<Vec<CheckLine>, CliError> {
    let mut lines = Vec::new();
    let mut push = |check: String, violation: Option<Violation>, detail: String| {
        lines.push(CheckLine {
            priority,
            check,
            passed: violation.is_none(),
            detail,
            violation,
            witness: None,
        })
    };
    let flow = &port.queues[priority - 1].flow;
    push(
        "arrival curve".into(),
        check_arrival_curve(input, &flow.arrival_curve()),
        format!("σ = {}, ρ = {}", flow.sigma, flow.rho),
    );
    push(
        "service curve".into(),
        check_service_curve(input, output, &result.service_curve)?,
        render::curve(&result.service_curve, "t", false, &Rational::zero()),
    );
    for (k, m) in result.gx_models.iter().enumerate() {
        push(format!("g^x model {}", k + 1), check_gx_server(input, output, m)?, render::gx_model(m));
    }
    let worst = input
        .packets()
        .iter()
        .zip(output.packets())
        .map(|(a, d)| &d.time - &a.time)
        .max()
        .unwrap_or_else(Rational::zero);
    let over = (Extended::Finite(worst.clone()) > result.delay_bound).then(|| Violation {
        definition: "delay bound".into(),
        s: None,
        t: None,
        m: None,
        n: None,
        lhs: Extended::Finite(worst.clone()),
        rhs: result.delay_bound.clone(),
    });
    push(
        "delay bound".into(),
        over,
        format!("max delay {} vs bound {}", render::rational(&worst), render::value(&result.delay_bound)),
    );
    Ok(lines)
}

fn checks_report(lines: &[CheckLine], format: Format) -> Outcome {
    let failed = lines.iter().filter(|l| !l.passed).count();
    let report = match format {
        Format::Json => to_json(&json!({ "passed": failed == 0, "checks": lines })),
        Format::Csv => {
            let mut s = String::from("priority,check,passed,detail\n");
            for l in lines {
                let _ = writeln!(s, "{},{},{},\"{}\"", l.priority, l.check, l.passed, l.detail.replace('"', "'"));
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for l in lines {
                let _ = writeln!(
                    s,
                    "queue {} {:<18} {}  {}",
                    l.priority,
                    l.check,
                    if l.passed { "ok  " } else { "FAIL" },
                    l.detail
                );
                if let Some(v) = &l.violation {
                    let _ = writeln!(s, "    {}", render::violation(v));
                }
                if let Some(w) = &l.witness {
                    let _ = writeln!(s, "    witness scenario: {}", serde_json::to_string(w).expect("serializes"));
                }
            }
            let _ = writeln!(s, "{} checks, {failed} failed", lines.len());
            s
        }
    };
    Outcome {
        report,
        code: u8::from(failed > 0),
    }
}

fn verify(cfg: &ParsedConfig, only: Option<usize>, seed: u64, trials: usize, format: Format) -> Result<Outcome, CliError> {
    let port = &cfg.port;
    let entries = analyze_all(port, only)?;
    let sim = match &cfg.scenario {
        Some(s) => Some(s.run()?),
        None => None,
    };
    let mut lines = Vec::new();
    for e in &entries {
        let Ok(result) = &e.result else { continue };
        if let Some(sim) = &sim {
            let q = sim.queue(e.priority);
            lines.extend(check_queue_traces(port, e.priority, result, &q.input, &q.output)?);
        }
        let search = adversarial_max_delay(port, e.priority, trials, seed)?;
        info!(
            "queue {}: worst of {} scenarios is {}",
            e.priority, search.scenarios_run, search.max_delay
        );
        let sound = Extended::Finite(search.max_delay.clone()) <= result.delay_bound;
        lines.push(CheckLine {
            priority: e.priority,
            check: "worst-case search".into(),
            passed: sound,
            detail: format!(
                "{} scenarios, worst delay {} vs bound {}",
                search.scenarios_run,
                render::rational(&search.max_delay),
                render::value(&result.delay_bound)
            ),
            violation: (!sound).then(|| Violation {
                definition: "delay bound".into(),
                s: None,
                t: None,
                m: None,
                n: Some(search.packet),
                lhs: Extended::Finite(search.max_delay.clone()),
                rhs: result.delay_bound.clone(),
            }),
            witness: (!sound).then(|| search.witness.clone()),
        });
    }
    Ok(checks_report(&lines, format))
}

fn verify_traces(
    cfg: &ParsedConfig,
    priority: usize,
    input: &PacketTrace,
    output: &PacketTrace,
    format: Format,
) -> Result<Outcome, CliError> {
    let result = analyze_queue(&cfg.port, priority)?;
    let lines = check_queue_traces(&cfg.port, priority, &result, input, output)?;
    Ok(checks_report(&lines, format))
}

fn compare(cfg: &ParsedConfig, format: Format) -> Result<Outcome, CliError> {
    let port = &cfg.port;
    let c = &port.link_rate;
    let tables: Vec<(usize, BoundReport)> = port
        .queues
        .iter()
        .map(|q| Ok((q.priority as usize, compare_table(&q.flow, c)?)))
        .collect::<Result<_, Error>>()?;
    let entries = analyze_all(port, None)?;
    let report = match format {
        Format::Json => to_json(&json!({
            "linkRate": c,
            "queues": tables.iter().map(|(p, t)| {
                let e = &entries[p - 1];
                json!({
                    "priority": p,
                    "dedicatedLink": t,
                    "portBound": e.result.as_ref().ok().map(|r| &r.delay_bound),
                    "literature": e.literature,
                })
            }).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("priority,row,value\n");
            for (p, t) in &tables {
                for (label, v) in t.rows() {
                    let _ = writeln!(s, "{p},{label},{v}");
                }
                let e = &entries[p - 1];
                if let Some(l) = &e.literature {
                    if let Ok(r) = &e.result {
                        let _ = writeln!(s, "{p},port bound,{}", r.delay_bound);
                    }
                    let _ = writeln!(s, "{p},timing-analysis bound,{}", l.timing_analysis);
                    let _ = writeln!(s, "{p},fluid service-curve bound,{}", l.fluid_service_curve);
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (p, t) in &tables {
                let _ = writeln!(s, "queue {p}: flow alone on a link of rate {c}");
                for line in t.to_string().lines() {
                    let _ = writeln!(s, "  {line}");
                }
                let e = &entries[p - 1];
                if let Some(l) = &e.literature {
                    let mut rows = Vec::new();
                    if let Ok(r) = &e.result {
                        rows.push(("port bound".to_string(), render::value(&r.delay_bound)));
                    }
                    rows.push(("timing-analysis bound".into(), render::value(&l.timing_analysis)));
                    rows.push(("fluid service-curve bound".into(), render::value(&l.fluid_service_curve)));
                    let _ = writeln!(s, "queue {p}: strict priority in the port");
                    s.push_str(&render::table(&rows, "  "));
                }
            }
            s
        }
    };
    Ok(Outcome::ok(report))
}

fn counterexample(kind: &str, format: Format) -> Result<Outcome, CliError> {
    let kinds: Vec<CounterexampleKind> = if kind == "all" {
        CounterexampleKind::ALL.to_vec()
    } else {
        vec![kind.parse()?]
    };
    let fixtures: Vec<Counterexample> = kinds.into_iter().map(build_counterexample).collect();
    let holds = fixtures.iter().all(Counterexample::holds);
    let report = match format {
        Format::Json => to_json(&fixtures),
        Format::Csv => {
            let mut s = String::from("kind,curve,role,expected,verdict\n");
            for f in &fixtures {
                for c in &f.checks {
                    let _ = writeln!(
                        s,
                        "{},{},{:?},{},{}",
                        f.kind,
                        c.label,
                        c.role,
                        if c.expect_violation { "violation" } else { "ok" },
                        if c.violation.is_some() { "violation" } else { "ok" }
                    );
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for f in &fixtures {
                let pairs: Vec<String> = f
                    .input
                    .packets()
                    .iter()
                    .zip(f.output.packets())
                    .map(|(a, d)| format!("a={} d={} l={}", a.time, d.time, a.length))
                    .collect();
                let _ = writeln!(s, "{}: queue {} packet {}", f.kind, f.priority, pairs.join("; "));
                for c in &f.checks {
                    let verdict = match &c.violation {
                        Some(v) => format!("Violation: {}", render::violation(v)),
                        None => "ok".into(),
                    };
                    let _ = writeln!(s, "  {:<32} {:<14} {verdict}", c.label, format!("{:?}", c.role));
                }
            }
            s
        }
    };
    Ok(Outcome {
        report,
        code: if holds { 0 } else { 1 },
    })
}
