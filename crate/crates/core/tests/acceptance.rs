//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Expected values are computed here from closed forms and direct recursions,
//! never by calling the routine under test a second time.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsncalc_core::conformance::{check_arrival_curve, check_g_regular, check_g_server, check_service_curve};
use tsncalc_core::curve::{make_latency_rate, Curve};
use tsncalc_core::models::{arrival_to_g_regular, g_server_to_service, gr_server, grc_clock, service_to_g_server};
use tsncalc_core::sim::{
    adversarial_max_delay, build_counterexample, CounterexampleKind, Role, Scenario,
    SimResult,
};
use tsncalc_core::tsn::{
    analyze_cbs_frozen, analyze_cbs_top, analyze_queue, analyze_sp, literature_bounds,
};
use tsncalc_core::{
    bound_integrated, compare_table, Extended, FlowSpec, PacketTrace, PortConfig, QueueConfig,
    Rational, Selection, TrafficPattern,
};

type Outcome = Result<String, String>;

fn r(n: i64) -> Rational {
    Rational::int(n)
}

fn rq(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn fin(v: Rational) -> Extended {
    Extended::Finite(v)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

/// Random flow with `l^m ≤ l^M ≤ σ`; values have small denominators.
fn random_flow(rng: &mut ChaCha8Rng, max_rho: &Rational) -> FlowSpec {
    let l_min = rq(rng.random_range(8..=400), rng.random_range(1..=4));
    let l_max = &l_min + rq(rng.random_range(0..=400), rng.random_range(1..=2));
    let sigma = &l_max * r(rng.random_range(1..=4)) + rq(rng.random_range(0..=200), 1);
    let rho = max_rho * rq(rng.random_range(1..=20), 20);
    FlowSpec::new(sigma, rho, l_min, l_max).expect("generated flow is valid")
}

fn queue(priority: usize, selection: Selection, flow: FlowSpec) -> QueueConfig {
    QueueConfig {
        priority: priority as u32,
        selection,
        flow,
    }
}

fn cbs(idle_slope: Rational, frozen: bool) -> Selection {
    Selection::Cbs {
        idle_slope,
        frozen_by_higher: frozen,
    }
}

fn dedicated(c: &Rational, flow: FlowSpec) -> PortConfig {
    PortConfig::new(c.clone(), vec![queue(1, Selection::Sp, flow)]).unwrap()
}

fn seeded_scenario(cfg: &PortConfig, seed: u64, horizon: Rational) -> Scenario {
    Scenario {
        config: cfg.clone(),
        traffic: cfg
            .queues
            .iter()
            .enumerate()
            .map(|(k, q)| TrafficPattern::SeededRandomConforming {
                flow: q.flow.clone(),
                seed: seed.wrapping_mul(31).wrapping_add(k as u64),
            })
            .collect(),
        horizon,
    }
}

/// `L(n) = Σ_{k<n} l(k)` with `l(0) = 0`, packets indexed from 1.
fn prefix(trace: &PacketTrace) -> Vec<Rational> {
    let mut out = vec![r(0), r(0)];
    for p in trace.packets().iter().take(trace.len().saturating_sub(1)) {
        let last = out.last().unwrap().clone();
        out.push(last + &p.length);
    }
    out.truncate(trace.len() + 1);
    out
}

/// Trace pairs collected from the simulation-based criteria.
#[derive(Default)]
struct Collected {
    pairs: Vec<(PacketTrace, PacketTrace)>,
}

impl Collected {
    fn add(&mut self, sim: &SimResult) {
        for q in &sim.queues {
            self.pairs.push((q.input.clone(), q.output.clone()));
        }
    }
}

// 1
fn comparison_table() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..50 {
        let c = rq(rng.random_range(50..=2000), rng.random_range(1..=3));
        let flow = random_flow(&mut rng, &c);
        let (s, lm, lmax) = (&flow.sigma, &flow.l_min, &flow.l_max);
        let rep = compare_table(&flow, &c).map_err(|e| format!("instance {i}: {e}"))?;
        let expected = [
            fin(s / &c + lmax / &c),
            fin(s / &c + lmax / &c - lm / &c),
            fin(s / &c + (lmax - lm) / &c),
            fin(s / &c),
        ];
        let got = [&rep.min_plus, &rep.max_plus, &rep.mapped, &rep.integrated];
        for (row, (g, e)) in got.iter().zip(&expected).enumerate() {
            ensure!(**g == *e, "instance {i} row {row}: got {g}, expected {e}");
        }
        ensure!(
            got.iter().all(|g| rep.integrated <= **g),
            "instance {i}: integrated row is not minimal"
        );
    }
    Ok("50 random instances, rows equal closed forms, integrated row minimal".into())
}

// 2
fn counterexamples() -> Outcome {
    let c = r(100);
    let mut lines = Vec::new();
    for kind in CounterexampleKind::ALL {
        let ce = build_counterexample(kind);
        // Refutations declared by the fixture.
        for check in &ce.checks {
            ensure!(
                check.as_expected(),
                "{kind}: `{}` ({:?}) expected violation={} got {:?}",
                check.label,
                check.role,
                check.expect_violation,
                check.violation
            );
        }
        let refuted: Vec<String> = ce
            .checks
            .iter()
            .filter(|c| c.violation.is_some())
            .map(|c| format!("{} ({:?})", c.label, c.role))
            .collect();
        lines.push(format!("{kind} refutes {}", refuted.join(", ")));
        // Curves rebuilt here and checked on the same traces.
        let l_max = &ce.config.queues[ce.priority - 1].flow.l_max;
        match kind {
            CounterexampleKind::LinkArrival => {
                let ct = make_latency_rate(&c, &r(0)).unwrap();
                ensure!(check_arrival_curve(&ce.input, &ct).is_some(), "c·t accepted as arrival curve");
            }
            CounterexampleKind::LinkService => {
                let ct = make_latency_rate(&c, &r(0)).unwrap();
                let fixed = make_latency_rate(&c, &(l_max / &c)).unwrap();
                ensure!(
                    check_service_curve(&ce.input, &ce.output, &ct).unwrap().is_some(),
                    "c·t accepted as service curve"
                );
                ensure!(
                    check_service_curve(&ce.input, &ce.output, &fixed).unwrap().is_none(),
                    "c(t − l^M/c)⁺ refuted on the link fixture"
                );
            }
            CounterexampleKind::SpService => {
                let l_lower = &ce.config.queues[1].flow.l_max;
                let naive = make_latency_rate(&c, &(l_lower / &c)).unwrap();
                ensure!(
                    check_service_curve(&ce.input, &ce.output, &naive).unwrap().is_some(),
                    "c(t − l^{{M_l}}/c)⁺ accepted on the SP fixture"
                );
            }
            CounterexampleKind::CbsService => {
                let idle = r(50);
                let it = make_latency_rate(&idle, &r(0)).unwrap();
                let fixed = make_latency_rate(&idle, &(l_max / &c)).unwrap();
                ensure!(
                    check_service_curve(&ce.input, &ce.output, &it).unwrap().is_some(),
                    "I·t accepted on the CBS fixture"
                );
                ensure!(
                    check_service_curve(&ce.input, &ce.output, &fixed).unwrap().is_none(),
                    "I(t − l^M/c)⁺ refuted on the CBS fixture"
                );
            }
        }
        ensure!(
            ce.checks.iter().any(|c| matches!(c.role, Role::Arrival | Role::Service) && c.violation.is_some()),
            "{kind}: nothing refuted"
        );
    }
    Ok(lines.join("; "))
}

// 3
fn tightness(collected: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 20 {
        let c = r(rng.random_range(50..=500));
        let flow = random_flow(&mut rng, &c);
        // An equal split of σ into whole packets must exist for the burst to
        // carry exactly σ bits.
        let count = (&flow.sigma / &flow.l_max).ceil();
        if &count * &flow.l_min > flow.sigma {
            continue;
        }
        let cfg = dedicated(&c, flow.clone());
        let out = adversarial_max_delay(&cfg, 1, 2, done).map_err(|e| e.to_string())?;
        let expected = &flow.sigma / &c;
        let bound = bound_integrated(&flow.arrival_curve(), &gr_server(&c, &r(0)).unwrap())
            .map_err(|e| e.to_string())?;
        ensure!(
            out.max_delay == expected,
            "σ={} c={}: worst observed {} ≠ σ/c = {}",
            flow.sigma,
            c,
            out.max_delay,
            expected
        );
        ensure!(bound == fin(expected.clone()), "bound {bound} ≠ σ/c = {expected}");
        collected.add(&out.witness.run().map_err(|e| e.to_string())?);
        done += 1;
    }
    Ok("20 dedicated links: worst observed delay = σ/c = integrated bound".into())
}

/// Closed-form delay bound of the analyzed queue.
fn oracle_bound(cfg: &PortConfig, priority: usize) -> Extended {
    let c = &cfg.link_rate;
    let me = &cfg.queues[priority - 1];
    let higher = &cfg.queues[..priority - 1];
    let rho_u: Rational = higher.iter().map(|q| &q.flow.rho).sum();
    let sigma_u: Rational = higher.iter().map(|q| &q.flow.sigma).sum();
    let l_lower = cfg.queues[priority..]
        .iter()
        .map(|q| q.flow.l_max.clone())
        .max()
        .unwrap_or_else(|| r(0));
    let (sigma, rho, lm) = (&me.flow.sigma, &me.flow.rho, &me.flow.l_min);
    let res = c - &rho_u;
    match &me.selection {
        Selection::Sp => {
            if *rho > res {
                return Extended::Infinite;
            }
            fin(sigma / &res + (&sigma_u + &l_lower) / &res - lm / &res + lm / c)
        }
        Selection::Cbs { idle_slope, .. } => {
            let rate = idle_slope * &res / c;
            if *rho > rate {
                return Extended::Infinite;
            }
            fin(sigma / &rate + (&sigma_u + &l_lower) / &res - (rate.recip() - c.recip()) * lm)
        }
    }
}

enum Shape {
    Sp,
    CbsTop,
    CbsFrozen,
    Standalone,
}

fn random_port(rng: &mut ChaCha8Rng, shape: &Shape) -> (PortConfig, Vec<usize>) {
    let c = r(rng.random_range(100..=1000));
    let n_sp_higher;
    let n_lower;
    match shape {
        Shape::Sp => {
            n_sp_higher = rng.random_range(1..=4);
            n_lower = 0;
        }
        Shape::CbsTop => {
            n_sp_higher = 0;
            n_lower = rng.random_range(0..=2);
        }
        Shape::CbsFrozen => {
            n_sp_higher = rng.random_range(1..=2);
            n_lower = rng.random_range(0..=1);
        }
        Shape::Standalone => {
            n_sp_higher = 0;
            n_lower = 0;
        }
    }
    let share = &c / r(8);
    let mut queues = Vec::new();
    for k in 0..n_sp_higher {
        queues.push(queue(k + 1, Selection::Sp, random_flow(rng, &share)));
    }
    let mut analyzed: Vec<usize> = (1..=n_sp_higher).collect();
    if !matches!(shape, Shape::Sp) {
        let idle = &c * rq(rng.random_range(2..=9), 10);
        let frozen = matches!(shape, Shape::CbsFrozen);
        let flow = random_flow(rng, &(&idle / r(4)));
        queues.push(queue(n_sp_higher + 1, cbs(idle, frozen), flow));
        analyzed = if frozen { analyzed } else { Vec::new() };
        analyzed.push(n_sp_higher + 1);
    }
    let base = queues.len();
    for k in 0..n_lower {
        queues.push(queue(base + k + 1, Selection::Sp, random_flow(rng, &share)));
    }
    (PortConfig::new(c, queues).expect("generated port is valid"), analyzed)
}

fn witness_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-witnesses");
    let _ = fs::create_dir_all(&dir);
    dir
}

fn persist(name: &str, scenario: &Scenario) -> String {
    let path = witness_dir().join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(scenario).unwrap_or_default();
    match fs::write(&path, text) {
        Ok(()) => path.display().to_string(),
        Err(e) => format!("(could not write {}: {e})", path.display()),
    }
}

// 4
fn soundness(collected: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let shapes = [Shape::Sp, Shape::CbsTop, Shape::CbsFrozen, Shape::Standalone];
    let mut checked = 0;
    let mut tightest = (r(0), String::new());
    for i in 0..120u64 {
        let (cfg, analyzed) = random_port(&mut rng, &shapes[i as usize % shapes.len()]);
        let horizon = r(6) * cfg.queues.iter().map(|q| &q.flow.sigma).sum::<Rational>() / &cfg.link_rate;
        let direct = seeded_scenario(&cfg, i, horizon);
        let direct_run = direct.run().map_err(|e| format!("config {i}: {e}"))?;
        collected.add(&direct_run);
        for &priority in &analyzed {
            let result = analyze_queue(&cfg, priority).map_err(|e| format!("config {i} queue {priority}: {e}"))?;
            let expected = oracle_bound(&cfg, priority);
            ensure!(
                result.delay_bound == expected,
                "config {i} queue {priority}: analyzer bound {} ≠ closed form {}",
                result.delay_bound,
                expected
            );
            let out = adversarial_max_delay(&cfg, priority, 2, i).map_err(|e| e.to_string())?;
            let runs = [
                (out.max_delay.clone(), out.witness.clone()),
                (
                    direct_run.queue(priority).max_delay().map(|d| d.0).unwrap_or_else(|| r(0)),
                    direct.clone(),
                ),
            ];
            for (observed, scenario) in runs {
                if fin(observed.clone()) > result.delay_bound {
                    let path = persist(&format!("config-{i}-queue-{priority}"), &scenario);
                    return Err(format!(
                        "config {i} queue {priority}: observed delay {observed} exceeds bound {}; witness at {path}",
                        result.delay_bound
                    ));
                }
            }
            if let Extended::Finite(b) = &result.delay_bound {
                let ratio = &out.max_delay / b;
                if ratio > tightest.0 {
                    tightest = (ratio, format!("config {i} queue {priority}"));
                }
            }
            collected.add(&out.witness.run().map_err(|e| e.to_string())?);
            checked += 1;
        }
    }
    Ok(format!(
        "120 configs, {checked} analyzed queues, no delay above its bound (closest: {} of bound at {})",
        tightest.0.to_display_string(),
        tightest.1
    ))
}

// 5
fn cbs_exactness(collected: &mut Collected) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut packets = 0;
    for i in 0..60u64 {
        let c = r(rng.random_range(100..=1000));
        let idle = &c * rq(rng.random_range(1..=9), 10);
        let flow = random_flow(&mut rng, &idle);
        let cfg = PortConfig::new(c.clone(), vec![queue(1, cbs(idle.clone(), false), flow.clone())]).unwrap();
        let pattern = if i % 3 == 0 {
            TrafficPattern::GreedyTokenBucket {
                packet_size: flow.l_max.clone(),
                flow: flow.clone(),
            }
        } else {
            TrafficPattern::SeededRandomConforming { flow: flow.clone(), seed: i }
        };
        let horizon = r(8) * &flow.sigma / &idle;
        let scenario = Scenario {
            config: cfg,
            traffic: vec![pattern],
            horizon,
        };
        let sim = scenario.run().map_err(|e| e.to_string())?;
        let run = sim.queue(1);
        let a = &run.input;
        let big_l = prefix(a);
        for n in 1..=a.len() {
            let best = (0..=n)
                .map(|m| a.time(m) + (&big_l[n] - &big_l[m]) / &idle)
                .max()
                .unwrap();
            let expected = best + a.length(n) / &c;
            ensure!(
                run.output.time(n) == expected,
                "sim {i} packet {n}: d = {} but recursion gives {}",
                run.output.time(n),
                expected
            );
            let gap = &run.credit_regained[n - 1] - &run.transmission_start[n - 1];
            ensure!(
                gap == a.length(n) / &idle,
                "sim {i} packet {n}: e*(n) − e(n) = {gap}, expected l(n)/I"
            );
            packets += 1;
        }
        collected.add(&sim);
    }
    Ok(format!("60 standalone CBS runs, {packets} packets match the departure recursion"))
}

// 6
fn virtual_delay_dominates(collected: &Collected) -> Outcome {
    let mut count = 0;
    for (k, (input, output)) in collected.pairs.iter().enumerate() {
        let stats = tsncalc_core::conformance::delay_stats(input, output).map_err(|e| e.to_string())?;
        ensure!(
            stats.virtual_delay_sup >= fin(stats.max_packet_delay.clone()),
            "trace pair {k}: virtual delay sup {} < max packet delay {}",
            stats.virtual_delay_sup,
            stats.max_packet_delay
        );
        count += 1;
    }
    ensure!(count > 0, "no trace pairs collected");
    Ok(format!("{count} trace pairs from the simulation criteria"))
}

// 7
fn model_mappings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..50u64 {
        let c = r(rng.random_range(50..=1000));
        let flow = random_flow(&mut rng, &c);
        let alpha = flow.arrival_curve();
        let g = arrival_to_g_regular(&alpha, &flow.l_min).map_err(|e| e.to_string())?;
        // α↓(v) = 0 up to σ and (v − σ)/ρ beyond, shifted by l^m.
        for k in 0..8 {
            let v = &flow.sigma * rq(k, 3);
            let shifted = &v + &flow.l_min;
            let expected = if shifted <= flow.sigma {
                r(0)
            } else {
                (&shifted - &flow.sigma) / &flow.rho
            };
            ensure!(g.at(&v) == fin(expected.clone()), "instance {i}: g({v}) = {} ≠ {expected}", g.at(&v));
        }
        let horizon = r(6) * &flow.sigma / &c;
        let cfg = dedicated(&c, flow.clone());
        let scenario = seeded_scenario(&cfg, i, horizon);
        let sim = scenario.run().map_err(|e| e.to_string())?;
        let (input, output) = (&sim.queue(1).input, &sim.queue(1).output);
        ensure!(check_arrival_curve(input, &alpha).is_none(), "instance {i}: generated traffic not conforming");
        if let Some(v) = check_g_regular(input, &g) {
            return Err(format!("instance {i}: conforming trace not g-regular: {v}"));
        }
        // Service curves the link provides: rate up to c, latency at least l^M/c.
        let rate = &c * rq(rng.random_range(1..=4), 4);
        let latency = &flow.l_max / &c + rq(rng.random_range(0..=3), 2);
        let beta = make_latency_rate(&rate, &latency).unwrap();
        ensure!(
            check_service_curve(input, output, &beta).map_err(|e| e.to_string())?.is_none(),
            "instance {i}: link output fails its service curve"
        );
        if let Some(v) = check_g_server(input, output, &service_to_g_server(&beta)).map_err(|e| e.to_string())? {
            return Err(format!("instance {i}: service curve holds but g-server fails: {v}"));
        }
        // g-server `g(v) = (v + l^M)/c` of the link, mapped back to a service curve.
        let g_link = Curve::rate_offset(&c, &flow.l_max / &c).unwrap();
        ensure!(
            check_g_server(input, output, &g_link).map_err(|e| e.to_string())?.is_none(),
            "instance {i}: link is not a g-server for (v + l^M)/c"
        );
        if let Some(v) = check_service_curve(input, output, &g_server_to_service(&g_link)).map_err(|e| e.to_string())? {
            return Err(format!("instance {i}: g-server holds but g↓ is not a service curve: {v}"));
        }
    }
    Ok("50 instances each: α-conforming ⇒ g-regular, β ⇒ β↑ g-server, g-server ⇒ g↓ service curve".into())
}

// 8
fn reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let c = r(rng.random_range(50..=1000));
        let flow = random_flow(&mut rng, &c);
        let res = analyze_sp(&dedicated(&c, flow.clone()), 1).map_err(|e| e.to_string())?;
        let beta = make_latency_rate(&c, &(&flow.l_max / &c)).unwrap();
        ensure!(res.service_curve == beta, "instance {i}: SP service curve {:?}", res.service_curve);
        ensure!(res.delay_bound == fin(&flow.sigma / &c), "instance {i}: SP bound {}", res.delay_bound);

        let idle = &c * rq(rng.random_range(1..=9), 10);
        let mut queues = vec![queue(1, cbs(idle.clone(), true), random_flow(&mut rng, &(&idle / r(2))))];
        for k in 0..rng.random_range(0..=2) {
            queues.push(queue(k + 2, Selection::Sp, random_flow(&mut rng, &(&c / r(8)))));
        }
        let cfg = PortConfig::new(c.clone(), queues).unwrap();
        let frozen = analyze_cbs_frozen(&cfg).map_err(|e| e.to_string())?;
        let top = analyze_cbs_top(&cfg).map_err(|e| e.to_string())?;
        ensure!(
            frozen.gx_models == top.gx_models
                && frozen.service_curve == top.service_curve
                && frozen.delay_bound == top.delay_bound
                && frozen.constants == top.constants,
            "instance {i}: frozen analysis differs from top analysis"
        );
    }
    Ok("50 instances: SP dedicated link reduces to c(t − l^M/c)⁺ and σ/c; frozen CBS with nothing above equals CBS at top".into())
}

// 9
fn sp_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..50 {
        let c = r(rng.random_range(100..=1000));
        let n = rng.random_range(2..=4);
        let queues: Vec<QueueConfig> = (0..n)
            .map(|k| queue(k + 1, Selection::Sp, random_flow(&mut rng, &(&c / r(8)))))
            .collect();
        let cfg = PortConfig::new(c.clone(), queues).unwrap();
        let priority = rng.random_range(1..=n);
        let own = analyze_sp(&cfg, priority).map_err(|e| e.to_string())?.delay_bound;
        let lit = literature_bounds(&cfg, priority).map_err(|e| e.to_string())?;
        ensure!(
            own <= lit.timing_analysis && lit.timing_analysis <= lit.fluid_service_curve,
            "instance {i}: order broken: {own}, {}, {}",
            lit.timing_analysis,
            lit.fluid_service_curve
        );
        let rho_u: Rational = cfg.queues[..priority - 1].iter().map(|q| &q.flow.rho).sum();
        let l_max = cfg.queues.iter().map(|q| q.flow.l_max.clone()).max().unwrap();
        let gap = &l_max / (&c - &rho_u) - &l_max / &c;
        let (Extended::Finite(a), Extended::Finite(b)) = (&lit.timing_analysis, &lit.fluid_service_curve) else {
            return Err(format!("instance {i}: unexpected unbounded literature bound"));
        };
        ensure!(b - a == gap, "instance {i}: gap {} ≠ {gap}", b - a);
    }
    Ok("50 SP instances: own ≤ timing-analysis ≤ fluid bound, gap exact".into())
}

// 10
fn gr_clock() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut packets = 0;
    for i in 0..50u64 {
        let c = r(rng.random_range(50..=1000));
        let flow = random_flow(&mut rng, &c);
        let horizon = r(6) * &flow.sigma / &c;
        let sim = seeded_scenario(&dedicated(&c, flow), i, horizon).run().map_err(|e| e.to_string())?;
        let run = sim.queue(1);
        let clock = grc_clock(&run.input, &c).map_err(|e| e.to_string())?;
        let mut own = r(0);
        for (n, p) in run.input.packets().iter().enumerate() {
            own = own.max(p.time.clone()) + &p.length / &c;
            ensure!(clock[n] == own, "instance {i}: GRC({}) = {} but recursion gives {own}", n + 1, clock[n]);
            ensure!(
                run.output.time(n + 1) <= clock[n],
                "instance {i}: d({}) = {} > GRC = {}",
                n + 1,
                run.output.time(n + 1),
                clock[n]
            );
            packets += 1;
        }
    }
    Ok(format!("50 dedicated-link runs, d(n) ≤ GRC(n) for {packets} packets"))
}

fn main() -> ExitCode {
    let mut collected = Collected::default();
    let mut failed = 0;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    };
    run(1, "bound comparison table", &mut comparison_table);
    run(2, "packetization counterexamples", &mut counterexamples);
    run(3, "tightness on a dedicated link", &mut || tightness(&mut collected));
    run(4, "bound soundness", &mut || soundness(&mut collected));
    run(5, "standalone CBS exactness", &mut || cbs_exactness(&mut collected));
    run(6, "virtual delay dominates packet delay", &mut || virtual_delay_dominates(&collected));
    run(7, "min-plus and max-plus model mappings", &mut model_mappings);
    run(8, "reduction identities", &mut reductions);
    run(9, "SP bound ordering", &mut sp_ordering);
    run(10, "GR clock on a dedicated link", &mut gr_clock);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    }
}
