use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::simulate_port;
use crate::conformance::{check_arrival_curve, check_service_curve, PacketTrace, Violation};
use crate::curve::{make_latency_rate, make_token_bucket, Curve};
use crate::error::{Error, Result};
use crate::models::FlowSpec;
use crate::rational::{q, Rational};
use crate::tsn::{analyze_cbs_standalone, analyze_sp, PortConfig, QueueConfig, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// `c·t` is not an arrival curve of packetized traffic on a link.
    LinkArrival,
    /// `c·t` is not a service curve of a packetized link.
    LinkService,
    /// Neither `c·t` nor `c(t − l^{M_l}/c)⁺` is a service curve of the top SP queue.
    SpService,
    /// `I·t` is not a service curve of a CBS queue.
    CbsService,
}

impl CounterexampleKind {
    pub const ALL: [CounterexampleKind; 4] = [
        CounterexampleKind::LinkArrival,
        CounterexampleKind::LinkService,
        CounterexampleKind::SpService,
        CounterexampleKind::CbsService,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CounterexampleKind::LinkArrival => "link_arrival",
            CounterexampleKind::LinkService => "link_service",
            CounterexampleKind::SpService => "sp_service",
            CounterexampleKind::CbsService => "cbs_service",
        }
    }
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CounterexampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown counterexample `{s}`; expected one of link_arrival, link_service, sp_service, cbs_service"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    /// Arrival curve of the input trace.
    Arrival,
    /// Arrival curve of the output trace.
    OutputArrival,
    /// Service curve from input to output.
    Service,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckOutcome {
    pub label: String,
    pub role: Role,
    pub curve: Curve,
    pub expect_violation: bool,
    pub violation: Option<Violation>,
}

impl CheckOutcome {
    pub fn as_expected(&self) -> bool {
        self.violation.is_some() == self.expect_violation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub config: PortConfig,
    /// Queue whose traces are checked.
    pub priority: usize,
    /// Arrivals of every queue, in priority order.
    pub arrivals: Vec<PacketTrace>,
    pub input: PacketTrace,
    pub output: PacketTrace,
    pub checks: Vec<CheckOutcome>,
}

impl Counterexample {
    /// Every refuted curve is refuted and every repaired curve holds.
    pub fn holds(&self) -> bool {
        self.checks.iter().all(CheckOutcome::as_expected)
    }
}

fn r(n: i64) -> Rational {
    Rational::int(n)
}

fn single_packet_flow() -> FlowSpec {
    FlowSpec::new(r(100), r(1), r(100), r(100)).expect("valid flow")
}

fn port(queues: Vec<Selection>) -> PortConfig {
    let queues = queues
        .into_iter()
        .enumerate()
        .map(|(k, selection)| QueueConfig {
            priority: k as u32 + 1,
            selection,
            flow: single_packet_flow(),
        })
        .collect();
    PortConfig::new(r(100), queues).expect("valid port")
}

fn one_packet(at: Rational) -> PacketTrace {
    PacketTrace::from_pairs(vec![(at, r(100))]).expect("valid trace")
}

fn fluid(rate: &Rational) -> Curve {
    make_latency_rate(rate, &Rational::zero()).expect("valid curve")
}

/// Fixtures on a link of rate 100 with 100-bit packets.
pub fn build_counterexample(kind: CounterexampleKind) -> Counterexample {
    let c = r(100);
    let (config, arrivals, priority) = match kind {
        CounterexampleKind::LinkArrival => (port(vec![Selection::Sp]), vec![one_packet(r(5))], 1),
        CounterexampleKind::LinkService => (port(vec![Selection::Sp]), vec![one_packet(r(0))], 1),
        CounterexampleKind::SpService => (
            port(vec![Selection::Sp, Selection::Sp]),
            vec![one_packet(q(1, 100)), one_packet(r(0))],
            1,
        ),
        CounterexampleKind::CbsService => (
            port(vec![Selection::Cbs {
                idle_slope: r(50),
                frozen_by_higher: false,
            }]),
            vec![one_packet(r(0))],
            1,
        ),
    };
    let sim = simulate_port(&config, &arrivals).expect("fixture simulates");
    let run = sim.queue(priority);
    let (input, output) = (run.input.clone(), run.output.clone());
    let l_max = &config.queues[priority - 1].flow.l_max;

    // (label, role, curve, expect_violation)
    let mut plan: Vec<(String, Role, Curve, bool)> = Vec::new();
    match kind {
        CounterexampleKind::LinkArrival => {
            let burst = make_token_bucket(l_max, &c).expect("valid curve");
            plan.push(("c·t".into(), Role::Arrival, fluid(&c), true));
            plan.push(("c·t".into(), Role::OutputArrival, fluid(&c), true));
            plan.push(("l^M + c·t".into(), Role::Arrival, burst.clone(), false));
            plan.push(("l^M + c·t".into(), Role::OutputArrival, burst, false));
        }
        CounterexampleKind::LinkService => {
            let repaired = analyze_sp(&config, priority).expect("analyzable").service_curve;
            plan.push(("c·t".into(), Role::Service, fluid(&c), true));
            plan.push(("c(t − l^M/c)⁺".into(), Role::Service, repaired, false));
        }
        CounterexampleKind::SpService => {
            let l_lower = &config.queues[1].flow.l_max;
            let naive = make_latency_rate(&c, &(l_lower / &c)).expect("valid curve");
            let repaired = analyze_sp(&config, priority).expect("analyzable").service_curve;
            plan.push(("c·t".into(), Role::Service, fluid(&c), true));
            plan.push(("c(t − l^{M_l}/c)⁺".into(), Role::Service, naive, true));
            plan.push(("c(t − (l^{M_l} + l^{M_i})/c)⁺".into(), Role::Service, repaired, false));
        }
        CounterexampleKind::CbsService => {
            let Selection::Cbs { idle_slope, .. } = &config.queues[0].selection else {
                unreachable!()
            };
            let repaired = analyze_cbs_standalone(&c, idle_slope, &config.queues[0].flow)
                .expect("analyzable")
                .service_curve;
            plan.push(("I·t".into(), Role::Service, fluid(idle_slope), true));
            plan.push(("I(t − l^M/c)⁺".into(), Role::Service, repaired, false));
        }
    }
    let checks = plan
        .into_iter()
        .map(|(label, role, curve, expect_violation)| {
            let violation = match role {
                Role::Arrival => check_arrival_curve(&input, &curve),
                Role::OutputArrival => check_arrival_curve(&output, &curve),
                Role::Service => {
                    check_service_curve(&input, &output, &curve).expect("matched traces")
                }
            };
            CheckOutcome {
                label,
                role,
                curve,
                expect_violation,
                violation,
            }
        })
        .collect();
    Counterexample {
        kind,
        config,
        priority,
        arrivals,
        input,
        output,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_refutes_and_repairs() {
        for kind in CounterexampleKind::ALL {
            let ce = build_counterexample(kind);
            for check in &ce.checks {
                assert!(check.as_expected(), "{kind}: {} {:?}", check.label, check.violation);
            }
        }
    }

    #[test]
    fn witnesses_fall_inside_the_transmission() {
        let ce = build_counterexample(CounterexampleKind::LinkService);
        assert_eq!(ce.output.time(1), r(1));
        let v = ce.checks[0].violation.as_ref().unwrap();
        let t = v.t.clone().unwrap();
        assert!(t > r(0) && t < r(1));

        let ce = build_counterexample(CounterexampleKind::CbsService);
        let v = ce.checks[0].violation.as_ref().unwrap();
        let t = v.t.clone().unwrap();
        assert!(t > r(0) && t < r(1));
    }

    #[test]
    fn sp_fixture_timing() {
        let ce = build_counterexample(CounterexampleKind::SpService);
        assert_eq!(ce.input.time(1), q(1, 100));
        assert_eq!(ce.output.time(1), r(2));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in CounterexampleKind::ALL {
            assert_eq!(kind.name().parse::<CounterexampleKind>().unwrap(), kind);
        }
        assert!("nope".parse::<CounterexampleKind>().is_err());
    }
}
