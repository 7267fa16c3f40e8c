//! Packet-level simulation of one egress port in exact arithmetic, traffic
//! generators, a worst-case searcher, and the packetization counterexamples.

mod adversarial;
mod counterexample;
mod port;
mod traffic;

use serde::{Deserialize, Serialize};

use crate::conformance::PacketTrace;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tsn::PortConfig;

pub use adversarial::{adversarial_max_delay, AdversarialOutcome};
pub use counterexample::{build_counterexample, CheckOutcome, Counterexample, CounterexampleKind, Role};
pub use port::{simulate_port, CreditSegment, CreditTrajectory, QueueRun, SimResult};
pub use traffic::{generate_traffic, TrafficPattern};

/// A port configuration with one traffic pattern per queue, in priority order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scenario {
    pub config: PortConfig,
    pub traffic: Vec<TrafficPattern>,
    /// Only packets arriving strictly before this time are generated.
    pub horizon: Rational,
}

impl Scenario {
    pub fn arrivals(&self) -> Result<Vec<PacketTrace>> {
        if self.traffic.len() != self.config.queues.len() {
            return Err(Error::Config(format!(
                "traffic has {} patterns for {} queues",
                self.traffic.len(),
                self.config.queues.len()
            )));
        }
        self.traffic
            .iter()
            .map(|p| generate_traffic(p, &self.horizon))
            .collect()
    }

    pub fn run(&self) -> Result<SimResult> {
        simulate_port(&self.config, &self.arrivals()?)
    }
}
