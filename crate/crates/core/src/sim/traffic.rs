use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conformance::{check_arrival_curve, check_g_regular, Packet, PacketTrace};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::models::FlowSpec;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum TrafficPattern {
    /// Token bucket starting full; every packet leaves as soon as it has tokens.
    GreedyTokenBucket { flow: FlowSpec, packet_size: Rational },
    /// Back-to-back packets spaced by `l(n)/rate`, starting at 0.
    LrqRegulated { rate: Rational, sizes: Vec<Rational> },
    Explicit { trace: PacketTrace },
    /// Random sizes in `[lMin, lMax]` and random idle gaps, policed by the
    /// flow's token bucket.
    SeededRandomConforming { flow: FlowSpec, seed: u64 },
}

/// Token bucket of depth `σ` and rate `ρ`, tracked at the last send time.
struct Bucket<'a> {
    flow: &'a FlowSpec,
    at: Rational,
    tokens: Rational,
}

impl<'a> Bucket<'a> {
    fn full(flow: &'a FlowSpec) -> Self {
        Bucket {
            flow,
            at: Rational::zero(),
            tokens: flow.sigma.clone(),
        }
    }

    /// Earliest time `≥ not_before` with at least `size` tokens.
    fn earliest(&self, size: &Rational, not_before: &Rational) -> Option<Rational> {
        let ready = if self.tokens >= *size {
            self.at.clone()
        } else if self.flow.rho.is_positive() {
            &self.at + (size - &self.tokens) / &self.flow.rho
        } else {
            return None;
        };
        Some(ready.max(not_before.clone()))
    }

    fn send(&mut self, time: Rational, size: &Rational) {
        let refill = &self.tokens + &self.flow.rho * (&time - &self.at);
        self.tokens = refill.min(self.flow.sigma.clone()) - size;
        self.at = time;
    }
}

fn check_size(flow: &FlowSpec, size: &Rational) -> Result<()> {
    if *size > flow.sigma {
        return Err(Error::param(
            "packetSize",
            format!("{size} exceeds the bucket depth {}", flow.sigma),
        ));
    }
    if *size < flow.l_min || *size > flow.l_max {
        return Err(Error::param(
            "packetSize",
            format!("{size} outside [{}, {}]", flow.l_min, flow.l_max),
        ));
    }
    Ok(())
}

fn greedy(flow: &FlowSpec, size: &Rational, horizon: &Rational) -> Vec<Packet> {
    let mut bucket = Bucket::full(flow);
    let mut out = Vec::new();
    while let Some(t) = bucket.earliest(size, &bucket.at.clone()) {
        if t >= *horizon {
            break;
        }
        bucket.send(t.clone(), size);
        out.push(Packet {
            time: t,
            length: size.clone(),
        });
    }
    out
}

fn seeded(flow: &FlowSpec, seed: u64, horizon: &Rational) -> Vec<Packet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = &flow.l_max - &flow.l_min;
    let unit = if flow.rho.is_positive() {
        &flow.l_max / &flow.rho
    } else {
        horizon / Rational::int(8)
    };
    let mut bucket = Bucket::full(flow);
    let mut out = Vec::new();
    loop {
        let size = &flow.l_min + &spread * Rational::new(rng.random_range(0..=4), 4);
        let gap = if rng.random_bool(0.5) {
            Rational::zero()
        } else {
            &unit * Rational::new(rng.random_range(1..=8), 4)
        };
        let Some(t) = bucket.earliest(&size, &(&bucket.at + gap)) else {
            break;
        };
        if t >= *horizon {
            break;
        }
        bucket.send(t.clone(), &size);
        out.push(Packet { time: t, length: size });
    }
    out
}

/// Packets of `pattern` arriving before `horizon`, checked against the model
/// the pattern promises.
pub fn generate_traffic(pattern: &TrafficPattern, horizon: &Rational) -> Result<PacketTrace> {
    let trace = match pattern {
        TrafficPattern::GreedyTokenBucket { flow, packet_size } => {
            flow.validate()?;
            check_size(flow, packet_size)?;
            PacketTrace::new(greedy(flow, packet_size, horizon))?
        }
        TrafficPattern::SeededRandomConforming { flow, seed } => {
            flow.validate()?;
            PacketTrace::new(seeded(flow, *seed, horizon))?
        }
        TrafficPattern::LrqRegulated { rate, sizes } => {
            if !rate.is_positive() {
                return Err(Error::param("rate", format!("must be > 0, got {rate}")));
            }
            let mut t = Rational::zero();
            let mut out = Vec::new();
            for size in sizes {
                if !size.is_positive() {
                    return Err(Error::param("sizes", format!("must be > 0, got {size}")));
                }
                if t >= *horizon {
                    break;
                }
                out.push(Packet {
                    time: t.clone(),
                    length: size.clone(),
                });
                t += size / rate;
            }
            PacketTrace::new(out)?
        }
        TrafficPattern::Explicit { trace } => PacketTrace::new(
            trace
                .packets()
                .iter()
                .filter(|p| p.time < *horizon)
                .cloned()
                .collect(),
        )?,
    };
    let violation = match pattern {
        TrafficPattern::GreedyTokenBucket { flow, .. }
        | TrafficPattern::SeededRandomConforming { flow, .. } => {
            check_arrival_curve(&trace, &flow.arrival_curve())
        }
        TrafficPattern::LrqRegulated { rate, .. } => {
            check_g_regular(&trace, &Curve::rate_offset(rate, Rational::zero())?)
        }
        TrafficPattern::Explicit { .. } => None,
    };
    match violation {
        Some(v) => Err(Error::Trace(format!("generated trace does not conform: {v}"))),
        None => Ok(trace),
    }
}
