use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_traffic, Scenario, TrafficPattern};
use crate::conformance::{Packet, PacketTrace};
use crate::error::Result;
use crate::models::FlowSpec;
use crate::rational::Rational;
use crate::tsn::PortConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AdversarialOutcome {
    pub max_delay: Rational,
    /// 1-based index of the packet of the analyzed queue attaining the delay.
    pub packet: usize,
    /// Rerunning this scenario reproduces `max_delay`.
    pub witness: Scenario,
    pub scenarios_run: usize,
}

fn greedy(flow: &FlowSpec, size: Rational) -> TrafficPattern {
    TrafficPattern::GreedyTokenBucket {
        flow: flow.clone(),
        packet_size: size,
    }
}

/// Greedy bucket output started `delta` later.
fn delayed_greedy(flow: &FlowSpec, size: Rational, delta: &Rational, horizon: &Rational) -> Result<TrafficPattern> {
    if delta.is_zero() {
        return Ok(greedy(flow, size));
    }
    let base = generate_traffic(&greedy(flow, size), &(horizon - delta))?;
    let shifted = base
        .packets()
        .iter()
        .map(|p| Packet {
            time: &p.time + delta,
            length: p.length.clone(),
        })
        .collect();
    Ok(TrafficPattern::Explicit {
        trace: PacketTrace::new(shifted)?,
    })
}

/// Packet sizes worth trying for a greedy burst: both extremes, and the
/// largest equal split of `σ` into whole packets, which empties the bucket.
fn burst_sizes(flow: &FlowSpec) -> Vec<Rational> {
    let mut sizes = vec![flow.l_max.clone(), flow.l_min.clone()];
    let count = (&flow.sigma / &flow.l_max).ceil();
    let split = &flow.sigma / &count;
    if split >= flow.l_min && split <= flow.l_max {
        sizes.insert(0, split);
    }
    sizes.sort();
    sizes.dedup();
    sizes
}

fn structured(cfg: &PortConfig, priority: usize, horizon: &Rational) -> Result<Vec<Scenario>> {
    let me = priority - 1;
    let lower_max = cfg.queues[priority..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.flow.l_max.cmp(&b.1.flow.l_max).then(b.0.cmp(&a.0)))
        .map(|(k, q)| (priority + k, q.flow.l_max.clone()));
    let mut blockings = vec![None];
    if let Some((k, l)) = &lower_max {
        blockings.push(Some((*k, l.clone())));
    }
    let mut out = Vec::new();
    for size in burst_sizes(&cfg.queues[me].flow) {
        for blocking in &blockings {
            let delta = match blocking {
                Some((_, l)) => l / (&cfg.link_rate * Rational::int(1024)),
                None => Rational::zero(),
            };
            let mut traffic = Vec::with_capacity(cfg.queues.len());
            for (k, q) in cfg.queues.iter().enumerate() {
                let pattern = if k < me {
                    delayed_greedy(&q.flow, q.flow.l_max.clone(), &delta, horizon)?
                } else if k == me {
                    delayed_greedy(&q.flow, size.clone(), &delta, horizon)?
                } else {
                    let packets = match blocking {
                        Some((b, l)) if *b == k => vec![Packet {
                            time: Rational::zero(),
                            length: l.clone(),
                        }],
                        _ => Vec::new(),
                    };
                    TrafficPattern::Explicit {
                        trace: PacketTrace::new(packets)?,
                    }
                };
                traffic.push(pattern);
            }
            out.push(Scenario {
                config: cfg.clone(),
                traffic,
                horizon: horizon.clone(),
            });
        }
    }
    Ok(out)
}

fn randomized(cfg: &PortConfig, horizon: &Rational, budget: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            let trial = rng.next_u64();
            Scenario {
                config: cfg.clone(),
                traffic: cfg
                    .queues
                    .iter()
                    .enumerate()
                    .map(|(k, q)| TrafficPattern::SeededRandomConforming {
                        flow: q.flow.clone(),
                        seed: trial.wrapping_add(k as u64),
                    })
                    .collect(),
                horizon: horizon.clone(),
            }
        })
        .collect()
}

/// Horizon long enough for every bucket to empty several times over.
fn default_horizon(cfg: &PortConfig) -> Rational {
    let sigma: Rational = cfg.queues.iter().map(|q| &q.flow.sigma).sum();
    Rational::int(4) * (sigma + cfg.l_max_all()) / &cfg.link_rate
}

/// Largest delay seen by queue `priority` over structured worst-case
/// candidates and `budget` seeded random conforming scenarios.
///
/// Scenarios run in parallel; the result is the first scenario, in candidate
/// order, attaining the maximum.
pub fn adversarial_max_delay(
    cfg: &PortConfig,
    priority: usize,
    budget: usize,
    seed: u64,
) -> Result<AdversarialOutcome> {
    cfg.queue(priority)?;
    let horizon = default_horizon(cfg);
    let mut scenarios = structured(cfg, priority, &horizon)?;
    scenarios.extend(randomized(cfg, &horizon, budget, seed));
    let delays = scenarios
        .par_iter()
        .map(|s| {
            let res = s.run()?;
            Ok(res.queue(priority).max_delay())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, Rational, usize)> = None;
    for (i, found) in delays.into_iter().enumerate() {
        if let Some((d, packet)) = found {
            if best.as_ref().is_none_or(|(_, b, _)| d > *b) {
                best = Some((i, d, packet));
            }
        }
    }
    let scenarios_run = scenarios.len();
    let (index, max_delay, packet) = best.unwrap_or((0, Rational::zero(), 0));
    Ok(AdversarialOutcome {
        max_delay,
        packet,
        witness: scenarios.swap_remove(index),
        scenarios_run,
    })
}
