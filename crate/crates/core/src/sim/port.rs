use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conformance::{delay_stats, DelayStats, Packet, PacketTrace};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tsn::{PortConfig, Selection};

/// Credit changes linearly over `[start, end)` from `start_value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreditSegment {
    pub start: Rational,
    pub end: Rational,
    pub slope: Rational,
    pub start_value: Rational,
}

impl CreditSegment {
    pub fn end_value(&self) -> Rational {
        &self.start_value + &self.slope * (&self.end - &self.start)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreditTrajectory {
    pub segments: Vec<CreditSegment>,
    /// Instants where positive credit was set to 0.
    pub resets: Vec<Rational>,
}

impl CreditTrajectory {
    /// Credit at `t`, right-continuous; 0 outside the recorded span.
    pub fn value_at(&self, t: &Rational) -> Rational {
        self.segments
            .iter()
            .find(|s| s.start <= *t && *t < s.end)
            .map(|s| &s.start_value + &s.slope * (t - &s.start))
            .unwrap_or_else(Rational::zero)
    }

    /// Total time spent at each slope value in `[from, to)`.
    pub fn time_at_slope(&self, slope: &Rational, from: &Rational, to: &Rational) -> Rational {
        self.segments
            .iter()
            .filter(|s| s.slope == *slope)
            .map(|s| {
                let lo = s.start.clone().max(from.clone());
                let hi = s.end.clone().min(to.clone());
                (hi - lo).max(Rational::zero())
            })
            .sum()
    }

    /// CSV with header `start,end,slope,startValue`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("start,end,slope,startValue\n");
        for s in &self.segments {
            let _ = writeln!(out, "{},{},{},{}", s.start, s.end, s.slope, s.start_value);
        }
        out
    }
}

/// What happened to one queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueueRun {
    pub priority: usize,
    pub input: PacketTrace,
    pub output: PacketTrace,
    /// `e(n)`: when packet `n` enters transmission.
    pub transmission_start: Vec<Rational>,
    /// CBS queue only: `e*(n) = d(n) + max(0, −credit(d(n)))/I`, the time the
    /// credit spent on packet `n` would be regained at the idle slope.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub credit_regained: Vec<Rational>,
    /// CBS queue only: credit at `d(n)`, before any reset.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub credit_at_departure: Vec<Rational>,
}

impl QueueRun {
    pub fn delays(&self) -> Vec<Rational> {
        self.input
            .packets()
            .iter()
            .zip(self.output.packets())
            .map(|(a, d)| &d.time - &a.time)
            .collect()
    }

    /// Largest `d(n) − a(n)` and the packet (1-based) attaining it first.
    pub fn max_delay(&self) -> Option<(Rational, usize)> {
        let mut best: Option<(Rational, usize)> = None;
        for (i, d) in self.delays().into_iter().enumerate() {
            if best.as_ref().is_none_or(|(b, _)| d > *b) {
                best = Some((d, i + 1));
            }
        }
        best
    }

    pub fn delay_stats(&self) -> Result<DelayStats> {
        delay_stats(&self.input, &self.output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimResult {
    pub link_rate: Rational,
    pub queues: Vec<QueueRun>,
    /// Present when the port has a CBS queue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credit: Option<CreditTrajectory>,
    /// Maximal intervals of back-to-back transmission.
    pub busy_periods: Vec<(Rational, Rational)>,
}

impl SimResult {
    pub fn queue(&self, priority: usize) -> &QueueRun {
        &self.queues[priority - 1]
    }
}

struct Waiting {
    arrival: Rational,
    length: Rational,
}

struct Transmission {
    queue: usize,
    end: Rational,
}

struct Cbs {
    queue: usize,
    idle_slope: Rational,
    send_slope: Rational,
    frozen_by_higher: bool,
}

impl Cbs {
    fn slope(&self, credit: &Rational, backlog: bool, tx: Option<&Transmission>) -> Rational {
        match tx {
            Some(t) if t.queue == self.queue => self.send_slope.clone(),
            Some(t) if self.frozen_by_higher && t.queue < self.queue => Rational::zero(),
            _ if backlog || credit.is_negative() => self.idle_slope.clone(),
            _ => Rational::zero(),
        }
    }
}

/// Non-preemptive priority scheduling of `arrivals[k]` into queue `k + 1`,
/// with CBS credit gating for the CBS queue.
///
/// At equal times events are applied as: departure, credit reset, arrivals in
/// trace order, selection of the next transmission.
pub fn simulate_port(cfg: &PortConfig, arrivals: &[PacketTrace]) -> Result<SimResult> {
    let n = cfg.queues.len();
    if arrivals.len() != n {
        return Err(Error::Config(format!(
            "got {} arrival traces for {} queues",
            arrivals.len(),
            n
        )));
    }
    let c = &cfg.link_rate;
    let cbs = cfg.queues.iter().enumerate().find_map(|(k, q)| match &q.selection {
        Selection::Cbs {
            idle_slope,
            frozen_by_higher,
        } => Some(Cbs {
            queue: k,
            idle_slope: idle_slope.clone(),
            send_slope: idle_slope - c,
            frozen_by_higher: *frozen_by_higher,
        }),
        Selection::Sp => None,
    });

    let mut next_arrival = vec![0usize; n];
    let mut waiting: Vec<VecDeque<Waiting>> = (0..n).map(|_| VecDeque::new()).collect();
    let mut departures: Vec<Vec<Packet>> = vec![Vec::new(); n];
    let mut starts: Vec<Vec<Rational>> = vec![Vec::new(); n];
    let mut regained = Vec::new();
    let mut at_departure = Vec::new();
    let mut busy: Vec<(Rational, Rational)> = Vec::new();
    let mut trajectory = CreditTrajectory::default();
    let mut credit = Rational::zero();
    let mut tx: Option<Transmission> = None;
    let mut t = Rational::zero();

    loop {
        if tx.as_ref().is_some_and(|x| x.end == t) {
            let done = tx.take().expect("checked");
            let head = waiting[done.queue].pop_front().expect("transmitting packet is queued");
            departures[done.queue].push(Packet {
                time: t.clone(),
                length: head.length,
            });
            if let Some(cb) = cbs.as_ref().filter(|cb| cb.queue == done.queue) {
                at_departure.push(credit.clone());
                regained.push(&t + (-&credit).max(Rational::zero()) / &cb.idle_slope);
            }
        }
        if let Some(cb) = &cbs {
            let sending = tx.as_ref().is_some_and(|x| x.queue == cb.queue);
            if waiting[cb.queue].is_empty() && !sending && credit.is_positive() {
                credit = Rational::zero();
                trajectory.resets.push(t.clone());
            }
        }
        for (k, trace) in arrivals.iter().enumerate() {
            let packets = trace.packets();
            while next_arrival[k] < packets.len() && packets[next_arrival[k]].time == t {
                let p = &packets[next_arrival[k]];
                waiting[k].push_back(Waiting {
                    arrival: p.time.clone(),
                    length: p.length.clone(),
                });
                next_arrival[k] += 1;
            }
        }
        if tx.is_none() {
            let pick = (0..n).find(|&k| {
                !waiting[k].is_empty()
                    && cbs.as_ref().is_none_or(|cb| cb.queue != k || !credit.is_negative())
            });
            if let Some(k) = pick {
                let head = &waiting[k][0];
                debug_assert!(head.arrival <= t);
                let end = &t + &head.length / c;
                starts[k].push(t.clone());
                match busy.last_mut() {
                    Some(last) if last.1 == t => last.1 = end.clone(),
                    _ => busy.push((t.clone(), end.clone())),
                }
                tx = Some(Transmission { queue: k, end });
            }
        }

        let slope = cbs.as_ref().map(|cb| {
            let sending = tx.as_ref().is_some_and(|x| x.queue == cb.queue);
            let backlog = waiting[cb.queue].len() > usize::from(sending);
            cb.slope(&credit, backlog, tx.as_ref())
        });
        let mut next: Option<Rational> = tx.as_ref().map(|x| x.end.clone());
        let mut consider = |cand: Rational| {
            if next.as_ref().is_none_or(|n| cand < *n) {
                next = Some(cand);
            }
        };
        for (k, trace) in arrivals.iter().enumerate() {
            if let Some(p) = trace.packets().get(next_arrival[k]) {
                consider(p.time.clone());
            }
        }
        if let Some(s) = &slope {
            if credit.is_negative() && s.is_positive() {
                consider(&t + (-&credit) / s);
            }
        }
        let Some(next) = next else { break };
        debug_assert!(next > t);
        if let Some(s) = slope {
            let seg = CreditSegment {
                start: t.clone(),
                end: next.clone(),
                slope: s,
                start_value: credit.clone(),
            };
            credit = seg.end_value();
            match trajectory.segments.last_mut() {
                Some(last)
                    if last.slope == seg.slope
                        && last.end == seg.start
                        && last.end_value() == seg.start_value =>
                {
                    last.end = seg.end
                }
                _ => trajectory.segments.push(seg),
            }
        }
        t = next;
    }

    let queues = (0..n)
        .map(|k| {
            let is_cbs = cbs.as_ref().is_some_and(|cb| cb.queue == k);
            Ok(QueueRun {
                priority: k + 1,
                input: arrivals[k].clone(),
                output: PacketTrace::new(std::mem::take(&mut departures[k]))?,
                transmission_start: std::mem::take(&mut starts[k]),
                credit_regained: if is_cbs { std::mem::take(&mut regained) } else { Vec::new() },
                credit_at_departure: if is_cbs {
                    std::mem::take(&mut at_departure)
                } else {
                    Vec::new()
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        link_rate: c.clone(),
        queues,
        credit: cbs.map(|_| trajectory),
        busy_periods: busy,
    })
}
