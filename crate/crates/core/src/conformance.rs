//! Packet traces and the trace checks for every traffic and server model.
//!
//! A trace is a marked point process: packet `n ≥ 1` has time `a(n)` and
//! length `l(n)`. Packet 0 is virtual, at time 0 with length 0. The cumulative
//! process `A(t)` counts bits of packets with `a(n) < t`, so it is
//! left-continuous; `A(t⁺)` counts `a(n) ≤ t`.
//!
//! Each check returns the first witness of a violation, in the iteration order
//! documented on the function, or `None` when the trace conforms.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::curve::{Curve, Side};
use crate::error::{Error, Result};
use crate::models::GxServer;
use crate::rational::{Extended, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Packet {
    pub time: Rational,
    pub length: Rational,
}

/// Packet arrivals (or departures) in time order, indexed from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Packet>", into = "Vec<Packet>")]
pub struct PacketTrace {
    packets: Vec<Packet>,
}

impl TryFrom<Vec<Packet>> for PacketTrace {
    type Error = Error;
    fn try_from(packets: Vec<Packet>) -> Result<Self> {
        PacketTrace::new(packets)
    }
}

impl From<PacketTrace> for Vec<Packet> {
    fn from(trace: PacketTrace) -> Self {
        trace.packets
    }
}

impl PacketTrace {
    pub fn new(packets: Vec<Packet>) -> Result<Self> {
        for (i, p) in packets.iter().enumerate() {
            if p.time.is_negative() {
                return Err(Error::Trace(format!("packet {} at negative time {}", i + 1, p.time)));
            }
            if !p.length.is_positive() {
                return Err(Error::Trace(format!(
                    "packet {} has nonpositive length {}",
                    i + 1,
                    p.length
                )));
            }
            if i > 0 && packets[i - 1].time > p.time {
                return Err(Error::Trace(format!(
                    "packet {} at {} precedes packet {} at {}",
                    i + 1,
                    p.time,
                    i,
                    packets[i - 1].time
                )));
            }
        }
        Ok(PacketTrace { packets })
    }

    pub fn from_pairs(pairs: Vec<(Rational, Rational)>) -> Result<Self> {
        PacketTrace::new(
            pairs
                .into_iter()
                .map(|(time, length)| Packet { time, length })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        PacketTrace::default()
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    /// `a(n)`; `a(0) = 0`.
    pub fn time(&self, n: usize) -> Rational {
        if n == 0 {
            Rational::zero()
        } else {
            self.packets[n - 1].time.clone()
        }
    }

    /// `l(n)`; `l(0) = 0`.
    pub fn length(&self, n: usize) -> Rational {
        if n == 0 {
            Rational::zero()
        } else {
            self.packets[n - 1].length.clone()
        }
    }

    /// `L(n) = Σ_{m<n} l(m)` for `n = 0..=len`, so `L(m, n)` counts `l(m)`
    /// but not `l(n)`.
    pub fn prefix_lengths(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = Rational::zero();
        out.push(acc.clone());
        for n in 1..=self.len() {
            acc += self.length(n - 1);
            out.push(acc.clone());
        }
        out
    }

    pub fn total_bits(&self) -> Rational {
        self.packets.iter().map(|p| &p.length).sum()
    }

    pub fn max_length(&self) -> Option<Rational> {
        self.packets.iter().map(|p| p.length.clone()).max()
    }

    pub fn min_length(&self) -> Option<Rational> {
        self.packets.iter().map(|p| p.length.clone()).min()
    }

    /// `A(t)`: bits of packets with `a(n) < t`.
    pub fn cumulative(&self, t: &Rational) -> Rational {
        self.packets
            .iter()
            .take_while(|p| &p.time < t)
            .map(|p| &p.length)
            .sum()
    }

    /// `A(t⁺)`: bits of packets with `a(n) ≤ t`.
    pub fn cumulative_through(&self, t: &Rational) -> Rational {
        self.packets
            .iter()
            .take_while(|p| &p.time <= t)
            .map(|p| &p.length)
            .sum()
    }

    /// Distinct event times with the bits arriving at each.
    fn grouped(&self) -> Vec<(Rational, Rational)> {
        let mut out: Vec<(Rational, Rational)> = Vec::new();
        for p in &self.packets {
            match out.last_mut() {
                Some((t, bits)) if *t == p.time => *bits += &p.length,
                _ => out.push((p.time.clone(), p.length.clone())),
            }
        }
        out
    }

    /// Writes `n,time,length` rows (with header) using `p/q` rationals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["n", "time", "length"]).map_err(io)?;
        for (i, p) in self.packets.iter().enumerate() {
            w.write_record([(i + 1).to_string(), p.time.to_string(), p.length.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads `n,time,length` rows; a header row is optional. Packet indices
    /// must run 1, 2, 3, … in order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let mut packets = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if row == 0 && record.get(0) == Some("n") {
                continue;
            }
            if record.len() != 3 {
                return Err(Error::Parse(format!(
                    "trace row {}: expected 3 fields, got {}",
                    row + 1,
                    record.len()
                )));
            }
            let n: usize = record[0]
                .parse()
                .map_err(|_| Error::Parse(format!("trace row {}: bad index {:?}", row + 1, &record[0])))?;
            if n != packets.len() + 1 {
                return Err(Error::Parse(format!(
                    "trace row {}: expected packet {}, got {}",
                    row + 1,
                    packets.len() + 1,
                    n
                )));
            }
            packets.push(Packet {
                time: record[1].parse()?,
                length: record[2].parse()?,
            });
        }
        PacketTrace::new(packets)
    }
}

/// A witness that a trace breaks a model. `lhs > rhs` strictly, except for
/// exactness failures where `lhs ≠ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub definition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub lhs: Extended,
    pub rhs: Extended,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated", self.definition)?;
        let mut at = Vec::new();
        if let Some(s) = &self.s {
            at.push(format!("s={s}"));
        }
        if let Some(t) = &self.t {
            at.push(format!("t={t}"));
        }
        if let Some(m) = &self.m {
            at.push(format!("m={m}"));
        }
        if let Some(n) = &self.n {
            at.push(format!("n={n}"));
        }
        if !at.is_empty() {
            write!(f, " at {}", at.join(", "))?;
        }
        write!(f, ": {} vs {}", self.lhs, self.rhs)
    }
}

pub const ARRIVAL_CURVE: &str = "arrival curve";
pub const SERVICE_CURVE: &str = "service curve";
pub const G_REGULAR: &str = "g-regular";
pub const G_SERVER: &str = "g-server";
pub const GX_SERVER: &str = "g^x-server";
pub const GX_SERVER_EXACT: &str = "exact g^x-server";

/// Checks `A(s, t) ≤ α(t − s)` for all `0 ≤ s ≤ t`.
///
/// The left side only changes at arrival times, so it suffices to compare the
/// bits arriving in `[τ_p, τ_q]` with `α((τ_q − τ_p)⁺)` for every pair of
/// distinct arrival times. Pairs are scanned by `p`, then `q`. The witness
/// `t` lies just after `τ_q`, inside the piece of `α` starting there.
pub fn check_arrival_curve(trace: &PacketTrace, alpha: &Curve) -> Option<Violation> {
    let groups = trace.grouped();
    for p in 0..groups.len() {
        let mut bits = Rational::zero();
        for q in p..groups.len() {
            bits += &groups[q].1;
            let d = &groups[q].0 - &groups[p].0;
            let bound = alpha.eval(&d, Side::Right).expect("d >= 0");
            let Extended::Finite(bound) = bound else {
                continue;
            };
            if bits <= bound {
                continue;
            }
            // α(d + δ) < bits for δ small enough; stay before the next arrival.
            let mut room: Option<Rational> = groups.get(q + 1).map(|g| &g.0 - &groups[q].0);
            let mut tighten = |v: Rational| {
                room = Some(match room.take() {
                    Some(r) => r.min(v),
                    None => v,
                })
            };
            if let Some(next) = alpha.next_breakpoint_after(&d) {
                tighten(next - &d);
            }
            if let Some(slope) = alpha.slope_right_of(&d).filter(|s| s.is_positive()) {
                tighten((&bits - &bound) / slope);
            }
            let delta = room.map_or_else(Rational::one, |r| r / Rational::int(2));
            let t = &groups[q].0 + &delta;
            let window = &t - &groups[p].0;
            return Some(Violation {
                definition: ARRIVAL_CURVE.into(),
                s: Some(groups[p].0.clone()),
                t: Some(t),
                m: None,
                n: None,
                lhs: Extended::Finite(bits),
                rhs: alpha.at(&window),
            });
        }
    }
    None
}

fn check_matched(input: &PacketTrace, output: &PacketTrace) -> Result<()> {
    if input.len() != output.len() {
        return Err(Error::Trace(format!(
            "input has {} packets, output has {}",
            input.len(),
            output.len()
        )));
    }
    for (n, (a, d)) in input.packets().iter().zip(output.packets()).enumerate() {
        if a.length != d.length {
            return Err(Error::Trace(format!(
                "packet {}: input length {} differs from output length {}",
                n + 1,
                a.length,
                d.length
            )));
        }
        if d.time < a.time {
            return Err(Error::Trace(format!(
                "packet {} departs at {} before arriving at {}",
                n + 1,
                d.time,
                a.time
            )));
        }
    }
    Ok(())
}

/// `inf_{0≤s≤t} {A(s) + β(t − s)}`.
///
/// On `(τ_k, τ_{k+1}]` the cumulative input is constant, so the infimum over
/// that interval is at its right end (clipped to `t`).
fn service_lower_bound(groups: &[(Rational, Rational)], beta: &Curve, t: &Rational) -> Extended {
    let first = groups.first().map_or_else(|| t.clone(), |g| g.0.clone().min(t.clone()));
    let mut best = beta.at(&(t - &first));
    let mut bits = Rational::zero();
    for (k, (time, arrived)) in groups.iter().enumerate() {
        if time >= t {
            break;
        }
        bits += arrived;
        let s = groups
            .get(k + 1)
            .map_or_else(|| t.clone(), |g| g.0.clone().min(t.clone()));
        best = best.min(beta.at(&(t - &s)).plus(&bits));
    }
    best
}

/// Checks `A*(t) ≥ inf_{0≤s≤t} {A(s) + β(t − s)}` for all `t ≥ 0`.
///
/// `A*` is constant on `(d_k, d_{k+1}]` and the right side is nondecreasing,
/// so each such interval is decided at its right end. The reported `t` is
/// moved towards the middle of the interval when the inequality already fails
/// there, which gives the more readable witness.
pub fn check_service_curve(
    input: &PacketTrace,
    output: &PacketTrace,
    beta: &Curve,
) -> Result<Option<Violation>> {
    check_matched(input, output)?;
    let groups = input.grouped();
    let departures = output.grouped();
    let horizon = input
        .packets()
        .iter()
        .chain(output.packets())
        .map(|p| p.time.clone())
        .max()
        .unwrap_or_else(Rational::zero)
        + Rational::one();

    let violation_at = |t: &Rational, served: &Rational| -> Option<Violation> {
        let need = service_lower_bound(&groups, beta, t);
        (need > Extended::Finite(served.clone())).then(|| Violation {
            definition: SERVICE_CURVE.into(),
            s: None,
            t: Some(t.clone()),
            m: None,
            n: None,
            lhs: need,
            rhs: Extended::Finite(served.clone()),
        })
    };

    if let Some(v) = violation_at(&Rational::zero(), &Rational::zero()) {
        return Ok(Some(v));
    }
    let mut prev = Rational::zero();
    let mut served = Rational::zero();
    let ends = departures
        .iter()
        .map(|(t, bits)| (t.clone(), bits.clone()))
        .chain(std::iter::once((horizon, Rational::zero())));
    for (end, bits) in ends {
        if end > prev {
            if let Some(found) = violation_at(&end, &served) {
                let mut probe = prev.mid(&end);
                for _ in 0..64 {
                    if let Some(v) = violation_at(&probe, &served) {
                        return Ok(Some(v));
                    }
                    probe = probe.mid(&end);
                }
                return Ok(Some(found));
            }
        }
        served += &bits;
        prev = end;
    }
    Ok(None)
}

/// Checks `a(n) − a(m) ≥ g(L(m, n))` for all `0 ≤ m ≤ n`, scanning `m` then `n`.
pub fn check_g_regular(trace: &PacketTrace, g: &Curve) -> Option<Violation> {
    let prefix = trace.prefix_lengths();
    let count = trace.len();
    for m in 0..=count {
        let am = trace.time(m);
        for n in m..=count {
            let required = g.at(&(&prefix[n] - &prefix[m]));
            let gap = trace.time(n) - &am;
            if required > Extended::Finite(gap.clone()) {
                return Some(Violation {
                    definition: G_REGULAR.into(),
                    s: None,
                    t: None,
                    m: Some(m),
                    n: Some(n),
                    lhs: required,
                    rhs: Extended::Finite(gap),
                });
            }
        }
    }
    None
}

/// `max_{0≤m≤n} {a(m) + g(L(m, n))} + offset` for each `n ≥ 1`, and the
/// maximizing `m`.
fn max_plus_bounds(input: &PacketTrace, g: &Curve, offset: &Rational) -> Vec<Extended> {
    let prefix = input.prefix_lengths();
    (1..=input.len())
        .map(|n| {
            (0..=n)
                .map(|m| g.at(&(&prefix[n] - &prefix[m])).plus(&(input.time(m) + offset)))
                .max()
                .expect("m = 0 always present")
        })
        .collect()
}

/// Checks `d(n) ≤ max_{0≤m≤n} {a(m) + g(L(m, n))}` for every `n`.
pub fn check_g_server(
    input: &PacketTrace,
    output: &PacketTrace,
    g: &Curve,
) -> Result<Option<Violation>> {
    check_matched(input, output)?;
    let bounds = max_plus_bounds(input, g, &Rational::zero());
    Ok(bounds.into_iter().enumerate().find_map(|(i, bound)| {
        let d = Extended::Finite(output.time(i + 1));
        (d > bound).then(|| Violation {
            definition: G_SERVER.into(),
            s: None,
            t: None,
            m: None,
            n: Some(i + 1),
            lhs: d,
            rhs: bound,
        })
    }))
}

/// Checks `d(n) ≤ max_{0≤m≤n} {a(m) + g(L(m, n))} + x(l(n))` for every `n`,
/// with equality required when the model is exact.
pub fn check_gx_server(
    input: &PacketTrace,
    output: &PacketTrace,
    model: &GxServer,
) -> Result<Option<Violation>> {
    check_matched(input, output)?;
    let bounds = max_plus_bounds(input, &model.g, &model.g_offset);
    Ok(bounds.into_iter().enumerate().find_map(|(i, bound)| {
        let n = i + 1;
        let bound = match (bound, model.x.at(&input.length(n))) {
            (Extended::Finite(b), Extended::Finite(x)) => Extended::Finite(b + x),
            _ => Extended::Infinite,
        };
        let d = Extended::Finite(output.time(n));
        let (broken, name) = if model.exact {
            (d != bound, GX_SERVER_EXACT)
        } else {
            (d > bound, GX_SERVER)
        };
        broken.then(|| Violation {
            definition: name.into(),
            s: None,
            t: None,
            m: None,
            n: Some(n),
            lhs: d,
            rhs: bound,
        })
    }))
}

/// Packet delays and the supremum of the virtual delay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DelayStats {
    pub per_packet: Vec<Rational>,
    pub max_packet_delay: Rational,
    pub virtual_delay_sup: Extended,
}

/// `D(n) = d(n) − a(n)`, their maximum, and
/// `sup_t inf {τ ≥ 0 : A(t) ≤ A*(t + τ)}`.
///
/// Between arrivals `A` is constant and the virtual delay decreases, so the
/// supremum is approached right after an arrival instant `a(n)⁺`. There the
/// delay is the first time the cumulative departures reach `A(a(n)⁺)`, minus
/// `a(n)`.
pub fn delay_stats(input: &PacketTrace, output: &PacketTrace) -> Result<DelayStats> {
    check_matched(input, output)?;
    let per_packet: Vec<Rational> = input
        .packets()
        .iter()
        .zip(output.packets())
        .map(|(a, d)| &d.time - &a.time)
        .collect();
    let max_packet_delay = per_packet.iter().max().cloned().unwrap_or_else(Rational::zero);

    let departures = output.grouped();
    let mut departed = Vec::with_capacity(departures.len());
    let mut acc = Rational::zero();
    for (t, bits) in &departures {
        acc += bits;
        departed.push((t.clone(), acc.clone()));
    }
    let mut virtual_delay_sup = Extended::zero();
    let mut arrived = Rational::zero();
    for (t, bits) in input.grouped() {
        arrived += bits;
        let reached = departed.iter().find(|(_, total)| *total >= arrived);
        let delay = match reached {
            Some((when, _)) => Extended::Finite((when - &t).max(Rational::zero())),
            None => Extended::Infinite,
        };
        virtual_delay_sup = virtual_delay_sup.max(delay);
    }
    Ok(DelayStats {
        per_packet,
        max_packet_delay,
        virtual_delay_sup,
    })
}
