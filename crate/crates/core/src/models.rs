//! Traffic and server models of both calculus branches and the mappings
//! between them.
//!
//! Min-plus models bound cumulative processes in time (`α`, `β`); max-plus
//! models bound packet times as a function of bits (`g`). Curves of the latter
//! take a data amount (bits) and return a time (seconds).

use serde::{Deserialize, Serialize};

use crate::conformance::PacketTrace;
use crate::curve::{
    lower_pseudo_inverse, make_token_bucket, shift_compose, upper_pseudo_inverse, Curve, Side,
};
use crate::error::{Error, Result};
use crate::rational::{Extended, Rational};

/// Token-bucket constraint of one queue's traffic plus its packet-length range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowSpec {
    pub sigma: Rational,
    pub rho: Rational,
    pub l_min: Rational,
    pub l_max: Rational,
}

impl FlowSpec {
    pub fn new(sigma: Rational, rho: Rational, l_min: Rational, l_max: Rational) -> Result<Self> {
        let flow = FlowSpec {
            sigma,
            rho,
            l_min,
            l_max,
        };
        flow.validate()?;
        Ok(flow)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.l_min.is_positive() {
            return Err(Error::param("lMin", format!("must be > 0, got {}", self.l_min)));
        }
        if self.l_max < self.l_min {
            return Err(Error::param(
                "lMax",
                format!("must be >= lMin ({}), got {}", self.l_min, self.l_max),
            ));
        }
        if self.sigma < self.l_max {
            return Err(Error::param(
                "sigma",
                format!("must be >= lMax ({}), got {}", self.l_max, self.sigma),
            ));
        }
        if self.rho.is_negative() {
            return Err(Error::param("rho", format!("must be >= 0, got {}", self.rho)));
        }
        Ok(())
    }

    /// `α(t) = ρt + σ` for `t > 0`, `α(0) = 0`.
    pub fn arrival_curve(&self) -> Curve {
        make_token_bucket(&self.sigma, &self.rho).expect("validated flow")
    }
}

/// A g^x-server: `d(n) ≤ max_{0≤m≤n} {a(m) + g(L(m, n))} + x(l(n))`,
/// with equality when `exact`.
///
/// The effective `g` is `g + g_offset`. The offset is negative only when an
/// affine `g` dips below zero near the origin. Clipping such a `g` at zero
/// gives a curve in the usual function class, but the delay bound and the
/// precondition `x(w) ≤ g(v + w) − g(v)` hold for the unclipped form, so the
/// model keeps it. [`GxServer::clipped_g`] returns `(g + g_offset)⁺`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GxServer {
    pub g: Curve,
    #[serde(default = "Rational::zero", skip_serializing_if = "Rational::is_zero")]
    pub g_offset: Rational,
    pub x: Curve,
    pub exact: bool,
}

impl GxServer {
    pub fn new(g: Curve, x: Curve, exact: bool) -> Self {
        GxServer {
            g,
            g_offset: Rational::zero(),
            x,
            exact,
        }
    }

    /// `g(v) = v/rate + offset` (offset of any sign) and `x(v) = v/x_rate`.
    pub fn affine(rate: &Rational, offset: &Rational, x_rate: &Rational, exact: bool) -> Result<Self> {
        let x = Curve::rate_offset(x_rate, Rational::zero())?;
        let g = Curve::rate_offset(rate, Rational::zero())?;
        Ok(GxServer {
            g,
            g_offset: Rational::zero(),
            x,
            exact,
        }
        .shifted(offset))
    }

    /// Adds a constant to `g`, folding nonnegative offsets into the curve.
    pub fn shifted(mut self, delta: &Rational) -> Self {
        let total = &self.g_offset + delta;
        let floor = self.g.value_at_zero().into_finite().unwrap_or_else(Rational::zero);
        if (&floor + &total).is_negative() {
            // Keep the curve anchored at zero so the offset is the value at 0.
            self.g = self.g.plus_constant(&-&floor).expect("floor is the minimum");
            self.g_offset = floor + total;
        } else {
            self.g = self.g.plus_constant(&total).expect("stays nonnegative");
            self.g_offset = Rational::zero();
        }
        self
    }

    /// `g(v) + g_offset`.
    pub fn g_at(&self, v: &Rational) -> Extended {
        self.g.at(v).plus(&self.g_offset)
    }

    /// `(g + g_offset)⁺`.
    pub fn clipped_g(&self) -> Curve {
        shift_compose(&self.g, &Rational::zero(), &self.g_offset).expect("zero shift")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ServerModel {
    ServiceCurve { beta: Curve },
    GServer { g: Curve },
    GxServer(GxServer),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum TrafficModel {
    ArrivalCurve { alpha: Curve },
    GRegular { g: Curve },
}

/// `v ↦ α↓(v + l_min)`: the g-regularity implied by an arrival curve.
pub fn arrival_to_g_regular(alpha: &Curve, l_min: &Rational) -> Result<Curve> {
    if l_min.is_negative() {
        return Err(Error::param("lMin", format!("must be >= 0, got {l_min}")));
    }
    shift_compose(&lower_pseudo_inverse(alpha), l_min, &Rational::zero())
}

/// `t ↦ g↑(t) + l_max` with the value at 0 forced to 0.
pub fn g_regular_to_arrival(g: &Curve, l_max: &Rational) -> Result<Curve> {
    if l_max.is_negative() {
        return Err(Error::param("lMax", format!("must be >= 0, got {l_max}")));
    }
    Ok(upper_pseudo_inverse(g).plus_constant(l_max)?.with_zero_at_origin())
}

/// `β↑`: the max-plus server implied by a service curve.
pub fn service_to_g_server(beta: &Curve) -> Curve {
    upper_pseudo_inverse(beta)
}

/// `g↓`: the service curve implied by a g-server.
pub fn g_server_to_service(g: &Curve) -> Curve {
    lower_pseudo_inverse(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelaxDirection {
    /// Fold the packet term into `g`: `g1 = g + x(l_max)`.
    ToG,
    /// Pull the packet term out of `g`: `g2 = (g − x(l_min))⁺`.
    FromG,
}

/// Moves between a g^x-server and an equivalent (or weaker) model.
pub fn gx_relax(
    model: &GxServer,
    l_min: &Rational,
    l_max: &Rational,
    direction: RelaxDirection,
) -> Result<ServerModel> {
    match direction {
        RelaxDirection::ToG => {
            let shift = model.x.at(l_max).into_finite().ok_or_else(|| {
                Error::Model(format!("x({l_max}) is infinite; cannot fold into g"))
            })?;
            // Clipping at zero only loosens a g-server, so it stays sound.
            Ok(ServerModel::GServer {
                g: model.clone().shifted(&shift).clipped_g(),
            })
        }
        RelaxDirection::FromG => {
            let shift = model.x.at(l_min).into_finite().ok_or_else(|| {
                Error::Model(format!("x({l_min}) is infinite; cannot subtract from g"))
            })?;
            Ok(ServerModel::GxServer(GxServer {
                exact: false,
                ..model.clone().shifted(&-shift)
            }))
        }
    }
}

/// Guaranteed-rate server: `g(v) = v/R + E`, `x(v) = v/R`.
pub fn gr_server(rate: &Rational, latency: &Rational) -> Result<GxServer> {
    if !rate.is_positive() {
        return Err(Error::param("R", format!("must be > 0, got {rate}")));
    }
    if latency.is_negative() {
        return Err(Error::param("E", format!("must be >= 0, got {latency}")));
    }
    GxServer::affine(rate, latency, rate, false)
}

/// Guaranteed-rate clock `GRC(n) = max{a(n), GRC(n−1)} + l(n)/R`, `GRC(0) = 0`.
pub fn grc_clock(trace: &PacketTrace, rate: &Rational) -> Result<Vec<Rational>> {
    if !rate.is_positive() {
        return Err(Error::param("R", format!("must be > 0, got {rate}")));
    }
    let mut clock = Rational::zero();
    Ok(trace
        .packets()
        .iter()
        .map(|p| {
            clock = clock.clone().max(p.time.clone()) + &p.length / rate;
            clock.clone()
        })
        .collect())
}

/// A point `(v, w)` where `x(w) > g(v + w) − g(v)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GxWitness {
    pub v: Rational,
    pub w: Rational,
    /// `x(w)`.
    pub lhs: Extended,
    /// `g(v + w) − g(v)`.
    pub rhs: Rational,
}

/// Sector and line directions around a vertex of the arrangement of lines
/// `v = b`, `w = b`, `v + w = b`.
const DIRECTIONS: [(i64, i64); 13] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (0, -1),
    (1, -1),
    (1, 1),
    (-1, 2),
    (-2, 1),
    (-1, -1),
    (1, -2),
    (2, -1),
];

fn side_of(sign: i64) -> Side {
    match sign.signum() {
        1 => Side::Right,
        -1 => Side::Left,
        _ => Side::Point,
    }
}

/// Whether `x(w) > g(v+w) − g(v)` at a point, or in the limit along a
/// direction. Vacuous where `g(v)` is infinite.
fn violated_towards(g: &Curve, x: &Curve, v: &Rational, w: &Rational, dir: (i64, i64)) -> bool {
    let eval = |c: &Curve, at: &Rational, sign: i64| c.eval(at, side_of(sign)).ok();
    let (Some(gv), Some(gvw), Some(xw)) = (
        eval(g, v, dir.0),
        eval(g, &(v + w), dir.0 + dir.1),
        eval(x, w, dir.1),
    ) else {
        return false;
    };
    match (gv, gvw, xw) {
        (Extended::Infinite, _, _) | (_, Extended::Infinite, _) => false,
        (_, _, Extended::Infinite) => true,
        (Extended::Finite(a), Extended::Finite(b), Extended::Finite(c)) => c > b - a,
    }
}

fn witness_at(g: &Curve, x: &Curve, v: &Rational, w: &Rational) -> Option<GxWitness> {
    let lhs = x.at(w);
    let gv = g.at(v).into_finite()?;
    let gvw = g.at(&(v + w)).into_finite()?;
    let rhs = gvw - gv;
    if lhs > Extended::Finite(rhs.clone()) {
        Some(GxWitness {
            v: v.clone(),
            w: w.clone(),
            lhs,
            rhs,
        })
    } else {
        None
    }
}

/// Checks `x(w) ≤ g(v + w) − g(v)` for all `v ∈ [0, v_max]`, `w ∈ [0, w_max]`.
///
/// Both sides are piecewise linear on the cells of the arrangement formed by
/// the breakpoints of `g` (as vertical and anti-diagonal lines) and of `x` (as
/// horizontal lines). The check visits every vertex of that arrangement and
/// every limit into an adjacent cell or edge, which decides the inequality on
/// the whole box. On failure an exact violating point is returned, ordered by
/// `(v, w)` of the vertex it was found next to.
pub fn check_gx_precondition(
    g: &Curve,
    x: &Curve,
    v_max: &Rational,
    w_max: &Rational,
) -> std::result::Result<(), GxWitness> {
    let zero = Rational::zero();
    let g_bps = g.breakpoints();
    let mut vs: Vec<Rational> = vec![zero.clone(), v_max.clone()];
    vs.extend(g_bps.iter().filter(|b| *b <= v_max).cloned());
    let mut ws: Vec<Rational> = vec![zero.clone(), w_max.clone()];
    ws.extend(x.breakpoints().into_iter().filter(|b| b <= w_max));
    let diag: Vec<Rational> = g_bps
        .iter()
        .filter(|b| **b <= v_max + w_max)
        .cloned()
        .collect();

    let in_box = |v: &Rational, w: &Rational| {
        !v.is_negative() && !w.is_negative() && v <= v_max && w <= w_max
    };
    let mut vertices = std::collections::BTreeSet::new();
    for v in &vs {
        for w in &ws {
            vertices.insert((v.clone(), w.clone()));
        }
        for d in &diag {
            let w = d - v;
            if in_box(v, &w) {
                vertices.insert((v.clone(), w));
            }
        }
    }
    for w in &ws {
        for d in &diag {
            let v = d - w;
            if in_box(&v, w) {
                vertices.insert((v, w.clone()));
            }
        }
    }

    for (v, w) in &vertices {
        for dir in DIRECTIONS {
            let leaves_box = (dir.0 < 0 && v.is_zero())
                || (dir.0 > 0 && v == v_max)
                || (dir.1 < 0 && w.is_zero())
                || (dir.1 > 0 && w == w_max);
            if leaves_box {
                continue;
            }
            if !violated_towards(g, x, v, w, dir) {
                continue;
            }
            // The limit is negative, so points close enough along `dir` are
            // violations themselves.
            let (dv, dw) = (Rational::int(dir.0), Rational::int(dir.1));
            let mut eps = Rational::one();
            for _ in 0..256 {
                let pv = v + &dv * &eps;
                let pw = w + &dw * &eps;
                if in_box(&pv, &pw) {
                    if let Some(wit) = witness_at(g, x, &pv, &pw) {
                        return Err(wit);
                    }
                }
                eps = &eps / Rational::int(2);
            }
        }
    }
    Ok(())
}

/// [`check_gx_precondition`] over a range large enough to decide the
/// inequality for all `v, w ≥ 0`, plus the comparison of terminal slopes.
pub fn verify_gx_precondition(g: &Curve, x: &Curve) -> std::result::Result<(), GxWitness> {
    let last = |c: &Curve| c.breakpoints().last().cloned().unwrap_or_else(Rational::zero);
    let v0 = last(g);
    let w0 = last(x);
    let v_max = &v0 + Rational::one();
    let w_max = v0.clone().max(w0) + Rational::one();
    check_gx_precondition(g, x, &v_max, &w_max)?;
    if g.is_finite() && x.is_finite() && x.terminal_slope() > g.terminal_slope() {
        // Far enough out the slack decreases linearly; walk until it is negative.
        let mut w = w_max.clone();
        for _ in 0..256 {
            if let Some(wit) = witness_at(g, x, &v_max, &w) {
                return Err(wit);
            }
            w = &w * Rational::int(2);
        }
    }
    Ok(())
}
