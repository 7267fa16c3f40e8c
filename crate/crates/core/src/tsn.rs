//! Service models and delay bounds for queues of a TSN egress port: strict
//! priority, a credit-based shaper alone or at the top priority, and a CBS
//! below SP traffic whose credit is frozen while higher priorities transmit.
//!
//! Symbols follow the usual per-queue aggregates: for the queue at priority
//! `i`, `ρ_u` and `σ_u` sum the token-bucket parameters of queues `1..i`,
//! `l^{M_l}` is the largest packet of strictly lower priority queues, and
//! `l^{m_i}`, `l^{M_i}` bound the queue's own packet lengths.

use serde::{Deserialize, Serialize};

use crate::bounds::bound_integrated;
use crate::curve::{make_latency_rate, Curve};
use crate::error::{Error, Result};
use crate::models::{gx_relax, FlowSpec, GxServer, RelaxDirection, ServerModel};
use crate::rational::{Extended, Rational};

/// Transmission selection of one queue.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Selection {
    Sp,
    Cbs {
        #[serde(rename = "idleSlope")]
        idle_slope: Rational,
        /// Credit is held constant while a higher-priority queue transmits.
        #[serde(rename = "frozenByHigher", default)]
        frozen_by_higher: bool,
    },
}

impl Selection {
    pub fn is_cbs(&self) -> bool {
        matches!(self, Selection::Cbs { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueueConfig {
    /// 1 is the highest priority.
    pub priority: u32,
    pub selection: Selection,
    pub flow: FlowSpec,
}

/// A link of rate `c` shared by priority-ordered queues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "RawPortConfig")]
pub struct PortConfig {
    pub link_rate: Rational,
    /// Sorted by priority, so `queues[k]` has priority `k + 1`.
    pub queues: Vec<QueueConfig>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawPortConfig {
    link_rate: Rational,
    queues: Vec<QueueConfig>,
}

impl TryFrom<RawPortConfig> for PortConfig {
    type Error = Error;
    fn try_from(raw: RawPortConfig) -> Result<Self> {
        PortConfig::new(raw.link_rate, raw.queues)
    }
}

impl PortConfig {
    pub fn new(link_rate: Rational, mut queues: Vec<QueueConfig>) -> Result<Self> {
        if !link_rate.is_positive() {
            return Err(Error::Config(format!("linkRate must be > 0, got {link_rate}")));
        }
        if queues.is_empty() {
            return Err(Error::Config("queues must not be empty".into()));
        }
        queues.sort_by_key(|q| q.priority);
        for (k, q) in queues.iter().enumerate() {
            let expected = k as u32 + 1;
            if q.priority != expected {
                return Err(Error::Config(format!(
                    "queues[].priority must be unique and contiguous from 1; expected {expected}, found {}",
                    q.priority
                )));
            }
            q.flow.validate().map_err(|e| {
                Error::Config(format!("queue {}: flow: {e}", q.priority))
            })?;
            if let Selection::Cbs { idle_slope, .. } = &q.selection {
                if !idle_slope.is_positive() || *idle_slope >= link_rate {
                    return Err(Error::Config(format!(
                        "queue {}: idleSlope must satisfy 0 < idleSlope < linkRate ({link_rate}), got {idle_slope}",
                        q.priority
                    )));
                }
            }
        }
        if queues.iter().filter(|q| q.selection.is_cbs()).count() > 1 {
            return Err(Error::Config("at most one queue may use CBS".into()));
        }
        Ok(PortConfig { link_rate, queues })
    }

    /// Queue with the given priority (1-based).
    pub fn queue(&self, priority: usize) -> Result<&QueueConfig> {
        if priority == 0 || priority > self.queues.len() {
            return Err(Error::Config(format!(
                "no queue with priority {priority} (port has {})",
                self.queues.len()
            )));
        }
        Ok(&self.queues[priority - 1])
    }

    /// Priority of the CBS queue, if any.
    pub fn cbs_priority(&self) -> Option<usize> {
        self.queues.iter().position(|q| q.selection.is_cbs()).map(|k| k + 1)
    }

    pub fn context(&self, priority: usize) -> Result<QueueContext> {
        let me = self.queue(priority)?;
        let higher = &self.queues[..priority - 1];
        let lower = &self.queues[priority..];
        Ok(QueueContext {
            rho_u: higher.iter().map(|q| &q.flow.rho).sum(),
            sigma_u: higher.iter().map(|q| &q.flow.sigma).sum(),
            l_max_lower: lower
                .iter()
                .map(|q| q.flow.l_max.clone())
                .max()
                .unwrap_or_else(Rational::zero),
            l_min_self: me.flow.l_min.clone(),
            l_max_self: me.flow.l_max.clone(),
            l_min_upper: higher
                .iter()
                .map(|q| q.flow.l_min.clone())
                .min()
                .unwrap_or_else(Rational::zero),
        })
    }

    /// Largest packet length over all queues.
    pub fn l_max_all(&self) -> Rational {
        self.queues
            .iter()
            .map(|q| q.flow.l_max.clone())
            .max()
            .expect("nonempty")
    }
}

/// Aggregates over the other queues, seen from one queue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueueContext {
    pub rho_u: Rational,
    pub sigma_u: Rational,
    pub l_max_lower: Rational,
    pub l_min_self: Rational,
    pub l_max_self: Rational,
    /// Smallest higher-priority packet length; 0 without higher queues.
    pub l_min_upper: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Setting {
    StrictPriority,
    CbsStandalone,
    CbsTop,
    CbsFrozen,
}

impl Setting {
    pub fn describe(&self) -> &'static str {
        match self {
            Setting::StrictPriority => "strict priority",
            Setting::CbsStandalone => "standalone CBS",
            Setting::CbsTop => "CBS at the highest priority",
            Setting::CbsFrozen => "CBS below SP with frozen credit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Constants {
    /// Guaranteed long-run rate of the g^x model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<Rational>,
    /// Constant term of the (first) g function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<Rational>,
    /// Constant term of the g function used for the delay bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e2: Option<Rational>,
    /// Credit bound at a departure, evaluated at the smallest own packet.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub credit_max: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzerResult {
    pub setting: Setting,
    /// The last model is the one the delay bound is computed from.
    pub gx_models: Vec<GxServer>,
    pub service_curve: Curve,
    pub delay_bound: Extended,
    pub constants: Constants,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl AnalyzerResult {
    /// Model the delay bound is computed from.
    pub fn bound_model(&self) -> &GxServer {
        self.gx_models.last().expect("at least one model")
    }
}

fn residual_rate(c: &Rational, ctx: &QueueContext) -> Result<Rational> {
    if ctx.rho_u >= *c {
        return Err(Error::Utilization(format!(
            "higher-priority rate {} leaves no capacity on a link of rate {}",
            ctx.rho_u, c
        )));
    }
    Ok(c - &ctx.rho_u)
}

/// Service curve `β = g↓` of the g-server obtained by folding `x(l_max)` into `g`.
fn service_curve_of(model: &GxServer, l_min: &Rational, l_max: &Rational) -> Result<Curve> {
    match gx_relax(model, l_min, l_max, RelaxDirection::ToG)? {
        ServerModel::GServer { g } => Ok(crate::models::g_server_to_service(&g)),
        _ => unreachable!("folding x yields a g-server"),
    }
}

fn ensure_higher_sp(cfg: &PortConfig, priority: usize, what: &str) -> Result<()> {
    if let Some(q) = cfg.queues[..priority - 1].iter().find(|q| q.selection.is_cbs()) {
        return Err(Error::Config(format!(
            "{what}: queue {} above it uses CBS, which this analysis does not cover",
            q.priority
        )));
    }
    Ok(())
}

/// SP queue: `g(v) = v/(c − ρ_u) + E`, `x(v) = v/(c − ρ_u)` with
/// `E = (σ_u + l^{M_l} − l^{m_i})/(c − ρ_u) + l^{m_i}/c`; service curve
/// `(c − ρ_u)(t − T)⁺` with `T = E + l^{M_i}/(c − ρ_u)`.
pub fn analyze_sp(cfg: &PortConfig, priority: usize) -> Result<AnalyzerResult> {
    let queue = cfg.queue(priority)?;
    if queue.selection.is_cbs() {
        return Err(Error::Config(format!("queue {priority} uses CBS, not SP")));
    }
    ensure_higher_sp(cfg, priority, &format!("queue {priority}"))?;
    let c = &cfg.link_rate;
    let ctx = cfg.context(priority)?;
    let res = residual_rate(c, &ctx)?;
    let e = (&ctx.sigma_u + &ctx.l_max_lower - &ctx.l_min_self) / &res + &ctx.l_min_self / c;
    let model = GxServer::affine(&res, &e, &res, false)?;
    let latency = &e + &ctx.l_max_self / &res;
    let service_curve = make_latency_rate(&res, &latency)?;
    debug_assert_eq!(
        service_curve,
        service_curve_of(&model, &ctx.l_min_self, &ctx.l_max_self)?
    );
    let delay_bound = bound_integrated(&queue.flow.arrival_curve(), &model)?;
    Ok(AnalyzerResult {
        setting: Setting::StrictPriority,
        gx_models: vec![model],
        service_curve,
        delay_bound,
        constants: Constants {
            rate: Some(res),
            e: Some(e),
            ..Constants::default()
        },
        notes: Vec::new(),
    })
}

/// CBS alone on a link: exact `g1(v) = v/I`, `x(v) = v/c`; and
/// `g2(v) = v/I + E`, `x(v) = v/I` with `E = (1/c − 1/I) l^m`. Service curve
/// `I(t − l^M/c)⁺`.
pub fn analyze_cbs_standalone(
    c: &Rational,
    idle_slope: &Rational,
    flow: &FlowSpec,
) -> Result<AnalyzerResult> {
    flow.validate()?;
    if !c.is_positive() {
        return Err(Error::param("linkRate", format!("must be > 0, got {c}")));
    }
    if !idle_slope.is_positive() || idle_slope > c {
        return Err(Error::param(
            "idleSlope",
            format!("must satisfy 0 < idleSlope <= {c}, got {idle_slope}"),
        ));
    }
    let e = (c.recip() - idle_slope.recip()) * &flow.l_min;
    let g1 = GxServer::affine(idle_slope, &Rational::zero(), c, true)?;
    let g2 = GxServer::affine(idle_slope, &e, idle_slope, false)?;
    let service_curve = make_latency_rate(idle_slope, &(&flow.l_max / c))?;
    debug_assert_eq!(service_curve, service_curve_of(&g1, &flow.l_min, &flow.l_max)?);
    let delay_bound = bound_integrated(&flow.arrival_curve(), &g2)?;
    Ok(AnalyzerResult {
        setting: Setting::CbsStandalone,
        gx_models: vec![g1, g2],
        service_curve,
        delay_bound,
        constants: Constants {
            rate: Some(idle_slope.clone()),
            e: Some(Rational::zero()),
            e2: Some(e),
            credit_max: None,
        },
        notes: Vec::new(),
    })
}

/// Shared CBS analysis for a queue with only SP traffic above it (possibly
/// none) and credit frozen while that traffic transmits.
fn analyze_cbs_with_context(cfg: &PortConfig, priority: usize, setting: Setting) -> Result<AnalyzerResult> {
    let queue = cfg.queue(priority)?;
    let Selection::Cbs { idle_slope, .. } = &queue.selection else {
        return Err(Error::Config(format!("queue {priority} does not use CBS")));
    };
    let c = &cfg.link_rate;
    let ctx = cfg.context(priority)?;
    if priority == cfg.queues.len() && priority == 1 {
        return analyze_cbs_standalone(c, idle_slope, &queue.flow);
    }
    let res = residual_rate(c, &ctx)?;
    let rate = idle_slope * &res / c;
    let interference = (&ctx.sigma_u + &ctx.l_max_lower) / &res;
    let e2 = &interference - (rate.recip() - c.recip()) * &ctx.l_min_self;
    let g1 = GxServer::affine(&rate, &interference, c, false)?;
    let g2 = GxServer::affine(&rate, &e2, &rate, false)?;
    let service_curve = service_curve_of(&g1, &ctx.l_min_self, &ctx.l_max_self)?;
    let delay_bound = bound_integrated(&queue.flow.arrival_curve(), &g2)?;
    let send_slope = idle_slope - c;
    let credit_max = idle_slope * &ctx.l_max_lower / c + &send_slope * &ctx.l_min_self / c;
    let mut notes = Vec::new();
    if !ctx.l_max_lower.is_zero() {
        notes.push(format!(
            "E2 and the delay bound use the largest lower-priority packet ({} bits)",
            ctx.l_max_lower
        ));
    }
    Ok(AnalyzerResult {
        setting,
        gx_models: vec![g1, g2],
        service_curve,
        delay_bound,
        constants: Constants {
            rate: Some(rate),
            e: Some(interference),
            e2: Some(e2),
            credit_max: Some(credit_max),
        },
        notes,
    })
}

/// CBS queue at priority 1: `g1(v) = v/I + l^{M_l}/c`, `x1(v) = v/c`;
/// `g2(v) = v/I + E2`, `x2(v) = v/I` with `E2 = l^{M_l}/c − (1/I − 1/c) l^{m_1}`.
/// Without lower queues this is the standalone analysis.
pub fn analyze_cbs_top(cfg: &PortConfig) -> Result<AnalyzerResult> {
    let Some(priority) = cfg.cbs_priority() else {
        return Err(Error::Config("port has no CBS queue".into()));
    };
    if priority != 1 {
        return Err(Error::Config(format!(
            "CBS queue has priority {priority}, not the highest"
        )));
    }
    analyze_cbs_with_context(cfg, priority, Setting::CbsTop)
}

/// CBS queue below SP queues with credit frozen during their transmissions:
/// `R = I(c − ρ_u)/c`, `g1(v) = v/R + (σ_u + l^{M_l})/(c − ρ_u)`, `x1(v) = v/c`;
/// `g2(v) = v/R + E2`, `x2(v) = v/R` with
/// `E2 = (σ_u + l^{M_l})/(c − ρ_u) − (1/R − 1/c) l^{m_i}`.
/// With no higher queues this coincides with [`analyze_cbs_top`].
pub fn analyze_cbs_frozen(cfg: &PortConfig) -> Result<AnalyzerResult> {
    let Some(priority) = cfg.cbs_priority() else {
        return Err(Error::Config("port has no CBS queue".into()));
    };
    if priority == 1 {
        return analyze_cbs_top(cfg);
    }
    let Selection::Cbs {
        frozen_by_higher, ..
    } = cfg.queue(priority)?.selection
    else {
        unreachable!()
    };
    if !frozen_by_higher {
        return Err(Error::Config(format!(
            "CBS queue {priority} is below higher-priority traffic without credit freezing; only the frozen variant is analyzed"
        )));
    }
    analyze_cbs_with_context(cfg, priority, Setting::CbsFrozen)
}

/// Analysis of the queue at `priority`, choosing the setting from the config.
pub fn analyze_queue(cfg: &PortConfig, priority: usize) -> Result<AnalyzerResult> {
    match cfg.queue(priority)?.selection {
        Selection::Sp => analyze_sp(cfg, priority),
        Selection::Cbs { .. } if priority == 1 => analyze_cbs_top(cfg),
        Selection::Cbs { .. } => analyze_cbs_frozen(cfg),
    }
}

/// Two earlier SP bounds: one charging a maximum packet at the full link rate,
/// one at the residual rate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LiteratureBounds {
    /// `σ_i/(c − ρ_u) + (σ_u + l^{M_l})/(c − ρ_u) + l^M/c`.
    pub timing_analysis: Extended,
    /// `σ_i/(c − ρ_u) + (σ_u + l^{M_l})/(c − ρ_u) + l^M/(c − ρ_u)`.
    pub fluid_service_curve: Extended,
}

pub fn literature_bounds(cfg: &PortConfig, priority: usize) -> Result<LiteratureBounds> {
    let queue = cfg.queue(priority)?;
    if queue.selection.is_cbs() {
        return Err(Error::Config(format!("queue {priority} uses CBS, not SP")));
    }
    ensure_higher_sp(cfg, priority, &format!("queue {priority}"))?;
    let c = &cfg.link_rate;
    let ctx = cfg.context(priority)?;
    let res = residual_rate(c, &ctx)?;
    if queue.flow.rho > res {
        return Ok(LiteratureBounds {
            timing_analysis: Extended::Infinite,
            fluid_service_curve: Extended::Infinite,
        });
    }
    let l_max = cfg.l_max_all();
    let base = (&queue.flow.sigma + &ctx.sigma_u + &ctx.l_max_lower) / &res;
    Ok(LiteratureBounds {
        timing_analysis: Extended::Finite(&base + &l_max / c),
        fluid_service_curve: Extended::Finite(&base + &l_max / &res),
    })
}
