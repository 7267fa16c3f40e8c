//! Delay bounds from the four analytic routes and the single-link comparison.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{
    horizontal_distance, lower_pseudo_inverse, make_latency_rate, shift_compose,
    upper_pseudo_inverse, vertical_distance, Curve,
};
use crate::error::{Error, Result};
use crate::models::{
    arrival_to_g_regular, gr_server, service_to_g_server, verify_gx_precondition, FlowSpec,
    GxServer,
};
use crate::rational::{Extended, Rational};

/// `H(α, β)`: bound on the virtual delay from an arrival and a service curve.
pub fn bound_min_plus(alpha: &Curve, beta: &Curve) -> Extended {
    horizontal_distance(alpha, beta)
}

/// `sup_v {g2(v) − g1(v)}` for g-regular input into a g-server.
pub fn bound_max_plus(g1: &Curve, g2: &Curve) -> Extended {
    vertical_distance(g1, g2)
}

/// `V(α↓(· + l_min), β↑)`: both min-plus models mapped to max-plus first.
pub fn bound_mapped(alpha: &Curve, beta: &Curve, l_min: &Rational) -> Result<Extended> {
    let g1 = shift_compose(&lower_pseudo_inverse(alpha), l_min, &Rational::zero())?;
    Ok(vertical_distance(&g1, &upper_pseudo_inverse(beta)))
}

/// `V(α↓, g)` for a g^x-server with `x(w) ≤ g(v + w) − g(v)`.
///
/// Refuses with a witness when the inequality on `g` and `x` fails, since the
/// bound is not implied then.
pub fn bound_integrated(alpha: &Curve, model: &GxServer) -> Result<Extended> {
    if let Err(w) = verify_gx_precondition(&model.g, &model.x) {
        return Err(Error::Model(format!(
            "x(w) <= g(v+w) - g(v) fails at v={}, w={}: x(w)={} > {}",
            w.v, w.w, w.lhs, w.rhs
        )));
    }
    let raw = vertical_distance(&lower_pseudo_inverse(alpha), &model.g).plus(&model.g_offset);
    Ok(raw.max(Extended::zero()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UtilizationCheck {
    /// Long-run arrival rate.
    pub rho: Rational,
    /// Long-run service rate it is compared against.
    pub rate: Rational,
    pub satisfied: bool,
}

/// All four bounds for one scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub min_plus: Extended,
    pub max_plus: Extended,
    pub mapped: Extended,
    pub integrated: Extended,
    pub assumptions: UtilizationCheck,
}

impl BoundReport {
    pub const LABELS: [&'static str; 4] = [
        "D^(α,β)",
        "D^((α→)g,g)",
        "D^(α→g,β→g)",
        "D^(α,g^x)",
    ];

    /// Rows in the order of [`BoundReport::LABELS`].
    pub fn rows(&self) -> [(&'static str, &Extended); 4] {
        [
            (Self::LABELS[0], &self.min_plus),
            (Self::LABELS[1], &self.max_plus),
            (Self::LABELS[2], &self.mapped),
            (Self::LABELS[3], &self.integrated),
        ]
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = Self::LABELS.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        for (label, value) in self.rows() {
            let pad = width - label.chars().count();
            writeln!(f, "{label}{}  {}", " ".repeat(pad), value.to_display_string())?;
        }
        Ok(())
    }
}

/// The four bounds for a token-bucket flow alone on a link of rate `c`: service
/// curve `c(t − l^M/c)⁺`, g-server `(v + l^M)/c`, and the GR model with
/// `R = c`, `E = 0`.
pub fn compare_table(flow: &FlowSpec, c: &Rational) -> Result<BoundReport> {
    flow.validate()?;
    if !c.is_positive() {
        return Err(Error::param("linkRate", format!("must be > 0, got {c}")));
    }
    if flow.rho > *c {
        return Err(Error::Utilization(format!(
            "rho {} exceeds link rate {}",
            flow.rho, c
        )));
    }
    let alpha = flow.arrival_curve();
    let beta = make_latency_rate(c, &(&flow.l_max / c))?;
    let g1 = arrival_to_g_regular(&alpha, &flow.l_min)?;
    let g2 = service_to_g_server(&beta);
    Ok(BoundReport {
        min_plus: bound_min_plus(&alpha, &beta),
        max_plus: bound_max_plus(&g1, &g2),
        mapped: bound_mapped(&alpha, &beta, &flow.l_min)?,
        integrated: bound_integrated(&alpha, &gr_server(c, &Rational::zero())?)?,
        assumptions: UtilizationCheck {
            rho: flow.rho.clone(),
            rate: c.clone(),
            satisfied: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_token_bucket, Knot};
    use crate::rational::q;

    fn r(n: i64) -> Rational {
        Rational::int(n)
    }

    fn fin(v: Rational) -> Extended {
        Extended::Finite(v)
    }

    #[test]
    fn min_plus_examples() {
        let (sigma, rho, rate, lat) = (r(500), r(10), r(100), q(1, 2));
        let alpha = make_token_bucket(&sigma, &rho).unwrap();
        let beta = make_latency_rate(&rate, &lat).unwrap();
        assert_eq!(bound_min_plus(&alpha, &beta), fin(&sigma / &rate + &lat));
        let fast = make_token_bucket(&sigma, &r(101)).unwrap();
        assert_eq!(bound_min_plus(&fast, &beta), Extended::Infinite);
    }

    #[test]
    fn max_plus_examples() {
        let g1 = Curve::rate_offset(&r(10), r(0)).unwrap();
        let g2 = Curve::rate_offset(&r(20), r(0)).unwrap();
        assert_eq!(bound_max_plus(&g1, &g2), fin(r(0)));
        assert_eq!(bound_max_plus(&g1, &g1), fin(r(0)));
    }

    #[test]
    fn mapped_examples() {
        let (sigma, rho, rate, lat, lm) = (r(500), r(10), r(100), q(1, 2), r(40));
        let alpha = make_token_bucket(&sigma, &rho).unwrap();
        let beta = make_latency_rate(&rate, &lat).unwrap();
        assert_eq!(
            bound_mapped(&alpha, &beta, &lm).unwrap(),
            fin((&sigma - &lm) / &rate + &lat)
        );
        let beta0 = make_latency_rate(&rate, &r(0)).unwrap();
        assert_eq!(bound_mapped(&alpha, &beta0, &sigma).unwrap(), fin(r(0)));
    }

    #[test]
    fn integrated_examples() {
        let (sigma, rho, rate, e) = (r(500), r(10), r(100), q(3, 10));
        let alpha = make_token_bucket(&sigma, &rho).unwrap();
        let gr = gr_server(&rate, &e).unwrap();
        assert_eq!(bound_integrated(&alpha, &gr).unwrap(), fin(&sigma / &rate + &e));
        let slow = gr_server(&r(5), &e).unwrap();
        assert_eq!(bound_integrated(&alpha, &slow).unwrap(), Extended::Infinite);
    }

    #[test]
    fn integrated_refuses_without_precondition() {
        let alpha = make_token_bucket(&r(10), &r(1)).unwrap();
        let g = Curve::new(r(0), vec![Knot::continuous(r(3), r(6))], r(1), None).unwrap();
        let model = GxServer::new(g, Curve::affine(r(0), q(3, 2)), false);
        assert!(matches!(bound_integrated(&alpha, &model), Err(Error::Model(_))));
    }

    #[test]
    fn compare_table_matches_closed_forms() {
        let (sigma, rho, lm, lmax, c) = (r(3000), r(30), r(64), r(1500), r(100));
        let flow = FlowSpec::new(sigma.clone(), rho, lm.clone(), lmax.clone()).unwrap();
        let rep = compare_table(&flow, &c).unwrap();
        assert_eq!(rep.min_plus, fin(&sigma / &c + &lmax / &c));
        assert_eq!(rep.max_plus, fin(&sigma / &c + &lmax / &c - &lm / &c));
        assert_eq!(rep.mapped, fin(&sigma / &c + (&lmax - &lm) / &c));
        assert_eq!(rep.integrated, fin(&sigma / &c));
    }

    #[test]
    fn compare_table_degenerate_cases() {
        let c = r(10);
        let l = r(5);
        let flow = FlowSpec::new(r(20), r(1), l.clone(), l.clone()).unwrap();
        let rep = compare_table(&flow, &c).unwrap();
        assert_eq!(rep.mapped, fin(r(2)));
        assert_eq!(rep.max_plus, fin(r(2)));
        assert_eq!(rep.integrated, fin(r(2)));
        let tiny = FlowSpec::new(l.clone(), r(1), l.clone(), l.clone()).unwrap();
        let rep = compare_table(&tiny, &c).unwrap();
        assert_eq!(rep.integrated, fin(&l / &c));
        assert_eq!(rep.min_plus, fin(r(2) * &l / &c));
        let over = FlowSpec::new(r(20), r(11), l.clone(), l).unwrap();
        assert!(matches!(compare_table(&over, &c), Err(Error::Utilization(_))));
    }

    #[test]
    fn report_text_has_rows_in_table_order() {
        let flow = FlowSpec::new(r(300), r(10), r(10), r(50)).unwrap();
        let text = compare_table(&flow, &r(100)).unwrap().to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        for (line, label) in lines.iter().zip(BoundReport::LABELS) {
            assert!(line.starts_with(label));
        }
        assert!(lines[3].ends_with("3"));
        assert!(lines[0].ends_with("7/2 (3.5)"));
    }
}
