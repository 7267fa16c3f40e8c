//! Text rendering helpers. Values print as exact rationals with a decimal
//! approximation; JSON and CSV output stay lossless.

use tsncalc_core::conformance::Violation;
use tsncalc_core::{Curve, Extended, GxServer, Rational};

pub fn value(v: &Extended) -> String {
    v.to_display_string()
}

pub fn rational(v: &Rational) -> String {
    v.to_display_string()
}

fn wrap(r: &Rational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("({r})")
    }
}

/// `slope·var`, or `var/R` when `per_rate` and `slope = 1/R`.
fn linear_term(slope: &Rational, var: &str, per_rate: bool) -> String {
    if *slope == Rational::one() {
        var.to_string()
    } else if per_rate {
        format!("{var}/{}", wrap(&slope.recip()))
    } else {
        format!("{}·{var}", wrap(slope))
    }
}

fn with_constant(term: String, constant: &Rational) -> String {
    if constant.is_zero() {
        term
    } else if term.is_empty() {
        constant.to_string()
    } else if constant.is_negative() {
        format!("{term} − {}", -constant)
    } else {
        format!("{term} + {constant}")
    }
}

/// A readable formula for the common shapes, and a breakpoint list otherwise.
/// `per_rate` writes slopes as `var/R`, the natural form for max-plus curves.
pub fn curve(c: &Curve, var: &str, per_rate: bool, extra: &Rational) -> String {
    let knots = c.knots();
    let slope = c.terminal_slope();
    if c.cutoff().is_none() {
        let k0 = &knots[0];
        if knots.len() == 1 && k0.value == k0.right {
            let term = if slope.is_zero() {
                String::new()
            } else {
                linear_term(slope, var, per_rate)
            };
            let out = with_constant(term, &(&k0.right + extra));
            return if out.is_empty() { "0".into() } else { out };
        }
        if knots.len() == 1 && extra.is_zero() && k0.value.is_zero() {
            return format!(
                "{} for {var} > 0, 0 at {var} = 0",
                with_constant(linear_term(slope, var, per_rate), &k0.right)
            );
        }
        if knots.len() == 2
            && extra.is_zero()
            && k0.value.is_zero()
            && k0.right.is_zero()
            && knots[1].left.is_zero()
            && knots[1].right.is_zero()
            && !slope.is_zero()
        {
            let t = &knots[1].x;
            let term = if per_rate {
                format!("({var} − {t})⁺/{}", wrap(&slope.recip()))
            } else {
                format!("{}·({var} − {t})⁺", wrap(slope))
            };
            return term;
        }
    }
    let mut parts: Vec<String> = knots
        .iter()
        .map(|k| {
            let y = &k.value + extra;
            if k.left == k.value && k.value == k.right {
                format!("({}, {y})", k.x)
            } else {
                format!("({}, {}|{y}|{})", k.x, &k.left + extra, &k.right + extra)
            }
        })
        .collect();
    match c.cutoff() {
        Some(cut) => parts.push(format!(
            "∞ from {var} {} {}",
            if cut.inclusive { "≥" } else { ">" },
            cut.at
        )),
        None => parts.push(format!("then slope {slope}")),
    }
    format!("piecewise {}", parts.join(" "))
}

pub fn gx_model(m: &GxServer) -> String {
    format!(
        "g(v) = {}, x(v) = {}{}",
        curve(&m.g, "v", true, &m.g_offset),
        curve(&m.x, "v", true, &Rational::zero()),
        if m.exact { " (exact)" } else { "" }
    )
}

pub fn violation(v: &Violation) -> String {
    v.to_string()
}

/// Left-aligned two-column table with the label column padded.
pub fn table(rows: &[(String, String)], indent: &str) -> String {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (label, value) in rows {
        let pad = width - label.chars().count();
        out.push_str(&format!("{indent}{label}{}  {value}\n", " ".repeat(pad)));
    }
    out
}
