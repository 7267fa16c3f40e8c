//! Nondecreasing piecewise-linear curves with jumps, and the order-theoretic
//! operators the delay bounds are built from.
//!
//! A [`Curve`] is stored as a list of knots. Knot `i` sits at abscissa `x_i`
//! and records three ordinates: the left limit, the value at `x_i` itself,
//! and the right limit. Between two knots the curve is the straight line from
//! the right limit of the first to the left limit of the second; after the
//! last knot it continues with `terminal_slope`. The first knot is always at
//! `x = 0` and its value is `f(0)`.
//!
//! A curve may additionally be `+∞` from some abscissa on (the "cutoff"). This
//! is how pseudo-inverses of bounded curves are represented: `f↓(y)` is
//! infinite for every `y` above the supremum of `f`.
//!
//! Point values matter for trace checks (`a(n) − a(m) ≥ g(L(m, n))` evaluates
//! `g` exactly at a point), while the suprema in [`horizontal_distance`] and
//! [`vertical_distance`] are taken over point values and both one-sided limits
//! at every breakpoint, which is exact for piecewise-linear functions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{Extended, Rational};

/// Which value to read at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `f(x⁻)`; at `x = 0` this is `f(0)`.
    Left,
    /// `f(x)`.
    Point,
    /// `f(x⁺)`.
    Right,
}

/// A breakpoint with its left limit, point value and right limit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Knot {
    pub x: Rational,
    pub left: Rational,
    pub value: Rational,
    pub right: Rational,
}

impl Knot {
    pub fn continuous(x: Rational, value: Rational) -> Self {
        Knot {
            x,
            left: value.clone(),
            value: value.clone(),
            right: value,
        }
    }

    pub fn jump(x: Rational, left: Rational, value: Rational, right: Rational) -> Self {
        Knot {
            x,
            left,
            value,
            right,
        }
    }

    fn is_continuous(&self) -> bool {
        self.left == self.value && self.value == self.right
    }
}

/// Abscissa from which a curve is `+∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cutoff {
    pub at: Rational,
    /// Whether the value at `at` itself is already infinite.
    pub inclusive: bool,
}

/// A linear piece of a curve, `[start, end)` or `[start, ∞)`.
#[derive(Debug, Clone)]
struct Piece {
    start: Rational,
    start_value: Rational,
    end: Option<Rational>,
    slope: Rational,
}

impl Piece {
    fn value_at(&self, x: &Rational) -> Rational {
        &self.start_value + &self.slope * (x - &self.start)
    }

    fn end_value(&self) -> Option<Rational> {
        self.end.as_ref().map(|e| self.value_at(e))
    }
}

/// Nonnegative nondecreasing piecewise-linear function on `[0, ∞)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Curve {
    knots: Vec<Knot>,
    terminal_slope: Rational,
    cutoff: Option<Cutoff>,
}

impl Curve {
    /// Builds a curve and checks every invariant.
    ///
    /// `knots` need not contain `x = 0`; a continuous knot at the origin with
    /// value `value_at_zero` is inserted when missing. A knot supplied at
    /// `x = 0` contributes only its right limit.
    pub fn new(
        value_at_zero: Rational,
        knots: Vec<Knot>,
        terminal_slope: Rational,
        cutoff: Option<Cutoff>,
    ) -> Result<Curve> {
        let mut all = Vec::with_capacity(knots.len() + 1);
        let mut rest = knots.into_iter().peekable();
        let first_right = match rest.peek() {
            Some(k) if k.x.is_zero() => rest.next().map(|k| k.right),
            _ => None,
        };
        all.push(Knot {
            x: Rational::zero(),
            left: value_at_zero.clone(),
            value: value_at_zero.clone(),
            right: first_right.unwrap_or(value_at_zero),
        });
        all.extend(rest);
        let curve = Curve {
            knots: all,
            terminal_slope,
            cutoff,
        };
        curve.validate()?;
        Ok(curve.normalized())
    }

    fn validate(&self) -> Result<()> {
        let first = &self.knots[0];
        if first.value.is_negative() {
            return Err(Error::Curve(format!("negative value {} at 0", first.value)));
        }
        if self.terminal_slope.is_negative() {
            return Err(Error::Curve(format!(
                "negative terminal slope {}",
                self.terminal_slope
            )));
        }
        for k in &self.knots {
            if k.x.is_negative() {
                return Err(Error::Curve(format!("breakpoint at negative x {}", k.x)));
            }
            if !(k.left <= k.value && k.value <= k.right) {
                return Err(Error::Curve(format!(
                    "breakpoint at {} is not nondecreasing (left {}, value {}, right {})",
                    k.x, k.left, k.value, k.right
                )));
            }
        }
        for w in self.knots.windows(2) {
            if w[0].x >= w[1].x {
                return Err(Error::Curve(format!(
                    "breakpoints not strictly increasing at {}",
                    w[1].x
                )));
            }
            if w[0].right > w[1].left {
                return Err(Error::Curve(format!(
                    "decreasing segment between {} and {}",
                    w[0].x, w[1].x
                )));
            }
        }
        if let Some(c) = &self.cutoff {
            if c.at < self.last().x {
                return Err(Error::Curve(format!(
                    "cutoff {} precedes last breakpoint {}",
                    c.at,
                    self.last().x
                )));
            }
        }
        Ok(())
    }

    /// Drops breakpoints that carry no information (continuous and collinear).
    fn normalized(mut self) -> Curve {
        let mut i = 1;
        while i < self.knots.len() {
            let removable = {
                let k = &self.knots[i];
                let prev = &self.knots[i - 1];
                let at_cutoff = self.cutoff.as_ref().is_some_and(|c| c.at == k.x);
                if !k.is_continuous() || at_cutoff {
                    false
                } else {
                    let slope_in = (&k.left - &prev.right) / (&k.x - &prev.x);
                    let slope_out = match self.knots.get(i + 1) {
                        Some(next) => (&next.left - &k.right) / (&next.x - &k.x),
                        None => self.terminal_slope.clone(),
                    };
                    slope_in == slope_out
                }
            };
            if removable {
                self.knots.remove(i);
            } else {
                i += 1;
            }
        }
        if let Some(c) = self.cutoff.clone() {
            // Fields past an immediate cutoff are never read; pin them down so
            // structural equality is semantic equality.
            if c.at == self.last().x {
                self.terminal_slope = Rational::zero();
                let last = self.knots.last_mut().expect("nonempty");
                if c.inclusive {
                    last.value = last.left.clone();
                }
                last.right = last.value.clone();
            }
        }
        self
    }

    /// The constant-zero curve.
    pub fn zero() -> Curve {
        Curve::affine(Rational::zero(), Rational::zero())
    }

    /// `x ↦ x`.
    pub fn identity() -> Curve {
        Curve::affine(Rational::zero(), Rational::one())
    }

    /// `x ↦ offset + slope·x`, continuous.
    ///
    /// Panics if either argument is negative; use [`Curve::new`] for
    /// fallible construction.
    pub fn affine(offset: Rational, slope: Rational) -> Curve {
        Curve::new(offset, Vec::new(), slope, None).expect("affine curve parameters must be >= 0")
    }

    /// `v ↦ v / rate + offset`, the common shape of max-plus `g` functions.
    pub fn rate_offset(rate: &Rational, offset: Rational) -> Result<Curve> {
        if !rate.is_positive() {
            return Err(Error::param("rate", format!("must be > 0, got {rate}")));
        }
        if offset.is_negative() {
            return Err(Error::param("offset", format!("must be >= 0, got {offset}")));
        }
        Ok(Curve::affine(offset, rate.recip()))
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn terminal_slope(&self) -> &Rational {
        &self.terminal_slope
    }

    pub fn cutoff(&self) -> Option<&Cutoff> {
        self.cutoff.as_ref()
    }

    pub fn value_at_zero(&self) -> Extended {
        match &self.cutoff {
            Some(c) if c.at.is_zero() && c.inclusive => Extended::Infinite,
            _ => Extended::Finite(self.knots[0].value.clone()),
        }
    }

    fn last(&self) -> &Knot {
        self.knots.last().expect("curve always has a knot at 0")
    }

    /// Whether the curve is finite everywhere.
    pub fn is_finite(&self) -> bool {
        self.cutoff.is_none()
    }

    /// All breakpoint abscissae, including the cutoff.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut xs: Vec<Rational> = self.knots.iter().map(|k| k.x.clone()).collect();
        if let Some(c) = &self.cutoff {
            if c.at != self.last().x {
                xs.push(c.at.clone());
            }
        }
        xs
    }

    /// Linear pieces of the finite part, in order.
    fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::with_capacity(self.knots.len());
        for w in self.knots.windows(2) {
            out.push(Piece {
                start: w[0].x.clone(),
                start_value: w[0].right.clone(),
                end: Some(w[1].x.clone()),
                slope: (&w[1].left - &w[0].right) / (&w[1].x - &w[0].x),
            });
        }
        let last = self.last();
        match &self.cutoff {
            Some(c) if c.at == last.x => {}
            Some(c) => out.push(Piece {
                start: last.x.clone(),
                start_value: last.right.clone(),
                end: Some(c.at.clone()),
                slope: self.terminal_slope.clone(),
            }),
            None => out.push(Piece {
                start: last.x.clone(),
                start_value: last.right.clone(),
                end: None,
                slope: self.terminal_slope.clone(),
            }),
        }
        out
    }

    /// Index of the last knot with `x_i <= x`.
    fn locate(&self, x: &Rational) -> usize {
        match self.knots.binary_search_by(|k| k.x.cmp(x)) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Value of the finite part at `x`, ignoring any cutoff.
    fn finite_eval(&self, x: &Rational, side: Side) -> Rational {
        let i = self.locate(x);
        let k = &self.knots[i];
        if &k.x == x {
            return match side {
                Side::Left => k.left.clone(),
                Side::Point => k.value.clone(),
                Side::Right => k.right.clone(),
            };
        }
        let slope = match self.knots.get(i + 1) {
            Some(next) => (&next.left - &k.right) / (&next.x - &k.x),
            None => self.terminal_slope.clone(),
        };
        &k.right + slope * (x - &k.x)
    }

    /// `f(x)`, or the one-sided limit at `x`.
    pub fn eval(&self, x: &Rational, side: Side) -> Result<Extended> {
        if x.is_negative() {
            return Err(Error::Domain(format!("curve evaluated at negative x {x}")));
        }
        Ok(self.eval_unchecked(x, side))
    }

    fn eval_unchecked(&self, x: &Rational, side: Side) -> Extended {
        let side = if x.is_zero() && side == Side::Left {
            Side::Point
        } else {
            side
        };
        if let Some(c) = &self.cutoff {
            let infinite = match x.cmp(&c.at) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => match side {
                    Side::Left => false,
                    Side::Point => c.inclusive,
                    Side::Right => true,
                },
            };
            if infinite {
                return Extended::Infinite;
            }
        }
        Extended::Finite(self.finite_eval(x, side))
    }

    /// Point value; panics on negative `x`.
    pub fn at(&self, x: &Rational) -> Extended {
        self.eval(x, Side::Point).expect("nonnegative argument")
    }

    /// Point value that must be finite; panics otherwise.
    pub fn at_finite(&self, x: &Rational) -> Rational {
        self.at(x)
            .into_finite()
            .unwrap_or_else(|| panic!("curve is infinite at {x}"))
    }

    /// Slopes of the pieces immediately left and right of `x`. `None` on the
    /// left at `x = 0`, and `None` on the right inside the infinite region.
    fn slopes_around(&self, x: &Rational) -> (Option<Rational>, Option<Rational>) {
        let pieces = self.pieces();
        let mut left = None;
        let mut right = None;
        for p in &pieces {
            let ends_after = |v: &Rational| p.end.as_ref().is_none_or(|e| v < e);
            if &p.start < x && (p.end.as_ref().is_none_or(|e| x <= e)) {
                left = Some(p.slope.clone());
            }
            if &p.start <= x && ends_after(x) {
                right = Some(p.slope.clone());
            }
        }
        (left, right)
    }

    /// Smallest breakpoint strictly greater than `x`, if any.
    pub fn next_breakpoint_after(&self, x: &Rational) -> Option<Rational> {
        self.breakpoints().into_iter().find(|b| b > x)
    }

    /// Slope of the piece starting at (or containing) `x`, to the right.
    pub fn slope_right_of(&self, x: &Rational) -> Option<Rational> {
        self.slopes_around(x).1
    }

    /// Adds a constant to every value (`y_shift` of [`shift_compose`]).
    pub fn plus_constant(&self, offset: &Rational) -> Result<Curve> {
        shift_compose(self, &Rational::zero(), offset)
    }

    /// The same curve with `f(0)` (and hence the left limit at 0) set to 0.
    /// The right limit at 0 is kept, so this only lowers a single point.
    pub fn with_zero_at_origin(&self) -> Curve {
        let mut out = self.clone();
        if let Some(c) = &mut out.cutoff {
            if c.at.is_zero() {
                c.inclusive = false;
            }
        }
        let k0 = &mut out.knots[0];
        k0.left = Rational::zero();
        k0.value = Rational::zero();
        out.normalized()
    }

    /// Upper bound of the curve as `x → ∞`.
    pub fn supremum(&self) -> Extended {
        if self.cutoff.is_some() || self.terminal_slope.is_positive() {
            Extended::Infinite
        } else {
            Extended::Finite(self.last().right.clone())
        }
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve[")?;
        for (i, k) in self.knots.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if k.is_continuous() {
                write!(f, "({}: {})", k.x, k.value)?;
            } else {
                write!(f, "({}: {}|{}|{})", k.x, k.left, k.value, k.right)?;
            }
        }
        write!(f, "; slope {}", self.terminal_slope)?;
        if let Some(c) = &self.cutoff {
            write!(
                f,
                "; inf from {}{}",
                if c.inclusive { "[" } else { "(" },
                c.at
            )?;
        }
        write!(f, "]")
    }
}

/// Token-bucket arrival curve `α(t) = ρt + σ` for `t > 0`, with `α(0) = 0`.
pub fn make_token_bucket(sigma: &Rational, rho: &Rational) -> Result<Curve> {
    if sigma.is_negative() {
        return Err(Error::param("sigma", format!("must be >= 0, got {sigma}")));
    }
    if rho.is_negative() {
        return Err(Error::param("rho", format!("must be >= 0, got {rho}")));
    }
    Curve::new(
        Rational::zero(),
        vec![Knot::jump(
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
            sigma.clone(),
        )],
        rho.clone(),
        None,
    )
}

/// Latency-rate curve `β(t) = R(t − T)⁺`.
pub fn make_latency_rate(rate: &Rational, latency: &Rational) -> Result<Curve> {
    if rate.is_negative() {
        return Err(Error::param("rate", format!("must be >= 0, got {rate}")));
    }
    if latency.is_negative() {
        return Err(Error::param("latency", format!("must be >= 0, got {latency}")));
    }
    // Flat on [0, T]; the knot at T starts the ramp.
    let knots = if latency.is_zero() {
        Vec::new()
    } else {
        vec![Knot::continuous(latency.clone(), Rational::zero())]
    };
    Curve::new(Rational::zero(), knots, rate.clone(), None)
}

/// `f(x)` or a one-sided limit; errors on negative `x`.
pub fn eval(f: &Curve, x: &Rational, side: Side) -> Result<Extended> {
    f.eval(x, side)
}

/// Vertices of the graph of `f` traversed as a monotone path, including the
/// vertical segments at jumps, starting from `(0, 0)`. Also returns how the
/// path continues past its last vertex.
enum PathTail {
    /// Ray with this positive slope.
    Ray(Rational),
    /// Flat forever at the last vertex's height.
    Flat,
    /// Vertical to `+∞` at the last vertex's abscissa.
    Wall,
}

fn graph_path(f: &Curve) -> (Vec<(Rational, Rational)>, PathTail) {
    let mut path = vec![(Rational::zero(), Rational::zero())];
    let k0 = &f.knots[0];
    path.push((Rational::zero(), k0.value.clone()));
    let last_x = f.last().x.clone();
    let cutoff_at_last = f.cutoff.as_ref().is_some_and(|c| c.at == last_x);
    for (i, k) in f.knots.iter().enumerate() {
        if i > 0 {
            path.push((k.x.clone(), k.left.clone()));
        }
        let is_last = i + 1 == f.knots.len();
        if !(is_last && cutoff_at_last) {
            path.push((k.x.clone(), k.right.clone()));
        }
    }
    let tail = match &f.cutoff {
        Some(c) => {
            if c.at > last_x {
                let y = f.finite_eval(&c.at, Side::Left);
                path.push((c.at.clone(), y));
            }
            PathTail::Wall
        }
        None if f.terminal_slope.is_positive() => PathTail::Ray(f.terminal_slope.clone()),
        None => PathTail::Flat,
    };
    (path, tail)
}

fn pseudo_inverse(f: &Curve, upper: bool) -> Curve {
    if let Some(c) = &f.cutoff {
        if c.at.is_zero() && c.inclusive {
            // f ≡ ∞: inf over everything is 0, sup over nothing is 0.
            return Curve::zero();
        }
    }
    let (path, tail) = graph_path(f);
    // Swap axes and group vertices sharing the same ordinate.
    let mut groups: Vec<(Rational, Rational, Rational)> = Vec::new(); // (y, first x, last x)
    for (x, y) in path {
        match groups.last_mut() {
            Some(g) if g.0 == y => g.2 = x,
            _ => groups.push((y, x.clone(), x)),
        }
    }
    let pick = |first: &Rational, last: &Rational| {
        if upper {
            last.clone()
        } else {
            first.clone()
        }
    };
    let n = groups.len();
    let mut knots = Vec::with_capacity(n);
    let mut cutoff = None;
    let mut slope = Rational::zero();
    for (i, (y, first, last)) in groups.iter().enumerate() {
        let is_last = i + 1 == n;
        if is_last {
            match &tail {
                PathTail::Flat => {
                    // The path stays at height y forever: the inverse is
                    // infinite above y (lower) or from y on (upper).
                    knots.push(Knot::continuous(y.clone(), first.clone()));
                    cutoff = Some(Cutoff {
                        at: y.clone(),
                        inclusive: upper,
                    });
                    continue;
                }
                PathTail::Ray(s) => slope = s.recip(),
                PathTail::Wall => slope = Rational::zero(),
            }
        }
        if y.is_zero() {
            let v = pick(first, last);
            knots.push(Knot::jump(y.clone(), v.clone(), v, last.clone()));
        } else {
            knots.push(Knot::jump(
                y.clone(),
                first.clone(),
                pick(first, last),
                last.clone(),
            ));
        }
    }
    if !upper {
        // f↓(0) = 0 always; the right limit at 0 is whatever the path gives.
        knots[0].left = Rational::zero();
        knots[0].value = Rational::zero();
    }
    let value_at_zero = knots[0].value.clone();
    let curve = Curve {
        knots,
        terminal_slope: slope,
        cutoff,
    };
    debug_assert!(curve.validate().is_ok(), "{:?}", curve);
    let _ = value_at_zero;
    curve.normalized()
}

/// `f↓(y) = inf {x ≥ 0 : f(x) ≥ y}`. Left-continuous; infinite above `sup f`.
pub fn lower_pseudo_inverse(f: &Curve) -> Curve {
    pseudo_inverse(f, false)
}

/// `f↑(y) = sup {x ≥ 0 : f(x) ≤ y}`. Right-continuous; infinite from
/// `sup f` on when `f` is bounded. The supremum of the empty set is taken as 0.
pub fn upper_pseudo_inverse(f: &Curve) -> Curve {
    pseudo_inverse(f, true)
}

fn ext_minus(a: &Extended, b: &Rational) -> Extended {
    match a {
        Extended::Finite(v) => Extended::Finite(v - b),
        Extended::Infinite => Extended::Infinite,
    }
}

/// Running supremum that tracks whether any finite term was seen.
struct Sup {
    best: Option<Extended>,
}

impl Sup {
    fn new() -> Self {
        Sup { best: None }
    }

    fn offer(&mut self, v: Extended) {
        self.best = Some(match self.best.take() {
            Some(b) => b.max(v),
            None => v,
        });
    }

    fn is_infinite(&self) -> bool {
        matches!(self.best, Some(Extended::Infinite))
    }

    fn finish(self) -> Extended {
        self.best.unwrap_or_else(Extended::zero)
    }
}

const SIDES: [Side; 3] = [Side::Left, Side::Point, Side::Right];

/// `V(f, g) = sup_{x ≥ 0} {g(x) − f(x)}`.
///
/// Abscissae where `f` is infinite are excluded from the supremum. The result
/// is `Infinite` when `g` is infinite where `f` is not, or when `g` outgrows
/// `f`. An empty supremum is reported as 0.
pub fn vertical_distance(f: &Curve, g: &Curve) -> Extended {
    let candidates: BTreeSet<Rational> = f
        .breakpoints()
        .into_iter()
        .chain(g.breakpoints())
        .collect();
    let mut sup = Sup::new();
    for x in &candidates {
        for side in SIDES {
            let fv = f.eval_unchecked(x, side);
            let gv = g.eval_unchecked(x, side);
            match (gv, fv) {
                (_, Extended::Infinite) => {}
                (Extended::Infinite, Extended::Finite(_)) => return Extended::Infinite,
                (Extended::Finite(a), Extended::Finite(b)) => sup.offer(Extended::Finite(a - b)),
            }
        }
    }
    if f.cutoff.is_none() && g.cutoff.is_none() && g.terminal_slope > f.terminal_slope {
        return Extended::Infinite;
    }
    sup.finish()
}

/// `H(f, g) = sup_{x ≥ 0} inf {y ≥ 0 : g(x + y) ≥ f(x)}`.
///
/// Computed as `max(0, sup_x {g↓(f(x)) − x})`, sweeping the breakpoints of `f`
/// and the abscissae where `f` crosses a breakpoint level of `g↓`.
pub fn horizontal_distance(f: &Curve, g: &Curve) -> Extended {
    let ginv = lower_pseudo_inverse(g);
    let g_cut = g.cutoff.as_ref().map(|c| c.at.clone());
    let ginv_at = |level: &Extended, side: Side| -> Extended {
        match level {
            Extended::Finite(y) => ginv.eval_unchecked(y, side),
            Extended::Infinite => match &g_cut {
                Some(at) => Extended::Finite(at.clone()),
                None => Extended::Infinite,
            },
        }
    };

    let levels = ginv.breakpoints();
    let mut candidates: BTreeSet<Rational> = f.breakpoints().into_iter().collect();
    for piece in f.pieces() {
        if !piece.slope.is_positive() {
            continue;
        }
        let end_value = piece.end_value();
        for y in &levels {
            let above_start = *y > piece.start_value;
            let below_end = end_value.as_ref().is_none_or(|e| y < e);
            if above_start && below_end {
                candidates.insert(&piece.start + (y - &piece.start_value) / &piece.slope);
            }
        }
    }

    let mut sup = Sup::new();
    sup.offer(Extended::zero());
    for x in &candidates {
        let (left_slope, right_slope) = f.slopes_around(x);
        // Point.
        let level = f.eval_unchecked(x, Side::Point);
        sup.offer(ext_minus(&ginv_at(&level, Side::Point), x));
        // Left limit.
        if x.is_positive() {
            let level = f.eval_unchecked(x, Side::Left);
            let side = match &left_slope {
                Some(s) if s.is_positive() => Side::Left,
                _ => Side::Point,
            };
            sup.offer(ext_minus(&ginv_at(&level, side), x));
        }
        // Right limit.
        let level = f.eval_unchecked(x, Side::Right);
        let side = match &right_slope {
            Some(s) if s.is_positive() => Side::Right,
            _ => Side::Point,
        };
        sup.offer(ext_minus(&ginv_at(&level, side), x));
        if sup.is_infinite() {
            return Extended::Infinite;
        }
    }
    if f.cutoff.is_none() && f.terminal_slope.is_positive() && ginv.cutoff.is_none() {
        let growth = &f.terminal_slope * ginv.terminal_slope();
        if growth > Rational::one() {
            return Extended::Infinite;
        }
    }
    sup.finish()
}

/// `v ↦ max(0, f(v + x_shift) + y_shift)`.
///
/// `x_shift` must be nonnegative so the result is defined on `[0, ∞)`.
pub fn shift_compose(f: &Curve, x_shift: &Rational, y_shift: &Rational) -> Result<Curve> {
    if x_shift.is_negative() {
        return Err(Error::Curve(format!(
            "shift by {x_shift} leaves the domain [0, inf)"
        )));
    }
    // Restrict to [x_shift, ∞) and translate left.
    let cutoff = match &f.cutoff {
        Some(c) if c.at < *x_shift || (c.at == *x_shift && c.inclusive) => {
            return Ok(Curve {
                knots: vec![Knot::continuous(Rational::zero(), Rational::zero())],
                terminal_slope: Rational::zero(),
                cutoff: Some(Cutoff {
                    at: Rational::zero(),
                    inclusive: true,
                }),
            });
        }
        Some(c) => Some(Cutoff {
            at: &c.at - x_shift,
            inclusive: c.inclusive,
        }),
        None => None,
    };
    let origin_value = f.finite_eval(x_shift, Side::Point);
    let origin_right = if f.cutoff.as_ref().is_some_and(|c| c.at == *x_shift) {
        origin_value.clone()
    } else {
        f.finite_eval(x_shift, Side::Right)
    };
    let mut knots = vec![Knot::jump(
        Rational::zero(),
        origin_value.clone(),
        origin_value,
        origin_right,
    )];
    for k in f.knots.iter().filter(|k| k.x > *x_shift) {
        knots.push(Knot::jump(
            &k.x - x_shift,
            k.left.clone(),
            k.value.clone(),
            k.right.clone(),
        ));
    }
    let shifted = Curve {
        knots,
        terminal_slope: f.terminal_slope.clone(),
        cutoff,
    };
    let moved = Curve {
        knots: shifted
            .knots
            .iter()
            .map(|k| Knot::jump(k.x.clone(), &k.left + y_shift, &k.value + y_shift, &k.right + y_shift))
            .collect(),
        ..shifted.clone()
    };
    let clipped = clip_at_zero(&moved);
    clipped.validate()?;
    Ok(clipped.normalized())
}

/// `max(0, f)` for a nondecreasing `f` whose values may be negative.
fn clip_at_zero(f: &Curve) -> Curve {
    let zero = Rational::zero();
    let clip = |v: &Rational| v.clone().max(zero.clone());
    let mut knots = Vec::with_capacity(f.knots.len() + 1);
    for (i, k) in f.knots.iter().enumerate() {
        if i > 0 {
            // Insert the zero crossing of the preceding segment, if strictly inside.
            let prev = &f.knots[i - 1];
            if prev.right.is_negative() && k.left.is_positive() {
                let slope = (&k.left - &prev.right) / (&k.x - &prev.x);
                let x0 = &prev.x + (-&prev.right) / slope;
                knots.push(Knot::continuous(x0, zero.clone()));
            }
        }
        knots.push(Knot::jump(
            k.x.clone(),
            clip(&k.left),
            clip(&k.value),
            clip(&k.right),
        ));
    }
    let last = f.last();
    if last.right.is_negative() && f.terminal_slope.is_positive() {
        let x0 = &last.x + (-&last.right) / &f.terminal_slope;
        let within = f.cutoff.as_ref().is_none_or(|c| x0 < c.at);
        if within {
            knots.push(Knot::continuous(x0, zero.clone()));
        }
    }
    Curve {
        knots,
        terminal_slope: f.terminal_slope.clone(),
        cutoff: f.cutoff.clone(),
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"points":[{"x","left","right"[,"value"]}...], "terminalSlope",
// "valueAtZero"[, "unboundedFrom": {"at", "inclusive"}]}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PointRepr {
    x: Rational,
    left: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Rational>,
    right: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CurveRepr {
    points: Vec<PointRepr>,
    terminal_slope: Rational,
    value_at_zero: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unbounded_from: Option<Cutoff>,
}

impl Serialize for Curve {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CurveRepr {
            points: self
                .knots
                .iter()
                .map(|k| PointRepr {
                    x: k.x.clone(),
                    left: k.left.clone(),
                    value: Some(k.value.clone()),
                    right: k.right.clone(),
                })
                .collect(),
            terminal_slope: self.terminal_slope.clone(),
            value_at_zero: self.knots[0].value.clone(),
            unbounded_from: self.cutoff.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CurveRepr::deserialize(deserializer)?;
        let knots = repr
            .points
            .into_iter()
            .map(|p| {
                let value = p.value.unwrap_or_else(|| p.left.clone());
                Knot::jump(p.x, p.left, value, p.right)
            })
            .collect();
        Curve::new(repr.value_at_zero, knots, repr.terminal_slope, repr.unbounded_from)
            .map_err(serde::de::Error::custom)
    }
}
