//! Radial and half-line profiles and the change of variables between them.
//!
//! A ball profile `u(ρ)` on `[0, R]` and a half-line profile `v(s)` on
//! `[0, ∞)` are related by `v(s) = T u(R e^{-s/(2+β)})`. Interpolation
//! shapes are chosen so that this map is exact in both directions: a profile
//! linear in `ρ` becomes linear in `e^{-s/(2+β)}`, and a profile linear in
//! `ln ρ` becomes linear in `s`.

use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsBundle, WeightParams};
use crate::error::{Error, Result};

/// How a ball profile is interpolated between knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialShape {
    /// Linear in `ρ`.
    Linear,
    /// Linear in `ln ρ` on cells away from the origin; constant on `[0, ρ₁]`.
    LogLinear,
}

/// How a half-line profile is interpolated between knots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfLineShape {
    /// Linear in `s`.
    Linear,
    /// Linear in `x = e^{-rate·s}`.
    ExpLinear { rate: f64 },
}

/// Behaviour of a half-line profile beyond its last knot `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// Constant `f(S)` on `[S, ∞)`.
    Plateau,
    /// The last exp-linear piece continued to `s = ∞`, where it reaches the
    /// given value. Only valid with [`HalfLineShape::ExpLinear`].
    Limit(f64),
}

/// A radial function on `[0, R]` with `u(R) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
    shape: RadialShape,
}

fn check_knots(knots: &[f64], values: &[f64], min_len: usize) -> Result<()> {
    if knots.len() != values.len() {
        return Err(Error::domain("knots and values differ in length"));
    }
    if knots.len() < min_len {
        return Err(Error::domain(format!("at least {min_len} knots required")));
    }
    if knots[0] != 0.0 {
        return Err(Error::domain("first knot must be 0"));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::domain("knots must be finite"));
    }
    if knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("knots must be strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::domain("values must be finite and nonnegative"));
    }
    Ok(())
}

/// Locates the cell containing `x` (clamped to the knot range).
fn cell_index(knots: &[f64], x: f64) -> usize {
    let n = knots.len();
    if n < 2 {
        return 0;
    }
    match knots.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

impl RadialProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, shape: RadialShape) -> Result<Self> {
        check_knots(&knots, &values, 2)?;
        if *values.last().unwrap() != 0.0 {
            return Err(Error::domain("ball profile must vanish at its support radius"));
        }
        if shape == RadialShape::LogLinear && values[0] != values[1] {
            return Err(Error::domain(
                "log-linear profile must be constant on its innermost cell",
            ));
        }
        Ok(Self {
            knots,
            values,
            shape,
        })
    }

    pub fn linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(knots, values, RadialShape::Linear)
    }

    pub fn zero(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain("support radius must be positive"));
        }
        Self::linear(vec![0.0, r], vec![0.0, 0.0])
    }

    /// Samples `g` on `knots`, forcing the last value to 0.
    pub fn sample<F: Fn(f64) -> f64>(knots: Vec<f64>, g: F) -> Result<Self> {
        let mut values: Vec<f64> = knots.iter().map(|&r| g(r)).collect();
        if let Some(v) = values.last_mut() {
            *v = 0.0;
        }
        Self::linear(knots, values)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> RadialShape {
        self.shape
    }

    pub fn radius(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `u(ρ)`; zero outside the support.
    pub fn eval(&self, rho: f64) -> f64 {
        if rho >= self.radius() || rho < 0.0 {
            return 0.0;
        }
        let i = cell_index(&self.knots, rho);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let (ua, ub) = (self.values[i], self.values[i + 1]);
        match self.shape {
            RadialShape::Linear => ua + (ub - ua) * (rho - a) / (b - a),
            RadialShape::LogLinear => {
                if a == 0.0 {
                    ub
                } else {
                    ua + (ub - ua) * (rho / a).ln() / (b / a).ln()
                }
            }
        }
    }

    /// `u'(ρ)` inside cell `i`.
    pub fn derivative_in_cell(&self, i: usize, rho: f64) -> f64 {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let du = self.values[i + 1] - self.values[i];
        match self.shape {
            RadialShape::Linear => du / (b - a),
            RadialShape::LogLinear => {
                if a == 0.0 {
                    0.0
                } else {
                    du / (b / a).ln() / rho
                }
            }
        }
    }

    /// Cell slope: `du/dρ` for linear cells, `du/d(ln ρ)` for log-linear ones
    /// (zero on the innermost log-linear cell).
    pub fn cell_slope(&self, i: usize) -> f64 {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let du = self.values[i + 1] - self.values[i];
        match self.shape {
            RadialShape::Linear => du / (b - a),
            RadialShape::LogLinear if a == 0.0 => 0.0,
            RadialShape::LogLinear => du / (b / a).ln(),
        }
    }

    /// `c_α ∫_lo^hi |u'|^{2+α} ρ^{1+α} dρ`, evaluated cell by cell in closed form.
    pub fn energy_between(&self, lo: f64, hi: f64, alpha: f64, c_alpha: f64) -> f64 {
        let p = 2.0 + alpha;
        let mut total = 0.0;
        for i in 0..self.knots.len() - 1 {
            let a = self.knots[i].max(lo);
            let b = self.knots[i + 1].min(hi);
            if b <= a {
                continue;
            }
            let k = self.cell_slope(i).abs();
            if k == 0.0 {
                continue;
            }
            total += match self.shape {
                RadialShape::Linear => k.powf(p) * (b.powf(p) - a.powf(p)) / p,
                RadialShape::LogLinear => k.powf(p) * (b / a).ln(),
            };
        }
        c_alpha * total
    }

    /// Weighted Dirichlet energy over the whole support.
    pub fn energy(&self, alpha: f64, c_alpha: f64) -> f64 {
        self.energy_between(0.0, self.radius(), alpha, c_alpha)
    }

    /// `c · u`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::domain("scale factor must be finite and nonnegative"));
        }
        Ok(Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        })
    }

    /// `u(ρ R₀ / R)`: the same shape carried to support radius `r_new`.
    pub fn dilated(&self, r_new: f64) -> Result<Self> {
        if !(r_new > 0.0) || !r_new.is_finite() {
            return Err(Error::domain("support radius must be positive"));
        }
        let f = r_new / self.radius();
        let mut knots: Vec<f64> = self.knots.iter().map(|k| k * f).collect();
        *knots.last_mut().unwrap() = r_new;
        Self::new(knots, self.values.clone(), self.shape)
    }

    /// Linear interpolant of this profile on the given knots.
    pub fn resample_linear(&self, knots: Vec<f64>) -> Result<Self> {
        let r = self.radius();
        if knots.last() != Some(&r) {
            return Err(Error::domain("resampling knots must end at the support radius"));
        }
        let values = knots.iter().map(|&k| self.eval(k)).collect();
        Self::linear(knots, values)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Radii `(lo, hi)` of `{u > λ}` (strict) or `{u ≥ λ}` within cell `i`.
    fn level_interval(&self, i: usize, lambda: f64, strict: bool) -> Option<(f64, f64)> {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let (ua, ub) = (self.values[i], self.values[i + 1]);
        let inside = |v: f64| if strict { v > lambda } else { v >= lambda };
        match (inside(ua), inside(ub)) {
            (false, false) => None,
            (true, true) => Some((a, b)),
            (ia, _) => {
                let t = (lambda - ua) / (ub - ua);
                let r = match self.shape {
                    RadialShape::Linear => a + t * (b - a),
                    RadialShape::LogLinear if a == 0.0 => a,
                    RadialShape::LogLinear => a * (b / a).powf(t),
                };
                let r = r.clamp(a, b);
                if ia {
                    Some((a, r))
                } else {
                    Some((r, b))
                }
            }
        }
    }

    /// Radius of the ball with the same `ρ^{1+β}`-measure as `{u > λ}`
    /// (or `{u ≥ λ}` when `strict` is false).
    pub fn level_radius(&self, lambda: f64, beta: f64, strict: bool) -> f64 {
        let q = 2.0 + beta;
        let mut m = 0.0;
        for i in 0..self.knots.len() - 1 {
            if let Some((lo, hi)) = self.level_interval(i, lambda, strict) {
                m += hi.powf(q) - lo.powf(q);
            }
        }
        m.max(0.0).powf(1.0 / q)
    }
}

impl HalfLineShape {
    fn validate(&self) -> Result<()> {
        if let HalfLineShape::ExpLinear { rate } = self {
            if !(*rate > 0.0) || !rate.is_finite() {
                return Err(Error::domain("exp-linear rate must be positive"));
            }
        }
        Ok(())
    }
}

/// A function on `[0, ∞)` with `f(0) = 0`, given on knots up to `S` and
/// continued by its [`Tail`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
    shape: HalfLineShape,
    tail: Tail,
}

impl HalfLineProfile {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, shape: HalfLineShape, tail: Tail) -> Result<Self> {
        check_knots(&knots, &values, 1)?;
        shape.validate()?;
        if values[0] != 0.0 {
            return Err(Error::domain("half-line profile must vanish at s = 0"));
        }
        if let Tail::Limit(l) = tail {
            if !matches!(shape, HalfLineShape::ExpLinear { .. }) {
                return Err(Error::domain("a limit tail requires the exp-linear shape"));
            }
            if !l.is_finite() || l < 0.0 {
                return Err(Error::domain("tail limit must be finite and nonnegative"));
            }
        }
        Ok(Self {
            knots,
            values,
            shape,
            tail,
        })
    }

    /// Piecewise linear in `s` with a plateau beyond the last knot.
    pub fn linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(knots, values, HalfLineShape::Linear, Tail::Plateau)
    }

    pub fn sample<F: Fn(f64) -> f64>(knots: Vec<f64>, g: F) -> Result<Self> {
        let mut values: Vec<f64> = knots.iter().map(|&s| g(s)).collect();
        values[0] = 0.0;
        Self::linear(knots, values)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> HalfLineShape {
        self.shape
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Last knot `S`.
    pub fn support_end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn last_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `lim_{s→∞} f(s)`.
    pub fn limit_value(&self) -> f64 {
        match self.tail {
            Tail::Plateau => self.last_value(),
            Tail::Limit(l) => l,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(self.limit_value(), f64::max)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let big_s = self.support_end();
        if s >= big_s {
            return match (self.tail, self.shape) {
                (Tail::Plateau, _) => self.last_value(),
                (Tail::Limit(l), HalfLineShape::ExpLinear { rate }) => {
                    l + (self.last_value() - l) * (-rate * (s - big_s)).exp()
                }
                (Tail::Limit(_), HalfLineShape::Linear) => unreachable!("rejected by new"),
            };
        }
        let i = cell_index(&self.knots, s);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let (fa, fb) = (self.values[i], self.values[i + 1]);
        match self.shape {
            HalfLineShape::Linear => fa + (fb - fa) * (s - a) / (b - a),
            HalfLineShape::ExpLinear { rate } => {
                fa + (fb - fa) * (-rate * (s - a)).exp_m1() / (-rate * (b - a)).exp_m1()
            }
        }
    }

    /// `∫_lo^hi |f'|^{2+α} ds` in closed form.
    pub fn energy_between(&self, lo: f64, hi: f64, alpha: f64) -> f64 {
        let p = 2.0 + alpha;
        let mut total = 0.0;
        for i in 0..self.knots.len().saturating_sub(1) {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            let (ca, cb) = (a.max(lo), b.min(hi));
            if cb <= ca {
                continue;
            }
            let df = self.values[i + 1] - self.values[i];
            if df == 0.0 {
                continue;
            }
            total += match self.shape {
                HalfLineShape::Linear => (df / (b - a)).abs().powf(p) * (cb - ca),
                HalfLineShape::ExpLinear { rate } => {
                    // f' = df · (-rate) e^{-rate (s-a)} / expm1(-rate (b-a))
                    let amp = (df * rate / (-rate * (b - a)).exp_m1()).abs().powf(p);
                    let pr = p * rate;
                    amp * (-pr * (ca - a)).exp() * -(-pr * (cb - ca)).exp_m1() / pr
                }
            };
        }
        let big_s = self.support_end();
        if let (Tail::Limit(l), HalfLineShape::ExpLinear { rate }) = (self.tail, self.shape) {
            let start = big_s.max(lo);
            if hi > start {
                let amp = (rate * (self.last_value() - l)).abs().powf(p);
                let pr = p * rate;
                let head = (-pr * (start - big_s)).exp();
                let rest = if hi.is_infinite() {
                    1.0
                } else {
                    -(-pr * (hi - start)).exp_m1()
                };
                total += amp * head * rest / pr;
            }
        }
        total
    }

    /// `∫₀^∞ |f'|^{2+α} ds`.
    pub fn energy(&self, alpha: f64) -> f64 {
        self.energy_between(0.0, f64::INFINITY, alpha)
    }

    /// `(∫|f'|^{2+α})^{1/(2+α)}`.
    pub fn energy_norm(&self, alpha: f64) -> f64 {
        self.energy(alpha).powf(1.0 / (2.0 + alpha))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::domain("scale factor must be finite and nonnegative"));
        }
        let tail = match self.tail {
            Tail::Plateau => Tail::Plateau,
            Tail::Limit(l) => Tail::Limit(l * c),
        };
        Ok(Self {
            values: self.values.iter().map(|v| v * c).collect(),
            tail,
            ..self.clone()
        })
    }

    /// Linear-in-`s` interpolant on `knots` (plateau tail).
    pub fn resample_linear(&self, knots: Vec<f64>) -> Result<Self> {
        let values = knots.iter().map(|&s| self.eval(s)).collect();
        Self::linear(knots, values)
    }
}

/// Ball → half-line: `v(s) = T u(R e^{-s/(2+β)})`, knot for knot.
pub fn to_halfline(u: &RadialProfile, consts: &ConstantsBundle) -> HalfLineProfile {
    let q = 2.0 + consts.params.beta;
    let r = u.radius();
    let t = consts.t;
    let k = u.knots.len();
    let mut knots = Vec::with_capacity(k - 1);
    let mut values = Vec::with_capacity(k - 1);
    for i in (1..k).rev() {
        knots.push(q * (r / u.knots[i]).ln());
        values.push(t * u.values[i]);
    }
    knots[0] = 0.0;
    values[0] = 0.0;
    let (shape, tail) = match u.shape {
        RadialShape::Linear => (HalfLineShape::ExpLinear { rate: 1.0 / q }, Tail::Limit(t * u.values[0])),
        RadialShape::LogLinear => (HalfLineShape::Linear, Tail::Plateau),
    };
    HalfLineProfile {
        knots,
        values,
        shape,
        tail,
    }
}

/// Half-line → ball of radius `r`: `u(ρ) = v((2+β) ln(r/ρ)) / T`.
pub fn from_halfline(v: &HalfLineProfile, consts: &ConstantsBundle, r: f64) -> Result<RadialProfile> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("support radius must be positive"));
    }
    let q = 2.0 + consts.params.beta;
    let shape = match (v.shape, v.tail) {
        (HalfLineShape::Linear, Tail::Plateau) => RadialShape::LogLinear,
        (HalfLineShape::Linear, Tail::Limit(_)) => {
            return Err(Error::domain("linear half-line profile with a limit tail has no exact ball form"))
        }
        (HalfLineShape::ExpLinear { rate }, _) => {
            if ((rate * q) - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "exp-linear rate {rate} does not match 1/(2+beta) = {}",
                    1.0 / q
                )));
            }
            RadialShape::Linear
        }
    };
    if v.knots.len() == 1 && shape == RadialShape::LogLinear {
        return RadialProfile::zero(r);
    }
    let t = consts.t;
    let n = v.knots.len();
    let mut knots = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    knots.push(0.0);
    values.push(v.limit_value() / t);
    for i in (0..n).rev() {
        knots.push(r * (-v.knots[i] / q).exp());
        values.push(v.values[i] / t);
    }
    *knots.last_mut().unwrap() = r;
    if knots[1] <= 0.0 {
        return Err(Error::domain("support end too large to represent in ball coordinates"));
    }
    RadialProfile::new(knots, values, shape)
}

/// Decreasing rearrangement with respect to the measure `ρ^{1+β} dρ`.
///
/// Levels are the knot values plus bisected intermediate levels wherever
/// linear interpolation of the rearranged radius would be off by more than
/// `1e-9 R`. Flat pieces of `u` become flat pieces of `u*`.
pub fn rearrange_decreasing(u: &RadialProfile, params: &WeightParams) -> RadialProfile {
    if u.is_nonincreasing() {
        return u.clone();
    }
    let beta = params.beta;
    let r = u.radius();
    let tol = 1e-9 * r;
    let mut levels: Vec<f64> = u.values.clone();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();

    // (radius, level) pairs, ordered by increasing radius
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let push_level = |pts: &mut Vec<(f64, f64)>, lam: f64| {
        let r_gt = u.level_radius(lam, beta, true);
        let r_ge = u.level_radius(lam, beta, false);
        pts.push((r_gt, lam));
        if r_ge > r_gt {
            pts.push((r_ge, lam));
        }
    };
    for (j, &lam) in levels.iter().enumerate() {
        push_level(&mut pts, lam);
        if let Some(&next) = levels.get(j + 1) {
            let mut stack = vec![(lam, next, 0u32)];
            let mut extra = Vec::new();
            while let Some((hi, lo, depth)) = stack.pop() {
                let r_hi = u.level_radius(hi, beta, false);
                let r_lo = u.level_radius(lo, beta, true);
                let mid = 0.5 * (hi + lo);
                let r_mid = u.level_radius(mid, beta, true);
                let interp = r_hi + (r_lo - r_hi) * 0.5;
                if (r_mid - interp).abs() > tol && depth < 40 {
                    extra.push(mid);
                    stack.push((hi, mid, depth + 1));
                    stack.push((mid, lo, depth + 1));
                }
            }
            extra.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for m in extra {
                push_level(&mut pts, m);
            }
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut knots = vec![0.0];
    let mut values = vec![levels[0]];
    for (rad, lam) in pts {
        let last = *knots.last().unwrap();
        if rad - last <= 1e-15 * r {
            continue;
        }
        if rad >= r {
            break;
        }
        knots.push(rad);
        values.push(lam);
    }
    knots.push(r);
    values.push(0.0);
    RadialProfile {
        knots,
        values,
        shape: RadialShape::Linear,
    }
}

/// Plateau height and log-slope of the Moser function of index `n`.
fn moser_parts(n: f64, consts: &ConstantsBundle) -> (f64, f64) {
    let WeightParams { alpha, beta, .. } = consts.params;
    let base = consts.c_alpha.powf(-1.0 / (2.0 + alpha));
    let b = consts.b_alpha;
    let plateau = base * (n / (2.0 + beta)).powf(1.0 / b);
    let slope = base * ((2.0 + beta) / n).powf(1.0 - 1.0 / b);
    (plateau, slope)
}

/// Moser function `M_n` in ball coordinates, radius 1.
///
/// The ramp `k ln(1/ρ)` is represented exactly (log-linear shape); extra
/// knots at log-width at most 1/4 keep every cell well resolved for
/// quadrature of the exponential integrand.
pub fn moser_ball(n: u32, consts: &ConstantsBundle) -> Result<RadialProfile> {
    if n == 0 {
        return Err(Error::domain("Moser index must be at least 1"));
    }
    let nf = f64::from(n);
    let q = 2.0 + consts.params.beta;
    let (plateau, slope) = moser_parts(nf, consts);
    let log_depth = nf / q;
    let cells = (log_depth / 0.25).ceil().max(8.0) as usize;
    let mut knots = vec![0.0];
    let mut values = vec![plateau];
    for i in (0..=cells).rev() {
        let l = log_depth * i as f64 / cells as f64;
        knots.push((-l).exp());
        values.push(if i == cells { plateau } else { slope * l });
    }
    *knots.last_mut().unwrap() = 1.0;
    *values.last_mut().unwrap() = 0.0;
    RadialProfile::new(knots, values, RadialShape::LogLinear)
}

/// Moser function in half-line coordinates:
/// `f_n(s) = min(s n^{-1/(2+α)}, n^{(1+α)/(2+α)})`.
pub fn moser_halfline(n: u32, params: &WeightParams) -> Result<HalfLineProfile> {
    if n == 0 {
        return Err(Error::domain("Moser index must be at least 1"));
    }
    let nf = f64::from(n);
    let p = 2.0 + params.alpha;
    HalfLineProfile::linear(vec![0.0, nf], vec![0.0, nf.powf((1.0 + params.alpha) / p)])
}

/// Knot spacing of [`carleson_chang_test`] away from the origin.
pub const CC_SPACING: f64 = 1e-3;

/// The piecewise profile `f` = `s/2` on `[0,2]`, `√(s-1)` on `[2, e²+1]`,
/// `e` beyond.
pub fn cc_base(s: f64) -> f64 {
    let e = std::f64::consts::E;
    if s <= 2.0 {
        0.5 * s.max(0.0)
    } else if s <= e * e + 1.0 {
        (s - 1.0).sqrt()
    } else {
        e
    }
}

/// `φ₀ = f^{2(1+α)/(2+α)}` sampled on a dense grid with exact breakpoints
/// at `2` and `e²+1`, graded toward `s = 0` where `φ₀` is not smooth.
pub fn carleson_chang_test(alpha: f64) -> Result<HalfLineProfile> {
    if !(alpha > -1.0) {
        return Err(Error::domain("alpha must exceed -1"));
    }
    let gamma = 2.0 * (1.0 + alpha) / (2.0 + alpha);
    let e = std::f64::consts::E;
    let end = e * e + 1.0;
    let mut knots = Vec::new();
    // graded: s = 0.1 (i/m)^3 on the first stretch
    let m = 200;
    for i in 0..m {
        let t = i as f64 / m as f64;
        knots.push(0.1 * t * t * t);
    }
    let n1 = ((2.0 - 0.1) / CC_SPACING).round() as usize;
    for i in 0..n1 {
        knots.push(0.1 + (2.0 - 0.1) * i as f64 / n1 as f64);
    }
    let n2 = ((end - 2.0) / CC_SPACING).round() as usize;
    for i in 0..=n2 {
        knots.push(2.0 + (end - 2.0) * i as f64 / n2 as f64);
    }
    *knots.last_mut().unwrap() = end;
    HalfLineProfile::sample(knots, |s| cc_base(s).powf(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::build_constants;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn consts(alpha: f64, beta: f64) -> ConstantsBundle {
        build_constants(WeightParams::new(alpha, beta).unwrap(), 1.0, 1.0).unwrap()
    }

    fn cone() -> RadialProfile {
        let knots: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        RadialProfile::sample(knots, |r| 1.0 - r).unwrap()
    }

    #[test]
    fn validation() {
        assert!(RadialProfile::linear(vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
        assert!(RadialProfile::linear(vec![0.1, 1.0], vec![1.0, 0.0]).is_err());
        assert!(RadialProfile::linear(vec![0.0, 0.5, 0.5, 1.0], vec![1.0; 4]).is_err());
        assert!(RadialProfile::linear(vec![0.0, 1.0], vec![-1.0, 0.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 0.5, 1.0], vec![2.0, 1.0, 0.0], RadialShape::LogLinear).is_err());
        assert!(HalfLineProfile::linear(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
        assert!(HalfLineProfile::new(vec![0.0, 1.0], vec![0.0, 1.0], HalfLineShape::Linear, Tail::Limit(1.0)).is_err());
    }

    #[test]
    fn cone_to_halfline() {
        let k = consts(0.0, 0.0);
        let v = to_halfline(&cone(), &k);
        let s = 2.0 * 2f64.ln();
        let expect = (2.0 * PI).sqrt() * 0.5;
        assert!((v.eval(s) - expect).abs() < 1e-12);
        // exact at every s, not only at knots
        for s in [0.013, 0.4, 3.3, 7.0, 12.0, 40.0] {
            let exact = (2.0 * PI).sqrt() * (1.0 - (-s / 2.0f64).exp());
            assert!((v.eval(s) - exact).abs() < 1e-12, "s={s}");
        }
        assert_eq!(v.tail(), Tail::Limit((2.0 * PI).sqrt()));
    }

    #[test]
    fn zero_maps_to_zero() {
        let k = consts(0.3, -0.2);
        let u = RadialProfile::zero(1.0).unwrap();
        let v = to_halfline(&u, &k);
        assert_eq!(v.max_value(), 0.0);
        let back = from_halfline(&HalfLineProfile::linear(vec![0.0, 3.0], vec![0.0, 0.0]).unwrap(), &k, 2.0).unwrap();
        assert_eq!(back.max_value(), 0.0);
    }

    #[test]
    fn cone_energy() {
        let k = consts(0.0, 0.0);
        let e = cone().energy(0.0, k.c_alpha);
        assert!((e - PI / 2.0).abs() < 1e-12);
        let v = to_halfline(&cone(), &k);
        assert!((v.energy(0.0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn moser_forms_agree() {
        for (alpha, beta) in [(0.0, 0.0), (1.0, 0.5), (-0.5, 2.0)] {
            let k = consts(alpha, beta);
            for n in [1u32, 2, 4, 17, 40] {
                let ball = moser_ball(n, &k).unwrap();
                let half = moser_halfline(n, &k.params).unwrap();
                assert!((ball.energy(alpha, k.c_alpha) - 1.0).abs() < 1e-12);
                assert!((half.energy(alpha) - 1.0).abs() < 1e-14);
                let image = to_halfline(&ball, &k);
                for (&s, &v) in image.knots().iter().zip(image.values()) {
                    assert!((v - half.eval(s)).abs() < 1e-12 * half.max_value().max(1.0), "n={n} s={s}");
                }
                assert!((image.limit_value() - half.limit_value()).abs() < 1e-12);
                assert_eq!(ball.radius(), 1.0);
            }
        }
    }

    #[test]
    fn moser_two_plateau() {
        let k = consts(0.0, 0.0);
        let m = moser_ball(2, &k).unwrap();
        assert!((m.values()[0] - PI.powf(-0.5)).abs() < 1e-12);
        let back = from_halfline(&moser_halfline(2, &k.params).unwrap(), &k, 1.0).unwrap();
        for &r in &[0.0, 0.1, 0.3, 0.36, 0.37, 0.5, 0.9] {
            assert!((back.eval(r) - m.eval(r)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn moser_four() {
        let k = consts(0.0, 0.0);
        let f = moser_halfline(4, &k.params).unwrap();
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(9.0), 2.0);
    }

    #[test]
    fn carleson_chang_energy() {
        for alpha in [0.0, 1.0] {
            let phi = carleson_chang_test(alpha).unwrap();
            let g = phi.energy_norm(alpha);
            let exact = crate::constants::gamma_phi0(alpha);
            assert!((g - exact).abs() < 1e-6, "alpha={alpha} g={g} exact={exact}");
            assert_eq!(phi.eval(0.0), 0.0);
            let plateau = std::f64::consts::E.powf(2.0 * (1.0 + alpha) / (2.0 + alpha));
            assert!((phi.eval(20.0) - plateau).abs() < 1e-12);
        }
    }

    #[test]
    fn rearrange_fixed_point() {
        let u = cone();
        let k = consts(0.0, 0.0);
        assert_eq!(rearrange_decreasing(&u, &k.params), u);
    }

    #[test]
    fn rearrange_identity_ramp() {
        // u(ρ) = ρ on [0,1) dropping to 0 at 1; with weight ρ the measure of
        // {u > λ} is (1-λ²)/2, so u*(r) = √(1-r²)
        let n = 4000;
        let mut knots: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64 * 0.999).collect();
        knots.push(1.0);
        let mut values: Vec<f64> = knots.clone();
        *values.last_mut().unwrap() = 0.0;
        let u = RadialProfile::linear(knots, values).unwrap();
        let p = WeightParams::new(0.0, 0.0).unwrap();
        let s = rearrange_decreasing(&u, &p);
        assert!(s.is_nonincreasing());
        for r in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
            let exact = (1.0 - r * r).sqrt();
            assert!((s.eval(r) - exact).abs() < 2e-3, "r={r} got {}", s.eval(r));
        }
    }

    fn random_profile(seed: u64, n: usize, r: f64) -> RadialProfile {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut inner: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * r).collect();
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        inner.dedup();
        let mut knots = vec![0.0];
        knots.extend(inner.into_iter().filter(|&x| x > 0.0 && x < r));
        knots.push(r);
        let mut values: Vec<f64> = knots.iter().map(|_| rng.random::<f64>() * 2.0).collect();
        *values.last_mut().unwrap() = 0.0;
        RadialProfile::linear(knots, values).unwrap()
    }

    #[test]
    fn roundtrip_knots() {
        let k = consts(0.4, 1.3);
        for seed in 0..10 {
            let u = random_profile(seed, 12, 0.7);
            let back = from_halfline(&to_halfline(&u, &k), &k, 0.7).unwrap();
            assert_eq!(back.knots().len(), u.knots().len());
            for i in 0..u.knots().len() {
                assert!((back.knots()[i] - u.knots()[i]).abs() < 1e-14);
                assert!((back.values()[i] - u.values()[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rate_mismatch_rejected() {
        let k = consts(0.0, 1.0);
        let v = HalfLineProfile::new(vec![0.0, 1.0], vec![0.0, 1.0], HalfLineShape::ExpLinear { rate: 0.5 }, Tail::Plateau).unwrap();
        assert!(from_halfline(&v, &k, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn energy_invariant_under_transform(seed in 0u64..10_000, alpha in -0.9f64..3.0, beta in -0.9f64..3.0) {
            let k = consts(alpha, beta);
            let u = random_profile(seed, 15, 1.0);
            let eb = u.energy(alpha, k.c_alpha);
            let eh = to_halfline(&u, &k).energy(alpha);
            prop_assert!((eb - eh).abs() <= 1e-9 * eb.max(1.0), "{eb} vs {eh}");
        }

        #[test]
        fn rearrangement_equimeasurable(seed in 0u64..10_000, beta in -0.9f64..3.0, alpha in -0.9f64..3.0) {
            let p = WeightParams::new(alpha, beta).unwrap();
            let k = consts(alpha, beta);
            let u = random_profile(seed, 10, 1.0);
            let s = rearrange_decreasing(&u, &p);
            prop_assert!(s.is_nonincreasing());
            prop_assert_eq!(s.radius(), u.radius());
            for j in 1..20 {
                let lam = u.max_value() * j as f64 / 20.0;
                let a = u.level_radius(lam, beta, true);
                let b = s.level_radius(lam, beta, true);
                prop_assert!((a - b).abs() < 1e-8, "lambda={} {} vs {}", lam, a, b);
            }
            let eu = u.energy(alpha, k.c_alpha);
            let es = s.energy(alpha, k.c_alpha);
            prop_assert!(es <= eu * (1.0 + 1e-9) + 1e-12, "{es} > {eu}");
        }
    }
}
