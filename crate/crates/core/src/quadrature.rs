//! Gauss–Legendre integration engines.
//!
//! Two integrals cover every functional in the crate: weighted radial
//! integrals `∫₀^R g(ρ) ρ^w dρ` with `w > -1`, and exponentially damped
//! half-line integrals `∫₀^∞ g(s) e^{-s} ds`. Both are evaluated cell by
//! cell on caller-supplied breakpoints (typically profile knots) with
//! recursive bisection inside each cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where half-line integrals stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SMaxPolicy {
    Fixed(f64),
    AdaptiveTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Gauss–Legendre order used on every cell.
    pub nodes_per_cell: usize,
    pub s_max_policy: SMaxPolicy,
    /// Maximum bisection depth inside a single cell.
    pub max_subdivisions: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            nodes_per_cell: 16,
            s_max_policy: SMaxPolicy::AdaptiveTail,
            max_subdivisions: 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.nodes_per_cell < 2 {
            return Err(Error::domain("nodes_per_cell must be at least 2"));
        }
        Ok(())
    }

    /// Same configuration with twice the nodes per cell.
    pub fn doubled(&self) -> Self {
        Self {
            nodes_per_cell: 2 * self.nodes_per_cell,
            ..*self
        }
    }
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Adaptive<'a> {
    rule: &'a GaussLegendre,
    rel_tol: f64,
    max_depth: u32,
    converged: bool,
}

impl Adaptive<'_> {
    fn run<F: Fn(f64) -> f64>(&mut self, f: &F, a: f64, b: f64, abs_tol: f64) -> Estimate {
        let whole = self.rule.integrate(f, a, b);
        self.refine(f, a, b, whole, abs_tol, 0)
    }

    fn refine<F: Fn(f64) -> f64>(
        &mut self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        abs_tol: f64,
        depth: u32,
    ) -> Estimate {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, mid);
        let right = self.rule.integrate(f, mid, b);
        let halves = left + right;
        let err = (halves - whole).abs();
        let tol = abs_tol.max(self.rel_tol * halves.abs());
        if err <= tol || !err.is_finite() {
            return Estimate { value: halves, error: err };
        }
        if depth >= self.max_depth || mid <= a || mid >= b {
            self.converged = false;
            return Estimate { value: halves, error: err };
        }
        let l = self.refine(f, a, mid, left, 0.5 * abs_tol, depth + 1);
        let r = self.refine(f, mid, b, right, 0.5 * abs_tol, depth + 1);
        Estimate {
            value: l.value + r.value,
            error: l.error + r.error,
        }
    }
}

fn check_total(est: Estimate, converged: bool, cfg: &QuadratureConfig, what: &str) -> Result<Estimate> {
    let tol = cfg.abs_tol.max(cfg.rel_tol * est.value.abs());
    if !est.value.is_finite() {
        return Err(Error::Numeric {
            message: format!("{what}: non-finite integral"),
            estimate: est.value,
            error: est.error,
        });
    }
    if !converged && est.error > tol {
        return Err(Error::Numeric {
            message: format!("{what}: tolerance not reached"),
            estimate: est.value,
            error: est.error,
        });
    }
    Ok(est)
}

/// Integrates `f` over consecutive cells `[breaks[i], breaks[i+1]]`.
pub fn integrate_cells<F: Fn(f64) -> f64>(f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Estimate> {
    cfg.validate()?;
    let rule = GaussLegendre::new(cfg.nodes_per_cell);
    let mut ad = Adaptive {
        rule: &rule,
        rel_tol: cfg.rel_tol,
        max_depth: cfg.max_subdivisions,
        converged: true,
    };
    let ncell = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let e = ad.run(&f, w[0], w[1], cfg.abs_tol / ncell);
        total.value += e.value;
        total.error += e.error;
    }
    let converged = ad.converged;
    check_total(total, converged, cfg, "cell integral")
}

/// `∫₀^R g(ρ) ρ^w dρ` for `w > -1`.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    g: F,
    weight_exponent: f64,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    integrate_radial_on(g, weight_exponent, &[0.0, r], cfg)
}

/// Weighted radial integral over the cells spanned by `knots`, which must
/// start at 0 and increase.
///
/// The first cell is graded geometrically toward the origin so that
/// singular weights and logarithmic integrands are resolved.
pub fn integrate_radial_on<F: Fn(f64) -> f64>(
    g: F,
    weight_exponent: f64,
    knots: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let w = weight_exponent;
    if !(w > -1.0) {
        return Err(Error::domain(format!(
            "weight exponent {w} must exceed -1 for integrability at the origin"
        )));
    }
    if knots.len() < 2 || knots[0] != 0.0 {
        return Err(Error::domain("radial breakpoints must start at 0"));
    }
    let rule = GaussLegendre::new(cfg.nodes_per_cell);
    let mut ad = Adaptive {
        rule: &rule,
        rel_tol: cfg.rel_tol,
        max_depth: cfg.max_subdivisions,
        converged: true,
    };
    let ncell = (knots.len() - 1) as f64;
    let cell_tol = cfg.abs_tol / ncell;
    let mut total = Estimate { value: 0.0, error: 0.0 };

    let first = graded_first_cell(&mut ad, &g, w, knots[1], cell_tol);
    total.value += first.value;
    total.error += first.error;

    for win in knots[1..].windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            return Err(Error::domain("radial breakpoints must increase"));
        }
        let e = ad.run(&|x: f64| g(x) * x.powf(w), a, b, cell_tol);
        total.value += e.value;
        total.error += e.error;
    }
    let converged = ad.converged;
    check_total(total, converged, cfg, "radial integral")
}

/// `∫₀^b g(x) x^w dx` on dyadic cells `[b 2^{-k-1}, b 2^{-k}]`, where `x^w` is
/// smooth, down to a core `[0, b 2^{-K}]` holding at most a `1e-6` share of
/// the weight mass. The core is mapped by `x = c t^{1/(1+w)}`, which absorbs
/// the weight exactly.
fn graded_first_cell<F: Fn(f64) -> f64>(ad: &mut Adaptive<'_>, g: &F, w: f64, b: f64, tol: f64) -> Estimate {
    let levels = ((6.0 * std::f64::consts::LOG2_10) / (1.0 + w)).ceil().clamp(1.0, 2000.0) as usize;
    let sub_tol = tol / (levels + 1) as f64;
    let mut total = Estimate { value: 0.0, error: 0.0 };
    let mut hi = b;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        let e = ad.run(&|x: f64| g(x) * x.powf(w), lo, hi, sub_tol);
        total.value += e.value;
        total.error += e.error;
        hi = lo;
    }
    let gamma = 1.0 / (1.0 + w);
    let scale = hi.powf(1.0 + w) / (1.0 + w);
    let e = ad.run(&|t: f64| g(hi * t.powf(gamma)), 0.0, 1.0, sub_tol / scale.max(1e-300));
    total.value += scale * e.value;
    total.error += scale * e.error;
    total
}

/// How the integration range `[0, ∞)` is cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    /// `|g(s)| ≤ constant · e^{kappa_b s}` for all `s ≥ 0`, with `kappa_b < 1`.
    Growth { kappa_b: f64, constant: f64 },
    /// Integrate over `[0, S]` only; the caller accounts for the remainder.
    Truncate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineEstimate {
    pub value: f64,
    /// Quadrature error estimate on the truncated range.
    pub error: f64,
    /// Certified bound on the discarded tail; `None` for explicit truncation.
    pub tail_bound: Option<f64>,
    pub truncation: f64,
}

/// `∫₀^∞ g(s) e^{-s} ds`, truncated where the certified tail falls below
/// half the absolute tolerance (or at an explicit `S`).
pub fn integrate_halfline_exp<F: Fn(f64) -> f64>(
    g: F,
    bound: TailBound,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<HalfLineEstimate> {
    cfg.validate()?;
    let (s_max, tail) = match bound {
        TailBound::Growth { kappa_b, constant } => {
            if !(kappa_b < 1.0) {
                return Err(Error::precondition(format!(
                    "growth rate {kappa_b} must be below 1 for a certified tail"
                )));
            }
            let decay = 1.0 - kappa_b;
            let target = 0.5 * cfg.abs_tol;
            let c = constant.abs().max(f64::MIN_POSITIVE);
            let s = ((c / (decay * target)).ln() / decay).max(0.0);
            let s = match cfg.s_max_policy {
                SMaxPolicy::Fixed(fixed) => fixed,
                SMaxPolicy::AdaptiveTail => s,
            };
            let tail = c * (-(decay * s)).exp() / decay;
            if !tail.is_finite() {
                return Err(Error::Numeric {
                    message: "tail bound not representable".into(),
                    estimate: f64::NAN,
                    error: f64::INFINITY,
                });
            }
            (s, Some(tail))
        }
        TailBound::Truncate(s) => {
            if !(s > 0.0) {
                return Err(Error::domain("truncation point must be positive"));
            }
            (s, None)
        }
    };
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(0.0);
    pts.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < s_max));
    pts.push(s_max);
    pts.dedup();
    let est = integrate_cells(|s| g(s) * (-s).exp(), &pts, cfg)?;
    if let Some(t) = tail {
        if t > cfg.abs_tol {
            return Err(Error::Numeric {
                message: "certified tail exceeds tolerance at the fixed truncation point".into(),
                estimate: est.value,
                error: est.error + t,
            });
        }
    }
    Ok(HalfLineEstimate {
        value: est.value,
        error: est.error,
        tail_bound: tail,
        truncation: s_max,
    })
}
