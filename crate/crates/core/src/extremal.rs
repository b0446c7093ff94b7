//! Constrained maximization of `I(f) = ∫₀^∞ (e^{|f|^{b_α}} - 1) e^{-s} ds`
//! over piecewise-linear half-line profiles with `∫|f'|^{2+α} ≤ κ^{2+α}`.
//!
//! The search works on cell slopes `g_c = (f_{c+1} - f_c)/h_c`, where the
//! constraint is `Σ h_c |g_c|^{2+α} ≤ κ^{2+α}`. Each iteration solves the
//! linearized problem over that ball in closed form, moves toward its
//! solution with Armijo backtracking on the duality gap, and rescales the
//! iterate back onto the sphere (the objective is increasing under
//! `f ↦ λf`, `λ ≥ 1`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concentration::concentration_ceiling;
use crate::constants::ConstantsBundle;
use crate::error::{Error, Result, EXP_GUARD};
use crate::functionals::{el_residual, i_functional, j_over_i, ElRhs};
use crate::profiles::{cc_base, from_halfline, rearrange_decreasing, HalfLineProfile};
use crate::quadrature::{GaussLegendre, QuadratureConfig};

/// Half-line grid: spacing `h` up to `uniform_end`, then cells growing by
/// `stretch` until `s_max`, then a plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    pub uniform_end: f64,
    pub stretch: f64,
    pub s_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            h: 0.05,
            uniform_end: 20.0,
            stretch: 1.05,
            s_max: 80.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.uniform_end >= self.h && self.s_max >= self.uniform_end) {
            return Err(Error::domain("grid needs 0 < h <= uniform_end <= s_max"));
        }
        if !(self.stretch >= 1.0) || !self.s_max.is_finite() {
            return Err(Error::domain("grid stretch must be at least 1 and s_max finite"));
        }
        if self.uniform_end / self.h > 1e6 {
            return Err(Error::domain("grid has too many cells"));
        }
        Ok(())
    }

    pub fn knots(&self) -> Vec<f64> {
        let n = (self.uniform_end / self.h).round() as usize;
        let mut k: Vec<f64> = (0..=n).map(|i| i as f64 * self.h).collect();
        let mut s = *k.last().unwrap();
        let mut w = self.h;
        while s < self.s_max - 1e-12 {
            w *= self.stretch;
            s = (s + w).min(self.s_max);
            if self.s_max - s < 0.5 * w {
                s = self.s_max;
            }
            k.push(s);
        }
        k
    }

    /// Same grid with half the spacing everywhere.
    pub fn refined(&self) -> Self {
        Self {
            h: 0.5 * self.h,
            stretch: self.stretch.sqrt(),
            ..*self
        }
    }
}

/// Named initial profile for one run of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StartSpec {
    /// `min(s, 1)`, a small bump away from zero.
    ZeroPerturbed,
    /// The piecewise test profile `φ₀`.
    Phi0,
    Moser(u32),
}

impl fmt::Display for StartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartSpec::ZeroPerturbed => write!(f, "zero-perturbed"),
            StartSpec::Phi0 => write!(f, "phi0"),
            StartSpec::Moser(n) => write!(f, "moser({n})"),
        }
    }
}

impl FromStr for StartSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "zero-perturbed" | "zero" => return Ok(StartSpec::ZeroPerturbed),
            "phi0" => return Ok(StartSpec::Phi0),
            _ => {}
        }
        let inner = t
            .strip_prefix("moser(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("moser:"));
        match inner.and_then(|n| n.parse::<u32>().ok()) {
            Some(n) if n >= 1 => Ok(StartSpec::Moser(n)),
            _ => Err(Error::Parse(format!("unknown start '{t}'"))),
        }
    }
}

impl From<StartSpec> for String {
    fn from(s: StartSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StartSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub kappa: f64,
    pub grid: GridSpec,
    pub max_iters: usize,
    pub step0: f64,
    pub armijo: f64,
    /// Stop once the duality gap falls below `conv_tol · (I + 1)`.
    pub conv_tol: f64,
    pub starts: Vec<StartSpec>,
    /// Gauss–Legendre nodes per cell in the discretized objective.
    pub nodes_per_cell: usize,
    pub trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            grid: GridSpec::default(),
            max_iters: 10_000,
            step0: 0.1,
            armijo: 1e-4,
            conv_tol: 1e-9,
            starts: vec![
                StartSpec::ZeroPerturbed,
                StartSpec::Phi0,
                StartSpec::Moser(2),
                StartSpec::Moser(5),
                StartSpec::Moser(10),
            ],
            nodes_per_cell: 6,
            trace: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::domain("kappa must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be at least 1"));
        }
        if !(self.step0 > 0.0 && self.step0 <= 1.0) {
            return Err(Error::domain("step0 must lie in (0, 1]"));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::domain("armijo must lie in (0, 1)"));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::domain("conv_tol must be positive"));
        }
        if self.starts.is_empty() {
            return Err(Error::domain("at least one start is required"));
        }
        if self.nodes_per_cell < 2 {
            return Err(Error::domain("nodes_per_cell must be at least 2"));
        }
        Ok(())
    }
}

/// `I` restricted to piecewise-linear profiles on a fixed grid with a
/// plateau beyond the last knot, integrated by a fixed Gauss–Legendre rule
/// on every cell.
#[derive(Debug, Clone)]
pub struct DiscreteFunctional {
    knots: Vec<f64>,
    b: f64,
    nodes: Vec<(f64, f64)>,
}

impl DiscreteFunctional {
    pub fn new(knots: Vec<f64>, b_alpha: f64, nodes_per_cell: usize) -> Result<Self> {
        if knots.len() < 2 || knots[0] != 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("knots must start at 0 and increase"));
        }
        let gl = GaussLegendre::new(nodes_per_cell);
        let nodes = gl.mapped(0.0, 1.0).collect();
        Ok(Self {
            knots,
            b: b_alpha,
            nodes,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.knots.len() {
            return Err(Error::domain("value vector does not match the grid"));
        }
        let top = f.iter().fold(0.0f64, |m, x| m.max(x.abs())).powf(self.b);
        if top > EXP_GUARD {
            return Err(Error::Overflow {
                exponent: top,
                limit: EXP_GUARD,
            });
        }
        Ok(())
    }

    /// `I(f)`; `f[0]` is treated as 0.
    pub fn value(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        let b = self.b;
        let mut total = 0.0;
        for c in 0..self.knots.len() - 1 {
            let (s0, h) = (self.knots[c], self.knots[c + 1] - self.knots[c]);
            let (f0, f1) = (if c == 0 { 0.0 } else { f[c] }, f[c + 1]);
            let mut cell = 0.0;
            for &(t, w) in &self.nodes {
                let s = s0 + h * t;
                let x = f0 + (f1 - f0) * t;
                cell += w * ((x.abs().powf(b) - s).exp() - (-s).exp());
            }
            total += h * cell;
        }
        let big_s = *self.knots.last().unwrap();
        let last = *f.last().unwrap();
        total += (last.abs().powf(b) - big_s).exp() - (-big_s).exp();
        Ok(total)
    }

    /// `I(f)` and `∂I/∂f_j`; the entry for `f_0` is 0.
    pub fn value_and_gradient(&self, f: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(f)?;
        let b = self.b;
        let n = self.knots.len();
        let mut grad = vec![0.0; n];
        let mut total = 0.0;
        for c in 0..n - 1 {
            let (s0, h) = (self.knots[c], self.knots[c + 1] - self.knots[c]);
            let (f0, f1) = (if c == 0 { 0.0 } else { f[c] }, f[c + 1]);
            let (mut cell, mut g0, mut g1) = (0.0, 0.0, 0.0);
            for &(t, w) in &self.nodes {
                let s = s0 + h * t;
                let x = f0 + (f1 - f0) * t;
                let ax = x.abs();
                let e = (ax.powf(b) - s).exp();
                cell += w * (e - (-s).exp());
                let d = w * b * ax.powf(b - 1.0) * x.signum() * e;
                g0 += d * (1.0 - t);
                g1 += d * t;
            }
            total += h * cell;
            if c > 0 {
                grad[c] += h * g0;
            }
            grad[c + 1] += h * g1;
        }
        let big_s = *self.knots.last().unwrap();
        let last = *f.last().unwrap();
        let e = (last.abs().powf(b) - big_s).exp();
        total += e - (-big_s).exp();
        grad[n - 1] += b * last.abs().powf(b - 1.0) * last.signum() * e;
        Ok((total, grad))
    }
}

/// Energy `Σ h_c |g_c|^p` of slopes `g`.
fn slope_energy(h: &[f64], g: &[f64], p: f64) -> f64 {
    h.iter().zip(g).map(|(h, g)| h * g.abs().powf(p)).sum()
}

fn slopes_to_values(h: &[f64], g: &[f64]) -> Vec<f64> {
    let mut f = Vec::with_capacity(h.len() + 1);
    let mut acc = 0.0;
    f.push(0.0);
    for (h, g) in h.iter().zip(g) {
        acc += h * g;
        f.push(acc);
    }
    f
}

fn values_to_slopes(knots: &[f64], f: &[f64]) -> Vec<f64> {
    knots
        .windows(2)
        .zip(f.windows(2))
        .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
        .collect()
}

/// Rescales `g` onto the sphere `Σ h|g|^p = K`. Returns `None` for `g = 0`.
fn onto_sphere(h: &[f64], g: &mut [f64], p: f64, target: f64) -> Option<()> {
    let e = slope_energy(h, g, p);
    if !(e > 0.0) {
        return None;
    }
    let lam = (target / e).powf(1.0 / p);
    g.iter_mut().for_each(|x| *x *= lam);
    Some(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub energy: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub start: StartSpec,
    /// `I + 1` after projecting the start onto the constraint sphere.
    pub initial_value: f64,
    pub final_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_profile: HalfLineProfile,
    pub best_start: StartSpec,
    /// Discretized `I + 1` of the best profile.
    #[serde(rename = "best_I_plus_1")]
    pub best_i_plus_1: f64,
    /// Adaptive-quadrature `I + 1` of the same profile, as a cross-check.
    #[serde(rename = "best_I_plus_1_adaptive")]
    pub best_i_plus_1_adaptive: f64,
    #[serde(rename = "best_J")]
    pub best_j: f64,
    pub energy: f64,
    pub kappa: f64,
    pub per_start: Vec<StartReport>,
    pub ceiling_margin: f64,
    /// Mean-field residual with right side `e^{a u^b}` (the first variation).
    pub el_relative_residual: Option<f64>,
    /// Same with right side `e^{a u^b} - 1`.
    pub el_relative_residual_shifted: Option<f64>,
}

fn start_values(start: StartSpec, knots: &[f64], consts: &ConstantsBundle) -> Result<Vec<f64>> {
    let alpha = consts.params.alpha;
    let p = 2.0 + alpha;
    let big_s = *knots.last().unwrap();
    let f: Vec<f64> = match start {
        StartSpec::ZeroPerturbed => knots.iter().map(|&s| s.min(1.0)).collect(),
        StartSpec::Phi0 => {
            let gamma = 2.0 * (1.0 + alpha) / (2.0 + alpha);
            knots.iter().map(|&s| cc_base(s).powf(gamma)).collect()
        }
        StartSpec::Moser(n) => {
            let n = f64::from(n);
            if n > big_s {
                return Err(Error::domain(format!("moser({n}) needs the grid to reach s = {n}")));
            }
            let top = n.powf((1.0 + alpha) / p);
            knots.iter().map(|&s| (s * n.powf(-1.0 / p)).min(top)).collect()
        }
    };
    Ok(f)
}

struct Run {
    report: StartReport,
    values: Vec<f64>,
}

fn run_start(
    start: StartSpec,
    obj: &DiscreteFunctional,
    consts: &ConstantsBundle,
    cfg: &SearchConfig,
) -> Result<Run> {
    let knots = obj.knots();
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let p = 2.0 + consts.params.alpha;
    let target = cfg.kappa.powf(p);
    let mut g = values_to_slopes(knots, &start_values(start, knots, consts)?);
    onto_sphere(&h, &mut g, p, target).ok_or_else(|| Error::domain("start profile is zero"))?;
    let mut f = slopes_to_values(&h, &g);
    let (mut val, mut grad) = obj.value_and_gradient(&f)?;
    let initial = val + 1.0;
    let mut trace = cfg.trace.then(Vec::new);
    let mut t = cfg.step0;
    let mut converged = false;
    let mut iters = 0;
    let mut gap = f64::INFINITY;
    let n = h.len();
    let mut suffix = vec![0.0; n];
    let mut dir = vec![0.0; n];
    while iters < cfg.max_iters {
        iters += 1;
        let mut acc = 0.0;
        for c in (0..n).rev() {
            acc += grad[c + 1];
            suffix[c] = acc;
        }
        for c in 0..n {
            dir[c] = suffix[c].signum() * suffix[c].abs().powf(1.0 / (p - 1.0));
        }
        if onto_sphere(&h, &mut dir, p, target).is_none() {
            converged = true;
            gap = 0.0;
            break;
        }
        gap = (0..n).map(|c| h[c] * suffix[c] * (dir[c] - g[c])).sum::<f64>();
        if gap <= cfg.conv_tol * (val + 1.0) {
            converged = true;
            break;
        }
        t = (2.0 * t).min(1.0);
        let mut accepted = None;
        while t > 1e-14 {
            let mut cand: Vec<f64> = g.iter().zip(&dir).map(|(a, d)| (1.0 - t) * a + t * d).collect();
            if onto_sphere(&h, &mut cand, p, target).is_some() {
                let fc = slopes_to_values(&h, &cand);
                if let Ok(v) = obj.value(&fc) {
                    if v >= val + cfg.armijo * t * gap {
                        accepted = Some((cand, fc));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        g = cand;
        f = fc;
        (val, grad) = obj.value_and_gradient(&f)?;
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceRow {
                iter: iters,
                objective: val + 1.0,
                energy: slope_energy(&h, &g, p),
                step: t,
            });
        }
    }
    Ok(Run {
        report: StartReport {
            start,
            initial_value: initial,
            final_value: val + 1.0,
            iterations: iters,
            converged,
            final_gap: gap,
            trace,
        },
        values: f,
    })
}

/// Multi-start constrained ascent on the discretized `I`.
pub fn maximize(consts: &ConstantsBundle, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let obj = DiscreteFunctional::new(cfg.grid.knots(), consts.b_alpha, cfg.nodes_per_cell)?;
    let runs: Vec<Result<Run>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            cfg.starts.par_iter().map(|&s| run_start(s, &obj, consts, cfg)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            cfg.starts.iter().map(|&s| run_start(s, &obj, consts, cfg)).collect()
        }
    };
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.report.final_value > runs[b].report.final_value { i } else { b });
    let knots = obj.knots().to_vec();
    let values = runs[best].values.clone();
    let best_profile = HalfLineProfile::linear(knots, values)?;
    let best_i_plus_1 = runs[best].report.final_value;
    let qcfg = QuadratureConfig::default();
    let adaptive = i_functional(&best_profile, consts.b_alpha, &qcfg)?.i_plus_1;
    let ball = from_halfline(&best_profile, consts, 1.0)?;
    let ball = rearrange_decreasing(&ball, &consts.params);
    let el = |rhs| {
        el_residual(&ball, consts, rhs, &qcfg)
            .ok()
            .map(|r| r.relative_residual)
            .filter(|r| r.is_finite())
    };
    Ok(SearchResult {
        best_start: runs[best].report.start,
        best_i_plus_1,
        best_i_plus_1_adaptive: adaptive,
        best_j: j_over_i(consts) * (best_i_plus_1 - 1.0),
        energy: best_profile.energy(consts.params.alpha),
        kappa: cfg.kappa,
        ceiling_margin: best_i_plus_1 - concentration_ceiling(consts).ceiling_i_plus_1,
        el_relative_residual: el(ElRhs::Exponential),
        el_relative_residual_shifted: el(ElRhs::ShiftedExponential),
        best_profile,
        per_start: runs.into_iter().map(|r| r.report).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeilingComparison {
    pub exceeds_ceiling: bool,
    pub margin: f64,
    pub ceiling_i_plus_1: f64,
}

/// Compares an `I + 1` value with the cap along concentrating sequences.
pub fn compare_value_with_concentration(i_plus_1: f64, consts: &ConstantsBundle) -> CeilingComparison {
    let ceiling = concentration_ceiling(consts).ceiling_i_plus_1;
    let margin = i_plus_1 - ceiling;
    CeilingComparison {
        exceeds_ceiling: margin > 0.0,
        margin,
        ceiling_i_plus_1: ceiling,
    }
}

pub fn compare_with_concentration(result: &SearchResult, consts: &ConstantsBundle) -> CeilingComparison {
    compare_value_with_concentration(result.best_i_plus_1, consts)
}
