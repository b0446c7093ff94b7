//! Concentration diagnostics: tail energies, the convergent/concentrating
//! dichotomy for bounded sequences, the crossing point that splits a
//! half-line profile into core and tail, and the bounds used to cap the
//! functional along concentrating sequences.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::constants::{splitting_constant, ConstantsBundle, WeightParams};
use crate::error::{Error, Result};
use crate::functionals::{i_functional, j_functional, j_over_i};
use crate::profiles::{to_halfline, HalfLineProfile, RadialProfile};
use crate::quadrature::QuadratureConfig;

/// `c_α ∫_δ^R |u'|^{2+α} ρ^{1+α} dρ`, the energy outside the half-disk of
/// radius `δ`.
pub fn tail_energy(u: &RadialProfile, delta: f64, consts: &ConstantsBundle) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    if u.radius() > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "profile support radius {} exceeds the unit half-disk",
            u.radius()
        )));
    }
    Ok(u.energy_between(delta, u.radius(), consts.params.alpha, consts.c_alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Convergent,
    Concentrating,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyOptions {
    /// A tail holding less than this fraction of a member's energy counts
    /// as vanished.
    pub concentration_tol: f64,
    pub deltas: Vec<f64>,
    /// Spread allowed in the second half of the `J` trajectory.
    pub j_tol: f64,
    /// Enables the crossing-point diagnostics.
    pub sigma: Option<f64>,
    /// Relative slack on the hypothesis `energy ≤ 1`.
    pub energy_slack: f64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        Self {
            concentration_tol: 0.2,
            deltas: vec![0.5, 0.25, 0.1],
            j_tol: 1e-4,
            sigma: None,
            energy_slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub m: usize,
    pub delta: f64,
    pub tail_energy: f64,
    /// `tail_energy / energy`, zero for a zero profile.
    pub tail_fraction: f64,
}

/// Core/tail split of one sequence member at its crossing point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingDiagnostic {
    pub m: usize,
    pub a_m: f64,
    /// `c^{1+α} ∫_{a_m}^∞ |f'|^{2+α}`.
    pub delta_m: f64,
    /// Exponent of the tail bound; `None` when `1-(1+ς)δ_m ≤ 0`.
    pub k_m: Option<f64>,
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub verdict: Verdict,
    pub options: DichotomyOptions,
    pub tail_energies: Vec<TailRow>,
    pub j_trajectory: Vec<f64>,
    pub i_plus_1_trajectory: Vec<f64>,
    pub j_limit_candidate: f64,
    /// Cap on `J` along concentrating sequences.
    pub ceiling: f64,
    pub ceiling_i_plus_1: f64,
    pub max_i_plus_1: f64,
    /// The ceiling argument assumes `α > 0`; smaller `α` is accepted but flagged.
    pub alpha_nonpositive: bool,
    pub crossing: Vec<CrossingDiagnostic>,
}

/// Classifies a sequence of unit-disk profiles as concentrating at the
/// origin, convergent in `J`, or neither.
pub fn classify_dichotomy(
    seq: &[RadialProfile],
    consts: &ConstantsBundle,
    cfg: &QuadratureConfig,
    opts: &DichotomyOptions,
) -> Result<DichotomyReport> {
    if seq.is_empty() {
        return Err(Error::domain("the sequence is empty"));
    }
    if opts.deltas.is_empty() {
        return Err(Error::domain("at least one delta is required"));
    }
    if !(opts.concentration_tol > 0.0 && opts.j_tol > 0.0) {
        return Err(Error::domain("thresholds must be positive"));
    }
    let alpha = consts.params.alpha;
    let c_split = opts.sigma.map(|s| splitting_constant(s, alpha)).transpose()?;

    let mut tails = Vec::with_capacity(seq.len() * opts.deltas.len());
    let mut js = Vec::with_capacity(seq.len());
    let mut ips = Vec::with_capacity(seq.len());
    let mut crossing = Vec::new();
    for (m, u) in seq.iter().enumerate() {
        let energy = u.energy(alpha, consts.c_alpha);
        if energy > 1.0 + opts.energy_slack {
            return Err(Error::precondition(format!(
                "member {m} has energy {energy} above 1"
            )));
        }
        for &delta in &opts.deltas {
            let t = tail_energy(u, delta, consts)?;
            tails.push(TailRow {
                m,
                delta,
                tail_energy: t,
                tail_fraction: if energy > 0.0 { t / energy } else { 0.0 },
            });
        }
        js.push(j_functional(u, consts, cfg)?.j_value);
        let u1 = if (u.radius() - 1.0).abs() > 1e-12 {
            extend_to_unit(u)?
        } else {
            u.clone()
        };
        let f = to_halfline(&u1, consts);
        ips.push(i_functional(&f, consts.b_alpha, cfg)?.i_plus_1);
        if let (Some(c), Some(sigma)) = (c_split, opts.sigma) {
            if let Some(d) = crossing_diagnostic(m, &f, c, sigma, consts)? {
                crossing.push(d);
            }
        }
    }

    let last = seq.len() - 1;
    let last_energy = seq[last].energy(alpha, consts.c_alpha);
    let final_tail = |delta: f64| {
        tails
            .iter()
            .rev()
            .find(|r| r.m == last && r.delta == delta)
            .map(|r| r.tail_fraction)
            .unwrap_or(f64::NAN)
    };
    let min_tail = |delta: f64| {
        tails
            .iter()
            .filter(|r| r.delta == delta)
            .map(|r| r.tail_fraction)
            .fold(f64::INFINITY, f64::min)
    };
    // a sequence that merely vanishes has no energy left to concentrate
    let concentrating =
        last_energy > 0.0 && opts.deltas.iter().all(|&d| final_tail(d) < opts.concentration_tol);
    let half = &js[js.len() / 2..];
    let spread = half.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - half.iter().copied().fold(f64::INFINITY, f64::min);
    let cauchy = spread <= opts.j_tol;
    let tail_persists = opts.deltas.iter().any(|&d| min_tail(d) >= opts.concentration_tol);

    let verdict = if seq.len() < 2 {
        Verdict::Inconclusive
    } else if concentrating {
        Verdict::Concentrating
    } else if cauchy && tail_persists {
        Verdict::Convergent
    } else {
        Verdict::Inconclusive
    };
    let ceiling = concentration_ceiling(consts);
    Ok(DichotomyReport {
        verdict,
        options: opts.clone(),
        tail_energies: tails,
        j_limit_candidate: js[last],
        j_trajectory: js,
        max_i_plus_1: ips.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        i_plus_1_trajectory: ips,
        ceiling: ceiling.ceiling_j,
        ceiling_i_plus_1: ceiling.ceiling_i_plus_1,
        alpha_nonpositive: alpha <= 0.0,
        crossing,
    })
}

/// Extends a profile supported in a smaller disk by zero out to radius 1.
fn extend_to_unit(u: &RadialProfile) -> Result<RadialProfile> {
    let mut knots = u.knots().to_vec();
    let mut values = u.values().to_vec();
    knots.push(1.0);
    values.push(0.0);
    RadialProfile::new(knots, values, u.shape())
}

fn crossing_diagnostic(
    m: usize,
    f: &HalfLineProfile,
    c: f64,
    sigma: f64,
    consts: &ConstantsBundle,
) -> Result<Option<CrossingDiagnostic>> {
    let params = &consts.params;
    if c * f.energy_norm(params.alpha) > 1.0 + 1e-12 {
        return Ok(None);
    }
    let Some(a_m) = crossing_point(f, c, params)? else {
        return Ok(None);
    };
    let alpha = params.alpha;
    let c1 = consts.c_one;
    let delta_m = c.powf(1.0 + alpha) * f.energy_between(a_m, f64::INFINITY, alpha);
    let r_m = 1.0 - (1.0 + sigma) * delta_m;
    let fa = f.eval(a_m);
    let (k_m, tail_bound) = if r_m > 0.0 {
        let k = c * (c1 * (1.0 + alpha) / 4.0) * fa.powf(consts.b_alpha) - (1.0 + alpha) / 4.0 * a_m * c1
            + c1 * delta_m / r_m * fa / 4.0;
        let bound = tail_integral_bound(fa, 4.0 * a_m / c1, delta_m, sigma, alpha, c1)?;
        (Some(k), Some(bound))
    } else {
        (None, None)
    };
    Ok(Some(CrossingDiagnostic {
        m,
        a_m,
        delta_m,
        k_m,
        tail_bound,
    }))
}

/// `g(a) = c f^{b_α}(a) - a + 2 ln a`, whose first zero on `[1, ∞)` is the
/// crossing point.
pub fn crossing_function(f: &HalfLineProfile, c: f64, params: &WeightParams, a: f64) -> f64 {
    c * f.eval(a).powf(params.b_alpha()) - a + 2.0 * a.ln()
}

/// First zero of [`crossing_function`] on `[1, ∞)`, or `None` when `g < 0`
/// throughout.
///
/// Requires `c ≥ 1` and `c ‖f‖ ≤ 1`, which force `g(1) ≤ 0`.
pub fn crossing_point(f: &HalfLineProfile, c: f64, params: &WeightParams) -> Result<Option<f64>> {
    if !(c >= 1.0) {
        return Err(Error::domain(format!("c = {c} must be at least 1")));
    }
    let norm = f.energy_norm(params.alpha);
    if c * norm > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "c·‖f‖ = {} exceeds 1; the crossing point is only defined below that",
            c * norm
        )));
    }
    let g = |a: f64| crossing_function(f, c, params, a);
    // beyond `end`, g ≤ c·(sup f)^b - a + 2 ln a, which is decreasing for a ≥ 2
    let top = c * f.max_value().powf(params.b_alpha());
    let mut end = f.support_end().max(2.0);
    while top - end + 2.0 * end.ln() >= 0.0 {
        end *= 2.0;
    }
    let mut grid: Vec<f64> = f.knots().iter().copied().filter(|&k| k > 1.0 && k < end).collect();
    grid.insert(0, 1.0);
    grid.push(end);
    const SUB: usize = 8;
    let mut lo = 1.0;
    let mut g_lo = g(lo);
    if g_lo == 0.0 {
        return Ok(Some(lo));
    }
    for w in grid.windows(2) {
        for j in 1..=SUB {
            let hi = w[0] + (w[1] - w[0]) * j as f64 / SUB as f64;
            let g_hi = g(hi);
            if g_hi == 0.0 {
                return Ok(Some(hi));
            }
            if (g_lo < 0.0) != (g_hi < 0.0) {
                return Ok(Some(bisect(&g, lo, hi, g_lo)));
            }
            lo = hi;
            g_lo = g_hi;
        }
    }
    Ok(None)
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let neg = g_lo < 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Checks that `g < 0` on `(0, 1)`, sampled at every knot there and on a
/// uniform grid of `samples` points.
pub fn no_root_below_one(f: &HalfLineProfile, c: f64, params: &WeightParams, samples: usize) -> bool {
    let g = |a: f64| crossing_function(f, c, params, a);
    let uniform = (1..samples).map(|i| i as f64 / samples as f64);
    let knots = f.knots().iter().copied().filter(|&k| k > 0.0 && k < 1.0);
    uniform.chain(knots).all(|a| g(a) < 0.0)
}

/// `e^{c²δ₀/4 + 1}`, the bound on `∫₀^∞ e^{cφ - t} dt` over `φ(0) = 0`,
/// `∫|φ'|² ≤ δ₀`.
pub fn carleson_chang_bound(c: f64, delta0: f64) -> f64 {
    (c * c * delta0 / 4.0 + 1.0).exp()
}

/// Bound on the tail integral `∫_{c₁(1+α)a/4}^∞ e^{φ^{b_α} - s} ds` in terms
/// of `φ(c₁a/4)` and the tail energy `δ`.
pub fn tail_integral_bound(phi_at: f64, a: f64, delta: f64, sigma: f64, alpha: f64, c_one: f64) -> Result<f64> {
    let r = 1.0 - (1.0 + sigma) * delta;
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "requires 1-(1+sigma)delta > 0, got {r}"
        )));
    }
    let c = splitting_constant(sigma, alpha)?;
    let b = (2.0 + alpha) / (1.0 + alpha);
    let exponent = c * (c_one * (1.0 + alpha) / 4.0) * phi_at.powf(b) - c_one * c_one * (1.0 + alpha) * a / 16.0
        + c_one * delta / r * phi_at / 4.0
        + 1.0;
    Ok(exponent.exp() / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ceiling {
    pub ceiling_i_plus_1: f64,
    pub ceiling_j: f64,
}

/// Cap on `I + 1` and on `J` along sequences concentrating at the origin.
pub fn concentration_ceiling(consts: &ConstantsBundle) -> Ceiling {
    Ceiling {
        ceiling_i_plus_1: 1.0 + E,
        ceiling_j: j_over_i(consts) * (1.0 + E),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::build_constants;
    use crate::profiles::{moser_ball, moser_halfline};
    use proptest::prelude::*;

    fn consts(alpha: f64, beta: f64) -> ConstantsBundle {
        build_constants(WeightParams::new(alpha, beta).unwrap(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn moser_tail_energy_closed_form() {
        let k = consts(0.0, 0.0);
        for n in [1u32, 3, 5, 12, 40] {
            let u = moser_ball(n, &k).unwrap();
            for d in [0.5, 0.25, 0.1] {
                let closed = (2.0 * (1.0f64 / d).ln()).min(f64::from(n)) / f64::from(n);
                assert!((tail_energy(&u, d, &k).unwrap() - closed).abs() < 1e-10);
            }
        }
        let k = consts(0.5, 1.5);
        let u = moser_ball(10, &k).unwrap();
        let closed = 3.5 * 10f64.ln() / 10.0;
        assert!((tail_energy(&u, 0.1, &k).unwrap() - closed).abs() < 1e-10);
    }

    #[test]
    fn tail_energy_edges() {
        let k = consts(0.0, 0.0);
        let u = moser_ball(6, &k).unwrap();
        assert!((tail_energy(&u, 1e-300, &k).unwrap() - 1.0).abs() < 1e-12);
        assert!(tail_energy(&u, 0.0, &k).is_err());
        assert!(tail_energy(&u, 1.0, &k).is_err());
        let small = RadialProfile::sample(vec![0.0, 0.05, 0.1], |r| 0.1 - r).unwrap();
        assert_eq!(tail_energy(&small, 0.2, &k).unwrap(), 0.0);
    }

    #[test]
    fn moser_sequence_concentrates() {
        let k = consts(0.0, 0.0);
        let seq: Vec<_> = (5..=40).map(|n| moser_ball(n, &k).unwrap()).collect();
        let r = classify_dichotomy(&seq, &k, &QuadratureConfig::default(), &DichotomyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Concentrating);
        assert!(r.max_i_plus_1 <= r.ceiling_i_plus_1 + 0.01);
        assert!(r.alpha_nonpositive);
        assert_eq!(r.tail_energies.len(), 36 * 3);
    }

    #[test]
    fn constant_sequence_converges() {
        let k = consts(0.0, 0.0);
        let u = RadialProfile::sample(vec![0.0, 0.5, 1.0], |r| 0.3 * (1.0 - r)).unwrap();
        let seq = vec![u.clone(); 4];
        let r = classify_dichotomy(&seq, &k, &QuadratureConfig::default(), &DichotomyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Convergent);
        let j = j_functional(&u, &k, &QuadratureConfig::default()).unwrap().j_value;
        assert_eq!(r.j_limit_candidate, j);
        let one = classify_dichotomy(&seq[..1], &k, &QuadratureConfig::default(), &DichotomyOptions::default()).unwrap();
        assert_eq!(one.verdict, Verdict::Inconclusive);
        assert!(classify_dichotomy(&[], &k, &QuadratureConfig::default(), &DichotomyOptions::default()).is_err());
    }

    #[test]
    fn crossing_point_moser4() {
        let p = WeightParams::new(0.0, 0.0).unwrap();
        let f = moser_halfline(4, &p).unwrap();
        let a = crossing_point(&f, 1.0, &p).unwrap().unwrap();
        // oracle: bisection of s²/4 - s + 2 ln s on [1, 2]
        let h = |s: f64| s * s / 4.0 - s + 2.0 * s.ln();
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((a - lo).abs() < 1e-10);
        assert!(crossing_function(&f, 1.0, &p, a).abs() <= 1e-10);
        assert!((a - 1.619).abs() < 1e-3);
        assert!(no_root_below_one(&f, 1.0, &p, 1000));
    }

    #[test]
    fn crossing_point_edge_cases() {
        let p = WeightParams::new(0.0, 0.0).unwrap();
        let zero = HalfLineProfile::linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(crossing_point(&zero, 1.0, &p).unwrap(), None);
        let f = moser_halfline(4, &p).unwrap();
        assert!(crossing_point(&f, 1.5, &p).is_err());
        assert!(crossing_point(&f, 0.5, &p).is_err());
    }

    #[test]
    fn bounds_arithmetic() {
        assert!((carleson_chang_bound(3.0, 0.0) - E).abs() < 1e-15);
        assert!((carleson_chang_bound(2.0, 1.0) - E * E).abs() < 1e-13);
        assert!((carleson_chang_bound(1.0, 1.0) - 1.25f64.exp()).abs() < 1e-13);
        let v = tail_integral_bound(0.0, 3.0, 0.0, 1.0, 0.5, 2.0).unwrap();
        assert!((v - (1.0 - 4.0 * 1.5 * 3.0 / 16.0f64).exp()).abs() < 1e-13);
        assert!(tail_integral_bound(0.1, 1.0, 0.5, 1.0, 0.0, 1.0).is_err());
        let near = tail_integral_bound(0.1, 1.0, 0.5 - 1e-9, 1.0, 0.0, 1.0).unwrap();
        assert!(near > 1e8);
    }

    #[test]
    fn ceiling_values() {
        let c = concentration_ceiling(&consts(0.0, 0.0));
        assert!((c.ceiling_i_plus_1 - 3.718_281_828).abs() < 1e-9);
        assert!((c.ceiling_j - (1.0 + E) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_diagnostics_when_hypothesis_holds() {
        let k = consts(0.0, 0.0);
        // scale below 1/c so that c‖f‖ ≤ 1
        let c = splitting_constant(3.0, 0.0).unwrap();
        let seq: Vec<_> = [10u32, 20]
            .iter()
            .map(|&n| moser_ball(n, &k).unwrap().scaled(1.0 / c).unwrap())
            .collect();
        let opts = DichotomyOptions {
            sigma: Some(3.0),
            ..DichotomyOptions::default()
        };
        let r = classify_dichotomy(&seq, &k, &QuadratureConfig::default(), &opts).unwrap();
        assert_eq!(r.crossing.len(), 2);
        for d in &r.crossing {
            assert!(d.a_m >= 1.0 && d.delta_m >= 0.0);
        }
    }

    proptest! {
        #[test]
        fn tail_energy_nonincreasing_in_delta(n in 1u32..60, d1 in 0.01f64..0.99, d2 in 0.01f64..0.99) {
            let k = consts(0.3, 0.7);
            let u = moser_ball(n, &k).unwrap();
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let a = tail_energy(&u, lo, &k).unwrap();
            let b = tail_energy(&u, hi, &k).unwrap();
            prop_assert!(b <= a + 1e-15);
            prop_assert!(a <= u.energy(0.3, k.c_alpha) + 1e-12);
        }

        #[test]
        fn crossing_residual(n in 2u32..40, alpha in 0.0f64..2.0) {
            let p = WeightParams::new(alpha, 0.0).unwrap();
            let f = moser_halfline(n, &p).unwrap();
            if let Some(a) = crossing_point(&f, 1.0, &p).unwrap() {
                prop_assert!(crossing_function(&f, 1.0, &p, a).abs() <= 1e-10);
            }
            prop_assert!(no_root_below_one(&f, 1.0, &p, 200));
        }
    }
}
