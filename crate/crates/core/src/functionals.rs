//! Energies, exponential integrals, the normalized functional `J`, the
//! half-line functional `I`, the logarithmic and second Trudinger-type
//! inequality checks, and the Euler–Lagrange residual.

use serde::{Deserialize, Serialize};

use crate::constants::ConstantsBundle;
use crate::error::{guard_exponent, Error, Result};
use crate::profiles::{HalfLineProfile, RadialProfile, RadialShape, Tail};
use crate::quadrature::{
    integrate_halfline_exp, integrate_radial_on, Estimate, GaussLegendre, QuadratureConfig, TailBound,
};

/// Weighted Dirichlet energy `c_α ∫|u'|^{2+α} ρ^{1+α} dρ` (closed form per cell).
pub fn dirichlet_energy(u: &RadialProfile, consts: &ConstantsBundle) -> f64 {
    u.energy(consts.params.alpha, consts.c_alpha)
}

/// Half-line energy `∫|f'|^{2+α} ds` (closed form per cell).
pub fn halfline_energy(f: &HalfLineProfile, alpha: f64) -> f64 {
    f.energy(alpha)
}

/// The ball energy by adaptive quadrature of `|u'|^{2+α}` against
/// `ρ^{1+α}` on every cell, independent of the closed forms.
pub fn dirichlet_energy_quadrature(
    u: &RadialProfile,
    consts: &ConstantsBundle,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let alpha = consts.params.alpha;
    let p = 2.0 + alpha;
    let knots = u.knots();
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for i in 0..knots.len() - 1 {
        let cell = [0.0, knots[i + 1] - knots[i]];
        let a = knots[i];
        // shift so the weight singularity (if any) sits at the cell start
        let e = if a == 0.0 {
            integrate_radial_on(|r| u.derivative_in_cell(i, r).abs().powf(p), 1.0 + alpha, &[0.0, knots[1]], cfg)?
        } else {
            integrate_radial_on(
                |t| u.derivative_in_cell(i, a + t).abs().powf(p) * (a + t).powf(1.0 + alpha),
                0.0,
                &cell,
                cfg,
            )?
        };
        total.value += e.value;
        total.error += e.error;
    }
    Ok(Estimate {
        value: consts.c_alpha * total.value,
        error: consts.c_alpha * total.error,
    })
}

/// `∫₀^R h(u(ρ)) ρ^w dρ` with breakpoints at the profile knots.
pub fn radial_integral<H: Fn(f64) -> f64>(
    u: &RadialProfile,
    h: H,
    weight_exponent: f64,
    r_max: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let mut knots: Vec<f64> = u.knots().iter().copied().filter(|&k| k < r_max).collect();
    knots.push(r_max.min(u.radius()));
    if knots.len() < 2 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    integrate_radial_on(|r| h(u.eval(r)), weight_exponent, &knots, cfg)
}

/// `c_β ∫₀^R (e^{a u^{b_α}} - 1) ρ^{1+β} dρ` by weighted quadrature.
pub fn mt_integral(u: &RadialProfile, a: f64, consts: &ConstantsBundle, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(a > 0.0) {
        return Err(Error::domain("exponent coefficient a must be positive"));
    }
    let b = consts.b_alpha;
    guard_exponent(a * u.max_value().powf(b))?;
    let e = radial_integral(u, |x| (a * x.powf(b)).exp_m1(), 1.0 + consts.params.beta, u.radius(), cfg)?;
    Ok(Estimate {
        value: consts.c_beta * e.value,
        error: consts.c_beta * e.error,
    })
}

/// `∫₀^∞ h(f(s)) e^{-s} ds` for `h` nondecreasing on `[0, ∞)` with `h(0)`
/// finite.
///
/// The knot range is integrated with breakpoints at the knots; the tail is
/// exact for a plateau and certified by the bound `h(max f)` for a limit
/// tail.
pub fn halfline_integral<H: Fn(f64) -> f64>(f: &HalfLineProfile, h: H, cfg: &QuadratureConfig) -> Result<Estimate> {
    let big_s = f.support_end();
    let mut total = Estimate { value: 0.0, error: 0.0 };
    if big_s > 0.0 {
        let e = integrate_halfline_exp(|s| h(f.eval(s)), TailBound::Truncate(big_s), f.knots(), cfg)?;
        total.value += e.value;
        total.error += e.error;
    }
    let decay = (-big_s).exp();
    match f.tail() {
        Tail::Plateau => total.value += h(f.last_value()) * decay,
        Tail::Limit(_) => {
            let top = h(f.last_value().max(f.limit_value())).abs();
            let e = integrate_halfline_exp(
                |t| h(f.eval(big_s + t)),
                TailBound::Growth {
                    kappa_b: 0.0,
                    constant: top.max(f64::MIN_POSITIVE),
                },
                &[],
                &QuadratureConfig {
                    abs_tol: cfg.abs_tol.max(cfg.rel_tol * top),
                    ..*cfg
                },
            )?;
            total.value += decay * e.value;
            total.error += decay * (e.error + e.tail_bound.unwrap_or(0.0));
        }
    }
    Ok(total)
}

/// Value of `I(f) = ∫₀^∞ (e^{f^{b_α}} - 1) e^{-s} ds` together with `I + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IValue {
    pub i: f64,
    pub i_plus_1: f64,
    pub error: f64,
}

pub fn i_functional(f: &HalfLineProfile, b_alpha: f64, cfg: &QuadratureConfig) -> Result<IValue> {
    guard_exponent(f.max_value().powf(b_alpha))?;
    let e = halfline_integral(f, |x| x.powf(b_alpha).exp_m1(), cfg)?;
    Ok(IValue {
        i: e.value,
        i_plus_1: e.value + 1.0,
        error: e.error,
    })
}

/// The ball integral evaluated in half-line coordinates:
/// `(c_β R^{2+β}/(2+β)) ∫₀^∞ (e^{(a/T^{b_α}) v^{b_α}} - 1) e^{-s} ds`.
pub fn mt_integral_halfline(
    v: &HalfLineProfile,
    r: f64,
    a: f64,
    consts: &ConstantsBundle,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    let b = consts.b_alpha;
    let coef = a / consts.t.powf(b);
    guard_exponent(coef * v.max_value().powf(b))?;
    let q = 2.0 + consts.params.beta;
    let scale = consts.c_beta * r.powf(q) / q;
    let e = halfline_integral(v, |x| (coef * x.powf(b)).exp_m1(), cfg)?;
    Ok(Estimate {
        value: scale * e.value,
        error: scale * e.error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub c_zero: f64,
    pub m_beta_ball: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub energy: f64,
    pub mt_integral: f64,
    pub j_value: f64,
    pub a_used: f64,
    pub normalization: Normalization,
}

/// `J(u) = mt_integral(u, a_sharp) / ((2+β) c₀ m_β(B⁺))`.
pub fn j_functional(u: &RadialProfile, consts: &ConstantsBundle, cfg: &QuadratureConfig) -> Result<FunctionalReport> {
    if u.radius() > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "J is defined on the unit half-disk; support radius is {}",
            u.radius()
        )));
    }
    let mt = mt_integral(u, consts.a_sharp, consts, cfg)?.value;
    let m = consts.m_beta_ball();
    Ok(FunctionalReport {
        energy: dirichlet_energy(u, consts),
        mt_integral: mt,
        j_value: mt / ((2.0 + consts.params.beta) * consts.c_zero * m),
        a_used: consts.a_sharp,
        normalization: Normalization {
            c_zero: consts.c_zero,
            m_beta_ball: m,
        },
    })
}

/// Factor relating `J` of a unit-radius ball profile to `I` of its half-line
/// image: `J = factor · I`.
pub fn j_over_i(consts: &ConstantsBundle) -> f64 {
    let q = 2.0 + consts.params.beta;
    consts.c_beta / (q * q * consts.c_zero * consts.m_beta_ball())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnofriReport {
    /// `ln ∫(e^u - ζ) t^β` over the support; `-∞` when the integral is not positive.
    pub lhs: f64,
    pub rhs: f64,
    pub zeta: f64,
    pub energy: f64,
    pub holds: bool,
}

/// Coefficient `(a_sharp (2+α)/(1+α))^{-(1+α)} / (2+α)` of the energy term.
pub fn onofri_coefficient(consts: &ConstantsBundle) -> f64 {
    let alpha = consts.params.alpha;
    (consts.a_sharp * consts.b_alpha).powf(-(1.0 + alpha)) / (2.0 + alpha)
}

/// Both sides of the weighted logarithmic (Onofri-type) inequality, with the
/// integral taken over the support half-disk.
pub fn onofri_check(u: &RadialProfile, consts: &ConstantsBundle, cfg: &QuadratureConfig) -> Result<OnofriReport> {
    let energy = dirichlet_energy(u, consts);
    let ce = onofri_coefficient(consts) * energy;
    let zeta = ce.exp();
    guard_exponent(u.max_value())?;
    let q = 2.0 + consts.params.beta;
    let r = u.radius();
    let pos = radial_integral(u, f64::exp_m1, q - 1.0, r, cfg)?;
    let integral = consts.c_beta * (pos.value - ce.exp_m1() * r.powf(q) / q);
    let rhs = ((2.0 + consts.params.beta) * consts.c_zero * consts.m_beta(r)).ln() + ce;
    if integral <= 0.0 {
        return Ok(OnofriReport {
            lhs: f64::NEG_INFINITY,
            rhs,
            zeta,
            energy,
            holds: true,
        });
    }
    let lhs = integral.ln();
    Ok(OnofriReport {
        lhs,
        rhs,
        zeta,
        energy,
        holds: lhs <= rhs + 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondTrudingerReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `T u(R₀) - 1`.
    pub condition_residual: f64,
    pub holds: bool,
}

/// `∫_{B⁺_{R₀}} (e^{a u^{b_β}} - 1) t^β` against `(2+β) c₀ m_β(B⁺_{R₀})`.
pub fn second_trudinger_check(
    u: &RadialProfile,
    a: f64,
    consts: &ConstantsBundle,
    r0: f64,
    cfg: &QuadratureConfig,
) -> Result<SecondTrudingerReport> {
    let p = consts.params;
    let bab = consts
        .b_alpha_beta
        .ok_or_else(|| Error::domain("hypothesis alpha < beta fails"))?;
    if !u.is_nonincreasing() {
        return Err(Error::domain("hypothesis fails: profile is not nonincreasing"));
    }
    if !(a > 0.0) || a > bab * (1.0 + 1e-12) {
        return Err(Error::domain(format!("hypothesis fails: need 0 < a <= b_alpha_beta = {bab}")));
    }
    if !(r0 > 0.0) || r0 > u.radius() {
        return Err(Error::domain("hypothesis fails: R0 must lie in (0, R]"));
    }
    let e = u.energy_between(0.0, r0, p.alpha, consts.c_alpha);
    if e > 1.0 + 1e-9 {
        return Err(Error::domain(format!("hypothesis fails: energy on B_R0 is {e} > 1")));
    }
    let bb = consts.b_beta;
    guard_exponent(a * u.max_value().powf(bb))?;
    let q = 2.0 + p.beta;
    let inner = radial_integral(u, |x| (a * x.powf(bb)).exp_m1(), q - 1.0, r0, cfg)?;
    let lhs = consts.c_beta * inner.value;
    let rhs = consts.c_zero * r0.powf(q) * consts.c_beta;
    Ok(SecondTrudingerReport {
        lhs,
        rhs,
        condition_residual: consts.t * u.eval(r0) - 1.0,
        holds: lhs <= rhs * (1.0 + 1e-9) + consts.c_beta * inner.error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    pub lambda_star: f64,
    pub relative_residual: f64,
    pub points: usize,
}

/// Right side of the mean-field equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElRhs {
    /// `e^{a u^{b_α}}`, the first variation of `J`.
    Exponential,
    /// `e^{a u^{b_α}} - 1`.
    ShiftedExponential,
}

impl ElRhs {
    fn apply(self, x: f64) -> f64 {
        match self {
            ElRhs::Exponential => x.exp(),
            ElRhs::ShiftedExponential => x.exp_m1(),
        }
    }
}

/// Residual of the radially reduced mean-field equation
/// `-(c_α/(c_β ρ^{1+β})) (ρ^{1+α}|u'|^α u')' = λ u^{1/(1+α)} E(a u^{b_α})/D`,
/// with `E` chosen by [`ElRhs`].
///
/// The left side is discretized in weak form at each interior knot: the
/// flux jump across the knot divided by the `ρ^{1+β}`-mass of the knot's
/// basis function. Basis functions are hats in `ρ` for linear profiles and
/// hats in `ln ρ` for log-linear ones, matching the interpolation shape so
/// the flux is exact on every cell. Only meaningful within radial profiles.
pub fn el_terms(u: &RadialProfile, consts: &ConstantsBundle, rhs: ElRhs, cfg: &QuadratureConfig) -> Result<ElTerms> {
    let alpha = consts.params.alpha;
    let beta = consts.params.beta;
    let p = 2.0 + alpha;
    let q = 2.0 + beta;
    let knots = u.knots();
    let vals = u.values();
    let k = knots.len() - 1;
    if k < 2 {
        return Err(Error::domain("need at least one interior knot"));
    }
    if vals[1..k].iter().any(|&v| v <= 0.0) {
        return Err(Error::domain("profile must be strictly positive at interior knots"));
    }
    let a = consts.a_sharp;
    let b = consts.b_alpha;
    guard_exponent(a * u.max_value().powf(b))?;

    let flux = |c: usize| -> f64 {
        let s = u.cell_slope(c);
        let sp = if s == 0.0 { 0.0 } else { s.abs().powf(alpha) * s };
        match u.shape() {
            RadialShape::LogLinear => sp,
            RadialShape::Linear => {
                let (lo, hi) = (knots[c], knots[c + 1]);
                sp * (hi.powf(p) - lo.powf(p)) / (p * (hi - lo))
            }
        }
    };
    let gl = GaussLegendre::new(16);
    // ∫ ρ^{q-1} ψ dρ over cell c, with ψ rising (toward knot c+1) or falling
    let cell_mass = |c: usize, rising: bool| -> f64 {
        let (lo, hi) = (knots[c], knots[c + 1]);
        match u.shape() {
            RadialShape::LogLinear if lo == 0.0 => hi.powf(q) / q,
            RadialShape::Linear if lo == 0.0 => {
                if rising {
                    hi.powf(q) / (q + 1.0)
                } else {
                    hi.powf(q) / q - hi.powf(q) / (q + 1.0)
                }
            }
            RadialShape::Linear => gl.integrate(
                |r| {
                    let t = (r - lo) / (hi - lo);
                    r.powf(q - 1.0) * if rising { t } else { 1.0 - t }
                },
                lo,
                hi,
            ),
            RadialShape::LogLinear => {
                let l = (hi / lo).ln();
                lo.powf(q)
                    * gl.integrate(
                        |t| (q * t).exp() * if rising { t / l } else { 1.0 - t / l },
                        0.0,
                        l,
                    )
            }
        }
    };

    let d = consts.c_beta
        * radial_integral(
            u,
            |x| rhs.apply(a * x.powf(b)) * x.max(0.0).powf(1.0 / (1.0 + alpha)),
            q - 1.0,
            u.radius(),
            cfg,
        )?
        .value;
    if !(d > 0.0) {
        return Err(Error::domain("normalizing integral vanishes"));
    }
    let ratio = consts.c_alpha / consts.c_beta;
    let mut av = Vec::with_capacity(k - 1);
    let mut bv = Vec::with_capacity(k - 1);
    let mut wv = Vec::with_capacity(k - 1);
    for (j, &x) in vals.iter().enumerate().take(k).skip(1) {
        let m = cell_mass(j - 1, true) + cell_mass(j, false);
        wv.push(m);
        av.push(ratio * (flux(j - 1) - flux(j)) / m);
        bv.push(x.powf(1.0 / (1.0 + alpha)) * rhs.apply(a * x.powf(b)) / d);
    }
    Ok(ElTerms { a: av, b: bv, w: wv })
}

/// Discretized left (`a`) and right (`b`) sides of the mean-field equation
/// at the interior knots, with the `ρ^{1+β}`-mass `w` of each knot's basis
/// function.
///
/// Norms are weighted by `w`, a discrete `L²(t^β)` norm. Unweighted sums
/// would let the far-tail knots, where the profile is flat to round-off,
/// dominate.
#[derive(Debug, Clone, PartialEq)]
pub struct ElTerms {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

impl ElTerms {
    /// Least-squares multiplier `argmin_λ ‖A - λB‖`.
    pub fn lambda_star(&self) -> f64 {
        let (mut ab, mut bb) = (0.0, 0.0);
        for ((x, y), w) in self.a.iter().zip(&self.b).zip(&self.w) {
            ab += w * x * y;
            bb += w * y * y;
        }
        ab / bb
    }

    /// `‖A - λB‖ / ‖A‖`.
    pub fn residual_at(&self, lambda: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((x, y), w) in self.a.iter().zip(&self.b).zip(&self.w) {
            num += w * (x - lambda * y).powi(2);
            den += w * x * x;
        }
        (num / den).sqrt()
    }
}

/// Residual of the mean-field equation at the least-squares multiplier.
pub fn el_residual(u: &RadialProfile, consts: &ConstantsBundle, rhs: ElRhs, cfg: &QuadratureConfig) -> Result<ElResidual> {
    let t = el_terms(u, consts, rhs, cfg)?;
    let lambda_star = t.lambda_star();
    Ok(ElResidual {
        lambda_star,
        relative_residual: t.residual_at(lambda_star),
        points: t.a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{build_constants, WeightParams};
    use crate::profiles::{carleson_chang_test, moser_ball, moser_halfline, to_halfline};
    use std::f64::consts::{E, PI};

    fn consts(alpha: f64, beta: f64) -> ConstantsBundle {
        build_constants(WeightParams::new(alpha, beta).unwrap(), 1.0, 1.0).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn cone(h: f64) -> RadialProfile {
        let n = 50;
        RadialProfile::sample((0..=n).map(|i| i as f64 / n as f64).collect(), |r| h * (1.0 - r)).unwrap()
    }

    /// ∫₀¹ e^{w²} dw by composite Simpson on a fine grid.
    fn erfi_like() -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |w: f64| (w * w).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_profile() {
        let k = consts(0.0, 0.0);
        let z = RadialProfile::zero(1.0).unwrap();
        assert_eq!(dirichlet_energy(&z, &k), 0.0);
        assert_eq!(mt_integral(&z, 3.0, &k, &cfg()).unwrap().value, 0.0);
        let r = j_functional(&z, &k, &cfg()).unwrap();
        assert_eq!(r.j_value, 0.0);
        assert!((r.normalization.m_beta_ball - PI / 2.0).abs() < 1e-13);
        let f = HalfLineProfile::linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(i_functional(&f, 2.0, &cfg()).unwrap().i, 0.0);
    }

    #[test]
    fn cone_energy_closed_form_and_quadrature() {
        let k = consts(0.0, 0.0);
        let u = cone(1.0);
        assert!((dirichlet_energy(&u, &k) - PI / 2.0).abs() < 1e-12);
        let q = dirichlet_energy_quadrature(&u, &k, &cfg()).unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn moser_energy_by_quadrature() {
        let k = consts(0.5, 0.25);
        for n in [1, 10, 40] {
            let m = moser_ball(n, &k).unwrap();
            let q = dirichlet_energy_quadrature(&m, &k, &cfg()).unwrap();
            assert!((q.value - 1.0).abs() < 1e-8, "n={n} {}", q.value);
        }
    }

    #[test]
    fn ball_and_halfline_forms_agree() {
        for (alpha, beta) in [(0.0, 0.0), (1.0, -0.5), (-0.5, 1.5)] {
            let k = consts(alpha, beta);
            let u = cone(0.6).dilated(0.8).unwrap();
            let a = k.a_sharp;
            let ball = mt_integral(&u, a, &k, &cfg()).unwrap().value;
            let half = mt_integral_halfline(&to_halfline(&u, &k), 0.8, a, &k, &cfg()).unwrap().value;
            assert!((ball - half).abs() < 1e-9 * ball.max(1.0), "{ball} vs {half}");
            let m = moser_ball(12, &k).unwrap();
            let ball = mt_integral(&m, a, &k, &cfg()).unwrap().value;
            let half = mt_integral_halfline(&to_halfline(&m, &k), 1.0, a, &k, &cfg()).unwrap().value;
            assert!((ball - half).abs() < 1e-9 * ball.max(1.0), "{ball} vs {half}");
        }
    }

    #[test]
    fn moser_lower_bound_at_sharp_constant() {
        let k = consts(0.0, 0.0);
        for n in [2u32, 10, 30] {
            let m = moser_ball(n, &k).unwrap();
            let v = mt_integral(&m, k.a_sharp, &k, &cfg()).unwrap().value;
            let lb = k.c_beta / 2.0 * (1.0 - (-f64::from(n)).exp());
            assert!(v >= lb, "n={n}");
        }
    }

    #[test]
    fn j_matches_i_identity() {
        let k = consts(0.0, 0.0);
        for n in [3u32, 9, 25] {
            let j = j_functional(&moser_ball(n, &k).unwrap(), &k, &cfg()).unwrap().j_value;
            let i = i_functional(&moser_halfline(n, &k.params).unwrap(), k.b_alpha, &cfg()).unwrap().i;
            assert!((j - j_over_i(&k) * i).abs() < 1e-9 * j, "n={n}");
        }
    }

    #[test]
    fn j_rejects_large_support() {
        let k = consts(0.0, 0.0);
        assert!(j_functional(&cone(1.0).dilated(2.0).unwrap(), &k, &cfg()).is_err());
    }

    #[test]
    fn overflow_guard() {
        let k = consts(0.0, 0.0);
        let r = mt_integral(&cone(20.0), k.a_sharp, &k, &cfg());
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }

    #[test]
    fn carleson_chang_value() {
        let closed = 2.0 / E * erfi_like() + E;
        assert!((closed - 3.794_441).abs() < 1e-6);
        let phi = carleson_chang_test(0.0).unwrap();
        let v = i_functional(&phi, 2.0, &cfg()).unwrap();
        assert!((v.i_plus_1 - closed).abs() < 1e-4, "{} vs {closed}", v.i_plus_1);
        assert!(v.i_plus_1 > 2.723 / E + E);
        // φ₀^{b_α} = f² for every α, so I+1 is the same at α = 1
        let phi1 = carleson_chang_test(1.0).unwrap();
        let v1 = i_functional(&phi1, 1.5, &cfg()).unwrap();
        assert!((v1.i_plus_1 - closed).abs() < 1e-4);
    }

    #[test]
    fn moser_i_limit() {
        // I+1 for the Moser profile at α=0 is the ramp ∫₀^n e^{s²/n - s} ds,
        // which tends to 2, plus 1 from the plateau
        let k = consts(0.0, 0.0);
        let v = i_functional(&moser_halfline(50, &k.params).unwrap(), 2.0, &cfg()).unwrap();
        let n = 50.0f64;
        let m = 200_000;
        let h = n / m as f64;
        let g = |s: f64| (s * s / n - s).exp();
        let mut ramp = 0.5 * (g(0.0) + g(n));
        for i in 1..m {
            ramp += g(i as f64 * h);
        }
        ramp *= h;
        let closed = ramp + 1.0;
        assert!((v.i_plus_1 - closed).abs() < 1e-6, "{} vs {closed}", v.i_plus_1);
        assert!((v.i_plus_1 - 3.0925).abs() < 1e-3);
        assert!(v.i_plus_1 < 1.0 + E);
    }

    #[test]
    fn onofri_basics() {
        let k = consts(0.0, 0.0);
        let z = onofri_check(&RadialProfile::zero(1.0).unwrap(), &k, &cfg()).unwrap();
        assert_eq!(z.zeta, 1.0);
        assert_eq!(z.lhs, f64::NEG_INFINITY);
        assert!(z.holds);
        let r = onofri_check(&cone(2.0), &k, &cfg()).unwrap();
        assert!(r.zeta > 1.0);
        assert!(r.lhs.is_finite());
        // independent evaluation of the integral: ∫(e^{2(1-ρ)} - ζ) ρ dρ · π
        let n = 20_000;
        let h = 1.0 / n as f64;
        let g = |x: f64| ((2.0 * (1.0 - x)).exp() - r.zeta) * x;
        let mut s = 0.5 * (g(0.0) + g(1.0));
        for i in 1..n {
            s += g(i as f64 * h);
        }
        let lhs = (PI * s * h).ln();
        assert!((lhs - r.lhs).abs() < 1e-6);
    }

    #[test]
    fn second_trudinger_basics() {
        let k = build_constants(WeightParams::new(0.0, 1.0).unwrap(), 1.0, 1.0).unwrap();
        let z = RadialProfile::zero(1.0).unwrap();
        let r = second_trudinger_check(&z, 1.0, &k, 1.0, &cfg()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds);
        let k0 = build_constants(WeightParams::new(-0.5, 0.0).unwrap(), 1.0, 1.0).unwrap();
        let r = second_trudinger_check(&z, 1.0, &k0, 1.0, &cfg()).unwrap();
        assert!((r.rhs - PI).abs() < 1e-12);
        let kbad = consts(1.0, 0.0);
        assert!(second_trudinger_check(&z, 1.0, &kbad, 1.0, &cfg()).is_err());
        let bump = RadialProfile::sample(vec![0.0, 0.3, 0.6, 1.0], |r| if r < 0.5 { 0.2 } else { 0.4 }).unwrap();
        assert!(second_trudinger_check(&bump, 1.0, &k, 1.0, &cfg()).is_err());
        assert!(second_trudinger_check(&z, 100.0, &k, 1.0, &cfg()).is_err());
    }

    #[test]
    fn el_residual_of_generic_profile_is_large() {
        let k = consts(0.0, 0.0);
        let u = cone(0.8);
        let r = el_residual(&u, &k, ElRhs::ShiftedExponential, &cfg()).unwrap();
        assert!(r.relative_residual > 0.1, "{r:?}");
        let t = el_terms(&u, &k, ElRhs::ShiftedExponential, &cfg()).unwrap();
        for f in [0.0, 0.5, 0.9, 0.99, 1.01, 1.1, 2.0] {
            assert!(t.residual_at(f * r.lambda_star) >= r.relative_residual - 1e-15);
        }
        let t2 = el_terms(&u.scaled(2.0).unwrap(), &k, ElRhs::ShiftedExponential, &cfg()).unwrap();
        assert!((t2.lambda_star() - r.lambda_star).abs() > 1e-6 * r.lambda_star.abs());
        let zero_inside = RadialProfile::sample(vec![0.0, 0.5, 1.0], |r| if r < 0.2 { 1.0 } else { 0.0 }).unwrap();
        assert!(el_residual(&zero_inside, &k, ElRhs::Exponential, &cfg()).is_err());
        let e = el_residual(&u, &k, ElRhs::Exponential, &cfg()).unwrap();
        assert!(e.relative_residual > 0.1);
    }
}
