//! Weight exponents and the closed-form constants derived from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_radial, QuadratureConfig};
use crate::special::ln_gamma;

/// Energy weight exponent `alpha`, measure weight exponent `beta`, and the
/// optional splitting parameter `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
}

impl WeightParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            sigma: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        let p = Self {
            sigma: Some(sigma),
            ..self
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!("alpha = {} must exceed -1", self.alpha)));
        }
        if !(self.beta > -1.0) || !self.beta.is_finite() {
            return Err(Error::domain(format!("beta = {} must exceed -1", self.beta)));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return Err(Error::domain(format!("sigma = {s} must be positive")));
            }
        }
        Ok(())
    }

    /// `(2+α)/(1+α)`, the exponent on `|u|` in the exponential integrand.
    pub fn b_alpha(&self) -> f64 {
        (2.0 + self.alpha) / (1.0 + self.alpha)
    }

    pub fn b_beta(&self) -> f64 {
        (2.0 + self.beta) / (1.0 + self.beta)
    }

    /// Energy exponent `2+α`.
    pub fn p(&self) -> f64 {
        2.0 + self.alpha
    }
}

/// `∫₀^π sin^α θ dθ` by quadrature.
///
/// Uses the symmetry about π/2 and factors `sin θ = θ · (sin θ / θ)` so the
/// endpoint behaviour is carried entirely by the weight `θ^α`.
pub fn angular_mass(alpha: f64, tol: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(Error::domain(format!(
            "alpha = {alpha} must exceed -1 for sin^alpha to be integrable"
        )));
    }
    let cfg = QuadratureConfig {
        abs_tol: 0.5 * tol,
        rel_tol: 1e-14,
        ..QuadratureConfig::default()
    };
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    let half = integrate_radial(|t| sinc(t).powf(alpha), alpha, 0.5 * PI, &cfg)?;
    Ok(2.0 * half.value)
}

/// `√π Γ((α+1)/2) / Γ(α/2+1)`, the Beta-function form of the angular mass.
pub fn angular_mass_beta(alpha: f64) -> f64 {
    PI.sqrt() * (ln_gamma(0.5 * (alpha + 1.0)) - ln_gamma(0.5 * alpha + 1.0)).exp()
}

/// The printed closed form with its extra factor 2.
pub fn angular_mass_printed(alpha: f64) -> f64 {
    2.0 * angular_mass_beta(alpha)
}

/// Every derived constant for a fixed [`WeightParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub params: WeightParams,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub b_alpha: f64,
    pub b_beta: f64,
    pub a_sharp: f64,
    /// Value of the sharp constant obtained from the doubled closed form.
    pub a_sharp_printed: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `None` when no sigma was given.
    pub c_sigma_alpha: Option<f64>,
    /// `None` unless `alpha < beta`.
    pub b_alpha_beta: Option<f64>,
    pub c_one: f64,
    pub c_zero: f64,
}

/// Tolerance used for the angular masses inside [`build_constants`].
pub const ANGULAR_TOL: f64 = 1e-12;

pub fn build_constants(params: WeightParams, c_zero: f64, c_one: f64) -> Result<ConstantsBundle> {
    params.validate()?;
    if !(c_zero > 0.0) {
        return Err(Error::domain(format!("c_zero = {c_zero} must be positive")));
    }
    if !(c_one > 0.0) {
        return Err(Error::domain(format!("c_one = {c_one} must be positive")));
    }
    let WeightParams { alpha, beta, sigma } = params;
    let c_alpha = angular_mass(alpha, ANGULAR_TOL)?;
    let c_beta = angular_mass(beta, ANGULAR_TOL)?;
    let a_sharp = (2.0 + beta) * c_alpha.powf(1.0 / (1.0 + alpha));
    let a_sharp_printed = (2.0 + beta) * angular_mass_printed(alpha).powf(1.0 / (1.0 + alpha));
    let t = (2.0 + beta) * (c_alpha / (2.0 + beta)).powf(1.0 / (2.0 + alpha));
    let c_sigma_alpha = sigma.map(|s| splitting_constant(s, alpha)).transpose()?;
    let b_alpha_beta = (alpha < beta).then(|| b_alpha_beta_from(c_alpha, alpha, beta));
    Ok(ConstantsBundle {
        params,
        c_alpha,
        c_beta,
        b_alpha: params.b_alpha(),
        b_beta: params.b_beta(),
        a_sharp,
        a_sharp_printed,
        t,
        c_sigma_alpha,
        b_alpha_beta,
        c_one,
        c_zero,
    })
}

impl ConstantsBundle {
    /// Weighted measure of the unit half-disk, `c_β/(2+β)`.
    pub fn m_beta_ball(&self) -> f64 {
        self.c_beta / (2.0 + self.params.beta)
    }

    /// Weighted measure of the half-disk of radius `r`.
    pub fn m_beta(&self, r: f64) -> f64 {
        self.m_beta_ball() * r.powf(2.0 + self.params.beta)
    }

    pub fn with_c_zero(self, c_zero: f64) -> Result<Self> {
        if !(c_zero > 0.0) {
            return Err(Error::domain(format!("c_zero = {c_zero} must be positive")));
        }
        Ok(Self { c_zero, ..self })
    }
}

fn b_alpha_beta_from(c_alpha: f64, alpha: f64, beta: f64) -> f64 {
    let e1 = (1.0 + alpha) * (2.0 + beta) / ((2.0 + alpha) * (1.0 + beta));
    let e2 = (2.0 + beta) / ((2.0 + alpha) * (1.0 + beta));
    (2.0 + beta).powf(e1) * c_alpha.powf(e2)
}

/// `(1-(1+ς)^{-1-α})^{-1/(1+α)}`; `ς = +∞` gives 1.
pub fn splitting_constant(sigma: f64, alpha: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must exceed -1")));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain(format!(
            "sigma = {sigma} must be positive for the splitting constant to be real"
        )));
    }
    if sigma.is_infinite() {
        return Ok(1.0);
    }
    let q = 1.0 + alpha;
    // 1 - (1+ς)^{-q} computed without cancellation for small ς
    let inner = -(-q * sigma.ln_1p()).exp_m1();
    Ok(inner.powf(-1.0 / q))
}

pub fn second_trudinger_constant(params: &WeightParams) -> Result<f64> {
    params.validate()?;
    if !(params.alpha < params.beta) {
        return Err(Error::domain(format!(
            "requires alpha < beta (got alpha = {}, beta = {})",
            params.alpha, params.beta
        )));
    }
    let c_alpha = angular_mass(params.alpha, ANGULAR_TOL)?;
    Ok(b_alpha_beta_from(c_alpha, params.alpha, params.beta))
}

/// Energy norm of the Carleson–Chang type test function, in closed form.
pub fn gamma_phi0(alpha: f64) -> f64 {
    let r = (1.0 + alpha) / (2.0 + alpha);
    r.powf(r) * 2f64.powf(1.0 / (2.0 + alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub alpha: f64,
    pub sigma: f64,
    pub gamma_phi0: f64,
    /// `1/c_{ς,α}`; the test function is admissible when `gamma_phi0 ≤ bound`.
    pub bound: f64,
    /// `(1+ς)/c_{ς,α}`; the ceiling estimate needs this below 1.
    pub growth_ratio: f64,
    pub feasible: bool,
}

pub fn test_function_feasibility(alpha: f64, sigma: f64) -> Result<Feasibility> {
    let c = splitting_constant(sigma, alpha)?;
    let gamma_phi0 = gamma_phi0(alpha);
    let bound = 1.0 / c;
    let growth_ratio = (1.0 + sigma) / c;
    Ok(Feasibility {
        alpha,
        sigma,
        gamma_phi0,
        bound,
        growth_ratio,
        feasible: gamma_phi0 <= bound && growth_ratio < 1.0,
    })
}

/// Evaluates [`test_function_feasibility`] on the tensor grid `alphas × sigmas`,
/// alpha-major.
pub fn feasibility_scan(alphas: &[f64], sigmas: &[f64]) -> Result<Vec<Feasibility>> {
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| sigmas.iter().map(move |&s| (a, s)))
        .collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|&(a, s)| test_function_feasibility(a, s))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points
            .iter()
            .map(|&(a, s)| test_function_feasibility(a, s))
            .collect()
    }
}

/// `n` evenly spaced points on `[lo, hi]` (one point when `n == 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn angular_mass_trivial_values() {
        assert!((angular_mass(0.0, 1e-12).unwrap() - PI).abs() < 1e-12);
        assert!((angular_mass(1.0, 1e-12).unwrap() - 2.0).abs() < 1e-12);
        assert!((angular_mass(2.0, 1e-12).unwrap() - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn angular_mass_matches_beta_form() {
        for alpha in [-0.5, 0.0, 0.5, 1.0, 2.0, 5.0, -0.9] {
            let q = angular_mass(alpha, 1e-10).unwrap();
            assert!((q - angular_mass_beta(alpha)).abs() < 1e-8, "alpha={alpha}");
        }
    }

    #[test]
    fn angular_mass_rejects_nonintegrable() {
        assert!(matches!(angular_mass(-1.0, 1e-8), Err(Error::Domain(_))));
    }

    #[test]
    fn sharp_constant_examples() {
        let k = build_constants(WeightParams::new(0.0, 0.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(rel(k.a_sharp, 2.0 * PI) < 1e-13);
        assert!(rel(k.a_sharp_printed, 4.0 * PI) < 1e-13);
        assert!(rel(k.t, (2.0 * PI).sqrt()) < 1e-13);
        assert!(rel(k.m_beta_ball(), 0.5 * PI) < 1e-13);
        let k = build_constants(WeightParams::new(1.0, 0.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(rel(k.a_sharp, 2.0 * 2f64.sqrt()) < 1e-13);
        assert!(k.c_sigma_alpha.is_none());
        assert!(k.b_alpha_beta.is_none());
    }

    #[test]
    fn bundle_validation() {
        let p = WeightParams::new(0.0, 0.0).unwrap();
        assert!(build_constants(p, 0.0, 1.0).is_err());
        assert!(build_constants(p, 1.0, -1.0).is_err());
        assert!(WeightParams::new(-1.0, 0.0).is_err());
        assert!(WeightParams::new(0.0, -1.5).is_err());
        assert!(p.with_sigma(0.0).is_err());
        let k = build_constants(p.with_sigma(1.0).unwrap(), 1.0, 1.0).unwrap();
        assert_eq!(k.c_sigma_alpha, Some(2.0));
    }

    #[test]
    fn splitting_constant_examples() {
        assert!((splitting_constant(1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(splitting_constant(f64::INFINITY, 0.0).unwrap(), 1.0);
        assert!((splitting_constant(1e12, 0.0).unwrap() - 1.0).abs() < 1e-11);
        assert!((splitting_constant(1.0, 1.0).unwrap() - (0.75f64).powf(-0.5)).abs() < 1e-14);
        assert!(splitting_constant(-0.5, 0.0).is_err());
        assert!(splitting_constant(1.0, -1.0).is_err());
    }

    #[test]
    fn second_trudinger_examples() {
        let v = second_trudinger_constant(&WeightParams::new(0.0, 1.0).unwrap()).unwrap();
        assert!(rel(v, (3.0 * PI).powf(0.75)) < 1e-12);
        let v = second_trudinger_constant(&WeightParams::new(1.0, 2.0).unwrap()).unwrap();
        assert!(rel(v, 2f64.powf(20.0 / 9.0)) < 1e-12);
        assert!(second_trudinger_constant(&WeightParams::new(1.0, 1.0).unwrap()).is_err());
        // near-diagonal continuity against T^{b_β}
        let p = WeightParams::new(0.0, 1e-4).unwrap();
        let k = build_constants(p, 1.0, 1.0).unwrap();
        let v = second_trudinger_constant(&p).unwrap();
        assert!(rel(v, k.t.powf(k.b_beta)) < 1e-12);
        assert!(rel(v, k.a_sharp.powf(k.b_beta / k.b_alpha)) < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let f = test_function_feasibility(0.0, 1.0).unwrap();
        assert!((f.gamma_phi0 - 1.0).abs() < 1e-15);
        assert!((f.bound - 0.5).abs() < 1e-15);
        assert!(!f.feasible);
        let f = test_function_feasibility(1.0, 3.0).unwrap();
        assert!((f.gamma_phi0 - 0.961_499_5).abs() < 1e-6);
        let f = test_function_feasibility(0.0, 1e15).unwrap();
        assert!((f.bound - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_thresholds_at_alpha_one() {
        // first hypothesis needs (1+ς)^2 ≥ 1/(1-Γ²), second needs (1+ς)^2 < 2
        let g2 = gamma_phi0(1.0).powi(2);
        let s_first = (1.0 / (1.0 - g2)).sqrt() - 1.0;
        assert!((s_first - 2.64).abs() < 0.01);
        let below = test_function_feasibility(1.0, s_first - 1e-6).unwrap();
        let above = test_function_feasibility(1.0, s_first + 1e-6).unwrap();
        assert!(below.gamma_phi0 > below.bound);
        assert!(above.gamma_phi0 <= above.bound);
        assert!(above.growth_ratio > 1.0);
        let s_second = 2f64.sqrt() - 1.0;
        assert!(test_function_feasibility(1.0, s_second - 1e-9).unwrap().growth_ratio < 1.0);
    }

    #[test]
    fn scan_is_alpha_major() {
        let rows = feasibility_scan(&[0.0, 1.0], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[4].alpha, rows[4].sigma), (1.0, 1.0));
        assert!(rows.iter().all(|r| !r.feasible));
    }

    proptest! {
        #[test]
        fn t_power_is_sharp_constant(alpha in -0.9f64..5.0, beta in -0.9f64..5.0) {
            let k = build_constants(WeightParams::new(alpha, beta).unwrap(), 1.0, 1.0).unwrap();
            prop_assert!(rel(k.t.powf(k.b_alpha), k.a_sharp) < 1e-12);
        }

        #[test]
        fn b_alpha_beta_is_t_power(alpha in -0.9f64..4.0, gap in 0.01f64..3.0) {
            let beta = alpha + gap;
            let k = build_constants(WeightParams::new(alpha, beta).unwrap(), 1.0, 1.0).unwrap();
            prop_assert!(rel(k.b_alpha_beta.unwrap(), k.t.powf(k.b_beta)) < 1e-10);
        }

        #[test]
        fn splitting_constant_monotone(alpha in -0.95f64..6.0, s in 1e-3f64..50.0, ds in 1e-3f64..10.0) {
            let a = splitting_constant(s, alpha).unwrap();
            let b = splitting_constant(s + ds, alpha).unwrap();
            prop_assert!(a >= 1.0 && b >= 1.0);
            prop_assert!(b <= a);
        }
    }
}
