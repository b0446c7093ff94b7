//! WebAssembly bindings for the browser demo. Every entry point takes plain
//! numbers and returns a JSON string.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mtweight::constants::{feasibility_scan, linspace, Feasibility};
use mtweight::extremal::{compare_with_concentration, maximize, GridSpec, SearchConfig, StartSpec};
use mtweight::functionals::mt_integral;
use mtweight::profiles::moser_ball;
use mtweight::verify::fit_slope;
use mtweight::{build_constants, QuadratureConfig, WeightParams};

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Serialize)]
pub struct SweepRow {
    pub n: u32,
    /// `None` when the integrand overflows.
    pub log_integral: Option<f64>,
    pub log_lower_bound: Option<f64>,
}

#[derive(Serialize)]
pub struct Sweep {
    pub a_sharp: f64,
    pub rows: Vec<SweepRow>,
    pub fitted_log_slope: Option<f64>,
}

/// `ln mt_integral(M_n)` at `a = a_factor · a_sharp` for `n = 1..=n_max`.
pub fn moser_sweep_impl(alpha: f64, beta: f64, a_factor: f64, n_max: u32) -> Result<Sweep, String> {
    if !(a_factor > 0.0) || n_max == 0 || n_max > 200 {
        return Err("need a_factor > 0 and 1 <= n_max <= 200".into());
    }
    let k = build_constants(WeightParams::new(alpha, beta).map_err(|e| e.to_string())?, 1.0, 1.0)
        .map_err(|e| e.to_string())?;
    let cfg = QuadratureConfig::default();
    let q = 2.0 + beta;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let u = moser_ball(n, &k).map_err(|e| e.to_string())?;
        let nf = f64::from(n);
        let lower = k.c_beta / q * (((a_factor - 1.0) * nf).exp() - (-nf).exp());
        rows.push(SweepRow {
            n,
            log_integral: mt_integral(&u, a_factor * k.a_sharp, &k, &cfg).ok().map(|e| e.value.ln()),
            log_lower_bound: (lower > 0.0).then(|| lower.ln()),
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= n_max / 2)
        .filter_map(|r| r.log_integral.map(|v| (f64::from(r.n), v)))
        .collect();
    Ok(Sweep {
        a_sharp: k.a_sharp,
        fitted_log_slope: (pts.len() >= 2).then(|| fit_slope(&pts)),
        rows,
    })
}

#[derive(Serialize)]
pub struct Extremal {
    pub best_i_plus_1: f64,
    pub best_start: String,
    pub ceiling_i_plus_1: f64,
    pub exceeds_ceiling: bool,
    pub energy: f64,
    /// Best profile sampled on its knots as `(s, f(s))`.
    pub profile: Vec<(f64, f64)>,
    pub starts: Vec<(String, f64, usize)>,
}

/// Extremal search on a coarse grid (`h = 0.1`, `s ≤ 40`) to keep the page
/// responsive. `c₀` is irrelevant to `I + 1` and is set to 1.
pub fn extremal_impl(alpha: f64, kappa: f64) -> Result<Extremal, String> {
    let k = build_constants(WeightParams::new(alpha, 0.0).map_err(|e| e.to_string())?, 1.0, 1.0)
        .map_err(|e| e.to_string())?;
    let cfg = SearchConfig {
        kappa,
        grid: GridSpec {
            h: 0.1,
            uniform_end: 12.0,
            stretch: 1.1,
            s_max: 40.0,
        },
        starts: vec![StartSpec::ZeroPerturbed, StartSpec::Phi0, StartSpec::Moser(5)],
        max_iters: 2000,
        conv_tol: 1e-8,
        ..SearchConfig::default()
    };
    let r = maximize(&k, &cfg).map_err(|e| e.to_string())?;
    let cmp = compare_with_concentration(&r, &k);
    let f = &r.best_profile;
    Ok(Extremal {
        best_i_plus_1: r.best_i_plus_1,
        best_start: r.best_start.to_string(),
        ceiling_i_plus_1: cmp.ceiling_i_plus_1,
        exceeds_ceiling: cmp.exceeds_ceiling,
        energy: r.energy,
        profile: f.knots().iter().copied().zip(f.values().iter().copied()).collect(),
        starts: r
            .per_start
            .iter()
            .map(|s| (s.start.to_string(), s.final_value, s.iterations))
            .collect(),
    })
}

pub fn feasibility_impl(
    alpha_min: f64,
    alpha_max: f64,
    alpha_steps: usize,
    sigma_min: f64,
    sigma_max: f64,
    sigma_steps: usize,
) -> Result<Vec<Feasibility>, String> {
    if !(alpha_min <= alpha_max && sigma_min <= sigma_max) || alpha_steps == 0 || sigma_steps == 0 {
        return Err("need min <= max and at least one step per axis".into());
    }
    if alpha_steps * sigma_steps > 40_000 {
        return Err("grid too large".into());
    }
    feasibility_scan(
        &linspace(alpha_min, alpha_max, alpha_steps),
        &linspace(sigma_min, sigma_max, sigma_steps),
    )
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn moser_sweep(alpha: f64, beta: f64, a_factor: f64, n_max: u32) -> Result<String, JsValue> {
    moser_sweep_impl(alpha, beta, a_factor, n_max).map(|v| to_json(&v)).map_err(js)
}

#[wasm_bindgen]
pub fn extremal(alpha: f64, kappa: f64) -> Result<String, JsValue> {
    extremal_impl(alpha, kappa).map(|v| to_json(&v)).map_err(js)
}

#[wasm_bindgen]
pub fn feasibility(
    alpha_min: f64,
    alpha_max: f64,
    alpha_steps: usize,
    sigma_min: f64,
    sigma_max: f64,
    sigma_steps: usize,
) -> Result<String, JsValue> {
    feasibility_impl(alpha_min, alpha_max, alpha_steps, sigma_min, sigma_max, sigma_steps)
        .map(|v| to_json(&v))
        .map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grows_above_the_sharp_constant() {
        let s = moser_sweep_impl(0.0, 0.0, 1.1, 40).unwrap();
        assert_eq!(s.rows.len(), 40);
        assert!((s.fitted_log_slope.unwrap() - 0.1).abs() < 0.01);
        assert!(moser_sweep_impl(0.0, 0.0, 0.0, 10).is_err());
    }

    #[test]
    fn coarse_extremal_still_beats_the_ceiling() {
        let e = extremal_impl(0.0, 1.0).unwrap();
        assert!(e.exceeds_ceiling, "{}", e.best_i_plus_1);
        assert!(e.energy <= 1.0 + 1e-9);
        assert_eq!(e.profile[0], (0.0, 0.0));
    }

    #[test]
    fn feasibility_grid_shape() {
        let g = feasibility_impl(0.0, 5.0, 6, 0.5, 3.0, 6).unwrap();
        assert_eq!(g.len(), 36);
        assert!(g.iter().all(|p| !p.feasible));
        assert!(feasibility_impl(1.0, 0.0, 2, 0.5, 1.0, 2).is_err());
    }
}
