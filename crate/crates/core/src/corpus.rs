//! Seeded profile corpus and the empirical estimate of the normalization
//! constant `c₀`.
//!
//! `c₀` bounds `(1/(2+β)) ∫₀^∞ (e^{|v|^{b_α}} - 1) e^{-s} ds` over half-line
//! images `v` of admissible profiles. No closed form is known, so the
//! estimate is the largest value found on the corpus: a lower bound for the
//! true constant that makes every corpus-based inequality check consistent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::ConstantsBundle;
use crate::error::{Error, Result};
use crate::functionals::{i_functional, radial_integral};
use crate::profiles::{carleson_chang_test, from_halfline, moser_ball, to_halfline, RadialProfile};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMember {
    pub name: String,
    pub profile: RadialProfile,
    /// For members built for the second Trudinger-type inequality: the
    /// radius `R₀` with `T u(R₀) = 1`.
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub random_members: usize,
    pub moser_max: u32,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 2024,
            random_members: 24,
            moser_max: 40,
        }
    }
}

/// A random piecewise-linear profile on `[0, 1]` with `u(1) = 0`.
///
/// Monotone profiles are built from nonnegative decrements; others from
/// values drawn independently in `[0, 1)`.
pub fn random_profile<R: Rng>(rng: &mut R, monotone: bool) -> Result<RadialProfile> {
    let n = rng.random_range(3..12);
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.02..0.98)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut knots = vec![0.0];
    knots.extend(cuts);
    knots.push(1.0);
    let m = knots.len();
    let mut values = vec![0.0; m];
    if monotone {
        for i in (0..m - 1).rev() {
            values[i] = values[i + 1] + rng.random_range(0.0..1.0);
        }
    } else {
        for v in values.iter_mut().take(m - 1) {
            *v = rng.random_range(0.0..1.0);
        }
    }
    RadialProfile::linear(knots, values)
}

/// `u` scaled to unit energy; `None` for the zero profile.
pub fn normalized(u: &RadialProfile, consts: &ConstantsBundle) -> Result<Option<RadialProfile>> {
    let e = u.energy(consts.params.alpha, consts.c_alpha);
    if !(e > 0.0) {
        return Ok(None);
    }
    u.scaled(e.powf(-1.0 / (2.0 + consts.params.alpha))).map(Some)
}

/// A nonincreasing profile with `T u(R₀) = 1`, energy `θ ≤ 1` on `B_{R₀}`,
/// falling linearly to 0 at radius 1.
fn restricted_member<R: Rng>(rng: &mut R, consts: &ConstantsBundle) -> Result<(RadialProfile, f64)> {
    let alpha = consts.params.alpha;
    let p = 2.0 + alpha;
    let r0 = rng.random_range(0.2..0.9);
    let theta = rng.random_range(0.05..1.0);
    let n = rng.random_range(1..6);
    let mut inner: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..r0)).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut knots = vec![0.0];
    knots.extend(inner.into_iter().filter(|&k| k > 1e-3 && k < r0 - 1e-3));
    knots.push(r0);
    let m = knots.len();
    // random nonnegative increments inward from R₀, then scaled to energy θ
    let mut incr: Vec<f64> = (0..m - 1).map(|_| rng.random_range(0.0..1.0)).collect();
    if incr.iter().all(|&x| x == 0.0) {
        incr[0] = 1.0;
    }
    let base = 1.0 / consts.t;
    let mut values = vec![0.0; m];
    for i in (0..m - 1).rev() {
        values[i] = values[i + 1] + incr[i];
    }
    let shape = RadialProfile::linear(knots.clone(), values.clone())?;
    let e = shape.energy(alpha, consts.c_alpha);
    let lam = (theta / e).powf(1.0 / p);
    let mut vals: Vec<f64> = values.iter().map(|v| base + lam * v).collect();
    let mut ks = knots;
    if r0 < 1.0 {
        ks.push(1.0);
        vals.push(0.0);
    }
    Ok((RadialProfile::linear(ks, vals)?, r0))
}

/// The built-in corpus: normalized random monotone and non-monotone
/// profiles, the Moser functions, the normalized ball image of `φ₀`, and
/// (when `α < β`) members for the second Trudinger-type inequality.
pub fn build_corpus(consts: &ConstantsBundle, spec: &CorpusSpec) -> Result<Vec<CorpusMember>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    for i in 0..spec.random_members {
        let monotone = i % 2 == 0;
        let u = random_profile(&mut rng, monotone)?;
        if let Some(u) = normalized(&u, consts)? {
            let kind = if monotone { "monotone" } else { "generic" };
            out.push(CorpusMember {
                name: format!("random-{kind}-{i}"),
                profile: u,
                r0: None,
            });
        }
    }
    for n in 1..=spec.moser_max {
        out.push(CorpusMember {
            name: format!("moser-{n}"),
            profile: moser_ball(n, consts)?,
            r0: None,
        });
    }
    let phi = from_halfline(&carleson_chang_test(consts.params.alpha)?, consts, 1.0)?;
    if let Some(u) = normalized(&phi, consts)? {
        out.push(CorpusMember {
            name: "phi0".into(),
            profile: u,
            r0: None,
        });
    }
    if consts.params.alpha < consts.params.beta {
        for i in 0..spec.random_members {
            let (u, r0) = restricted_member(&mut rng, consts)?;
            out.push(CorpusMember {
                name: format!("restricted-{i}"),
                profile: u,
                r0: Some(r0),
            });
        }
    }
    Ok(out)
}

/// `∫₀^∞ (e^{|v|^{b_α}} - 1) e^{-s} ds` for the member's half-line image on
/// its support (or on `B_{R₀}` for restricted members).
pub fn member_i(m: &CorpusMember, consts: &ConstantsBundle, cfg: &QuadratureConfig) -> Result<f64> {
    match m.r0 {
        None => Ok(i_functional(&to_halfline(&m.profile, consts), consts.b_alpha, cfg)?.i),
        Some(r0) => {
            let q = 2.0 + consts.params.beta;
            let (a, b) = (consts.a_sharp, consts.b_alpha);
            let e = radial_integral(&m.profile, |x| (a * x.powf(b)).exp_m1(), q - 1.0, r0, cfg)?;
            Ok(q * e.value / r0.powf(q))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Estimate {
    pub c_zero: f64,
    pub argmax: String,
    pub members: usize,
    pub spec: CorpusSpec,
}

/// Largest `I/(2+β)` over the corpus.
pub fn estimate_c0(consts: &ConstantsBundle, spec: &CorpusSpec, cfg: &QuadratureConfig) -> Result<C0Estimate> {
    let corpus = build_corpus(consts, spec)?;
    estimate_c0_on(&corpus, consts, cfg).map(|(c, name)| C0Estimate {
        c_zero: c,
        argmax: name,
        members: corpus.len(),
        spec: *spec,
    })
}

pub fn estimate_c0_on(corpus: &[CorpusMember], consts: &ConstantsBundle, cfg: &QuadratureConfig) -> Result<(f64, String)> {
    let q = 2.0 + consts.params.beta;
    let mut best = (f64::NEG_INFINITY, String::new());
    for m in corpus {
        let v = member_i(m, consts, cfg)? / q;
        if v > best.0 {
            best = (v, m.name.clone());
        }
    }
    if !(best.0 > 0.0) {
        return Err(Error::domain("corpus gives no positive estimate"));
    }
    Ok(best)
}
