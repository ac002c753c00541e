//! Plurisubharmonic surrogates.
//!
//! Every surrogate is a finite maximum of plurisubharmonic pieces, each shifted by a
//! constant that is a proven lower bound of the corresponding infimum. The surrogates are
//! therefore plurisubharmonic, lie below the ideal envelopes, and inherit their upper
//! bounds exactly.

use std::f64::consts::{E, LN_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::cones::Cone;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{circle_mean, uniform_norm, CIRCLE_POINTS};
use crate::profiles::Profile;
use crate::weights::WeightSpec;

/// Value returned at zeros of the sine.
pub const THETA_FLOOR: f64 = -1e12;

/// `log |sin w|`, stable for large `|Im w|`.
fn ln_abs_sin(w: Complex64) -> f64 {
    let (u, v) = (w.re, w.im.abs());
    if v < 1.0 {
        let s = u.sin();
        let sh = v.sinh();
        0.5 * (s * s + sh * sh).ln()
    } else {
        let e = (-2.0 * v).exp();
        v - LN_2 + 0.5 * (e * e - 2.0 * e * (2.0 * u).cos()).ln_1p()
    }
}

/// `log |sin w / w|`.
fn ln_abs_sinc(w: Complex64) -> f64 {
    if w.norm_sqr() < 0.25 {
        let w2 = w * w;
        let s = 1.0 - w2 / 6.0 * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0 * (1.0 - w2 / 72.0 * (1.0 - w2 / 110.0))));
        s.norm().ln()
    } else {
        ln_abs_sin(w) - w.norm().ln()
    }
}

fn near_sine_zero(w: Complex64) -> bool {
    let m = (w.re / PI).round();
    m != 0.0 && (w.re - m * PI).abs() <= 1e-12 * w.re.abs().max(1.0) && w.im.abs() <= 1e-12
}

/// `Theta_a(z) = a log |sin(z/a) / (z/a)|`, with `Theta_a(0) = 0` and sine zeros clamped
/// to [`THETA_FLOOR`].
pub fn theta_eval(a: f64, z: Complex64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("Theta needs a > 0, got {a}")));
    }
    Ok(theta(a, z))
}

#[inline]
pub(crate) fn theta(a: f64, z: Complex64) -> f64 {
    let w = z / a;
    if near_sine_zero(w) {
        return THETA_FLOOR;
    }
    let v = a * ln_abs_sinc(w);
    if v.is_finite() && v > THETA_FLOOR {
        v
    } else {
        THETA_FLOOR
    }
}

/// `Phi_a(z) = sum_j Theta_a(z_j)`.
pub fn phi_eval(a: f64, z: &[Complex64]) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("Phi needs a > 0, got {a}")));
    }
    Ok(z.iter().map(|&w| theta(a, w)).sum())
}

/// `max(log r, 0)`.
pub fn log_plus(r: f64) -> f64 {
    if r > 1.0 {
        r.ln()
    } else {
        0.0
    }
}

/// Evaluation interface shared by all surrogates.
pub trait Surrogate {
    fn k(&self) -> usize;
    fn value(&self, z: &[Complex64]) -> f64;

    fn eval(&self, z: &[Complex64]) -> Result<f64> {
        check_dim(self.k(), z.len())?;
        Ok(self.value(z))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaCandidate {
    pub a: f64,
    pub xi: Vec<f64>,
    /// `a log+(delta_U(xi) / a)`.
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaConfig {
    pub a_min: f64,
    pub a_max: f64,
    pub a_count: usize,
    /// Points per axis of the uniform `xi` grid in the cube `|xi| <= R`; `None` picks 21
    /// for `k = 1` and 9 otherwise.
    pub xi_per_axis: Option<usize>,
    /// Real probes whose witnesses `(delta_U(x)/e, x)` join the candidate set.
    pub probes: Vec<Vec<f64>>,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig { a_min: 2f64.powi(-10), a_max: 2f64.powi(10), a_count: 41, xi_per_axis: None, probes: Vec::new() }
    }
}

impl SigmaConfig {
    pub fn with_probes(mut self, probes: Vec<Vec<f64>>) -> Self {
        self.probes = probes;
        self
    }

    /// Fewer candidates for grid-wide evaluation.
    pub fn light() -> Self {
        SigmaConfig { a_min: 2f64.powi(-4), a_max: 2f64.powi(4), a_count: 9, xi_per_axis: Some(9), probes: Vec::new() }
    }
}

/// `max_{(a, xi)} Phi_a(z - xi) + a log+(delta_U(xi) / a)` over a finite candidate set.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaSurrogate {
    pub cone: Cone,
    pub r: f64,
    pub candidates: Vec<SigmaCandidate>,
}

pub fn sigma_r_build(cone: &Cone, r: f64, cfg: &SigmaConfig) -> Result<SigmaSurrogate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    if !(cfg.a_min > 0.0 && cfg.a_max >= cfg.a_min && cfg.a_count >= 1) {
        return Err(Error::domain("bad a-grid for sigma candidates"));
    }
    let k = cone.dim();
    let n = cfg.xi_per_axis.unwrap_or(if k == 1 { 21 } else { 9 }).max(1);
    let a_grid: Vec<f64> = if cfg.a_count == 1 {
        vec![cfg.a_min]
    } else {
        let (l0, l1) = (cfg.a_min.ln(), cfg.a_max.ln());
        (0..cfg.a_count).map(|i| (l0 + (l1 - l0) * i as f64 / (cfg.a_count - 1) as f64).exp()).collect()
    };
    let axis: Vec<f64> =
        if n == 1 { vec![0.0] } else { (0..n).map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64).collect() };
    let total = n.pow(k as u32);
    let mut candidates = Vec::with_capacity(total * a_grid.len() + cfg.probes.len());
    for flat in 0..total {
        let mut rest = flat;
        let mut xi = vec![0.0; k];
        for c in xi.iter_mut().rev() {
            *c = axis[rest % n];
            rest /= n;
        }
        let d = cone.distance_unchecked(&xi);
        for &a in &a_grid {
            candidates.push(SigmaCandidate { a, xi: xi.clone(), term: a * log_plus(d / a) });
        }
    }
    for x in &cfg.probes {
        check_dim(k, x.len())?;
        if uniform_norm(x) > r {
            continue;
        }
        let d = cone.distance_unchecked(x);
        let a = if d > 0.0 { d / E } else { 1.0 };
        candidates.push(SigmaCandidate { a, xi: x.clone(), term: a * log_plus(d / a) });
    }
    Ok(SigmaSurrogate { cone: cone.clone(), r, candidates })
}

impl Surrogate for SigmaSurrogate {
    fn k(&self) -> usize {
        self.cone.dim()
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for c in &self.candidates {
            let mut v = c.term;
            for (zj, xj) in z.iter().zip(&c.xi) {
                v += theta(c.a, Complex64::new(zj.re - xj, zj.im));
            }
            if v > best {
                best = v;
            }
        }
        best
    }
}

/// Worst violations of the sigma bounds on a sample; all fields are `<= 0` on success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SigmaBounds {
    /// `max sigma(z) - k|y| - R`.
    pub upper_r: f64,
    /// `max sigma(z) - k|y| - delta_U(x)`.
    pub upper_delta: f64,
    /// `max delta_U(x)/e - sigma(x)` over real probes with `|x| <= R`.
    pub lower: f64,
}

impl SigmaSurrogate {
    pub fn check_bounds(&self, points: &[Vec<Complex64>], probes: &[Vec<f64>]) -> SigmaBounds {
        let k = self.k() as f64;
        let mut out =
            SigmaBounds { upper_r: f64::NEG_INFINITY, upper_delta: f64::NEG_INFINITY, lower: f64::NEG_INFINITY };
        for z in points {
            let s = self.value(z);
            let y = z.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
            let x: Vec<f64> = z.iter().map(|c| c.re).collect();
            out.upper_r = out.upper_r.max(s - k * y - self.r);
            out.upper_delta = out.upper_delta.max(s - k * y - self.cone.distance_unchecked(&x));
        }
        for x in probes.iter().filter(|x| uniform_norm(x) <= self.r) {
            let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            out.lower = out.lower.max(self.cone.distance_unchecked(x) / E - self.value(&z));
        }
        out
    }
}

/// An entire function of one variable with `|phi(x+iy)| <= exp(beta(B0|y|) - alpha(|x|/A0))`.
#[derive(Clone)]
pub struct EntireSeed {
    pub name: String,
    pub a0: f64,
    pub b0: f64,
    log_abs: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
}

impl fmt::Debug for EntireSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntireSeed").field("name", &self.name).field("a0", &self.a0).field("b0", &self.b0).finish()
    }
}

impl EntireSeed {
    /// `log_abs(w)` must return `log |phi(w)|`.
    pub fn new(
        name: impl Into<String>,
        a0: f64,
        b0: f64,
        log_abs: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a0 > 0.0 && b0 > 0.0) {
            return Err(Error::domain("A0 and B0 must be positive"));
        }
        Ok(EntireSeed { name: name.into(), a0, b0, log_abs: Arc::new(log_abs) })
    }

    /// `exp(-z^2)` with `A0 = B0 = 1`: `|phi| = exp(y^2 - x^2)`.
    pub fn gaussian() -> Self {
        EntireSeed::new("exp(-z^2)", 1.0, 1.0, |w: Complex64| w.im * w.im - w.re * w.re).expect("positive constants")
    }

    pub fn log_abs(&self, w: Complex64) -> f64 {
        (self.log_abs)(w)
    }

    /// Checks the growth bound on `|x|, |y| <= extent` and `phi(0) != 0`.
    pub fn verify(&self, alpha: &Profile, beta: &Profile, extent: f64, n: usize) -> Result<()> {
        let l0 = self.log_abs(Complex64::new(0.0, 0.0));
        if !(l0 > f64::NEG_INFINITY) {
            return Err(Error::Seed(format!("{} vanishes at 0; divide out the zero at the origin first", self.name)));
        }
        for i in 0..n {
            for j in 0..n {
                let x = -extent + 2.0 * extent * i as f64 / (n - 1).max(1) as f64;
                let y = -extent + 2.0 * extent * j as f64 / (n - 1).max(1) as f64;
                let lhs = self.log_abs(Complex64::new(x, y));
                let rhs = beta.value(self.b0 * y.abs()) - alpha.value(x.abs() / self.a0);
                if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
                    return Err(Error::Seed(format!(
                        "{} violates its growth bound at {x} + {y}i by {:.3e}",
                        self.name,
                        lhs - rhs
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedVariant {
    General,
    ConcaveAlpha,
}

/// Rescaling of the seed and profiles: `phi~(w) = phi(arg_scale w)`,
/// `alpha~(s) = alpha(alpha_scale s)`, `beta~(s) = beta(beta_scale s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedScaling {
    pub arg_scale: f64,
    pub alpha_scale: f64,
    pub beta_scale: f64,
}

impl SeedScaling {
    /// The seed used as is: `alpha~(s) = alpha(s / A0)`, `beta~(s) = beta(B0 s)`.
    pub fn unit(seed: &EntireSeed) -> Self {
        SeedScaling { arg_scale: 1.0, alpha_scale: 1.0 / seed.a0, beta_scale: seed.b0 }
    }

    /// `phi~(w) = phi(A0 w / A')`, which satisfies the growth bound with
    /// `alpha~(s) = alpha(s / A')` and `beta~(s) = beta(A0 B0 s / A')`.
    pub fn for_weight(seed: &EntireSeed, a_prime: f64) -> Self {
        let c = seed.a0 / a_prime;
        SeedScaling { arg_scale: c, alpha_scale: c / seed.a0, beta_scale: seed.b0 * c }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedConfig {
    /// Half-widths of the `zeta` grid along real and imaginary directions.
    pub re_half_width: f64,
    pub im_half_width: f64,
    /// Grid nodes per real and imaginary axis.
    pub re_count: usize,
    pub im_count: usize,
    /// Additional translations, typically the evaluation points themselves.
    pub extra: Vec<Vec<Complex64>>,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig { re_half_width: 6.0, im_half_width: 2.0, re_count: 25, im_count: 9, extra: Vec::new() }
    }
}

impl SeedConfig {
    pub fn with_extra(mut self, extra: Vec<Vec<Complex64>>) -> Self {
        self.extra = extra;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedCandidate {
    pub zeta: Vec<Complex64>,
    /// Certified lower bound of the inner infimum at `zeta`.
    pub term: f64,
}

/// `max_zeta Phi(z - zeta) + m(zeta)` with `Phi(z) = sum_j log |phi~(c z_j)|`, `c = 2` for the
/// general variant and `c = 1` for concave `alpha`.
#[derive(Clone, Debug, Serialize)]
pub struct SeedEnvelope {
    #[serde(skip)]
    pub seed: EntireSeed,
    pub seed_name: String,
    pub variant: SeedVariant,
    pub scaling: SeedScaling,
    pub alpha: Profile,
    pub beta: Profile,
    pub k: usize,
    /// `-k log |phi(0)|`.
    pub h: f64,
    pub candidates: Vec<SeedCandidate>,
}

pub fn seed_envelope_build(
    seed: &EntireSeed,
    variant: SeedVariant,
    alpha: &Profile,
    beta: &Profile,
    k: usize,
    scaling: SeedScaling,
    cfg: &SeedConfig,
) -> Result<SeedEnvelope> {
    if k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    let (alpha, beta) = (alpha.normalized(), beta.normalized());
    seed.verify(&alpha, &beta, 5.0, 41)?;
    if variant == SeedVariant::ConcaveAlpha && !alpha.is_concave() {
        return Err(Error::precondition("the concave variant needs a concave alpha"));
    }
    let mut env = SeedEnvelope {
        seed: seed.clone(),
        seed_name: seed.name.clone(),
        variant,
        scaling,
        alpha,
        beta,
        k,
        h: 0.0 - (k as f64) * seed.log_abs(Complex64::new(0.0, 0.0)),
        candidates: Vec::new(),
    };
    let re = linspace(cfg.re_half_width, cfg.re_count);
    let im = linspace(cfg.im_half_width, cfg.im_count);
    let per = re.len() * im.len();
    let total = per.pow(k as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut zeta = vec![Complex64::new(0.0, 0.0); k];
        for c in zeta.iter_mut().rev() {
            let cell = rest % per;
            rest /= per;
            *c = Complex64::new(re[cell / im.len()], im[cell % im.len()]);
        }
        let term = env.certified_m(&zeta);
        env.candidates.push(SeedCandidate { zeta, term });
    }
    for zeta in &cfg.extra {
        check_dim(k, zeta.len())?;
        let term = env.certified_m(zeta);
        env.candidates.push(SeedCandidate { zeta: zeta.clone(), term });
    }
    Ok(env)
}

fn linspace(half: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect()
}

impl SeedEnvelope {
    fn alpha_t(&self, s: f64) -> f64 {
        self.alpha.value(self.scaling.alpha_scale * s)
    }

    fn beta_t(&self, s: f64) -> f64 {
        self.beta.value(self.scaling.beta_scale * s)
    }

    fn inner_factor(&self) -> f64 {
        match self.variant {
            SeedVariant::General => 2.0,
            SeedVariant::ConcaveAlpha => 1.0,
        }
    }

    fn phi(&self, z: &[Complex64], zeta: &[Complex64]) -> f64 {
        let c = self.inner_factor() * self.scaling.arg_scale;
        z.iter().zip(zeta).map(|(a, b)| self.seed.log_abs(c * (a - b))).sum()
    }

    /// `-alpha~(2|xi|) - k beta~(4|eta|)` (general) or `-alpha~(|xi|) - k beta~(2|eta|)`.
    fn certified_m(&self, zeta: &[Complex64]) -> f64 {
        let xi = zeta.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
        let eta = zeta.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        let c = self.inner_factor();
        -self.alpha_t(c * xi) - self.k as f64 * self.beta_t(2.0 * c * eta)
    }

    /// `(lower, upper)` of the sandwich at `z`, the lower one without `H`.
    pub fn sandwich(&self, z: &[Complex64]) -> (f64, f64) {
        let x = z.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
        let y = z.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        let c = self.inner_factor();
        let kb = self.k as f64 * self.beta_t(2.0 * c * y);
        (-self.alpha_t(c * x) - kb, kb - self.alpha_t(x))
    }

    /// Worst `(lower - H - value, value - upper)` over the points.
    pub fn check_sandwich(&self, points: &[Vec<Complex64>]) -> (f64, f64) {
        points.iter().fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
            let v = self.value(z);
            let (l, u) = self.sandwich(z);
            (lo.max(l - self.h - v), hi.max(v - u))
        })
    }
}

impl Surrogate for SeedEnvelope {
    fn k(&self) -> usize {
        self.k
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        self.candidates.iter().map(|c| self.phi(z, &c.zeta) + c.term).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RhoConfig {
    pub sigma: SigmaConfig,
    pub seed: SeedConfig,
}

impl RhoConfig {
    pub fn light() -> Self {
        RhoConfig { sigma: SigmaConfig::light(), seed: SeedConfig::default() }
    }

    /// Adds the points themselves as witnesses: their real parts as sigma probes and the
    /// points as seed translations.
    pub fn with_witnesses(mut self, points: &[Vec<Complex64>]) -> Self {
        self.sigma.probes = points.iter().map(|z| z.iter().map(|c| c.re).collect()).collect();
        self.seed.extra = points.to_vec();
        self
    }
}

/// `beta^(B e sigma(z)) + rho''(z) + k beta(D|y|) + beta(B|y|)` with `beta^(s) = beta(max(s, 0))`.
#[derive(Clone, Debug, Serialize)]
pub struct RhoR {
    pub weight: WeightSpec,
    pub r: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub d: f64,
    pub h: f64,
    pub sigma: SigmaSurrogate,
    pub seed_envelope: SeedEnvelope,
}

/// `A' = 2A` (or `A` for concave `alpha`), `B' = (2ek + 1)B + 4k A0 B0 / A`.
pub fn rho_r_constants(w: &WeightSpec, seed: &EntireSeed) -> (f64, f64, f64) {
    let k = w.k() as f64;
    let a_prime = if w.alpha.is_concave() { w.a } else { 2.0 * w.a };
    let b_prime = (2.0 * E * k + 1.0) * w.b + 4.0 * k * seed.a0 * seed.b0 / w.a;
    let d = 2.0 * seed.a0 * seed.b0 / w.a;
    (a_prime, b_prime, d)
}

pub fn rho_r_build(w: &WeightSpec, seed: &EntireSeed, r: f64, cfg: &RhoConfig) -> Result<RhoR> {
    w.validate()?;
    let mut weight = w.clone();
    weight.alpha = w.alpha.normalized();
    weight.beta = w.beta.normalized();
    let sigma = sigma_r_build(&weight.cone, r, &cfg.sigma)?;
    let (a_prime, b_prime, d) = rho_r_constants(&weight, seed);
    let variant = if weight.alpha.is_concave() { SeedVariant::ConcaveAlpha } else { SeedVariant::General };
    let scaling = SeedScaling::for_weight(seed, a_prime);
    let seed_envelope =
        seed_envelope_build(seed, variant, &weight.alpha, &weight.beta, weight.k(), scaling, &cfg.seed)?;
    let h = seed_envelope.h;
    Ok(RhoR { weight, r, a_prime, b_prime, d, h, sigma, seed_envelope })
}

/// Worst violations of the three bounds on a sample; all fields are `<= 0` on success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RhoBounds {
    /// `max rho_R - rho_{R^k,A',B'} - beta(2BeR)`.
    pub upper_full: f64,
    /// `max rho_R - rho_{U,A',B'}`.
    pub upper_cone: f64,
    /// `max rho_{U,A,B} - H - rho_R` over points with `|x| <= R`.
    pub lower: f64,
}

impl RhoR {
    pub fn wide(&self) -> WeightSpec {
        self.weight.with_params(self.a_prime, self.b_prime)
    }

    pub fn check_bounds(&self, points: &[Vec<Complex64>]) -> Result<RhoBounds> {
        let wide = self.wide();
        let full = wide.with_cone(Cone::full(self.k())?);
        let shift = self.weight.beta.value(2.0 * self.weight.b * E * self.r);
        let mut out =
            RhoBounds { upper_full: f64::NEG_INFINITY, upper_cone: f64::NEG_INFINITY, lower: f64::NEG_INFINITY };
        for z in points {
            let v = self.value(z);
            out.upper_full = out.upper_full.max(v - full.rho(z) - shift);
            out.upper_cone = out.upper_cone.max(v - wide.rho(z));
            let x = z.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
            if x <= self.r {
                out.lower = out.lower.max(self.weight.rho(z) - self.h - v);
            }
        }
        Ok(out)
    }

    /// The smallest `H` making the lower bound hold on the points, never below the
    /// analytic value.
    pub fn empirical_h(&self, points: &[Vec<Complex64>]) -> f64 {
        points
            .iter()
            .filter(|z| z.iter().all(|c| c.re.abs() <= self.r))
            .fold(self.h, |h, z| h.max(self.weight.rho(z) - self.value(z)))
    }
}

impl Surrogate for RhoR {
    fn k(&self) -> usize {
        self.weight.k()
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        let beta = &self.weight.beta;
        let b = self.weight.b;
        let y = z.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        let s = self.sigma.value(z);
        beta.value((b * E * s).max(0.0))
            + self.seed_envelope.value(z)
            + self.k() as f64 * beta.value(self.d * y)
            + beta.value(b * y)
    }
}

/// Pointwise maximum of `rho_R` over a finite set of radii.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalEnvelope {
    pub members: Vec<RhoR>,
    pub h: f64,
}

pub fn envelope_global(members: Vec<RhoR>) -> Result<GlobalEnvelope> {
    let first = members.first().ok_or_else(|| Error::domain("no members for the global envelope"))?;
    let k = first.k();
    for m in &members {
        check_dim(k, m.k())?;
    }
    let h = members.iter().fold(f64::NEG_INFINITY, |h, m| h.max(m.h));
    Ok(GlobalEnvelope { members, h })
}

impl GlobalEnvelope {
    pub fn build(w: &WeightSpec, seed: &EntireSeed, radii: &[f64], cfg: &RhoConfig) -> Result<Self> {
        let members = radii.iter().map(|&r| rho_r_build(w, seed, r, cfg)).collect::<Result<Vec<_>>>()?;
        envelope_global(members)
    }

    /// Radius of the member that certifies the lower bound at `z`.
    pub fn lower_bound_member(&self, z: &[Complex64]) -> Option<f64> {
        let x = z.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
        self.members
            .iter()
            .map(|m| m.r)
            .filter(|&r| r >= x)
            .fold(None, |best: Option<f64>, r| Some(best.map_or(r, |b| b.min(r))))
    }
}

impl Surrogate for GlobalEnvelope {
    fn k(&self) -> usize {
        self.members[0].k()
    }

    fn value(&self, z: &[Complex64]) -> f64 {
        self.members.iter().map(|m| m.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A circle `z0 + r e^{it} w`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub z0: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub r: f64,
}

/// Random probes with centers in `|Re| <= re_max`, `min_im + r <= |Im| <= im_max`, unit
/// directions and radii in `(0, r_max]`. Keeping circles off the real axis avoids the
/// clamped sine zeros.
pub fn random_probes(
    k: usize,
    count: usize,
    re_max: f64,
    im_max: f64,
    r_max: f64,
    min_im: f64,
    rng: &mut impl Rng,
) -> Vec<Probe> {
    (0..count)
        .map(|_| {
            let r = r_max * rng.gen_range(0.1..=1.0);
            let lo = min_im + r;
            let z0 = (0..k)
                .map(|_| {
                    let im = rng.gen_range(lo..=im_max.max(lo));
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    Complex64::new(rng.gen_range(-re_max..=re_max), sign * im)
                })
                .collect();
            let mut w: Vec<Complex64> = (0..k)
                .map(|_| Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let m = w.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
            for c in &mut w {
                *c /= m;
            }
            Probe { z0, w, r }
        })
        .collect()
}

/// `max_probe u(z0) - circle mean`; positive values flag failures of the sub-mean inequality.
pub fn psh_check(u: impl Fn(&[Complex64]) -> f64, probes: &[Probe]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for p in probes {
        if !(p.r > 0.0) {
            return Err(Error::domain("probe radius must be positive"));
        }
        let mean = circle_mean(&u, &p.z0, &p.w, p.r, CIRCLE_POINTS)?;
        worst = worst.max(u(&p.z0) - mean);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_eval(0.7, c(0.0, 0.0)).unwrap(), 0.0);
        let t = theta_eval(1.0, c(0.0, 1.0)).unwrap();
        assert!((t - 1f64.sinh().ln()).abs() < 1e-15);
        assert!((t - 0.161_440).abs() < 1e-6);
        assert_eq!(theta_eval(1.0, c(PI, 0.0)).unwrap(), THETA_FLOOR);
        assert!(theta_eval(0.0, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn theta_matches_direct_formula() {
        for (a, z) in [(1.0, c(2.0, 0.3)), (0.25, c(-1.3, 2.0)), (3.0, c(0.4, -0.2)), (1.0, c(0.1, 0.2))] {
            let w: Complex64 = z / a;
            let direct = a * (w.sin() / w).norm().ln();
            assert!((theta(a, z) - direct).abs() < 1e-13, "{a} {z}");
        }
    }

    #[test]
    fn theta_stable_far_from_axis() {
        // |sin w| ~ e^{|v|}/2 when v = 1e4
        let v = theta(1.0, c(0.3, 1e4));
        let expect = 1e4 - LN_2 - c(0.3, 1e4).norm().ln();
        assert!((v - expect).abs() < 1e-9);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_eval(1.0, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 0.0);
        let p = phi_eval(1.0, &[c(0.0, 1.0), c(0.0, 1.0)]).unwrap();
        assert!((p - 0.322_879).abs() < 1e-6);
        for y in [-30.0, -1.0, 0.01, 7.0] {
            assert!(phi_eval(0.3, &[c(0.0, y)]).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sigma_witness_example() {
        // U = {0}, R = 10, probe x = e: candidate (1, e) gives sigma(e) >= 1
        let s = sigma_r_build(&Cone::origin(1), 10.0, &SigmaConfig::default().with_probes(vec![vec![E]])).unwrap();
        assert!(s.value(&[c(E, 0.0)]) >= 1.0 - 1e-12);
        assert!(s.candidates.iter().any(|c| (c.a - 1.0).abs() < 1e-15 && c.xi == [E]));
    }

    #[test]
    fn sigma_full_cone() {
        let s =
            sigma_r_build(&Cone::full(1).unwrap(), 3.0, &SigmaConfig::default().with_probes(vec![vec![1.0]])).unwrap();
        assert!(s.candidates.iter().all(|c| c.term == 0.0));
        assert!(s.value(&[c(1.0, 0.0)]) >= 0.0);
        assert!(s.value(&[c(0.5, 2.0)]) <= 2.0 + 1e-12);
    }

    #[test]
    fn sigma_rejects_bad_radius() {
        assert!(sigma_r_build(&Cone::origin(1), 0.0, &SigmaConfig::default()).is_err());
    }

    #[test]
    fn seed_envelope_examples() {
        let seed = EntireSeed::gaussian();
        let p = Profile::square();
        let pts = vec![vec![c(0.0, 0.0)], vec![c(2.0, 0.0)], vec![c(-1.0, 0.7)]];
        let env = seed_envelope_build(
            &seed,
            SeedVariant::General,
            &p,
            &p,
            1,
            SeedScaling::unit(&seed),
            &SeedConfig::default().with_extra(pts.clone()),
        )
        .unwrap();
        assert_eq!(env.h, 0.0);
        assert!(env.value(&pts[0]) >= 0.0 - 1e-12);
        assert!(env.value(&pts[1]) >= -16.0 - 1e-12);
        let (lo, hi) = env.check_sandwich(&pts);
        assert!(lo <= 1e-12 && hi <= 1e-12);
    }

    #[test]
    fn seed_rejects_violations() {
        let fat = EntireSeed::new("exp(+z^2)", 1.0, 1.0, |w: Complex64| w.re * w.re - w.im * w.im).unwrap();
        let p = Profile::square();
        assert!(matches!(fat.verify(&p, &p, 3.0, 11), Err(Error::Seed(_))));
        let zero =
            EntireSeed::new("z exp(-z^2)", 1.0, 1.0, |w: Complex64| w.norm().ln() + w.im * w.im - w.re * w.re).unwrap();
        assert!(matches!(zero.verify(&p, &p, 3.0, 11), Err(Error::Seed(_))));
    }

    #[test]
    fn concave_variant_requires_concave_alpha() {
        let seed = EntireSeed::gaussian();
        let p = Profile::square();
        let r = seed_envelope_build(
            &seed,
            SeedVariant::ConcaveAlpha,
            &p,
            &p,
            1,
            SeedScaling::unit(&seed),
            &SeedConfig::default(),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn rho_constants() {
        let w = WeightSpec::squares(Cone::origin(1), 1.0, 1.0).unwrap();
        let (a2, b2, d) = rho_r_constants(&w, &EntireSeed::gaussian());
        assert_eq!(a2, 2.0);
        assert!((b2 - (5.0 + 2.0 * E)).abs() < 1e-14);
        assert!((b2 - 10.4366).abs() < 1e-4);
        assert_eq!(d, 2.0);
        let wc = WeightSpec::new(Cone::origin(1), 1.0, 1.0, Profile::power(0.5), Profile::square()).unwrap();
        assert_eq!(rho_r_constants(&wc, &EntireSeed::gaussian()).0, 1.0);
    }

    #[test]
    fn global_envelope_bookkeeping() {
        let w = WeightSpec::squares(Cone::origin(1), 1.0, 1.0).unwrap();
        let seed = EntireSeed::gaussian();
        let z = vec![vec![c(5.0, 0.5)]];
        let cfg = RhoConfig::light().with_witnesses(&z);
        let g = GlobalEnvelope::build(&w, &seed, &[1.0, 10.0], &cfg).unwrap();
        assert_eq!(g.lower_bound_member(&z[0]), Some(10.0));
        let single = GlobalEnvelope::build(&w, &seed, &[10.0], &cfg).unwrap();
        assert_eq!(single.value(&z[0]), single.members[0].value(&z[0]));
        assert!(g.value(&z[0]) >= w.rho(&z[0]) - g.h - 1e-9);
    }

    #[test]
    fn psh_check_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probes = random_probes(1, 50, 3.0, 3.0, 0.5, 0.25, &mut rng);
        let affine = psh_check(|z| 2.0 * z[0].re - z[0].im + 1.0, &probes).unwrap();
        assert!(affine.abs() < 1e-12);
        let concave = psh_check(|z| -z[0].norm_sqr(), &probes).unwrap();
        assert!(concave > 0.0);
        let phi = psh_check(|z| phi_eval(1.0, z).unwrap(), &probes).unwrap();
        assert!(phi <= 1e-8, "{phi}");
    }

    #[test]
    fn surrogates_are_subharmonic_on_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probes = random_probes(1, 100, 4.0, 3.0, 0.5, 0.25, &mut rng);
        let w = WeightSpec::squares(Cone::origin(1), 1.0, 1.0).unwrap();
        let rho = rho_r_build(&w, &EntireSeed::gaussian(), 2.0, &RhoConfig::light()).unwrap();
        let d = psh_check(|z| rho.value(z), &probes).unwrap();
        assert!(d <= 1e-6, "rho_R deficiency {d}");
        let d = psh_check(|z| rho.sigma.value(z), &probes).unwrap();
        assert!(d <= 1e-6, "sigma deficiency {d}");
        let d = psh_check(|z| rho.seed_envelope.value(z), &probes).unwrap();
        assert!(d <= 1e-6, "seed deficiency {d}");
    }
}
