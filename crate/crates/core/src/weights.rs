//! The weight `rho_{U,A,B}(x + iy) = -alpha(|x/A|) + beta(B|y|) + beta(B delta_U(x))`, the
//! sup and Hilbert norms it induces, and numerical checks of the growth gap and the shift
//! bound.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cones::Cone;
use crate::error::{check_dim, Error, Result};
use crate::numerics::{uniform_norm_c, Axis, GridSpec};
use crate::profiles::Profile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub cone: Cone,
    pub a: f64,
    pub b: f64,
    pub alpha: Profile,
    pub beta: Profile,
}

impl WeightSpec {
    pub fn new(cone: Cone, a: f64, b: f64, alpha: Profile, beta: Profile) -> Result<Self> {
        let w = WeightSpec { cone, a, b, alpha, beta };
        w.validate()?;
        Ok(w)
    }

    /// `alpha = beta = s^2` over `cone`.
    pub fn squares(cone: Cone, a: f64, b: f64) -> Result<Self> {
        WeightSpec::new(cone, a, b, Profile::square(), Profile::square())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) || !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::domain(format!("A and B must be positive, got A = {}, B = {}", self.a, self.b)));
        }
        self.alpha.validate()?;
        self.beta.validate()
    }

    pub fn k(&self) -> usize {
        self.cone.dim()
    }

    /// Same profiles and cone with other parameters.
    pub fn with_params(&self, a: f64, b: f64) -> Self {
        WeightSpec { a, b, ..self.clone() }
    }

    pub fn with_cone(&self, cone: Cone) -> Self {
        WeightSpec { cone, ..self.clone() }
    }

    pub fn rho_eval(&self, z: &[Complex64]) -> Result<f64> {
        check_dim(self.k(), z.len())?;
        Ok(self.rho(z))
    }

    /// Unchecked `rho`.
    #[inline]
    pub fn rho(&self, z: &[Complex64]) -> f64 {
        let mut buf = [0.0; 8];
        let mut heap;
        let x: &mut [f64] = if z.len() <= 8 {
            &mut buf[..z.len()]
        } else {
            heap = vec![0.0; z.len()];
            &mut heap
        };
        let (mut xn, mut yn) = (0.0_f64, 0.0_f64);
        for (xi, zi) in x.iter_mut().zip(z) {
            *xi = zi.re;
            xn = xn.max(zi.re.abs());
            yn = yn.max(zi.im.abs());
        }
        let delta = self.cone.distance_unchecked(x);
        -self.alpha.value(xn / self.a) + self.beta.value(self.b * yn) + self.beta.value(self.b * delta)
    }

    /// First 12 hex digits of the SHA-256 of the JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("weight specs serialize");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

/// `p(z - c) exp(-rate * sum_j (z_j - c_j)^2)` with `p` a polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    /// `(multi-index, coefficient)` pairs.
    pub coefficients: Vec<(Vec<u32>, Complex64)>,
    pub rate: f64,
    pub center: Vec<Complex64>,
}

impl TestFunction {
    pub fn new(coefficients: Vec<(Vec<u32>, Complex64)>, rate: f64, center: Vec<Complex64>) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("gaussian rate must be positive, got {rate}")));
        }
        for (m, _) in &coefficients {
            check_dim(center.len(), m.len())?;
        }
        Ok(TestFunction { coefficients, rate, center })
    }

    /// `exp(-sum_j z_j^2)`.
    pub fn gaussian(k: usize) -> Self {
        TestFunction {
            coefficients: vec![(vec![0; k], Complex64::new(1.0, 0.0))],
            rate: 1.0,
            center: vec![Complex64::new(0.0, 0.0); k],
        }
    }

    pub fn zero(k: usize) -> Self {
        TestFunction { coefficients: Vec::new(), rate: 1.0, center: vec![Complex64::new(0.0, 0.0); k] }
    }

    pub fn k(&self) -> usize {
        self.center.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|(_, c)| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut f = self.clone();
        for (_, c) in &mut f.coefficients {
            *c *= s;
        }
        f
    }

    /// `z -> f(z + zeta)`.
    pub fn translated(&self, zeta: &[Complex64]) -> Result<Self> {
        check_dim(self.k(), zeta.len())?;
        let mut f = self.clone();
        for (c, s) in f.center.iter_mut().zip(zeta) {
            *c -= s;
        }
        Ok(f)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let w: Vec<Complex64> = z.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let p = self.poly(&w);
        let q: Complex64 = w.iter().map(|v| v * v).sum();
        p * (-self.rate * q).exp()
    }

    /// `log |f(z)|`, `-inf` at zeros.
    pub fn log_abs(&self, z: &[Complex64]) -> f64 {
        let w: Vec<Complex64> = z.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let p = self.poly(&w);
        let q: Complex64 = w.iter().map(|v| v * v).sum();
        p.norm().ln() - self.rate * q.re
    }

    fn poly(&self, w: &[Complex64]) -> Complex64 {
        self.coefficients.iter().map(|(m, c)| m.iter().zip(w).fold(*c, |acc, (&e, v)| acc * v.powu(e))).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailCertificate {
    /// The weighted modulus on the box boundary is at most `1e-12` of the maximum.
    Decayed,
    /// The boundary maximum is unchanged under box doubling and does not exceed the
    /// interior maximum.
    Plateau,
    /// The function is identically zero.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    /// Initial half-width of the search box around the center of `f`.
    pub half_width: f64,
    /// Grid points per real axis.
    pub points: usize,
    /// Pattern-search steps after the grid search (sup norm only).
    pub refine: usize,
    /// Number of box doublings before giving up.
    pub max_doublings: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { half_width: 4.0, points: 161, refine: 60, max_doublings: 6 }
    }
}

impl NormOptions {
    fn for_k(k: usize) -> Self {
        let points = match k {
            1 => 161,
            2 => 25,
            _ => 9,
        };
        NormOptions { points, ..NormOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub spec_hash: String,
    pub kind: &'static str,
    pub value: f64,
    pub error: f64,
    pub maximizer: Option<Vec<Complex64>>,
    pub half_width: f64,
    pub certificate: TailCertificate,
    /// Largest boundary value of the (weighted) integrand relative to its maximum.
    pub tail_ratio: f64,
}

const DECAY: f64 = 1e-12;

struct BoxScan {
    max: f64,
    argmax: Vec<f64>,
    boundary_max: f64,
}

/// Scans `g` (a log-domain quantity) on the uniform grid over `center ± half` with
/// `points` nodes per axis, tracking the interior and boundary maxima.
fn scan(g: &impl Fn(&[f64]) -> f64, center: &[f64], half: f64, points: usize) -> BoxScan {
    let axes: Vec<Axis> = center.iter().map(|c| Axis::new(c - half, c + half, points)).collect();
    let spec = GridSpec::new(axes).with_budget(usize::MAX);
    let mut best = BoxScan { max: f64::NEG_INFINITY, argmax: center.to_vec(), boundary_max: f64::NEG_INFINITY };
    for flat in 0..spec.len() {
        let mi = spec.multi_index(flat);
        let p = spec.point(flat);
        let v = g(&p);
        if v > best.max {
            best.max = v;
            best.argmax = p;
        }
        if !spec.is_interior(&mi) && v > best.boundary_max {
            best.boundary_max = v;
        }
    }
    best
}

fn to_complex(p: &[f64]) -> Vec<Complex64> {
    p.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn center_real(f: &TestFunction) -> Vec<f64> {
    f.center.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Finds a box outside which `g` is certified small, returning the scan and half-width.
fn certified_box(
    g: &impl Fn(&[f64]) -> f64,
    center: &[f64],
    opts: &NormOptions,
    what: &str,
) -> Result<(BoxScan, f64, TailCertificate)> {
    let mut half = opts.half_width;
    let mut prev: Option<BoxScan> = None;
    for _ in 0..=opts.max_doublings {
        let s = scan(g, center, half, opts.points);
        if s.boundary_max <= s.max + DECAY.ln() {
            return Ok((s, half, TailCertificate::Decayed));
        }
        if let Some(p) = &prev {
            let flat = (s.boundary_max - p.boundary_max).abs() <= 1e-9;
            let below = s.boundary_max <= s.max + 1e-9 && s.max <= p.max + 1e-9;
            if flat && below {
                return Ok((s, half, TailCertificate::Plateau));
            }
        }
        prev = Some(s);
        half *= 2.0;
    }
    Err(Error::NormPossiblyInfinite(format!(
        "{what}: weighted modulus does not decay at the boundary of a box of half-width {}",
        half / 2.0
    )))
}

/// `sup |f| e^{-rho}` by a grid search in a certified box plus local pattern search.
pub fn sup_norm(f: &TestFunction, w: &WeightSpec, opts: Option<NormOptions>) -> Result<NormReport> {
    check_dim(w.k(), f.k())?;
    let opts = opts.unwrap_or_else(|| NormOptions::for_k(f.k()));
    if f.is_zero() {
        return Ok(zero_report(w, "sup"));
    }
    let g = |p: &[f64]| {
        let z = to_complex(p);
        f.log_abs(&z) - w.rho(&z)
    };
    let (s, half, certificate) = certified_box(&g, &center_real(f), &opts, "sup norm")?;
    let mut x = s.argmax;
    let mut best = s.max;
    let mut step = 2.0 * half / (opts.points as f64 - 1.0);
    for _ in 0..opts.refine {
        let mut moved = false;
        for a in 0..x.len() {
            for sgn in [-1.0, 1.0] {
                let mut t = x.clone();
                t[a] += sgn * step;
                let v = g(&t);
                if v > best {
                    best = v;
                    x = t;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(NormReport {
        spec_hash: w.hash(),
        kind: "sup",
        value: best.exp(),
        error: 0.0,
        maximizer: Some(to_complex(&x)),
        half_width: half,
        certificate,
        tail_ratio: (s.boundary_max - s.max).exp(),
    })
}

fn zero_report(w: &WeightSpec, kind: &'static str) -> NormReport {
    NormReport {
        spec_hash: w.hash(),
        kind,
        value: 0.0,
        error: 0.0,
        maximizer: None,
        half_width: 0.0,
        certificate: TailCertificate::Zero,
        tail_ratio: 0.0,
    }
}

/// `(int |f|^2 e^{-2 rho} d lambda)^{1/2}` by the midpoint rule on a certified box, with
/// the error estimated from a half-resolution pass.
pub fn l2_norm(f: &TestFunction, w: &WeightSpec, cells: usize, opts: Option<NormOptions>) -> Result<NormReport> {
    check_dim(w.k(), f.k())?;
    let opts = opts.unwrap_or_else(|| NormOptions::for_k(f.k()));
    if f.is_zero() {
        return Ok(zero_report(w, "l2"));
    }
    let g = |p: &[f64]| {
        let z = to_complex(p);
        2.0 * (f.log_abs(&z) - w.rho(&z))
    };
    let center = center_real(f);
    let (s, half, certificate) = certified_box(&g, &center, &opts, "l2 norm")?;
    if certificate != TailCertificate::Decayed {
        return Err(Error::NormPossiblyInfinite("l2 norm: integrand does not decay at the box boundary".into()));
    }
    let m = s.max;
    let lo: Vec<f64> = center.iter().map(|c| c - half).collect();
    let hi: Vec<f64> = center.iter().map(|c| c + half).collect();
    let q = crate::numerics::midpoint_box(|p| (g(p) - m).exp(), &lo, &hi, cells)?;
    let integral = q.value * m.exp();
    let value = integral.sqrt();
    let error = if value > 0.0 { 0.5 * q.error * m.exp() / value } else { 0.0 };
    Ok(NormReport {
        spec_hash: w.hash(),
        kind: "l2",
        value,
        error,
        maximizer: None,
        half_width: half,
        certificate,
        tail_ratio: (s.boundary_max - s.max).exp(),
    })
}

/// A point where a fitted inequality fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointViolation {
    pub z: Vec<Complex64>,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub sigma: f64,
    pub tau: f64,
    pub c: f64,
    /// `sigma` from the closed-form estimate at large `|z|`.
    pub sigma_estimate: f64,
    pub violations: Vec<PointViolation>,
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.sigma > 0.0 && self.violations.is_empty()
    }
}

fn check_primed(w: &WeightSpec, a2: f64, b2: f64) -> Result<()> {
    if !(a2 > w.a) {
        return Err(Error::precondition(format!("A' = {a2} must exceed A = {}", w.a)));
    }
    if !(b2 > w.b) {
        return Err(Error::precondition(format!("B' = {b2} must exceed B = {}", w.b)));
    }
    Ok(())
}

/// Fits `rho_{U,A',B'} - rho_{U,A,B} + C >= sigma |z|^tau` on the grid with
/// `tau = min(1, kappa)`: `sigma` is the smallest ratio `gap / |z|^tau` over the outer half
/// of the grid, and `C` the smallest constant that then makes the inequality hold everywhere.
pub fn verify_gap(w: &WeightSpec, a2: f64, b2: f64, grid: &GridSpec) -> Result<GapReport> {
    check_primed(w, a2, b2)?;
    let pts = complex_grid(w, grid)?;
    let wide = w.with_params(a2, b2);
    let tau = w.alpha.kappa.min(1.0);
    let gaps: Vec<(f64, f64)> = pts.iter().map(|z| (wide.rho(z) - w.rho(z), uniform_norm_c(z).powf(tau))).collect();
    let rmax = gaps.iter().fold(0.0_f64, |m, g| m.max(g.1));
    let sigma = gaps.iter().filter(|g| g.1 >= 0.5 * rmax && g.1 > 0.0).map(|g| g.0 / g.1).fold(f64::INFINITY, f64::min);
    let sigma = if sigma.is_finite() { sigma } else { 0.0 };
    let c = gaps.iter().fold(0.0_f64, |m, g| m.max(sigma * g.1 - g.0));
    let violations = gap_violations(&pts, &gaps, sigma, c);
    Ok(GapReport { sigma, tau, c, sigma_estimate: gap_sigma_estimate(w, a2, b2), violations })
}

/// Checks a given `(sigma, C)` pair on the grid.
pub fn check_gap_pair(w: &WeightSpec, a2: f64, b2: f64, grid: &GridSpec, sigma: f64, c: f64) -> Result<GapReport> {
    check_primed(w, a2, b2)?;
    let pts = complex_grid(w, grid)?;
    let wide = w.with_params(a2, b2);
    let tau = w.alpha.kappa.min(1.0);
    let gaps: Vec<(f64, f64)> = pts.iter().map(|z| (wide.rho(z) - w.rho(z), uniform_norm_c(z).powf(tau))).collect();
    let violations = gap_violations(&pts, &gaps, sigma, c);
    Ok(GapReport { sigma, tau, c, sigma_estimate: gap_sigma_estimate(w, a2, b2), violations })
}

fn gap_violations(pts: &[Vec<Complex64>], gaps: &[(f64, f64)], sigma: f64, c: f64) -> Vec<PointViolation> {
    pts.iter()
        .zip(gaps)
        .filter_map(|(z, (gap, r))| {
            let excess = sigma * r - gap - c;
            (excess > 1e-9 * (1.0 + gap.abs())).then(|| PointViolation { z: z.clone(), excess })
        })
        .collect()
}

/// `min((A^-kappa - A'^-kappa) mu(s0'), (B' - B) beta(s0') / s0')` with
/// `mu(s) = alpha(s) / s^kappa` and `s0' = max(s0, 1)`.
pub fn gap_sigma_estimate(w: &WeightSpec, a2: f64, b2: f64) -> f64 {
    let k = w.alpha.kappa;
    let s0 = w.alpha.s0.max(1.0);
    let mu = w.alpha.value(s0) / s0.powf(k);
    let from_alpha = (w.a.powf(-k) - a2.powf(-k)) * mu;
    let from_beta = (b2 - w.b) * w.beta.value(s0) / s0;
    from_alpha.min(from_beta)
}

fn complex_grid(w: &WeightSpec, grid: &GridSpec) -> Result<Vec<Vec<Complex64>>> {
    grid.validate()?;
    match grid.complex_dim() {
        Some(k) => check_dim(w.k(), k)?,
        None => return Err(Error::domain("grid needs (Re, Im) axis pairs")),
    }
    Ok(grid.complex_points())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    pub c: f64,
    pub bound: f64,
    pub worst_z: Option<Vec<Complex64>>,
    pub worst_zeta: Option<Vec<Complex64>>,
    pub violations: Vec<PointViolation>,
}

impl ShiftReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.c <= self.bound
    }
}

/// `alpha(R / (A' - A)) + 2 beta(R B B' / (B' - B))`.
pub fn shift_bound(w: &WeightSpec, a2: f64, b2: f64, r: f64) -> f64 {
    w.alpha.value(r / (a2 - w.a)) + 2.0 * w.beta.value(r * w.b * b2 / (b2 - w.b))
}

/// Shift samples `|zeta| <= R`: for `k = 1` a polar lattice with `radial` rings and
/// `angular` rays; for larger `k`, `radial * angular` seeded uniform samples of the polydisc.
pub fn shift_samples(k: usize, r: f64, radial: usize, angular: usize, seed: u64) -> Vec<Vec<Complex64>> {
    if r <= 0.0 {
        return vec![vec![Complex64::new(0.0, 0.0); k]];
    }
    if k == 1 {
        let mut out = vec![vec![Complex64::new(0.0, 0.0)]];
        for i in 1..=radial {
            let rr = r * i as f64 / radial as f64;
            for j in 0..angular {
                let t = std::f64::consts::TAU * j as f64 / angular as f64;
                out.push(vec![Complex64::from_polar(rr, t)]);
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); k]];
    for _ in 0..radial * angular {
        out.push(
            (0..k)
                .map(|_| {
                    let rr = r * rng.gen::<f64>().sqrt();
                    Complex64::from_polar(rr, rng.gen_range(0.0..std::f64::consts::TAU))
                })
                .collect(),
        );
    }
    out
}

/// Smallest empirical `C` with `rho_{U,A,B}(z + zeta) <= rho_{U,A',B'}(z) + C` over the grid
/// and the given shifts.
pub fn verify_shift(
    w: &WeightSpec,
    a2: f64,
    b2: f64,
    r: f64,
    grid: &GridSpec,
    zetas: &[Vec<Complex64>],
) -> Result<ShiftReport> {
    check_primed(w, a2, b2)?;
    if !(r >= 0.0) {
        return Err(Error::domain("shift radius must be nonnegative"));
    }
    for zeta in zetas {
        check_dim(w.k(), zeta.len())?;
        if uniform_norm_c(zeta) > r * (1.0 + 1e-12) {
            return Err(Error::domain("shift sample outside the polydisc of radius R"));
        }
    }
    let pts = complex_grid(w, grid)?;
    let wide = w.with_params(a2, b2);
    let mut c = 0.0_f64;
    let (mut wz, mut wzeta) = (None, None);
    let mut shifted = vec![Complex64::new(0.0, 0.0); w.k()];
    for z in &pts {
        let base = wide.rho(z);
        for zeta in zetas {
            for (s, (a, b)) in shifted.iter_mut().zip(z.iter().zip(zeta)) {
                *s = a + b;
            }
            let d = w.rho(&shifted) - base;
            if d > c {
                c = d;
                wz = Some(z.clone());
                wzeta = Some(zeta.clone());
            }
        }
    }
    let bound = shift_bound(w, a2, b2, r);
    let violations = if c > bound * (1.0 + 1e-12) {
        vec![PointViolation { z: wz.clone().unwrap_or_default(), excess: c - bound }]
    } else {
        Vec::new()
    };
    Ok(ShiftReport { c, bound, worst_z: wz, worst_zeta: wzeta, violations })
}
