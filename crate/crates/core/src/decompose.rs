//! Partition of unity, `dbar` correction and the splitting and density pipelines.

use num_complex::Complex64;
use serde::Serialize;

use crate::cones::{separation_constant, split_neighborhoods, Cone};
use crate::dbar::{hormander_check, weighted_min_solve, HormanderReport, Iterate, SolverConfig, HORMANDER_SLACK};
use crate::error::{Error, Result};
use crate::numerics::{GridSpec, SampledField};
use crate::psh::{rho_r_build, EntireSeed, RhoConfig, RhoR, Surrogate};
use crate::weights::{l2_norm, TestFunction, WeightSpec};

/// `g0(x) = c exp(-1/(1 - |x|_2^2))` on `|x|_2 < 1`, normalized to unit mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mollifier {
    pub k: usize,
    pub c: f64,
}

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    pub fn new(k: usize) -> Result<Self> {
        let mass = match k {
            1 => simpson(|t| bump(t * t), -1.0, 1.0, 4000),
            2 => 2.0 * std::f64::consts::PI * simpson(|r| r * bump(r * r), 0.0, 1.0, 4000),
            _ => return Err(Error::Unsupported("mollifiers are provided for k <= 2".into())),
        };
        Ok(Mollifier { k, c: 1.0 / mass })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c * bump(x.iter().map(|v| v * v).sum())
    }

    /// `int_{-inf}^x g0` for `k = 1`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        simpson(|t| self.eval(&[t]), -1.0, x, 2000).clamp(0.0, 1.0)
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Side {
    /// `W1 = R`.
    Whole,
    /// `W1 = {0}`.
    Empty,
    /// `W1 = (-inf, 0]`.
    Negative,
    /// `W1 = [0, inf)`.
    Positive,
}

/// `g_nu(x + iy) = int_{W_nu} g0(x - xi) d xi` for `k = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub w1: Cone,
    pub w2: Cone,
    pub mollifier: Mollifier,
    side: Side,
}

/// Checks `W1 ∪ W2 = R^k`, `W1 ∩ W2 = {0}` and returns the partition of unity.
pub fn build_partition(w1: &Cone, w2: &Cone, m: Mollifier) -> Result<Partition> {
    let k = w1.dim();
    if !w1.union(w2)?.is_full() {
        return Err(Error::precondition("W1 ∪ W2 is not the whole space"));
    }
    if !w1.intersection(w2)?.is_degenerate() {
        return Err(Error::precondition("W1 ∩ W2 is larger than the origin"));
    }
    if k != 1 || m.k != 1 {
        return Err(Error::Unsupported("partitions are evaluated for k = 1".into()));
    }
    let side = match w1 {
        Cone::Line { negative: true, positive: true } => Side::Whole,
        Cone::Line { negative: false, positive: false } => Side::Empty,
        Cone::Line { negative: true, positive: false } => Side::Negative,
        _ => Side::Positive,
    };
    Ok(Partition { w1: w1.clone(), w2: w2.clone(), mollifier: m, side })
}

impl Partition {
    pub fn g1(&self, z: &[Complex64]) -> f64 {
        let x = z[0].re;
        match self.side {
            Side::Whole => 1.0,
            Side::Empty => 0.0,
            Side::Negative => 1.0 - self.mollifier.cdf(x),
            Side::Positive => self.mollifier.cdf(x),
        }
    }

    pub fn g2(&self, z: &[Complex64]) -> f64 {
        1.0 - self.g1(z)
    }

    /// `dbar g1 = g1'(x) / 2`.
    pub fn dbar_g1(&self, z: &[Complex64]) -> Complex64 {
        let d = self.mollifier.eval(&[z[0].re]) / 2.0;
        Complex64::new(
            match self.side {
                Side::Whole | Side::Empty => 0.0,
                Side::Negative => -d,
                Side::Positive => d,
            },
            0.0,
        )
    }
}

/// Radial smooth step `chi(z) = S(|z|)`: `1` on `|z| <= 1`, `0` on `|z| >= 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Cutoff;

fn psi_step(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn psi_step_prime(s: f64) -> f64 {
    if s > 0.0 {
        psi_step(s) / (s * s)
    } else {
        0.0
    }
}

impl Cutoff {
    pub fn step(&self, t: f64) -> f64 {
        let (p, q) = (psi_step(2.0 - t), psi_step(t - 1.0));
        p / (p + q)
    }

    pub fn step_prime(&self, t: f64) -> f64 {
        let (p, q) = (psi_step(2.0 - t), psi_step(t - 1.0));
        let den = (p + q) * (p + q);
        (-psi_step_prime(2.0 - t) * q - p * psi_step_prime(t - 1.0)) / den
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.step(z.norm())
    }

    /// `dbar chi(z) = S'(|z|) z / (2|z|)`.
    pub fn dbar(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r <= 1.0 || r >= 2.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.step_prime(r) * z / (2.0 * r)
    }

    /// `a = sup |dbar chi|^2` by dense sampling of the radial profile.
    pub fn sup_dbar_sq(&self) -> f64 {
        (0..=20_000)
            .map(|i| {
                let t = 1.0 + i as f64 / 20_000.0;
                (self.step_prime(t) / 2.0).powi(2)
            })
            .fold(0.0, f64::max)
    }
}

/// Cones of the splitting: `V_nu ⊇ U_nu`, `W1 ∪ W2 = R^k`, `W1 ∩ W2 = {0}`,
/// `cl V_nu ∩ cl W_nu = {0}` and `delta_{U_nu}(x) >= theta |x|` off `V_nu`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitCones {
    pub u: Cone,
    pub u1: Cone,
    pub u2: Cone,
    pub v1: Cone,
    pub v2: Cone,
    pub w1: Cone,
    pub w2: Cone,
    pub theta: f64,
}

pub fn split_cones(u: &Cone, u1: &Cone, u2: &Cone) -> Result<SplitCones> {
    let k = u.dim();
    let origin = Cone::origin(k);
    let (c1, c2) = (u1.closure(), u2.closure());
    if !c1.intersection(&c2)?.is_degenerate() {
        return Err(Error::precondition("closures of U1 and U2 meet outside the origin"));
    }
    let (v1, v2) = split_neighborhoods(&c1, &c2, &origin)?;
    let (w2, _) = split_neighborhoods(&v1.closure(), &v2.closure(), &origin)?;
    let w1 = w2.complement()?;
    for (v, w) in [(&v1, &w1), (&v2, &w2)] {
        if !v.closure().intersection(&w.closure())?.is_degenerate() {
            return Err(Error::precondition("a neighborhood V meets its W outside the origin"));
        }
    }
    let mut theta = 1.0_f64;
    for (c, v) in [(&c1, &v1), (&c2, &v2)] {
        let outside = v.complement()?.closure();
        if !c.is_degenerate() && !outside.is_degenerate() {
            theta = theta.min(separation_constant(c, &outside)?);
        }
    }
    if !(theta > 0.0) {
        return Err(Error::precondition("no positive separation constant"));
    }
    Ok(SplitCones { u: u.clone(), u1: u1.clone(), u2: u2.clone(), v1, v2, w1, w2, theta })
}

/// Worst values of the distance inequalities on real samples `|x| <= extent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceChecks {
    /// `max delta_U(theta x) - delta_{U ∪ U_nu}(x)` over `x` off `V_nu`; `<= 0` expected.
    pub off_neighborhood: f64,
    /// Empirical `C = max delta_U(x) - delta_{U ∪ U_nu}(x / theta)` over `x` in `W~_nu`.
    pub tilde_excess: f64,
    /// Same over `W~_1 ∩ W~_2` against `U ∪ U1 ∪ U2`.
    pub overlap_excess: f64,
}

impl SplitCones {
    pub fn distance_checks(&self, extent: f64, samples: usize) -> Result<DistanceChecks> {
        if self.u.dim() != 1 {
            return Err(Error::Unsupported("distance checks are sampled on the line".into()));
        }
        let uu = [self.u.union(&self.u1)?, self.u.union(&self.u2)?];
        let all = uu[0].union(&self.u2)?;
        let (vs, ws) = ([&self.v1, &self.v2], [&self.w1, &self.w2]);
        let mut out = DistanceChecks {
            off_neighborhood: f64::NEG_INFINITY,
            tilde_excess: f64::NEG_INFINITY,
            overlap_excess: f64::NEG_INFINITY,
        };
        let n = samples.max(2);
        for i in 0..n {
            let x = [-extent + 2.0 * extent * i as f64 / (n - 1) as f64];
            let du = self.u.distance(&x)?;
            let in_tilde = |w: &Cone| -> Result<bool> { Ok(w.distance(&x)? <= 1.0) };
            for nu in 0..2 {
                if !vs[nu].contains(&x)? {
                    let lhs = self.u.distance(&[self.theta * x[0]])?;
                    out.off_neighborhood = out.off_neighborhood.max(lhs - uu[nu].distance(&x)?);
                }
                if in_tilde(ws[nu])? {
                    out.tilde_excess = out.tilde_excess.max(du - uu[nu].distance(&[x[0] / self.theta])?);
                }
            }
            if in_tilde(ws[0])? && in_tilde(ws[1])? {
                out.overlap_excess = out.overlap_excess.max(du - all.distance(&[x[0] / self.theta])?);
            }
        }
        Ok(out)
    }
}

/// `(sum |v|^2 e^{-2 rho_w} dA)^{1/2}` on the grid, accumulated in log domain.
pub fn grid_weighted_norm(field: &SampledField, w: &WeightSpec) -> f64 {
    let grid = field.grid();
    let logs: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(f, v)| 2.0 * (v.norm().ln() - w.rho(&grid.complex_point(f))))
        .collect();
    log_sum_exp(&logs).map_or(0.0, |l| (0.5 * (l + grid.cell_volume().ln())).exp())
}

fn log_sum_exp(v: &[f64]) -> Option<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return None;
    }
    Some(m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln())
}

#[derive(Clone, Debug)]
pub struct SplitConfig {
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub rho: RhoConfig,
    pub seed: EntireSeed,
    /// Radius of the `rho_R` surrogate; `None` uses the real half-width of the grid.
    pub radius: Option<f64>,
    pub distance_samples: usize,
}

impl SplitConfig {
    pub fn new(grid: GridSpec) -> Self {
        SplitConfig {
            grid,
            solver: SolverConfig::default(),
            rho: RhoConfig::light(),
            seed: EntireSeed::gaussian(),
            radius: None,
            distance_samples: 2001,
        }
    }

    fn radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| {
            let a = &self.grid.axes[0];
            a.lo.abs().max(a.hi.abs())
        })
    }
}

/// Surrogate `rho_R` sampled on a grid with its sandwich diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RhoSamples {
    pub a_prime: f64,
    pub b_prime: f64,
    pub d: f64,
    pub h_analytic: f64,
    /// Smallest `H` with `rho_{A,B} - H <= rho_R` on the grid nodes with `|x| <= R`.
    pub h_empirical: f64,
    /// `max rho_R - rho_{A',B'}` on the grid; `<= 0` expected.
    pub upper_excess: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

pub fn sample_rho(
    w: &WeightSpec,
    seed: &EntireSeed,
    r: f64,
    cfg: &RhoConfig,
    grid: &GridSpec,
) -> Result<(RhoR, RhoSamples)> {
    let rho = rho_r_build(w, seed, r, cfg)?;
    let points = grid.complex_points();
    let values: Vec<f64> = points.iter().map(|z| rho.value(z)).collect();
    let wide = rho.wide();
    let mut h_empirical = rho.h;
    let mut upper_excess = f64::NEG_INFINITY;
    for (z, v) in points.iter().zip(&values) {
        if z.iter().all(|c| c.re.abs() <= r) {
            h_empirical = h_empirical.max(rho.weight.rho(z) - v);
        }
        upper_excess = upper_excess.max(v - wide.rho(z));
    }
    let samples = RhoSamples {
        a_prime: rho.a_prime,
        b_prime: rho.b_prime,
        d: rho.d,
        h_analytic: rho.h,
        h_empirical,
        upper_excess,
        values,
    };
    Ok((rho, samples))
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitReport {
    pub cones: SplitCones,
    pub a: f64,
    pub b: f64,
    pub b_tilde: f64,
    pub rho: RhoSamples,
    pub distances: DistanceChecks,
    /// `max |f - f1 - f2| / max |f|` on the grid.
    pub reconstruction_error: f64,
    pub eta_max: f64,
    /// Largest `|eta|` at nodes outside `W~_1 ∩ W~_2`; exactly zero expected.
    pub eta_outside: f64,
    /// Weighted norms of `f~_nu` with parameters `(A, B~)` over `U ∪ U_nu`.
    pub tilde_norms: [f64; 2],
    /// Weighted norms of `f_nu` with parameters `(A', B')` over `U ∪ U_nu`.
    pub norms: [f64; 2],
    pub psi_norm: f64,
    pub hormander: HormanderReport,
    pub iterations: usize,
    pub solver_residual: f64,
    pub history: Vec<Iterate>,
}

impl SplitReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.reconstruction_error <= tol
            && self.eta_outside == 0.0
            && self.norms.iter().all(|n| n.is_finite())
            && self.hormander.pass
            && self.distances.off_neighborhood <= 1e-12
            && self.distances.tilde_excess.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct Split {
    pub f1: SampledField,
    pub f2: SampledField,
    pub psi: SampledField,
    pub eta: SampledField,
    pub report: SplitReport,
}

fn certify_membership(f: &TestFunction, w: &WeightSpec) -> Result<()> {
    match l2_norm(f, w, 200, None) {
        Ok(_) => Ok(()),
        Err(Error::NormPossiblyInfinite(m)) => {
            Err(Error::precondition(format!("f is not certified in the space: {m}")))
        }
        Err(e) => Err(e),
    }
}

/// `f = f1 + f2` with `f_nu` in the space over `U ∪ U_nu` with enlarged parameters. `w` is the
/// weight over `U` in which `f` lies.
pub fn cone_split(f: &TestFunction, u1: &Cone, u2: &Cone, w: &WeightSpec, cfg: &SplitConfig) -> Result<Split> {
    let u = &w.cone;
    if u.dim() != 1 || f.k() != 1 {
        return Err(Error::Unsupported("the split pipeline runs at k = 1".into()));
    }
    certify_membership(f, w)?;
    cfg.grid.validate()?;
    let cones = split_cones(u, u1, u2)?;
    let distances = cones.distance_checks(cfg.radius(), cfg.distance_samples)?;
    let part = build_partition(&cones.w1, &cones.w2, Mollifier::new(1)?)?;
    let b_tilde = w.b / cones.theta;
    let all = u.union(u1)?.union(u2)?;
    let w_tilde = w.with_params(w.a, b_tilde).with_cone(all);
    let (_, rho) = sample_rho(&w_tilde, &cfg.seed, cfg.radius(), &cfg.rho, &cfg.grid)?;

    let grid = &cfg.grid;
    let fv = SampledField::from_fn(grid, "f", |z| f.eval(z))?;
    let f1t = SampledField::from_fn(grid, "f g1", |z| f.eval(z) * part.g1(z))?;
    let f2t = SampledField::from_fn(grid, "f g2", |z| f.eval(z) * part.g2(z))?;
    let eta = SampledField::from_fn(grid, "f dbar g1", |z| f.eval(z) * part.dbar_g1(z))?;
    let mut eta_outside = 0.0_f64;
    for (flat, v) in eta.values().iter().enumerate() {
        let x = [grid.point(flat)[0]];
        if cones.w1.distance(&x)? > 1.0 || cones.w2.distance(&x)? > 1.0 {
            eta_outside = eta_outside.max(v.norm());
        }
    }
    let two_rho: Vec<f64> = rho.values.iter().map(|r| 2.0 * r).collect();
    let sol = weighted_min_solve(&eta, &two_rho, &cfg.solver)?;
    let psi = sol.psi;
    let f1 = f1t.zip_with(&psi, "f1", |a, p| a - p)?;
    let f2 = f2t.zip_with(&psi, "f2", |a, p| a + p)?;
    let fmax = fv.max_abs();
    let reconstruction_error = if fmax == 0.0 {
        f1.max_abs().max(f2.max_abs())
    } else {
        fv.values()
            .iter()
            .zip(f1.values().iter().zip(f2.values()))
            .map(|(a, (b, c))| (a - b - c).norm())
            .fold(0.0, f64::max)
            / fmax
    };
    let hormander = hormander_check(&psi, &eta, &two_rho, HORMANDER_SLACK)?;
    let spaces = [w.with_cone(u.union(u1)?), w.with_cone(u.union(u2)?)];
    let tilde_norms = [
        grid_weighted_norm(&f1t, &spaces[0].with_params(w.a, b_tilde)),
        grid_weighted_norm(&f2t, &spaces[1].with_params(w.a, b_tilde)),
    ];
    let norms = [
        grid_weighted_norm(&f1, &spaces[0].with_params(rho.a_prime, rho.b_prime)),
        grid_weighted_norm(&f2, &spaces[1].with_params(rho.a_prime, rho.b_prime)),
    ];
    let psi_norm = grid_weighted_norm(&psi, &w_tilde.with_params(rho.a_prime, rho.b_prime));
    let report = SplitReport {
        cones,
        a: w.a,
        b: w.b,
        b_tilde,
        rho,
        distances,
        reconstruction_error,
        eta_max: eta.max_abs(),
        eta_outside,
        tilde_norms,
        norms,
        psi_norm,
        hormander,
        iterations: sol.iterations,
        solver_residual: sol.residual,
        history: sol.history,
    };
    Ok(Split { f1, f2, psi, eta, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct CarrierCones {
    pub k1: Cone,
    pub k2: Cone,
    pub w: Cone,
    pub v1: Cone,
    pub v2: Cone,
    /// `(R^k \ W) ∪ {0}`.
    pub v: Cone,
    pub u1: Cone,
    pub u2: Cone,
}

pub fn carrier_cones(k1: &Cone, k2: &Cone, w: &Cone) -> Result<CarrierCones> {
    let (v1, v2) = split_neighborhoods(k1, k2, w)?;
    let v = w.complement()?;
    let u1 = v1.closure().intersection(&v)?;
    let u2 = v2.closure().intersection(&v)?;
    Ok(CarrierCones { k1: k1.clone(), k2: k2.clone(), w: w.clone(), v1, v2, v, u1, u2 })
}

#[derive(Clone, Debug)]
pub struct CarrierSplit {
    pub cones: CarrierCones,
    /// `W ∪ U_nu ⊇ V_nu`, checked by cone arithmetic.
    pub covers: [bool; 2],
    pub split: Split,
}

/// `f = f1 + f2` with `f_nu` of the type of `K_nu`; `w` is the weight over a conic
/// neighborhood `W` of `K1 ∩ K2` in which `f` lies.
pub fn carrier_split(
    f: &TestFunction,
    k1: &Cone,
    k2: &Cone,
    w: &WeightSpec,
    cfg: &SplitConfig,
) -> Result<CarrierSplit> {
    let cones = carrier_cones(k1, k2, &w.cone)?;
    let covers = [cones.v1.is_subset(&w.cone.union(&cones.u1)?)?, cones.v2.is_subset(&w.cone.union(&cones.u2)?)?];
    let split = cone_split(f, &cones.u1, &cones.u2, w, cfg)?;
    Ok(CarrierSplit { cones, covers, split })
}

#[derive(Clone, Debug)]
pub struct DensityConfig {
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub rho: RhoConfig,
    pub seed: EntireSeed,
    /// Cone `W` over which the error is measured; `None` uses the cone of the weight.
    pub neighborhood: Option<Cone>,
}

impl DensityConfig {
    pub fn new(grid: GridSpec) -> Self {
        DensityConfig {
            grid,
            solver: SolverConfig::default(),
            rho: RhoConfig::light(),
            seed: EntireSeed::gaussian(),
            neighborhood: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityStep {
    pub n: f64,
    /// Weighted norm of `f - f_n` with the enlarged parameters over `W`.
    pub error: f64,
    /// Weighted norm of `f (1 - chi(./n))`.
    pub tail: f64,
    pub psi_norm: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub hormander: HormanderReport,
    pub iterations: usize,
    pub solver_residual: f64,
    #[serde(skip)]
    pub f_n: SampledField,
}

/// `f_n = f chi(./n) - psi_n` with `dbar psi_n = n^{-1} f (dbar chi)(./n)` solved against
/// `rho_{2n}`.
pub fn density_approximate(
    f: &TestFunction,
    w: &WeightSpec,
    ns: &[f64],
    cfg: &DensityConfig,
) -> Result<Vec<DensityStep>> {
    if w.k() != 1 || f.k() != 1 {
        return Err(Error::Unsupported("the density pipeline runs at k = 1".into()));
    }
    let nb = cfg.neighborhood.clone().unwrap_or_else(|| w.cone.clone());
    if !w.cone.is_subset(&nb)? {
        return Err(Error::precondition("W does not contain U"));
    }
    certify_membership(f, &w.with_cone(nb.clone()))?;
    cfg.grid.validate()?;
    let grid = &cfg.grid;
    let chi = Cutoff;
    let fv = SampledField::from_fn(grid, "f", |z| f.eval(z))?;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(format!("cutoff scale must be positive, got {n}")));
        }
        let (_, rho) = sample_rho(w, &cfg.seed, 2.0 * n, &cfg.rho, grid)?;
        let two_rho: Vec<f64> = rho.values.iter().map(|r| 2.0 * r).collect();
        let eta = SampledField::from_fn(grid, "eta_n", |z| f.eval(z) * chi.dbar(z[0] / n) / n)?;
        let sol = weighted_min_solve(&eta, &two_rho, &cfg.solver)?;
        let cut = SampledField::from_fn(grid, "f chi", |z| f.eval(z) * chi.value(z[0] / n))?;
        let f_n = cut.zip_with(&sol.psi, format!("f_{n}"), |a, p| a - p)?;
        let wide = w.with_params(rho.a_prime, rho.b_prime).with_cone(nb.clone());
        let diff = fv.zip_with(&f_n, "f - f_n", |a, b| a - b)?;
        let tail = fv.zip_with(&cut, "tail", |a, b| a - b)?;
        out.push(DensityStep {
            n,
            error: grid_weighted_norm(&diff, &wide),
            tail: grid_weighted_norm(&tail, &wide),
            psi_norm: grid_weighted_norm(&sol.psi, &wide),
            a_prime: rho.a_prime,
            b_prime: rho.b_prime,
            hormander: hormander_check(&sol.psi, &eta, &two_rho, HORMANDER_SLACK)?,
            iterations: sol.iterations,
            solver_residual: sol.residual,
            f_n,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dbar_apply;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(x: f64, y: f64) -> [Complex64; 1] {
        [Complex64::new(x, y)]
    }

    #[test]
    fn mollifier_mass_and_support() {
        for k in [1, 2] {
            let m = Mollifier::new(k).unwrap();
            let mass = match k {
                1 => crate::numerics::midpoint_box(|p| m.eval(p), &[-1.0], &[1.0], 6000).unwrap().value,
                _ => crate::numerics::midpoint_box(|p| m.eval(p), &[-1.0, -1.0], &[1.0, 1.0], 3000).unwrap().value,
            };
            assert!((mass - 1.0).abs() < 1e-8, "k = {k}: {mass}");
            assert_eq!(m.eval(&vec![1.0; k]), 0.0);
        }
        assert!(Mollifier::new(3).is_err());
    }

    #[test]
    fn partition_values() {
        let p = build_partition(&Cone::negative_ray(), &Cone::positive_ray(), Mollifier::new(1).unwrap()).unwrap();
        assert_eq!(p.g1(&z(-2.0, 0.3)), 1.0);
        assert_eq!(p.g1(&z(2.0, -5.0)), 0.0);
        assert!((p.g1(&z(0.0, 0.0)) - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let q = z(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (a, b) = (p.g1(&q), p.g2(&q));
            assert!((a + b - 1.0).abs() < 1e-15 && (0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn partition_dbar_matches_finite_differences() {
        let p = build_partition(&Cone::negative_ray(), &Cone::positive_ray(), Mollifier::new(1).unwrap()).unwrap();
        let g = GridSpec::plane((-2.0, 2.0), 401, (-0.5, 0.5), 11);
        let g1 = SampledField::from_fn(&g, "g1", |q| Complex64::new(p.g1(q), 0.0)).unwrap();
        let d = dbar_apply(&g1, 0).unwrap();
        for (flat, v) in d.values().iter().enumerate() {
            if g.is_interior(&g.multi_index(flat)) {
                let q = g.complex_point(flat);
                assert!((v - p.dbar_g1(&q)).norm() < 1e-3);
                assert_eq!(p.dbar_g1(&q), p.dbar_g1(&z(q[0].re, 0.0)));
            }
        }
    }

    #[test]
    fn partition_preconditions() {
        let m = Mollifier::new(1).unwrap();
        assert!(build_partition(&Cone::positive_ray(), &Cone::positive_ray(), m).is_err());
        assert!(build_partition(&Cone::full(1).unwrap(), &Cone::positive_ray(), m).is_err());
        let p = build_partition(&Cone::full(1).unwrap(), &Cone::origin(1), m).unwrap();
        assert_eq!(p.g2(&z(0.3, 1.0)), 0.0);
    }

    #[test]
    fn cutoff_profile() {
        let c = Cutoff;
        assert_eq!(c.value(Complex64::new(0.5, 0.5)), 1.0);
        assert_eq!(c.value(Complex64::new(0.0, 2.5)), 0.0);
        let h = 1e-6;
        for t in [1.1, 1.5, 1.9] {
            let fd = (c.step(t + h) - c.step(t - h)) / (2.0 * h);
            assert!((fd - c.step_prime(t)).abs() < 1e-6);
        }
        assert!(c.sup_dbar_sq() > 0.0 && c.sup_dbar_sq() < 10.0);
    }

    #[test]
    fn carrier_cone_arithmetic() {
        let t = carrier_cones(&Cone::positive_ray(), &Cone::negative_ray(), &Cone::origin(1)).unwrap();
        assert!(t.v.is_full());
        assert_eq!(t.u1, Cone::positive_ray());
        assert_eq!(t.u2, Cone::negative_ray());
        let s = split_cones(&Cone::origin(1), &t.u1, &t.u2).unwrap();
        assert_eq!(s.theta, 1.0);
        assert_eq!(s.w1, Cone::negative_ray());
        let d = s.distance_checks(5.0, 201).unwrap();
        assert!(d.off_neighborhood <= 0.0 && d.tilde_excess.is_finite() && d.overlap_excess.is_finite());
    }

    #[test]
    fn zero_function_splits_into_zeros() {
        let g = GridSpec::plane((-3.0, 3.0), 61, (-1.0, 1.0), 21);
        let w = WeightSpec::squares(Cone::origin(1), 2.0, 2.0).unwrap();
        let s =
            cone_split(&TestFunction::zero(1), &Cone::positive_ray(), &Cone::negative_ray(), &w, &SplitConfig::new(g))
                .unwrap();
        assert_eq!(s.f1.max_abs(), 0.0);
        assert_eq!(s.f2.max_abs(), 0.0);
    }

    #[test]
    fn split_rejects_uncertified_function() {
        let g = GridSpec::plane((-3.0, 3.0), 61, (-1.0, 1.0), 21);
        let w = WeightSpec::squares(Cone::origin(1), 2.0, 0.5).unwrap();
        let r = cone_split(
            &TestFunction::gaussian(1),
            &Cone::positive_ray(),
            &Cone::negative_ray(),
            &w,
            &SplitConfig::new(g),
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn density_with_cutoff_beyond_box_is_exact() {
        let g = GridSpec::plane((-3.0, 3.0), 61, (-1.0, 1.0), 21);
        let w = WeightSpec::squares(Cone::full(1).unwrap(), 2.0, 2.0).unwrap();
        let steps = density_approximate(&TestFunction::gaussian(1), &w, &[10.0], &DensityConfig::new(g)).unwrap();
        assert_eq!(steps[0].psi_norm, 0.0);
        assert_eq!(steps[0].error, 0.0);
    }
}
