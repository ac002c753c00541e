//! `dbar psi = eta` in one complex variable: the Cauchy transform and the weighted
//! minimal-norm solution, plus the weighted L2 estimate check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::SampledField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CauchyMethod {
    /// `O(N^2)` sum over all cells.
    Direct,
    /// Zero-padded FFT convolution, `O(N log N)`.
    Convolution,
}

/// Fraction of the box width that must carry no data on every side.
pub const SUPPORT_MARGIN: f64 = 0.1;

fn plane_dims(f: &SampledField) -> Result<(usize, usize, f64, f64)> {
    if f.k() != 1 {
        return Err(Error::Unsupported(format!("the dbar solvers need k = 1, got k = {}", f.k())));
    }
    let g = f.grid();
    Ok((g.axes[0].n, g.axes[1].n, g.step(0), g.step(1)))
}

fn check_support(eta: &SampledField) -> Result<()> {
    let g = eta.grid();
    let peak = eta.max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    let (wx, wy) = (g.axes[0].hi - g.axes[0].lo, g.axes[1].hi - g.axes[1].lo);
    for (flat, v) in eta.values().iter().enumerate() {
        let p = g.point(flat);
        let near = (p[0] - g.axes[0].lo).min(g.axes[0].hi - p[0]) < SUPPORT_MARGIN * wx
            || (p[1] - g.axes[1].lo).min(g.axes[1].hi - p[1]) < SUPPORT_MARGIN * wy;
        if near && v.norm() > 1e-12 * peak {
            return Err(Error::precondition(format!(
                "eta is nonzero within {}% of the box boundary at ({}, {})",
                SUPPORT_MARGIN * 100.0,
                p[0],
                p[1]
            )));
        }
    }
    Ok(())
}

/// `psi(z) = (1/pi) int eta(zeta) / (z - zeta) dlambda(zeta)` by the midpoint rule. The cell
/// containing `z` is centered at `z`, where the kernel integrates to zero.
pub fn cauchy_solve(eta: &SampledField, method: CauchyMethod) -> Result<SampledField> {
    let (nx, ny, hx, hy) = plane_dims(eta)?;
    check_support(eta)?;
    let kernel = |m: i64, n: i64| -> Complex64 {
        if m == 0 && n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            hx * hy / (PI * Complex64::new(m as f64 * hx, n as f64 * hy))
        }
    };
    let v = eta.values();
    let values = match method {
        CauchyMethod::Direct => {
            let support: Vec<(i64, i64, Complex64)> = v
                .iter()
                .enumerate()
                .filter(|(_, e)| e.norm() != 0.0)
                .map(|(f, e)| ((f / ny) as i64, (f % ny) as i64, *e))
                .collect();
            (0..nx * ny)
                .map(|f| {
                    let (i, j) = ((f / ny) as i64, (f % ny) as i64);
                    support.iter().map(|&(a, b, e)| kernel(i - a, j - b) * e).sum()
                })
                .collect()
        }
        CauchyMethod::Convolution => {
            let (p, q) = (2 * nx, 2 * ny);
            let mut kb = vec![Complex64::new(0.0, 0.0); p * q];
            for m in -(nx as i64 - 1)..nx as i64 {
                for n in -(ny as i64 - 1)..ny as i64 {
                    let a = m.rem_euclid(p as i64) as usize;
                    let b = n.rem_euclid(q as i64) as usize;
                    kb[a * q + b] = kernel(m, n);
                }
            }
            let mut eb = vec![Complex64::new(0.0, 0.0); p * q];
            for i in 0..nx {
                eb[i * q..i * q + ny].copy_from_slice(&v[i * ny..(i + 1) * ny]);
            }
            let mut planner = FftPlanner::new();
            fft2(&mut planner, &mut kb, p, q, false);
            fft2(&mut planner, &mut eb, p, q, false);
            for (e, k) in eb.iter_mut().zip(&kb) {
                *e *= k;
            }
            fft2(&mut planner, &mut eb, p, q, true);
            let scale = 1.0 / (p * q) as f64;
            let mut out = Vec::with_capacity(nx * ny);
            for i in 0..nx {
                out.extend(eb[i * q..i * q + ny].iter().map(|c| c * scale));
            }
            out
        }
    };
    SampledField::new(eta.grid().clone(), values, format!("cauchy({})", eta.meta()))
}

fn fft2(planner: &mut FftPlanner<f64>, buf: &mut [Complex64], p: usize, q: usize, inverse: bool) {
    let plan = |planner: &mut FftPlanner<f64>, n: usize| {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    plan(planner, q).process(buf);
    let mut t = vec![Complex64::new(0.0, 0.0); p * q];
    for a in 0..p {
        for b in 0..q {
            t[b * p + a] = buf[a * q + b];
        }
    }
    plan(planner, p).process(&mut t);
    for a in 0..p {
        for b in 0..q {
            buf[a * q + b] = t[b * p + a];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_iter: 50_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Iterate {
    pub iteration: usize,
    /// Dual functional `1/2 |L* lambda|^2 - Re <g, lambda>`.
    pub objective: f64,
    /// `|L u - g| / |g|` in the conjugated variables.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct WeightedSolution {
    pub psi: SampledField,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// `sum |psi|^2 e^{-rho} (1 + |z|^2)^{-2}` times the cell area.
    pub weighted_norm_sq: f64,
    pub history: Vec<Iterate>,
}

/// Discrete `L` acting on `u = e^{-phi/2} psi`, `phi = rho + 2 log(1 + |z|^2)`: rows are the
/// interior nodes and `L_{rq} = D_{rq} e^{(phi_q - phi_r)/2}` with `D` the centered `dbar`.
struct WeightedDbar {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    /// Per interior row: factors toward `+x, -x, +y, -y`.
    fac: Vec<[f64; 4]>,
}

impl WeightedDbar {
    fn rows(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }

    fn row_node(&self, r: usize) -> usize {
        let (i, j) = (r / (self.ny - 2) + 1, r % (self.ny - 2) + 1);
        i * self.ny + j
    }

    fn coeffs(&self, r: usize) -> [(usize, Complex64); 4] {
        let n = self.row_node(r);
        let f = self.fac[r];
        let ny = self.ny;
        [
            (n + ny, Complex64::new(self.cx * f[0], 0.0)),
            (n - ny, Complex64::new(-self.cx * f[1], 0.0)),
            (n + 1, Complex64::new(0.0, self.cy * f[2])),
            (n - 1, Complex64::new(0.0, -self.cy * f[3])),
        ]
    }

    fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.coeffs(r).iter().map(|(q, c)| c * u[*q]).sum();
        }
    }

    fn apply_adjoint(&self, lam: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (r, l) in lam.iter().enumerate() {
            for (q, c) in self.coeffs(r) {
                out[q] += c.conj() * l;
            }
        }
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.rows()).map(|r| self.coeffs(r).iter().map(|(_, c)| c.norm_sqr()).sum()).collect()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Minimizes `sum |psi|^2 e^{-rho} (1 + |z|^2)^{-2}` over grid fields subject to the
/// centered-difference `dbar psi = eta` on interior nodes, by Jacobi-preconditioned CG on
/// the normal equations of the second kind.
pub fn weighted_min_solve(eta: &SampledField, rho: &[f64], cfg: &SolverConfig) -> Result<WeightedSolution> {
    let (nx, ny, hx, hy) = plane_dims(eta)?;
    check_dim(nx * ny, rho.len())?;
    if nx < 3 || ny < 3 {
        return Err(Error::domain("the weighted solver needs at least 3 nodes per axis"));
    }
    let grid = eta.grid();
    let phi: Vec<f64> = (0..nx * ny)
        .map(|f| {
            let z = grid.complex_point(f)[0];
            rho[f] + 2.0 * (1.0 + z.norm_sqr()).ln()
        })
        .collect();
    if let Some(bad) = phi.iter().position(|p| !p.is_finite() || p.abs() / 2.0 > 700.0) {
        return Err(Error::Solver(format!("weight exponent out of range at node {bad} (phi = {:.3e})", phi[bad])));
    }
    let op = {
        let mut fac = Vec::with_capacity((nx - 2) * (ny - 2));
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                let n = i * ny + j;
                let e = |q: usize| ((phi[q] - phi[n]) / 2.0).exp();
                fac.push([e(n + ny), e(n - ny), e(n + 1), e(n - 1)]);
            }
        }
        WeightedDbar { nx, ny, cx: 1.0 / (4.0 * hx), cy: 1.0 / (4.0 * hy), fac }
    };
    let rows = op.rows();
    let g: Vec<Complex64> = (0..rows)
        .map(|r| {
            let n = op.row_node(r);
            eta.values()[n] * (-phi[n] / 2.0).exp()
        })
        .collect();
    let gnorm = norm(&g);
    let area = hx * hy;
    let mut history = Vec::new();
    let mut u = vec![Complex64::new(0.0, 0.0); nx * ny];
    let finish = |u: Vec<Complex64>, iterations, converged, residual, history| -> Result<WeightedSolution> {
        let psi: Vec<Complex64> = u.iter().zip(&phi).map(|(v, p)| v * (p / 2.0).exp()).collect();
        let weighted_norm_sq = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * area;
        Ok(WeightedSolution {
            psi: SampledField::new(grid.clone(), psi, format!("minimal({})", eta.meta()))?,
            iterations,
            converged,
            residual,
            weighted_norm_sq,
            history,
        })
    };
    if gnorm == 0.0 {
        history.push(Iterate { iteration: 0, objective: 0.0, residual: 0.0 });
        return finish(u, 0, true, 0.0, history);
    }

    let dinv: Vec<f64> = op.diag().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 0.0 }).collect();
    if dinv.contains(&0.0) {
        return Err(Error::Solver("constraint row without coupling; singular system".into()));
    }
    let mut lam = vec![Complex64::new(0.0, 0.0); rows];
    let mut r = g.clone();
    let mut z: Vec<Complex64> = r.iter().zip(&dinv).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut lp = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut ap = vec![Complex64::new(0.0, 0.0); rows];
    history.push(Iterate { iteration: 0, objective: 0.0, residual: 1.0 });
    let mut rel = 1.0;
    for it in 1..=cfg.max_iter {
        op.apply_adjoint(&p, &mut lp);
        op.apply(&lp, &mut ap);
        let pap = dot(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("normal matrix lost definiteness at iteration {it}")));
        }
        let step = rz / pap;
        for (l, pv) in lam.iter_mut().zip(&p) {
            *l += step * pv;
        }
        for (uv, lv) in u.iter_mut().zip(&lp) {
            *uv += step * lv;
        }
        for (rv, av) in r.iter_mut().zip(&ap) {
            *rv -= step * av;
        }
        rel = norm(&r) / gnorm;
        let objective = 0.5 * u.iter().map(|v| v.norm_sqr()).sum::<f64>() - dot(&g, &lam).re;
        history.push(Iterate { iteration: it, objective, residual: rel });
        if rel <= cfg.tol {
            return finish(u, it, true, rel, history);
        }
        for (zv, (rv, d)) in z.iter_mut().zip(r.iter().zip(&dinv)) {
            *zv = rv * d;
        }
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for (pv, zv) in p.iter_mut().zip(&z) {
            *pv = zv + beta * *pv;
        }
    }
    let iters = cfg.max_iter;
    let sol = finish(u, iters, false, rel, history)?;
    Err(Error::Solver(format!(
        "no convergence after {iters} iterations (relative residual {:.3e}, weighted norm {:.3e})",
        sol.residual, sol.weighted_norm_sq
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HormanderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Default discretization slack.
pub const HORMANDER_SLACK: f64 = 0.1;

/// `lhs = 2 sum |psi|^2 e^{-rho} (1+|z|^2)^{-2} dA`, `rhs = k^2 sum |eta|^2 e^{-rho} dA`.
pub fn hormander_check(psi: &SampledField, eta: &SampledField, rho: &[f64], slack: f64) -> Result<HormanderReport> {
    psi.same_grid(eta)?;
    check_dim(psi.grid().len(), rho.len())?;
    let k = psi.k() as f64;
    let area = psi.grid().cell_volume();
    let grid = psi.grid();
    let lse = |terms: &mut dyn Iterator<Item = f64>| -> f64 {
        let v: Vec<f64> = terms.filter(|t| *t > f64::NEG_INFINITY).collect();
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        (v.iter().map(|t| (t - m).exp()).sum::<f64>().ln() + m).exp()
    };
    let lhs = 2.0
        * area
        * lse(&mut psi.values().iter().enumerate().map(|(f, v)| {
            let z = grid.complex_point(f);
            let w: f64 = z.iter().map(|c| c.norm_sqr()).sum();
            2.0 * v.norm().ln() - rho[f] - 2.0 * (1.0 + w).ln()
        }));
    let rhs = k * k * area * lse(&mut eta.values().iter().enumerate().map(|(f, v)| 2.0 * v.norm().ln() - rho[f]));
    Ok(HormanderReport { lhs, rhs, pass: lhs <= rhs * (1.0 + slack) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dbar_apply, dbar_residual, dbar_residual_where, GridSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bump(z: Complex64) -> Complex64 {
        let r2 = z.norm_sqr() / 0.64;
        if r2 < 1.0 {
            c((-1.0 / (1.0 - r2)).exp(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    }

    #[test]
    fn direct_and_fft_agree() {
        let g = GridSpec::plane((-1.5, 1.5), 33, (-1.5, 1.5), 31);
        let eta = SampledField::from_fn(&g, "bump", |z| bump(z[0]) * c(1.0, 0.5)).unwrap();
        let a = cauchy_solve(&eta, CauchyMethod::Direct).unwrap();
        let b = cauchy_solve(&eta, CauchyMethod::Convolution).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = GridSpec::plane((-1.0, 1.0), 16, (-1.0, 1.0), 16);
        let eta = SampledField::zeros(&g, "0").unwrap();
        assert_eq!(cauchy_solve(&eta, CauchyMethod::Convolution).unwrap().max_abs(), 0.0);
        let rho = vec![0.0; g.len()];
        let s = weighted_min_solve(&eta, &rho, &SolverConfig::default()).unwrap();
        assert_eq!(s.psi.max_abs(), 0.0);
        let h = hormander_check(&s.psi, &eta, &rho, HORMANDER_SLACK).unwrap();
        assert!(h.pass && h.lhs == 0.0 && h.rhs == 0.0);
    }

    #[test]
    fn support_and_dimension_preconditions() {
        let g = GridSpec::plane((-1.0, 1.0), 16, (-1.0, 1.0), 16);
        let eta = SampledField::from_fn(&g, "one", |_| c(1.0, 0.0)).unwrap();
        assert!(matches!(cauchy_solve(&eta, CauchyMethod::Direct), Err(Error::Precondition(_))));
        let g2 = GridSpec::new(vec![crate::numerics::Axis::new(-1.0, 1.0, 4); 4]);
        let eta2 = SampledField::zeros(&g2, "0").unwrap();
        assert!(matches!(cauchy_solve(&eta2, CauchyMethod::Direct), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cauchy_of_smooth_data_has_small_residual() {
        let res = |n: usize| {
            let g = GridSpec::plane((-1.5, 1.5), n, (-1.5, 1.5), n);
            let eta = SampledField::from_fn(&g, "bump", |z| bump(z[0])).unwrap();
            let psi = cauchy_solve(&eta, CauchyMethod::Convolution).unwrap();
            dbar_residual(&psi, &eta, 0).unwrap() / eta.max_abs()
        };
        let (r1, r2) = (res(64), res(128));
        assert!(r2 < 0.05);
        assert!(r1 / r2 > 1.8, "observed order too low: {r1} -> {r2}");
    }

    #[test]
    fn cutoff_times_analytic_is_recovered_up_to_analytic() {
        // eta = dbar(chi g) with chi a smooth bump and g = z^2 + 1; psi - chi g must be analytic
        let g = GridSpec::plane((-1.5, 1.5), 96, (-1.5, 1.5), 96);
        let chig = SampledField::from_fn(&g, "chi g", |z| bump(z[0]) * (z[0] * z[0] + 1.0)).unwrap();
        let eta = dbar_apply(&chig, 0).unwrap();
        let psi = cauchy_solve(&eta, CauchyMethod::Convolution).unwrap();
        let diff = psi.zip_with(&chig, "psi - chi g", |a, b| a - b).unwrap();
        let zero = SampledField::zeros(&g, "0").unwrap();
        let r = dbar_residual_where(&diff, &zero, 0, |z| z[0].re.abs() < 1.2 && z[0].im.abs() < 1.2).unwrap();
        assert!(r < 0.05 * eta.max_abs(), "residual {r}");
    }

    #[test]
    fn weighted_solution_meets_constraint_and_beats_cauchy() {
        let g = GridSpec::plane((-1.5, 1.5), 41, (-1.5, 1.5), 41);
        let eta = SampledField::from_fn(&g, "bump", |z| bump(z[0])).unwrap();
        let rho: Vec<f64> = (0..g.len()).map(|f| g.complex_point(f)[0].im.powi(2)).collect();
        let s = weighted_min_solve(&eta, &rho, &SolverConfig::default()).unwrap();
        assert!(s.converged && s.residual <= 1e-10);
        let r = dbar_residual(&s.psi, &eta, 0).unwrap();
        assert!(r <= 1e-8 * eta.max_abs() * 100.0, "raw residual {r}");
        for w in s.history.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12 * w[0].objective.abs().max(1e-30));
        }
        let cauchy = cauchy_solve(&eta, CauchyMethod::Convolution).unwrap();
        let weighted = |psi: &SampledField| -> f64 {
            psi.values()
                .iter()
                .enumerate()
                .map(|(f, v)| {
                    let z = g.complex_point(f)[0];
                    v.norm_sqr() * (-rho[f]).exp() / (1.0 + z.norm_sqr()).powi(2)
                })
                .sum::<f64>()
                * g.cell_volume()
        };
        assert!(s.weighted_norm_sq <= weighted(&cauchy) * 1.05);
        let h = hormander_check(&s.psi, &eta, &rho, HORMANDER_SLACK).unwrap();
        assert!(h.pass, "{h:?}");
    }

    #[test]
    fn hormander_flags_large_analytic_addition() {
        let g = GridSpec::plane((-1.5, 1.5), 41, (-1.5, 1.5), 41);
        let eta = SampledField::from_fn(&g, "bump", |z| bump(z[0])).unwrap();
        let rho = vec![0.0; g.len()];
        let psi = cauchy_solve(&eta, CauchyMethod::Convolution).unwrap().map("plus", |v| v + 1e6);
        assert!(!hormander_check(&psi, &eta, &rho, HORMANDER_SLACK).unwrap().pass);
    }

    #[test]
    fn solver_rejects_overflowing_weight() {
        let g = GridSpec::plane((-1.0, 1.0), 8, (-1.0, 1.0), 8);
        let eta = SampledField::from_fn(&g, "b", |z| bump(z[0] * 2.0)).unwrap();
        let rho = vec![2000.0; g.len()];
        assert!(matches!(weighted_min_solve(&eta, &rho, &SolverConfig::default()), Err(Error::Solver(_))));
    }
}
