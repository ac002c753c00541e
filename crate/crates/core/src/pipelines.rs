//! Scenario runners behind the `ccl` subcommands. Each returns a [`Report`] whose checks
//! decide the exit status.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cones::{separation_constant, split_neighborhoods, Cone};
use crate::config::{Pipeline, Scenario};
use crate::dbar::{cauchy_solve, hormander_check, weighted_min_solve, SolverConfig, HORMANDER_SLACK};
use crate::decompose::{carrier_split, density_approximate, sample_rho, DensityConfig, SplitConfig};
use crate::error::{Error, Result};
use crate::numerics::{dbar_apply, dbar_residual_where, GridSpec, SampledField};
use crate::profiles::{log_grid, verify_profile};
use crate::psh::{
    psh_check, random_probes, rho_r_build, seed_envelope_build, sigma_r_build, theta, EntireSeed, RhoConfig,
    SeedConfig, SeedScaling, SeedVariant, SigmaConfig, Surrogate,
};
use crate::report::{Report, Series};
use crate::weights::{shift_samples, verify_gap, verify_shift, TestFunction};

/// `0` pass, `1` failed check or solver failure, `2` unreadable input or output, `3` violated
/// precondition.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Csv(_) => 2,
        Error::Solver(_) | Error::Seed(_) => 1,
        _ => 3,
    }
}

pub fn run(p: Pipeline, s: &Scenario) -> Result<Report> {
    match p {
        Pipeline::VerifyProfiles => verify_profiles(s),
        Pipeline::Cone => cone(s),
        Pipeline::Psh => psh(s),
        Pipeline::Dbar => dbar(s),
        Pipeline::Decompose => decompose(s),
        Pipeline::Density => density(s),
    }
}

fn report(p: Pipeline, s: &Scenario) -> Report {
    Report::new(p.name(), &s.name, s.seed)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn verify_profiles(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::VerifyProfiles, s);
    let p = &s.profiles;
    let nodes = log_grid(p.s_min, p.s_max, p.nodes);
    let pr = verify_profile(&p.alpha, &p.beta, &nodes)?;
    r.at_most("profile_violations", pr.violations.len() as f64, 0.0);
    let mut series = Series::new("profiles", &["s", "alpha", "beta"]);
    for &t in &nodes {
        series.push(vec![t, p.alpha.value(t), p.beta.value(t)]);
    }
    r.series.push(series);

    let g = &s.gap;
    let grid = g.grid.spec(s.grid_budget)?;
    let mut gap_series = Series::new("gap", &["cone", "sigma", "tau", "c", "sigma_estimate"]);
    for (i, cone) in g.cones.iter().enumerate() {
        let w = s.weight(cone.clone(), g.a, g.b)?;
        let gr = verify_gap(&w, g.a_prime, g.b_prime, &grid)?;
        r.at_most(&format!("gap_violations_{i}"), gr.violations.len() as f64, 0.0);
        r.check(&format!("gap_sigma_{i}"), gr.sigma, 0.0, gr.sigma > 0.0);
        r.param(&format!("gap_tau_{i}"), gr.tau);
        gap_series.push(vec![i as f64, gr.sigma, gr.tau, gr.c, gr.sigma_estimate]);
        let zetas = shift_samples(w.k(), g.shift_radius, g.shift_radial, g.shift_angular, s.seed);
        let sr = verify_shift(&w, g.a_prime, g.b_prime, g.shift_radius, &grid, &zetas)?;
        r.at_most(&format!("shift_c_{i}"), sr.c, sr.bound);
        r.at_most(&format!("shift_violations_{i}"), sr.violations.len() as f64, 0.0);
    }
    r.series.push(gap_series);
    r.param("a", g.a);
    r.param("b", g.b);
    r.param("a_prime", g.a_prime);
    r.param("b_prime", g.b_prime);
    Ok(r)
}

/// Uniformly random unit-direction point of `cone` with uniform-norm radius in `(0, 1]`.
fn sample_in_cone(cone: &Cone, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let rad = rng.gen_range(0.05..=1.0);
    match cone {
        Cone::Line { negative, positive } => {
            let sides: Vec<f64> =
                [(*negative, -1.0), (*positive, 1.0)].iter().filter(|(on, _)| *on).map(|(_, s)| *s).collect();
            if sides.is_empty() {
                return Ok(vec![0.0]);
            }
            Ok(vec![sides[rng.gen_range(0..sides.len())] * rad])
        }
        Cone::Plane(set) => {
            let arcs = set.arcs();
            if arcs.is_empty() {
                return Ok(vec![0.0, 0.0]);
            }
            let arc = arcs[rng.gen_range(0..arcs.len())];
            let t = if arc.hi > arc.lo { rng.gen_range(arc.lo..=arc.hi) } else { arc.lo };
            let (sn, cs) = t.sin_cos();
            let m = sn.abs().max(cs.abs());
            Ok(vec![rad * cs / m, rad * sn / m])
        }
        Cone::Sampled { .. } => Err(Error::Unsupported("sampling needs k <= 2".into())),
    }
}

pub fn cone(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::Cone, s);
    let c = &s.cone;
    let theta = separation_constant(&c.k1, &c.k2)?;
    r.param("theta", theta);
    r.check("theta_positive", theta, 0.0, theta > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst = f64::NEG_INFINITY;
    let mut series = Series::new("separation", &["x1", "x2", "ratio"]);
    for _ in 0..c.samples {
        let x = sample_in_cone(&c.k2, &mut rng)?;
        let n = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if n == 0.0 {
            continue;
        }
        let d = c.k1.distance(&x)?;
        worst = worst.max(theta - d / n);
        let x2 = x.get(1).copied().unwrap_or(0.0);
        series.push(vec![x[0], x2, d / n]);
    }
    r.at_most("separation_violation", worst.max(0.0), 1e-12);
    r.series.push(series);
    let (v1, v2) = split_neighborhoods(&c.k1, &c.k2, &c.w)?;
    let inside = v1.closure().intersection(&v2.closure())?.is_subset(&c.w)?;
    let covers = c.k1.is_subset(&v1)? && c.k2.is_subset(&v2)?;
    r.check("split_closures_inside_w", flag(inside), 1.0, inside);
    r.check("split_covers_k", flag(covers), 1.0, covers);
    Ok(r)
}

fn random_point(rng: &mut ChaCha8Rng, k: usize, re: f64, im: f64) -> Vec<Complex64> {
    (0..k).map(|_| Complex64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im))).collect()
}

pub fn psh(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::Psh, s);
    let p = &s.psh;
    let tol = p.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);

    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..p.theta_samples {
        let a = 2f64.powf(rng.gen_range(-10.0..=10.0));
        let z = random_point(&mut rng, 1, 100.0, 100.0)[0];
        lower = lower.max(-theta(a, Complex64::new(0.0, z.im)));
        let bound = z.im.abs() - a * crate::psh::log_plus(z.re.abs() / a);
        upper = upper.max(theta(a, z) - bound);
    }
    r.at_most("theta_imaginary_axis_nonnegative", lower, 1e-9);
    r.at_most("theta_upper_bound", upper, 1e-9);

    for (ci, cone) in p.sigma_cones.iter().enumerate() {
        let k = cone.dim();
        for &rad in &p.sigma_radii {
            let probes: Vec<Vec<f64>> =
                (0..p.sigma_probes).map(|_| (0..k).map(|_| rng.gen_range(-rad..=rad)).collect()).collect();
            let sigma = sigma_r_build(cone, rad, &SigmaConfig::default().with_probes(probes.clone()))?;
            let points: Vec<Vec<Complex64>> =
                (0..p.sigma_probes).map(|_| random_point(&mut rng, k, 2.0 * rad, rad)).collect();
            let b = sigma.check_bounds(&points, &probes);
            let tag = format!("{ci}_r{rad}");
            r.at_most(&format!("sigma_upper_r_{tag}"), b.upper_r, tol);
            r.at_most(&format!("sigma_upper_delta_{tag}"), b.upper_delta, tol);
            r.at_most(&format!("sigma_lower_{tag}"), b.lower, tol);
        }
    }

    let seed = EntireSeed::gaussian();
    let (alpha, beta) = (&s.profiles.alpha, &s.profiles.beta);
    let ext = p.seed_extent;
    let pts: Vec<Vec<Complex64>> = (0..p.seed_samples).map(|_| random_point(&mut rng, 1, ext, ext)).collect();
    let env = seed_envelope_build(
        &seed,
        SeedVariant::General,
        alpha,
        beta,
        1,
        SeedScaling::unit(&seed),
        &SeedConfig::default().with_extra(pts.clone()),
    )?;
    let (lo, hi) = env.check_sandwich(&pts);
    r.param("seed_h", env.h);
    r.at_most("seed_sandwich_lower", lo, tol);
    r.at_most("seed_sandwich_upper", hi, tol);

    let w = s.weight(Cone::origin(1), p.a, p.b)?;
    let rad = p.rho_radius;
    let zs: Vec<Vec<Complex64>> = (0..p.rho_samples).map(|_| random_point(&mut rng, 1, 1.5 * rad, 2.0)).collect();
    let rho = rho_r_build(&w, &seed, rad, &RhoConfig::default().with_witnesses(&zs))?;
    let b = rho.check_bounds(&zs)?;
    r.param("a_prime", rho.a_prime);
    r.param("b_prime", rho.b_prime);
    r.param("d", rho.d);
    r.param("h", rho.h);
    r.param("h_empirical", rho.empirical_h(&zs));
    r.at_most("rho_upper_full", b.upper_full, tol);
    r.at_most("rho_upper_cone", b.upper_cone, tol);
    r.at_most("rho_lower", b.lower, tol);
    let probes = random_probes(1, p.submean_probes, rad, 2.0, 0.5, 0.25, &mut rng);
    let light = rho_r_build(&w, &seed, rad, &RhoConfig::light())?;
    r.at_most("rho_submean_deficiency", psh_check(|z| light.value(z), &probes)?, 1e-6);

    let wide = rho.wide();
    let mut series = Series::new("bounds", &["abs_x", "lower_gap", "upper_gap"]);
    for i in 0..=60 {
        let x = 1.5 * rad * i as f64 / 60.0;
        let z = [Complex64::new(x, 0.5)];
        let v = rho.value(&z);
        series.push(vec![x, v - (w.rho(&z) - rho.h), wide.rho(&z) - v]);
    }
    r.series.push(series);
    Ok(r)
}

fn solver(s: &Scenario) -> SolverConfig {
    s.solver.config()
}

fn weighted_sq(psi: &SampledField, two_rho: &[f64]) -> f64 {
    let g = psi.grid();
    psi.values()
        .iter()
        .enumerate()
        .map(|(f, v)| {
            let z = g.complex_point(f)[0];
            v.norm_sqr() * (-two_rho[f]).exp() / (1.0 + z.norm_sqr()).powi(2)
        })
        .sum::<f64>()
        * g.cell_volume()
}

fn bump_field(grid: &GridSpec) -> Result<SampledField> {
    SampledField::from_fn(grid, "bump", |z| {
        let r2 = z[0].norm_sqr() / 0.64;
        Complex64::new(if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 }, 0.0)
    })
}

pub fn dbar(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::Dbar, s);
    let d = &s.dbar;
    let hw = d.half_width;
    let grid = GridSpec::plane((-hw, hw), d.n, (-hw, hw), d.n).with_budget(s.grid_budget);
    grid.validate()?;
    let h = grid.step(0);
    let one = Complex64::new(1.0, 0.0);
    let eta = SampledField::from_fn(&grid, "disk", |z| if z[0].norm() <= 1.0 { one } else { one * 0.0 })?;
    let psi = cauchy_solve(&eta, d.method)?;
    let away = |z: &[Complex64]| (z[0].norm() - 1.0).abs() >= 2.0 * h;
    let mut err = 0.0_f64;
    for (f, v) in psi.values().iter().enumerate() {
        let z = grid.complex_point(f);
        if away(&z) {
            let exact = if z[0].norm() <= 1.0 { z[0].conj() } else { 1.0 / z[0] };
            err = err.max((v - exact).norm());
        }
    }
    r.at_most("disk_max_error", err, 0.02);
    let res = dbar_residual_where(&psi, &eta, 0, away)?;
    r.at_most("disk_residual_ratio", res / eta.max_abs(), 0.05);

    let wg = d.weighted_grid.spec(s.grid_budget)?;
    let w = s.weight(Cone::origin(1), d.a, d.b)?;
    let seed = EntireSeed::gaussian();
    let radius = wg.axes[0].lo.abs().max(wg.axes[0].hi.abs());
    let (_, rho) = sample_rho(&w, &seed, radius, &RhoConfig::light(), &wg)?;
    let two_rho: Vec<f64> = rho.values.iter().map(|v| 2.0 * v).collect();
    let cauchy = cauchy_solve(&bump_field(&wg)?, d.method)?;
    let eta_d = dbar_apply(&cauchy, 0)?;
    let sol = weighted_min_solve(&eta_d, &two_rho, &solver(s))?;
    r.at_most("constraint_residual", sol.residual, 1e-8);
    let rise = sol.history.windows(2).map(|p| p[1].objective - p[0].objective).fold(0.0, f64::max);
    r.at_most("objective_increase", rise, 1e-12 * sol.history.last().map_or(1.0, |i| i.objective.abs()));
    let feasible = weighted_sq(&cauchy, &two_rho);
    r.param("minimizer_weighted_norm_sq", sol.weighted_norm_sq);
    r.param("cauchy_weighted_norm_sq", feasible);
    r.at_most("minimizer_vs_feasible", sol.weighted_norm_sq, feasible * (1.0 + 1e-9));
    let hc = hormander_check(&sol.psi, &eta_d, &two_rho, HORMANDER_SLACK)?;
    r.param("hormander_lhs", hc.lhs);
    r.param("hormander_rhs", hc.rhs);
    r.at_most("hormander_ratio", hc.lhs / hc.rhs, 1.0 + HORMANDER_SLACK);

    let fine = d.weighted_grid.clone();
    let fine = crate::config::PlaneGrid::new(fine.x, 2 * fine.nx - 1, fine.y, 2 * fine.ny - 1).spec(s.grid_budget)?;
    let (_, rho_f) = sample_rho(&w, &seed, radius, &RhoConfig::light(), &fine)?;
    let two_rho_f: Vec<f64> = rho_f.values.iter().map(|v| 2.0 * v).collect();
    let sol_f = weighted_min_solve(&bump_field(&fine)?, &two_rho_f, &solver(s))?;
    let sol_c = weighted_min_solve(&bump_field(&wg)?, &two_rho, &solver(s))?;
    let change = (sol_f.weighted_norm_sq - sol_c.weighted_norm_sq).abs() / sol_c.weighted_norm_sq;
    r.at_most("refinement_objective_change", change, 0.05);

    let mut series = Series::new("solver", &["iteration", "objective", "residual"]);
    for it in &sol.history {
        series.push(vec![it.iteration as f64, it.objective, it.residual]);
    }
    r.series.push(series);
    r.param("h", h);
    r.param("iterations", sol.iterations as f64);
    Ok(r)
}

pub fn decompose(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::Decompose, s);
    let d = &s.decompose;
    let w = s.weight(d.w.clone(), d.a, d.b)?;
    let mut cfg = SplitConfig::new(d.grid.spec(s.grid_budget)?);
    cfg.solver = solver(s);
    let t = carrier_split(&TestFunction::gaussian(1), &d.k1, &d.k2, &w, &cfg)?;
    let rep = &t.split.report;
    r.at_most("reconstruction_error", rep.reconstruction_error, d.tolerance);
    r.at_most("eta_outside_strip", rep.eta_outside, 0.0);
    let worst_norm = rep.norms[0].max(rep.norms[1]);
    r.check("enlarged_norms_finite", worst_norm, f64::MAX, worst_norm.is_finite());
    r.at_most("hormander_ratio", rep.hormander.lhs / rep.hormander.rhs, 1.0 + HORMANDER_SLACK);
    r.at_most("constraint_residual", rep.solver_residual, 1e-8);
    r.at_most("off_neighborhood_distance", rep.distances.off_neighborhood, 1e-12);
    r.check("tilde_excess_finite", rep.distances.tilde_excess, f64::MAX, rep.distances.tilde_excess.is_finite());
    r.at_most("rho_upper_excess", rep.rho.upper_excess, 1e-9);
    let covers = t.covers.iter().all(|c| *c);
    r.check("w_union_u_covers_v", flag(covers), 1.0, covers);
    for (name, v) in [
        ("theta", rep.cones.theta),
        ("a", rep.a),
        ("b", rep.b),
        ("b_tilde", rep.b_tilde),
        ("a_prime", rep.rho.a_prime),
        ("b_prime", rep.rho.b_prime),
        ("d", rep.rho.d),
        ("h", rep.rho.h_analytic),
        ("h_empirical", rep.rho.h_empirical),
        ("tilde_excess_c", rep.distances.tilde_excess),
        ("overlap_excess_c", rep.distances.overlap_excess),
        ("norm_f1", rep.norms[0]),
        ("norm_f2", rep.norms[1]),
        ("norm_f1_tilde", rep.tilde_norms[0]),
        ("norm_f2_tilde", rep.tilde_norms[1]),
        ("norm_psi", rep.psi_norm),
        ("eta_max", rep.eta_max),
        ("hormander_lhs", rep.hormander.lhs),
        ("hormander_rhs", rep.hormander.rhs),
        ("iterations", rep.iterations as f64),
    ] {
        r.param(name, v);
    }
    let mut series = Series::new("solver", &["iteration", "objective", "residual"]);
    for it in &rep.history {
        series.push(vec![it.iteration as f64, it.objective, it.residual]);
    }
    r.series.push(series);
    let grid = &t.split.f1.grid().clone();
    let mut profile = Series::new("real_axis", &["x", "abs_f1", "abs_f2", "abs_psi"]);
    let j0 = grid.axes[1].n / 2;
    for i in 0..grid.axes[0].n {
        let f = i * grid.axes[1].n + j0;
        profile.push(vec![
            grid.point(f)[0],
            t.split.f1.values()[f].norm(),
            t.split.f2.values()[f].norm(),
            t.split.psi.values()[f].norm(),
        ]);
    }
    r.series.push(profile);
    for (name, field) in [("f1", &t.split.f1), ("f2", &t.split.f2), ("psi", &t.split.psi), ("eta", &t.split.eta)] {
        r.fields.push(field.map(name, |v| v));
    }
    Ok(r)
}

pub fn density(s: &Scenario) -> Result<Report> {
    let mut r = report(Pipeline::Density, s);
    let d = &s.density;
    let w = s.weight(d.u.clone(), d.a, d.b)?;
    let mut cfg = DensityConfig::new(d.grid.spec(s.grid_budget)?);
    cfg.solver = solver(s);
    cfg.neighborhood = Some(d.w.clone());
    let steps = density_approximate(&TestFunction::gaussian(1), &w, &d.ns, &cfg)?;
    let mut series = Series::new("series", &["n", "error", "tail", "psi_norm"]);
    for st in &steps {
        series.push(vec![st.n, st.error, st.tail, st.psi_norm]);
        r.at_most(
            &format!("hormander_ratio_n{}", st.n),
            st.hormander.lhs / st.hormander.rhs.max(f64::MIN_POSITIVE),
            1.0 + HORMANDER_SLACK,
        );
        r.at_most(&format!("constraint_residual_n{}", st.n), st.solver_residual, 1e-8);
    }
    r.series.push(series);
    let decreasing = steps.windows(2).all(|p| p[1].error < p[0].error);
    r.check("errors_strictly_decreasing", flag(decreasing), 1.0, decreasing);
    if let (Some(first), Some(last)) = (steps.first(), steps.last()) {
        r.at_most("final_over_first", last.error / first.error, d.final_ratio);
        r.param("a_prime", first.a_prime);
        r.param("b_prime", first.b_prime);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::precondition("x")), 3);
        assert_eq!(exit_code(&Error::Solver("x".into())), 1);
    }

    #[test]
    fn cone_pipeline_canonical() {
        let r = cone(&Scenario::default()).unwrap();
        assert!(r.passed(), "{:?}", r.lines());
        assert_eq!(r.params[0], ("theta".to_string(), 1.0));
    }

    #[test]
    fn gap_precondition_maps_to_three() {
        let s = Scenario::from_toml("", &["gap.a_prime=1.0".into()]).unwrap();
        let e = verify_profiles(&s).unwrap_err();
        assert_eq!(exit_code(&e), 3);
    }
}
