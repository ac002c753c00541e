use std::f64::consts::{PI, TAU};

use ccl::cones::{separation_constant, AngleArc, Cone};
use ccl::dbar::{cauchy_solve, weighted_min_solve, CauchyMethod, SolverConfig};
use ccl::decompose::{build_partition, Cutoff, Mollifier};
use ccl::numerics::{dbar_apply, uniform_norm, GridSpec, SampledField};
use ccl::psh::{log_plus, theta_eval};
use ccl::Complex64;
use proptest::prelude::*;

fn arc_cone(lo: f64, width: f64) -> Cone {
    Cone::arcs([AngleArc::closed(lo, lo + width)]).unwrap()
}

fn bump(grid: &GridSpec, c: Complex64, r: f64, scale: Complex64) -> SampledField {
    SampledField::from_fn(grid, "bump", |z| {
        let s = (z[0] - c).norm_sqr() / (r * r);
        if s < 1.0 {
            scale * (-1.0 / (1.0 - s)).exp()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_bounds_hold(la in -10.0f64..10.0, x in -100.0f64..100.0, y in -100.0f64..100.0) {
        let a = 2f64.powf(la);
        let v = theta_eval(a, Complex64::new(x, y)).unwrap();
        prop_assert!(v <= y.abs() - a * log_plus(x.abs() / a) + 1e-9);
        prop_assert!(theta_eval(a, Complex64::new(0.0, y)).unwrap() >= -1e-8);
    }

    #[test]
    fn distance_bounded_by_norm(lo in 0.0f64..TAU, width in 0.0f64..PI, t in 0.0f64..TAU, r in 0.0f64..50.0) {
        let k = arc_cone(lo, width);
        let x = [r * t.cos(), r * t.sin()];
        let d = k.distance(&x).unwrap();
        prop_assert!(d >= 0.0 && d <= uniform_norm(&x) + 1e-12);
        prop_assert_eq!(d == 0.0, k.contains(&x).unwrap() || r == 0.0);
    }

    #[test]
    fn separation_constant_in_unit_interval(a in 0.0f64..TAU, wa in 0.0f64..1.0, gap in 0.05f64..1.0, wb in 0.0f64..1.0) {
        let k1 = arc_cone(a, wa);
        let k2 = arc_cone(a + wa + gap, wb);
        let theta = separation_constant(&k1, &k2).unwrap();
        prop_assert!(theta > 0.0 && theta <= 1.0);
        for i in 0..=8 {
            let t = a + wa + gap + wb * i as f64 / 8.0;
            let x = [t.cos(), t.sin()];
            prop_assert!(k1.distance(&x).unwrap() >= theta * uniform_norm(&x) - 1e-12);
        }
    }

    #[test]
    fn partition_sums_to_one(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let p = build_partition(&Cone::negative_ray(), &Cone::positive_ray(), Mollifier::new(1).unwrap()).unwrap();
        let z = [Complex64::new(x, y)];
        let g1 = p.g1(&z);
        prop_assert!((0.0..=1.0).contains(&g1));
        prop_assert!((g1 + p.g2(&z) - 1.0).abs() <= 1e-15);
        if x.abs() > 1.0 {
            prop_assert_eq!(p.dbar_g1(&z), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn cutoff_is_one_near_origin(r in 0.0f64..3.0, t in 0.0f64..TAU) {
        let z = Complex64::from_polar(r, t);
        let c = Cutoff.value(z);
        prop_assert!((0.0..=1.0).contains(&c));
        if r <= 1.0 {
            prop_assert_eq!(c, 1.0);
        }
        prop_assert!(Cutoff.dbar(z).norm_sqr() <= Cutoff.sup_dbar_sq() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cauchy_transform_is_linear(cx in -0.3f64..0.3, cy in -0.3f64..0.3, s in -2.0f64..2.0) {
        let grid = GridSpec::plane((-1.0, 1.0), 48, (-1.0, 1.0), 48);
        let e1 = bump(&grid, Complex64::new(cx, cy), 0.5, Complex64::new(1.0, 0.0));
        let e2 = bump(&grid, Complex64::new(-cy, cx), 0.4, Complex64::new(0.0, 1.0));
        let sum = e1.zip_with(&e2, "sum", |a, b| a * s + b).unwrap();
        let lhs = cauchy_solve(&sum, CauchyMethod::Direct).unwrap();
        let p1 = cauchy_solve(&e1, CauchyMethod::Convolution).unwrap();
        let p2 = cauchy_solve(&e2, CauchyMethod::Convolution).unwrap();
        for i in 0..grid.len() {
            let rhs = p1.values()[i] * s + p2.values()[i];
            prop_assert!((lhs.values()[i] - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn weighted_solution_scales(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let grid = GridSpec::plane((-1.0, 1.0), 25, (-1.0, 1.0), 25);
        let rho: Vec<f64> = (0..grid.len()).map(|f| grid.point(f)[0].powi(2)).collect();
        let eta = bump(&grid, Complex64::new(0.0, 0.0), 0.6, Complex64::new(1.0, 0.0));
        let c = Complex64::new(re, im);
        let cfg = SolverConfig::default();
        let a = weighted_min_solve(&eta, &rho, &cfg).unwrap();
        let b = weighted_min_solve(&eta.map("scaled", |v| v * c), &rho, &cfg).unwrap();
        let ratio = b.weighted_norm_sq / (a.weighted_norm_sq * c.norm_sqr());
        prop_assert!((ratio - 1.0).abs() <= 1e-6);
        let back = dbar_apply(&b.psi, 0).unwrap();
        for (i, v) in back.values().iter().enumerate() {
            let m = grid.multi_index(i);
            if grid.is_interior(&m) {
                prop_assert!((v - eta.values()[i] * c).norm() <= 1e-6 * c.norm());
            }
        }
    }
}
