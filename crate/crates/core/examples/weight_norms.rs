//! Weighted norms of a Gaussian and the growth-gap fit between two weights.

use ccl::cones::Cone;
use ccl::numerics::GridSpec;
use ccl::weights::{l2_norm, shift_bound, sup_norm, verify_gap, TestFunction, WeightSpec};

fn main() -> ccl::Result<()> {
    let f = TestFunction::gaussian(1);
    for cone in [Cone::origin(1), Cone::positive_ray(), Cone::full(1)?] {
        let w = WeightSpec::squares(cone.clone(), 2.0, 2.0)?;
        let sup = sup_norm(&f, &w, None)?;
        let l2 = l2_norm(&f, &w, 200, None)?;
        println!("{cone:?}: sup {:.6e} ({:?}), l2 {:.6e}", sup.value, sup.certificate, l2.value);
    }

    let w = WeightSpec::squares(Cone::origin(1), 1.0, 1.0)?;
    let grid = GridSpec::plane((-10.0, 10.0), 201, (-10.0, 10.0), 201);
    let gap = verify_gap(&w, 2.0, 2.0, &grid)?;
    println!("gap: sigma {:.4} tau {} C {:.4}", gap.sigma, gap.tau, gap.c);
    println!("shift bound for R = 1: {}", shift_bound(&w, 2.0, 2.0, 1.0));
    Ok(())
}
