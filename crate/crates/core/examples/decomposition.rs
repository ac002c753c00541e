//! Splitting the Gaussian into pieces carried by the two half-lines.

use ccl::cones::Cone;
use ccl::decompose::{carrier_split, SplitConfig};
use ccl::numerics::GridSpec;
use ccl::weights::{TestFunction, WeightSpec};

fn main() -> ccl::Result<()> {
    let w = WeightSpec::squares(Cone::origin(1), 2.0, 2.0)?;
    let cfg = SplitConfig::new(GridSpec::plane((-4.0, 4.0), 401, (-1.0, 1.0), 201));
    let t = carrier_split(&TestFunction::gaussian(1), &Cone::positive_ray(), &Cone::negative_ray(), &w, &cfg)?;
    let r = &t.split.report;
    println!("V1 = {:?}, V2 = {:?}", t.cones.v1, t.cones.v2);
    println!("theta {}, A' {}, B' {:.4}", r.cones.theta, r.rho.a_prime, r.rho.b_prime);
    println!("max |f - f1 - f2| = {:.3e}", r.reconstruction_error);
    println!("norms in (A', B'): {:.6e} {:.6e}", r.norms[0], r.norms[1]);
    println!("eta outside |x| <= 1: {}", r.eta_outside);
    println!("solver: {} iterations, residual {:.2e}", r.iterations, r.solver_residual);
    Ok(())
}
