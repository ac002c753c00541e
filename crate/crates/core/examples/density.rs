//! Approximation of a test function by functions of a smaller weighted space.

use ccl::cones::Cone;
use ccl::decompose::{density_approximate, DensityConfig};
use ccl::numerics::GridSpec;
use ccl::weights::{TestFunction, WeightSpec};

fn main() -> ccl::Result<()> {
    let w = WeightSpec::squares(Cone::positive_ray(), 2.0, 2.0)?;
    let mut cfg = DensityConfig::new(GridSpec::plane((-4.0, 20.0), 481, (-1.0, 1.0), 81));
    cfg.neighborhood = Some(Cone::positive_ray());
    let steps = density_approximate(&TestFunction::gaussian(1), &w, &[2.0, 4.0, 8.0], &cfg)?;
    println!("{:>4} {:>12} {:>12}", "n", "error", "tail");
    for s in &steps {
        println!("{:>4} {:>12.4e} {:>12.4e}", s.n, s.error, s.tail);
    }
    Ok(())
}
