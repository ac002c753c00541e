//! Admissibility of index functions.

use ccl::profiles::{log_grid, verify_profile, Profile};

fn main() -> ccl::Result<()> {
    let grid = log_grid(1e-3, 1e3, 400);
    let square = Profile::square();
    let report = verify_profile(&square, &square, &grid)?;
    println!("alpha = beta = s^2: {} violations", report.violations.len());

    let root = Profile::power(0.5).with_convex(true);
    let report = verify_profile(&square, &root, &grid)?;
    for v in report.violations.iter().take(3) {
        println!("beta = sqrt(s): {:?} {:?} at {:?} by {:.3e}", v.profile, v.condition, v.at, v.magnitude);
    }
    Ok(())
}
