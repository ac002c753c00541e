//! Weighted minimal-norm solution of dbar psi = eta and the L2 estimate it satisfies.

use ccl::cones::Cone;
use ccl::dbar::{hormander_check, weighted_min_solve, SolverConfig, HORMANDER_SLACK};
use ccl::decompose::sample_rho;
use ccl::numerics::{GridSpec, SampledField};
use ccl::psh::{EntireSeed, RhoConfig};
use ccl::weights::WeightSpec;
use ccl::Complex64;

fn main() -> ccl::Result<()> {
    let grid = GridSpec::plane((-2.0, 2.0), 161, (-1.0, 1.0), 81);
    let eta = SampledField::from_fn(&grid, "bump", |z| {
        let s = z[0].norm_sqr() / 0.64;
        Complex64::new(if s < 1.0 { (-1.0 / (1.0 - s)).exp() } else { 0.0 }, 0.0)
    })?;
    let w = WeightSpec::squares(Cone::origin(1), 2.0, 2.0)?;
    let (_, rho) = sample_rho(&w, &EntireSeed::gaussian(), 2.0, &RhoConfig::light(), &grid)?;
    let two_rho: Vec<f64> = rho.values.iter().map(|v| 2.0 * v).collect();

    let sol = weighted_min_solve(&eta, &two_rho, &SolverConfig::default())?;
    println!("{} iterations, residual {:.2e}", sol.iterations, sol.residual);
    for it in sol.history.iter().step_by(16) {
        println!("  {:4} {:.10e} {:.3e}", it.iteration, it.objective, it.residual);
    }
    let check = hormander_check(&sol.psi, &eta, &two_rho, HORMANDER_SLACK)?;
    println!("lhs {:.4e} rhs {:.4e} pass {}", check.lhs, check.rhs, check.pass);
    Ok(())
}
