//! Plurisubharmonic minorants: Theta_a, sigma_R and the full rho_R construction.

use ccl::cones::Cone;
use ccl::psh::{
    psh_check, random_probes, rho_r_build, rho_r_constants, sigma_r_build, theta_eval, EntireSeed, RhoConfig,
    SigmaConfig, Surrogate,
};
use ccl::weights::WeightSpec;
use ccl::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ccl::Result<()> {
    for y in [0.5, 2.0, 10.0] {
        println!("Theta_1({y}i) = {:.6}", theta_eval(1.0, Complex64::new(0.0, y))?);
    }

    let sigma = sigma_r_build(&Cone::positive_ray(), 5.0, &SigmaConfig::light())?;
    for x in [-4.0, -1.0, 0.0, 2.0] {
        println!("sigma_5({x}) = {:.4}", sigma.value(&[Complex64::new(x, 0.0)]));
    }

    let seed = EntireSeed::gaussian();
    let w = WeightSpec::squares(Cone::origin(1), 1.0, 1.0)?;
    let (a2, b2, d) = rho_r_constants(&w, &seed);
    println!("A' = {a2}, B' = {b2:.6}, D = {d}");

    let rho = rho_r_build(&w, &seed, 3.0, &RhoConfig::light())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let probes = random_probes(1, 100, 3.0, 2.0, 0.5, 0.25, &mut rng);
    println!("worst sub-mean deficiency {:.3e}", psh_check(|z| rho.value(z), &probes)?);
    Ok(())
}
