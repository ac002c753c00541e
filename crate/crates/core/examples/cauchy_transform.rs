//! Cauchy transform of the unit-disk indicator against its closed form.

use ccl::dbar::{cauchy_solve, CauchyMethod};
use ccl::numerics::{dbar_residual_where, GridSpec, SampledField};
use ccl::Complex64;

fn main() -> ccl::Result<()> {
    for n in [64, 128, 256] {
        let grid = GridSpec::plane((-1.5, 1.5), n, (-1.5, 1.5), n);
        let h = grid.step(0);
        let eta =
            SampledField::from_fn(&grid, "disk", |z| Complex64::new(if z[0].norm() <= 1.0 { 1.0 } else { 0.0 }, 0.0))?;
        let psi = cauchy_solve(&eta, CauchyMethod::Convolution)?;
        let away = |z: &[Complex64]| (z[0].norm() - 1.0).abs() >= 2.0 * h;
        let mut err = 0.0_f64;
        for (f, v) in psi.values().iter().enumerate() {
            let z = grid.complex_point(f)[0];
            if away(&[z]) {
                let exact = if z.norm() <= 1.0 { z.conj() } else { z.inv() };
                err = err.max((v - exact).norm());
            }
        }
        let res = dbar_residual_where(&psi, &eta, 0, away)?;
        println!("n = {n:3}: max error {err:.3e}, residual {res:.3e}");
    }
    Ok(())
}
