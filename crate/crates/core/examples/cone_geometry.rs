//! Separation constants and split neighborhoods of plane cones.

use std::f64::consts::FRAC_PI_2;

use ccl::cones::{separation_constant, split_neighborhoods, AngleArc, Cone};

fn main() -> ccl::Result<()> {
    let k1 = Cone::arcs([AngleArc::ray(0.0)])?;
    let k2 = Cone::arcs([AngleArc::ray(FRAC_PI_2)])?;
    println!("theta(orthogonal rays) = {}", separation_constant(&k1, &k2)?);

    let wide = Cone::arcs([AngleArc::closed(0.6, 2.5)])?;
    println!("theta(ray, wide arc) = {:.6}", separation_constant(&k1, &wide)?);

    let w = Cone::origin(2);
    let (v1, v2) = split_neighborhoods(&k1, &k2, &w)?;
    println!("V1 = {v1:?}");
    println!("V2 = {v2:?}");
    let meet = v1.closure().intersection(&v2.closure())?;
    println!("closures meet inside W: {}", meet.is_subset(&w)?);
    println!("distance of (1, 1) to K1: {}", k1.distance(&[1.0, 1.0])?);
    Ok(())
}
