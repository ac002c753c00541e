//! Grids, sampled complex fields, quadrature and the finite-difference checks shared by
//! the other modules.
//!
//! A point of `C^k` is stored on a grid with `2k` real axes ordered
//! `(Re z_1, Im z_1, Re z_2, Im z_2, ...)`. Grid points are enumerated row-major:
//! the last axis varies fastest.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_BUDGET: usize = 1 << 24;

/// Default number of nodes for circle means.
pub const CIRCLE_POINTS: usize = 64;

/// Uniform norm `max_j |x_j|` of a real vector.
pub fn uniform_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Uniform norm `max_j |z_j|` of a complex vector (each `|z_j|` is the modulus).
pub fn uniform_norm_c(z: &[Complex64]) -> f64 {
    z.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
}

pub fn real_parts(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.re).collect()
}

pub fn imag_parts(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.im).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Axis { lo, hi, n }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n as f64 - 1.0)
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_GRID_BUDGET
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        GridSpec { axes, budget: DEFAULT_GRID_BUDGET }
    }

    /// Grid on the complex plane: axis 0 is `Re z`, axis 1 is `Im z`.
    pub fn plane(x: (f64, f64), nx: usize, y: (f64, f64), ny: usize) -> Self {
        GridSpec::new(vec![Axis::new(x.0, x.1, nx), Axis::new(y.0, y.1, ny)])
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::domain("grid needs at least one axis"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.n < 2 {
                return Err(Error::domain(format!("axis {i} needs at least 2 points")));
            }
            if !(a.lo < a.hi) || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::domain(format!(
                    "axis {i} bounds must be finite and ordered, got [{}, {}]",
                    a.lo, a.hi
                )));
            }
        }
        let requested = self.axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.n)).unwrap_or(usize::MAX);
        if requested > self.budget {
            return Err(Error::Budget { requested, budget: self.budget });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    /// Number of complex variables, when the axes pair up.
    pub fn complex_dim(&self) -> Option<usize> {
        self.axes.len().is_multiple_of(2).then_some(self.axes.len() / 2)
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.axes[axis].step()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::step).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes.len()];
        for i in (0..self.axes.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.axes[i + 1].n;
        }
        s
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = flat % a.n;
            flat /= a.n;
        }
        out
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    /// The grid point as a point of `C^k`. Panics if the axes do not pair up.
    pub fn complex_point(&self, flat: usize) -> Vec<Complex64> {
        let p = self.point(flat);
        p.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
    }

    pub fn complex_points(&self) -> Vec<Vec<Complex64>> {
        (0..self.len()).map(|i| self.complex_point(i)).collect()
    }

    pub fn is_interior(&self, multi: &[usize]) -> bool {
        multi.iter().zip(&self.axes).all(|(&i, a)| i >= 1 && i + 1 < a.n)
    }
}

/// All grid points in row-major order.
pub fn make_grid(spec: &GridSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    Ok((0..spec.len()).map(|i| spec.point(i)).collect())
}

/// Complex values of a function of `k` complex variables on a rectangular grid.
#[derive(Clone, Debug)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    meta: String,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, meta: impl Into<String>) -> Result<Self> {
        grid.validate()?;
        if grid.complex_dim().is_none() {
            return Err(Error::domain("a sampled field needs an even number of axes"));
        }
        check_dim(grid.len(), values.len())?;
        Ok(SampledField { grid, values, meta: meta.into() })
    }

    pub fn from_fn(grid: &GridSpec, meta: impl Into<String>, f: impl Fn(&[Complex64]) -> Complex64) -> Result<Self> {
        grid.validate()?;
        let values = (0..grid.len()).map(|i| f(&grid.complex_point(i))).collect();
        SampledField::new(grid.clone(), values, meta)
    }

    pub fn zeros(grid: &GridSpec, meta: impl Into<String>) -> Result<Self> {
        SampledField::new(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()], meta)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn k(&self) -> usize {
        self.grid.axes.len() / 2
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn map(&self, meta: impl Into<String>, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect(), meta: meta.into() }
    }

    pub fn zip_with(
        &self,
        other: &SampledField,
        meta: impl Into<String>,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.same_grid(other)?;
        Ok(SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            meta: meta.into(),
        })
    }

    pub fn same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid.axes != other.grid.axes {
            return Err(Error::precondition("fields live on different grids"));
        }
        Ok(())
    }

    /// Writes `x_1,y_1,...,x_k,y_k,re,im` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = Vec::new();
        for j in 1..=self.k() {
            header.push(format!("x{j}"));
            header.push(format!("y{j}"));
        }
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut rec: Vec<String> = self.grid.point(i).iter().map(|c| fmt_f(*c)).collect();
            rec.push(fmt_f(v.re));
            rec.push(fmt_f(v.im));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`SampledField::write_csv`]. The grid is rebuilt from the
    /// distinct coordinates along each axis, so the file must hold a full tensor grid.
    pub fn read_csv(path: impl AsRef<Path>, meta: impl Into<String>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let ncols = r.headers()?.len();
        if ncols < 4 || ncols % 2 != 0 {
            return Err(Error::Config("field CSV needs x/y column pairs plus re,im".into()));
        }
        let naxes = ncols - 2;
        let mut coords: Vec<Vec<f64>> = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad number in field CSV: {e}")))?;
            coords.push(nums[..naxes].to_vec());
            values.push(Complex64::new(nums[naxes], nums[naxes + 1]));
        }
        let mut axes = Vec::with_capacity(naxes);
        for a in 0..naxes {
            let mut distinct: Vec<f64> = coords.iter().map(|c| c[a]).collect();
            distinct.sort_by(|p, q| p.total_cmp(q));
            distinct.dedup();
            let n = distinct.len();
            if n < 2 {
                return Err(Error::Config(format!("axis {a} has fewer than two nodes")));
            }
            axes.push(Axis::new(distinct[0], distinct[n - 1], n));
        }
        SampledField::new(GridSpec::new(axes).with_budget(usize::MAX), values, meta)
    }

    /// Flat little-endian binary: a 16-byte header (`b"CCLF"`, `u16` version, `u16` axis
    /// count, `u64` value count), then `(lo: f64, hi: f64, n: u64)` per axis, then
    /// `(re: f64, im: f64)` per value.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = Vec::with_capacity(16 + 24 * self.grid.ndim() + 16 * self.values.len());
        out.extend_from_slice(FIELD_MAGIC);
        out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.grid.ndim() as u16).to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for a in &self.grid.axes {
            out.extend_from_slice(&a.lo.to_le_bytes());
            out.extend_from_slice(&a.hi.to_le_bytes());
            out.extend_from_slice(&(a.n as u64).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>, meta: impl Into<String>) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let bad = || Error::Config("truncated or malformed field file".into());
        if buf.len() < 16 || &buf[..4] != FIELD_MAGIC {
            return Err(bad());
        }
        let version = u16::from_le_bytes([buf[4], buf[5]]);
        if version != FIELD_VERSION {
            return Err(Error::Config(format!("unsupported field version {version}")));
        }
        let naxes = u16::from_le_bytes([buf[6], buf[7]]) as usize;
        let count = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
        let need = 16 + 24 * naxes + 16 * count;
        if buf.len() != need {
            return Err(bad());
        }
        let f = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let u = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        let axes = (0..naxes)
            .map(|i| {
                let o = 16 + 24 * i;
                Axis::new(f(o), f(o + 8), u(o + 16) as usize)
            })
            .collect();
        let base = 16 + 24 * naxes;
        let values = (0..count).map(|i| Complex64::new(f(base + 16 * i), f(base + 16 * i + 8))).collect();
        SampledField::new(GridSpec::new(axes).with_budget(usize::MAX), values, meta)
    }
}

const FIELD_MAGIC: &[u8; 4] = b"CCLF";
const FIELD_VERSION: u16 = 1;

pub(crate) fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}

/// Result of a quadrature with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Midpoint rule over the box `[lo, hi]` with `n` cells per axis, plus a Richardson-style
/// error estimate from the same rule with `n / 2` cells (`|I_n - I_{n/2}| / 3`).
pub fn midpoint_box(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], n: usize) -> Result<Quadrature> {
    check_dim(lo.len(), hi.len())?;
    if n < 2 {
        return Err(Error::domain("midpoint rule needs at least 2 cells per axis"));
    }
    let fine = midpoint_sum(&f, lo, hi, n);
    let coarse = midpoint_sum(&f, lo, hi, n / 2);
    Ok(Quadrature { value: fine, error: (fine - coarse).abs() / 3.0 })
}

fn midpoint_sum(f: &impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], n: usize) -> f64 {
    let d = lo.len();
    let h: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / n as f64).collect();
    let vol: f64 = h.iter().product();
    let total = n.pow(d as u32);
    let mut p = vec![0.0; d];
    let mut sum = 0.0;
    for flat in 0..total {
        let mut rest = flat;
        for a in (0..d).rev() {
            let i = rest % n;
            rest /= n;
            p[a] = lo[a] + (i as f64 + 0.5) * h[a];
        }
        sum += f(&p);
    }
    sum * vol
}

/// Max over interior grid points of `|1/2 (d/dx_j + i d/dy_j) psi - eta|`, centered differences.
pub fn dbar_residual(psi: &SampledField, eta: &SampledField, j: usize) -> Result<f64> {
    dbar_residual_where(psi, eta, j, |_| true)
}

/// As [`dbar_residual`], restricted to interior points where `keep` holds.
pub fn dbar_residual_where(
    psi: &SampledField,
    eta: &SampledField,
    j: usize,
    keep: impl Fn(&[Complex64]) -> bool,
) -> Result<f64> {
    psi.same_grid(eta)?;
    let k = psi.k();
    if j >= k {
        return Err(Error::domain(format!("axis index {j} out of range for k = {k}")));
    }
    let d = dbar_apply(psi, j)?;
    let grid = psi.grid();
    let mut worst = 0.0_f64;
    for (flat, (dv, ev)) in d.values().iter().zip(eta.values()).enumerate() {
        let mi = grid.multi_index(flat);
        if !grid.is_interior(&mi) || !keep(&grid.complex_point(flat)) {
            continue;
        }
        worst = worst.max((dv - ev).norm());
    }
    Ok(worst)
}

/// Centered-difference `dbar_j psi` on interior points; boundary values are zero.
pub fn dbar_apply(psi: &SampledField, j: usize) -> Result<SampledField> {
    let grid = psi.grid();
    let (ax, ay) = (2 * j, 2 * j + 1);
    if ay >= grid.ndim() {
        return Err(Error::domain(format!("axis index {j} out of range")));
    }
    let strides = grid.strides();
    let (hx, hy) = (grid.step(ax), grid.step(ay));
    let v = psi.values();
    let out = (0..grid.len())
        .map(|flat| {
            let mi = grid.multi_index(flat);
            if !grid.is_interior(&mi) {
                return Complex64::new(0.0, 0.0);
            }
            let dx = (v[flat + strides[ax]] - v[flat - strides[ax]]) / (2.0 * hx);
            let dy = (v[flat + strides[ay]] - v[flat - strides[ay]]) / (2.0 * hy);
            0.5 * (dx + Complex64::i() * dy)
        })
        .collect();
    SampledField::new(grid.clone(), out, format!("dbar_{j}({})", psi.meta()))
}

/// `(1/n) sum_m u(z0 + r e^{2 pi i m / n} w)`.
pub fn circle_mean(
    u: impl Fn(&[Complex64]) -> f64,
    z0: &[Complex64],
    w: &[Complex64],
    r: f64,
    n: usize,
) -> Result<f64> {
    check_dim(z0.len(), w.len())?;
    if !(r > 0.0) {
        return Err(Error::domain("circle radius must be positive"));
    }
    if n < 2 {
        return Err(Error::domain("circle mean needs at least 2 nodes"));
    }
    let mut z = vec![Complex64::new(0.0, 0.0); z0.len()];
    let mut sum = 0.0;
    for m in 0..n {
        let e = Complex64::from_polar(r, 2.0 * PI * m as f64 / n as f64);
        for (zi, (a, b)) in z.iter_mut().zip(z0.iter().zip(w)) {
            *zi = a + e * b;
        }
        sum += u(&z);
    }
    Ok(sum / n as f64)
}

/// `u(z0) - circle_mean(u, ...)`: positive values flag a failure of the sub-mean inequality.
pub fn submean_deficiency(
    u: impl Fn(&[Complex64]) -> f64,
    z0: &[Complex64],
    w: &[Complex64],
    r: f64,
    n: usize,
) -> Result<f64> {
    let center = u(z0);
    let mean = circle_mean(&u, z0, w, r, n)?;
    Ok(center - mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_one_axis_three_points() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 3)]);
        assert_eq!(make_grid(&g).unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn grid_two_axes_corners() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 2), Axis::new(-1.0, 1.0, 2)]);
        let pts = make_grid(&g).unwrap();
        assert_eq!(pts, vec![vec![0.0, -1.0], vec![0.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn grid_budget_exceeded() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 8)]).with_budget(4);
        assert!(matches!(make_grid(&g), Err(Error::Budget { requested: 8, budget: 4 })));
    }

    #[test]
    fn multi_index_round_trip() {
        let g = GridSpec::new(vec![Axis::new(0.0, 1.0, 3), Axis::new(0.0, 1.0, 4), Axis::new(0.0, 1.0, 5)]);
        for flat in 0..g.len() {
            assert_eq!(g.index(&g.multi_index(flat)), flat);
        }
    }

    fn plane(n: usize) -> GridSpec {
        GridSpec::plane((-1.0, 1.0), n, (-1.0, 1.0), n)
    }

    #[test]
    fn dbar_of_conjugate_is_one() {
        let g = plane(21);
        let psi = SampledField::from_fn(&g, "zbar", |z| z[0].conj()).unwrap();
        let eta = SampledField::from_fn(&g, "one", |_| c(1.0, 0.0)).unwrap();
        assert!(dbar_residual(&psi, &eta, 0).unwrap() < 1e-12);
    }

    #[test]
    fn dbar_of_analytic_converges_second_order() {
        let res = |n| {
            let g = plane(n);
            let psi = SampledField::from_fn(&g, "z^3", |z| z[0] * z[0] * z[0]).unwrap();
            let eta = SampledField::zeros(&g, "0").unwrap();
            dbar_residual(&psi, &eta, 0).unwrap()
        };
        // z^2 is reproduced exactly by centered differences, z^3 is not
        let (r1, r2) = (res(41), res(81));
        assert!(r1 > 1e-6);
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn dbar_of_modulus_squared_is_z() {
        let g = plane(41);
        let psi = SampledField::from_fn(&g, "|z|^2", |z| c(z[0].norm_sqr(), 0.0)).unwrap();
        let eta = SampledField::from_fn(&g, "z", |z| z[0]).unwrap();
        // |z|^2 is quadratic, so centered differences are exact
        assert!(dbar_residual(&psi, &eta, 0).unwrap() < 1e-12);
    }

    #[test]
    fn dbar_grid_mismatch() {
        let a = SampledField::zeros(&plane(5), "a").unwrap();
        let b = SampledField::zeros(&plane(7), "b").unwrap();
        assert!(dbar_residual(&a, &b, 0).is_err());
    }

    #[test]
    fn circle_mean_harmonic_and_quadratics() {
        let z0 = [c(0.3, -0.7)];
        let w = [c(1.0, 0.0)];
        let re = circle_mean(|z| z[0].re, &z0, &w, 0.9, 64).unwrap();
        assert!((re - 0.3).abs() < 1e-14);
        let neg = circle_mean(|z| -z[0].norm_sqr(), &z0, &w, 1.0, 64).unwrap();
        assert!((neg - (-z0[0].norm_sqr() - 1.0)).abs() < 1e-12);
        let pos = circle_mean(|z| z[0].norm_sqr(), &z0, &w, 1.0, 64).unwrap();
        assert!((pos - (z0[0].norm_sqr() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn circle_mean_exact_for_affine_at_small_n() {
        let z0 = [c(1.0, 2.0), c(-0.5, 0.25)];
        let w = [c(0.6, 0.8), c(0.0, 1.0)];
        let u = |z: &[Complex64]| 2.0 * z[0].re - 3.0 * z[1].im + 0.5;
        for n in [2, 3, 5, 8] {
            let m = circle_mean(u, &z0, &w, 0.4, n).unwrap();
            assert!((m - u(&z0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn midpoint_gaussian() {
        let q = midpoint_box(|p| (-p[0] * p[0] - p[1] * p[1]).exp(), &[-6.0, -6.0], &[6.0, 6.0], 200).unwrap();
        assert!((q.value - PI).abs() < 1e-10);
        assert!(q.error < 1e-6);
    }

    #[test]
    fn field_io_round_trips() {
        let g = GridSpec::plane((-1.0, 1.0), 4, (0.0, 2.0), 3);
        let f = SampledField::from_fn(&g, "f", |z| z[0] * z[0] + c(0.25, 0.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("f.bin");
        f.write_binary(&bin).unwrap();
        let back = SampledField::read_binary(&bin, "f").unwrap();
        assert_eq!(back.grid().axes, f.grid().axes);
        assert_eq!(back.values(), f.values());

        let csvp = dir.path().join("f.csv");
        f.write_csv(&csvp).unwrap();
        let back = SampledField::read_csv(&csvp, "f").unwrap();
        assert_eq!(back.grid().axes.len(), 2);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
