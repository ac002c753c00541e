//! Index functions `alpha`, `beta` on `[0, inf)` and their admissibility checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used by every admissibility check.
pub const PROFILE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Power,
    CustomTable,
}

/// `s^exponent`, or a piecewise-linear table extended by its last slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    #[serde(default = "one")]
    pub exponent: f64,
    pub kappa: f64,
    #[serde(default)]
    pub s0: f64,
    #[serde(default)]
    pub convex: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

fn one() -> f64 {
    1.0
}

impl Profile {
    /// `s^exponent` with `kappa = exponent`, `s0 = 0`, convex flag set iff `exponent >= 1`.
    pub fn power(exponent: f64) -> Self {
        Profile { kind: ProfileKind::Power, exponent, kappa: exponent, s0: 0.0, convex: exponent >= 1.0, table: None }
    }

    /// The `s^2` profile used by the shipped scenarios.
    pub fn square() -> Self {
        Profile::power(2.0)
    }

    pub fn table(nodes: Vec<(f64, f64)>, kappa: f64) -> Result<Self> {
        let p = Profile {
            kind: ProfileKind::CustomTable,
            exponent: 1.0,
            kappa,
            s0: 0.0,
            convex: false,
            table: Some(nodes),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = s0;
        self
    }

    pub fn with_convex(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.s0 >= 0.0) {
            return Err(Error::domain(format!("s0 must be nonnegative, got {}", self.s0)));
        }
        match self.kind {
            ProfileKind::Power => {
                if !(self.exponent > 0.0) || !self.exponent.is_finite() {
                    return Err(Error::domain(format!("power exponent must be positive, got {}", self.exponent)));
                }
            }
            ProfileKind::CustomTable => {
                let t = self.table.as_ref().ok_or_else(|| Error::domain("custom-table profile without a table"))?;
                if t.len() < 2 {
                    return Err(Error::domain("profile table needs at least two nodes"));
                }
                if t[0].0 != 0.0 {
                    return Err(Error::domain("profile table must start at s = 0"));
                }
                if t.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::domain("profile table abscissae must increase strictly"));
                }
                if t.iter().any(|(s, v)| !s.is_finite() || !v.is_finite() || *v < 0.0) {
                    return Err(Error::domain("profile table values must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Value at `s >= 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("profile argument must be nonnegative, got {s}")));
        }
        Ok(self.value(s))
    }

    /// Unchecked evaluation; negative arguments are treated as 0.
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.kind {
            ProfileKind::Power => {
                if self.exponent == 2.0 {
                    s * s
                } else if self.exponent == 1.0 {
                    s
                } else {
                    s.powf(self.exponent)
                }
            }
            ProfileKind::CustomTable => interp(self.table.as_deref().unwrap_or(&[]), s),
        }
    }

    /// Same profile shifted so that `value(0) = 0`.
    pub fn normalized(&self) -> Self {
        let mut p = self.clone();
        if let Some(t) = p.table.as_mut() {
            let v0 = t[0].1;
            for node in t.iter_mut() {
                node.1 -= v0;
            }
        }
        p
    }

    /// True when the profile is concave on `[0, inf)`.
    pub fn is_concave(&self) -> bool {
        match self.kind {
            ProfileKind::Power => self.exponent <= 1.0,
            ProfileKind::CustomTable => {
                let t = self.table.as_deref().unwrap_or(&[]);
                let slopes: Vec<f64> = t.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
                slopes.windows(2).all(|w| w[1] <= w[0] + PROFILE_TOL * w[0].abs().max(1.0))
            }
        }
    }
}

fn interp(t: &[(f64, f64)], s: f64) -> f64 {
    let n = t.len();
    let seg = match t.iter().position(|&(x, _)| x > s) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => n - 2,
    };
    let (x0, y0) = t[seg];
    let (x1, y1) = t[seg + 1];
    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Monotone,
    Unbounded,
    Convexity,
    KappaGrowth,
    Nonnegative,
}

/// A failed admissibility condition with its witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub profile: Which,
    pub condition: Condition,
    /// Sample point(s) witnessing the failure.
    pub at: Vec<f64>,
    /// Size of the failure, always positive.
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProfileReport {
    pub violations: Vec<Violation>,
}

impl ProfileReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn exceeds(lhs: f64, rhs: f64) -> Option<f64> {
    let slack = PROFILE_TOL * lhs.abs().max(rhs.abs()).max(1.0);
    (lhs > rhs + slack).then_some(lhs - rhs)
}

/// Checks the admissibility conditions on a sorted, nonempty grid of sample points.
///
/// Both profiles must be monotone, unbounded and nonnegative; `beta` must be midpoint
/// convex (as must `alpha` when its convex flag is set); `alpha(s)/s^kappa` must be
/// nondecreasing on the samples with `s >= s0`.
pub fn verify_profile(alpha: &Profile, beta: &Profile, grid: &[f64]) -> Result<ProfileReport> {
    if grid.is_empty() {
        return Err(Error::domain("verification grid is empty"));
    }
    if grid.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::domain("verification grid must hold finite nonnegative samples"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("verification grid must be sorted"));
    }
    alpha.validate()?;
    beta.validate()?;

    let mut report = ProfileReport::default();
    for (which, p) in [(Which::Alpha, alpha), (Which::Beta, beta)] {
        check_basic(which, p, grid, &mut report.violations);
        if which == Which::Beta || p.convex {
            check_convex(which, p, grid, &mut report.violations);
        }
    }
    check_kappa(alpha, grid, &mut report.violations);
    Ok(report)
}

fn check_basic(which: Which, p: &Profile, grid: &[f64], out: &mut Vec<Violation>) {
    for &s in grid {
        let v = p.value(s);
        if v < 0.0 {
            out.push(Violation { profile: which, condition: Condition::Nonnegative, at: vec![s], magnitude: -v });
        }
    }
    for w in grid.windows(2) {
        if let Some(m) = exceeds(p.value(w[0]), p.value(w[1])) {
            out.push(Violation { profile: which, condition: Condition::Monotone, at: vec![w[0], w[1]], magnitude: m });
        }
    }
    let (lo, hi) = (p.value(1.0), p.value(1e6));
    if !(hi > lo + 10.0) {
        out.push(Violation {
            profile: which,
            condition: Condition::Unbounded,
            at: vec![1.0, 1e6],
            magnitude: lo + 10.0 - hi,
        });
    }
}

fn check_convex(which: Which, p: &Profile, grid: &[f64], out: &mut Vec<Violation>) {
    let n = grid.len();
    let mut test = |i: usize, j: usize| {
        let (s, t) = (grid[i], grid[j]);
        let mid = p.value(0.5 * (s + t));
        let chord = 0.5 * (p.value(s) + p.value(t));
        if let Some(m) = exceeds(mid, chord) {
            out.push(Violation { profile: which, condition: Condition::Convexity, at: vec![s, t], magnitude: m });
        }
    };
    if n <= 512 {
        for i in 0..n {
            for j in i + 1..n {
                test(i, j);
            }
        }
    } else {
        let mut gap = 1;
        while gap < n {
            for i in 0..n - gap {
                test(i, i + gap);
            }
            gap *= 2;
        }
    }
}

fn check_kappa(alpha: &Profile, grid: &[f64], out: &mut Vec<Violation>) {
    let ratio = |s: f64| alpha.value(s) / s.powf(alpha.kappa);
    let tail: Vec<f64> = grid.iter().copied().filter(|&s| s >= alpha.s0 && s > 0.0).collect();
    for w in tail.windows(2) {
        if let Some(m) = exceeds(ratio(w[0]), ratio(w[1])) {
            out.push(Violation {
                profile: Which::Alpha,
                condition: Condition::KappaGrowth,
                at: vec![w[0], w[1]],
                magnitude: m,
            });
        }
    }
}

/// `n` points log-spaced on `[lo, hi]`, preceded by 0.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    std::iter::once(0.0).chain((0..n).map(|i| (a + (b - a) * i as f64 / (n as f64 - 1.0)).exp())).collect()
}
