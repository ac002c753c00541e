//! Cones in `R^k` under the uniform norm.
//!
//! * `k = 1`: a subset of the two rays, origin always included.
//! * `k = 2`: a finite union of angular arcs on `[0, 2pi)`, each endpoint open or closed.
//!   Set operations are exact interval arithmetic on the endpoints.
//! * `k > 2`: a finite list of sampled directions; distances are upper estimates.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::uniform_norm;

/// Angular slack used by membership tests.
pub const ANGLE_TOL: f64 = 1e-12;

/// Smallest margin tried by [`split_neighborhoods`].
pub const MARGIN_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleArc {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default = "yes")]
    pub hi_closed: bool,
}

fn yes() -> bool {
    true
}

impl AngleArc {
    pub fn closed(lo: f64, hi: f64) -> Self {
        AngleArc { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        AngleArc { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn ray(theta: f64) -> Self {
        AngleArc::closed(theta, theta)
    }

    fn is_empty(&self) -> bool {
        self.hi < self.lo || (self.hi == self.lo && !(self.lo_closed && self.hi_closed))
    }

    fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo - ANGLE_TOL } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi + ANGLE_TOL } else { t < self.hi };
        above && below
    }
}

/// A normalized subset of the circle `[0, 2pi)`: sorted, pairwise disjoint arcs.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ArcSet {
    arcs: Vec<AngleArc>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet { arcs: vec![AngleArc { lo: 0.0, hi: TAU, lo_closed: true, hi_closed: false }] }
    }

    /// Arcs may use any real angles with `lo <= hi`; lengths of `2pi` or more give the
    /// full circle.
    pub fn new(arcs: impl IntoIterator<Item = AngleArc>) -> Result<Self> {
        let mut pieces = Vec::new();
        for a in arcs {
            if !a.lo.is_finite() || !a.hi.is_finite() || a.hi < a.lo {
                return Err(Error::domain(format!("bad arc [{}, {}]", a.lo, a.hi)));
            }
            if a.hi - a.lo >= TAU {
                return Ok(ArcSet::full());
            }
            let lo = a.lo.rem_euclid(TAU);
            let lo = if lo >= TAU { 0.0 } else { lo };
            let hi = lo + (a.hi - a.lo);
            if hi < TAU {
                pieces.push(AngleArc { lo, hi, ..a });
            } else {
                pieces.push(AngleArc { lo, hi: TAU, lo_closed: a.lo_closed, hi_closed: false });
                let rest = hi - TAU;
                pieces.push(AngleArc {
                    lo: 0.0,
                    hi: rest,
                    lo_closed: rest > 0.0 || a.hi_closed,
                    hi_closed: a.hi_closed,
                });
            }
        }
        Ok(ArcSet::normalize(pieces))
    }

    fn normalize(mut pieces: Vec<AngleArc>) -> Self {
        pieces.retain(|a| !a.is_empty());
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<AngleArc> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(c) = out.last_mut() {
                let touches = p.lo < c.hi || (p.lo == c.hi && (c.hi_closed || p.lo_closed));
                if touches {
                    if p.lo == c.lo {
                        c.lo_closed |= p.lo_closed;
                    }
                    if p.hi > c.hi {
                        c.hi = p.hi;
                        c.hi_closed = p.hi_closed;
                    } else if p.hi == c.hi {
                        c.hi_closed |= p.hi_closed;
                    }
                    continue;
                }
            }
            out.push(p);
        }
        ArcSet { arcs: out }
    }

    pub fn arcs(&self) -> &[AngleArc] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].lo == 0.0 && self.arcs[0].lo_closed && self.arcs[0].hi == TAU
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        self.arcs.iter().any(|a| a.contains(t) || a.contains(t - TAU) || a.contains(t + TAU))
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        ArcSet::normalize(self.arcs.iter().chain(&other.arcs).copied().collect())
    }

    pub fn complement(&self) -> ArcSet {
        let mut gaps = Vec::new();
        let (mut cur, mut cur_closed) = (0.0, true);
        for a in &self.arcs {
            gaps.push(AngleArc { lo: cur, hi: a.lo, lo_closed: cur_closed, hi_closed: !a.lo_closed });
            cur = a.hi;
            cur_closed = !a.hi_closed;
        }
        if cur < TAU {
            gaps.push(AngleArc { lo: cur, hi: TAU, lo_closed: cur_closed, hi_closed: false });
        }
        ArcSet::normalize(gaps)
    }

    pub fn intersection(&self, other: &ArcSet) -> ArcSet {
        self.complement().union(&other.complement()).complement()
    }

    pub fn closure(&self) -> ArcSet {
        let pieces = self.arcs.iter().flat_map(|a| {
            if a.hi == TAU {
                // the endpoint 2pi is the angle 0
                vec![AngleArc::closed(a.lo, TAU).with_hi_open(), AngleArc::ray(0.0)]
            } else {
                vec![AngleArc::closed(a.lo, a.hi)]
            }
        });
        ArcSet::normalize(pieces.collect())
    }

    pub fn is_closed(&self) -> bool {
        self.closure() == *self
    }

    pub fn is_subset(&self, other: &ArcSet) -> bool {
        self.intersection(&other.complement()).is_empty()
    }

    /// Open dilation of every arc by `margin`.
    pub fn dilate(&self, margin: f64) -> ArcSet {
        if self.is_full() {
            return ArcSet::full();
        }
        let grown: Vec<AngleArc> = self.arcs.iter().map(|a| AngleArc::open(a.lo - margin, a.hi + margin)).collect();
        // building from real angles re-wraps pieces that cross 0
        ArcSet::new(grown).unwrap_or_else(|_| ArcSet::full())
    }
}

impl AngleArc {
    fn with_hi_open(mut self) -> Self {
        self.hi_closed = false;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ray {
    Negative,
    Positive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr", into = "ConeRepr")]
pub enum Cone {
    Line { negative: bool, positive: bool },
    Plane(ArcSet),
    Sampled { dim: usize, directions: Vec<Vec<f64>>, closed: bool },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ConeRepr {
    dim: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    full: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    rays: Vec<Ray>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    arcs: Vec<AngleArc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    directions: Vec<Vec<f64>>,
    #[serde(default = "yes")]
    closed: bool,
}

impl TryFrom<ConeRepr> for Cone {
    type Error = Error;

    fn try_from(r: ConeRepr) -> Result<Cone> {
        match r.dim {
            0 => Err(Error::domain("cone dimension must be at least 1")),
            1 => {
                if !r.arcs.is_empty() || !r.directions.is_empty() {
                    return Err(Error::Config("a 1-d cone is given by rays".into()));
                }
                Ok(Cone::Line {
                    negative: r.full || r.rays.contains(&Ray::Negative),
                    positive: r.full || r.rays.contains(&Ray::Positive),
                })
            }
            2 => {
                if !r.rays.is_empty() || !r.directions.is_empty() {
                    return Err(Error::Config("a 2-d cone is given by arcs".into()));
                }
                Ok(Cone::Plane(if r.full { ArcSet::full() } else { ArcSet::new(r.arcs)? }))
            }
            dim => {
                if r.directions.iter().any(|d| d.len() != dim) {
                    return Err(Error::Config("sampled direction of wrong length".into()));
                }
                Ok(Cone::Sampled { dim, directions: r.directions, closed: r.closed })
            }
        }
    }
}

impl From<Cone> for ConeRepr {
    fn from(c: Cone) -> ConeRepr {
        let mut r = ConeRepr {
            dim: c.dim(),
            full: false,
            rays: Vec::new(),
            arcs: Vec::new(),
            directions: Vec::new(),
            closed: true,
        };
        match c {
            Cone::Line { negative, positive } => {
                if negative {
                    r.rays.push(Ray::Negative);
                }
                if positive {
                    r.rays.push(Ray::Positive);
                }
            }
            Cone::Plane(s) => {
                r.full = s.is_full();
                if !r.full {
                    r.arcs = s.arcs;
                }
            }
            Cone::Sampled { directions, closed, .. } => {
                r.directions = directions;
                r.closed = closed;
            }
        }
        r
    }
}

impl Cone {
    pub fn origin(k: usize) -> Cone {
        match k {
            1 => Cone::Line { negative: false, positive: false },
            2 => Cone::Plane(ArcSet::empty()),
            _ => Cone::Sampled { dim: k, directions: Vec::new(), closed: true },
        }
    }

    /// `R^k`. Only exact for `k <= 2`.
    pub fn full(k: usize) -> Result<Cone> {
        match k {
            1 => Ok(Cone::Line { negative: true, positive: true }),
            2 => Ok(Cone::Plane(ArcSet::full())),
            _ => Err(Error::Unsupported("the full cone needs k <= 2".into())),
        }
    }

    pub fn positive_ray() -> Cone {
        Cone::Line { negative: false, positive: true }
    }

    pub fn negative_ray() -> Cone {
        Cone::Line { negative: true, positive: false }
    }

    pub fn arcs(arcs: impl IntoIterator<Item = AngleArc>) -> Result<Cone> {
        Ok(Cone::Plane(ArcSet::new(arcs)?))
    }

    pub fn sampled(directions: Vec<Vec<f64>>, closed: bool) -> Result<Cone> {
        let dim = directions.first().map(Vec::len).ok_or_else(|| Error::domain("no directions"))?;
        for d in &directions {
            check_dim(dim, d.len())?;
            if uniform_norm(d) == 0.0 {
                return Err(Error::domain("zero direction"));
            }
        }
        Ok(Cone::Sampled { dim, directions, closed })
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Line { .. } => 1,
            Cone::Plane(_) => 2,
            Cone::Sampled { dim, .. } => *dim,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Cone::Line { negative, positive } => !negative && !positive,
            Cone::Plane(s) => s.is_empty(),
            Cone::Sampled { directions, .. } => directions.is_empty(),
        }
    }

    pub fn is_full(&self) -> bool {
        match self {
            Cone::Line { negative, positive } => *negative && *positive,
            Cone::Plane(s) => s.is_full(),
            Cone::Sampled { .. } => false,
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        let r = uniform_norm(x);
        if r == 0.0 {
            return Ok(true);
        }
        Ok(match self {
            Cone::Line { negative, positive } => (x[0] > 0.0 && *positive) || (x[0] < 0.0 && *negative),
            Cone::Plane(s) => s.contains_angle(x[1].atan2(x[0])),
            Cone::Sampled { directions, .. } => directions.iter().any(|d| ray_distance(x, d) <= ANGLE_TOL * r),
        })
    }

    /// `delta_U(x) = inf_{x' in U} |x - x'|` in the uniform norm. Exact for `k <= 2`; for
    /// sampled cones the minimum over the sampled rays, an upper estimate.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.distance_unchecked(x))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64]) -> f64 {
        let r = uniform_norm(x);
        if r == 0.0 {
            return 0.0;
        }
        match self {
            Cone::Line { negative, positive } => {
                if (x[0] > 0.0 && *positive) || (x[0] < 0.0 && *negative) {
                    0.0
                } else {
                    r
                }
            }
            Cone::Plane(s) => {
                let theta = x[1].atan2(x[0]);
                let cl = s.closure();
                if cl.contains_angle(theta) {
                    return 0.0;
                }
                cl.arcs().iter().fold(r, |m, a| {
                    let d1 = ray_distance(x, &[a.lo.cos(), a.lo.sin()]);
                    let d2 = ray_distance(x, &[a.hi.cos(), a.hi.sin()]);
                    m.min(d1).min(d2)
                })
            }
            Cone::Sampled { directions, .. } => directions.iter().fold(r, |m, d| m.min(ray_distance(x, d))),
        }
    }

    pub fn closure(&self) -> Cone {
        match self {
            Cone::Plane(s) => Cone::Plane(s.closure()),
            Cone::Sampled { dim, directions, .. } => {
                Cone::Sampled { dim: *dim, directions: directions.clone(), closed: true }
            }
            line => line.clone(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Cone::Plane(s) => s.is_closed(),
            Cone::Sampled { closed, .. } => *closed,
            Cone::Line { .. } => true,
        }
    }

    pub fn union(&self, other: &Cone) -> Result<Cone> {
        check_dim(self.dim(), other.dim())?;
        match (self, other) {
            (Cone::Line { negative: a, positive: b }, Cone::Line { negative: c, positive: d }) => {
                Ok(Cone::Line { negative: *a || *c, positive: *b || *d })
            }
            (Cone::Plane(a), Cone::Plane(b)) => Ok(Cone::Plane(a.union(b))),
            (Cone::Sampled { dim, directions: a, closed: ca }, Cone::Sampled { directions: b, closed: cb, .. }) => {
                Ok(Cone::Sampled { dim: *dim, directions: a.iter().chain(b).cloned().collect(), closed: *ca && *cb })
            }
            _ => Err(Error::Unsupported("mixed cone representations".into())),
        }
    }

    pub fn intersection(&self, other: &Cone) -> Result<Cone> {
        check_dim(self.dim(), other.dim())?;
        match (self, other) {
            (Cone::Line { negative: a, positive: b }, Cone::Line { negative: c, positive: d }) => {
                Ok(Cone::Line { negative: *a && *c, positive: *b && *d })
            }
            (Cone::Plane(a), Cone::Plane(b)) => Ok(Cone::Plane(a.intersection(b))),
            _ => Err(Error::Unsupported("cone intersection needs k <= 2".into())),
        }
    }

    /// `(R^k \ U) ∪ {0}`.
    pub fn complement(&self) -> Result<Cone> {
        match self {
            Cone::Line { negative, positive } => Ok(Cone::Line { negative: !negative, positive: !positive }),
            Cone::Plane(s) => Ok(Cone::Plane(s.complement())),
            Cone::Sampled { .. } => Err(Error::Unsupported("cone complement needs k <= 2".into())),
        }
    }

    pub fn is_subset(&self, other: &Cone) -> Result<bool> {
        check_dim(self.dim(), other.dim())?;
        match (self, other) {
            (Cone::Line { negative: a, positive: b }, Cone::Line { negative: c, positive: d }) => {
                Ok((!a || *c) && (!b || *d))
            }
            (Cone::Plane(a), Cone::Plane(b)) => Ok(a.is_subset(b)),
            _ => Err(Error::Unsupported("cone inclusion needs k <= 2".into())),
        }
    }
}

/// `min_{t >= 0} |x - t d|` in the uniform norm. The objective is convex and piecewise
/// linear in `t`, so the minimum sits at `t = 0` or at a breakpoint.
pub fn ray_distance(x: &[f64], d: &[f64]) -> f64 {
    let f = |t: f64| x.iter().zip(d).fold(0.0_f64, |m, (xi, di)| m.max((xi - t * di).abs()));
    let mut best = f(0.0);
    let n = x.len();
    let mut try_t = |t: f64| {
        if t > 0.0 && t.is_finite() {
            best = best.min(f(t));
        }
    };
    for i in 0..n {
        if d[i] != 0.0 {
            try_t(x[i] / d[i]);
        }
        for j in i + 1..n {
            let (dm, dp) = (d[i] - d[j], d[i] + d[j]);
            if dm != 0.0 {
                try_t((x[i] - x[j]) / dm);
            }
            if dp != 0.0 {
                try_t((x[i] + x[j]) / dp);
            }
        }
    }
    best
}

/// Open conic neighborhood of `u`: every arc dilated by `margin`. Rays in `R^1` and the
/// cone `{0}` are already open and are returned unchanged.
pub fn conic_neighborhood(u: &Cone, margin: f64) -> Result<Cone> {
    if !(margin > 0.0 && margin < PI) {
        return Err(Error::domain(format!("margin must lie in (0, pi), got {margin}")));
    }
    match u {
        Cone::Line { .. } => Ok(u.clone()),
        Cone::Plane(s) => Ok(Cone::Plane(s.dilate(margin))),
        Cone::Sampled { .. } => Err(Error::Unsupported("conic neighborhoods need k <= 2".into())),
    }
}

/// `inf { delta_{K1}(x) : x in K2, |x| = 1 }`, clipped to at most 1.
///
/// Returns 1 when `K2 = {0}` or `K1 = {0}`.
pub fn separation_constant(k1: &Cone, k2: &Cone) -> Result<f64> {
    check_dim(k1.dim(), k2.dim())?;
    if !k1.is_closed() || !k2.is_closed() {
        return Err(Error::precondition("separation needs closed cones"));
    }
    if !k1.intersection(k2)?.is_degenerate() {
        return Err(Error::precondition("cones meet outside the origin"));
    }
    if k1.is_degenerate() || k2.is_degenerate() {
        return Ok(1.0);
    }
    match (k1, k2) {
        (Cone::Line { .. }, Cone::Line { .. }) => Ok(1.0),
        (Cone::Plane(a), Cone::Plane(b)) => {
            let edges: Vec<[f64; 2]> =
                a.arcs().iter().flat_map(|arc| [arc.lo, arc.hi]).map(|t| [t.cos(), t.sin()]).collect();
            let mut best = 1.0_f64;
            for arc in b.arcs() {
                for (p, q) in square_segments(arc.lo, arc.hi) {
                    for d in &edges {
                        best = best.min(segment_ray_distance(p, q, *d));
                    }
                }
            }
            Ok(best)
        }
        _ => Err(Error::Unsupported("separation needs k <= 2".into())),
    }
}

/// Point of the uniform unit sphere (the square) in direction `t`.
pub fn square_point(t: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    let m = c.abs().max(s.abs());
    [c / m, s / m]
}

/// The uniform unit circle between angles `lo <= hi` as straight segments.
fn square_segments(lo: f64, hi: f64) -> Vec<([f64; 2], [f64; 2])> {
    let mut cuts = vec![lo];
    let mut c = FRAC_PI_4;
    while c < hi + TAU {
        if c > lo && c < hi {
            cuts.push(c);
        }
        c += 2.0 * FRAC_PI_4;
    }
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| (square_point(w[0]), square_point(w[1]))).collect()
}

/// `min { |p + s (q - p) - t d| : s in [0, 1], t >= 0 }` in the uniform norm, by vertex
/// enumeration of the LP in `(s, t, u)`.
fn segment_ray_distance(p: [f64; 2], q: [f64; 2], d: [f64; 2]) -> f64 {
    // rows a . (s, t, u) >= b
    let e = [q[0] - p[0], q[1] - p[1]];
    let mut rows: Vec<([f64; 3], f64)> = Vec::with_capacity(7);
    for i in 0..2 {
        // u - (p_i + s e_i - t d_i) >= 0 and u + (p_i + s e_i - t d_i) >= 0
        rows.push(([-e[i], d[i], 1.0], p[i]));
        rows.push(([e[i], -d[i], 1.0], -p[i]));
    }
    rows.push(([1.0, 0.0, 0.0], 0.0));
    rows.push(([-1.0, 0.0, 0.0], -1.0));
    rows.push(([0.0, 1.0, 0.0], 0.0));

    let mut best = f64::INFINITY;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            for k in j + 1..rows.len() {
                let m = [rows[i].0, rows[j].0, rows[k].0];
                let b = [rows[i].1, rows[j].1, rows[k].1];
                let Some(v) = solve3(m, b) else { continue };
                let feasible = rows.iter().all(|(a, bb)| a[0] * v[0] + a[1] * v[1] + a[2] * v[2] >= bb - 1e-12);
                if feasible {
                    best = best.min(v[2]);
                }
            }
        }
    }
    best.max(0.0)
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Conic neighborhoods `V1 ⊇ K1`, `V2 ⊇ K2` with `cl V1 ∩ cl V2 ⊆ W`.
///
/// In the plane the arcs of `K1`, `K2` are dilated by a margin that starts at `pi/4` and
/// halves until the inclusion holds exactly, down to [`MARGIN_FLOOR`]. On the line the rays
/// are already open, so `V = K`.
pub fn split_neighborhoods(k1: &Cone, k2: &Cone, w: &Cone) -> Result<(Cone, Cone)> {
    check_dim(k1.dim(), k2.dim())?;
    check_dim(k1.dim(), w.dim())?;
    if !k1.is_closed() || !k2.is_closed() {
        return Err(Error::precondition("split needs closed cones K1, K2"));
    }
    if !k1.intersection(k2)?.is_subset(w)? {
        return Err(Error::precondition("W does not contain K1 ∩ K2"));
    }
    let ok = |v1: &Cone, v2: &Cone| -> Result<bool> { v1.closure().intersection(&v2.closure())?.is_subset(w) };
    match k1 {
        Cone::Line { .. } => {
            if ok(k1, k2)? {
                Ok((k1.clone(), k2.clone()))
            } else {
                Err(Error::precondition("closures of K1, K2 meet outside W"))
            }
        }
        Cone::Plane(_) => {
            let mut margin = FRAC_PI_4;
            while margin >= MARGIN_FLOOR {
                let v1 = conic_neighborhood(k1, margin)?;
                let v2 = conic_neighborhood(k2, margin)?;
                if ok(&v1, &v2)? {
                    return Ok((v1, v2));
                }
                margin *= 0.5;
            }
            Err(Error::precondition(format!("no dilation margin down to {MARGIN_FLOOR} separates K1, K2 inside W")))
        }
        Cone::Sampled { .. } => Err(Error::Unsupported("split needs k <= 2".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn pos_x() -> Cone {
        Cone::arcs([AngleArc::ray(0.0)]).unwrap()
    }

    fn quarter() -> Cone {
        Cone::arcs([AngleArc::closed(0.0, FRAC_PI_2)]).unwrap()
    }

    #[test]
    fn membership() {
        assert!(Cone::full(2).unwrap().contains(&[-3.0, 7.0]).unwrap());
        assert!(!Cone::origin(2).contains(&[1.0, 0.0]).unwrap());
        assert!(Cone::origin(2).contains(&[0.0, 0.0]).unwrap());
        assert!(pos_x().contains(&[5.0, 0.0]).unwrap());
        assert!(!pos_x().contains(&[5.0, 0.1]).unwrap());
        assert!(Cone::positive_ray().contains(&[2.0]).unwrap());
        assert!(!Cone::positive_ray().contains(&[-2.0]).unwrap());
        assert!(matches!(pos_x().contains(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn distances() {
        assert_eq!(Cone::full(2).unwrap().distance(&[3.0, -4.0]).unwrap(), 0.0);
        assert_eq!(Cone::origin(2).distance(&[3.0, -4.0]).unwrap(), 4.0);
        assert_eq!(pos_x().distance(&[-2.0, 1.0]).unwrap(), 2.0);
        assert_eq!(Cone::origin(1).distance(&[2.0]).unwrap(), 2.0);
        assert_eq!(Cone::positive_ray().distance(&[-2.5]).unwrap(), 2.5);
    }

    /// Brute-force `min_t max(|x - t d|)` over a fine t-grid.
    fn brute_ray(x: &[f64], d: &[f64]) -> f64 {
        (0..=200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|t| x.iter().zip(d).fold(0.0_f64, |m, (a, b)| m.max((a - t * b).abs())))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn ray_distance_matches_sweep() {
        let cases =
            [([-2.0, 1.0], [1.0, 0.0]), ([1.0, 3.0], [1.0, 1.0]), ([0.3, -2.0], [0.6, 0.8]), ([4.0, 1.0], [-1.0, 0.5])];
        for (x, d) in cases {
            let exact = ray_distance(&x, &d);
            assert!((exact - brute_ray(&x, &d)).abs() < 1e-3, "{x:?} {d:?}");
        }
    }

    #[test]
    fn neighborhood_examples() {
        assert!(conic_neighborhood(&Cone::origin(2), 0.3).unwrap().is_degenerate());
        let n = conic_neighborhood(&pos_x(), PI / 8.0).unwrap();
        let expect = Cone::arcs([AngleArc::open(-PI / 8.0, PI / 8.0)]).unwrap();
        assert_eq!(n, expect);
        assert!(n.contains(&[1.0, -0.4]).unwrap());
        assert!(!n.contains(&[1.0, (PI / 8.0).tan()]).unwrap());
        let full = conic_neighborhood(&Cone::full(2).unwrap(), 0.1).unwrap();
        assert!(full.is_full());
        assert!(conic_neighborhood(&pos_x(), PI).is_err());
    }

    #[test]
    fn arc_algebra() {
        let a = ArcSet::new([AngleArc::closed(-0.5, 0.5)]).unwrap();
        assert_eq!(a.arcs().len(), 2);
        assert!(a.contains_angle(0.0) && a.contains_angle(TAU - 0.2));
        let c = a.complement();
        assert!(!c.contains_angle(0.1) && c.contains_angle(PI));
        assert!(a.union(&c).is_full());
        assert!(a.intersection(&c).is_empty());
        assert!(a.is_closed());
        assert!(!a.dilate(0.1).is_closed());
        assert!(a.is_subset(&a.dilate(0.1)));
        // open arc ending at 2pi: the closure gains the angle 0
        let o = ArcSet::new([AngleArc::open(5.0, TAU)]).unwrap();
        assert!(!o.contains_angle(0.0) || o.contains_angle(1e-13));
        assert!(o.closure().arcs().iter().any(|x| x.lo == 0.0 && x.hi == 0.0));
    }

    #[test]
    fn separation_examples() {
        let k2 = Cone::arcs([AngleArc::ray(FRAC_PI_2)]).unwrap();
        assert!((separation_constant(&pos_x(), &k2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(separation_constant(&pos_x(), &Cone::origin(2)).unwrap(), 1.0);
        assert_eq!(separation_constant(&Cone::positive_ray(), &Cone::negative_ray()).unwrap(), 1.0);
        assert!(matches!(separation_constant(&quarter(), &pos_x()), Err(Error::Precondition(_))));
    }

    #[test]
    fn separation_of_tilted_ray() {
        // K2 = ray at 30 degrees; square point (1, tan 30); distance to positive x-axis = tan 30
        let k2 = Cone::arcs([AngleArc::ray(PI / 6.0)]).unwrap();
        let th = separation_constant(&pos_x(), &k2).unwrap();
        assert!((th - (PI / 6.0).tan()).abs() < 1e-12);
        let direct = pos_x().distance(&square_point(PI / 6.0)).unwrap();
        assert!((th - direct).abs() < 1e-12);
    }

    #[test]
    fn split_examples() {
        let w = Cone::origin(2);
        let k1 = pos_x();
        let k2 = Cone::arcs([AngleArc::ray(PI)]).unwrap();
        let (v1, v2) = split_neighborhoods(&k1, &k2, &w).unwrap();
        assert!(k1.is_subset(&v1).unwrap() && k2.is_subset(&v2).unwrap());
        assert!(v1.closure().intersection(&v2.closure()).unwrap().is_degenerate());

        let k = quarter();
        let wk = conic_neighborhood(&k, 0.2).unwrap();
        let (v1, v2) = split_neighborhoods(&k, &k, &wk).unwrap();
        assert_eq!(v1, v2);
        assert!(v1.closure().is_subset(&wk).unwrap());

        let (l1, l2) = split_neighborhoods(&Cone::positive_ray(), &Cone::negative_ray(), &Cone::origin(1)).unwrap();
        assert_eq!((l1, l2), (Cone::positive_ray(), Cone::negative_ray()));
    }

    #[test]
    fn split_needs_w_to_cover_the_overlap() {
        let r = split_neighborhoods(&quarter(), &quarter(), &Cone::origin(2));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn cone_text_round_trip() {
        let c = Cone::arcs([AngleArc::closed(0.0, 1.0), AngleArc::open(2.0, 3.0)]).unwrap();
        let back: Cone = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let line: Cone = toml::from_str("dim = 1\nrays = [\"positive\"]").unwrap();
        assert_eq!(line, Cone::positive_ray());
    }

    fn shipped() -> Vec<Cone> {
        vec![
            Cone::origin(2),
            Cone::full(2).unwrap(),
            pos_x(),
            quarter(),
            Cone::arcs([AngleArc::closed(1.0, 2.5), AngleArc::closed(4.0, 4.2)]).unwrap(),
            Cone::arcs([AngleArc::open(-0.3, 0.3)]).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn homogeneous(x0 in -50.0f64..50.0, x1 in -50.0f64..50.0, ti in 0usize..3) {
            let t = [0.5, 2.0, 10.0][ti];
            for c in shipped() {
                let d = c.distance(&[x0, x1]).unwrap();
                let dt = c.distance(&[t * x0, t * x1]).unwrap();
                prop_assert!((dt - t * d).abs() <= 1e-12 * (1.0 + t * d));
                prop_assert_eq!(c.contains(&[x0, x1]).unwrap(), c.contains(&[t * x0, t * x1]).unwrap());
            }
        }

        #[test]
        fn lipschitz_and_bounded(a in prop::array::uniform2(-20.0f64..20.0), b in prop::array::uniform2(-20.0f64..20.0)) {
            let gap = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
            for c in shipped() {
                let (da, db) = (c.distance(&a).unwrap(), c.distance(&b).unwrap());
                prop_assert!((da - db).abs() <= gap + 1e-12);
                prop_assert!(da <= uniform_norm(&a) + 1e-15);
            }
        }

        #[test]
        fn separation_bound_holds(lo in 0.5f64..2.5, len in 0.0f64..1.5, t in 0.0f64..1.0) {
            let k1 = Cone::arcs([AngleArc::closed(PI + 0.2, TAU - 0.2)]).unwrap();
            let hi = (lo + len).min(PI - 0.1);
            let k2 = Cone::arcs([AngleArc::closed(lo, hi)]).unwrap();
            let th = separation_constant(&k1, &k2).unwrap();
            prop_assert!(th > 0.0);
            let x = square_point(lo + t * (hi - lo));
            prop_assert!(k1.distance(&x).unwrap() >= th - 1e-12);
        }
    }
}
