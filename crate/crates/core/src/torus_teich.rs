//! Genus-one Teichmuller space as the upper half-plane.
//!
//! Distances are Teichmuller distances, half the curvature `−1` distance.
//! Flat lengths are for the unit-area torus `ℂ/(ℤ + τℤ)` scaled by
//! `1/√Im τ`, so extremal length is literally the squared flat length.

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{self, Boundary, HyperbolicError, Mobius, Toward};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TorusError {
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error("curve class ({0}, {1}) is not primitive")]
    NotPrimitive(i64, i64),
    #[error("determinant {0} is not 1")]
    Determinant(i64),
    #[error("bound must be at least 1")]
    BoundTooSmall,
    #[error("negative geodesic time {0}")]
    NegativeTime(f64),
    #[error("empty family")]
    EmptyFamily,
    #[error("point {0} is not in the thick part (systole {1} < {2})")]
    NotThick(String, f64, f64),
    #[error("side {0} shorter than the minimum {1}")]
    ShortSide(f64, f64),
    #[error("cannot parse point: {0}")]
    Parse(String),
}

/// A marked flat torus `ℂ/(ℤ + τℤ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub re: f64,
    pub im: f64,
}

impl TorusPoint {
    pub fn new(tau: Complex64) -> Result<TorusPoint, TorusError> {
        hyperbolic::check(tau)?;
        Ok(TorusPoint { re: tau.re, im: tau.im })
    }

    pub fn tau(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Parses `i`, `2i`, `1+2i`, `-0.5+0.866i`, `3` style numbers.
    pub fn parse(s: &str) -> Result<TorusPoint, TorusError> {
        let z = parse_complex(s).ok_or_else(|| TorusError::Parse(s.to_string()))?;
        TorusPoint::new(z)
    }

    /// Unit-area flat vector of the class `(p, q)`, the vector `p + qτ`.
    pub fn flat_vector(&self, p: i64, q: i64) -> Complex64 {
        (Complex64::new(p as f64, 0.0) + self.tau() * q as f64) / self.im.sqrt()
    }
}

pub fn parse_complex(s: &str) -> Option<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent or the front.
        let bytes = body.as_bytes();
        let mut cut = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                cut = Some(k);
                break;
            }
        }
        let (re, im) = match cut {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse().ok()?,
        };
        Some(Complex64::new(re.parse().ok()?, im))
    } else {
        Some(Complex64::new(t.parse().ok()?, 0.0))
    }
}

/// A primitive homotopy class `(p, q)` with canonical sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CurveClass {
    pub p: i64,
    pub q: i64,
}

impl CurveClass {
    pub fn new(p: i64, q: i64) -> Result<CurveClass, TorusError> {
        if p.gcd(&q) != 1 {
            return Err(TorusError::NotPrimitive(p, q));
        }
        Ok(if q < 0 || (q == 0 && p < 0) { CurveClass { p: -p, q: -q } } else { CurveClass { p, q } })
    }
}

/// Extremal length `|p + qτ|²/Im τ`, also for non-primitive pairs.
pub fn ext_length(tau: &TorusPoint, p: i64, q: i64) -> f64 {
    tau.flat_vector(p, q).norm_sqr()
}

/// Element of the integer matrix group of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MappingClass {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl MappingClass {
    pub const IDENTITY: MappingClass = MappingClass { a: 1, b: 0, c: 0, d: 1 };
    pub const T: MappingClass = MappingClass { a: 1, b: 1, c: 0, d: 1 };
    pub const T_INV: MappingClass = MappingClass { a: 1, b: -1, c: 0, d: 1 };
    pub const S: MappingClass = MappingClass { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<MappingClass, TorusError> {
        let det = a * d - b * c;
        if det != 1 {
            return Err(TorusError::Determinant(det));
        }
        Ok(MappingClass { a, b, c, d })
    }

    pub fn compose(&self, o: &MappingClass) -> MappingClass {
        MappingClass {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> MappingClass {
        MappingClass { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn mobius(&self) -> Mobius {
        Mobius { a: self.a as f64, b: self.b as f64, c: self.c as f64, d: self.d as f64 }
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }
}

/// `τ ↦ (aτ + b)/(cτ + d)`.
pub fn apply_mapping_class(m: &MappingClass, tau: &TorusPoint) -> Result<TorusPoint, TorusError> {
    MappingClass::new(m.a, m.b, m.c, m.d)?;
    TorusPoint::new(m.mobius().apply(tau.tau()))
}

/// Closed-form Teichmuller distance.
pub fn teich_distance(t1: &TorusPoint, t2: &TorusPoint) -> f64 {
    0.5 * hyperbolic::distance_unchecked(t1.tau(), t2.tau())
}

/// Result of the extremal-length ratio scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KerckhoffScan {
    pub tau1: TorusPoint,
    pub tau2: TorusPoint,
    pub bound: i64,
    pub distance: f64,
    pub argmax_pq: CurveClass,
    /// The maximizing class sits in the outer half of the scanned box, so a
    /// larger bound may still move the value.
    pub near_boundary: bool,
}

/// `½ ln max ext_{τ1}(γ)/ext_{τ2}(γ)` over primitive `(p, q)` with
/// `|p|, |q| ≤ bound`.
pub fn kerckhoff_distance(t1: &TorusPoint, t2: &TorusPoint, bound: i64) -> Result<KerckhoffScan, TorusError> {
    if bound < 1 {
        return Err(TorusError::BoundTooSmall);
    }
    let mut best = (f64::NEG_INFINITY, CurveClass { p: 1, q: 0 });
    for q in 0..=bound {
        for p in -bound..=bound {
            if (q == 0 && p != 1) || p.gcd(&q) != 1 {
                continue;
            }
            let r = (ext_length(t1, p, q) / ext_length(t2, p, q)).ln();
            if r > best.0 {
                best = (r, CurveClass { p, q });
            }
        }
    }
    let (r, argmax) = best;
    Ok(KerckhoffScan {
        tau1: *t1,
        tau2: *t2,
        bound,
        distance: 0.5 * r.max(0.0),
        argmax_pq: argmax,
        near_boundary: 2 * argmax.p.abs() > bound || 2 * argmax.q.abs() > bound,
    })
}

/// Moves `τ` into the standard fundamental domain, returning the image and a
/// mapping class sending `τ` to it.
pub fn reduce(tau: &TorusPoint) -> (TorusPoint, MappingClass) {
    let mut z = tau.tau();
    let mut m = MappingClass::IDENTITY;
    for _ in 0..10_000 {
        let n = (z.re + 0.5).floor();
        if n != 0.0 {
            z.re -= n;
            let k = n as i64;
            m = MappingClass { a: 1, b: -k, c: 0, d: 1 }.compose(&m);
        }
        if z.norm_sqr() < 1.0 - 1e-15 {
            z = -1.0 / z;
            m = MappingClass::S.compose(&m);
        } else {
            break;
        }
    }
    (TorusPoint { re: z.re, im: z.im }, m)
}

/// Length of the shortest closed geodesic on the unit-area torus.
pub fn systole(tau: &TorusPoint) -> f64 {
    let (r, _) = reduce(tau);
    // In the fundamental domain the class (1, 0) is shortest.
    1.0 / r.im.sqrt()
}

/// The class realizing the systole.
pub fn systole_curve(tau: &TorusPoint) -> CurveClass {
    let (_, m) = reduce(tau);
    // The class (1, 0) at Mτ is the vector cτ + d before the change of marking.
    CurveClass::new(m.d, m.c).expect("rows of a unimodular matrix are primitive")
}

pub fn in_thick(tau: &TorusPoint, epsilon: f64) -> bool {
    systole(tau) >= epsilon
}

/// Unit-speed Teichmuller geodesic from a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeichGeodesic {
    pub basepoint: TorusPoint,
    pub toward: Toward,
}

impl TeichGeodesic {
    pub fn to_boundary(basepoint: TorusPoint, xi: Boundary) -> TeichGeodesic {
        TeichGeodesic { basepoint, toward: Toward::Boundary(xi) }
    }

    pub fn to_point(basepoint: TorusPoint, target: TorusPoint) -> TeichGeodesic {
        TeichGeodesic { basepoint, toward: Toward::Point(target.tau()) }
    }

    /// Forward endpoint on `ℝ ∪ {∞}`.
    pub fn endpoint(&self) -> Boundary {
        match self.toward {
            Toward::Boundary(b) => b,
            Toward::Point(_) => {
                let n = hyperbolic::normalizer(self.basepoint.tau(), self.toward);
                n.inverse().apply_boundary(Boundary::Infinity)
            }
        }
    }
}

/// The point at Teichmuller distance `t` along the geodesic.
pub fn geodesic_point(g: &TeichGeodesic, t: f64) -> Result<TorusPoint, TorusError> {
    if t < 0.0 {
        return Err(TorusError::NegativeTime(t));
    }
    if let Toward::Point(p) = g.toward {
        if p == g.basepoint.tau() {
            return Ok(g.basepoint);
        }
    }
    TorusPoint::new(hyperbolic::point_along(g.basepoint.tau(), g.toward, 2.0 * t))
}

/// Unit-area flat vector of `(p, q)` at `τ`, rotated so that the geodesic
/// toward `xi` is the `g_t` flow: horizontal stretches, vertical contracts.
pub fn directed_vector(tau: &TorusPoint, xi: Boundary, p: i64, q: i64) -> Complex64 {
    let v = tau.flat_vector(p, q);
    let rot = match xi {
        Boundary::Infinity => Complex64::i(),
        Boundary::Finite(x) => {
            let u = tau.tau() - x;
            Complex64::i() * u.conj() / u.norm()
        }
    };
    v * rot
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub curve: CurveClass,
    pub length: f64,
    pub h: f64,
    pub v: f64,
    /// `|v|/|h|` for the first family, `|h|/|v|` for the second.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFamilyReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub tau: TorusPoint,
    pub direction: Boundary,
    #[serde(rename = "C1")]
    pub c1: Vec<FamilyMember>,
    #[serde(rename = "C2")]
    pub c2: Vec<FamilyMember>,
}

impl CurveFamilyReport {
    pub fn classes(&self) -> Vec<CurveClass> {
        let mut v: Vec<CurveClass> = self.c1.iter().chain(&self.c2).map(|m| m.curve).collect();
        v.sort();
        v.dedup();
        v
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Curves shorter than `r` that are nearly horizontal (first family) or nearly
/// vertical (second family), slope ratio below `r`, in the flat structure at
/// `tau` adapted to the direction `xi`.
pub fn curve_families(tau: &TorusPoint, xi: Boundary, r: f64) -> Result<CurveFamilyReport, TorusError> {
    let y = tau.im;
    let qmax = (r / y.sqrt()).floor() as i64;
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    for q in 0..=qmax {
        let center = -(q as f64) * tau.re;
        let half = r * y.sqrt();
        let (lo, hi) = ((center - half).floor() as i64, (center + half).ceil() as i64);
        for p in lo..=hi {
            let Ok(c) = CurveClass::new(p, q) else { continue };
            if c != (CurveClass { p, q }) {
                continue;
            }
            let z = directed_vector(tau, xi, p, q);
            let length = z.norm();
            if length >= r {
                continue;
            }
            let (h, v) = (z.re, z.im);
            let s1 = ratio(v.abs(), h.abs());
            if s1 < r {
                c1.push(FamilyMember { curve: c, length, h, v, slope: s1 });
            }
            let s2 = ratio(h.abs(), v.abs());
            if s2 < r {
                c2.push(FamilyMember { curve: c, length, h, v, slope: s2 });
            }
        }
    }
    if c1.is_empty() || c2.is_empty() {
        return Err(TorusError::EmptyFamily);
    }
    Ok(CurveFamilyReport { r, tau: *tau, direction: xi, c1, c2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub curve: CurveClass,
    pub ext_w: f64,
    pub ext_x: f64,
    pub ratio: f64,
}

/// Slopes at `w` against `e^d`, in one labeling of the directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeDiagnostic {
    pub convention: String,
    pub exp_d: f64,
    /// Largest `|v|/|h|` over the first family.
    pub max_slope_c1: f64,
    /// Largest `|h|/|v|` over the second family.
    pub max_slope_c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub x: TorusPoint,
    pub y: TorusPoint,
    pub z: TorusPoint,
    pub w: TorusPoint,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub min_side: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub ratios: Vec<RatioEntry>,
    /// Smallest `k` with every ratio in `[k⁻¹e^{−aρ}, k·e^{aρ}]`; measured,
    /// not a proven value.
    pub k5_empirical: f64,
    pub all_within_window: bool,
    pub slopes: Vec<SlopeDiagnostic>,
}

/// Frames the triangle `x, y, z` in Teichmuller distance, builds `w`, and
/// measures how much extremal lengths of the short nearly-aligned curves at
/// `w` change between `x` and `w`.
pub fn adeltabound_replay(
    x: &TorusPoint,
    y: &TorusPoint,
    z: &TorusPoint,
    r: f64,
    epsilon: f64,
    min_side: f64,
) -> Result<ReplayReport, TorusError> {
    let pts = [*x, *y, *z];
    let thick = |label: &str, p: &TorusPoint| {
        let s = systole(p);
        if s < epsilon {
            Err(TorusError::NotThick(label.to_string(), s, epsilon))
        } else {
            Ok(())
        }
    };
    for (l, p) in ["x", "y", "z"].iter().zip(&pts) {
        thick(l, p)?;
    }
    let dist = |i: usize, j: usize| teich_distance(&pts[i], &pts[j]);
    let sides = [dist(0, 1), dist(0, 2), dist(1, 2)];
    if let Some(&s) = sides.iter().find(|&&s| s < min_side) {
        return Err(TorusError::ShortSide(s, min_side));
    }
    // Longest side opposite x, y the nearer endpoint; smallest d on ties.
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let max = sides.iter().cloned().fold(0.0, f64::max);
    let tie = |u: f64, v: f64| (u - v).abs() <= 1e-12 * max.max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, [usize; 3], TorusPoint)> = None;
    for [ix, iy, iz] in orders {
        let (a, b, c) = (dist(ix, iy), dist(ix, iz), dist(iy, iz));
        if !(tie(c, max) && (a < b || tie(a, b))) {
            continue;
        }
        let w = geodesic_point(&TeichGeodesic::to_point(pts[iy], pts[iz]), a)?;
        let d = teich_distance(&w, &pts[ix]);
        if best.as_ref().map_or(true, |b| d < b.0) {
            best = Some((d, [ix, iy, iz], w));
        }
    }
    let (d, [ix, iy, iz], w) = best.expect("some labeling has the longest side opposite x");
    thick("w", &w)?;
    let (a, b, c) = (dist(ix, iy), dist(ix, iz), dist(iy, iz));
    let defect = (a + b - c).max(0.0);
    let rho = if a > 0.0 { (defect / a).min(1.0) } else { 0.0 };
    let xi = TeichGeodesic::to_point(pts[iy], pts[iz]).endpoint();
    let fam = curve_families(&w, xi, r)?;
    let xp = pts[ix];
    let mut k5: f64 = 1.0;
    let ratios: Vec<RatioEntry> = fam
        .classes()
        .into_iter()
        .map(|curve| {
            let ext_w = ext_length(&w, curve.p, curve.q);
            let ext_x = ext_length(&xp, curve.p, curve.q);
            let ratio = ext_w / ext_x;
            k5 = k5.max(ratio * (-defect).exp()).max((-defect).exp() / ratio);
            RatioEntry { curve, ext_w, ext_x, ratio }
        })
        .collect();
    let lo = (-defect).exp() / k5;
    let hi = k5 * defect.exp();
    let all_within_window = ratios.iter().all(|e| e.ratio >= lo * (1.0 - 1e-12) && e.ratio <= hi * (1.0 + 1e-12));
    let mut slopes = Vec::new();
    for (name, rotate) in [("vertical", false), ("horizontal", true)] {
        let (mut m1, mut m2) = (0.0f64, 0.0f64);
        for m in &fam.c1 {
            let (h, v) = if rotate { (m.v, m.h) } else { (m.h, m.v) };
            m1 = m1.max(ratio(v.abs(), h.abs()));
        }
        for m in &fam.c2 {
            let (h, v) = if rotate { (m.v, m.h) } else { (m.h, m.v) };
            m2 = m2.max(ratio(h.abs(), v.abs()));
        }
        slopes.push(SlopeDiagnostic { convention: name.into(), exp_d: d.exp(), max_slope_c1: m1, max_slope_c2: m2 });
    }
    Ok(ReplayReport {
        x: xp,
        y: pts[iy],
        z: pts[iz],
        w,
        a,
        b,
        c,
        d,
        rho,
        epsilon,
        min_side,
        r,
        ratios,
        k5_empirical: k5,
        all_within_window,
        slopes,
    })
}
