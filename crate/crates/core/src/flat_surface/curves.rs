//! Closed curves made of straight segments, their crossings, and the
//! length bounds on intersection numbers.

use std::hash::{Hash, Hasher};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::decompose::{vertical_decomposition, Part};
use super::saddle::shortest_saddle_connection;
use super::{FlatSurface, GluingKind, Holonomy, SurfaceError};
use crate::iet::{tall_section, TallOptions};
use crate::numeric::{Rational, Scalar};

/// A point of a polygon, in that polygon's chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub polygon: usize,
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub polygon: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub holonomy: Holonomy,
    #[serde(skip)]
    pub exact: Option<[[Rational; 2]; 2]>,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.holonomy.length()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatCurve {
    pub segments: Vec<Segment>,
    pub closed: bool,
    /// Fingerprint of the combinatorics of the surface the curve lives on.
    pub surface: u64,
}

/// Hash of polygon sizes and gluings; unchanged by `g_t` and other linear
/// maps.
pub(crate) fn fingerprint(surface: &FlatSurface) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for p in surface.polygons() {
        p.len().hash(&mut h);
    }
    surface.gluings().hash(&mut h);
    h.finish()
}

impl FlatCurve {
    /// A curve not tied to any surface, given by consecutive displacements.
    pub fn from_holonomies(steps: &[(f64, f64)]) -> FlatCurve {
        let mut z = [0.0, 0.0];
        let segments = steps
            .iter()
            .map(|&(h, v)| {
                let start = z;
                z = [z[0] + h, z[1] + v];
                Segment { polygon: 0, start, end: z, holonomy: Holonomy { h, v }, exact: None }
            })
            .collect();
        FlatCurve { segments, closed: false, surface: 0 }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Sum of the segment holonomies.
    pub fn holonomy(&self) -> Holonomy {
        let (h, v) = self.segments.iter().fold((0.0, 0.0), |(h, v), s| (h + s.holonomy.h, v + s.holonomy.v));
        Holonomy { h, v }
    }

    /// Image under `g_t`; stays on the flowed surface.
    pub fn flow(&self, t: f64) -> FlatCurve {
        let (a, b) = (t.exp(), (-t).exp());
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                polygon: s.polygon,
                start: [a * s.start[0], b * s.start[1]],
                end: [a * s.end[0], b * s.end[1]],
                holonomy: s.holonomy.flow(t),
                exact: None,
            })
            .collect();
        FlatCurve { segments, closed: self.closed, surface: self.surface }
    }

    /// Overall slope `|v|/|h|` of the unsigned holonomy.
    pub fn slope(&self) -> f64 {
        let (h, v) = unsigned_holonomy_exact(self);
        if h == 0.0 {
            f64::INFINITY
        } else {
            v / h
        }
    }
}

/// `(Σ|hᵢ|, Σ|vᵢ|)`.
pub fn unsigned_holonomy(curve: &FlatCurve) -> (f64, f64) {
    curve.segments.iter().fold((0.0, 0.0), |(h, v), s| (h + s.holonomy.h.abs(), v + s.holonomy.v.abs()))
}

/// Unsigned holonomy summed in exact arithmetic when every segment is exact.
fn unsigned_holonomy_exact(curve: &FlatCurve) -> (f64, f64) {
    if curve.segments.iter().all(|s| s.exact.is_some()) && !curve.segments.is_empty() {
        let (mut h, mut v) = (<Rational as Zero>::zero(), <Rational as Zero>::zero());
        for s in &curve.segments {
            let e = s.exact.as_ref().expect("checked");
            h += Signed::abs(&(&e[1][0] - &e[0][0]));
            v += Signed::abs(&(&e[1][1] - &e[0][1]));
        }
        (Scalar::to_f64(&h), Scalar::to_f64(&v))
    } else {
        unsigned_holonomy(curve)
    }
}

fn cross<S: Scalar>(a: &[S; 2], b: &[S; 2]) -> S {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

fn sub<S: Scalar>(a: &[S; 2], b: &[S; 2]) -> [S; 2] {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

fn add<S: Scalar>(a: &[S; 2], b: &[S; 2]) -> [S; 2] {
    [a[0].clone() + b[0].clone(), a[1].clone() + b[1].clone()]
}

fn scale<S: Scalar>(k: &S, a: &[S; 2]) -> [S; 2] {
    [k.clone() * a[0].clone(), k.clone() * a[1].clone()]
}

/// Follows the straight path from `z0` in polygon `p` with total
/// displacement `d`, crossing glued edges.
fn trace<S: Scalar>(
    polys: &[Vec<[S; 2]>],
    surface: &FlatSurface,
    p: usize,
    z0: [S; 2],
    d: [S; 2],
) -> Result<Vec<(usize, [S; 2], [S; 2])>, SurfaceError> {
    let mut out = Vec::new();
    let (mut poly, mut z, mut r) = (p, z0, d);
    let mut entered: Option<usize> = None;
    for _ in 0..1_000_000 {
        let pts = &polys[poly];
        let n = pts.len();
        let mut best: Option<(S, S, usize)> = None;
        for e in 0..n {
            if Some(e) == entered {
                continue;
            }
            let a = &pts[e];
            let b = &pts[(e + 1) % n];
            let ab = sub(b, a);
            let den = cross(&r, &ab);
            if den.sign() == 0 {
                continue;
            }
            let az = sub(a, &z);
            let lam = cross(&az, &ab) / den.clone();
            let mu = cross(&az, &r) / den;
            if lam.sign() <= 0 || mu.sign() < 0 || (mu.clone() - S::one()).sign() > 0 {
                continue;
            }
            if best.as_ref().map_or(true, |(l, _, _)| lam < *l) {
                best = Some((lam, mu, e));
            }
        }
        match best {
            Some((lam, mu, e)) if (lam.clone() - S::one()).sign() < 0 => {
                if mu.sign() == 0 || (mu.clone() - S::one()).sign() == 0 {
                    return Err(SurfaceError::HitsVertex);
                }
                let hit = add(&z, &scale(&lam, &r));
                out.push((poly, z, hit));
                let (q, f, kind) = surface.partner(poly, e);
                let m = polys[q].len();
                let vf = &polys[q][f];
                let vf1 = &polys[q][(f + 1) % m];
                let z2 = add(vf1, &scale(&mu, &sub(vf, vf1)));
                let rest = scale(&(S::one() - lam), &r);
                r = match kind {
                    GluingKind::Translation => rest,
                    GluingKind::Semi => [-rest[0].clone(), -rest[1].clone()],
                };
                z = z2;
                poly = q;
                entered = Some(f);
            }
            _ => {
                let end = add(&z, &r);
                out.push((poly, z, end));
                return Ok(out);
            }
        }
    }
    Err(SurfaceError::NotClosed)
}

fn segment_from<S: Scalar>(poly: usize, a: [S; 2], b: [S; 2]) -> Segment {
    let start = [a[0].to_f64(), a[1].to_f64()];
    let end = [b[0].to_f64(), b[1].to_f64()];
    let hol = sub(&b, &a);
    Segment { polygon: poly, start, end, holonomy: Holonomy { h: hol[0].to_f64(), v: hol[1].to_f64() }, exact: None }
}

/// The closed straight curve starting at `start` with holonomy `d`; fails
/// if it runs into a vertex or does not come back.
pub fn straight_curve(surface: &FlatSurface, start: CurvePoint, d: [f64; 2]) -> Result<FlatCurve, SurfaceError> {
    let polys: Vec<Vec<[f64; 2]>> = surface.polygons().to_vec();
    let segs = trace(&polys, surface, start.polygon, start.z, d)?;
    let segments: Vec<Segment> = segs.into_iter().map(|(p, a, b)| segment_from(p, a, b)).collect();
    let last = segments.last().expect("a trace has a segment");
    let tol = 1e-9 * surface.scale();
    let closed = last.polygon == start.polygon
        && (last.end[0] - start.z[0]).abs() <= tol
        && (last.end[1] - start.z[1]).abs() <= tol;
    Ok(FlatCurve { segments, closed, surface: fingerprint(surface) })
}

fn exact_straight(
    surface: &FlatSurface,
    p: usize,
    z0: [Rational; 2],
    d: [Rational; 2],
) -> Result<FlatCurve, SurfaceError> {
    let polys = surface.exact_polygons().expect("exact surface").to_vec();
    let segs = trace(&polys, surface, p, z0.clone(), d)?;
    let closed = segs.last().is_some_and(|(q, _, b)| *q == p && *b == z0);
    let segments = segs
        .into_iter()
        .map(|(q, a, b)| {
            let mut s = segment_from(q, a.clone(), b.clone());
            s.exact = Some([a, b]);
            s
        })
        .collect();
    Ok(FlatCurve { segments, closed, surface: fingerprint(surface) })
}

/// The closed geodesic of primitive class `(p, q)` on a torus given by a
/// parallelogram with opposite sides glued, i.e. holonomy `p·u + q·w` for
/// sides `u` and `w`. Non-primitive classes are reduced to their primitive
/// part. The base point sits at generic rational coordinates so the line
/// avoids the vertex.
pub fn torus_curve(surface: &FlatSurface, p: i64, q: i64) -> Result<FlatCurve, SurfaceError> {
    if surface.polygons().len() != 1 || surface.polygons()[0].len() != 4 {
        return Err(SurfaceError::Format("torus curves need a single parallelogram".into()));
    }
    let g = p.gcd(&q);
    if g == 0 {
        return Err(SurfaceError::Format("the zero class has no curve".into()));
    }
    let (p, q) = (p / g, q / g);
    let (a, b) = ((1i64, 3 * 7919i64), (1i64, 5 * 104_729i64));
    if let Some(ex) = surface.exact_polygons() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let pts = &ex[0];
        let u = sub(&pts[1], &pts[0]);
        let w = sub(&pts[3], &pts[0]);
        let z0 = add(&pts[0], &add(&scale(&r(a.0, a.1), &u), &scale(&r(b.0, b.1), &w)));
        let d = add(&scale(&r(p, 1), &u), &scale(&r(q, 1), &w));
        exact_straight(surface, 0, z0, d)
    } else {
        let pts = &surface.polygons()[0];
        let u = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
        let w = [pts[3][0] - pts[0][0], pts[3][1] - pts[0][1]];
        let (sa, sb) = (a.0 as f64 / a.1 as f64, b.0 as f64 / b.1 as f64);
        let z0 = [pts[0][0] + sa * u[0] + sb * w[0], pts[0][1] + sa * u[1] + sb * w[1]];
        let d = [p as f64 * u[0] + q as f64 * w[0], p as f64 * u[1] + q as f64 * w[1]];
        straight_curve(surface, CurvePoint { polygon: 0, z: z0 }, d)
    }
}

/// A transversal crossing of two curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub polygon: usize,
    pub z: [f64; 2],
    pub alpha_segment: usize,
    pub beta_segment: usize,
}

/// Parameters in `[0, 1)` on both segments; parallel segments never cross.
fn segment_crossing<S: Scalar>(a0: &[S; 2], a1: &[S; 2], b0: &[S; 2], b1: &[S; 2]) -> Option<S> {
    let da = sub(a1, a0);
    let db = sub(b1, b0);
    let den = cross(&da, &db);
    if den.sign_tol(0.0) == 0 {
        return None;
    }
    let ab = sub(b0, a0);
    let s = cross(&ab, &db) / den.clone();
    let t = cross(&ab, &da) / den;
    let one = S::one();
    let inside = |x: &S| x.sign_tol(0.0) >= 0 && (x.clone() - one.clone()).sign_tol(0.0) < 0;
    (inside(&s) && inside(&t)).then_some(s)
}

pub fn crossings(alpha: &FlatCurve, beta: &FlatCurve) -> Result<Vec<Crossing>, SurfaceError> {
    if alpha.surface != beta.surface {
        return Err(SurfaceError::DifferentSurfaces);
    }
    let exact = alpha.segments.iter().chain(&beta.segments).all(|s| s.exact.is_some());
    let mut out = Vec::new();
    for (i, a) in alpha.segments.iter().enumerate() {
        for (j, b) in beta.segments.iter().enumerate() {
            if a.polygon != b.polygon {
                continue;
            }
            let s = if exact {
                let (ea, eb) = (a.exact.as_ref().expect("exact"), b.exact.as_ref().expect("exact"));
                segment_crossing(&ea[0], &ea[1], &eb[0], &eb[1]).map(|s| Scalar::to_f64(&s))
            } else {
                segment_crossing(&a.start, &a.end, &b.start, &b.end)
            };
            if let Some(s) = s {
                let z = [a.start[0] + s * a.holonomy.h, a.start[1] + s * a.holonomy.v];
                out.push(Crossing { polygon: a.polygon, z, alpha_segment: i, beta_segment: j });
            }
        }
    }
    Ok(out)
}

/// Number of transversal crossings of the two segment paths.
pub fn intersection_number(alpha: &FlatCurve, beta: &FlatCurve) -> Result<usize, SurfaceError> {
    Ok(crossings(alpha, beta)?.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickBoundReport {
    pub i: usize,
    pub bound: f64,
    pub pass: bool,
    pub systole: f64,
    pub length_alpha: f64,
    pub length_beta: f64,
}

/// Checks `i(α, β) ≤ (4/ε²) ℓ(α) ℓ(β)` on a surface whose shortest saddle
/// connection is at least `ε`.
pub fn check_thick_intersection_bound(
    surface: &FlatSurface,
    epsilon: f64,
    alpha: &FlatCurve,
    beta: &FlatCurve,
) -> Result<ThickBoundReport, SurfaceError> {
    let systole = shortest_saddle_connection(surface).length;
    if systole < epsilon * (1.0 - 1e-12) {
        return Err(SurfaceError::NotThick(systole, epsilon));
    }
    let i = intersection_number(alpha, beta)?;
    let (la, lb) = (alpha.length(), beta.length());
    let bound = 4.0 / (epsilon * epsilon) * la * lb;
    Ok(ThickBoundReport { i, bound, pass: i as f64 <= bound, systole, length_alpha: la, length_beta: lb })
}

/// A maximal stretch of a curve inside one part of the vertical
/// decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sojourn {
    pub curve: String,
    pub part: Option<Part>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeBoundReport {
    #[serde(rename = "H")]
    pub h: f64,
    pub epsilon: f64,
    pub w0: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub slope_alpha: f64,
    pub slope_beta: f64,
    pub length_alpha: f64,
    pub length_beta: f64,
    pub i: usize,
    pub i_c: usize,
    pub i_z: usize,
    pub low_slope: usize,
    pub k9: f64,
    pub bound: f64,
    pub i_c_bound: f64,
    pub i_z_bound: f64,
    pub low_slope_bound: f64,
    pub pass: bool,
    pub sojourns: Vec<Sojourn>,
}

const SOJOURN_SAMPLES: usize = 32;

fn sojourns(name: &str, curve: &FlatCurve, part_at: &dyn Fn(usize, [f64; 2]) -> Option<Part>) -> Vec<Sojourn> {
    let mut out: Vec<Sojourn> = Vec::new();
    for s in &curve.segments {
        let step = s.length() / SOJOURN_SAMPLES as f64;
        for k in 0..SOJOURN_SAMPLES {
            let f = (k as f64 + 0.5) / SOJOURN_SAMPLES as f64;
            let z = [s.start[0] + f * s.holonomy.h, s.start[1] + f * s.holonomy.v];
            let part = part_at(s.polygon, z);
            match out.last_mut() {
                Some(last) if last.part == part => last.length += step,
                _ => out.push(Sojourn { curve: name.to_string(), part, length: step }),
            }
        }
    }
    out
}

/// Intersection count of two steep curves split by where the crossings
/// happen, against `k₉ ℓ(α) ℓ(β) / H` with `k₉ = 2/ε + 9 + 4/ε²`.
///
/// `w₀` is the smallest width among vertical cylinders and the rectangles
/// over tall sections of the minimal components; both curves need slope at
/// least `M = H(H/w₀ + 1)`.
pub fn slope_intersection_bound(
    surface: &FlatSurface,
    alpha: &FlatCurve,
    beta: &FlatCurve,
    h: f64,
    epsilon: f64,
) -> Result<SlopeBoundReport, SurfaceError> {
    if !(h > 0.0) {
        return Err(SurfaceError::NonPositiveH);
    }
    if !surface.is_translation() {
        return Err(SurfaceError::NotTranslation);
    }
    if alpha.surface != beta.surface || alpha.surface != fingerprint(surface) {
        return Err(SurfaceError::DifferentSurfaces);
    }
    let dec = vertical_decomposition(surface)?;
    let mut w0 = dec.min_cylinder_width().unwrap_or(f64::INFINITY);
    for m in &dec.minimal_components {
        let susp = m.section.suspension();
        let cert = tall_section(&susp, h, &TallOptions::default())?;
        let tall = susp.induce(&cert.l2)?;
        w0 = w0.min(tall.rectangles().min_width());
    }
    let m1 = h / w0;
    let m = h * (m1 + 1.0);
    let (sa, sb) = (alpha.slope(), beta.slope());
    for s in [sa, sb] {
        if s < m * (1.0 - 1e-12) {
            return Err(SurfaceError::SlopeBelowM(s, m));
        }
    }
    let cr = crossings(alpha, beta)?;
    let steep = |s: &Segment| s.holonomy.h == 0.0 || (s.holonomy.v / s.holonomy.h).abs() >= m * (1.0 - 1e-12);
    let (mut i_c, mut i_z, mut low) = (0, 0, 0);
    for c in &cr {
        if !steep(&alpha.segments[c.alpha_segment]) || !steep(&beta.segments[c.beta_segment]) {
            low += 1;
            continue;
        }
        match dec.part_at(c.polygon, c.z) {
            Some(Part::Cylinder(_)) => i_c += 1,
            _ => i_z += 1,
        }
    }
    let (la, lb) = (alpha.length(), beta.length());
    let ll = la * lb;
    let k9 = 2.0 / epsilon + 9.0 + 4.0 / (epsilon * epsilon);
    let bound = k9 * ll / h;
    let part_at = |p: usize, z: [f64; 2]| dec.part_at(p, z);
    let mut soj = sojourns("alpha", alpha, &part_at);
    soj.extend(sojourns("beta", beta, &part_at));
    Ok(SlopeBoundReport {
        h,
        epsilon,
        w0,
        m1,
        m,
        slope_alpha: sa,
        slope_beta: sb,
        length_alpha: la,
        length_beta: lb,
        i: cr.len(),
        i_c,
        i_z,
        low_slope: low,
        k9,
        bound,
        i_c_bound: 2.0 * ll / (h * epsilon),
        i_z_bound: 9.0 * ll / h,
        low_slope_bound: 4.0 / (epsilon * epsilon) * ll / h,
        pass: cr.len() as f64 <= bound,
        sojourns: soj,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{golden_torus, square_torus};
    use super::*;

    #[test]
    fn torus_intersections() {
        let s = square_torus();
        let c = |p, q| torus_curve(&s, p, q).unwrap();
        assert!(c(1, 0).closed && c(3, 4).closed);
        assert_eq!(intersection_number(&c(1, 0), &c(0, 1)).unwrap(), 1);
        assert_eq!(intersection_number(&c(1, 2), &c(3, 4)).unwrap(), 2);
        assert_eq!(intersection_number(&c(3, 4), &c(1, 2)).unwrap(), 2);
        assert_eq!(intersection_number(&c(1, 2), &c(2, 4)).unwrap(), 0);
        assert_eq!(intersection_number(&c(5, 3), &c(5, 3)).unwrap(), 0);
        assert_eq!(intersection_number(&c(7, -3), &c(2, 5)).unwrap(), 41);
        let len: f64 = c(3, 4).length();
        assert!((len - 5.0).abs() < 1e-12);
    }

    #[test]
    fn float_torus_intersections() {
        let s = golden_torus();
        let c = |p, q| torus_curve(&s, p, q).unwrap();
        assert!(c(2, 3).closed);
        assert_eq!(intersection_number(&c(1, 2), &c(3, 4)).unwrap(), 2);
        assert_eq!(intersection_number(&c(4, 1), &c(-1, 5)).unwrap(), 21);
    }

    #[test]
    fn unsigned_holonomy_and_flow() {
        let c = FlatCurve::from_holonomies(&[(1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(unsigned_holonomy(&c), (1.0, 1.0));
        assert_eq!(c.length(), 2.0);
        let f = c.flow(1.0);
        let (h, v) = unsigned_holonomy(&f);
        assert!((h - 1f64.exp()).abs() < 1e-15 && (v - (-1f64).exp()).abs() < 1e-15);
        let c = FlatCurve::from_holonomies(&[(3.0, 4.0)]);
        assert_eq!(unsigned_holonomy(&c), (3.0, 4.0));
    }

    #[test]
    fn thick_bound_example() {
        let s = square_torus();
        let a = torus_curve(&s, 1, 2).unwrap();
        let b = torus_curve(&s, 3, 4).unwrap();
        let r = check_thick_intersection_bound(&s, 1.0, &a, &b).unwrap();
        assert_eq!(r.i, 2);
        assert!((r.bound - 4.0 * 5f64.sqrt() * 5.0).abs() < 1e-9);
        assert!(r.pass);
        assert!(matches!(check_thick_intersection_bound(&s, 2.0, &a, &b), Err(SurfaceError::NotThick(..))));
    }

    #[test]
    fn slope_bound_example() {
        let s = square_torus();
        let a = torus_curve(&s, 1, 12).unwrap();
        let b = torus_curve(&s, 1, 17).unwrap();
        let r = slope_intersection_bound(&s, &a, &b, 3.0, 1.0).unwrap();
        assert_eq!(r.i, 5);
        assert_eq!(r.i, intersection_number(&a, &b).unwrap());
        assert_eq!((r.w0, r.m1, r.m, r.k9), (1.0, 3.0, 12.0, 15.0));
        assert!((r.bound - 15.0 * 145f64.sqrt() * 290f64.sqrt() / 3.0).abs() < 1e-9);
        assert!(r.pass);
        assert_eq!(r.i_c + r.i_z + r.low_slope, r.i);
        assert_eq!(r.i_c, 5);
        let total: f64 = r.sojourns.iter().filter(|x| x.curve == "alpha").map(|x| x.length).sum();
        assert!((total - a.length()).abs() < 1e-9);
        let low = torus_curve(&s, 1, 11).unwrap();
        assert!(matches!(slope_intersection_bound(&s, &low, &b, 3.0, 1.0), Err(SurfaceError::SlopeBelowM(..))));
        assert!(matches!(slope_intersection_bound(&s, &a, &b, 0.0, 1.0), Err(SurfaceError::NonPositiveH)));
        let v1 = torus_curve(&s, 0, 1).unwrap();
        let r = slope_intersection_bound(&s, &v1, &v1, 3.0, 1.0).unwrap();
        assert_eq!(r.i, 0);
    }

    #[test]
    fn slope_bound_on_minimal_torus() {
        let s = golden_torus();
        // Tall sections make w₀ tiny, so the classes come from late
        // Fibonacci convergents of γ, where p + qγ is nearly zero.
        let a = torus_curve(&s, -377, 610).unwrap();
        let b = torus_curve(&s, -610, 987).unwrap();
        let r = slope_intersection_bound(&s, &a, &b, 2.0, 0.5).unwrap();
        assert_eq!(r.i, intersection_number(&a, &b).unwrap());
        assert_eq!(r.i, 1);
        assert!(r.w0 > 0.0 && r.w0 < 1.0);
        assert!(r.pass);
    }
}
