//! Comparison frames for geodesic triangles and tests of `d ≤ a·f(ρ)`.
//!
//! A frame takes a triangle `x, y, z` whose side `yz` is the longest, puts
//! `w` on the geodesic from `y` to `z` at distance `a = d(x, y)` from `y`, and
//! records `a, b = d(x, z), c = d(y, z), d = d(w, x)` together with the defect
//! ratio `ρ = (a + b − c)/a`.

mod sample;
mod star;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{self, HyperbolicError, Toward};
use crate::numeric::{ln_sinh, ratio_to_f64, serde_rational, Rational};
use num_complex::Complex64;

pub use sample::{estimate_bounding_function, sample_frames, SamplerConfig};
pub use star::{check_star, check_star_binned, Bound, StarBin, StarReport};

/// Relative tolerance used to decide that two sides tie for longest.
pub const TIE_TOL: f64 = 1e-12;
/// Comparison slack for floating model spaces.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("zero triangle")]
    ZeroTriangle,
    #[error("non-finite coordinates")]
    NonFinite,
    #[error("point does not belong to the {0} model space")]
    WrongSpace(&'static str),
    #[error("triangle inequality violated for sides ({0}, {1}, {2})")]
    TriangleInequality(f64, f64, f64),
    #[error("negative tripod leg")]
    NegativeLeg,
    #[error("theta {0} outside (0, π/2]")]
    ThetaOutOfRange(f64),
    #[error("mixed space tags: {0} and {1}")]
    MixedSpaces(String, String),
    #[error("empty sample")]
    EmptySample,
    #[error("geodesic between antipodal points is not unique")]
    AntipodalEndpoints,
    #[error("unknown bound: {0}")]
    UnknownBound(String),
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
}

/// The four model spaces with point-level constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSpace {
    Tripod,
    Euclidean,
    Hyperbolic,
    Sphere,
}

impl ModelSpace {
    pub fn tag(self) -> &'static str {
        match self {
            ModelSpace::Tripod => "tripod",
            ModelSpace::Euclidean => "euclidean",
            ModelSpace::Hyperbolic => "hyperbolic",
            ModelSpace::Sphere => "sphere",
        }
    }

    pub fn parse(s: &str) -> Option<ModelSpace> {
        match s {
            "tripod" | "tree" => Some(ModelSpace::Tripod),
            "euclidean" | "plane" => Some(ModelSpace::Euclidean),
            "hyperbolic" => Some(ModelSpace::Hyperbolic),
            "sphere" => Some(ModelSpace::Sphere),
            _ => None,
        }
    }
}

/// A point of one of the model spaces.
///
/// Tripod points sit on one of three legs at distance `r` from the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Point {
    Tripod { leg: u8, r: f64 },
    Plane { x: f64, y: f64 },
    HalfPlane { re: f64, im: f64 },
    Sphere { x: f64, y: f64, z: f64 },
}

impl Point {
    pub fn plane(x: f64, y: f64) -> Point {
        Point::Plane { x, y }
    }
    pub fn half_plane(z: Complex64) -> Point {
        Point::HalfPlane { re: z.re, im: z.im }
    }
    fn finite(&self) -> bool {
        match *self {
            Point::Tripod { r, .. } => r.is_finite() && r >= 0.0,
            Point::Plane { x, y } => x.is_finite() && y.is_finite(),
            Point::HalfPlane { re, im } => re.is_finite() && im.is_finite(),
            Point::Sphere { x, y, z } => x.is_finite() && y.is_finite() && z.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePoints {
    pub x: Point,
    pub y: Point,
    pub z: Point,
    pub w: Point,
}

/// Exact side lengths for tripod frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSides {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
    #[serde(with = "serde_rational")]
    pub c: Rational,
    #[serde(with = "serde_rational")]
    pub d: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleFrame {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rho: f64,
    pub space: String,
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<FramePoints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSides>,
}

impl TriangleFrame {
    /// Builds a frame from its four distances, deriving `ρ`.
    pub fn from_distances(space: &str, a: f64, b: f64, c: f64, d: f64) -> TriangleFrame {
        let (rho, degenerate) = defect_ratio(a, b, c);
        TriangleFrame { a, b, c, d, rho, space: space.to_string(), degenerate, points: None, exact: None }
    }

    pub fn defect(&self) -> f64 {
        self.a + self.b - self.c
    }

    /// `d/a`, or `None` for degenerate frames.
    pub fn d_over_a(&self) -> Option<f64> {
        if self.degenerate || self.a <= 0.0 {
            None
        } else {
            Some(self.d / self.a)
        }
    }
}

fn defect_ratio(a: f64, b: f64, c: f64) -> (f64, bool) {
    if a > 0.0 {
        (((a + b - c) / a).clamp(0.0, 1.0), false)
    } else {
        (0.0, true)
    }
}

fn point_distance(p: &Point, q: &Point) -> f64 {
    match (*p, *q) {
        (Point::Tripod { leg: l1, r: r1 }, Point::Tripod { leg: l2, r: r2 }) => {
            if l1 == l2 || r1 == 0.0 || r2 == 0.0 {
                if l1 == l2 {
                    (r1 - r2).abs()
                } else {
                    r1 + r2
                }
            } else {
                r1 + r2
            }
        }
        (Point::Plane { x: x1, y: y1 }, Point::Plane { x: x2, y: y2 }) => (x1 - x2).hypot(y1 - y2),
        (Point::HalfPlane { re: a1, im: b1 }, Point::HalfPlane { re: a2, im: b2 }) => {
            hyperbolic::distance_unchecked(Complex64::new(a1, b1), Complex64::new(a2, b2))
        }
        (Point::Sphere { x: x1, y: y1, z: z1 }, Point::Sphere { x: x2, y: y2, z: z2 }) => {
            sphere_distance([x1, y1, z1], [x2, y2, z2])
        }
        _ => f64::NAN,
    }
}

fn sphere_distance(u: [f64; 3], v: [f64; 3]) -> f64 {
    let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let c = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    s.atan2(c)
}

/// The point at distance `s` from `from` on the geodesic toward `to`.
fn along(from: &Point, to: &Point, s: f64) -> Result<Point, MetricError> {
    match (*from, *to) {
        (Point::Tripod { leg: l1, r: r1 }, Point::Tripod { leg: l2, r: r2 }) => {
            if l1 == l2 {
                let r = if r2 >= r1 { r1 + s } else { r1 - s };
                Ok(Point::Tripod { leg: l1, r })
            } else if s <= r1 {
                Ok(Point::Tripod { leg: l1, r: r1 - s })
            } else {
                Ok(Point::Tripod { leg: l2, r: (s - r1).min(r2) })
            }
        }
        (Point::Plane { x: x1, y: y1 }, Point::Plane { x: x2, y: y2 }) => {
            let len = (x2 - x1).hypot(y2 - y1);
            if len == 0.0 {
                return Ok(*from);
            }
            let t = s / len;
            Ok(Point::plane(x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
        }
        (Point::HalfPlane { re: a1, im: b1 }, Point::HalfPlane { re: a2, im: b2 }) => {
            let (z1, z2) = (Complex64::new(a1, b1), Complex64::new(a2, b2));
            if z1 == z2 {
                return Ok(*from);
            }
            Ok(Point::half_plane(hyperbolic::point_along(z1, Toward::Point(z2), s)))
        }
        (Point::Sphere { x: x1, y: y1, z: z1 }, Point::Sphere { x: x2, y: y2, z: z2 }) => {
            let u = [x1, y1, z1];
            let v = [x2, y2, z2];
            let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            let mut t = [v[0] - dot * u[0], v[1] - dot * u[1], v[2] - dot * u[2]];
            let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            if n < 1e-12 {
                if dot > 0.0 {
                    return Ok(*from);
                }
                return Err(MetricError::AntipodalEndpoints);
            }
            for ti in &mut t {
                *ti /= n;
            }
            let (sn, cs) = s.sin_cos();
            Ok(Point::Sphere {
                x: cs * u[0] + sn * t[0],
                y: cs * u[1] + sn * t[1],
                z: cs * u[2] + sn * t[2],
            })
        }
        _ => Err(MetricError::WrongSpace("mixed")),
    }
}

fn belongs(p: &Point, space: ModelSpace) -> Result<(), MetricError> {
    let ok = matches!(
        (p, space),
        (Point::Tripod { .. }, ModelSpace::Tripod)
            | (Point::Plane { .. }, ModelSpace::Euclidean)
            | (Point::HalfPlane { .. }, ModelSpace::Hyperbolic)
            | (Point::Sphere { .. }, ModelSpace::Sphere)
    );
    if !ok {
        return Err(MetricError::WrongSpace(space.tag()));
    }
    if !p.finite() {
        return Err(MetricError::NonFinite);
    }
    if let Point::HalfPlane { re, im } = *p {
        hyperbolic::check(Complex64::new(re, im))?;
    }
    Ok(())
}

fn normalize_sphere(p: Point) -> Point {
    if let Point::Sphere { x, y, z } = p {
        let n = (x * x + y * y + z * z).sqrt();
        Point::Sphere { x: x / n, y: y / n, z: z / n }
    } else {
        p
    }
}

const ORDERINGS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Labelings `(x, y, z)` admissible for a frame: `yz` is a longest side and
/// `y` is the endpoint nearer to `x` (both orientations when they tie).
fn admissible(dist: &[[f64; 3]; 3]) -> Vec<[usize; 3]> {
    let max = dist[0][1].max(dist[0][2]).max(dist[1][2]);
    let tie = |u: f64, v: f64| (u - v).abs() <= TIE_TOL * max.max(f64::MIN_POSITIVE);
    ORDERINGS
        .iter()
        .copied()
        .filter(|&[x, y, z]| {
            let (a, b, c) = (dist[x][y], dist[x][z], dist[y][z]);
            tie(c, max) && (a < b || tie(a, b))
        })
        .collect()
}

/// Frames the triangle `x, y, z` in `space`.
///
/// Labels are changed so that `yz` is the longest side and `a ≤ b`; when
/// several labelings qualify the one with the smallest `d` wins, earlier
/// labelings (starting with the input order) breaking exact ties.
pub fn frame_triangle(x: Point, y: Point, z: Point, space: ModelSpace) -> Result<TriangleFrame, MetricError> {
    for p in [&x, &y, &z] {
        belongs(p, space)?;
    }
    let pts = [normalize_sphere(x), normalize_sphere(y), normalize_sphere(z)];
    let mut dist = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            dist[i][j] = point_distance(&pts[i], &pts[j]);
        }
    }
    if dist[0][1] == 0.0 && dist[0][2] == 0.0 && dist[1][2] == 0.0 {
        return Err(MetricError::ZeroTriangle);
    }
    let mut best: Option<TriangleFrame> = None;
    let mut last_err = None;
    for [ix, iy, iz] in admissible(&dist) {
        let a = dist[ix][iy];
        let w = match along(&pts[iy], &pts[iz], a) {
            Ok(w) => w,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let d = point_distance(&w, &pts[ix]);
        let mut frame = TriangleFrame::from_distances(space.tag(), a, dist[ix][iz], dist[iy][iz], d);
        frame.points = Some(FramePoints { x: pts[ix], y: pts[iy], z: pts[iz], w });
        if best.as_ref().map_or(true, |b| d < b.d) {
            best = Some(frame);
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(MetricError::ZeroTriangle))
}

/// Comparison distance in the plane for sides `a, b ≤ c`.
pub fn euclid_d(a: f64, b: f64, c: f64) -> Result<f64, MetricError> {
    check_sides(a, b, c)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    let v = a * (a + b - c) * (c + b - a) / c;
    Ok(v.max(0.0).sqrt())
}

/// Comparison distance in the hyperbolic plane from the side lengths alone.
///
/// Uses `sinh²(d/2) = sinh a · sinh((b+c−a)/2) · sinh((a+b−c)/2) / sinh c`,
/// which stays accurate for long sides.
pub fn hyp_d(a: f64, b: f64, c: f64) -> Result<f64, MetricError> {
    check_sides(a, b, c)?;
    Ok(hyp_d_unchecked(a, b, c))
}

pub(crate) fn hyp_d_unchecked(a: f64, b: f64, c: f64) -> f64 {
    let s = 0.5 * (a + b - c);
    let s2 = 0.5 * (b + c - a);
    if a <= 0.0 || s <= 0.0 || s2 <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let l = ln_sinh(a) + ln_sinh(s2) + ln_sinh(s) - ln_sinh(c);
    2.0 * crate::numeric::asinh_exp(0.5 * l)
}

fn check_sides(a: f64, b: f64, c: f64) -> Result<(), MetricError> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let tol = TIE_TOL * c.abs().max(1.0);
    if a < 0.0 || b < 0.0 || a > c + tol || b > c + tol || a + b < c - tol {
        return Err(MetricError::TriangleInequality(a, b, c));
    }
    Ok(())
}

/// Frame of the tripod whose legs to `y`, `x`, `z` have lengths `r`, `s`, `t`.
///
/// The labels are changed if needed so that `s` is the shortest leg, making
/// `c = r + t` the longest side. A zero leg is allowed.
pub fn tripod_frame(r: &Rational, s: &Rational, t: &Rational) -> Result<TriangleFrame, MetricError> {
    if r.is_negative() || s.is_negative() || t.is_negative() {
        return Err(MetricError::NegativeLeg);
    }
    if r.is_zero() && s.is_zero() && t.is_zero() {
        return Err(MetricError::ZeroTriangle);
    }
    let (r, s, t) = if s <= r && s <= t {
        (r.clone(), s.clone(), t.clone())
    } else if r <= t {
        (s.clone(), r.clone(), t.clone())
    } else {
        (r.clone(), t.clone(), s.clone())
    };
    let a = &r + &s;
    let b = &s + &t;
    let c = &r + &t;
    let d: BigRational = &s + &s;
    let af = ratio_to_f64(&a);
    let (rho, degenerate) = if a.is_zero() {
        (0.0, true)
    } else {
        (ratio_to_f64(&((&a + &b - &c) / &a)), false)
    };
    let leg = |leg: u8, v: &Rational| Point::Tripod { leg, r: ratio_to_f64(v) };
    let points = FramePoints { x: leg(0, &s), y: leg(1, &r), z: leg(2, &t), w: leg(2, &s) };
    Ok(TriangleFrame {
        a: af,
        b: ratio_to_f64(&b),
        c: ratio_to_f64(&c),
        d: ratio_to_f64(&d),
        rho,
        space: ModelSpace::Tripod.tag().to_string(),
        degenerate,
        points: Some(points),
        exact: Some(ExactSides { a, b, c, d }),
    })
}

/// The frame certifying that the round sphere fails every bounding function.
///
/// `y` and `z` are the poles, the chosen geodesic between them passes through
/// `(1, 0, 0)` and `x` sits at colatitude `θ` on the opposite meridian.
pub fn sphere_counterexample(theta: f64) -> Result<TriangleFrame, MetricError> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(MetricError::ThetaOutOfRange(theta));
    }
    let (s, c) = theta.sin_cos();
    let y = Point::Sphere { x: 0.0, y: 0.0, z: 1.0 };
    let z = Point::Sphere { x: 0.0, y: 0.0, z: -1.0 };
    let x = Point::Sphere { x: -s, y: 0.0, z: c };
    let w = Point::Sphere { x: s, y: 0.0, z: c };
    let d = point_distance(&x, &w);
    let pi = std::f64::consts::PI;
    Ok(TriangleFrame {
        a: theta,
        b: pi - theta,
        c: pi,
        d,
        // c = a + b by construction, so the defect vanishes identically.
        rho: 0.0,
        space: ModelSpace::Sphere.tag().to_string(),
        degenerate: false,
        points: Some(FramePoints { x, y, z, w }),
        exact: None,
    })
}

/// Relabels three side lengths `[d(p0,p1), d(p0,p2), d(p1,p2)]` and frames them
/// with a closed-form comparison distance.
pub fn frame_from_sides(
    space: &str,
    sides: [f64; 3],
    comparison: impl Fn(f64, f64, f64) -> f64,
) -> Result<TriangleFrame, MetricError> {
    if sides.iter().any(|s| !s.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let mut dist = [[0.0; 3]; 3];
    dist[0][1] = sides[0];
    dist[1][0] = sides[0];
    dist[0][2] = sides[1];
    dist[2][0] = sides[1];
    dist[1][2] = sides[2];
    dist[2][1] = sides[2];
    if sides.iter().all(|&s| s == 0.0) {
        return Err(MetricError::ZeroTriangle);
    }
    let mut best: Option<TriangleFrame> = None;
    for [ix, iy, iz] in admissible(&dist) {
        let (a, b, c) = (dist[ix][iy], dist[ix][iz], dist[iy][iz]);
        let d = comparison(a, b, c);
        if best.as_ref().map_or(true, |f| d < f.d) {
            best = Some(TriangleFrame::from_distances(space, a, b, c, d));
        }
    }
    best.ok_or(MetricError::ZeroTriangle)
}

/// Distance between two points of the hyperbolic plane given in polar
/// coordinates `(r, θ)` about a common center.
pub fn hyp_polar_distance(r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    let dr = 0.5 * (r1 - r2);
    let sd = (0.5 * (t1 - t2)).sin();
    // sinh²(d/2) = sinh²(Δr/2) + sinh r1 sinh r2 sin²(Δθ/2), evaluated in logs.
    let first = dr.sinh().powi(2);
    if r1 == 0.0 || r2 == 0.0 || sd == 0.0 {
        return 2.0 * first.sqrt().asinh();
    }
    let l2 = ln_sinh(r1) + ln_sinh(r2) + 2.0 * sd.abs().ln();
    if l2 > 600.0 {
        let l = 0.5 * (l2 + (first * (-l2).exp()).ln_1p());
        return 2.0 * crate::numeric::asinh_exp(l);
    }
    2.0 * (first + l2.exp()).sqrt().asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64) -> Rational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn euclidean_example() {
        let f = frame_triangle(Point::plane(1.8, 2.4), Point::plane(0.0, 0.0), Point::plane(5.0, 0.0), ModelSpace::Euclidean)
            .unwrap();
        assert!((f.a - 3.0).abs() < 1e-12 && (f.b - 4.0).abs() < 1e-12 && (f.c - 5.0).abs() < 1e-12);
        assert!((f.d - 7.2f64.sqrt()).abs() < 1e-12);
        match f.points.unwrap().w {
            Point::Plane { x, y } => assert!((x - 3.0).abs() < 1e-12 && y.abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn point_on_geodesic() {
        let f = frame_triangle(Point::plane(2.0, 0.0), Point::plane(0.0, 0.0), Point::plane(5.0, 0.0), ModelSpace::Euclidean)
            .unwrap();
        assert_eq!((f.a, f.b, f.c), (2.0, 3.0, 5.0));
        assert_eq!(f.rho, 0.0);
        assert!(f.d.abs() < 1e-15);
    }

    #[test]
    fn relabels_when_longest_side_moves() {
        // The input's yz is not the longest side; the frame must still be (3,4,5).
        let f = frame_triangle(Point::plane(0.0, 0.0), Point::plane(1.8, 2.4), Point::plane(5.0, 0.0), ModelSpace::Euclidean)
            .unwrap();
        assert!((f.c - 5.0).abs() < 1e-12 && (f.a - 3.0).abs() < 1e-12);
        assert!((f.d - 7.2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_and_coincident() {
        let p = Point::plane(1.0, 1.0);
        assert_eq!(frame_triangle(p, p, p, ModelSpace::Euclidean), Err(MetricError::ZeroTriangle));
        let f = frame_triangle(p, p, Point::plane(3.0, 1.0), ModelSpace::Euclidean).unwrap();
        assert_eq!(f.d, 0.0);
        assert!(frame_triangle(Point::plane(f64::NAN, 0.0), p, p, ModelSpace::Euclidean).is_err());
        assert!(frame_triangle(p, p, p, ModelSpace::Sphere).is_err());
    }

    #[test]
    fn tripod_examples() {
        let f = tripod_frame(&q(3), &q(1), &q(2)).unwrap();
        let e = f.exact.unwrap();
        assert_eq!((e.a, e.b, e.c, e.d), (q(4), q(3), q(5), q(2)));
        let f = tripod_frame(&q(5), &q(2), &q(7)).unwrap();
        let e = f.exact.clone().unwrap();
        assert_eq!((e.a.clone(), e.b, e.c, e.d.clone()), (q(7), q(9), q(12), q(4)));
        assert_eq!(e.d / e.a, BigRational::new(4.into(), 7.into()));
        assert!((f.rho - 4.0 / 7.0).abs() < 1e-15);
        let f = tripod_frame(&q(1), &q(0), &q(1)).unwrap();
        assert_eq!(f.d, 0.0);
        assert_eq!(f.rho, 0.0);
        assert_eq!(tripod_frame(&q(-1), &q(1), &q(1)), Err(MetricError::NegativeLeg));
        assert_eq!(tripod_frame(&q(0), &q(0), &q(0)), Err(MetricError::ZeroTriangle));
        // Non-minimal middle leg gets relabeled.
        let f = tripod_frame(&q(1), &q(3), &q(2)).unwrap();
        assert_eq!(f.exact.unwrap().c, q(5));
    }

    #[test]
    fn tripod_points_agree_with_frame_triangle() {
        let f = frame_triangle(
            Point::Tripod { leg: 0, r: 1.0 },
            Point::Tripod { leg: 1, r: 3.0 },
            Point::Tripod { leg: 2, r: 2.0 },
            ModelSpace::Tripod,
        )
        .unwrap();
        let mut sides = [f.a, f.b, f.c];
        sides.sort_by(f64::total_cmp);
        assert_eq!(sides, [3.0, 4.0, 5.0]);
        assert_eq!(f.d, 2.0);
    }

    #[test]
    fn euclid_d_examples() {
        assert!((euclid_d(3.0, 4.0, 5.0).unwrap() - 7.2f64.sqrt()).abs() < 1e-15);
        assert_eq!(euclid_d(2.0, 3.0, 5.0).unwrap(), 0.0);
        assert!((euclid_d(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(euclid_d(1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn sphere_examples() {
        use std::f64::consts::PI;
        let f = sphere_counterexample(PI / 4.0).unwrap();
        assert!((f.d - PI / 2.0).abs() < 1e-12 && f.rho == 0.0);
        let f = sphere_counterexample(PI / 2.0).unwrap();
        assert!((f.d - PI).abs() < 1e-12);
        let f = sphere_counterexample(1e-6).unwrap();
        assert!((f.d / f.a - 2.0).abs() < 1e-9);
        assert!(sphere_counterexample(0.0).is_err());
        assert!(sphere_counterexample(2.0).is_err());
    }

    #[test]
    fn hyperbolic_closed_form_matches_construction() {
        let pts = [Complex64::new(0.3, 1.2), Complex64::new(-2.0, 0.4), Complex64::new(4.0, 3.0)];
        let f = frame_triangle(
            Point::half_plane(pts[0]),
            Point::half_plane(pts[1]),
            Point::half_plane(pts[2]),
            ModelSpace::Hyperbolic,
        )
        .unwrap();
        let d = hyp_d(f.a, f.b, f.c).unwrap();
        assert!((d - f.d).abs() < 1e-10, "{d} vs {}", f.d);
    }

    #[test]
    fn polar_distance_matches_points() {
        let (r1, t1, r2, t2): (f64, f64, f64, f64) = (1.3, 0.4, 2.1, -1.7);
        let p1 = hyperbolic::point_along(Complex64::i(), Toward::Boundary(crate::hyperbolic::Boundary::Finite(f64::tan(t1))), r1);
        let p2 = hyperbolic::point_along(Complex64::i(), Toward::Boundary(crate::hyperbolic::Boundary::Finite(f64::tan(t2))), r2);
        // Directions toward tan θ at i have visual angle 2θ + const; compare with that angle.
        let d = hyperbolic::distance_unchecked(p1, p2);
        let dp = hyp_polar_distance(r1, 2.0 * t1, r2, 2.0 * t2);
        assert!((d - dp).abs() < 1e-12, "{d} vs {dp}");
    }
}
