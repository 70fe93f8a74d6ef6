//! Translation and half-translation surfaces presented as Euclidean polygons
//! with edge gluings.
//!
//! Polygons are listed counterclockwise; edge `e` of a polygon runs from
//! vertex `e` to vertex `e + 1`. A translation gluing identifies two edges
//! whose vectors are opposite, a semi-translation gluing (`z ↦ −z + c`) two
//! edges whose vectors are equal. Every vertex class is treated as a marked
//! point, so saddle connections run between any two vertices.

mod curves;
mod decompose;
mod mesh;
mod saddle;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numeric::{format_rational, ratio_to_f64, serde_rational::value_to_rational, Rational};

pub use curves::{
    check_thick_intersection_bound, intersection_number, slope_intersection_bound, torus_curve, unsigned_holonomy,
    CurvePoint, FlatCurve, Segment, SlopeBoundReport, Sojourn, ThickBoundReport,
};
pub use decompose::{
    enumerate_cylinders, first_return, vertical_decomposition, Cylinder, Decomposition, MinimalComponent, Part,
    SectionHandle,
};
pub use mesh::Mesh;
pub use saddle::{
    enumerate_saddle_connections, shortest_saddle_connection, unfold_saddle_connections, SaddleConnection,
};

/// Relative tolerance for floating-point geometry.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("gluing incomplete: {0}")]
    GluingIncomplete(String),
    #[error("edge length mismatch between ({0}, {1}) and ({2}, {3})")]
    EdgeLengthMismatch(usize, usize, usize, usize),
    #[error("direction mismatch between ({0}, {1}) and ({2}, {3})")]
    DirectionMismatch(usize, usize, usize, usize),
    #[error("invalid cone angle {0}π at vertex class {1}")]
    InvalidConeAngle(f64, usize),
    #[error("invalid polygon {0}: {1}")]
    InvalidPolygon(usize, String),
    #[error("invalid marked point ({0}, {1})")]
    InvalidMarkedPoint(usize, usize),
    #[error("Gauss-Bonnet check failed: Σ(θ/π − 2) = {0}, genus {1}")]
    GaussBonnet(f64, i64),
    #[error("L must be positive")]
    NonPositiveLength,
    #[error("malformed surface file: {0}")]
    Format(String),
    #[error("curves live on different surfaces")]
    DifferentSurfaces,
    #[error("not in thick part: systole {0} < {1}")]
    NotThick(f64, f64),
    #[error("slope below M: {0} < {1}")]
    SlopeBelowM(f64, f64),
    #[error("H must be positive")]
    NonPositiveH,
    #[error("section meets a singularity or leaves the surface: {0}")]
    BadSection(String),
    #[error("section lies in a cylinder: use cylinder data directly")]
    InCylinder,
    #[error("requires a translation surface")]
    NotTranslation,
    #[error("curve does not close up")]
    NotClosed,
    #[error("curve runs into a vertex")]
    HitsVertex,
    #[error("point is not inside polygon {0}")]
    PointOutside(usize),
    #[error(transparent)]
    Iet(#[from] crate::iet::IetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GluingKind {
    Translation,
    Semi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gluing {
    pub p: usize,
    pub e: usize,
    pub q: usize,
    pub f: usize,
    pub kind: GluingKind,
}

/// Displacement `(h, v)` of a straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Holonomy {
    pub h: f64,
    pub v: f64,
}

impl Holonomy {
    pub fn new(h: f64, v: f64) -> Holonomy {
        Holonomy { h, v }
    }

    pub fn length(&self) -> f64 {
        self.h.hypot(self.v)
    }

    /// `(eᵗh, e⁻ᵗv)`.
    pub fn flow(&self, t: f64) -> Holonomy {
        Holonomy { h: t.exp() * self.h, v: (-t).exp() * self.v }
    }

    /// Sign fixed so the first nonzero coordinate is positive.
    pub fn canonical(&self) -> Holonomy {
        if self.h < 0.0 || (self.h == 0.0 && self.v < 0.0) {
            Holonomy { h: -self.h, v: -self.v }
        } else {
            *self
        }
    }
}

/// A point class formed by glued polygon corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub id: usize,
    /// Cone angle divided by `π`.
    pub cone_angle_over_pi: f64,
    pub corners: Vec<(usize, usize)>,
    pub marked: bool,
}

impl Singularity {
    pub fn cone_angle(&self) -> f64 {
        self.cone_angle_over_pi * std::f64::consts::PI
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatSurface {
    polygons: Vec<Vec<[f64; 2]>>,
    exact: Option<Vec<Vec<[Rational; 2]>>>,
    gluings: Vec<Gluing>,
    marked: Vec<(usize, usize)>,
    partner: Vec<Vec<(usize, usize, GluingKind)>>,
    vertex_class: Vec<Vec<usize>>,
    singularities: Vec<Singularity>,
    genus: i64,
    area: f64,
}

/// Polygon vertices either as floats or exact rationals.
#[derive(Debug, Clone)]
pub enum Coordinates {
    Float(Vec<Vec<[f64; 2]>>),
    Exact(Vec<Vec<[Rational; 2]>>),
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn interior_angle(prev: [f64; 2], cur: [f64; 2], next: [f64; 2]) -> f64 {
    let u = sub(next, cur);
    let w = sub(prev, cur);
    let a = cross(u, w).atan2(u[0] * w[0] + u[1] * w[1]);
    if a <= 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], tol: f64) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
}

/// Builds and validates a surface.
pub fn build_surface(
    coords: Coordinates,
    gluings: Vec<Gluing>,
    marked: Vec<(usize, usize)>,
) -> Result<FlatSurface, SurfaceError> {
    let (polygons, exact) = match coords {
        Coordinates::Float(p) => (p, None),
        Coordinates::Exact(e) => {
            let p = e.iter().map(|poly| poly.iter().map(|[x, y]| [ratio_to_f64(x), ratio_to_f64(y)]).collect()).collect();
            (p, Some(e))
        }
    };
    validate_polygons(&polygons)?;
    let scale = polygons.iter().flatten().fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
    let tol = GEOM_TOL * scale;
    let mut partner: Vec<Vec<Option<(usize, usize, GluingKind)>>> = polygons.iter().map(|p| vec![None; p.len()]).collect();
    for g in &gluings {
        for (p, e) in [(g.p, g.e), (g.q, g.f)] {
            if p >= polygons.len() || e >= polygons[p].len() {
                return Err(SurfaceError::GluingIncomplete(format!("edge ({p}, {e}) does not exist")));
            }
        }
        if (g.p, g.e) == (g.q, g.f) {
            return Err(SurfaceError::GluingIncomplete(format!("edge ({}, {}) glued to itself", g.p, g.e)));
        }
        for (p, e, q, f) in [(g.p, g.e, g.q, g.f), (g.q, g.f, g.p, g.e)] {
            if partner[p][e].is_some() {
                return Err(SurfaceError::GluingIncomplete(format!("edge ({p}, {e}) glued twice")));
            }
            partner[p][e] = Some((q, f, g.kind));
        }
        let wp = edge_vector(&polygons, g.p, g.e);
        let wq = edge_vector(&polygons, g.q, g.f);
        let (lp, lq) = (wp[0].hypot(wp[1]), wq[0].hypot(wq[1]));
        let exact_len = exact.as_ref().map(|ex| {
            let a = exact_edge(ex, g.p, g.e);
            let b = exact_edge(ex, g.q, g.f);
            (&a[0] * &a[0] + &a[1] * &a[1], &b[0] * &b[0] + &b[1] * &b[1], a, b)
        });
        let length_ok = match &exact_len {
            Some((a2, b2, _, _)) => a2 == b2,
            None => (lp - lq).abs() <= tol,
        };
        if !length_ok {
            return Err(SurfaceError::EdgeLengthMismatch(g.p, g.e, g.q, g.f));
        }
        let sign = if g.kind == GluingKind::Translation { -1.0 } else { 1.0 };
        let dir_ok = match &exact_len {
            Some((_, _, a, b)) => {
                if g.kind == GluingKind::Translation {
                    a[0] == -b[0].clone() && a[1] == -b[1].clone()
                } else {
                    a == b
                }
            }
            None => (wp[0] - sign * wq[0]).abs() <= tol && (wp[1] - sign * wq[1]).abs() <= tol,
        };
        if !dir_ok {
            return Err(SurfaceError::DirectionMismatch(g.p, g.e, g.q, g.f));
        }
    }
    let mut full = Vec::with_capacity(polygons.len());
    for (p, row) in partner.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (e, x) in row.iter().enumerate() {
            r.push(x.ok_or_else(|| SurfaceError::GluingIncomplete(format!("edge ({p}, {e}) is not glued")))?);
        }
        full.push(r);
    }
    let partner = full;

    // Corner cycles: after corner (p, i) comes (q, f) where edge i − 1 of p is
    // glued to edge f of q.
    let mut vertex_class: Vec<Vec<usize>> = polygons.iter().map(|p| vec![usize::MAX; p.len()]).collect();
    let mut singularities = Vec::new();
    for p in 0..polygons.len() {
        for i in 0..polygons[p].len() {
            if vertex_class[p][i] != usize::MAX {
                continue;
            }
            let id = singularities.len();
            let mut corners = Vec::new();
            let mut angle = 0.0;
            let (mut cp, mut ci) = (p, i);
            loop {
                vertex_class[cp][ci] = id;
                corners.push((cp, ci));
                let n = polygons[cp].len();
                angle += interior_angle(polygons[cp][(ci + n - 1) % n], polygons[cp][ci], polygons[cp][(ci + 1) % n]);
                let (q, f, _) = partner[cp][(ci + n - 1) % n];
                if (q, f) == (p, i) {
                    break;
                }
                if vertex_class[q][f] != usize::MAX {
                    return Err(SurfaceError::GluingIncomplete(format!("corner cycle at ({p}, {i}) does not close")));
                }
                cp = q;
                ci = f;
            }
            let over_pi = angle / std::f64::consts::PI;
            let k = over_pi.round();
            if k < 1.0 || (over_pi - k).abs() > 1e-7 {
                return Err(SurfaceError::InvalidConeAngle(over_pi, id));
            }
            singularities.push(Singularity { id, cone_angle_over_pi: k, corners, marked: true });
        }
    }
    for &(p, v) in &marked {
        if p >= polygons.len() || v >= polygons[p].len() {
            return Err(SurfaceError::InvalidMarkedPoint(p, v));
        }
    }
    let edges: usize = polygons.iter().map(|p| p.len()).sum::<usize>() / 2;
    let chi = singularities.len() as i64 - edges as i64 + polygons.len() as i64;
    let genus = (2 - chi) / 2;
    let gb: f64 = singularities.iter().map(|s| s.cone_angle_over_pi - 2.0).sum();
    if (gb - (4 * genus - 4) as f64).abs() > 1e-6 || (2 - chi) % 2 != 0 {
        return Err(SurfaceError::GaussBonnet(gb, genus));
    }
    let area = polygons.iter().map(|p| polygon_area(p)).sum();
    Ok(FlatSurface { polygons, exact, gluings, marked, partner, vertex_class, singularities, genus, area })
}

fn validate_polygons(polygons: &[Vec<[f64; 2]>]) -> Result<(), SurfaceError> {
    if polygons.is_empty() {
        return Err(SurfaceError::InvalidPolygon(0, "no polygons".into()));
    }
    for (k, p) in polygons.iter().enumerate() {
        if p.len() < 3 {
            return Err(SurfaceError::InvalidPolygon(k, "fewer than three vertices".into()));
        }
        if p.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(SurfaceError::InvalidPolygon(k, "non-finite coordinate".into()));
        }
        if polygon_area(p) <= 0.0 {
            return Err(SurfaceError::InvalidPolygon(k, "not counterclockwise".into()));
        }
        let n = p.len();
        let scale = p.iter().fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
        for i in 0..n {
            if p[i] == p[(i + 1) % n] {
                return Err(SurfaceError::InvalidPolygon(k, "repeated vertex".into()));
            }
            for j in i + 2..n {
                if (j + 1) % n == i {
                    continue;
                }
                if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n], 1e-12 * scale * scale) {
                    return Err(SurfaceError::InvalidPolygon(k, "not simple".into()));
                }
            }
        }
    }
    Ok(())
}

pub(crate) fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| cross(p[i], p[(i + 1) % n])).sum::<f64>()
}

fn edge_vector(polygons: &[Vec<[f64; 2]>], p: usize, e: usize) -> [f64; 2] {
    let n = polygons[p].len();
    sub(polygons[p][(e + 1) % n], polygons[p][e])
}

fn exact_edge(ex: &[Vec<[Rational; 2]>], p: usize, e: usize) -> [Rational; 2] {
    let n = ex[p].len();
    let a = &ex[p][e];
    let b = &ex[p][(e + 1) % n];
    [&b[0] - &a[0], &b[1] - &a[1]]
}

impl FlatSurface {
    pub fn polygons(&self) -> &[Vec<[f64; 2]>] {
        &self.polygons
    }

    pub fn exact_polygons(&self) -> Option<&[Vec<[Rational; 2]>]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn marked(&self) -> &[(usize, usize)] {
        &self.marked
    }

    /// The edge glued to edge `e` of polygon `p`.
    pub fn partner(&self, p: usize, e: usize) -> (usize, usize, GluingKind) {
        self.partner[p][e]
    }

    pub fn vertex_class(&self, p: usize, v: usize) -> usize {
        self.vertex_class[p][v]
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    /// Vertex classes with cone angle other than `2π`.
    pub fn cone_points(&self) -> impl Iterator<Item = &Singularity> {
        self.singularities.iter().filter(|s| s.cone_angle_over_pi != 2.0)
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn is_translation(&self) -> bool {
        self.gluings.iter().all(|g| g.kind == GluingKind::Translation)
    }

    /// Scale of the coordinates, used for tolerances.
    pub fn scale(&self) -> f64 {
        self.polygons.iter().flatten().fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()))
    }

    /// `Σ (θ/π − 2)`, equal to `4g − 4`.
    pub fn gauss_bonnet_sum(&self) -> f64 {
        self.singularities.iter().map(|s| s.cone_angle_over_pi - 2.0).sum()
    }

    /// Applies `(x, y) ↦ (ax + by, cx + dy)` to every polygon. The matrix must
    /// have positive determinant.
    pub fn apply_linear(&self, m: [[f64; 2]; 2]) -> FlatSurface {
        let polygons = self
            .polygons
            .iter()
            .map(|p| p.iter().map(|v| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]).collect())
            .collect();
        build_surface(Coordinates::Float(polygons), self.gluings.clone(), self.marked.clone())
            .expect("linear images of valid surfaces are valid")
    }

    /// Exact variant of [`FlatSurface::apply_linear`] for rational surfaces.
    pub fn apply_linear_exact(&self, m: [[Rational; 2]; 2]) -> Option<FlatSurface> {
        let ex = self.exact.as_ref()?;
        let polygons = ex
            .iter()
            .map(|p| {
                p.iter()
                    .map(|v| [&m[0][0] * &v[0] + &m[0][1] * &v[1], &m[1][0] * &v[0] + &m[1][1] * &v[1]])
                    .collect()
            })
            .collect();
        build_surface(Coordinates::Exact(polygons), self.gluings.clone(), self.marked.clone()).ok()
    }

    /// Polygon containing `z`, preferring the first match.
    pub fn locate(&self, z: [f64; 2]) -> Option<usize> {
        (0..self.polygons.len()).find(|&p| point_in_polygon(&self.polygons[p], z))
    }

    /// Orientation double cover of a half-translation surface: polygon `p`
    /// has copies `p` and `p + n`, the second rotated by `π`.
    pub fn double_cover(&self) -> FlatSurface {
        let n = self.polygons.len();
        let gl = |g: &Gluing| -> [Gluing; 2] {
            match g.kind {
                GluingKind::Translation => [
                    Gluing { p: g.p, e: g.e, q: g.q, f: g.f, kind: GluingKind::Translation },
                    Gluing { p: g.p + n, e: g.e, q: g.q + n, f: g.f, kind: GluingKind::Translation },
                ],
                GluingKind::Semi => [
                    Gluing { p: g.p, e: g.e, q: g.q + n, f: g.f, kind: GluingKind::Translation },
                    Gluing { p: g.p + n, e: g.e, q: g.q, f: g.f, kind: GluingKind::Translation },
                ],
            }
        };
        let gluings = self.gluings.iter().flat_map(gl).collect();
        let coords = match &self.exact {
            Some(ex) => {
                let mut v = ex.clone();
                v.extend(ex.iter().map(|p| p.iter().map(|[x, y]| [-x.clone(), -y.clone()]).collect()));
                Coordinates::Exact(v)
            }
            None => {
                let mut v = self.polygons.clone();
                v.extend(self.polygons.iter().map(|p| p.iter().map(|[x, y]| [-x, -y]).collect()));
                Coordinates::Float(v)
            }
        };
        build_surface(coords, gluings, Vec::new()).expect("the double cover of a valid surface is valid")
    }
}

pub(crate) fn point_in_polygon(p: &[[f64; 2]], z: [f64; 2]) -> bool {
    let n = p.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        if (a[1] > z[1]) != (b[1] > z[1]) {
            let x = a[0] + (z[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if z[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// `g_t`: stretches horizontally by `eᵗ`, contracts vertically by `e⁻ᵗ`.
pub fn apply_flow(surface: &FlatSurface, t: f64) -> FlatSurface {
    surface.apply_linear([[t.exp(), 0.0], [0.0, (-t).exp()]])
}

/// The surface file: `{polygons, gluings, marked}` with coordinates given as
/// numbers or `"n/d"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub polygons: Vec<Vec<[Value; 2]>>,
    pub gluings: Vec<(usize, usize, usize, usize, GluingKind)>,
    #[serde(default)]
    pub marked: Vec<(usize, usize)>,
}

impl SurfaceFile {
    pub fn build(&self) -> Result<FlatSurface, SurfaceError> {
        let gluings = self.gluings.iter().map(|&(p, e, q, f, kind)| Gluing { p, e, q, f, kind }).collect();
        let exact: Option<Vec<Vec<[Rational; 2]>>> = self
            .polygons
            .iter()
            .map(|p| p.iter().map(|[x, y]| Some([value_to_rational(x)?, value_to_rational(y)?])).collect())
            .collect();
        let coords = match exact {
            Some(e) => Coordinates::Exact(e),
            None => Coordinates::Float(
                self.polygons
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|[x, y]| {
                                let f = |v: &Value| {
                                    v.as_f64().ok_or_else(|| SurfaceError::Format(format!("bad coordinate {v}")))
                                };
                                Ok([f(x)?, f(y)?])
                            })
                            .collect::<Result<Vec<_>, SurfaceError>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        build_surface(coords, gluings, self.marked.clone())
    }

    pub fn from_surface(s: &FlatSurface) -> SurfaceFile {
        let polygons = match &s.exact {
            Some(ex) => ex
                .iter()
                .map(|p| p.iter().map(|[x, y]| [rational_value(x), rational_value(y)]).collect())
                .collect(),
            None => s.polygons.iter().map(|p| p.iter().map(|[x, y]| [Value::from(*x), Value::from(*y)]).collect()).collect(),
        };
        SurfaceFile {
            polygons,
            gluings: s.gluings.iter().map(|g| (g.p, g.e, g.q, g.f, g.kind)).collect(),
            marked: s.marked.clone(),
        }
    }
}

fn rational_value(r: &Rational) -> Value {
    if r.is_integer() {
        if let Ok(i) = i64::try_from(r.numer().clone()) {
            return Value::from(i);
        }
    }
    Value::from(format_rational(r))
}

pub fn parse_surface(json: &str) -> Result<FlatSurface, SurfaceError> {
    let f: SurfaceFile = serde_json::from_str(json).map_err(|e| SurfaceError::Format(e.to_string()))?;
    f.build()
}

fn q(n: i64) -> Rational {
    BigRational::from_integer(n.into())
}

/// Unit square with opposite sides glued and its corner marked.
pub fn square_torus() -> FlatSurface {
    let sq = vec![[q(0), q(0)], [q(1), q(0)], [q(1), q(1)], [q(0), q(1)]];
    build_surface(
        Coordinates::Exact(vec![sq]),
        vec![
            Gluing { p: 0, e: 0, q: 0, f: 2, kind: GluingKind::Translation },
            Gluing { p: 0, e: 1, q: 0, f: 3, kind: GluingKind::Translation },
        ],
        vec![(0, 0)],
    )
    .expect("square torus")
}

/// Torus from the parallelogram spanned by `u` and `w`.
pub fn parallelogram_torus(u: [f64; 2], w: [f64; 2]) -> Result<FlatSurface, SurfaceError> {
    let poly = vec![[0.0, 0.0], u, [u[0] + w[0], u[1] + w[1]], w];
    build_surface(
        Coordinates::Float(vec![poly]),
        vec![
            Gluing { p: 0, e: 0, q: 0, f: 2, kind: GluingKind::Translation },
            Gluing { p: 0, e: 1, q: 0, f: 3, kind: GluingKind::Translation },
        ],
        vec![(0, 0)],
    )
}

/// The square torus sheared so that vertical lines wind with golden slope.
pub fn golden_torus() -> FlatSurface {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    parallelogram_torus([1.0, 0.0], [g, 1.0]).expect("golden torus")
}

/// Three unit squares in an L, glued by translations: genus two with one
/// cone point of angle `6π`.
pub fn l_shape() -> FlatSurface {
    let pts = [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2), (0, 1)];
    let poly = pts.iter().map(|&(x, y)| [q(x), q(y)]).collect();
    let t = GluingKind::Translation;
    build_surface(
        Coordinates::Exact(vec![poly]),
        vec![
            Gluing { p: 0, e: 0, q: 0, f: 5, kind: t },
            Gluing { p: 0, e: 1, q: 0, f: 3, kind: t },
            Gluing { p: 0, e: 2, q: 0, f: 7, kind: t },
            Gluing { p: 0, e: 4, q: 0, f: 6, kind: t },
        ],
        Vec::new(),
    )
    .expect("L-shaped surface")
}

/// The pillowcase: a `2 × 1` rectangle rolled into a cylinder whose ends are
/// folded, giving a sphere with four cone points of angle `π`.
pub fn pillowcase() -> FlatSurface {
    let poly = vec![[q(0), q(0)], [q(1), q(0)], [q(2), q(0)], [q(2), q(1)], [q(1), q(1)], [q(0), q(1)]];
    let s = GluingKind::Semi;
    build_surface(
        Coordinates::Exact(vec![poly]),
        vec![
            Gluing { p: 0, e: 0, q: 0, f: 1, kind: s },
            Gluing { p: 0, e: 3, q: 0, f: 4, kind: s },
            Gluing { p: 0, e: 2, q: 0, f: 5, kind: GluingKind::Translation },
        ],
        Vec::new(),
    )
    .expect("pillowcase")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus_data() {
        let s = square_torus();
        assert_eq!(s.genus(), 1);
        assert_eq!(s.singularities().len(), 1);
        assert_eq!(s.singularities()[0].cone_angle_over_pi, 2.0);
        assert_eq!(s.area(), 1.0);
    }

    #[test]
    fn l_shape_data() {
        let s = l_shape();
        assert_eq!(s.genus(), 2);
        assert_eq!(s.singularities().len(), 1);
        assert_eq!(s.singularities()[0].cone_angle_over_pi, 6.0);
        assert_eq!(s.gauss_bonnet_sum(), 4.0);
        assert_eq!(s.area(), 3.0);
    }

    #[test]
    fn pillowcase_data() {
        let s = pillowcase();
        assert_eq!(s.genus(), 0);
        let mut angles: Vec<f64> = s.singularities().iter().map(|x| x.cone_angle_over_pi).collect();
        angles.sort_by(f64::total_cmp);
        assert_eq!(angles, vec![1.0, 1.0, 1.0, 1.0]);
        let cover = s.double_cover();
        assert!(cover.is_translation());
        assert_eq!(cover.genus(), 1);
    }

    #[test]
    fn validation_errors() {
        let sq = || vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let t = GluingKind::Translation;
        let r = build_surface(Coordinates::Float(vec![sq()]), vec![Gluing { p: 0, e: 0, q: 0, f: 2, kind: t }], vec![]);
        assert!(matches!(r, Err(SurfaceError::GluingIncomplete(_))));
        let r = build_surface(
            Coordinates::Float(vec![sq()]),
            vec![Gluing { p: 0, e: 0, q: 0, f: 1, kind: t }, Gluing { p: 0, e: 2, q: 0, f: 3, kind: t }],
            vec![],
        );
        assert!(matches!(r, Err(SurfaceError::DirectionMismatch(..))));
        // Semi-translation gluing of opposite sides: the vectors are opposite, not equal.
        let r = build_surface(
            Coordinates::Float(vec![sq()]),
            vec![Gluing { p: 0, e: 0, q: 0, f: 2, kind: GluingKind::Semi }, Gluing { p: 0, e: 1, q: 0, f: 3, kind: t }],
            vec![],
        );
        assert!(matches!(r, Err(SurfaceError::DirectionMismatch(..))));
        let r = build_surface(
            Coordinates::Float(vec![sq()]),
            vec![Gluing { p: 0, e: 0, q: 0, f: 0, kind: GluingKind::Semi }, Gluing { p: 0, e: 1, q: 0, f: 3, kind: t }],
            vec![],
        );
        assert!(matches!(r, Err(SurfaceError::GluingIncomplete(_))));
        let rect = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        let r = build_surface(
            Coordinates::Float(vec![rect]),
            vec![Gluing { p: 0, e: 0, q: 0, f: 1, kind: t }, Gluing { p: 0, e: 2, q: 0, f: 3, kind: t }],
            vec![],
        );
        assert!(matches!(r, Err(SurfaceError::EdgeLengthMismatch(..))));
    }

    #[test]
    fn flow_preserves_area() {
        let s = apply_flow(&square_torus(), 2f64.ln());
        assert!((s.area() - 1.0).abs() < 1e-12);
        let p = &s.polygons()[0];
        assert!((p[2][0] - 2.0).abs() < 1e-15 && (p[2][1] - 0.5).abs() < 1e-15);
        assert_eq!(Holonomy::new(1.0, 1.0).flow(2f64.ln()), Holonomy::new(2.0, 0.5));
    }

    #[test]
    fn file_round_trip() {
        let s = l_shape();
        let f = SurfaceFile::from_surface(&s);
        let json = serde_json::to_string(&f).unwrap();
        let back = parse_surface(&json).unwrap();
        assert_eq!(back, s);
        let text = r#"{"polygons": [[[0,0],["1/2",0],["1/2","1/2"],[0,"1/2"]]],
                       "gluings": [[0,0,0,2,"translation"],[0,1,0,3,"translation"]], "marked": [[0,0]]}"#;
        let s = parse_surface(text).unwrap();
        assert_eq!(s.area(), 0.25);
        assert!(s.is_exact());
    }
}
