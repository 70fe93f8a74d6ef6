//! Saddle connections by unfolding the triangulation along sectors.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::{FlatSurface, GluingKind, Holonomy, SurfaceError};
use crate::numeric::{serde_rational_opt, Rational, Scalar};

/// Relative slack when comparing a length with the cutoff.
pub const LENGTH_TOL: f64 = 1e-12;

const FRAME_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleConnection {
    #[serde(flatten)]
    pub holonomy: Holonomy,
    pub length: f64,
    /// Vertex classes at the start and the end.
    pub endpoints: [usize; 2],
    #[serde(with = "serde_rational_opt", default, skip_serializing_if = "Option::is_none")]
    pub exact_h: Option<Rational>,
    #[serde(with = "serde_rational_opt", default, skip_serializing_if = "Option::is_none")]
    pub exact_v: Option<Rational>,
}

impl SaddleConnection {
    fn from_f64(h: f64, v: f64, endpoints: [usize; 2]) -> SaddleConnection {
        SaddleConnection { holonomy: Holonomy { h, v }, length: h.hypot(v), endpoints, exact_h: None, exact_v: None }
    }

    fn from_exact(h: Rational, v: Rational, endpoints: [usize; 2]) -> SaddleConnection {
        let (hf, vf) = (Scalar::to_f64(&h), Scalar::to_f64(&v));
        SaddleConnection {
            holonomy: Holonomy { h: hf, v: vf },
            length: hf.hypot(vf),
            endpoints,
            exact_h: Some(h),
            exact_v: Some(v),
        }
    }

    pub fn start(&self) -> usize {
        self.endpoints[0]
    }

    pub fn end(&self) -> usize {
        self.endpoints[1]
    }
}

fn within<S: Scalar>(h: &S, v: &S, l: f64) -> bool {
    let len2 = (h.clone() * h.clone() + v.clone() * v.clone()).to_f64();
    let cut = l * (1.0 + LENGTH_TOL);
    len2 <= cut * cut
}

/// Parallelogram with opposite sides glued by translations.
fn torus_sides(surface: &FlatSurface) -> Option<()> {
    if surface.polygons().len() != 1 || surface.polygons()[0].len() != 4 {
        return None;
    }
    for e in 0..4 {
        let (q, f, kind) = surface.partner(0, e);
        if q != 0 || f != (e + 2) % 4 || kind != GluingKind::Translation {
            return None;
        }
    }
    Some(())
}

fn torus_lattice<S: Scalar>(u: [S; 2], w: [S; 2], l: f64) -> Vec<(S, S)> {
    let uf = [u[0].to_f64(), u[1].to_f64()];
    let wf = [w[0].to_f64(), w[1].to_f64()];
    let det = (uf[0] * wf[1] - uf[1] * wf[0]).abs();
    let mmax = (l * wf[0].hypot(wf[1]) / det).floor() as i64 + 1;
    let nmax = (l * uf[0].hypot(uf[1]) / det).floor() as i64 + 1;
    let mut out = Vec::new();
    for m in -mmax..=mmax {
        for n in -nmax..=nmax {
            if m.gcd(&n) != 1 {
                continue;
            }
            let (ms, ns) = (S::from_int(m), S::from_int(n));
            let h = ms.clone() * u[0].clone() + ns.clone() * w[0].clone();
            let v = ms * u[1].clone() + ns * w[1].clone();
            if within(&h, &v, l) {
                out.push((h, v));
            }
        }
    }
    out
}

struct Frame<S> {
    tri: usize,
    edge: usize,
    flip: bool,
    shift: [S; 2],
    right: [S; 2],
    left: [S; 2],
}

fn orient<S: Scalar>(p: &[S; 2], a: &[S; 2], b: &[S; 2], tol: f64) -> i8 {
    let ax = a[0].clone() - p[0].clone();
    let ay = a[1].clone() - p[1].clone();
    let bx = b[0].clone() - p[0].clone();
    let by = b[1].clone() - p[1].clone();
    let c = ax.clone() * by.clone() - ay.clone() * bx.clone();
    if S::EXACT {
        return c.sign_tol(0.0);
    }
    let scale = ax.to_f64().hypot(ay.to_f64()) * bx.to_f64().hypot(by.to_f64());
    c.sign_tol(tol * scale)
}

fn develop<S: Scalar>(flip: bool, shift: &[S; 2], z: &[S; 2]) -> [S; 2] {
    if flip {
        [shift[0].clone() - z[0].clone(), shift[1].clone() - z[1].clone()]
    } else {
        [shift[0].clone() + z[0].clone(), shift[1].clone() + z[1].clone()]
    }
}

/// Distance from `p` to the part of segment `[r, l]` cut out by the rays
/// from `p` through `wr` and `wl`.
fn window_distance(p: [f64; 2], r: [f64; 2], l: [f64; 2], wr: [f64; 2], wl: [f64; 2]) -> f64 {
    let e = [l[0] - r[0], l[1] - r[1]];
    let hit = |w: [f64; 2]| {
        let d = [w[0] - p[0], w[1] - p[1]];
        let den = e[0] * d[1] - e[1] * d[0];
        if den == 0.0 {
            return None;
        }
        let pr = [p[0] - r[0], p[1] - r[1]];
        Some(((pr[0] * d[1] - pr[1] * d[0]) / den).clamp(0.0, 1.0))
    };
    let (mut a, mut b) = (hit(wr).unwrap_or(0.0), hit(wl).unwrap_or(1.0));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let qa = [r[0] + a * e[0], r[1] + a * e[1]];
    let qb = [r[0] + b * e[0], r[1] + b * e[1]];
    let s = [qb[0] - qa[0], qb[1] - qa[1]];
    let s2 = s[0] * s[0] + s[1] * s[1];
    let t = if s2 == 0.0 { 0.0 } else { (((p[0] - qa[0]) * s[0] + (p[1] - qa[1]) * s[1]) / s2).clamp(0.0, 1.0) };
    (p[0] - qa[0] - t * s[0]).hypot(p[1] - qa[1] - t * s[1])
}

fn f2<S: Scalar>(z: &[S; 2]) -> [f64; 2] {
    [z[0].to_f64(), z[1].to_f64()]
}

/// Every oriented saddle connection of length at most `l`, as developed
/// vectors in the chart of the starting corner.
fn unfold<S: Scalar>(mesh: &Mesh<S>, l: f64, tol: f64) -> Vec<(S, S, [usize; 2])> {
    let mut out = Vec::new();
    let mut frames = 0usize;
    for (t, tr) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let p = &tr.pts[k];
            let a = &tr.pts[(k + 1) % 3];
            let b = &tr.pts[(k + 2) % 3];
            let h = a[0].clone() - p[0].clone();
            let v = a[1].clone() - p[1].clone();
            if within(&h, &v, l) {
                out.push((h, v, [tr.class[k], tr.class[(k + 1) % 3]]));
            }
            let pf = f2(p);
            let mut stack = vec![Frame {
                tri: t,
                edge: (k + 1) % 3,
                flip: false,
                shift: [S::zero(), S::zero()],
                right: a.clone(),
                left: b.clone(),
            }];
            while let Some(fr) = stack.pop() {
                frames += 1;
                assert!(frames < FRAME_LIMIT, "saddle connection search exceeded its frame budget");
                let cur = &mesh.triangles[fr.tri];
                let r = develop(fr.flip, &fr.shift, &cur.pts[fr.edge]);
                let lft = develop(fr.flip, &fr.shift, &cur.pts[(fr.edge + 1) % 3]);
                if window_distance(pf, f2(&r), f2(&lft), f2(&fr.right), f2(&fr.left)) > l * (1.0 + LENGTH_TOL) {
                    continue;
                }
                let x = &cur.across[fr.edge];
                let flip = fr.flip ^ x.flip;
                // D'(w) = σ'w + s − σ'c with σ' = σσ_x.
                let c = develop(flip, &[S::zero(), S::zero()], &x.c);
                let shift = [fr.shift[0].clone() - c[0].clone(), fr.shift[1].clone() - c[1].clone()];
                let nxt = &mesh.triangles[x.tri];
                let ci = (x.edge + 2) % 3;
                let cpt = develop(flip, &shift, &nxt.pts[ci]);
                let or = orient(p, &fr.right, &cpt, tol);
                let ol = orient(p, &fr.left, &cpt, tol);
                if or > 0 && ol < 0 {
                    let h = cpt[0].clone() - p[0].clone();
                    let v = cpt[1].clone() - p[1].clone();
                    if within(&h, &v, l) {
                        out.push((h, v, [tr.class[k], nxt.class[ci]]));
                    }
                    stack.push(Frame {
                        tri: x.tri,
                        edge: (x.edge + 1) % 3,
                        flip,
                        shift: shift.clone(),
                        right: fr.right,
                        left: cpt.clone(),
                    });
                    stack.push(Frame { tri: x.tri, edge: ci, flip, shift, right: cpt, left: fr.left });
                } else if or <= 0 {
                    stack.push(Frame { tri: x.tri, edge: ci, flip, shift, right: fr.right, left: fr.left });
                } else {
                    stack.push(Frame {
                        tri: x.tri,
                        edge: (x.edge + 1) % 3,
                        flip,
                        shift,
                        right: fr.right,
                        left: fr.left,
                    });
                }
            }
        }
    }
    out
}

fn sort_connections(v: &mut [SaddleConnection]) {
    v.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.holonomy.v.atan2(a.holonomy.h).total_cmp(&b.holonomy.v.atan2(b.holonomy.h)))
            .then(a.endpoints.cmp(&b.endpoints))
    });
}

/// Saddle connections of length at most `l`, each oriented connection once.
/// Exact surfaces are handled in rational arithmetic.
pub fn enumerate_saddle_connections(surface: &FlatSurface, l: f64) -> Result<Vec<SaddleConnection>, SurfaceError> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(SurfaceError::NonPositiveLength);
    }
    let tol = super::GEOM_TOL;
    let mut out: Vec<SaddleConnection> = if let Some(ex) = surface.exact_polygons() {
        let raw = if torus_sides(surface).is_some() {
            let p = &ex[0];
            let u = [&p[1][0] - &p[0][0], &p[1][1] - &p[0][1]];
            let w = [&p[3][0] - &p[0][0], &p[3][1] - &p[0][1]];
            let c = surface.vertex_class(0, 0);
            torus_lattice(u, w, l).into_iter().map(|(h, v)| (h, v, [c, c])).collect()
        } else {
            unfold(&Mesh::<Rational>::build(surface), l, tol)
        };
        raw.into_iter().map(|(h, v, e)| SaddleConnection::from_exact(h, v, e)).collect()
    } else {
        let raw = if torus_sides(surface).is_some() {
            let p = &surface.polygons()[0];
            let u = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
            let w = [p[3][0] - p[0][0], p[3][1] - p[0][1]];
            let c = surface.vertex_class(0, 0);
            torus_lattice(u, w, l).into_iter().map(|(h, v)| (h, v, [c, c])).collect()
        } else {
            unfold(&Mesh::<f64>::build(surface), l, tol)
        };
        raw.into_iter().map(|(h, v, e)| SaddleConnection::from_f64(h, v, e)).collect()
    };
    sort_connections(&mut out);
    Ok(out)
}

/// Brute-force variant that always unfolds, bypassing the lattice shortcut.
pub fn unfold_saddle_connections(surface: &FlatSurface, l: f64) -> Result<Vec<SaddleConnection>, SurfaceError> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(SurfaceError::NonPositiveLength);
    }
    let mut out: Vec<SaddleConnection> = if surface.is_exact() {
        unfold(&Mesh::<Rational>::build(surface), l, super::GEOM_TOL)
            .into_iter()
            .map(|(h, v, e)| SaddleConnection::from_exact(h, v, e))
            .collect()
    } else {
        unfold(&Mesh::<f64>::build(surface), l, super::GEOM_TOL)
            .into_iter()
            .map(|(h, v, e)| SaddleConnection::from_f64(h, v, e))
            .collect()
    };
    sort_connections(&mut out);
    Ok(out)
}

/// A shortest saddle connection. Mesh edges are saddle connections, so the
/// shortest edge bounds the search.
pub fn shortest_saddle_connection(surface: &FlatSurface) -> SaddleConnection {
    let mesh = Mesh::<f64>::build(surface);
    let l = mesh
        .triangles
        .iter()
        .flat_map(|t| (0..3).map(move |j| (t.pts[(j + 1) % 3][0] - t.pts[j][0]).hypot(t.pts[(j + 1) % 3][1] - t.pts[j][1])))
        .fold(f64::INFINITY, f64::min);
    enumerate_saddle_connections(surface, l)
        .expect("positive length")
        .into_iter()
        .next()
        .expect("the shortest mesh edge is a saddle connection")
}

#[cfg(test)]
mod tests {
    use super::super::{golden_torus, l_shape, pillowcase, square_torus, Coordinates, build_surface, Gluing};
    use super::*;

    fn primitive_count(l: f64) -> usize {
        let n = l.floor() as i64;
        let mut c = 0;
        for p in -n..=n {
            for q in -n..=n {
                if p.gcd(&q) == 1 && ((p * p + q * q) as f64) <= l * l * (1.0 + 1e-12) {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn square_torus_counts() {
        let s = square_torus();
        let one = enumerate_saddle_connections(&s, 1.0).unwrap();
        assert_eq!(one.len(), 4);
        let mut hol: Vec<(i64, i64)> = one.iter().map(|c| (c.holonomy.h as i64, c.holonomy.v as i64)).collect();
        hol.sort();
        assert_eq!(hol, vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
        assert_eq!(enumerate_saddle_connections(&s, 2f64.sqrt()).unwrap().len(), 8);
        for l in [1.0, 2f64.sqrt(), 5.0, 10.0] {
            assert_eq!(enumerate_saddle_connections(&s, l).unwrap().len(), primitive_count(l));
            assert_eq!(unfold_saddle_connections(&s, l).unwrap().len(), primitive_count(l), "L = {l}");
        }
        assert!(enumerate_saddle_connections(&s, 0.5).unwrap().is_empty());
        assert_eq!(enumerate_saddle_connections(&s, 0.0), Err(SurfaceError::NonPositiveLength));
    }

    #[test]
    fn unfolding_agrees_with_lattice_in_floats() {
        let s = golden_torus();
        for l in [1.0, 3.0, 7.5] {
            let a = enumerate_saddle_connections(&s, l).unwrap();
            let b = unfold_saddle_connections(&s, l).unwrap();
            assert_eq!(a.len(), b.len(), "L = {l}");
            for (x, y) in a.iter().zip(&b) {
                assert!((x.length - y.length).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn split_square_torus_matches() {
        // The square torus cut into two rectangles, so the midpoints of the
        // horizontal sides form a second vertex class.
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let a = vec![[q(0, 1), q(0, 1)], [q(1, 2), q(0, 1)], [q(1, 2), q(1, 1)], [q(0, 1), q(1, 1)]];
        let b = vec![[q(1, 2), q(0, 1)], [q(1, 1), q(0, 1)], [q(1, 1), q(1, 1)], [q(1, 2), q(1, 1)]];
        let t = GluingKind::Translation;
        let s = build_surface(
            Coordinates::Exact(vec![a, b]),
            vec![
                Gluing { p: 0, e: 0, q: 0, f: 2, kind: t },
                Gluing { p: 1, e: 0, q: 1, f: 2, kind: t },
                Gluing { p: 0, e: 1, q: 1, f: 3, kind: t },
                Gluing { p: 1, e: 1, q: 0, f: 3, kind: t },
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(s.singularities().len(), 2);
        let c = enumerate_saddle_connections(&s, 1.0).unwrap();
        // Horizontal halves from each class in both directions, and the two
        // vertical loops in both directions.
        assert_eq!(c.len(), 8);
    }

    #[test]
    fn l_shape_short_connections() {
        let s = l_shape();
        let c = enumerate_saddle_connections(&s, 1.0).unwrap();
        // Three horizontal and three vertical unit segments, both orientations.
        let horizontal = c.iter().filter(|x| x.holonomy.v == 0.0).count();
        let vertical = c.iter().filter(|x| x.holonomy.h == 0.0).count();
        assert_eq!(horizontal, 6);
        assert_eq!(vertical, 6);
        assert_eq!(c.len(), 12);
        let more = enumerate_saddle_connections(&s, 3.0).unwrap();
        assert!(more.len() > c.len());
        for x in &c {
            assert!(more.iter().any(|y| y.exact_h == x.exact_h && y.exact_v == x.exact_v));
            let neg = more.iter().filter(|y| y.holonomy.h == -x.holonomy.h && y.holonomy.v == -x.holonomy.v);
            assert!(neg.count() > 0);
        }
    }

    #[test]
    fn pillowcase_connections() {
        let s = pillowcase();
        let c = enumerate_saddle_connections(&s, 1.0).unwrap();
        assert!(!c.is_empty());
        assert!(c.iter().all(|x| x.length <= 1.0 + 1e-12 && x.length > 0.0));
    }
}
