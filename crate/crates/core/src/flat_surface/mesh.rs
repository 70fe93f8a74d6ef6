//! Triangulation of the polygons with the gluing maps between triangles.

use super::{FlatSurface, GluingKind};
use crate::numeric::Scalar;

/// Map `z ↦ σz + c` from one triangle's chart to a neighbour's.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub tri: usize,
    pub edge: usize,
    pub flip: bool,
    pub c: [S; 2],
}

impl<S: Scalar> Transition<S> {
    pub fn apply(&self, z: &[S; 2]) -> [S; 2] {
        if self.flip {
            [self.c[0].clone() - z[0].clone(), self.c[1].clone() - z[1].clone()]
        } else {
            [z[0].clone() + self.c[0].clone(), z[1].clone() + self.c[1].clone()]
        }
    }
}

/// A triangle of the mesh, in the chart of its polygon. Edge `j` runs from
/// vertex `j` to vertex `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle<S> {
    pub polygon: usize,
    pub corners: [usize; 3],
    pub pts: [[S; 2]; 3],
    pub class: [usize; 3],
    pub across: [Transition<S>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<S = f64> {
    pub triangles: Vec<Triangle<S>>,
    /// Triangles of each polygon.
    pub by_polygon: Vec<Vec<usize>>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Ear clipping. Returns triangles as counterclockwise triples of vertex
/// indices.
pub(crate) fn ear_clip(poly: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let scale = poly.iter().fold(1.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
    let tol = 1e-12 * scale * scale;
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut out = Vec::with_capacity(poly.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&k| {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            if cross(poly[a], poly[b], poly[c]) <= tol {
                return false;
            }
            idx.iter().all(|&m| {
                if m == a || m == b || m == c {
                    return true;
                }
                let z = poly[m];
                let inside = cross(poly[a], poly[b], z) >= -tol
                    && cross(poly[b], poly[c], z) >= -tol
                    && cross(poly[c], poly[a], z) >= -tol;
                !inside
            })
        });
        let k = ear.expect("a simple polygon always has an ear");
        out.push([idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]]);
        idx.remove(k);
    }
    out.push([idx[0], idx[1], idx[2]]);
    out
}

impl<S: Scalar> Mesh<S> {
    /// Triangulates every polygon. Exact coordinates are used when the
    /// surface has them.
    pub fn build(surface: &FlatSurface) -> Mesh<S> {
        let coord = |p: usize, v: usize| -> [S; 2] {
            match surface.exact_polygons() {
                Some(ex) => [S::from_rational(&ex[p][v][0]), S::from_rational(&ex[p][v][1])],
                None => [S::from_f64(surface.polygons()[p][v][0]), S::from_f64(surface.polygons()[p][v][1])],
            }
        };
        let mut raw = Vec::new();
        let mut by_polygon = Vec::new();
        // owner[p][e] = (triangle, edge) holding polygon edge e.
        let mut owner: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut diag = std::collections::HashMap::new();
        for (p, poly) in surface.polygons().iter().enumerate() {
            let n = poly.len();
            let mut ids = Vec::new();
            let mut own = vec![(usize::MAX, 0); n];
            for tri in ear_clip(poly) {
                let t = raw.len();
                ids.push(t);
                for j in 0..3 {
                    let (a, b) = (tri[j], tri[(j + 1) % 3]);
                    if b == (a + 1) % n {
                        own[a] = (t, j);
                    } else {
                        diag.insert((p, a, b), (t, j));
                    }
                }
                raw.push((p, tri));
            }
            by_polygon.push(ids);
            owner.push(own);
        }
        let mut triangles = Vec::with_capacity(raw.len());
        for &(p, tri) in &raw {
            let n = surface.polygons()[p].len();
            let pts = [coord(p, tri[0]), coord(p, tri[1]), coord(p, tri[2])];
            let class = [
                surface.vertex_class(p, tri[0]),
                surface.vertex_class(p, tri[1]),
                surface.vertex_class(p, tri[2]),
            ];
            let across = std::array::from_fn(|j| {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                if b == (a + 1) % n {
                    let (q, f, kind) = surface.partner(p, a);
                    let m = surface.polygons()[q].len();
                    let (t2, j2) = owner[q][f];
                    let va = coord(p, a);
                    let wf1 = coord(q, (f + 1) % m);
                    let (flip, c) = match kind {
                        GluingKind::Translation => {
                            (false, [wf1[0].clone() - va[0].clone(), wf1[1].clone() - va[1].clone()])
                        }
                        GluingKind::Semi => (true, [wf1[0].clone() + va[0].clone(), wf1[1].clone() + va[1].clone()]),
                    };
                    Transition { tri: t2, edge: j2, flip, c }
                } else {
                    let (t2, j2) = diag[&(p, b, a)];
                    Transition { tri: t2, edge: j2, flip: false, c: [S::zero(), S::zero()] }
                }
            });
            triangles.push(Triangle { polygon: p, corners: tri, pts, class, across });
        }
        Mesh { triangles, by_polygon }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

impl Mesh<f64> {
    /// Triangle of polygon `p` containing `z` (closed, with tolerance).
    pub fn find(&self, p: usize, z: [f64; 2], tol: f64) -> Option<usize> {
        let mut best = None;
        let mut best_margin = f64::NEG_INFINITY;
        for &t in &self.by_polygon[p] {
            let tr = &self.triangles[t];
            let margin = (0..3)
                .map(|j| {
                    let a = tr.pts[j];
                    let b = tr.pts[(j + 1) % 3];
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    cross(a, b, z) / len
                })
                .fold(f64::INFINITY, f64::min);
            if margin > best_margin {
                best_margin = margin;
                best = Some(t);
            }
        }
        best.filter(|_| best_margin >= -tol)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{l_shape, pillowcase, square_torus};
    use super::*;
    use crate::numeric::Rational;

    #[test]
    fn ear_clip_counts() {
        let l = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0], [0.0, 1.0]];
        let tris = ear_clip(&l);
        assert_eq!(tris.len(), 6);
        let area: f64 = tris.iter().map(|t| 0.5 * cross(l[t[0]], l[t[1]], l[t[2]])).sum();
        assert_eq!(area, 3.0);
        assert!(tris.iter().all(|t| cross(l[t[0]], l[t[1]], l[t[2]]) > 0.0));
    }

    fn check_transitions<S: Scalar + PartialEq>(m: &Mesh<S>) {
        for (t, tr) in m.triangles.iter().enumerate() {
            for j in 0..3 {
                let x = &tr.across[j];
                let other = &m.triangles[x.tri];
                assert_eq!(other.across[x.edge].tri, t);
                // The edge's endpoints land on the neighbour's edge, reversed.
                let a = x.apply(&tr.pts[j]);
                let b = x.apply(&tr.pts[(j + 1) % 3]);
                assert!(a[0].near(&other.pts[(x.edge + 1) % 3][0]) && a[1].near(&other.pts[(x.edge + 1) % 3][1]));
                assert!(b[0].near(&other.pts[x.edge][0]) && b[1].near(&other.pts[x.edge][1]));
            }
        }
    }

    #[test]
    fn transitions_match_edges() {
        check_transitions(&Mesh::<Rational>::build(&l_shape()));
        check_transitions(&Mesh::<Rational>::build(&square_torus()));
        check_transitions(&Mesh::<f64>::build(&pillowcase()));
        check_transitions(&Mesh::<f64>::build(&pillowcase().double_cover()));
    }
}
