//! Vertical decomposition into cylinders and minimal components.
//!
//! The vertical flow is followed from edge to edge of the triangulation. Each
//! non-vertical edge is parametrized by `x` in the chart of the triangle
//! above it, and the edges are laid end to end, so crossing one triangle
//! upward is a piecewise translation of the concatenated edges. Vertical
//! saddle connections cut the edges into cells; cells whose images are
//! again cells form cylinders, the rest group into minimal components.

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use super::saddle::{enumerate_saddle_connections, SaddleConnection, LENGTH_TOL};
use super::{FlatSurface, Holonomy, SurfaceError, GEOM_TOL};
use crate::iet::{induce_on, keane_check, IetJson, IntervalExchange, KeaneResult, Suspension, ZipperedRectangles};

/// Forward steps after which a separatrix is taken to be infinite.
pub const SEPARATRIX_DEPTH: usize = 20_000;

const KEANE_DEPTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    /// Core curve, first nonzero coordinate positive.
    pub circumference: Holonomy,
    pub height: f64,
    pub area: f64,
    /// Saddle connections along the two boundary components.
    pub boundary: [Vec<SaddleConnection>; 2],
}

impl Cylinder {
    pub fn circumference_length(&self) -> f64 {
        self.circumference.length()
    }
}

/// A horizontal-ish interval inside a minimal component together with the
/// first return of the vertical flow to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionHandle {
    pub polygon: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Horizontal extent.
    pub length: f64,
    pub iet: IetJson,
    /// Return times over each interval.
    pub heights: Vec<f64>,
}

impl SectionHandle {
    /// Unnormalized suspension over `[0, length)`.
    pub fn suspension(&self) -> Suspension<f64> {
        let perm0 = self.iet.permutation.iter().map(|p| p - 1).collect();
        let iet = IntervalExchange::new(self.iet.lengths.clone(), perm0).expect("stored exchange is valid");
        Suspension { iet, heights: self.heights.clone() }
    }

    pub fn rectangles(&self) -> ZipperedRectangles {
        self.suspension().rectangles()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalComponent {
    pub area: f64,
    pub section: SectionHandle,
    /// No discontinuity orbit of the section map closed up within the Keane
    /// depth.
    pub minimal_up_to_depth: bool,
}

/// Which part of a decomposition a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    Cylinder(usize),
    Minimal(usize),
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub cylinders: Vec<Cylinder>,
    pub minimal_components: Vec<MinimalComponent>,
    flow: EdgeFlow,
    cells: Vec<Cell>,
    cell_part: Vec<Part>,
    surface_genus: i64,
}

impl Decomposition {
    pub fn area(&self) -> f64 {
        self.cylinders.iter().map(|c| c.area).sum::<f64>() + self.minimal_components.iter().map(|m| m.area).sum::<f64>()
    }

    /// Part containing the point `z` of polygon `p`.
    pub fn part_at(&self, p: usize, z: [f64; 2]) -> Option<Part> {
        let c = self.flow.cell_at(&self.cells, p, z)?;
        Some(self.cell_part[c])
    }

    /// Smallest transverse width over the cylinders.
    pub fn min_cylinder_width(&self) -> Option<f64> {
        self.cylinders.iter().map(|c| c.height).reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Bottom,
    Top,
    Vertical,
}

#[derive(Debug, Clone)]
struct FlowEdge {
    tri: usize,
    start: f64,
    width: f64,
    x0: f64,
    y0: f64,
    slope: f64,
}

#[derive(Debug, Clone)]
struct Cell {
    lo: f64,
    hi: f64,
    edge: usize,
}

#[derive(Debug, Clone)]
struct EdgeFlow {
    mesh: Mesh<f64>,
    side: Vec<[Side; 3]>,
    edge_id: Vec<[Option<usize>; 3]>,
    edges: Vec<FlowEdge>,
    iet: IntervalExchange<f64>,
    consts: Vec<f64>,
    endpoints: Vec<f64>,
    hits: Vec<f64>,
    separatrix_starts: Vec<f64>,
    tol: f64,
}

fn near_sorted(v: &[f64], x: f64, tol: f64) -> bool {
    let i = v.partition_point(|&a| a < x - tol);
    i < v.len() && (v[i] - x).abs() <= tol
}

impl EdgeFlow {
    fn build(surface: &FlatSurface) -> EdgeFlow {
        let tol = GEOM_TOL * surface.scale();
        let mesh = Mesh::<f64>::build(surface);
        let side: Vec<[Side; 3]> = mesh
            .triangles
            .iter()
            .map(|t| {
                std::array::from_fn(|j| {
                    let dx = t.pts[(j + 1) % 3][0] - t.pts[j][0];
                    if dx > tol {
                        Side::Bottom
                    } else if dx < -tol {
                        Side::Top
                    } else {
                        Side::Vertical
                    }
                })
            })
            .collect();
        let mut edge_id = vec![[None; 3]; mesh.len()];
        let mut edges = Vec::new();
        let mut acc = 0.0;
        for (t, tr) in mesh.triangles.iter().enumerate() {
            for j in 0..3 {
                if side[t][j] != Side::Bottom {
                    continue;
                }
                let a = tr.pts[j];
                let b = tr.pts[(j + 1) % 3];
                let id = edges.len();
                edges.push(FlowEdge {
                    tri: t,
                    start: acc,
                    width: b[0] - a[0],
                    x0: a[0],
                    y0: a[1],
                    slope: (b[1] - a[1]) / (b[0] - a[0]),
                });
                acc += b[0] - a[0];
                edge_id[t][j] = Some(id);
                let x = &tr.across[j];
                edge_id[x.tri][x.edge] = Some(id);
            }
        }
        let mut pieces: Vec<(f64, f64, f64, f64)> = Vec::new();
        let mut hits = Vec::new();
        let mut separatrix_starts = Vec::new();
        for (t, tr) in mesh.triangles.iter().enumerate() {
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| tr.pts[a][0].total_cmp(&tr.pts[b][0]));
            let has_vertical = side[t].contains(&Side::Vertical);
            let xm = tr.pts[order[1]][0];
            let cover = |xa: f64, xb: f64, want: Side| -> usize {
                let mid = 0.5 * (xa + xb);
                (0..3)
                    .filter(|&j| side[t][j] == want)
                    .min_by(|&a, &b| {
                        let d = |j: usize| {
                            let (p, q) = (tr.pts[j][0], tr.pts[(j + 1) % 3][0]);
                            let (l, r) = (p.min(q), p.max(q));
                            (l - mid).max(mid - r)
                        };
                        d(a).total_cmp(&d(b))
                    })
                    .expect("every triangle has a bottom and a top edge")
            };
            let spans: Vec<(f64, f64)> = if has_vertical {
                let b = cover(tr.pts[order[0]][0], tr.pts[order[2]][0], Side::Bottom);
                let (p, q) = (tr.pts[b][0], tr.pts[(b + 1) % 3][0]);
                vec![(p, q)]
            } else {
                vec![(tr.pts[order[0]][0], xm), (xm, tr.pts[order[2]][0])]
            };
            for &(xa, xb) in &spans {
                let b = cover(xa, xb, Side::Bottom);
                let top = cover(xa, xb, Side::Top);
                let eb = edge_id[t][b].expect("bottom edges are indexed");
                let x = &tr.across[top];
                let et = edge_id[x.tri][x.edge].expect("top edges are indexed");
                let dom = edges[eb].start + (xa - edges[eb].x0);
                let img = edges[et].start + (xa + x.c[0] - edges[et].x0);
                pieces.push((dom, img, xb - xa, -x.c[1]));
            }
            if !has_vertical {
                // The long edge spans the whole triangle; the middle vertex
                // sits on the opposite side.
                let long = (0..3).find(|&j| {
                    let (p, q) = (tr.pts[j][0], tr.pts[(j + 1) % 3][0]);
                    p.min(q) == tr.pts[order[0]][0] && p.max(q) == tr.pts[order[2]][0]
                });
                let long = long.expect("a triangle has an edge spanning its width");
                if side[t][long] == Side::Bottom {
                    let e = edge_id[t][long].expect("bottom edges are indexed");
                    hits.push(edges[e].start + (xm - edges[e].x0));
                } else {
                    let x = &tr.across[long];
                    let e = edge_id[x.tri][x.edge].expect("top edges are indexed");
                    separatrix_starts.push(edges[e].start + (xm + x.c[0] - edges[e].x0));
                }
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&a, &b| pieces[a].1.total_cmp(&pieces[b].1));
        let mut perm = vec![0; pieces.len()];
        for (pos, &i) in order.iter().enumerate() {
            perm[i] = pos;
        }
        let iet = IntervalExchange::new(pieces.iter().map(|p| p.2).collect(), perm)
            .expect("the edge flow is a bijection of the edges");
        let consts = pieces.iter().map(|p| p.3).collect();
        let mut endpoints: Vec<f64> = edges.iter().flat_map(|e| [e.start, e.start + e.width]).collect();
        endpoints.sort_by(f64::total_cmp);
        hits.sort_by(f64::total_cmp);
        EdgeFlow { mesh, side, edge_id, edges, iet, consts, endpoints, hits, separatrix_starts, tol }
    }

    fn total(&self) -> f64 {
        *self.iet.total()
    }

    fn edge_at(&self, pos: f64) -> usize {
        self.edges.partition_point(|e| e.start <= pos).saturating_sub(1)
    }

    fn x_of(&self, e: usize, pos: f64) -> f64 {
        self.edges[e].x0 + (pos - self.edges[e].start)
    }

    /// `y` of the side of triangle `t` facing `want` at abscissa `x`.
    fn side_y(&self, t: usize, x: f64, want: Side) -> f64 {
        let tr = &self.mesh.triangles[t];
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..3 {
            if self.side[t][j] != want {
                continue;
            }
            let (a, b) = (tr.pts[j], tr.pts[(j + 1) % 3]);
            let (l, r) = (a[0].min(b[0]), a[0].max(b[0]));
            let miss = (l - x).max(x - r).max(0.0);
            if miss < best.0 {
                let s = ((x - a[0]) / (b[0] - a[0])).clamp(0.0, 1.0);
                best = (miss, a[1] + s * (b[1] - a[1]));
            }
        }
        best.1
    }

    /// Flow time from the edge point `pos` (on edge `e`) to the top of the
    /// triangle above it.
    fn crossing_time(&self, e: usize, pos: f64) -> f64 {
        let t = self.edges[e].tri;
        let x = self.x_of(e, pos);
        self.side_y(t, x, Side::Top) - self.side_y(t, x, Side::Bottom)
    }

    fn step(&self, pos: f64) -> f64 {
        let p = self.iet.apply(&pos);
        let w = self.total();
        if p >= w {
            p - w
        } else if p < 0.0 {
            p + w
        } else {
            p
        }
    }

    /// Crossings of every finite upward separatrix.
    fn finite_separatrix_crossings(&self) -> Vec<f64> {
        let tol = self.tol;
        let mut out = Vec::new();
        for &s in &self.separatrix_starts {
            let mut path = Vec::new();
            let mut p = s;
            let mut finite = false;
            for _ in 0..SEPARATRIX_DEPTH {
                if near_sorted(&self.endpoints, p, tol) {
                    finite = true;
                    break;
                }
                path.push(p);
                if near_sorted(&self.hits, p, tol) {
                    finite = true;
                    break;
                }
                p = self.step(p);
            }
            if finite {
                out.extend(path);
            }
        }
        out
    }

    fn cells(&self) -> Vec<Cell> {
        let tol = self.tol;
        let mut cuts: Vec<f64> = self.endpoints.clone();
        cuts.extend(self.iet.starts().iter().copied());
        cuts.extend(self.finite_separatrix_crossings());
        cuts.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::new();
        for c in cuts {
            if merged.last().map_or(true, |&m| c - m > tol) {
                merged.push(c);
            }
        }
        merged
            .windows(2)
            .map(|w| Cell { lo: w[0], hi: w[1], edge: self.edge_at(0.5 * (w[0] + w[1])) })
            .collect()
    }

    fn cell_index(&self, cells: &[Cell], pos: f64) -> Option<usize> {
        let i = cells.partition_point(|c| c.hi <= pos);
        (i < cells.len() && cells[i].lo <= pos + self.tol).then_some(i)
    }

    fn cell_at(&self, cells: &[Cell], p: usize, z: [f64; 2]) -> Option<usize> {
        let t = self.mesh.find(p, z, self.tol)?;
        let tr = &self.mesh.triangles[t];
        let x = z[0];
        let b = (0..3)
            .filter(|&j| self.side[t][j] == Side::Bottom)
            .min_by(|&a, &c| {
                let d = |j: usize| {
                    let (l, r) = (tr.pts[j][0], tr.pts[(j + 1) % 3][0]);
                    (l - x).max(x - r)
                };
                d(a).total_cmp(&d(c))
            })?;
        let e = self.edge_id[t][b]?;
        let pos = self.edges[e].start + (x - self.edges[e].x0).clamp(0.0, self.edges[e].width);
        self.cell_index(cells, pos)
    }

    /// A point inside the flow box above cell `c`, in its polygon's chart.
    fn cell_point(&self, cells: &[Cell], c: usize) -> (usize, [f64; 2]) {
        let cell = &cells[c];
        let e = cell.edge;
        let pos = 0.5 * (cell.lo + cell.hi);
        let t = self.edges[e].tri;
        let x = self.x_of(e, pos);
        let y = 0.5 * (self.side_y(t, x, Side::Bottom) + self.side_y(t, x, Side::Top));
        (self.mesh.triangles[t].polygon, [x, y])
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let n = self.0[a];
            self.0[a] = r;
            a = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct RawCylinder {
    cycle: Vec<usize>,
    width: f64,
    circumference: f64,
    boundary: [Vec<(f64, usize)>; 2],
}

struct RawMinimal {
    cells: Vec<usize>,
    area: f64,
}

/// Vertex positions along the boundary leaf through the `lo` (or `hi`) ends
/// of a cylinder's cells, as (time, vertex class).
fn boundary_vertices(flow: &EdgeFlow, cells: &[Cell], cycle: &[usize], right: bool) -> Vec<(f64, usize)> {
    let tol = flow.tol;
    let mut out = Vec::new();
    let mut cum = 0.0;
    for &c in cycle {
        let cell = &cells[c];
        let pos = if right { cell.hi } else { cell.lo };
        let e = cell.edge;
        let t = flow.edges[e].tri;
        let x = flow.x_of(e, pos);
        let y0 = flow.side_y(t, x, Side::Bottom);
        let y1 = flow.side_y(t, x, Side::Top);
        let tr = &flow.mesh.triangles[t];
        for k in 0..3 {
            let v = tr.pts[k];
            if (v[0] - x).abs() <= tol && v[1] >= y0 - tol && v[1] <= y1 + tol {
                out.push((cum + (v[1] - y0), tr.class[k]));
            }
        }
        cum += y1 - y0;
    }
    let total = cum;
    for v in out.iter_mut() {
        if v.0 >= total - tol {
            v.0 -= total;
        }
        if v.0 < 0.0 {
            v.0 = 0.0;
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup_by(|b, a| (b.0 - a.0).abs() <= tol);
    out
}

fn boundary_connections(vertices: &[(f64, usize)], circumference: f64) -> Vec<SaddleConnection> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let (t, a) = vertices[i];
            let (u, b) = vertices[(i + 1) % n];
            let gap = if i + 1 == n { circumference - t + u } else { u - t };
            SaddleConnection {
                holonomy: Holonomy { h: 0.0, v: gap },
                length: gap,
                endpoints: [a, b],
                exact_h: None,
                exact_v: None,
            }
        })
        .collect()
}

fn section_handle(flow: &EdgeFlow, cells: &[Cell], members: &[usize]) -> Result<SectionHandle, SurfaceError> {
    // Maximal runs of adjacent cells on one edge.
    let tol = flow.tol;
    let mut sorted = members.to_vec();
    sorted.sort_by(|&a, &b| cells[a].lo.total_cmp(&cells[b].lo));
    let mut runs: Vec<(usize, f64, f64)> = Vec::new();
    for &c in &sorted {
        let cell = &cells[c];
        match runs.last_mut() {
            Some(r) if r.0 == cell.edge && (cell.lo - r.2).abs() <= tol => r.2 = cell.hi,
            _ => runs.push((cell.edge, cell.lo, cell.hi)),
        }
    }
    let best = runs
        .iter()
        .max_by(|a, b| {
            let flat = |r: &(usize, f64, f64)| flow.edges[r.0].slope.abs() <= GEOM_TOL;
            flat(a).cmp(&flat(b)).then((a.2 - a.1).total_cmp(&(b.2 - b.1))).then(b.1.total_cmp(&a.1))
        })
        .copied()
        .expect("components have cells");
    first_return_on(flow, best.0, best.1, best.2)
}

fn first_return_on(flow: &EdgeFlow, e: usize, lo: f64, hi: f64) -> Result<SectionHandle, SurfaceError> {
    let (iet, mut heights) = induce_on(&flow.iet, &flow.consts, &lo, &hi)?;
    let slope = flow.edges[e].slope;
    for (h, s) in heights.iter_mut().zip(iet.shifts()) {
        *h += slope * s;
    }
    let edge = &flow.edges[e];
    let point = |pos: f64| {
        let x = flow.x_of(e, pos);
        [x, edge.y0 + edge.slope * (x - edge.x0)]
    };
    Ok(SectionHandle {
        polygon: flow.mesh.triangles[edge.tri].polygon,
        start: point(lo),
        end: point(hi),
        length: hi - lo,
        iet: iet.to_json(),
        heights,
    })
}

fn analyze(flow: &EdgeFlow, cells: &[Cell]) -> (Vec<RawCylinder>, Vec<RawMinimal>, Vec<usize>) {
    let tol = flow.tol;
    let n = cells.len();
    let mut uf = UnionFind((0..n).collect());
    let mut succ = vec![None; n];
    for (i, cell) in cells.iter().enumerate() {
        let mid = 0.5 * (cell.lo + cell.hi);
        let k = flow.iet.locate(&mid);
        let shift = flow.iet.shifts()[k];
        let (a, b) = (cell.lo + shift, cell.hi + shift);
        let mut j = cells.partition_point(|c| c.hi <= a + tol);
        while j < n && cells[j].lo < b - tol {
            uf.union(i, j);
            if (cells[j].lo - a).abs() <= 10.0 * tol && (cells[j].hi - b).abs() <= 10.0 * tol {
                succ[i] = Some(j);
            }
            j += 1;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = uf.find(i);
        groups.entry(r).or_default().push(i);
    }
    let mut cylinders = Vec::new();
    let mut minimal = Vec::new();
    let mut owner = vec![usize::MAX; n];
    for members in groups.into_values() {
        let periodic = members.iter().all(|&i| succ[i].is_some());
        if periodic {
            let mut seen = std::collections::HashSet::new();
            for &start in &members {
                if seen.contains(&start) {
                    continue;
                }
                let mut cycle = vec![start];
                seen.insert(start);
                let mut c = succ[start].expect("aligned");
                while c != start && seen.insert(c) {
                    cycle.push(c);
                    c = succ[c].expect("aligned");
                }
                let width = cycle.iter().map(|&c| cells[c].hi - cells[c].lo).sum::<f64>() / cycle.len() as f64;
                let circumference = cycle
                    .iter()
                    .map(|&c| flow.crossing_time(cells[c].edge, 0.5 * (cells[c].lo + cells[c].hi)))
                    .sum();
                let boundary =
                    [boundary_vertices(flow, cells, &cycle, false), boundary_vertices(flow, cells, &cycle, true)];
                for &c in &cycle {
                    owner[c] = cylinders.len();
                }
                cylinders.push(RawCylinder { cycle, width, circumference, boundary });
            }
        } else {
            let area = members
                .iter()
                .map(|&c| {
                    let cell = &cells[c];
                    (cell.hi - cell.lo) * flow.crossing_time(cell.edge, 0.5 * (cell.lo + cell.hi))
                })
                .sum();
            for &c in &members {
                owner[c] = usize::MAX - 1 - minimal.len();
            }
            minimal.push(RawMinimal { cells: members, area });
        }
    }
    (cylinders, minimal, owner)
}

/// Decomposes the surface along the vertical direction. Half-translation
/// surfaces are handled on their orientation double cover and projected back.
pub fn vertical_decomposition(surface: &FlatSurface) -> Result<Decomposition, SurfaceError> {
    let (work, cover_of) = if surface.is_translation() {
        (surface.clone(), None)
    } else {
        (surface.double_cover(), Some(surface.polygons().len()))
    };
    let flow = EdgeFlow::build(&work);
    let cells = flow.cells();
    let (raw_cyl, raw_min, owner) = analyze(&flow, &cells);
    let part_of = |c: usize| -> Part {
        let o = owner[c];
        if o >= usize::MAX - raw_min.len() {
            Part::Minimal(usize::MAX - 1 - o)
        } else {
            Part::Cylinder(o)
        }
    };
    // Deck involution on parts when working on the cover.
    let deck: Option<Vec<Part>> = cover_of.map(|n| {
        let image = |c: usize| -> Part {
            let (p, z) = flow.cell_point(&cells, c);
            let q = if p < n { p + n } else { p - n };
            let d = flow.cell_at(&cells, q, [-z[0], -z[1]]).expect("the deck image lies on the surface");
            part_of(d)
        };
        let mut out = Vec::new();
        for cy in &raw_cyl {
            out.push(image(cy.cycle[0]));
        }
        for m in &raw_min {
            out.push(image(m.cells[0]));
        }
        out
    });
    let class_map = |c: usize| -> usize {
        match cover_of {
            None => c,
            Some(n) => {
                let (p, i) = work.singularities()[c].corners[0];
                surface.vertex_class(p % n, i)
            }
        }
    };
    let keep = |idx: usize, part: Part| -> (bool, bool) {
        // (kept, invariant under the deck map)
        match &deck {
            None => (true, false),
            Some(d) => {
                let img = d[idx];
                if img == part {
                    (true, true)
                } else {
                    let rank = |p: Part| match p {
                        Part::Cylinder(i) => i,
                        Part::Minimal(i) => raw_cyl.len() + i,
                    };
                    (rank(part) < rank(img), false)
                }
            }
        }
    };
    let mut cyl_index = vec![None; raw_cyl.len()];
    let mut cylinders = Vec::new();
    for (i, cy) in raw_cyl.iter().enumerate() {
        let (kept, _) = keep(i, Part::Cylinder(i));
        if !kept {
            continue;
        }
        cyl_index[i] = Some(cylinders.len());
        let conv = |v: &[(f64, usize)]| {
            let mapped: Vec<(f64, usize)> = v.iter().map(|&(t, c)| (t, class_map(c))).collect();
            boundary_connections(&mapped, cy.circumference)
        };
        cylinders.push(Cylinder {
            circumference: Holonomy { h: 0.0, v: cy.circumference },
            height: cy.width,
            area: cy.width * cy.circumference,
            boundary: [conv(&cy.boundary[0]), conv(&cy.boundary[1])],
        });
    }
    if let Some(d) = &deck {
        for (i, slot) in cyl_index.clone().iter().enumerate() {
            if slot.is_none() {
                if let Part::Cylinder(j) = d[i] {
                    cyl_index[i] = cyl_index[j];
                }
            }
        }
    }
    let mut min_index = vec![None; raw_min.len()];
    let mut minimal_components = Vec::new();
    for (i, m) in raw_min.iter().enumerate() {
        let (kept, invariant) = keep(raw_cyl.len() + i, Part::Minimal(i));
        if !kept {
            continue;
        }
        min_index[i] = Some(minimal_components.len());
        let section = section_handle(&flow, &cells, &m.cells)?;
        let susp = section.suspension();
        let minimal_up_to_depth = !matches!(keane_check(&susp.iet, KEANE_DEPTH), KeaneResult::Periodic { .. });
        minimal_components.push(MinimalComponent {
            area: if invariant { m.area / 2.0 } else { m.area },
            section,
            minimal_up_to_depth,
        });
    }
    if let Some(d) = &deck {
        for i in 0..raw_min.len() {
            if min_index[i].is_none() {
                if let Part::Minimal(j) = d[raw_cyl.len() + i] {
                    min_index[i] = min_index[j];
                }
            }
        }
    }
    let cell_part = (0..cells.len())
        .map(|c| match part_of(c) {
            Part::Cylinder(i) => Part::Cylinder(cyl_index[i].expect("every cylinder has a kept twin")),
            Part::Minimal(i) => Part::Minimal(min_index[i].expect("every component has a kept twin")),
        })
        .collect();
    Ok(Decomposition {
        cylinders,
        minimal_components,
        flow,
        cells,
        cell_part,
        surface_genus: surface.genus(),
    })
}

/// First return of the vertical flow to the piece of edge `e` of polygon `p`
/// between fractions `t0 < t1` of the edge, measured from its first vertex.
///
/// Sections inside cylinders are refused except on tori, where the whole
/// surface is one cylinder or one minimal component.
pub fn first_return(
    surface: &FlatSurface,
    decomposition: &Decomposition,
    p: usize,
    e: usize,
    t0: f64,
    t1: f64,
) -> Result<(ZipperedRectangles, IntervalExchange<f64>), SurfaceError> {
    if p >= surface.polygons().len() || e >= surface.polygons()[p].len() {
        return Err(SurfaceError::BadSection("no such edge".into()));
    }
    if !(0.0 <= t0 && t0 < t1 && t1 <= 1.0) {
        return Err(SurfaceError::BadSection("fractions must satisfy 0 <= t0 < t1 <= 1".into()));
    }
    let flow = &decomposition.flow;
    let n = surface.polygons()[p].len();
    let (t, j) = flow.mesh.by_polygon[p]
        .iter()
        .find_map(|&t| {
            let c = flow.mesh.triangles[t].corners;
            (0..3).find(|&j| c[j] == e && c[(j + 1) % 3] == (e + 1) % n).map(|j| (t, j))
        })
        .expect("every polygon edge belongs to a triangle");
    let id = flow.edge_id[t][j].ok_or_else(|| SurfaceError::BadSection("vertical edges are not transverse".into()))?;
    let edge = &flow.edges[id];
    let tr = &flow.mesh.triangles[t];
    let (a, b) = (tr.pts[j], tr.pts[(j + 1) % 3]);
    let xs = [a[0] + t0 * (b[0] - a[0]), a[0] + t1 * (b[0] - a[0])];
    let shift = if flow.side[t][j] == Side::Bottom { 0.0 } else { tr.across[j].c[0] };
    let mut pos = xs.map(|x| (edge.start + (x + shift - edge.x0)).clamp(edge.start, edge.start + edge.width));
    pos.sort_by(f64::total_cmp);
    let [lo, hi] = pos;
    let cells = &decomposition.cells;
    let first = cells.partition_point(|c| c.hi <= lo + flow.tol);
    let in_cylinder = cells[first..]
        .iter()
        .take_while(|c| c.lo < hi - flow.tol)
        .enumerate()
        .any(|(k, _)| matches!(decomposition.cell_part[first + k], Part::Cylinder(_)));
    if in_cylinder && decomposition.surface_genus != 1 {
        return Err(SurfaceError::InCylinder);
    }
    let handle = first_return_on(flow, id, lo, hi)?;
    let susp = handle.suspension();
    Ok((susp.rectangles(), susp.iet))
}

/// All maximal cylinders with circumference at most `l`. Every cylinder is
/// bounded by parallel saddle connections no longer than its circumference,
/// so the candidate directions come from the saddle connections up to `l`.
pub fn enumerate_cylinders(surface: &FlatSurface, l: f64) -> Result<Vec<Cylinder>, SurfaceError> {
    let conns = enumerate_saddle_connections(surface, l)?;
    let mut dirs: Vec<(f64, SaddleConnection)> = conns
        .into_iter()
        .filter_map(|c| {
            let u = c.holonomy.canonical();
            (u == c.holonomy).then(|| (u.v.atan2(u.h), c))
        })
        .collect();
    dirs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.length.total_cmp(&b.1.length)));
    let mut picked: Vec<SaddleConnection> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (ang, c) in dirs {
        if ang - last > 1e-12 {
            picked.push(c);
            last = ang;
        }
    }
    let mut out = Vec::new();
    for c in picked {
        let (h, v) = (c.holonomy.h, c.holonomy.v);
        let n = h * h + v * v;
        let turned = match (&c.exact_h, &c.exact_v) {
            (Some(eh), Some(ev)) => {
                let nn = eh * eh + ev * ev;
                surface.apply_linear_exact([[ev.clone(), -eh.clone()], [eh / &nn, ev / &nn]])
            }
            _ => None,
        }
        .unwrap_or_else(|| surface.apply_linear([[v, -h], [h / n, v / n]]));
        let norm = n.sqrt();
        for cy in vertical_decomposition(&turned)?.cylinders {
            let circ = cy.circumference.v;
            if circ * norm > l * (1.0 + LENGTH_TOL) {
                continue;
            }
            let scale_sc = |s: &SaddleConnection| SaddleConnection {
                holonomy: Holonomy { h: s.length * h, v: s.length * v },
                length: s.length * norm,
                endpoints: s.endpoints,
                exact_h: None,
                exact_v: None,
            };
            out.push(Cylinder {
                circumference: Holonomy { h: circ * h, v: circ * v }.canonical(),
                height: cy.height / norm,
                area: cy.area,
                boundary: [
                    cy.boundary[0].iter().map(scale_sc).collect(),
                    cy.boundary[1].iter().map(scale_sc).collect(),
                ],
            });
        }
    }
    out.sort_by(|a, b| {
        a.circumference_length().total_cmp(&b.circumference_length()).then(
            a.circumference.v.atan2(a.circumference.h).total_cmp(&b.circumference.v.atan2(b.circumference.h)),
        )
    });
    Ok(out)
}
