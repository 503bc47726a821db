//! Planar geometry used to audit admissible intermediate configurations.
//!
//! - [`hausdorff`] between finite samplings of compact sets,
//! - [`ciarlet_necas_check`] comparing the area of the image of a
//!   piecewise-affine map with the reference area,
//! - [`jones_verify`], a sampled falsifier for the two (ε,δ)-domain
//!   conditions on a simple polygon, built on visibility-graph shortest paths.
//!
//! Compact sets are always represented by samples with a known spacing `h`;
//! distances computed from them carry a `±2h` slack.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};

pub type Point = [f64; 2];

/// Image triangles with area below this are reported as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// Relative area tolerance of the Ciarlet–Nečas margin.
pub const CN_AREA_TOL: f64 = 1e-8;

/// Parameter samples along a shortest path for the second Jones condition.
pub const COND2_SAMPLES: usize = 64;

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Twice the signed area of the triangle `abc`.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>()
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2;
    dist(p, lerp(a, b, t.clamp(0.0, 1.0)))
}

/// True when the open segments `ab` and `cd` cross at a single interior point.
fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn on_segment(p: Point, a: Point, b: Point, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

/// True when the closed segments `ab` and `cd` share at least one point.
fn segments_touch(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    segments_cross_properly(a, b, c, d)
        || on_segment(c, a, b, tol)
        || on_segment(d, a, b, tol)
        || on_segment(a, c, d, tol)
        || on_segment(b, c, d, tol)
}

/// A simple polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PolygonFile {
    Bare(Vec<Point>),
    Tagged { vertices: Vec<Point> },
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let vertices = match PolygonFile::deserialize(d)? {
            PolygonFile::Bare(v) | PolygonFile::Tagged { vertices: v } => v,
        };
        Polygon::new(vertices).map_err(serde::de::Error::custom)
    }
}

impl Polygon {
    /// Validates simplicity with a pairwise segment test. Clockwise input is
    /// reversed so the stored orientation is always counter-clockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon("fewer than three vertices".into()));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        let scale = vertices.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale;
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if dist(a, b) <= tol {
                return Err(Error::InvalidPolygon(format!("repeated vertex {i}")));
            }
            for j in (i + 1)..n {
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // neighbours share one vertex; they must not fold back on each other
                    let shared = if j == i + 1 { b } else { a };
                    let (p, q) = if j == i + 1 { (a, d) } else { (b, c) };
                    if orient(p, shared, q).abs() <= tol * dist(p, shared).max(dist(q, shared))
                        && (sub(p, shared)[0] * sub(q, shared)[0] + sub(p, shared)[1] * sub(q, shared)[1]) > 0.0
                    {
                        return Err(Error::InvalidPolygon(format!("edges {i} and {j} overlap")));
                    }
                } else if segments_touch(a, b, c, d, tol) {
                    return Err(Error::InvalidPolygon(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                d = d.max(dist(v[i], v[j]));
            }
        }
        d
    }

    fn scale(&self) -> f64 {
        self.vertices.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Point-in-polygon by crossing number; boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.boundary_distance(p) <= 1e-12 * self.scale() {
            return true;
        }
        self.contains_strictly(p)
    }

    fn contains_strictly(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Interior point away from the boundary.
    pub fn contains_interior(&self, p: Point) -> bool {
        self.contains_strictly(p) && self.boundary_distance(p) > 1e-12 * self.scale()
    }

    /// True when the closed segment `pq` lies in the closed polygon.
    pub fn segment_inside(&self, p: Point, q: Point) -> bool {
        let tol = 1e-12 * self.scale();
        for (a, b) in self.edges() {
            if segments_cross_properly(p, q, a, b) {
                return false;
            }
        }
        let len = dist(p, q);
        if len == 0.0 {
            return self.contains(p);
        }
        let d = sub(q, p);
        let mut ts = vec![0.0, 1.0];
        for &v in &self.vertices {
            if on_segment(v, p, q, tol) {
                let t = ((v[0] - p[0]) * d[0] + (v[1] - p[1]) * d[1]) / (len * len);
                ts.push(t.clamp(0.0, 1.0));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.windows(2)
            .filter(|w| w[1] - w[0] > 1e-12)
            .all(|w| self.contains(lerp(p, q, 0.5 * (w[0] + w[1]))))
    }

    /// Vertices where the interior angle exceeds π.
    pub fn reflex_vertices(&self) -> Vec<Point> {
        let n = self.vertices.len();
        (0..n)
            .filter(|&i| {
                let prev = self.vertices[(i + n - 1) % n];
                let next = self.vertices[(i + 1) % n];
                orient(prev, self.vertices[i], next) < 0.0
            })
            .map(|i| self.vertices[i])
            .collect()
    }

    /// Shortest path between two points of the closed polygon through the
    /// visibility graph of `a`, `b` and the reflex vertices.
    pub fn shortest_path(&self, a: Point, b: Point) -> Option<ShortestPath> {
        if !self.contains(a) || !self.contains(b) {
            return None;
        }
        if self.segment_inside(a, b) {
            return Some(ShortestPath { length: dist(a, b), points: vec![a, b] });
        }
        let mut nodes = vec![a, b];
        nodes.extend(self.reflex_vertices());
        let n = nodes.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if (i, j) == (0, 1) {
                    continue;
                }
                if self.segment_inside(nodes[i], nodes[j]) {
                    let w = dist(nodes[i], nodes[j]);
                    adj[i].push((j, w));
                    adj[j].push((i, w));
                }
            }
        }
        let (d, prev) = dijkstra(&adj, 0);
        if !d[1].is_finite() {
            return None;
        }
        let mut points = vec![nodes[1]];
        let mut cur = 1;
        while let Some(p) = prev[cur] {
            points.push(nodes[p]);
            cur = p;
        }
        points.reverse();
        Some(ShortestPath { length: d[1], points })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShortestPath {
    pub length: f64,
    pub points: Vec<Point>,
}

impl ShortestPath {
    /// Point at arclength `s` from the start.
    pub fn at(&self, s: f64) -> Point {
        let mut remaining = s.max(0.0);
        for w in self.points.windows(2) {
            let l = dist(w[0], w[1]);
            if remaining <= l {
                return if l > 0.0 { lerp(w[0], w[1], remaining / l) } else { w[0] };
            }
            remaining -= l;
        }
        *self.points.last().expect("path has endpoints")
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut d = vec![f64::INFINITY; adj.len()];
    let mut prev = vec![None; adj.len()];
    let mut heap = BinaryHeap::new();
    d[src] = 0.0;
    heap.push(HeapItem(0.0, src));
    while let Some(HeapItem(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < d[v] {
                d[v] = nd;
                prev[v] = Some(u);
                heap.push(HeapItem(nd, v));
            }
        }
    }
    (d, prev)
}

pub fn bbox(pts: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Uniform bucket grid for exact nearest-neighbour queries.
struct PointGrid<'a> {
    pts: &'a [Point],
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointGrid<'a> {
    fn new(pts: &'a [Point]) -> Self {
        let (lo, hi) = bbox(pts);
        let w = (hi[0] - lo[0]).max(0.0);
        let h = (hi[1] - lo[1]).max(0.0);
        let extent = w.max(h).max(1e-300);
        let area = (w * h).max(extent * extent / pts.len() as f64);
        let cell = (area / pts.len() as f64).sqrt().max(extent / 4096.0);
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in pts.iter().enumerate() {
            let (ix, iy) = Self::cell_of(lo, cell, nx, ny, *p);
            buckets[iy * nx + ix].push(i);
        }
        PointGrid { pts, lo, cell, nx, ny, buckets }
    }

    fn cell_of(lo: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let fx = ((p[0] - lo[0]) / cell).floor().max(0.0) as usize;
        let fy = ((p[1] - lo[1]) / cell).floor().max(0.0) as usize;
        (fx.min(nx - 1), fy.min(ny - 1))
    }

    fn scan(&self, p: Point, ix: isize, iy: isize, best: &mut f64) {
        for &k in &self.buckets[iy as usize * self.nx + ix as usize] {
            *best = best.min(dist(p, self.pts[k]));
        }
    }

    fn nearest(&self, p: Point) -> f64 {
        // unclamped cell of p, so rings are centred on p even outside the box
        let index = |v: f64| (v / self.cell).floor().clamp(-1e15, 1e15) as isize;
        let (cx, cy) = (index(p[0] - self.lo[0]), index(p[1] - self.lo[1]));
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let outside = |c: isize, n: isize| if c < 0 { -c } else if c >= n { c - n + 1 } else { 0 };
        let first = outside(cx, nx).max(outside(cy, ny));
        let last = first + nx.max(ny);
        let mut best = f64::INFINITY;
        for r in first..=last {
            // points of ring r are at least (r − 1)·cell away from p
            if r >= 1 && (r - 1) as f64 * self.cell > best {
                break;
            }
            let (x0, x1, y0, y1) = (cx - r, cx + r, cy - r, cy + r);
            let (cx0, cx1) = (x0.max(0), x1.min(nx - 1));
            for iy in y0.max(0)..=y1.min(ny - 1) {
                if iy == y0 || iy == y1 {
                    for ix in cx0..=cx1 {
                        self.scan(p, ix, iy, &mut best);
                    }
                } else {
                    for ix in [x0, x1] {
                        if (0..nx).contains(&ix) && (r > 0 || ix == x0) {
                            self.scan(p, ix, iy, &mut best);
                        }
                    }
                }
            }
        }
        best
    }
}

/// `sup_{x∈X} dist(x, Y)` over the samples.
pub fn directed_hausdorff(x: &[Point], y: &[Point]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    let grid = PointGrid::new(y);
    Ok(x.par_iter().map(|p| grid.nearest(*p)).reduce(|| 0.0, f64::max))
}

/// Hausdorff distance between two finite samplings.
pub fn hausdorff(x: &[Point], y: &[Point]) -> Result<f64> {
    Ok(directed_hausdorff(x, y)?.max(directed_hausdorff(y, x)?))
}

/// Samples the boundary of `poly` at spacing at most `h`.
pub fn sample_boundary(poly: &Polygon, h: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in poly.edges() {
        let k = (dist(a, b) / h).ceil().max(1.0) as usize;
        out.extend((0..k).map(|i| lerp(a, b, i as f64 / k as f64)));
    }
    out
}

/// Samples the closed polygon: boundary at spacing `h` plus the interior
/// points of the lattice `hℤ²` anchored at the bounding-box corner.
pub fn sample_polygon(poly: &Polygon, h: f64) -> Vec<Point> {
    let mut out = sample_boundary(poly, h);
    let (lo, hi) = poly.bbox();
    let nx = ((hi[0] - lo[0]) / h).round() as usize;
    let ny = ((hi[1] - lo[1]) / h).round() as usize;
    for j in 0..=ny {
        for i in 0..=nx {
            let p = [lo[0] + i as f64 * h, lo[1] + j as f64 * h];
            if poly.contains_interior(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Hausdorff distance between two closed polygons, sampled at spacing `h`.
#[derive(Clone, Debug, Serialize)]
pub struct HausdorffReport {
    pub distance: f64,
    pub spacing: f64,
    pub slack: f64,
    pub samples_a: usize,
    pub samples_b: usize,
}

pub fn polygon_hausdorff(a: &Polygon, b: &Polygon, h: f64) -> Result<HausdorffReport> {
    let sa = sample_polygon(a, h);
    let sb = sample_polygon(b, h);
    Ok(HausdorffReport {
        distance: hausdorff(&sa, &sb)?,
        spacing: h,
        slack: 2.0 * h,
        samples_a: sa.len(),
        samples_b: sb.len(),
    })
}

// ---- convex clipping and triangle unions ----

/// Keeps the part of the convex polygon `poly` on the left of the directed
/// line `a → b` (Sutherland–Hodgman step).
fn clip_left(poly: &[Point], a: Point, b: Point, keep_left: bool) -> Vec<Point> {
    let side = |p: Point| {
        let s = orient(a, b, p);
        if keep_left {
            s
        } else {
            -s
        }
    };
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = side(p);
        let sq = side(q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            out.push(lerp(p, q, sp / (sp - sq)));
        }
    }
    out
}

/// `convex \ tri` as disjoint convex pieces (both counter-clockwise).
fn convex_minus_triangle(convex: &[Point], tri: &[Point; 3], min_area: f64) -> Vec<Vec<Point>> {
    let mut pieces = Vec::new();
    let mut rest = convex.to_vec();
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        let outside = clip_left(&rest, a, b, false);
        if outside.len() >= 3 && signed_area(&outside) > min_area {
            pieces.push(outside);
        }
        rest = clip_left(&rest, a, b, true);
        if rest.len() < 3 || signed_area(&rest) <= min_area {
            break;
        }
    }
    pieces
}

fn overlaps(a: &(Point, Point), b: &(Point, Point)) -> bool {
    a.0[0] <= b.1[0] && b.0[0] <= a.1[0] && a.0[1] <= b.1[1] && b.0[1] <= a.1[1]
}

/// Area of the union of counter-clockwise triangles.
pub fn triangle_union_area(tris: &[[Point; 3]]) -> f64 {
    let boxes: Vec<(Point, Point)> = tris.iter().map(|t| bbox(t)).collect();
    let total: f64 = tris.iter().map(|t| signed_area(t).abs()).sum();
    let min_area = 1e-15 * total.max(f64::MIN_POSITIVE);
    let mut area = 0.0;
    for i in 0..tris.len() {
        let mut pieces = vec![tris[i].to_vec()];
        for j in 0..i {
            if !overlaps(&boxes[i], &boxes[j]) {
                continue;
            }
            pieces = pieces
                .iter()
                .flat_map(|p| convex_minus_triangle(p, &tris[j], min_area))
                .collect();
            if pieces.is_empty() {
                break;
            }
        }
        area += pieces.iter().map(|p| signed_area(p)).sum::<f64>();
    }
    area
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnReport {
    pub pass: bool,
    /// `ℒ(y_p(Ω)) − ℒ(Ω)`.
    pub margin: f64,
    pub image_area: f64,
    pub reference_area: f64,
    /// Sum of image triangle areas minus the union area; zero for injective maps.
    pub overlap_area: f64,
    pub area_tol: f64,
}

/// Compares the area of the image of the mesh under the piecewise-affine map
/// `yp` with the reference area. Image triangles are reoriented before the
/// union is taken, so folds show up as lost area.
pub fn ciarlet_necas_check(mesh: &Mesh, yp: &Field) -> Result<CnReport> {
    let mut tris = Vec::with_capacity(mesh.triangles().len());
    for (e, t) in mesh.triangles().iter().enumerate() {
        let mut tri = [yp[t[0]], yp[t[1]], yp[t[2]]];
        let a = 0.5 * orient(tri[0], tri[1], tri[2]);
        if a.abs() < DEGENERATE_AREA {
            return Err(Error::DegenerateElement { element: e, area: a.abs() });
        }
        if a < 0.0 {
            tri.swap(1, 2);
        }
        tris.push(tri);
    }
    let image_area = triangle_union_area(&tris);
    let reference_area = mesh.area();
    let total: f64 = tris.iter().map(|t| signed_area(t)).sum();
    let margin = image_area - reference_area;
    let area_tol = CN_AREA_TOL * reference_area;
    Ok(CnReport {
        pass: margin >= -area_tol,
        margin,
        image_area,
        reference_area,
        overlap_area: (total - image_area).max(0.0),
        area_tol,
    })
}

// ---- Jones (ε,δ) conditions ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub x: Point,
    pub y: Point,
    pub distance: f64,
    pub path_length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JonesReport {
    pub epsilon: f64,
    pub delta: f64,
    pub pairs_checked: usize,
    /// Pairs whose shortest interior path is longer than `|x − y| / ε`; no
    /// other curve can do better, so these are definitive.
    pub cond1_failures: Vec<PairRecord>,
    /// Pairs whose shortest path violates the boundary-distance condition.
    /// Another curve might satisfy it, so these are inconclusive.
    pub cond2_inconclusive: Vec<PairRecord>,
    pub epsilon_max_estimate: f64,
}

impl JonesReport {
    pub fn cond1_holds(&self) -> bool {
        self.cond1_failures.is_empty()
    }
}

fn validate_jones(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// Draws `count` interior pairs with `0 < |x − y| < delta`. Pair `i` uses
/// its own ChaCha stream, so the sample set does not depend on scheduling.
pub fn sample_pairs(poly: &Polygon, delta: f64, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let (lo, hi) = poly.bbox();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            loop {
                let x = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
                if !poly.contains_interior(x) {
                    continue;
                }
                let r = delta * rng.random::<f64>().sqrt();
                let th = rng.random_range(0.0..std::f64::consts::TAU);
                let y = [x[0] + r * th.cos(), x[1] + r * th.sin()];
                let d = dist(x, y);
                if d > 0.0 && d < delta && poly.contains_interior(y) {
                    return (x, y);
                }
            }
        })
        .collect()
}

struct PairOutcome {
    record: PairRecord,
    cond1_fail: bool,
    cond2_fail: bool,
}

fn check_pair(poly: &Polygon, epsilon: f64, x: Point, y: Point) -> Option<PairOutcome> {
    let path = poly.shortest_path(x, y)?;
    let d = dist(x, y);
    let record = PairRecord { x, y, distance: d, path_length: path.length };
    let cond1_fail = path.length > d / epsilon * (1.0 + 1e-12);
    let cond2_fail = (1..=COND2_SAMPLES).any(|k| {
        let s = path.length * k as f64 / (COND2_SAMPLES + 1) as f64;
        let g = path.at(s);
        poly.boundary_distance(g) < epsilon * dist(x, g) * dist(g, y) / d
    });
    Some(PairOutcome { record, cond1_fail, cond2_fail })
}

/// Evaluates both conditions on an explicit pair set; pairs with
/// `|x − y| ≥ delta` are skipped.
pub fn jones_verify_pairs(poly: &Polygon, epsilon: f64, delta: f64, pairs: &[(Point, Point)]) -> Result<JonesReport> {
    validate_jones(epsilon, delta)?;
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .filter(|(x, y)| dist(*x, *y) < delta)
        .filter_map(|&(x, y)| check_pair(poly, epsilon, x, y))
        .collect();
    let epsilon_max_estimate = outcomes
        .iter()
        .map(|o| if o.record.path_length > 0.0 { o.record.distance / o.record.path_length } else { 1.0 })
        .fold(1.0f64, f64::min);
    let mut report = JonesReport {
        epsilon,
        delta,
        pairs_checked: outcomes.len(),
        cond1_failures: Vec::new(),
        cond2_inconclusive: Vec::new(),
        epsilon_max_estimate,
    };
    for o in outcomes {
        if o.cond1_fail {
            report.cond1_failures.push(o.record.clone());
        }
        if o.cond2_fail {
            report.cond2_inconclusive.push(o.record);
        }
    }
    Ok(report)
}

/// Samples `sample_pairs` interior pairs closer than `delta` and checks both
/// (ε,δ)-domain conditions on their shortest interior paths.
pub fn jones_verify(poly: &Polygon, epsilon: f64, delta: f64, sample_pairs_count: usize, seed: u64) -> Result<JonesReport> {
    validate_jones(epsilon, delta)?;
    let pairs = sample_pairs(poly, delta, sample_pairs_count, seed);
    jones_verify_pairs(poly, epsilon, delta, &pairs)
}

/// Default (ε, δ) when none are configured: ε = 0.1 and δ the polygon diameter.
pub fn default_jones_parameters(poly: &Polygon) -> (f64, f64) {
    (0.1, poly.diameter())
}

// ---- Hausdorff convergence of intermediate configurations ----

/// Samples the closure of `yp(Ω)`: each element's barycentric lattice with
/// reference spacing about `h`, pushed through the affine map.
pub fn sample_image(mesh: &Mesh, yp: &Field, h: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for t in mesh.triangles() {
        let ref_pts = [mesh.nodes()[t[0]], mesh.nodes()[t[1]], mesh.nodes()[t[2]]];
        let diam = dist(ref_pts[0], ref_pts[1]).max(dist(ref_pts[1], ref_pts[2])).max(dist(ref_pts[0], ref_pts[2]));
        let k = (diam / h).ceil().max(1.0) as usize;
        let img = [yp[t[0]], yp[t[1]], yp[t[2]]];
        for i in 0..=k {
            for j in 0..=(k - i) {
                let (l1, l2) = (i as f64 / k as f64, j as f64 / k as f64);
                let l0 = 1.0 - l1 - l2;
                out.push([
                    l0 * img[0][0] + l1 * img[1][0] + l2 * img[2][0],
                    l0 * img[0][1] + l1 * img[1][1] + l2 * img[2][1],
                ]);
            }
        }
    }
    out
}

/// Samples the image of the mesh boundary at reference spacing about `h`.
pub fn sample_image_boundary(mesh: &Mesh, yp: &Field, h: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for e in mesh.boundary_edges() {
        let k = (dist(mesh.nodes()[e[0]], mesh.nodes()[e[1]]) / h).ceil().max(1.0) as usize;
        out.extend((0..=k).map(|i| lerp(yp[e[0]], yp[e[1]], i as f64 / k as f64)));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceEntry {
    pub index: usize,
    pub closure_distance: f64,
    pub boundary_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub spacing: f64,
}

impl ConvergenceReport {
    /// Whether the last iterate is within `threshold` in both distances.
    pub fn converged_below(&self, threshold: f64) -> bool {
        self.entries
            .last()
            .is_some_and(|e| e.closure_distance <= threshold && e.boundary_distance <= threshold)
    }
}

/// Hausdorff distances of the closures and of the boundaries of `yⁿ_p(Ω)`
/// to those of `y_p(Ω)` for each member of the sequence. Monotonicity is not
/// asserted.
pub fn hausdorff_convergence_probe(mesh: &Mesh, sequence: &[Field], limit: &Field, h: f64) -> Result<ConvergenceReport> {
    let lim_all = sample_image(mesh, limit, h);
    let lim_bdry = sample_image_boundary(mesh, limit, h);
    let entries = sequence
        .iter()
        .enumerate()
        .map(|(index, f)| {
            Ok(ConvergenceEntry {
                index,
                closure_distance: hausdorff(&sample_image(mesh, f, h), &lim_all)?,
                boundary_distance: hausdorff(&sample_image_boundary(mesh, f, h), &lim_bdry)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { entries, spacing: h })
}
