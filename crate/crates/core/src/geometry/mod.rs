//! Workspace geometry: points, polygons, environments, the three sweep
//! schedule families and the split of boundaries into monotone chains.

mod chains;
mod frame;
mod schedule;

pub use chains::{extract_monotone_chains, ChainSide, MonotoneChain};
pub(crate) use chains::chains_of_loops;
pub(crate) use frame::{build_frame_loops, FrameVertex};
pub use schedule::{ScheduleSpec, SweepSchedule};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point-equality tolerance in workspace units.
pub const POINT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, s: f64) -> Point {
        self + (o - self) * s
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of triangle `abc`; positive for a left turn.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let s = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * s)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let scale = [p1, p2, q1, q2]
        .iter()
        .fold(1.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
    let eps = 1e-12 * scale * scale;
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let sign = |v: f64| {
        if v > eps {
            1
        } else if v < -eps {
            -1
        } else {
            0
        }
    };
    let (s1, s2, s3, s4) = (sign(d1), sign(d2), sign(d3), sign(d4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    let on = |a: Point, b: Point, p: Point| {
        p.x >= a.x.min(b.x) - POINT_TOL
            && p.x <= a.x.max(b.x) + POINT_TOL
            && p.y >= a.y.min(b.y) - POINT_TOL
            && p.y <= a.y.max(b.y) + POINT_TOL
    };
    (s1 == 0 && on(q1, q2, p1))
        || (s2 == 0 && on(q1, q2, p2))
        || (s3 == 0 && on(p1, p2, q1))
        || (s4 == 0 && on(p1, p2, q2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Builds a polygon, checking vertex count, finiteness and distinct
    /// vertices. Simplicity is checked when the polygon joins an
    /// [`Environment`].
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolygon(format!("non-finite vertex {p:?}")));
        }
        let mut sorted: Vec<Point> = vertices.clone();
        sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if sorted[j].x - sorted[i].x > POINT_TOL {
                    break;
                }
                if sorted[i].dist(sorted[j]) <= POINT_TOL {
                    return Err(Error::InvalidPolygon(format!(
                        "coincident vertices at {:?}",
                        sorted[i]
                    )));
                }
            }
        }
        let poly = Polygon { vertices };
        if poly.signed_area().abs() <= POINT_TOL * POINT_TOL {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area, positive for counter-clockwise order.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        acc / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn reversed(&self) -> Polygon {
        let mut v = self.vertices.clone();
        v.reverse();
        Polygon { vertices: v }
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.vertices.iter().copied())
    }

    /// Even-odd containment test; points on the boundary give an
    /// unspecified answer.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> BBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn overlaps(&self, o: &BBox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Uniform bucket grid over boxes, used for broad-phase overlap queries.
struct BoxGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl BoxGrid {
    fn new(bounds: BBox, items: usize) -> BoxGrid {
        let side = (items as f64).sqrt().ceil().max(1.0);
        let extent = bounds.width().max(bounds.height()).max(POINT_TOL);
        let cell = extent / side;
        let nx = ((bounds.width() / cell).floor() as usize + 1).min(4096);
        let ny = ((bounds.height() / cell).floor() as usize + 1).min(4096);
        BoxGrid {
            origin: bounds.min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    fn range(&self, b: &BBox) -> (usize, usize, usize, usize) {
        let ix = |v: f64, n: usize| (((v / self.cell).floor().max(0.0)) as usize).min(n - 1);
        (
            ix(b.min.x - self.origin.x, self.nx),
            ix(b.max.x - self.origin.x, self.nx),
            ix(b.min.y - self.origin.y, self.ny),
            ix(b.max.y - self.origin.y, self.ny),
        )
    }

    fn insert(&mut self, b: &BBox, id: usize) {
        let (x0, x1, y0, y1) = self.range(b);
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.buckets[y * self.nx + x].push(id);
            }
        }
    }

    fn query(&self, b: &BBox, out: &mut Vec<usize>) {
        out.clear();
        let (x0, x1, y0, y1) = self.range(b);
        for y in y0..=y1 {
            for x in x0..=x1 {
                out.extend_from_slice(&self.buckets[y * self.nx + x]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// Free-space membership for many queries against one environment.
pub struct FreeSpaceIndex<'a> {
    env: &'a Environment,
    boxes: Vec<BBox>,
    grid: BoxGrid,
}

impl<'a> FreeSpaceIndex<'a> {
    pub fn new(env: &'a Environment) -> Self {
        let boxes: Vec<BBox> = env.obstacles.iter().map(Polygon::bbox).collect();
        let mut grid = BoxGrid::new(env.bbox(), boxes.len());
        for (i, b) in boxes.iter().enumerate() {
            grid.insert(b, i);
        }
        FreeSpaceIndex { env, boxes, grid }
    }

    /// Same answer as [`Environment::contains`].
    pub fn contains(&self, p: Point) -> bool {
        if !self.env.outer.contains(p) {
            return false;
        }
        let (x, _, y, _) = self.grid.range(&BBox { min: p, max: p });
        !self.grid.buckets[y * self.grid.nx + x]
            .iter()
            .any(|&i| self.boxes[i].contains(p) && self.env.obstacles[i].contains(p))
    }
}

/// Outer boundary plus obstacles. The free space is the outer polygon
/// minus the obstacle interiors.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    outer: Polygon,
    obstacles: Vec<Polygon>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentJson {
    outer: Vec<Point>,
    #[serde(default)]
    obstacles: Vec<Vec<Point>>,
}

impl Environment {
    /// Validates and normalizes orientation: the outer boundary is stored
    /// counter-clockwise and obstacles clockwise, so free space always lies
    /// to the left of every boundary edge.
    pub fn new(outer: Polygon, obstacles: Vec<Polygon>) -> Result<Self> {
        let outer = if outer.is_ccw() { outer } else { outer.reversed() };
        let obstacles: Vec<Polygon> = obstacles
            .into_iter()
            .map(|p| if p.is_ccw() { p.reversed() } else { p })
            .collect();
        let env = Environment { outer, obstacles };
        env.validate()?;
        Ok(env)
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Environment::new(
            Polygon::new(vec![
                Point::new(0.0, 0.0),
                Point::new(width, 0.0),
                Point::new(width, height),
                Point::new(0.0, height),
            ])?,
            Vec::new(),
        )
    }

    pub fn outer(&self) -> &Polygon {
        &self.outer
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    /// Polygon by index: 0 is the outer boundary, `i + 1` obstacle `i`.
    pub fn polygon(&self, idx: usize) -> &Polygon {
        if idx == 0 {
            &self.outer
        } else {
            &self.obstacles[idx - 1]
        }
    }

    pub fn polygons(&self) -> impl Iterator<Item = &Polygon> {
        std::iter::once(&self.outer).chain(self.obstacles.iter())
    }

    pub fn vertex_count(&self) -> usize {
        self.polygons().map(Polygon::len).sum()
    }

    pub fn free_area(&self) -> f64 {
        self.outer.area() - self.obstacles.iter().map(Polygon::area).sum::<f64>()
    }

    pub fn boundary_length(&self) -> f64 {
        self.polygons().map(Polygon::perimeter).sum()
    }

    pub fn bbox(&self) -> BBox {
        self.outer.bbox()
    }

    /// Strict free-space membership (boundary points are excluded up to
    /// [`POINT_TOL`] only through the even-odd test).
    pub fn contains(&self, p: Point) -> bool {
        self.outer.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.polygons()
            .map(|poly| poly.boundary_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: EnvironmentJson = serde_json::from_str(s)?;
        let obstacles = raw
            .obstacles
            .into_iter()
            .map(Polygon::new)
            .collect::<Result<Vec<_>>>()?;
        Environment::new(Polygon::new(raw.outer)?, obstacles)
    }

    pub fn to_json(&self) -> String {
        let raw = EnvironmentJson {
            outer: self.outer.vertices.clone(),
            obstacles: self.obstacles.iter().map(|o| o.vertices.clone()).collect(),
        };
        serde_json::to_string(&raw).expect("environment serializes")
    }

    fn validate(&self) -> Result<()> {
        // Broad phase over every boundary edge: any intersection other than
        // the shared vertex of consecutive edges is a defect (self
        // intersection, touching obstacles or an obstacle crossing the outer
        // boundary).
        struct EdgeRef {
            poly: usize,
            idx: usize,
            a: Point,
            b: Point,
        }
        let mut edges = Vec::new();
        for (pi, poly) in self.polygons().enumerate() {
            for (idx, (a, b)) in poly.edges().enumerate() {
                edges.push(EdgeRef { poly: pi, idx, a, b });
            }
        }
        let bounds = self.bbox();
        let mut grid = BoxGrid::new(bounds, edges.len());
        let boxes: Vec<BBox> = edges.iter().map(|e| BBox::of([e.a, e.b])).collect();
        for (i, b) in boxes.iter().enumerate() {
            grid.insert(b, i);
        }
        let mut cand = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            grid.query(&boxes[i], &mut cand);
            for &j in cand.iter().filter(|&&j| j > i) {
                let f = &edges[j];
                if e.poly == f.poly {
                    let n = self.polygon(e.poly).len();
                    let adjacent = (e.idx + 1) % n == f.idx || (f.idx + 1) % n == e.idx;
                    if adjacent {
                        // consecutive edges folding back onto each other
                        let (shared, p, q) = if (e.idx + 1) % n == f.idx {
                            (e.b, e.a, f.b)
                        } else {
                            (e.a, e.b, f.a)
                        };
                        let (u, v) = (p - shared, q - shared);
                        if u.cross(v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(v) > 0.0 {
                            return Err(Error::InvalidPolygon(format!(
                                "degenerate spike at {shared:?}"
                            )));
                        }
                        continue;
                    }
                }
                if boxes[i].overlaps(&boxes[j]) && segments_intersect(e.a, e.b, f.a, f.b) {
                    let what = if e.poly == f.poly {
                        "polygon is not simple"
                    } else if e.poly == 0 || f.poly == 0 {
                        "obstacle touches or crosses the outer boundary"
                    } else {
                        "obstacles intersect"
                    };
                    return Err(Error::InvalidEnvironment(format!(
                        "{what} near {:?}",
                        e.a
                    )));
                }
            }
        }
        // No crossings remain, so one vertex per obstacle decides nesting.
        let obox: Vec<BBox> = self.obstacles.iter().map(Polygon::bbox).collect();
        let mut ogrid = BoxGrid::new(bounds, self.obstacles.len());
        for (i, b) in obox.iter().enumerate() {
            ogrid.insert(b, i);
        }
        for (i, obs) in self.obstacles.iter().enumerate() {
            let v = obs.vertices[0];
            if !self.outer.contains(v) {
                return Err(Error::InvalidEnvironment(format!(
                    "obstacle {i} lies outside the outer boundary"
                )));
            }
            ogrid.query(&BBox::of([v]), &mut cand);
            for &j in cand.iter().filter(|&&j| j != i) {
                if obox[j].contains(v) && self.obstacles[j].contains(v) {
                    return Err(Error::InvalidEnvironment(format!(
                        "obstacle {i} is nested inside obstacle {j}"
                    )));
                }
            }
        }
        Ok(())
    }
}
