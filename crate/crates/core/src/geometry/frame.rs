//! Boundary loops mapped into the (arrival, key) frame of a schedule.
//!
//! For the polar schedules the angular coordinate is unwrapped into
//! `[cut, cut + 2π]`. Wherever free space crosses the cut ray the loops are
//! reconnected along two slits, one at each end of the angular range, so the
//! image of the free space is a region whose boundary loops are made of
//! arrival-parameterized edges.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use super::schedule::normalize_angle;
use super::{segment_distance, Environment, Point, SweepSchedule, POINT_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum EdgeShape {
    /// Straight in the frame.
    Line,
    /// Straight in the workspace, curved in a polar frame.
    Segment,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FrameVertex {
    pub a: f64,
    pub k: f64,
    pub p: Point,
    pub loop_id: u32,
    pub idx: u32,
}

impl FrameVertex {
    /// Symbolically perturbed sweep order.
    pub fn order(&self, o: &FrameVertex) -> Ordering {
        self.a
            .total_cmp(&o.a)
            .then(self.k.total_cmp(&o.k))
            .then(self.loop_id.cmp(&o.loop_id))
            .then(self.idx.cmp(&o.idx))
    }

    pub fn precedes(&self, o: &FrameVertex) -> bool {
        self.order(o) == Ordering::Less
    }
}

#[derive(Clone, Debug)]
pub(crate) struct FrameLoop {
    pub verts: Vec<FrameVertex>,
    /// `shapes[i]` joins `verts[i]` to `verts[i + 1]` (cyclically).
    pub shapes: Vec<EdgeShape>,
    /// Polygon the edge lies on: 0 outer, `i + 1` obstacle `i`; `None` for
    /// slits and the blown-up center.
    pub sources: Vec<Option<usize>>,
}

/// Frontier key of the edge `u → v` at arrival `t`, with `t` clamped into
/// the edge's arrival range. Constant-arrival edges return `u.k`.
pub(crate) fn edge_key(
    sched: &SweepSchedule,
    u: &FrameVertex,
    v: &FrameVertex,
    shape: EdgeShape,
    t: f64,
) -> f64 {
    if u.a == v.a {
        return u.k;
    }
    let (lo, hi) = if u.a < v.a { (u.a, v.a) } else { (v.a, u.a) };
    let t = t.clamp(lo, hi);
    if t == u.a {
        return u.k;
    }
    if t == v.a {
        return v.k;
    }
    match (shape, sched) {
        (EdgeShape::Line, _) | (_, SweepSchedule::Vertical { .. }) => {
            u.k + (v.k - u.k) * (t - u.a) / (v.a - u.a)
        }
        (EdgeShape::Segment, SweepSchedule::Circular { center, .. }) => {
            let w = u.p - *center;
            let d = v.p - u.p;
            let qa = d.dot(d);
            let qb = w.dot(d);
            let qc = w.dot(w) - t * t;
            let disc = (qb * qb - qa * qc).max(0.0).sqrt();
            // increasing distance takes the far root, decreasing the near one
            let s = if v.a > u.a {
                if qb >= 0.0 {
                    -qc / (qb + disc)
                } else {
                    (disc - qb) / qa
                }
            } else if qb <= 0.0 {
                qc / (disc - qb)
            } else {
                -(qb + disc) / qa
            };
            let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
            let q = w + d * s;
            u.k + w.cross(q).atan2(w.dot(q))
        }
        (EdgeShape::Segment, SweepSchedule::Radial { center, .. }) => {
            let (sn, cs) = t.sin_cos();
            let e = Point::new(cs, sn);
            let w = u.p - *center;
            let d = v.p - u.p;
            let den = e.cross(d);
            let s = if den != 0.0 { (-e.cross(w) / den).clamp(0.0, 1.0) } else { 0.0 };
            (w + d * s).norm()
        }
    }
}

pub(crate) fn build_frame_loops(env: &Environment, sched: &SweepSchedule) -> Result<Vec<FrameLoop>> {
    match *sched {
        SweepSchedule::Vertical { .. } => Ok(env
            .polygons()
            .enumerate()
            .map(|(pi, poly)| {
                let verts = poly
                    .vertices()
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let (a, k) = sched.frame(p).expect("vertical frame is total");
                        FrameVertex { a, k, p, loop_id: pi as u32, idx: i as u32 }
                    })
                    .collect::<Vec<_>>();
                let n = verts.len();
                FrameLoop { verts, shapes: vec![EdgeShape::Line; n], sources: vec![Some(pi); n] }
            })
            .collect()),
        SweepSchedule::Circular { center, cut } => polar_loops(env, center, cut, false),
        SweepSchedule::Radial { center, start } => polar_loops(env, center, start, true),
    }
}

/// Image edge in polar coordinates `(r, θ)` with `θ ∈ [cut, cut + 2π]`.
#[derive(Clone, Copy, Debug)]
struct PolarEdge {
    r0: f64,
    th0: f64,
    r1: f64,
    th1: f64,
    p0: Point,
    p1: Point,
    shape: EdgeShape,
    source: Option<usize>,
    at_center: bool,
}

#[derive(Clone, Copy, Debug)]
struct Crossing {
    poly: usize,
    /// Index into the polygon's image-edge list of the edge that starts
    /// after the jump.
    next: usize,
    r: f64,
    p: Point,
    /// Side the boundary arrives on: `false` low (`cut`), `true` high.
    from_high: bool,
}

fn polar_loops(
    env: &Environment,
    center: Point,
    cut: f64,
    radial: bool,
) -> Result<Vec<FrameLoop>> {
    let kind = if radial { "radial" } else { "circular" };
    let on_boundary = env.boundary_distance(center) <= POINT_TOL;
    if !on_boundary && env.contains(center) {
        return Err(Error::InvalidSchedule(format!(
            "{kind} center {center:?} lies in the interior of free space"
        )));
    }
    let home = (0..env.obstacles().len()).find(|&i| env.obstacles()[i].contains(center));

    let mut images: Vec<Vec<PolarEdge>> = Vec::new();
    for (pi, poly) in env.polygons().enumerate() {
        let mut pts: Vec<Point> = poly.vertices().to_vec();
        if on_boundary {
            snap_center(&mut pts, center);
        }
        if !radial {
            pts = split_at_feet(&pts, center);
        }
        images.push(polar_images(&pts, center, cut, pi)?);
    }

    let mut crossings = Vec::new();
    for (pi, edges) in images.iter().enumerate() {
        let n = edges.len();
        for i in 0..n {
            let (e, f) = (&edges[i], &edges[(i + 1) % n]);
            let jump = e.th1 - f.th0;
            if jump.abs() > TAU / 2.0 {
                crossings.push(Crossing { poly: pi, next: (i + 1) % n, r: e.r1, p: e.p1, from_high: jump > 0.0 });
            } else if !e.at_center
                && !f.at_center
                && (e.th1 == cut || e.th1 == cut + TAU)
                && e.shape == EdgeShape::Segment
                && f.shape == EdgeShape::Segment
                && e.th0 != e.th1
                && f.th0 != f.th1
            {
                return Err(Error::GeneralPosition {
                    reason: format!("boundary vertex touches the {kind} cut ray; choose another cut angle"),
                    points: vec![e.p1],
                });
            }
        }
    }
    if crossings.is_empty() {
        return Ok(images
            .iter()
            .enumerate()
            .map(|(pi, edges)| to_frame_loop(edges, pi, radial))
            .collect());
    }
    if radial {
        if let Some(c) = crossings.iter().find(|c| c.poly > 0 && Some(c.poly - 1) != home) {
            return Err(Error::InvalidSchedule(format!(
                "obstacle {} crosses the radial start ray at {:?}",
                c.poly - 1,
                c.p
            )));
        }
    }
    if crossings.len() % 2 != 0 {
        return Err(Error::Internal("odd number of cut-ray crossings".into()));
    }
    let mut order: Vec<usize> = (0..crossings.len()).collect();
    order.sort_by(|&x, &y| crossings[x].r.total_cmp(&crossings[y].r));
    let mut partner = vec![0usize; crossings.len()];
    for pair in order.chunks(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }

    // Pieces run from one crossing of a polygon to the next.
    struct Piece {
        edges: Vec<PolarEdge>,
        start: usize,
        end: usize,
    }
    let mut pieces: Vec<Piece> = Vec::new();
    let mut intact: Vec<usize> = Vec::new();
    for (pi, edges) in images.iter().enumerate() {
        let mut own: Vec<usize> = (0..crossings.len()).filter(|&c| crossings[c].poly == pi).collect();
        if own.is_empty() {
            intact.push(pi);
            continue;
        }
        own.sort_by_key(|&c| crossings[c].next);
        let n = edges.len();
        for (j, &c) in own.iter().enumerate() {
            let c_next = own[(j + 1) % own.len()];
            let from = crossings[c].next;
            let to = crossings[c_next].next;
            let len = (to + n - from - 1) % n + 1;
            pieces.push(Piece {
                edges: (0..len).map(|s| edges[(from + s) % n]).collect(),
                start: c,
                end: c_next,
            });
        }
    }
    let mut starting_at = vec![usize::MAX; crossings.len()];
    for (i, piece) in pieces.iter().enumerate() {
        starting_at[piece.start] = i;
    }

    let mut loops: Vec<FrameLoop> = intact
        .iter()
        .map(|&pi| to_frame_loop(&images[pi], pi, radial))
        .collect();
    let mut used = vec![false; pieces.len()];
    for first in 0..pieces.len() {
        if used[first] {
            continue;
        }
        let mut edges: Vec<PolarEdge> = Vec::new();
        let mut cur = first;
        loop {
            if used[cur] {
                return Err(Error::Internal("cut slits do not close into loops".into()));
            }
            used[cur] = true;
            edges.extend_from_slice(&pieces[cur].edges);
            let x = pieces[cur].end;
            let high = crossings[x].from_high;
            let y = partner[x];
            let th = if high { cut + TAU } else { cut };
            edges.push(PolarEdge {
                r0: crossings[x].r,
                th0: th,
                r1: crossings[y].r,
                th1: th,
                p0: crossings[x].p,
                p1: crossings[y].p,
                shape: EdgeShape::Line,
                source: None,
                at_center: false,
            });
            // the slit must hand over to a piece leaving on the same side
            let next = starting_at[y];
            if next == usize::MAX || crossings[y].from_high == high {
                return Err(Error::Internal(format!(
                    "cut slit at {:?} has no continuation",
                    crossings[y].p
                )));
            }
            if next == first {
                break;
            }
            cur = next;
        }
        let id = images.len() + loops.len();
        loops.push(to_frame_loop(&edges, id, radial));
    }
    Ok(loops)
}

fn to_frame_loop(edges: &[PolarEdge], loop_id: usize, radial: bool) -> FrameLoop {
    let verts = edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let (a, k) = if radial { (e.th0, e.r0) } else { (e.r0, e.th0) };
            FrameVertex { a, k, p: e.p0, loop_id: loop_id as u32, idx: i as u32 }
        })
        .collect();
    FrameLoop {
        verts,
        shapes: edges.iter().map(|e| e.shape).collect(),
        sources: edges.iter().map(|e| e.source).collect(),
    }
}

/// Replaces a vertex coinciding with `center` by `center` itself, or inserts
/// `center` into the edge it lies on.
fn snap_center(pts: &mut Vec<Point>, center: Point) {
    if let Some(v) = pts.iter_mut().find(|p| p.dist(center) <= POINT_TOL) {
        *v = center;
        return;
    }
    let n = pts.len();
    if let Some(i) = (0..n).find(|&i| segment_distance(center, pts[i], pts[(i + 1) % n]) <= POINT_TOL) {
        pts.insert(i + 1, center);
    }
}

/// Splits every edge at its closest point to `center` when that point is
/// interior, so distance to the center is monotone along each edge.
fn split_at_feet(pts: &[Point], center: Point) -> Vec<Point> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n + n / 2);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        out.push(p);
        if p == center || q == center {
            continue;
        }
        let d = q - p;
        let s = -(p - center).dot(d) / d.dot(d);
        if s > 1e-12 && s < 1.0 - 1e-12 {
            let foot = p + d * s;
            if foot.dist(p) > POINT_TOL && foot.dist(q) > POINT_TOL {
                out.push(foot);
            }
        }
    }
    out
}

fn polar_images(pts: &[Point], center: Point, cut: f64, poly: usize) -> Result<Vec<PolarEdge>> {
    let n = pts.len();
    let angle = |p: Point| {
        let d = p - center;
        normalize_angle(d.y.atan2(d.x), cut)
    };
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let (rp, rq) = (p.dist(center), q.dist(center));
        if q == center {
            // the center itself is expanded while handling its out-edge
            let (prev, next) = (p, pts[(i + 2) % n]);
            let a_in = (prev - center).y.atan2((prev - center).x);
            let a_out = (next - center).y.atan2((next - center).x);
            let phi_out = normalize_angle(a_out, cut);
            let span = normalize_angle(a_in - a_out, 0.0);
            if span == 0.0 {
                return Err(Error::InvalidPolygon(format!("degenerate wedge at {center:?}")));
            }
            let phi_in = phi_out + span;
            if phi_in > cut + TAU {
                return Err(Error::InvalidSchedule(format!(
                    "the cut ray enters free space at the center {center:?}; choose another cut angle"
                )));
            }
            out.push(PolarEdge {
                r0: rp,
                th0: phi_in,
                r1: 0.0,
                th1: phi_in,
                p0: p,
                p1: center,
                shape: EdgeShape::Line,
                source: Some(poly),
                at_center: true,
            });
            out.push(PolarEdge {
                r0: 0.0,
                th0: phi_in,
                r1: 0.0,
                th1: phi_out,
                p0: center,
                p1: center,
                shape: EdgeShape::Line,
                source: None,
                at_center: true,
            });
            continue;
        }
        if p == center {
            let phi_out = normalize_angle((q - center).y.atan2((q - center).x), cut);
            out.push(PolarEdge {
                r0: 0.0,
                th0: phi_out,
                r1: rq,
                th1: phi_out,
                p0: center,
                p1: q,
                shape: EdgeShape::Line,
                source: Some(poly),
                at_center: true,
            });
            continue;
        }
        let (wp, wq) = (p - center, q - center);
        let delta = wp.cross(wq).atan2(wp.dot(wq));
        let mut th0 = angle(p);
        let tq = angle(q);
        let mut th1 = tq + TAU * ((th0 + delta - tq) / TAU).round();
        if delta == 0.0 && th0 == cut && rq < rp {
            // edge running inward along the cut ray: free side is the high one
            th0 += TAU;
            th1 = th0;
        }
        let seg = |r0, th0, r1, th1, p0, p1| PolarEdge {
            r0,
            th0,
            r1,
            th1,
            p0,
            p1,
            shape: EdgeShape::Segment,
            source: Some(poly),
            at_center: false,
        };
        if th1 >= cut && th1 <= cut + TAU {
            out.push(seg(rp, th0, rq, th1, p, q));
        } else if th0 == cut && th1 < cut {
            out.push(seg(rp, th0 + TAU, rq, th1 + TAU, p, q));
        } else {
            let (sn, cs) = cut.sin_cos();
            let e = Point::new(cs, sn);
            let d = q - p;
            let s = (-e.cross(wp) / e.cross(d)).clamp(0.0, 1.0);
            let x = p + d * s;
            let rx = x.dist(center);
            if th1 > cut + TAU {
                out.push(seg(rp, th0, rx, cut + TAU, p, x));
                out.push(seg(rx, cut, rq, th1 - TAU, x, q));
            } else {
                out.push(seg(rp, th0, rx, cut, p, x));
                out.push(seg(rx, cut + TAU, rq, th1 + TAU, x, q));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
        .unwrap()
    }

    fn check_closed(loops: &[FrameLoop], sched: &SweepSchedule) {
        let center = sched.center().unwrap();
        for l in loops {
            let n = l.verts.len();
            for i in 0..n {
                let (u, v) = (&l.verts[i], &l.verts[(i + 1) % n]);
                if u.p != center {
                    let (a, k) = sched.frame(u.p).unwrap();
                    let wrap = |x: f64| (x / TAU).round() * TAU;
                    assert!((a - u.a - wrap(a - u.a)).abs() < 1e-9);
                    assert!((k - u.k - wrap(k - u.k)).abs() < 1e-9);
                }
                let mid = edge_key(sched, u, v, l.shapes[i], 0.5 * (u.a + v.a));
                assert!(mid.is_finite());
            }
        }
    }

    #[test]
    fn circular_center_in_obstacle_has_no_slits_when_cut_misses_free_space() {
        let env = Environment::new(rect(-10.0, -10.0, 10.0, 10.0), vec![rect(-1.0, -1.0, 1.0, 1.0)]).unwrap();
        let s = SweepSchedule::circular(Point::new(0.0, 0.0));
        let loops = build_frame_loops(&env, &s).unwrap();
        // both polygons cross the cut, so they merge through two slit pairs
        assert_eq!(loops.len(), 1);
        let slits = loops[0].sources.iter().filter(|s| s.is_none()).count();
        assert_eq!(slits, 2);
        check_closed(&loops, &s);
    }

    #[test]
    fn circular_center_on_outer_corner() {
        let env = Environment::new(rect(0.0, 0.0, 4.0, 3.0), vec![]).unwrap();
        let s = SweepSchedule::circular(Point::new(0.0, 0.0));
        let loops = build_frame_loops(&env, &s).unwrap();
        assert_eq!(loops.len(), 1);
        let l = &loops[0];
        assert!(l.verts.iter().any(|v| v.a == 0.0));
        check_closed(&loops, &s);
    }

    #[test]
    fn rejects_center_in_free_space() {
        let env = Environment::new(rect(0.0, 0.0, 4.0, 3.0), vec![]).unwrap();
        let s = SweepSchedule::circular(Point::new(2.0, 1.0));
        assert!(matches!(build_frame_loops(&env, &s), Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn radial_rejects_obstacle_on_start_ray() {
        let env = Environment::new(rect(0.0, 0.0, 10.0, 10.0), vec![rect(4.0, 4.0, 6.0, 6.0)]).unwrap();
        let ok = SweepSchedule::radial(Point::new(-5.0, 5.0), std::f64::consts::FRAC_PI_2);
        assert!(build_frame_loops(&env, &ok).is_ok());
        let bad = SweepSchedule::radial(Point::new(-5.0, 5.0), 0.0);
        assert!(matches!(build_frame_loops(&env, &bad), Err(Error::InvalidSchedule(_))));
    }
}
