use serde::Serialize;

use super::frame::{build_frame_loops, edge_key, EdgeShape, FrameLoop, FrameVertex};
use super::{Environment, Point, SweepSchedule};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainSide {
    Lower,
    Upper,
}

/// Boundary path along which arrival strictly increases (after the
/// symbolic tie-break), from a local arrival minimum to a local maximum.
#[derive(Clone, Debug)]
pub struct MonotoneChain {
    pub(crate) verts: Vec<FrameVertex>,
    pub(crate) shapes: Vec<EdgeShape>,
    pub(crate) sources: Vec<Option<usize>>,
    pub side: ChainSide,
}

impl MonotoneChain {
    pub fn points(&self) -> Vec<Point> {
        self.verts.iter().map(|v| v.p).collect()
    }

    pub fn arrivals(&self) -> Vec<f64> {
        self.verts.iter().map(|v| v.a).collect()
    }

    /// Polygon the chain runs along: 0 outer, `i + 1` obstacle `i`. `None`
    /// when the chain consists only of cut slits.
    pub fn source_polygon(&self) -> Option<usize> {
        self.sources.iter().flatten().next().copied()
    }

    /// Workspace length of the boundary part of the chain (slits excluded).
    pub fn boundary_length(&self) -> f64 {
        self.verts
            .windows(2)
            .zip(&self.sources)
            .filter(|(_, s)| s.is_some())
            .map(|(w, _)| w[0].p.dist(w[1].p))
            .sum()
    }

    pub(crate) fn first(&self) -> &FrameVertex {
        &self.verts[0]
    }

    pub(crate) fn last(&self) -> &FrameVertex {
        self.verts.last().expect("chains have two or more vertices")
    }

    fn eval(&self, sched: &SweepSchedule, i: usize, t: f64) -> f64 {
        let i = i.min(self.verts.len() - 2);
        edge_key(sched, &self.verts[i], &self.verts[i + 1], self.shapes[i], t)
    }

    /// Key at `t` using the edge with `a_i <= t < a_{i+1}`.
    pub(crate) fn key_right(&self, sched: &SweepSchedule, t: f64) -> f64 {
        let j = self.verts.partition_point(|v| v.a <= t);
        self.eval(sched, j.saturating_sub(1), t)
    }

    /// Key at `t` using the edge with `a_i < t <= a_{i+1}`.
    pub(crate) fn key_left(&self, sched: &SweepSchedule, t: f64) -> f64 {
        let j = self.verts.partition_point(|v| v.a < t);
        self.eval(sched, j.saturating_sub(1), t)
    }

    /// Key at the arrival of `v`, using the edge that straddles `v` in the
    /// perturbed order.
    pub(crate) fn key_at_vertex(&self, sched: &SweepSchedule, v: &FrameVertex) -> f64 {
        let j = self.verts.partition_point(|u| u.precedes(v));
        let i = j.saturating_sub(1).min(self.verts.len() - 2);
        let (p, q) = (&self.verts[i], &self.verts[i + 1]);
        if p.a == q.a {
            let (lo, hi) = if p.k <= q.k { (p.k, q.k) } else { (q.k, p.k) };
            return v.k.clamp(lo, hi);
        }
        edge_key(sched, p, q, self.shapes[i], v.a)
    }

    /// Arrival times of interior vertices strictly inside `(lo, hi)`.
    pub(crate) fn breakpoints_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let start = self.verts.partition_point(|v| v.a <= lo);
        self.verts[start..].iter().map(|v| v.a).take_while(move |&a| a < hi)
    }
}

/// Splits every boundary of the environment into monotone chains for the
/// given schedule. Chains come in pairs sharing their first vertex, lower
/// chain first.
pub fn extract_monotone_chains(env: &Environment, sched: &SweepSchedule) -> Result<Vec<MonotoneChain>> {
    let loops = build_frame_loops(env, sched)?;
    Ok(chains_of_loops(&loops, sched))
}

pub(crate) fn chains_of_loops(loops: &[FrameLoop], sched: &SweepSchedule) -> Vec<MonotoneChain> {
    let mut chains = Vec::new();
    for l in loops {
        let n = l.verts.len();
        let at = |i: usize| &l.verts[i % n];
        let is_max = |i: usize| at(i + n - 1).precedes(at(i)) && at(i + 1).precedes(at(i));
        for i in 0..n {
            if !(at(i).precedes(at(i + n - 1)) && at(i).precedes(at(i + 1))) {
                continue;
            }
            let mut fwd = MonotoneChain {
                verts: vec![*at(i)],
                shapes: Vec::new(),
                sources: Vec::new(),
                side: ChainSide::Lower,
            };
            let mut j = i;
            while fwd.verts.len() == 1 || !is_max(j) {
                fwd.shapes.push(l.shapes[j % n]);
                fwd.sources.push(l.sources[j % n]);
                j += 1;
                fwd.verts.push(*at(j));
            }
            let mut bwd = MonotoneChain {
                verts: vec![*at(i)],
                shapes: Vec::new(),
                sources: Vec::new(),
                side: ChainSide::Lower,
            };
            let mut j = i + n;
            while bwd.verts.len() == 1 || !is_max(j) {
                bwd.shapes.push(l.shapes[(j - 1) % n]);
                bwd.sources.push(l.sources[(j - 1) % n]);
                j -= 1;
                bwd.verts.push(*at(j));
            }
            if fwd_is_upper(&fwd, &bwd, sched) {
                fwd.side = ChainSide::Upper;
                chains.push(bwd);
                chains.push(fwd);
            } else {
                bwd.side = ChainSide::Upper;
                chains.push(fwd);
                chains.push(bwd);
            }
        }
    }
    chains
}

fn fwd_is_upper(f: &MonotoneChain, b: &MonotoneChain, sched: &SweepSchedule) -> bool {
    let v = f.verts[0];
    let (fa, ba) = (f.verts[1].a - v.a, b.verts[1].a - v.a);
    // a first edge of constant arrival heads to larger keys
    if fa == 0.0 {
        return true;
    }
    if ba == 0.0 {
        return false;
    }
    let t = v.a + 0.5 * fa.min(ba);
    let (kf, kb) = (f.key_right(sched, t), b.key_right(sched, t));
    if kf != kb {
        return kf > kb;
    }
    f.verts[1].k > b.verts[1].k
}
