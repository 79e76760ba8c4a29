//! Generalized boustrophedon decomposition of the free space into cells
//! bounded by pairs of monotone chains, organized as a DAG from a source
//! `s` to a terminal `t`.

use std::collections::{BTreeSet, HashMap};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    build_frame_loops, Environment, FrameVertex, MonotoneChain, Point, SweepSchedule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    ChainPairStart,
    ChainPairEnd,
}

#[derive(Clone, Copy, Debug)]
pub struct SweepEvent {
    pub time: f64,
    pub vertex: Point,
    pub kind: EventKind,
    /// Lower chain first for starts.
    pub chains: [usize; 2],
    pub(crate) at: FrameVertex,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub id: usize,
    pub birth: f64,
    pub death: f64,
    pub lower: usize,
    pub upper: usize,
    pub lmax: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DagNode {
    Source,
    Cell(usize),
    Terminal,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Cell(usize),
    Named(String),
}

impl Serialize for DagNode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            DagNode::Source => NodeJson::Named("s".into()),
            DagNode::Terminal => NodeJson::Named("t".into()),
            DagNode::Cell(i) => NodeJson::Cell(i),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DagNode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NodeJson::deserialize(d)? {
            NodeJson::Cell(i) => Ok(DagNode::Cell(i)),
            NodeJson::Named(n) if n == "s" => Ok(DagNode::Source),
            NodeJson::Named(n) if n == "t" => Ok(DagNode::Terminal),
            NodeJson::Named(n) => Err(serde::de::Error::custom(format!("unknown node {n:?}"))),
        }
    }
}

/// Decomposition result. Cells are numbered in creation order, which is a
/// topological order of the DAG and sorted by birth time.
#[derive(Clone, Debug)]
pub struct CellDag {
    schedule: SweepSchedule,
    chains: Vec<MonotoneChain>,
    events: Vec<SweepEvent>,
    cells: Vec<Cell>,
    edges: Vec<(DagNode, DagNode)>,
    parents: Vec<Vec<DagNode>>,
    children: Vec<Vec<DagNode>>,
    locator: Locator,
}

/// Groups chains into start and end events sorted in sweep order.
pub fn build_events(chains: &[MonotoneChain]) -> Result<Vec<SweepEvent>> {
    if !chains.len().is_multiple_of(2) {
        return Err(Error::Internal("chains do not pair up at their starts".into()));
    }
    let mut events = Vec::with_capacity(chains.len());
    for pair in 0..chains.len() / 2 {
        let (lo, up) = (2 * pair, 2 * pair + 1);
        let v = *chains[lo].first();
        let w = chains[up].first();
        if (v.loop_id, v.idx) != (w.loop_id, w.idx) {
            return Err(Error::Internal("chain pair does not share its start".into()));
        }
        events.push(SweepEvent { time: v.a, vertex: v.p, kind: EventKind::ChainPairStart, chains: [lo, up], at: v });
    }
    let mut ends: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (i, c) in chains.iter().enumerate() {
        let v = c.last();
        ends.entry((v.loop_id, v.idx)).or_default().push(i);
    }
    for ids in ends.into_values() {
        let [a, b] = ids[..] else {
            return Err(Error::Internal(format!("{} chains end at one vertex", ids.len())));
        };
        let v = *chains[a].last();
        events.push(SweepEvent { time: v.a, vertex: v.p, kind: EventKind::ChainPairEnd, chains: [a.min(b), a.max(b)], at: v });
    }
    events.sort_by(|x, y| x.at.order(&y.at));
    Ok(events)
}

struct RawCell {
    birth: FrameVertex,
    death: Option<FrameVertex>,
    lower: usize,
    upper: usize,
}

/// Runs the sweep and builds the cell DAG.
pub fn gen_bou_decomp(env: &Environment, sched: &SweepSchedule) -> Result<CellDag> {
    let loops = build_frame_loops(env, sched)?;
    let chains = crate::geometry::chains_of_loops(&loops, sched);
    let events = build_events(&chains)?;

    let mut raw: Vec<RawCell> = Vec::new();
    let mut raw_edges: Vec<(DagNode, DagNode)> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut gaps: Vec<usize> = Vec::new();
    let key = |c: usize, v: &FrameVertex| chains[c].key_at_vertex(sched, v);

    for ev in &events {
        let v = ev.at;
        match ev.kind {
            EventKind::ChainPairStart => {
                let [lo, up] = ev.chains;
                let idx = active.partition_point(|&c| key(c, &v) < v.k);
                let below_ok = idx == 0 || key(active[idx - 1], &v) <= v.k;
                let above_ok = idx == active.len() || key(active[idx], &v) >= v.k;
                if !(below_ok && above_ok) {
                    return Err(Error::SweepOrder { reason: "active chains are out of order".into(), at: v.p });
                }
                active.splice(idx..idx, [lo, up]);
                if idx % 2 == 0 {
                    let c = raw.len();
                    raw.push(RawCell { birth: v, death: None, lower: lo, upper: up });
                    raw_edges.push((DagNode::Source, DagNode::Cell(c)));
                    gaps.insert(idx / 2, c);
                } else {
                    let g = idx / 2;
                    let x = gaps[g];
                    raw[x].death = Some(v);
                    let (x1, x2) = (raw.len(), raw.len() + 1);
                    raw.push(RawCell { birth: v, death: None, lower: raw[x].lower, upper: lo });
                    raw.push(RawCell { birth: v, death: None, lower: up, upper: raw[x].upper });
                    raw_edges.push((DagNode::Cell(x), DagNode::Cell(x1)));
                    raw_edges.push((DagNode::Cell(x), DagNode::Cell(x2)));
                    gaps[g] = x1;
                    gaps.insert(g + 1, x2);
                }
            }
            EventKind::ChainPairEnd => {
                let [c1, c2] = ev.chains;
                let p = active.partition_point(|&c| key(c, &v) < v.k);
                let window = p.saturating_sub(2)..(p + 3).min(active.len());
                let find = |c: usize| {
                    active[window.clone()]
                        .iter()
                        .position(|&x| x == c)
                        .map(|i| i + window.start)
                        .or_else(|| active.iter().position(|&x| x == c))
                };
                let (Some(i1), Some(i2)) = (find(c1), find(c2)) else {
                    return Err(Error::Internal("ending chain is not active".into()));
                };
                if i1.abs_diff(i2) != 1 {
                    return Err(Error::SweepOrder {
                        reason: "chains meeting at a vertex are not adjacent on the frontier".into(),
                        at: v.p,
                    });
                }
                let j = i1.min(i2);
                if j % 2 == 0 {
                    let g = j / 2;
                    let x = gaps.remove(g);
                    raw[x].death = Some(v);
                    raw_edges.push((DagNode::Cell(x), DagNode::Terminal));
                } else {
                    let g = j / 2;
                    let (x, y) = (gaps[g], gaps[g + 1]);
                    raw[x].death = Some(v);
                    raw[y].death = Some(v);
                    let z = raw.len();
                    raw.push(RawCell { birth: v, death: None, lower: raw[x].lower, upper: raw[y].upper });
                    raw_edges.push((DagNode::Cell(x), DagNode::Cell(z)));
                    raw_edges.push((DagNode::Cell(y), DagNode::Cell(z)));
                    gaps[g] = z;
                    gaps.remove(g + 1);
                }
                active.drain(j..j + 2);
            }
        }
    }
    if !active.is_empty() || raw.iter().any(|c| c.death.is_none()) {
        return Err(Error::Internal("sweep finished with open cells".into()));
    }

    // Contract cells of zero duration.
    let n = raw.len();
    let mut parents: Vec<BTreeSet<DagNode>> = vec![BTreeSet::new(); n];
    let mut children: Vec<BTreeSet<DagNode>> = vec![BTreeSet::new(); n];
    let mut source_children = BTreeSet::new();
    for &(u, w) in &raw_edges {
        match u {
            DagNode::Cell(i) => children[i].insert(w),
            _ => source_children.insert(w),
        };
        if let DagNode::Cell(j) = w {
            parents[j].insert(u);
        }
    }
    let mut keep = vec![true; n];
    for z in 0..n {
        let death = raw[z].death.expect("closed above");
        if death.a > raw[z].birth.a {
            continue;
        }
        debug!("dropping zero-width cell born at {:?}", raw[z].birth.p);
        keep[z] = false;
        let ps: Vec<DagNode> = std::mem::take(&mut parents[z]).into_iter().collect();
        let cs: Vec<DagNode> = std::mem::take(&mut children[z]).into_iter().collect();
        for &p in &ps {
            let out = match p {
                DagNode::Cell(i) => &mut children[i],
                _ => &mut source_children,
            };
            out.remove(&DagNode::Cell(z));
            out.extend(cs.iter().copied());
        }
        for &c in &cs {
            if let DagNode::Cell(j) = c {
                parents[j].remove(&DagNode::Cell(z));
                parents[j].extend(ps.iter().copied());
            }
        }
    }
    let mut new_id = vec![usize::MAX; n];
    let mut cells = Vec::new();
    for (i, rc) in raw.iter().enumerate().filter(|(i, _)| keep[*i]) {
        new_id[i] = cells.len();
        cells.push(Cell {
            id: cells.len(),
            birth: rc.birth.a,
            death: rc.death.expect("closed above").a,
            lower: rc.lower,
            upper: rc.upper,
            lmax: 0.0,
        });
    }
    let remap = |d: DagNode| match d {
        DagNode::Cell(i) => DagNode::Cell(new_id[i]),
        other => other,
    };
    let mut edges: Vec<(DagNode, DagNode)> = Vec::new();
    for &w in &source_children {
        if w != DagNode::Terminal {
            edges.push((DagNode::Source, remap(w)));
        }
    }
    for i in (0..n).filter(|&i| keep[i]) {
        for &w in &children[i] {
            edges.push((DagNode::Cell(new_id[i]), remap(w)));
        }
    }
    edges.sort();
    edges.dedup();

    let m = cells.len();
    let mut dag_parents = vec![Vec::new(); m];
    let mut dag_children = vec![Vec::new(); m];
    for &(u, w) in &edges {
        if let DagNode::Cell(i) = u {
            dag_children[i].push(w);
        }
        if let DagNode::Cell(j) = w {
            dag_parents[j].push(u);
        }
    }
    let mut dag = CellDag {
        schedule: *sched,
        chains,
        events,
        cells,
        edges,
        parents: dag_parents,
        children: dag_children,
        locator: Locator::default(),
    };
    for i in 0..m {
        dag.cells[i].lmax = dag.compute_lmax(i);
    }
    dag.locator = Locator::build(&dag.cells);
    Ok(dag)
}

const POLAR_SUBDIVISIONS: usize = 64;
const GOLDEN_REL_TOL: f64 = 1e-9;
const AREA_PANELS: usize = 16;

impl CellDag {
    pub fn schedule(&self) -> &SweepSchedule {
        &self.schedule
    }

    pub fn chains(&self) -> &[MonotoneChain] {
        &self.chains
    }

    pub fn events(&self) -> &[SweepEvent] {
        &self.events
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edges(&self) -> &[(DagNode, DagNode)] {
        &self.edges
    }

    pub fn parents(&self, cell: usize) -> &[DagNode] {
        &self.parents[cell]
    }

    pub fn children(&self, cell: usize) -> &[DagNode] {
        &self.children[cell]
    }

    /// Bounding keys of a cell at time `t`. Right limits are used except at
    /// (or past) the cell's death.
    pub fn keys_at(&self, cell: usize, t: f64) -> (f64, f64) {
        let c = &self.cells[cell];
        let (lo, up) = (&self.chains[c.lower], &self.chains[c.upper]);
        if t >= c.death {
            (lo.key_left(&self.schedule, c.death), up.key_left(&self.schedule, c.death))
        } else {
            let t = t.max(c.birth);
            (lo.key_right(&self.schedule, t), up.key_right(&self.schedule, t))
        }
    }

    fn keys_left(&self, cell: usize, t: f64) -> (f64, f64) {
        let c = &self.cells[cell];
        (self.chains[c.lower].key_left(&self.schedule, t), self.chains[c.upper].key_left(&self.schedule, t))
    }

    /// Frontier length inside the cell at time `t`.
    pub fn length_at(&self, cell: usize, t: f64) -> f64 {
        let (lo, hi) = self.keys_at(cell, t);
        self.schedule.length_unchecked(t, (hi - lo).max(0.0))
    }

    fn length_left(&self, cell: usize, t: f64) -> f64 {
        let (lo, hi) = self.keys_left(cell, t);
        self.schedule.length_unchecked(t, (hi - lo).max(0.0))
    }

    /// Sorted distinct times where a bounding chain of the cell bends,
    /// including birth and death.
    pub fn breakpoints(&self, cell: usize) -> Vec<f64> {
        let c = &self.cells[cell];
        let mut ts = vec![c.birth, c.death];
        for chain in [c.lower, c.upper] {
            ts.extend(self.chains[chain].breakpoints_in(c.birth, c.death));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// `(time, length)` samples of the frontier length profile: both
    /// one-sided limits at every breakpoint, plus interior samples for the
    /// curved polar pieces.
    pub fn length_profile(&self, cell: usize) -> Vec<(f64, f64)> {
        let ts = self.breakpoints(cell);
        let mut out = Vec::new();
        for (i, w) in ts.windows(2).enumerate() {
            if i == 0 {
                out.push((w[0], self.length_at(cell, w[0])));
            }
            if self.schedule.is_polar() {
                for s in 1..POLAR_SUBDIVISIONS {
                    let t = w[0] + (w[1] - w[0]) * s as f64 / POLAR_SUBDIVISIONS as f64;
                    out.push((t, self.length_at(cell, t)));
                }
            }
            out.push((w[1], self.length_left(cell, w[1])));
            if w[1] < self.cells[cell].death {
                out.push((w[1], self.length_at(cell, w[1])));
            }
        }
        out
    }

    fn compute_lmax(&self, cell: usize) -> f64 {
        let ts = self.breakpoints(cell);
        let mut best = 0.0f64;
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1]);
            best = best.max(self.length_at(cell, a)).max(self.length_left(cell, b));
            if !self.schedule.is_polar() {
                continue;
            }
            let f = |t: f64| self.length_at(cell, t.clamp(a, b));
            let h = (b - a) / POLAR_SUBDIVISIONS as f64;
            let (mut arg, mut val) = (0, f64::NEG_INFINITY);
            for s in 0..=POLAR_SUBDIVISIONS {
                let v = f(a + h * s as f64);
                if v > val {
                    val = v;
                    arg = s;
                }
            }
            best = best.max(val);
            let lo = a + h * arg.saturating_sub(1) as f64;
            let hi = (a + h * (arg + 1) as f64).min(b);
            best = best.max(golden_max(f, lo, hi));
        }
        best
    }

    /// Cell area by composite Simpson integration of the frontier profile.
    pub fn cell_area(&self, cell: usize) -> f64 {
        let ts = self.breakpoints(cell);
        let radial = matches!(self.schedule, SweepSchedule::Radial { .. });
        let panels = if self.schedule.is_polar() { AREA_PANELS } else { 1 };
        let f = |t: f64, left: bool| {
            let (lo, hi) = if left { self.keys_left(cell, t) } else { self.keys_at(cell, t) };
            if radial {
                0.5 * (hi * hi - lo * lo)
            } else {
                self.schedule.length_unchecked(t, hi - lo)
            }
        };
        let mut total = 0.0;
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let (x0, x1) = (a + h * p as f64, a + h * (p + 1) as f64);
                let f0 = f(x0, false);
                let f1 = if p + 1 == panels { f(b, true) } else { f(x1, false) };
                total += h / 6.0 * (f0 + 4.0 * f(0.5 * (x0 + x1), false) + f1);
            }
        }
        total
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Cell whose closure contains `p`, if any.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let (a, k) = self.schedule.frame(p).ok()?;
        self.locate_frame(a, k)
    }

    pub(crate) fn locate_frame(&self, a: f64, k: f64) -> Option<usize> {
        let tol = 1e-9 * (1.0 + k.abs());
        let mut fallback = None;
        for &c in self.locator.candidates(a) {
            let cell = &self.cells[c];
            if a < cell.birth || a > cell.death {
                continue;
            }
            let (lo, hi) = self.keys_at(c, a);
            if k >= lo && k <= hi {
                return Some(c);
            }
            if fallback.is_none() && k >= lo - tol && k <= hi + tol {
                fallback = Some(c);
            }
        }
        fallback
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct CellJson {
            id: usize,
            birth: f64,
            death: f64,
            lmax: f64,
        }
        #[derive(Serialize)]
        struct DagJson<'a> {
            cells: Vec<CellJson>,
            edges: &'a [(DagNode, DagNode)],
            source: &'static str,
            terminal: &'static str,
        }
        let j = DagJson {
            cells: self
                .cells
                .iter()
                .map(|c| CellJson { id: c.id, birth: c.birth, death: c.death, lmax: c.lmax })
                .collect(),
            edges: &self.edges,
            source: "s",
            terminal: "t",
        };
        serde_json::to_string_pretty(&j).expect("dag serializes")
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let scale = a.abs().max(b.abs()).max(1e-300);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..200 {
        if b - a <= GOLDEN_REL_TOL * scale {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// Time buckets over cell lifetimes for point location.
#[derive(Clone, Debug, Default)]
struct Locator {
    t0: f64,
    width: f64,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn build(cells: &[Cell]) -> Locator {
        if cells.is_empty() {
            return Locator::default();
        }
        let t0 = cells.iter().map(|c| c.birth).fold(f64::INFINITY, f64::min);
        let t1 = cells.iter().map(|c| c.death).fold(f64::NEG_INFINITY, f64::max);
        let n = cells.len().max(1);
        let width = ((t1 - t0) / n as f64).max(f64::MIN_POSITIVE);
        let mut buckets = vec![Vec::new(); n];
        let mut loc = Locator { t0, width, buckets: Vec::new() };
        for c in cells {
            let (i, j) = (loc.bucket(c.birth, n), loc.bucket(c.death, n));
            for b in &mut buckets[i..=j] {
                b.push(c.id);
            }
        }
        loc.buckets = buckets;
        loc
    }

    fn bucket(&self, t: f64, n: usize) -> usize {
        (((t - self.t0) / self.width).floor().max(0.0) as usize).min(n - 1)
    }

    fn candidates(&self, t: f64) -> &[usize] {
        if self.buckets.is_empty() {
            return &[];
        }
        &self.buckets[self.bucket(t, self.buckets.len())]
    }
}
