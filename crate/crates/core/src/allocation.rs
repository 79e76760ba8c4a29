//! Guard allocation: demands from the sensing model, minimum flow on the
//! node-split DAG, robot itineraries and their positions over time.

use std::sync::Arc;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::decomposition::{gen_bou_decomp, CellDag, DagNode};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::geometry::{Environment, Point, SweepSchedule};
use crate::sensing::{ModelSpec, Sensing, SensingModel};

/// Binary-search resolution on `ρ₀` for the fixed-fleet problem.
pub const DUAL_TOLERANCE: f64 = 1e-4;

/// Default number of uniform time samples in exported plans.
pub const DEFAULT_PLAN_SAMPLES: usize = 512;

/// A decomposition with guard counts per cell and robot flow per edge.
#[derive(Clone, Debug)]
pub struct AnnotatedDag {
    pub dag: CellDag,
    pub demands: Vec<u64>,
    pub guards: Vec<u64>,
    /// Flow on each edge, parallel to `dag.edges()`.
    pub edge_flows: Vec<u64>,
    pub total: u64,
}

fn split_network(dag: &CellDag, demands: &[u64]) -> (FlowNetwork, Vec<usize>, Vec<usize>) {
    let node_out = |d: DagNode| match d {
        DagNode::Source => 0,
        DagNode::Terminal => 1,
        DagNode::Cell(i) => 3 + 2 * i,
    };
    let node_in = |d: DagNode| match d {
        DagNode::Source => 0,
        DagNode::Terminal => 1,
        DagNode::Cell(i) => 2 + 2 * i,
    };
    let mut net = FlowNetwork::new(2 + 2 * dag.cells().len());
    let split: Vec<usize> = demands
        .iter()
        .enumerate()
        .map(|(i, &d)| net.add_arc(2 + 2 * i, 3 + 2 * i, None, d))
        .collect();
    let edges: Vec<usize> = dag
        .edges()
        .iter()
        .map(|&(u, v)| net.add_arc(node_out(u), node_in(v), None, 0))
        .collect();
    (net, split, edges)
}

/// Solves the minimum flow for explicit per-cell demands.
pub fn annotate(dag: CellDag, demands: Vec<u64>) -> Result<AnnotatedDag> {
    if demands.len() != dag.cells().len() {
        return Err(Error::Contract("one demand per cell is required".into()));
    }
    let (net, split, edges) = split_network(&dag, &demands);
    let res = net.min_flow_with_demands(0, 1)?;
    if !res.feasible {
        return Err(Error::Internal("cell DAG admits no flow meeting its demands".into()));
    }
    let guards = split.iter().map(|&a| res.flows[a]).collect();
    let edge_flows = edges.iter().map(|&a| res.flows[a]).collect();
    Ok(AnnotatedDag { dag, demands, guards, edge_flows, total: res.value })
}

pub fn demands_for(dag: &CellDag, sensing: &Sensing) -> Result<Vec<u64>> {
    dag.cells().iter().map(|c| sensing.zeta(c.lmax)).collect()
}

/// Node-split minimum flow with demand `ζ(ℓ_max)` on every cell.
pub fn min_sweep_dag(dag: CellDag, sensing: &Sensing) -> Result<AnnotatedDag> {
    let demands = demands_for(&dag, sensing)?;
    annotate(dag, demands)
}

/// Robot count only, without recording the flow.
fn robot_count(dag: &CellDag, demands: &[u64]) -> Result<u64> {
    let (net, _, _) = split_network(dag, demands);
    Ok(net.min_flow_with_demands(0, 1)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub cell: usize,
    pub enter: f64,
    pub exit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Itineraries {
    pub paths: Vec<Vec<Visit>>,
    /// Robots in each cell, ordered by frontier key.
    pub cell_robots: Vec<Vec<usize>>,
}

/// Decomposes the edge flow into one path per robot. Robots keep their
/// order along the frontier: a cell hands its lowest robots to its lowest
/// child, and a merged cell stacks its parents' robots bottom to top.
pub fn extract_itineraries(adag: &AnnotatedDag) -> Result<Itineraries> {
    let dag = &adag.dag;
    let n = dag.cells().len();
    let mut in_flow: Vec<Vec<(DagNode, u64)>> = vec![Vec::new(); n];
    let mut out_flow: Vec<Vec<(DagNode, u64)>> = vec![Vec::new(); n];
    for (&(u, v), &f) in dag.edges().iter().zip(&adag.edge_flows) {
        if let DagNode::Cell(i) = u {
            out_flow[i].push((v, f));
        }
        if let DagNode::Cell(j) = v {
            in_flow[j].push((u, f));
        }
    }
    let birth_key = |d: DagNode| match d {
        DagNode::Cell(c) => dag.keys_at(c, dag.cells()[c].birth).0,
        DagNode::Terminal => f64::INFINITY,
        DagNode::Source => f64::NEG_INFINITY,
    };
    let death_key = |d: DagNode| match d {
        DagNode::Cell(c) => dag.keys_at(c, dag.cells()[c].death).0,
        _ => f64::NEG_INFINITY,
    };
    for outs in &mut out_flow {
        outs.sort_by(|a, b| birth_key(a.0).total_cmp(&birth_key(b.0)));
    }
    // handed[c][k]: robots passed from cell c to its k-th child in order
    let mut handed: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let mut cell_robots: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut paths: Vec<Vec<Visit>> = Vec::new();
    for c in 0..n {
        let mut parents = in_flow[c].clone();
        parents.sort_by(|a, b| death_key(a.0).total_cmp(&death_key(b.0)));
        let mut robots = Vec::with_capacity(adag.guards[c] as usize);
        for (p, f) in parents {
            match p {
                DagNode::Source => {
                    for _ in 0..f {
                        robots.push(paths.len());
                        paths.push(Vec::new());
                    }
                }
                DagNode::Cell(pc) => {
                    let k = out_flow[pc]
                        .iter()
                        .position(|&(d, _)| d == DagNode::Cell(c))
                        .ok_or_else(|| Error::Internal("edge missing from parent".into()))?;
                    robots.extend(std::mem::take(&mut handed[pc][k]));
                }
                DagNode::Terminal => return Err(Error::Internal("terminal has no out-edges".into())),
            }
        }
        let out_total: u64 = out_flow[c].iter().map(|&(_, f)| f).sum();
        if robots.len() as u64 != adag.guards[c] || out_total != adag.guards[c] {
            return Err(Error::Internal(format!(
                "flow is not conserved at cell {c}: in {}, guards {}, out {out_total}",
                robots.len(),
                adag.guards[c]
            )));
        }
        let cell = &dag.cells()[c];
        for &r in &robots {
            paths[r].push(Visit { cell: c, enter: cell.birth, exit: cell.death });
        }
        let mut rest = &robots[..];
        handed[c] = out_flow[c]
            .iter()
            .map(|&(_, f)| {
                let (head, tail) = rest.split_at(f as usize);
                rest = tail;
                head.to_vec()
            })
            .collect();
        cell_robots[c] = robots;
    }
    if paths.len() as u64 != adag.total {
        return Err(Error::Internal("robot count differs from the flow value".into()));
    }
    Ok(Itineraries { paths, cell_robots })
}

/// An executable plan: which robots sweep which cell when, and where each
/// sits on the frontier.
#[derive(Clone, Debug)]
pub struct AllocationPlan {
    adag: Arc<AnnotatedDag>,
    sensing: Sensing,
    itineraries: Vec<Vec<Visit>>,
    cell_robots: Vec<Vec<usize>>,
    /// rank of the robot in `cell_robots[visit.cell]`, per visit
    ranks: Vec<Vec<usize>>,
    disabled: Vec<bool>,
}

/// Builds the plan; positions are evaluated on demand from the cell
/// geometry, spreading each cell's guards over its current frontier segment.
pub fn build_trajectories(itins: Itineraries, adag: AnnotatedDag, sensing: Sensing) -> Result<AllocationPlan> {
    AllocationPlan::from_parts(Arc::new(adag), sensing, itins.paths, itins.cell_robots)
}

impl AllocationPlan {
    pub fn from_parts(
        adag: Arc<AnnotatedDag>,
        sensing: Sensing,
        itineraries: Vec<Vec<Visit>>,
        cell_robots: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = adag.dag.cells().len();
        if cell_robots.len() != n {
            return Err(Error::Contract(format!("plan lists {} cells, decomposition has {n}", cell_robots.len())));
        }
        for (c, robots) in cell_robots.iter().enumerate() {
            if robots.len() as u64 != adag.guards[c] {
                return Err(Error::Contract(format!("cell {c} holds {} robots, needs {}", robots.len(), adag.guards[c])));
            }
        }
        let mut ranks = Vec::with_capacity(itineraries.len());
        for (r, path) in itineraries.iter().enumerate() {
            let mut rr = Vec::with_capacity(path.len());
            for v in path {
                let rank = cell_robots
                    .get(v.cell)
                    .and_then(|rs| rs.iter().position(|&x| x == r))
                    .ok_or_else(|| Error::Contract(format!("robot {r} is not listed in cell {}", v.cell)))?;
                rr.push(rank);
            }
            if path.windows(2).any(|w| w[0].exit != w[1].enter) {
                return Err(Error::Contract(format!("itinerary of robot {r} is not time-contiguous")));
            }
            ranks.push(rr);
        }
        let disabled = vec![false; itineraries.len()];
        Ok(AllocationPlan { adag, sensing, itineraries, cell_robots, ranks, disabled })
    }

    pub fn robot_count(&self) -> usize {
        self.itineraries.len()
    }

    pub fn rho0(&self) -> f64 {
        self.sensing.rho0()
    }

    pub fn sensing(&self) -> &Sensing {
        &self.sensing
    }

    pub fn annotated(&self) -> &AnnotatedDag {
        &self.adag
    }

    pub fn dag(&self) -> &CellDag {
        &self.adag.dag
    }

    pub fn itineraries(&self) -> &[Vec<Visit>] {
        &self.itineraries
    }

    pub fn cell_robots(&self, cell: usize) -> &[usize] {
        &self.cell_robots[cell]
    }

    pub fn is_active(&self, robot: usize) -> bool {
        !self.disabled[robot]
    }

    /// The plan with one robot switched off; every other robot keeps its
    /// trajectory.
    pub fn without_robot(&self, robot: usize) -> AllocationPlan {
        let mut p = self.clone();
        p.disabled[robot] = true;
        p.itineraries[robot].clear();
        p.ranks[robot].clear();
        p
    }

    fn visit_at(&self, robot: usize, t: f64) -> Option<(usize, usize)> {
        let path = &self.itineraries[robot];
        let i = path.partition_point(|v| v.exit <= t);
        match path.get(i) {
            Some(v) if v.enter <= t => Some((i, v.cell)),
            // the final instant of the last visit belongs to it
            _ if i > 0 && path[i - 1].exit == t => Some((i - 1, path[i - 1].cell)),
            _ => None,
        }
    }

    /// Cell and frontier key of a robot at `t`, when it is working.
    pub fn frontier_position(&self, robot: usize, t: f64) -> Option<(usize, f64)> {
        if self.disabled[robot] {
            return None;
        }
        let (i, cell) = self.visit_at(robot, t)?;
        let rank = self.ranks[robot][i];
        Some((cell, self.key_of_rank(cell, rank, t)))
    }

    /// Keys of the robots assigned to `cell`, in frontier order, at `t`;
    /// `None` for robots switched off or not in the cell at that time.
    pub fn cell_keys(&self, cell: usize, t: f64) -> Vec<Option<f64>> {
        let dag = &self.adag.dag;
        let sched = dag.schedule();
        let (lo, hi) = dag.keys_at(cell, t);
        let len = sched.length_unchecked(t, (hi - lo).max(0.0));
        let mut offs = Vec::new();
        self.sensing.fill_offsets(len, self.adag.guards[cell] as usize, &mut offs);
        self.cell_robots[cell]
            .iter()
            .zip(offs)
            .map(|(&r, o)| {
                let here = !self.disabled[r] && self.visit_at(r, t).is_some_and(|(_, c)| c == cell);
                here.then(|| (lo + sched.key_span(t, o)).min(hi))
            })
            .collect()
    }

    fn key_of_rank(&self, cell: usize, rank: usize, t: f64) -> f64 {
        let dag = &self.adag.dag;
        let (lo, hi) = dag.keys_at(cell, t);
        let sched = dag.schedule();
        let len = sched.length_unchecked(t, (hi - lo).max(0.0));
        let mut offs = Vec::new();
        self.sensing.fill_offsets(len, self.adag.guards[cell] as usize, &mut offs);
        (lo + sched.key_span(t, offs[rank])).min(hi)
    }

    /// Workspace position of a robot at `t`.
    pub fn position(&self, robot: usize, t: f64) -> Option<Point> {
        let (_, key) = self.frontier_position(robot, t)?;
        Some(self.adag.dag.schedule().point_at(t, key))
    }

    /// Largest jump of any robot when it passes from one cell to the next.
    pub fn max_transition_jump(&self) -> f64 {
        let dag = &self.adag.dag;
        let sched = dag.schedule();
        let mut worst = 0.0f64;
        for (r, path) in self.itineraries.iter().enumerate() {
            for (i, w) in path.windows(2).enumerate() {
                let t = w[0].exit;
                let a = sched.point_at(t, self.key_of_rank(w[0].cell, self.ranks[r][i], t));
                let b_key = {
                    let (lo, hi) = dag.keys_at(w[1].cell, t);
                    let len = sched.length_unchecked(t, (hi - lo).max(0.0));
                    let mut offs = Vec::new();
                    self.sensing.fill_offsets(len, self.adag.guards[w[1].cell] as usize, &mut offs);
                    lo + sched.key_span(t, offs[self.ranks[r][i + 1]])
                };
                worst = worst.max(a.dist(sched.point_at(t, b_key)));
            }
        }
        worst
    }

    /// Uniform sample times over the sweep plus every event time.
    pub fn sample_times(&self, uniform: usize) -> Vec<f64> {
        let dag = &self.adag.dag;
        let cells = dag.cells();
        if cells.is_empty() {
            return Vec::new();
        }
        let t0 = cells.iter().map(|c| c.birth).fold(f64::INFINITY, f64::min);
        let t1 = cells.iter().map(|c| c.death).fold(f64::NEG_INFINITY, f64::max);
        let mut ts: Vec<f64> = (0..uniform.max(2))
            .map(|i| t0 + (t1 - t0) * i as f64 / (uniform.max(2) - 1) as f64)
            .collect();
        ts.extend(dag.events().iter().map(|e| e.time));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn to_json(&self, uniform_samples: usize) -> String {
        let samples = self
            .sample_times(uniform_samples)
            .into_iter()
            .map(|t| PlanSample { t, positions: (0..self.robot_count()).map(|r| self.position(r, t)).collect() })
            .collect();
        let doc = PlanJson {
            robots: self.robot_count(),
            rho0: self.rho0(),
            model: self.sensing.model().spec(),
            itineraries: self.itineraries.clone(),
            cells: self
                .cell_robots
                .iter()
                .enumerate()
                .map(|(id, robots)| PlanCell { id, guards: self.adag.guards[id], robots: robots.clone() })
                .collect(),
            samples,
        };
        serde_json::to_string(&doc).expect("plan serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanSample {
    pub t: f64,
    pub positions: Vec<Option<Point>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanCell {
    pub id: usize,
    pub guards: u64,
    pub robots: Vec<usize>,
}

/// Serialized plan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanJson {
    pub robots: usize,
    pub rho0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    pub itineraries: Vec<Vec<Visit>>,
    #[serde(default)]
    pub cells: Vec<PlanCell>,
    #[serde(default)]
    pub samples: Vec<PlanSample>,
}

impl PlanJson {
    /// Rebuilds an executable plan on a fresh decomposition of the same
    /// environment and schedule.
    pub fn into_plan(self, dag: CellDag, model: &SensingModel) -> Result<AllocationPlan> {
        let sensing = model.requirement(self.rho0)?;
        let n = dag.cells().len();
        if self.cells.len() != n {
            return Err(Error::Contract(format!("plan lists {} cells, decomposition has {n}", self.cells.len())));
        }
        let demands = demands_for(&dag, &sensing)?;
        let guards: Vec<u64> = self.cells.iter().map(|c| c.guards).collect();
        let mut edge_flows = vec![0; dag.edges().len()];
        for path in &self.itineraries {
            let mut prev = DagNode::Source;
            for v in path.iter().map(|v| DagNode::Cell(v.cell)).chain([DagNode::Terminal]) {
                if let Some(e) = dag.edges().iter().position(|&e| e == (prev, v)) {
                    edge_flows[e] += 1;
                }
                prev = v;
            }
        }
        let adag = AnnotatedDag { dag, demands, guards, edge_flows, total: self.robots as u64 };
        let cell_robots = self.cells.into_iter().map(|c| c.robots).collect();
        AllocationPlan::from_parts(Arc::new(adag), sensing, self.itineraries, cell_robots)
    }
}

/// Full pipeline: decomposition, demands, minimum flow and plan.
pub fn min_sweep(
    sched: &SweepSchedule,
    env: &Environment,
    model: &SensingModel,
    rho0: f64,
) -> Result<AllocationPlan> {
    let sensing = model.requirement(rho0)?;
    let dag = gen_bou_decomp(env, sched)?;
    debug!("{} cells, {} edges", dag.cells().len(), dag.edges().len());
    plan_on(dag, sensing)
}

/// Allocation on an existing decomposition.
pub fn plan_on(dag: CellDag, sensing: Sensing) -> Result<AllocationPlan> {
    let adag = min_sweep_dag(dag, &sensing)?;
    let itins = extract_itineraries(&adag)?;
    let plan = build_trajectories(itins, adag, sensing)?;
    info!("{} robots", plan.robot_count());
    Ok(plan)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DualResult {
    pub best_rho0: f64,
    pub robot_count: u64,
    pub iterations: usize,
}

/// Robots needed at `rho0` on a fixed decomposition; `None` when no finite
/// fleet suffices.
pub fn count_at(dag: &CellDag, model: &SensingModel, rho0: f64) -> Result<Option<u64>> {
    let sensing = match model.requirement(rho0) {
        Ok(s) => s,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match demands_for(dag, &sensing) {
        Ok(d) => robot_count(dag, &d).map(Some),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Best guarantee `ρ₀` reachable with `fleet` robots, by bisection.
pub fn maximize_coverage(
    sched: &SweepSchedule,
    env: &Environment,
    model: &SensingModel,
    fleet: u64,
) -> Result<DualResult> {
    let dag = gen_bou_decomp(env, sched)?;
    maximize_on(&dag, model, fleet)
}

pub fn maximize_on(dag: &CellDag, model: &SensingModel, fleet: u64) -> Result<DualResult> {
    if fleet == 0 {
        return Err(Error::Contract("fleet must hold at least one robot".into()));
    }
    let structural = robot_count(dag, &vec![1; dag.cells().len()])?;
    if fleet < structural {
        return Err(Error::Infeasible(format!(
            "the frontier splits into {structural} pieces at once; {fleet} robots cannot cover it at any ρ₀"
        )));
    }
    let fits = |rho: f64| -> Result<bool> { Ok(count_at(dag, model, rho)?.is_some_and(|n| n <= fleet)) };
    let top = model.rho(0.0);
    let mut iterations = 0;
    if fits(top)? {
        let n = count_at(dag, model, top)?.expect("fits");
        return Ok(DualResult { best_rho0: top, robot_count: n, iterations: 1 });
    }
    let mut lo = DUAL_TOLERANCE.min(top / 2.0);
    while !fits(lo)? {
        iterations += 1;
        lo /= 2.0;
        if lo < 1e-300 {
            return Err(Error::Infeasible(format!("no ρ₀ > 0 fits a fleet of {fleet}")));
        }
    }
    let mut hi = top;
    while hi - lo > DUAL_TOLERANCE {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n = count_at(dag, model, lo)?.expect("lo fits");
    Ok(DualResult { best_rho0: lo, robot_count: n, iterations })
}
