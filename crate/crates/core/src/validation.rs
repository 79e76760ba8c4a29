//! Independent checks: Monte-Carlo coverage of a plan, and brute-force
//! oracles for guard counts and minimum flows.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::AllocationPlan;
use crate::decomposition::{CellDag, DagNode};
use crate::error::{Error, Result};
use crate::geometry::{Environment, FreeSpaceIndex, Point, SweepSchedule};
use crate::sensing::SensingModel;

/// Slack allowed on the coverage guarantee.
pub const COVERAGE_TOLERANCE: f64 = 1e-6;

const CHUNK: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub samples: usize,
    /// Points swept with probability below `ρ₀`.
    pub violations: usize,
    /// Free points that fall in no cell.
    pub unlocated: usize,
    pub min_coverage: f64,
    pub worst_point: Option<Point>,
    pub rho0: f64,
    pub max_transition_jump: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.unlocated == 0
    }
}

#[derive(Clone, Copy)]
struct Partial {
    samples: usize,
    violations: usize,
    unlocated: usize,
    min: f64,
    worst: Option<Point>,
}

impl Partial {
    fn empty() -> Self {
        Partial { samples: 0, violations: 0, unlocated: 0, min: f64::INFINITY, worst: None }
    }

    fn merge(self, o: Partial) -> Partial {
        let (min, worst) = if o.min < self.min { (o.min, o.worst) } else { (self.min, self.worst) };
        Partial {
            samples: self.samples + o.samples,
            violations: self.violations + o.violations,
            unlocated: self.unlocated + o.unlocated,
            min,
            worst,
        }
    }
}

/// Samples free points uniformly and checks that each one is detected with
/// probability at least `ρ₀` when the frontier reaches it, using the robots
/// the plan puts next to it on its frontier segment.
pub fn validate_plan(env: &Environment, plan: &AllocationPlan, samples: usize, seed: u64) -> Result<ValidationReport> {
    let bb = env.bbox();
    let free = FreeSpaceIndex::new(env);
    let chunks = samples.div_ceil(CHUNK);
    let total = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (ci as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let want = CHUNK.min(samples - ci * CHUNK);
            let mut part = Partial::empty();
            let mut drawn = 0;
            while drawn < want {
                let p = Point::new(rng.random_range(bb.min.x..=bb.max.x), rng.random_range(bb.min.y..=bb.max.y));
                if !free.contains(p) {
                    continue;
                }
                drawn += 1;
                part = part.merge(check_point(plan, p));
            }
            part
        })
        .reduce(Partial::empty, Partial::merge);
    Ok(ValidationReport {
        samples: total.samples,
        violations: total.violations,
        unlocated: total.unlocated,
        min_coverage: total.min,
        worst_point: total.worst,
        rho0: plan.rho0(),
        max_transition_jump: plan.max_transition_jump(),
    })
}

fn check_point(plan: &AllocationPlan, p: Point) -> Partial {
    let dag = plan.dag();
    let sched = dag.schedule();
    let mut part = Partial { samples: 1, ..Partial::empty() };
    // the polar center itself has no frame
    let Ok((a, k)) = sched.frame(p) else {
        part.samples = 0;
        return part;
    };
    let Some(cell) = dag.locate_frame(a, k) else {
        part.unlocated = 1;
        return part;
    };
    let robots = plan.cell_robots(cell);
    let keys = plan.cell_keys(cell, a);
    // nearest working robot on each side, confirmed from its workspace position
    let nearest = |ranks: &mut dyn Iterator<Item = usize>| -> f64 {
        for j in ranks {
            let Some(plan_key) = keys[j] else { continue };
            let key = plan.position(robots[j], a).and_then(|q| robot_key(sched, q, a, k)).unwrap_or(plan_key);
            return sched.length_unchecked(a, (key - k).abs());
        }
        f64::INFINITY
    };
    let split = keys.iter().position(|x| x.is_some_and(|x| x > k)).unwrap_or(keys.len());
    let below = nearest(&mut (0..split).rev());
    let above = nearest(&mut (split..keys.len()));
    let model = plan.sensing().model();
    let miss = |d: f64| if d.is_finite() { 1.0 - model.rho(d) } else { 1.0 };
    let cov = 1.0 - miss(below) * miss(above);
    part.min = cov;
    part.worst = Some(p);
    if cov < plan.rho0() - COVERAGE_TOLERANCE {
        part.violations = 1;
    }
    part
}

/// Frontier key of a robot's Cartesian position, unwrapped next to `k`.
/// `None` when the position is not on the frontier at time `a`.
fn robot_key(sched: &SweepSchedule, q: Point, a: f64, k: f64) -> Option<f64> {
    let (qa, mut qk) = sched.frame(q).ok()?;
    let scale = 1.0 + a.abs();
    let on_front = match sched {
        SweepSchedule::Radial { .. } => {
            let tau = std::f64::consts::TAU;
            let d = (qa - a).rem_euclid(tau);
            d.min(tau - d) <= 1e-6 || q.dist(sched.center().expect("polar")) <= 1e-9
        }
        _ => (qa - a).abs() <= 1e-6 * scale,
    };
    if !on_front {
        return None;
    }
    if let SweepSchedule::Circular { .. } = sched {
        let tau = std::f64::consts::TAU;
        qk += tau * ((k - qk) / tau).round();
    }
    Some(qk)
}

fn bisect(lo: f64, hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    // largest x in [lo, hi] with ok(x), assuming ok(lo) and monotone
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    lo
}

/// Guards needed on a segment of length `len`, by greedy placement with
/// reach limits found numerically from the raw sensing function.
pub fn oracle_segment_count(model: &SensingModel, rho0: f64, len: f64) -> Result<u64> {
    if !(rho0 > 0.0 && rho0 < model.rho(0.0)) {
        return Err(Error::Infeasible(format!("ρ₀ = {rho0} is not below the sensor's peak")));
    }
    let mut far = 1.0;
    while model.rho(far) >= rho0 {
        far *= 2.0;
    }
    let reach = bisect(0.0, far, |x| model.rho(x) >= rho0);
    let gap_ok = |g: f64| {
        (0..=256).all(|i| {
            let x = g * i as f64 / 256.0;
            let (p, q) = (model.rho(x), model.rho(g - x));
            p + q - p * q >= rho0
        })
    };
    if !gap_ok(1e-12) {
        return Err(Error::Infeasible("two adjacent guards cannot reach ρ₀".into()));
    }
    // the pair spacing can exceed twice the single reach at low ρ₀
    let mut gap_hi = 2.0 * far;
    while gap_ok(gap_hi) {
        gap_hi *= 2.0;
    }
    let gap = bisect(0.0, gap_hi, gap_ok);
    let mut n = 1u64;
    let mut last = reach;
    while last + reach < len {
        last += gap;
        n += 1;
    }
    Ok(n)
}

/// Exhaustive minimum flow with lower bounds and unbounded capacities.
/// Enumerates every `s`-`t` cut with no backward arc; the heaviest such cut
/// equals the minimum flow. Limited to 24 nodes.
pub fn oracle_min_flow(nodes: usize, arcs: &[(usize, usize, u64)], s: usize, t: usize) -> Result<u64> {
    if nodes > 24 {
        return Err(Error::Contract("oracle handles at most 24 nodes".into()));
    }
    let mut fwd = vec![0u32; nodes];
    let mut bwd = vec![0u32; nodes];
    for &(u, v, _) in arcs {
        fwd[u] |= 1 << v;
        bwd[v] |= 1 << u;
    }
    let closure = |start: usize, adj: &[u32]| {
        let mut seen = 1u32 << start;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            let mut m = adj[x] & !seen;
            seen |= m;
            while m != 0 {
                stack.push(m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        seen
    };
    let (from_s, to_t) = (closure(s, &fwd), closure(t, &bwd));
    if arcs.iter().any(|&(u, v, d)| d > 0 && (from_s >> u & 1 == 0 || to_t >> v & 1 == 0)) {
        return Err(Error::Infeasible("a demand arc lies on no s-t path".into()));
    }
    let others: Vec<usize> = (0..nodes).filter(|&x| x != s && x != t).collect();
    let mut best = 0;
    for mask in 0u32..1 << others.len() {
        let mut side = 1u32 << s;
        for (i, &x) in others.iter().enumerate() {
            if mask >> i & 1 == 1 {
                side |= 1 << x;
            }
        }
        let inside = |x: usize| side >> x & 1 == 1;
        if arcs.iter().any(|&(u, v, _)| !inside(u) && inside(v)) {
            continue;
        }
        let w: u64 = arcs.iter().filter(|&&(u, v, _)| inside(u) && !inside(v)).map(|a| a.2).sum();
        best = best.max(w);
    }
    Ok(best)
}

/// [`oracle_min_flow`] on the node-split network of a cell DAG.
pub fn oracle_cell_dag(dag: &CellDag, demands: &[u64]) -> Result<u64> {
    let out = |d: DagNode| match d {
        DagNode::Source => 0,
        DagNode::Terminal => 1,
        DagNode::Cell(i) => 3 + 2 * i,
    };
    let inn = |d: DagNode| match d {
        DagNode::Source => 0,
        DagNode::Terminal => 1,
        DagNode::Cell(i) => 2 + 2 * i,
    };
    let mut arcs: Vec<_> = demands.iter().enumerate().map(|(i, &d)| (2 + 2 * i, 3 + 2 * i, d)).collect();
    arcs.extend(dag.edges().iter().map(|&(u, v)| (out(u), inn(v), 0)));
    oracle_min_flow(2 + 2 * demands.len(), &arcs, 0, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowNetwork;
    use proptest::prelude::*;

    #[test]
    fn segment_oracle_matches_hand_counts() {
        let m = SensingModel::exponential(1.0).unwrap();
        // d₁ ≈ 0.2231, d₂ ≈ 1.1856 at ρ₀ = 0.8
        assert_eq!(oracle_segment_count(&m, 0.8, 0.4).unwrap(), 1);
        assert_eq!(oracle_segment_count(&m, 0.8, 1.0).unwrap(), 2);
        assert_eq!(oracle_segment_count(&m, 0.8, 4.0).unwrap(), 4);
        assert!(oracle_segment_count(&m, 1.0, 1.0).is_err());
    }

    #[test]
    fn cut_oracle_on_small_cases() {
        // s -> a -> t with demand 3, plus s -> b -> t with demand 2
        let arcs = [(0, 2, 0), (2, 1, 3), (0, 3, 2), (3, 1, 0)];
        assert_eq!(oracle_min_flow(4, &arcs, 0, 1).unwrap(), 5);
        // one path through both demands
        let arcs = [(0, 2, 4), (2, 3, 0), (3, 1, 2)];
        assert_eq!(oracle_min_flow(4, &arcs, 0, 1).unwrap(), 4);
        assert!(oracle_min_flow(3, &[(2, 1, 1)], 0, 1).is_err());
    }

    fn random_dag(n: usize, seed: u64) -> Vec<(usize, usize, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut arcs = Vec::new();
        // nodes 2..n in topological order; every node gets a parent and a child
        for v in 2..n {
            let p = if v == 2 || rng.random_range(0..3) == 0 { 0 } else { rng.random_range(2..v) };
            arcs.push((p, v, rng.random_range(0..=4)));
        }
        for v in 2..n {
            if !arcs.iter().any(|a| a.0 == v) {
                arcs.push((v, 1, rng.random_range(0..=4)));
            }
            if v + 1 < n && rng.random_range(0..2) == 0 {
                let w = rng.random_range(v + 1..n);
                arcs.push((v, w, rng.random_range(0..=4)));
            }
        }
        arcs
    }

    proptest! {
        #[test]
        fn dinic_matches_cut_oracle(n in 3usize..12, seed in any::<u64>()) {
            let arcs = random_dag(n, seed);
            let mut net = FlowNetwork::new(n);
            for &(u, v, d) in &arcs {
                net.add_arc(u, v, None, d);
            }
            let got = net.min_flow_with_demands(0, 1).unwrap();
            prop_assert!(got.feasible);
            prop_assert_eq!(got.value, oracle_min_flow(n, &arcs, 0, 1).unwrap());
        }
    }
}
