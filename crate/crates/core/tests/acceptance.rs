//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::{single_obstacle_env, two_obstacle_env};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sweepguard::allocation::{annotate, maximize_on, min_sweep, plan_on, AllocationPlan};
use sweepguard::cli::bench::{bench_one, loglog_slope};
use sweepguard::cli::generator::{gen_env, GeneratorConfig, Setting};
use sweepguard::decomposition::{gen_bou_decomp, CellDag, DagNode};
use sweepguard::flow::FlowNetwork;
use sweepguard::geometry::{Environment, Point, SweepSchedule};
use sweepguard::sensing::SensingModel;
use sweepguard::validation::{oracle_min_flow, oracle_segment_count, validate_plan};
use sweepguard::Error;

type Outcome = Result<String, String>;

/// Best of a few runs, to keep scheduler noise out of the small timings.
fn best_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..runs {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed());
        out = Some(v);
    }
    (out.expect("at least one run"), best)
}

fn c1_single_obstacle() -> Outcome {
    let env = single_obstacle_env();
    let sched = SweepSchedule::vertical_degrees(0.0);
    let (dag, dt) = best_time(20, || gen_bou_decomp(&env, &sched).unwrap());
    let n = dag.cells().len();
    if n != 4 {
        return Err(format!("{n} cells, expected 4"));
    }
    if dt > Duration::from_millis(1) {
        return Err(format!("4 cells but took {dt:?}"));
    }
    Ok(format!("4 cells in {dt:?}"))
}

fn c2_double_diamond() -> Outcome {
    let env = two_obstacle_env();
    let sched = SweepSchedule::vertical_degrees(0.0);
    let demands = vec![3, 2, 2, 3, 2, 2, 3];
    let ((dag, total), dt) = best_time(20, || {
        let dag = gen_bou_decomp(&env, &sched).unwrap();
        let adag = annotate(dag.clone(), demands.clone()).unwrap();
        (dag, adag.total)
    });
    let c = |i| DagNode::Cell(i);
    let (s, t) = (DagNode::Source, DagNode::Terminal);
    let want = vec![(s, c(0)), (c(0), c(1)), (c(0), c(2)), (c(1), c(3)), (c(2), c(3)), (c(3), c(4)), (c(3), c(5)), (c(4), c(6)), (c(5), c(6)), (c(6), t)];
    if dag.cells().len() != 7 || dag.edges() != want.as_slice() {
        return Err(format!("DAG is {:?}", dag.edges()));
    }
    let oracle = sweepguard::validation::oracle_cell_dag(&dag, &demands).map_err(|e| e.to_string())?;
    if total != 4 || oracle != 4 {
        return Err(format!("min flow {total}, oracle {oracle}, expected 4"));
    }
    if dt > Duration::from_millis(10) {
        return Err(format!("correct but took {dt:?}"));
    }
    Ok(format!("7 cells, diamond chain, 4 robots in {dt:?}"))
}

fn c3_zeta_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    for i in 0..1000 {
        let c = rng.random_range(0.1..=5.0);
        let rho0 = rng.random_range(0.05..=0.99);
        let len = rng.random_range(0.0..=100.0);
        let model = SensingModel::exponential(c).unwrap();
        let z = model.requirement(rho0).and_then(|s| s.zeta(len)).map_err(|e| e.to_string())?;
        let o = oracle_segment_count(&model, rho0, len).map_err(|e| e.to_string())?;
        if z != o {
            return Err(format!("triple {i} (c={c}, ρ₀={rho0}, ℓ={len}): zeta {z}, oracle {o}"));
        }
    }
    let dt = start.elapsed();
    if dt > Duration::from_secs(1) {
        return Err(format!("all equal but took {dt:?}"));
    }
    Ok(format!("1000 triples equal in {dt:?}"))
}

fn random_dag(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize, u64)>) {
    let n = rng.random_range(3..=12);
    let mut arcs = Vec::new();
    for v in 2..n {
        let p = if v == 2 || rng.random_range(0..3) == 0 { 0 } else { rng.random_range(2..v) };
        arcs.push((p, v, rng.random_range(0..=4)));
        if v > 2 && rng.random_range(0..2) == 0 {
            arcs.push((rng.random_range(2..v), v, rng.random_range(0..=4)));
        }
    }
    for v in 2..n {
        if !arcs.iter().any(|a| a.0 == v) || rng.random_range(0..4) == 0 {
            arcs.push((v, 1, rng.random_range(0..=4)));
        }
    }
    (n, arcs)
}

fn c4_min_flow_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    for i in 0..200 {
        let (n, arcs) = random_dag(&mut rng);
        let mut net = FlowNetwork::new(n);
        for &(u, v, d) in &arcs {
            net.add_arc(u, v, None, d);
        }
        let got = net.min_flow_with_demands(0, 1).map_err(|e| e.to_string())?;
        let want = oracle_min_flow(n, &arcs, 0, 1).map_err(|e| e.to_string())?;
        if !got.feasible || got.value != want {
            return Err(format!("DAG {i}: Dinic {}, oracle {want}", got.value));
        }
    }
    let dt = start.elapsed();
    if dt > Duration::from_secs(10) {
        return Err(format!("all equal but took {dt:?}"));
    }
    Ok(format!("200 DAGs equal in {dt:?}"))
}

struct Instance {
    label: String,
    env: Environment,
    plan: AllocationPlan,
}

/// 50 seeded worlds per setting, 4 to 200 obstacles, mixed schedules.
fn corpus() -> Result<Vec<Instance>, String> {
    let mut out = Vec::new();
    for setting in Setting::ALL {
        for i in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * i + setting as u64);
            let env = gen_env(&GeneratorConfig::new(setting, 4 * i as usize + 4, i)).map_err(|e| e.to_string())?;
            let sched = match i % 5 {
                3 => SweepSchedule::circular(Point::new(0.0, 0.0)),
                4 => SweepSchedule::radial(Point::new(0.0, 0.0), 0.0),
                _ => SweepSchedule::Vertical { angle: rng.random_range(0.0..std::f64::consts::TAU) },
            };
            let c = rng.random_range(0.2..=2.0);
            let rho0 = rng.random_range(0.5..=0.95);
            let model = SensingModel::exponential(c).unwrap();
            let label = format!("{} #{i}", setting.name());
            let plan = min_sweep(&sched, &env, &model, rho0).map_err(|e| format!("{label}: {e}"))?;
            out.push(Instance { label, env, plan });
        }
    }
    Ok(out)
}

/// A dropped robot may be the only guard of a sliver cell covering 1e-5 of
/// the free area, which 1e5 uniform samples can miss.
const MUTANT_SAMPLES: usize = 1_000_000;

fn c5_coverage(corpus: &[Instance]) -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut mutations = 0;
    let mut survivors = Vec::new();
    for (k, inst) in corpus.iter().enumerate() {
        let rep = validate_plan(&inst.env, &inst.plan, 100_000, k as u64).map_err(|e| e.to_string())?;
        if !rep.passed() {
            return Err(format!("{}: {} violations, {} unlocated, min {}", inst.label, rep.violations, rep.unlocated, rep.min_coverage));
        }
        worst_margin = worst_margin.min(rep.min_coverage - rep.rho0);
        if inst.plan.robot_count() > 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let r = rng.random_range(0..inst.plan.robot_count());
            let rep = validate_plan(&inst.env, &inst.plan.without_robot(r), MUTANT_SAMPLES, k as u64 + 7).map_err(|e| e.to_string())?;
            mutations += 1;
            if rep.passed() {
                survivors.push(format!("{} without robot {r}", inst.label));
            }
        }
    }
    if !survivors.is_empty() {
        return Err(format!("{} of {mutations} mutants passed validation: {}", survivors.len(), survivors.join(", ")));
    }
    Ok(format!("{} plans pass (worst margin {worst_margin:.2e}), {mutations} mutants all fail", corpus.len()))
}

fn c6_scaling() -> Outcome {
    let sched = SweepSchedule::vertical_degrees(0.0);
    let sensing = SensingModel::exponential(1.0).unwrap().requirement(0.8).unwrap();
    let mut recs = Vec::new();
    let mut at_top = Duration::ZERO;
    for n in [1_000, 10_000, 100_000] {
        for s in Setting::ALL {
            let (r, _) = best_time(if n < 100_000 { 3 } else { 1 }, || bench_one(s, n, 0, &sched, &sensing));
            let r = r.map_err(|e| e.to_string())?;
            if n == 100_000 {
                at_top = at_top.max(Duration::from_secs_f64(r.total_millis / 1e3));
            }
            recs.push(r);
        }
    }
    let slope = loglog_slope(&recs).ok_or("no slope")?;
    let msg = format!("slope {slope:.3}, {at_top:?} at ~1e5 vertices");
    if !(0.8..=1.5).contains(&slope) || at_top > Duration::from_secs(10) {
        return Err(msg);
    }
    Ok(msg)
}

fn count(sched: &SweepSchedule, env: &Environment, model: &SensingModel, rho0: f64) -> Result<Option<usize>, String> {
    match min_sweep(sched, env, model, rho0) {
        Ok(p) => Ok(Some(p.robot_count())),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

fn c7_dual() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20u64 {
        let setting = Setting::ALL[i as usize % 3];
        let env = gen_env(&GeneratorConfig::new(setting, rng.random_range(2..30), i)).map_err(|e| e.to_string())?;
        let sched = SweepSchedule::Vertical { angle: rng.random_range(0.0..std::f64::consts::TAU) };
        let model = SensingModel::exponential(rng.random_range(0.2..=2.0)).unwrap();
        let dag = gen_bou_decomp(&env, &sched).map_err(|e| e.to_string())?;
        let base = plan_on(dag.clone(), model.requirement(rng.random_range(0.3..0.9)).unwrap()).map_err(|e| e.to_string())?;
        let fleet = base.robot_count() as u64 + rng.random_range(0..4);
        let d = maximize_on(&dag, &model, fleet).map_err(|e| e.to_string())?;
        let at = count(&sched, &env, &model, d.best_rho0)?;
        if at.is_none_or(|n| n as u64 > fleet) {
            return Err(format!("instance {i}: {at:?} robots at ρ* = {} > fleet {fleet}", d.best_rho0));
        }
        let above = count(&sched, &env, &model, d.best_rho0 + 1e-3)?;
        if above.is_some_and(|n| n as u64 <= fleet) {
            return Err(format!("instance {i}: ρ* + 1e-3 still fits {fleet} robots"));
        }
    }
    Ok("20 instances bracket within 1e-3".into())
}

fn check_structure(dag: &CellDag, env: &Environment, plan: &AllocationPlan) -> Result<(), String> {
    let adag = plan.annotated();
    let n = dag.cells().len();
    for &(u, v) in dag.edges() {
        if let (DagNode::Cell(a), DagNode::Cell(b)) = (u, v) {
            if a >= b {
                return Err(format!("edge {a}->{b} breaks topological order"));
            }
        }
    }
    let verts = env.vertex_count();
    if n > 2 * verts || dag.edges().len() > 4 * verts {
        return Err(format!("{n} cells, {} edges for {verts} vertices", dag.edges().len()));
    }
    let (area, free) = (dag.total_area(), env.free_area());
    if (area - free).abs() > 1e-3 * free {
        return Err(format!("cell area {area} vs free area {free}"));
    }
    let mut inflow = vec![0u64; n];
    let mut outflow = vec![0u64; n];
    let mut from_s = vec![false; n];
    for (&(u, v), &f) in dag.edges().iter().zip(&adag.edge_flows) {
        if let DagNode::Cell(a) = u {
            outflow[a] += f;
        }
        if let DagNode::Cell(b) = v {
            inflow[b] += f;
            from_s[b] |= match u {
                DagNode::Source => true,
                DagNode::Cell(a) => from_s[a],
                DagNode::Terminal => false,
            };
        }
    }
    for c in 0..n {
        if inflow[c] != adag.guards[c] || outflow[c] != adag.guards[c] {
            return Err(format!("cell {c}: in {} guards {} out {}", inflow[c], adag.guards[c], outflow[c]));
        }
        if adag.guards[c] < adag.demands[c] {
            return Err(format!("cell {c}: {} guards below demand {}", adag.guards[c], adag.demands[c]));
        }
        // every cell has a child, so reaching t only needs s to reach it
        if !from_s[c] || dag.children(c).is_empty() {
            return Err(format!("cell {c} is not on an s-t path"));
        }
    }
    Ok(())
}

fn c8_structure(corpus: &[Instance]) -> Outcome {
    for inst in corpus {
        check_structure(inst.plan.dag(), &inst.env, &inst.plan).map_err(|e| format!("{}: {e}", inst.label))?;
    }
    Ok(format!("{} decompositions and flows consistent", corpus.len()))
}

fn main() {
    let mut failed = 0;
    let mut run = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let r = f();
        let dt = start.elapsed().as_secs_f64();
        match r {
            Ok(m) => println!("[PASS] {id}. {name}: {m} ({dt:.1}s)"),
            Err(m) => {
                failed += 1;
                println!("[FAIL] {id}. {name}: {m} ({dt:.1}s)");
            }
        }
    };
    run(1, "single-obstacle decomposition", &c1_single_obstacle);
    run(2, "two-obstacle DAG and min flow", &c2_double_diamond);
    run(3, "guard count closed form vs greedy oracle", &c3_zeta_vs_oracle);
    run(4, "min flow vs exhaustive oracle", &c4_min_flow_vs_oracle);
    let start = Instant::now();
    let corpus = corpus();
    println!("       corpus of {} plans built in {:.1}s", corpus.as_ref().map_or(0, Vec::len), start.elapsed().as_secs_f64());
    run(5, "end-to-end coverage and mutation", &|| c5_coverage(corpus.as_ref()?));
    run(6, "runtime scaling", &c6_scaling);
    run(7, "dual consistency", &c7_dual);
    run(8, "structural invariants", &|| c8_structure(corpus.as_ref()?));
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
