mod common;

use common::*;
use sweepguard::allocation::{annotate, extract_itineraries, maximize_coverage, min_sweep, min_sweep_dag};
use sweepguard::decomposition::gen_bou_decomp;
use sweepguard::geometry::{Point, SweepSchedule};
use sweepguard::sensing::SensingModel;
use sweepguard::validation::{oracle_cell_dag, oracle_segment_count, validate_plan};

fn exp1() -> SensingModel {
    SensingModel::exponential(1.0).unwrap()
}

#[test]
fn corridor_needs_four_robots() {
    let env = corridor_env();
    let sched = SweepSchedule::vertical_degrees(0.0);
    let dag = gen_bou_decomp(&env, &sched).unwrap();
    let sensing = exp1().requirement(0.8).unwrap();
    let adag = min_sweep_dag(dag, &sensing).unwrap();
    assert_eq!(adag.demands, vec![3, 2, 2, 3, 2, 2, 3]);
    assert_eq!(adag.total, 4);
    assert_eq!(oracle_cell_dag(&adag.dag, &adag.demands).unwrap(), 4);
    for (c, cell) in adag.dag.cells().iter().enumerate() {
        assert_eq!(adag.demands[c], oracle_segment_count(&exp1(), 0.8, cell.lmax).unwrap());
        assert!(adag.guards[c] >= adag.demands[c]);
    }
}

#[test]
fn double_diamond_with_fixed_demands() {
    let env = two_obstacle_env();
    let dag = gen_bou_decomp(&env, &SweepSchedule::vertical_degrees(0.0)).unwrap();
    let demands = vec![3, 2, 1, 3, 1, 1, 2];
    let oracle = oracle_cell_dag(&dag, &demands).unwrap();
    let adag = annotate(dag, demands).unwrap();
    assert_eq!(adag.total, oracle);
    let it = extract_itineraries(&adag).unwrap();
    assert_eq!(it.paths.len() as u64, adag.total);
    for path in &it.paths {
        assert_eq!(adag.dag.cells()[path[0].cell].birth, adag.dag.cells().iter().map(|c| c.birth).fold(f64::INFINITY, f64::min));
    }
}

#[test]
fn plans_validate_on_all_fixtures() {
    let ring = ring_env();
    let cases = [
        (single_obstacle_env(), SweepSchedule::vertical_degrees(0.0)),
        (two_obstacle_env(), SweepSchedule::vertical_degrees(0.0)),
        (notched_env(), SweepSchedule::vertical_degrees(30.0)),
        (corridor_env(), SweepSchedule::vertical_degrees(0.0)),
        (ring.clone(), SweepSchedule::circular(Point::new(0.0, 0.0))),
        (ring, SweepSchedule::radial(Point::new(0.0, 0.0), 1.2)),
        (corner_env(), SweepSchedule::circular(Point::new(5.0, 0.0))),
        (corner_env(), SweepSchedule::radial(Point::new(0.0, 0.0), 0.0)),
    ];
    for (i, (env, sched)) in cases.into_iter().enumerate() {
        for rho0 in [0.5, 0.8, 0.95] {
            let plan = min_sweep(&sched, &env, &exp1(), rho0).unwrap();
            let rep = validate_plan(&env, &plan, 20_000, 7 + i as u64).unwrap();
            assert!(rep.passed(), "case {i} at {rho0}: {rep:?}");
        }
    }
}

#[test]
fn disabling_a_robot_breaks_coverage() {
    let env = corridor_env();
    let plan = min_sweep(&SweepSchedule::vertical_degrees(0.0), &env, &exp1(), 0.8).unwrap();
    for r in 0..plan.robot_count() {
        let rep = validate_plan(&env, &plan.without_robot(r), 20_000, 3).unwrap();
        assert!(rep.violations > 0, "robot {r} was redundant");
    }
}

#[test]
fn dual_inverts_primal() {
    let env = single_obstacle_env();
    let sched = SweepSchedule::vertical_degrees(0.0);
    let n = min_sweep(&sched, &env, &exp1(), 0.9).unwrap().robot_count() as u64;
    let d = maximize_coverage(&sched, &env, &exp1(), n).unwrap();
    assert!(d.best_rho0 >= 0.9 - 1e-4);
    let plan = min_sweep(&sched, &env, &exp1(), d.best_rho0).unwrap();
    assert!(plan.robot_count() as u64 <= n);
}
