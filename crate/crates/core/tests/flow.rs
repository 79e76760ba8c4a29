mod common;

use common::two_obstacle_env;
use sweepguard::allocation::annotate;
use sweepguard::decomposition::{gen_bou_decomp, CellDag, DagNode};
use sweepguard::flow::FlowNetwork;
use sweepguard::geometry::SweepSchedule;
use sweepguard::validation::{oracle_cell_dag, oracle_min_flow};

fn st_paths(dag: &CellDag) -> Vec<Vec<usize>> {
    fn walk(dag: &CellDag, at: DagNode, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for &(u, v) in dag.edges() {
            if u != at {
                continue;
            }
            match v {
                DagNode::Terminal => out.push(path.clone()),
                DagNode::Cell(c) => {
                    path.push(c);
                    walk(dag, v, path, out);
                    path.pop();
                }
                DagNode::Source => unreachable!(),
            }
        }
    }
    let mut out = Vec::new();
    walk(dag, DagNode::Source, &mut Vec::new(), &mut out);
    out
}

/// Smallest number of s-t paths covering every cell as often as it demands.
fn path_cover(paths: &[Vec<usize>], demands: &[u64], cap: u64) -> u64 {
    let mut best = u64::MAX;
    let mut mult = vec![0u64; paths.len()];
    loop {
        let mut cover = vec![0u64; demands.len()];
        for (p, &m) in paths.iter().zip(&mult) {
            for &c in p {
                cover[c] += m;
            }
        }
        if cover.iter().zip(demands).all(|(a, b)| a >= b) {
            best = best.min(mult.iter().sum());
        }
        let mut i = 0;
        while i < mult.len() && mult[i] == cap {
            mult[i] = 0;
            i += 1;
        }
        if i == mult.len() {
            return best;
        }
        mult[i] += 1;
    }
}

#[test]
fn double_diamond_needs_four() {
    let dag = gen_bou_decomp(&two_obstacle_env(), &SweepSchedule::vertical_degrees(0.0)).unwrap();
    let demands = vec![3, 2, 2, 3, 2, 2, 3];
    let paths = st_paths(&dag);
    assert_eq!(paths.len(), 4);
    assert_eq!(path_cover(&paths, &demands, 3), 4);
    assert_eq!(oracle_cell_dag(&dag, &demands).unwrap(), 4);
    let adag = annotate(dag, demands.clone()).unwrap();
    assert_eq!(adag.total, 4);
    for (g, d) in adag.guards.iter().zip(&demands) {
        assert!(g >= d);
    }
}

#[test]
fn simple_networks() {
    assert_eq!(oracle_min_flow(4, &[(0, 2, 0), (2, 3, 3), (3, 1, 0)], 0, 1).unwrap(), 3);
    let par = [(0, 2, 0), (2, 1, 2), (0, 3, 0), (3, 1, 3)];
    assert_eq!(oracle_min_flow(4, &par, 0, 1).unwrap(), 5);
    let mut net = FlowNetwork::new(4);
    for &(u, v, d) in &par {
        net.add_arc(u, v, None, d);
    }
    assert_eq!(net.min_flow_with_demands(0, 1).unwrap().value, 5);
}

#[test]
fn infeasible_demands_are_reported() {
    // demand on an arc with too little capacity
    let mut net = FlowNetwork::new(3);
    net.add_arc(0, 2, Some(1), 0);
    net.add_arc(2, 1, None, 2);
    assert!(!net.min_flow_with_demands(0, 1).unwrap().feasible);
    assert!(oracle_min_flow(3, &[(2, 1, 2)], 0, 1).is_err());
}
