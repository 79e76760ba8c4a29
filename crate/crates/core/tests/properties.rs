mod common;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sweepguard::allocation::{count_at, min_sweep};
use sweepguard::cli::generator::{gen_env, GeneratorConfig, Setting};
use sweepguard::decomposition::{gen_bou_decomp, DagNode};
use sweepguard::geometry::{FreeSpaceIndex, Point, SweepSchedule};
use sweepguard::sensing::SensingModel;
use sweepguard::validation::{oracle_segment_count, validate_plan};

fn setting() -> impl Strategy<Value = Setting> {
    prop_oneof![Just(Setting::RegularSimilar), Just(Setting::RandomSimilar), Just(Setting::RegularVariedSize)]
}

fn schedule(kind: u8, angle: f64) -> SweepSchedule {
    match kind {
        0 => SweepSchedule::circular(Point::new(0.0, 0.0)),
        1 => SweepSchedule::radial(Point::new(0.0, 0.0), 0.0),
        _ => SweepSchedule::Vertical { angle },
    }
}

proptest! {
    #[test]
    fn zeta_equals_greedy_oracle(c in 0.1f64..5.0, rho0 in 0.05f64..0.99, len in 0.0f64..100.0) {
        let model = SensingModel::exponential(c).unwrap();
        let z = model.requirement(rho0).unwrap().zeta(len).unwrap();
        prop_assert_eq!(z, oracle_segment_count(&model, rho0, len).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decompositions_partition_free_space(
        s in setting(), n in 0usize..30, seed in 0u64..1000, kind in 0u8..4, angle in 0.0f64..6.28,
    ) {
        let env = gen_env(&GeneratorConfig::new(s, n, seed)).unwrap();
        let dag = gen_bou_decomp(&env, &schedule(kind, angle)).unwrap();
        let free = env.free_area();
        prop_assert!((dag.total_area() - free).abs() <= 1e-3 * free);
        for &(u, v) in dag.edges() {
            if let (DagNode::Cell(a), DagNode::Cell(b)) = (u, v) {
                prop_assert!(a < b);
                prop_assert_eq!(dag.cells()[a].death, dag.cells()[b].birth);
            }
        }
        let index = FreeSpaceIndex::new(&env);
        let bb = env.bbox();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let p = Point::new(rng.random_range(bb.min.x..bb.max.x), rng.random_range(bb.min.y..bb.max.y));
            prop_assert_eq!(index.contains(p), env.contains(p));
            if env.contains(p) {
                let c = dag.locate(p);
                prop_assert!(c.is_some(), "{:?} in no cell", p);
            }
        }
    }

    #[test]
    fn plans_cover_and_mutants_do_not(
        s in setting(), n in 1usize..12, seed in 0u64..1000, kind in 0u8..4, angle in 0.0f64..6.28,
        c in 0.2f64..2.0, rho0 in 0.4f64..0.95,
    ) {
        let env = gen_env(&GeneratorConfig::new(s, n, seed)).unwrap();
        let model = SensingModel::exponential(c).unwrap();
        let plan = min_sweep(&schedule(kind, angle), &env, &model, rho0).unwrap();
        let a = validate_plan(&env, &plan, 50_000, seed).unwrap();
        let b = validate_plan(&env, &plan, 50_000, seed + 1).unwrap();
        prop_assert!(a.passed() && b.passed(), "{:?}", a);
        if plan.robot_count() > 1 {
            let r = seed as usize % plan.robot_count();
            let m = validate_plan(&env, &plan.without_robot(r), 400_000, seed).unwrap();
            prop_assert!(!m.passed());
        }
    }

    #[test]
    fn robot_count_grows_with_rho0(seed in 0u64..1000, lo in 0.1f64..0.9, step in 0.0f64..0.09) {
        let env = gen_env(&GeneratorConfig::new(Setting::RandomSimilar, 8, seed)).unwrap();
        let dag = gen_bou_decomp(&env, &SweepSchedule::vertical_degrees(seed as f64)).unwrap();
        let model = SensingModel::exponential(0.7).unwrap();
        let a = count_at(&dag, &model, lo).unwrap().unwrap();
        let b = count_at(&dag, &model, lo + step).unwrap().unwrap();
        prop_assert!(a <= b);
    }
}
