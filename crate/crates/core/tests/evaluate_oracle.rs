//! evaluate() against the relaxation oracle and the dispatch simulator.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jobshop_core::{evaluate, Instance, Solution};

fn scrambled(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
    // Random per-machine permutations; typically cyclic across machines.
    Solution::random(inst, rng)
}

/// 0 tolerance agreement on feasibility, starts, makespan, and tails over
/// random 3x3 to 5x5 instances; more than 1000 feasible cases.
#[test]
fn agrees_with_relaxation_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7A1);
    let mut feasible_cases = 0usize;
    let mut cyclic_cases = 0usize;
    while feasible_cases < 1100 {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(3..=5);
        let inst = common::random_full_instance(&mut rng, n, m, 9);
        let sol = scrambled(&inst, &mut rng);
        let eval = evaluate(&inst, &sol);
        match common::longest_path_eval(&inst, &sol) {
            Some((starts, makespan)) => {
                feasible_cases += 1;
                assert!(eval.feasible);
                assert_eq!(eval.makespan, makespan);
                assert_eq!(eval.head, starts);
                assert_eq!(eval.start, starts);
                let tails = common::longest_tails(&inst, &sol).unwrap();
                assert_eq!(eval.tail, tails);
                // The simulator is a second, structurally different oracle.
                let (sim_starts, sim_makespan) = common::simulate(&inst, &sol).unwrap();
                assert_eq!(sim_makespan, makespan);
                assert_eq!(sim_starts, starts);
            }
            None => {
                cyclic_cases += 1;
                assert!(!eval.feasible);
                assert!(common::simulate(&inst, &sol).is_none());
            }
        }
    }
    // The generator must have exercised both verdicts.
    assert!(cyclic_cases > 100, "only {cyclic_cases} cyclic cases seen");
}

/// Critical operations satisfy head + dur + tail = makespan and chain from
/// a zero-head op to a makespan-completing op.
#[test]
fn critical_path_is_tight_and_connected() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0usize;
    while checked < 300 {
        let inst = common::random_full_instance(&mut rng, 4, 4, 9);
        let sol = scrambled(&inst, &mut rng);
        let eval = evaluate(&inst, &sol);
        if !eval.feasible {
            continue;
        }
        checked += 1;
        let path = &eval.critical_ops;
        assert!(!path.is_empty());
        for &op in path {
            assert_eq!(
                eval.head[op] + inst.op_duration[op] + eval.tail[op],
                eval.makespan
            );
        }
        assert_eq!(eval.head[path[0]], 0);
        let last = *path.last().unwrap();
        assert_eq!(eval.head[last] + inst.op_duration[last], eval.makespan);
        for pair in path.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            // Consecutive ops are linked by a tight job or machine arc.
            let linked_by_job = inst.job_succ[u] == Some(v);
            let m = inst.op_machine[u];
            let pos = sol.perm[m].iter().position(|&x| x == u).unwrap();
            let linked_by_machine = inst.op_machine[v] == m && sol.perm[m].get(pos + 1) == Some(&v);
            assert!(linked_by_job || linked_by_machine);
            assert_eq!(eval.head[u] + inst.op_duration[u], eval.head[v]);
        }
    }
}
