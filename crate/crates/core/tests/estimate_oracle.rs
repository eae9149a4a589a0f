//! The move estimate against full re-evaluation.
//!
//! The estimate recomputes heads and tails over the reordered segment only,
//! keeping surrounding values. It is documented to be exact when those
//! surroundings really keep their heads and tails and the new critical path
//! crosses the segment; this suite checks that implication case by case and
//! requires it to fire often enough to mean something.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jobshop_core::tabu::{apply_move, estimate_move, generate_moves, Move, Target};
use jobshop_core::{evaluate, repair, Instance, Solution};

/// Ops of the post-move segment, and the permutation indices it spans.
fn segment(sol: &Solution, mv: &Move) -> (Vec<usize>, usize, usize) {
    let perm = &sol.perm[mv.machine];
    let (from, to) = match mv.target {
        Target::BlockRear => (mv.from_pos, mv.insert_pos),
        Target::BlockFront => (mv.insert_pos, mv.from_pos),
    };
    (perm[from..=to].to_vec(), from, to)
}

#[test]
fn estimate_is_exact_when_its_inputs_stay_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE571);
    let mut exact_hits = 0usize;
    let mut moves_seen = 0usize;
    for _ in 0..400 {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(3..=5);
        let inst = common::random_full_instance(&mut rng, n, m, 9);
        let sol = repair(&inst, &Solution::random(&inst, &mut rng));
        let eval = evaluate(&inst, &sol);
        for mv in generate_moves(&inst, &sol, &eval) {
            moves_seen += 1;
            let est = estimate_move(&inst, &eval, &sol, &mv);
            assert_eq!(est, mv.estimate, "generate_moves stores the same estimate");

            let moved = apply_move(&sol, &mv);
            let new_eval = evaluate(&inst, &moved);
            if !new_eval.feasible {
                continue;
            }

            let (seg, from, to) = segment(&sol, &mv);
            let perm = &sol.perm[mv.machine];
            // Inputs the estimate trusted: the head of the op before the
            // segment, the tail of the op after it, route-predecessor heads
            // and route-successor tails of segment members.
            let mut inputs_valid = true;
            if from > 0 {
                inputs_valid &= new_eval.head[perm[from - 1]] == eval.head[perm[from - 1]];
            }
            if let Some(&after) = perm.get(to + 1) {
                inputs_valid &= new_eval.tail[after] == eval.tail[after];
            }
            for &x in &seg {
                if let Some(p) = inst.job_pred[x] {
                    inputs_valid &= new_eval.head[p] == eval.head[p];
                }
                if let Some(s) = inst.job_succ[x] {
                    inputs_valid &= new_eval.tail[s] == eval.tail[s];
                }
            }
            let crosses = new_eval.critical_ops.iter().any(|op| seg.contains(op));
            if inputs_valid && crosses {
                exact_hits += 1;
                assert_eq!(
                    est, new_eval.makespan,
                    "estimate must be exact when its inputs held"
                );
            }
        }
    }
    assert!(moves_seen >= 1000, "only {moves_seen} moves generated");
    assert!(
        exact_hits >= 200,
        "exactness condition fired only {exact_hits} times"
    );
}

/// On single-machine instances the whole schedule is one segment, so the
/// estimate always equals the true makespan.
#[test]
fn estimate_is_exact_on_single_machine_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51E5);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let routes: Vec<Vec<(usize, u64)>> =
            (0..n).map(|_| vec![(0, rng.gen_range(1..=9))]).collect();
        let inst = Instance::new(n, 1, &routes).unwrap();
        let sol = Solution::random(&inst, &mut rng);
        let eval = evaluate(&inst, &sol);
        for mv in generate_moves(&inst, &sol, &eval) {
            let moved = apply_move(&sol, &mv);
            assert_eq!(mv.estimate, evaluate(&inst, &moved).makespan);
        }
    }
}
