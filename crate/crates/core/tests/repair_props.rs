//! repair() laws: always feasible, identity on feasible input, idempotent.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jobshop_core::bench::{parse, Format};
use jobshop_core::{evaluate, repair, solutions_equal, Solution};

#[test]
fn repairs_1000_random_scrambles_to_feasible_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1);
    let mut already_feasible = 0usize;
    for case in 0..1000 {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(3..=6);
        let inst = common::random_full_instance(&mut rng, n, m, 9);
        let sol = Solution::random(&inst, &mut rng);
        let was_feasible = evaluate(&inst, &sol).feasible;
        let fixed = repair(&inst, &sol);
        assert!(fixed.is_shape_valid(&inst), "case {case}");

        // Feasible by the library and by both independent oracles.
        assert!(evaluate(&inst, &fixed).feasible, "case {case}");
        assert!(common::simulate(&inst, &fixed).is_some(), "case {case}");
        assert!(
            common::longest_path_eval(&inst, &fixed).is_some(),
            "case {case}"
        );

        if was_feasible {
            already_feasible += 1;
            assert!(
                solutions_equal(&fixed, &sol),
                "feasible input must pass through"
            );
        }

        // Idempotence.
        let twice = repair(&inst, &fixed);
        assert!(solutions_equal(&twice, &fixed), "case {case}");
    }
    assert!(
        already_feasible > 50,
        "generator never produced feasible inputs"
    );
}

#[test]
fn repair_preserves_feasible_solutions_on_a_real_instance() {
    let text = std::fs::read_to_string("../../data/instances/la01.txt").unwrap();
    let inst = parse(&text, Format::Auto).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let sol = Solution::random(&inst, &mut rng);
        let fixed = repair(&inst, &sol);
        assert!(evaluate(&inst, &fixed).feasible);
        if evaluate(&inst, &sol).feasible {
            assert!(solutions_equal(&fixed, &sol));
        }
    }
}
