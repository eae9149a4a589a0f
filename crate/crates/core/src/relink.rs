//! Path relinking between elite solutions: solution distance, guided swap
//! steps, path sampling, and the relink-then-search construction of a
//! reference solution.

use std::time::Instant;

use rand::Rng;

use crate::graph::{self, ScheduleEval};
use crate::model::{Instance, Solution};
use crate::tabu::{self, TabuConfig};

/// Number of machine positions whose operation differs between two solutions
/// of the same instance.
pub fn distance(a: &Solution, b: &Solution) -> usize {
    assert_eq!(
        a.perm.len(),
        b.perm.len(),
        "solutions belong to different instances"
    );
    a.perm
        .iter()
        .zip(&b.perm)
        .map(|(pa, pb)| {
            assert_eq!(pa.len(), pb.len(), "machine permutations differ in length");
            pa.iter().zip(pb).filter(|(x, y)| x != y).count()
        })
        .sum()
}

/// Step budgets of one relink, derived from the pair's distance unless
/// overridden: `alpha` steps to the first sample (also the closeness limit),
/// `beta` steps between later samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathParams {
    pub alpha: usize,
    pub beta: usize,
}

impl PathParams {
    pub fn for_distance(
        dis: usize,
        alpha_override: Option<usize>,
        beta_override: Option<usize>,
    ) -> Self {
        let alpha = alpha_override.unwrap_or_else(|| dis.div_ceil(5)).max(1);
        let beta = beta_override
            .unwrap_or_else(|| dis.div_ceil(10).max(2))
            .max(1);
        PathParams { alpha, beta }
    }
}

/// One guided swap toward `guiding`: a uniformly random mismatched position
/// is fixed by swapping in the operation the guiding solution has there.
/// Distance drops by exactly 1 or 2 (2 when the displaced operation lands on
/// its own guiding position).
pub fn path_step<R: Rng + ?Sized>(cur: &Solution, guiding: &Solution, rng: &mut R) -> Solution {
    let mut next = cur.clone();
    step_in_place(&mut next, guiding, rng);
    next
}

/// In-place [`path_step`]; returns how many mismatched positions it fixed.
fn step_in_place<R: Rng + ?Sized>(cur: &mut Solution, guiding: &Solution, rng: &mut R) -> usize {
    let mut mismatches: Vec<(usize, usize)> = Vec::new();
    for (m, (pc, pg)) in cur.perm.iter().zip(&guiding.perm).enumerate() {
        for i in 0..pc.len() {
            if pc[i] != pg[i] {
                mismatches.push((m, i));
            }
        }
    }
    assert!(!mismatches.is_empty(), "solutions are already equal");
    let (m, i) = mismatches[rng.gen_range(0..mismatches.len())];
    let want = guiding.perm[m][i];
    let perm = &mut cur.perm[m];
    let j = perm
        .iter()
        .position(|&x| x == want)
        .expect("guiding permutes the same operations");
    let fixed = 1 + (perm[i] == guiding.perm[m][j]) as usize;
    perm.swap(i, j);
    fixed
}

/// Walks from `initiating` toward `guiding` with [`path_step`], sampling the
/// walk after the first `alpha` steps and then every `beta` steps while the
/// remaining distance exceeds `alpha`. The guiding solution itself is never
/// sampled; the result is empty only if the walk reaches it within `alpha`
/// steps. Takes at most `distance(initiating, guiding)` steps in total.
pub fn build_path<R: Rng + ?Sized>(
    initiating: &Solution,
    guiding: &Solution,
    params: PathParams,
    rng: &mut R,
) -> Vec<Solution> {
    let mut cur = initiating.clone();
    let mut dist = distance(&cur, guiding);
    let mut samples = Vec::new();

    for _ in 0..params.alpha {
        if dist == 0 {
            break;
        }
        dist -= step_in_place(&mut cur, guiding, rng);
    }
    if dist == 0 {
        return samples;
    }
    samples.push(cur.clone());

    while dist > params.alpha {
        for _ in 0..params.beta {
            if dist == 0 {
                break;
            }
            dist -= step_in_place(&mut cur, guiding, rng);
        }
        if dist == 0 {
            break;
        }
        samples.push(cur.clone());
    }
    samples
}

/// Counters accumulated across relinks of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelinkStats {
    pub relinks: u64,
    pub repairs: u64,
}

/// Search-wide context shared by every relink of a run.
pub struct SearchEnv<'a> {
    pub inst: &'a Instance,
    /// Short-cutoff search applied to every path sample.
    pub slight: TabuConfig,
    /// Long-cutoff search applied to the surviving sample.
    pub strong: TabuConfig,
    /// Fixed overrides of the per-distance [`PathParams`] formulas.
    pub alpha: Option<usize>,
    pub beta: Option<usize>,
    pub deadline: Option<Instant>,
    pub known_lb: Option<u64>,
}

impl SearchEnv<'_> {
    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn reached(&self, eval: &ScheduleEval) -> bool {
        self.known_lb.is_some_and(|lb| eval.makespan <= lb)
    }
}

/// Relinks `initiating` toward `guiding` and returns the reference solution:
/// every path sample is repaired if cyclic and improved by the slight
/// search, the best survivor is finished with the strong search. Pairs at
/// distance ≤ 2·alpha skip sampling and use the single path midpoint.
pub fn path_relinking<R: Rng + ?Sized>(
    env: &SearchEnv,
    initiating: &Solution,
    guiding: &Solution,
    rng: &mut R,
    stats: &mut RelinkStats,
) -> (Solution, ScheduleEval) {
    stats.relinks += 1;
    let dis = distance(initiating, guiding);
    assert!(dis > 0, "relinking identical solutions");
    let params = PathParams::for_distance(dis, env.alpha, env.beta);

    let samples: Vec<Solution> = if dis <= 2 * params.alpha {
        let mut cur = initiating.clone();
        let mut dist = dis;
        for _ in 0..dis.div_ceil(2) {
            if dist == 0 {
                break;
            }
            dist -= step_in_place(&mut cur, guiding, rng);
        }
        vec![cur]
    } else {
        build_path(initiating, guiding, params, rng)
    };
    debug_assert!(!samples.is_empty());

    let mut best: Option<(Solution, ScheduleEval)> = None;
    for sample in samples {
        let mut sol = sample;
        if !graph::evaluate(env.inst, &sol).feasible {
            sol = graph::repair(env.inst, &sol);
            stats.repairs += 1;
        }
        let (s, e) =
            tabu::tabu_search(env.inst, &sol, &env.slight, env.deadline, env.known_lb, rng);
        if best.as_ref().is_none_or(|(_, be)| e.makespan < be.makespan) {
            best = Some((s, e));
        }
        let (_, be) = best.as_ref().expect("just set");
        if env.reached(be) || env.out_of_time() {
            break;
        }
    }

    let (sol, eval) = best.expect("at least one path sample");
    if env.reached(&eval) {
        return (sol, eval);
    }
    tabu::tabu_search(env.inst, &sol, &env.strong, env.deadline, env.known_lb, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sol(perms: &[&[usize]]) -> Solution {
        Solution {
            perm: perms.iter().map(|p| p.to_vec()).collect(),
        }
    }

    #[test]
    fn distance_counts_differing_positions() {
        let a = sol(&[&[0, 1, 2], &[3, 4]]);
        let b = sol(&[&[1, 0, 2], &[3, 4]]);
        assert_eq!(distance(&a, &a), 0);
        assert_eq!(distance(&a, &b), 2);
        assert_eq!(distance(&b, &a), 2);
    }

    #[test]
    fn params_follow_distance_formulas() {
        assert_eq!(
            PathParams::for_distance(10, None, None),
            PathParams { alpha: 2, beta: 2 }
        );
        assert_eq!(
            PathParams::for_distance(37, None, None),
            PathParams { alpha: 8, beta: 4 }
        );
        // Small distances: alpha stays at least 1, beta at least 2.
        assert_eq!(
            PathParams::for_distance(3, None, None),
            PathParams { alpha: 1, beta: 2 }
        );
        assert_eq!(
            PathParams::for_distance(10, Some(4), Some(7)),
            PathParams { alpha: 4, beta: 7 }
        );
    }

    #[test]
    fn path_step_fixes_one_or_two_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let guiding = sol(&[&[0, 1, 2, 3], &[4, 5, 6]]);
        let mut cur = sol(&[&[3, 2, 1, 0], &[6, 4, 5]]);
        while distance(&cur, &guiding) > 0 {
            let before = distance(&cur, &guiding);
            let next = path_step(&cur, &guiding, &mut rng);
            let after = distance(&next, &guiding);
            assert!(before - after == 1 || before - after == 2);
            cur = next;
        }
        assert_eq!(cur.perm, guiding.perm);
    }

    #[test]
    fn build_path_samples_respect_budgets() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let guiding = sol(&[&(0..12).collect::<Vec<_>>()]);
        let initiating = sol(&[&(0..12).rev().collect::<Vec<_>>()]);
        let d = distance(&initiating, &guiding);
        assert_eq!(d, 12);
        let params = PathParams::for_distance(d, None, None);
        let samples = build_path(&initiating, &guiding, params, &mut rng);
        assert!(!samples.is_empty());
        for s in &samples {
            let left = distance(s, &guiding);
            assert!(left > 0, "guiding solution must not be sampled");
        }
        // Last sample is the first one at distance ≤ alpha... or the walk
        // stopped exactly when crossing it.
        let last = distance(samples.last().unwrap(), &guiding);
        assert!(last <= d);
    }

    #[test]
    fn relinking_returns_a_feasible_reference_solution() {
        let inst = Instance::new(
            3,
            3,
            &[
                vec![(0, 3), (1, 2), (2, 2)],
                vec![(0, 2), (2, 1), (1, 4)],
                vec![(1, 4), (2, 3), (0, 1)],
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let env = SearchEnv {
            inst: &inst,
            slight: TabuConfig::for_instance(&inst, 20),
            strong: TabuConfig::for_instance(&inst, 60),
            alpha: None,
            beta: None,
            deadline: None,
            known_lb: None,
        };
        for _ in 0..20 {
            let a = graph::repair(&inst, &Solution::random(&inst, &mut rng));
            let b = graph::repair(&inst, &Solution::random(&inst, &mut rng));
            if distance(&a, &b) == 0 {
                continue;
            }
            let mut stats = RelinkStats::default();
            let (r, e) = path_relinking(&env, &a, &b, &mut rng, &mut stats);
            assert!(e.feasible);
            assert_eq!(graph::evaluate(&inst, &r).makespan, e.makespan);
            assert_eq!(stats.relinks, 1);
        }
    }
}
