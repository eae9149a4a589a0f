//! Population loop: tabu-improved random seeds, pairwise relinking, and
//! duplicate-averse replacement.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{self, ScheduleEval};
use crate::model::{solutions_equal, Instance, Solution};
use crate::relink::{self, RelinkStats, SearchEnv};
use crate::tabu::{self, TabuConfig};

/// Solver parameters. The defaults are the benchmark configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolveParams {
    /// Population size.
    pub population: usize,
    /// Stagnation cutoff of the short search run on every path sample.
    pub slight_cutoff: usize,
    /// Stagnation cutoff of the long search run on reference solutions.
    pub strong_cutoff: usize,
    /// Cutoff used while seeding the population; `None` means `strong_cutoff`.
    pub init_cutoff: Option<usize>,
    /// Fixed tabu tenure base; `None` scales it with instance size.
    pub tenure_base: Option<usize>,
    pub tenure_spread: usize,
    /// Fixed relink sampling offsets; `None` derives them from pair distance.
    pub alpha: Option<usize>,
    pub beta: Option<usize>,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            population: 30,
            slight_cutoff: 500,
            strong_cutoff: 12_500,
            init_cutoff: None,
            tenure_base: None,
            tenure_spread: 6,
            alpha: None,
            beta: None,
        }
    }
}

/// Outcome data of one seeded run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub best_makespan: u64,
    /// Elapsed time when the best solution was first found.
    pub time_to_best: Duration,
    pub relinks: u64,
    pub repairs: u64,
    /// Pairs processed by the evolution loop.
    pub iterations: u64,
    /// (elapsed seconds, incumbent makespan), sampled at every improvement
    /// and at most once per second in between.
    pub trace: Vec<(f64, u64)>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvolveError {
    #[error("time budget exhausted while seeding the population ({got} of 2 minimum members)")]
    BudgetExhaustedInInit { got: usize },
}

/// Incumbent bookkeeping shared by the seeding and evolution phases.
struct Tracker {
    t0: Instant,
    best: Option<(Solution, ScheduleEval)>,
    at: Duration,
    trace: Vec<(f64, u64)>,
    next_sample: Duration,
}

impl Tracker {
    fn new(t0: Instant) -> Self {
        Tracker {
            t0,
            best: None,
            at: Duration::ZERO,
            trace: Vec::new(),
            next_sample: Duration::from_secs(1),
        }
    }

    fn offer(&mut self, sol: &Solution, eval: &ScheduleEval) {
        let improved = self
            .best
            .as_ref()
            .is_none_or(|(_, be)| eval.makespan < be.makespan);
        if improved {
            self.at = self.t0.elapsed();
            self.trace.push((self.at.as_secs_f64(), eval.makespan));
            self.best = Some((sol.clone(), eval.clone()));
        }
        self.sample();
    }

    /// Keeps the trace ticking at one-second granularity between improvements.
    fn sample(&mut self) {
        let elapsed = self.t0.elapsed();
        if elapsed >= self.next_sample {
            if let Some((_, be)) = &self.best {
                self.trace.push((elapsed.as_secs_f64(), be.makespan));
            }
            while self.next_sample <= elapsed {
                self.next_sample += Duration::from_secs(1);
            }
        }
    }

    fn reached(&self, known_lb: Option<u64>) -> bool {
        match (&self.best, known_lb) {
            (Some((_, e)), Some(lb)) => e.makespan <= lb,
            _ => false,
        }
    }
}

struct Member {
    id: u64,
    sol: Solution,
    eval: ScheduleEval,
}

/// Victim of one replacement round: duplicates first, then the worst
/// makespan, then the oldest member. A member is a duplicate when an older
/// pool member carries the same solution.
fn select_victim(pool: &[Member]) -> usize {
    (0..pool.len())
        .max_by_key(|&i| {
            let dup = pool[..i].iter().any(|m| {
                m.eval.makespan == pool[i].eval.makespan && solutions_equal(&m.sol, &pool[i].sol)
            });
            (dup, pool[i].eval.makespan, std::cmp::Reverse(pool[i].id))
        })
        .expect("pool is never empty during replacement")
}

/// One complete seeded run: seeds `population` tabu-improved random
/// solutions, then repeatedly relinks random unprocessed pairs in both
/// directions, inserting the two products and dropping the two worst
/// members, until the deadline or `known_lb` is reached.
pub fn evolve_run(
    inst: &Instance,
    params: &EvolveParams,
    time_limit: Duration,
    seed: u64,
    known_lb: Option<u64>,
) -> Result<(Solution, ScheduleEval, RunStats), EvolveError> {
    assert!(time_limit > Duration::ZERO, "time limit must be positive");
    assert!(
        params.population >= 2,
        "population needs at least 2 members"
    );
    let t0 = Instant::now();
    let deadline = t0 + time_limit;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::new(t0);
    let mut stats = RelinkStats::default();

    let mk_cfg = |cutoff: usize| {
        let mut cfg = TabuConfig::for_instance(inst, cutoff);
        if let Some(base) = params.tenure_base {
            cfg.tenure_base = base;
        }
        cfg.tenure_spread = params.tenure_spread;
        cfg
    };
    let init_cfg = mk_cfg(params.init_cutoff.unwrap_or(params.strong_cutoff));
    let env = SearchEnv {
        inst,
        slight: mk_cfg(params.slight_cutoff),
        strong: mk_cfg(params.strong_cutoff),
        alpha: params.alpha,
        beta: params.beta,
        deadline: Some(deadline),
        known_lb,
    };

    let mut next_id: u64 = 0;
    let mut pool: Vec<Member> = Vec::new();
    let seed_member = |pool: &mut Vec<Member>,
                       next_id: &mut u64,
                       rng: &mut ChaCha8Rng,
                       tracker: &mut Tracker,
                       stats: &mut RelinkStats| {
        let mut sol = Solution::random(inst, rng);
        if !graph::evaluate(inst, &sol).feasible {
            sol = graph::repair(inst, &sol);
            stats.repairs += 1;
        }
        let (s, e) = tabu::tabu_search(inst, &sol, &init_cfg, Some(deadline), known_lb, rng);
        tracker.offer(&s, &e);
        if pool.iter().any(|m| solutions_equal(&m.sol, &s)) {
            return;
        }
        pool.push(Member {
            id: *next_id,
            sol: s,
            eval: e,
        });
        *next_id += 1;
    };

    let max_attempts = 50 * params.population;
    let mut attempts = 0;
    while pool.len() < params.population && attempts < max_attempts {
        if Instant::now() >= deadline || tracker.reached(known_lb) {
            break;
        }
        attempts += 1;
        seed_member(&mut pool, &mut next_id, &mut rng, &mut tracker, &mut stats);
    }
    if pool.len() < 2 && !tracker.reached(known_lb) {
        // A degenerate instance can have fewer than two distinct solutions;
        // that exhausts attempts, not the budget, and the best stands.
        if Instant::now() >= deadline {
            return Err(EvolveError::BudgetExhaustedInInit { got: pool.len() });
        }
    }

    let all_pairs = |pool: &[Member]| -> Vec<(u64, u64)> {
        let mut pairs = Vec::with_capacity(pool.len() * (pool.len() - 1) / 2);
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                pairs.push((pool[i].id, pool[j].id));
            }
        }
        pairs
    };
    let mut pairs = all_pairs(&pool);
    let mut iterations: u64 = 0;

    while pool.len() >= 2 && !tracker.reached(known_lb) && Instant::now() < deadline {
        tracker.sample();
        if pairs.is_empty() {
            // Every pair processed: keep the best member, reseed the rest.
            let keep = (0..pool.len())
                .min_by_key(|&i| (pool[i].eval.makespan, pool[i].id))
                .expect("pool nonempty");
            pool.swap(0, keep);
            pool.truncate(1);
            let mut attempts = 0;
            while pool.len() < params.population && attempts < max_attempts {
                if Instant::now() >= deadline || tracker.reached(known_lb) {
                    break;
                }
                attempts += 1;
                seed_member(&mut pool, &mut next_id, &mut rng, &mut tracker, &mut stats);
            }
            if pool.len() < 2 {
                break;
            }
            pairs = all_pairs(&pool);
            continue;
        }

        let (ia, ib) = pairs.swap_remove(rng.gen_range(0..pairs.len()));
        let a = pool.iter().position(|m| m.id == ia).expect("live member");
        let b = pool.iter().position(|m| m.id == ib).expect("live member");
        if solutions_equal(&pool[a].sol, &pool[b].sol) {
            continue;
        }
        iterations += 1;

        let (r1, e1) =
            relink::path_relinking(&env, &pool[a].sol, &pool[b].sol, &mut rng, &mut stats);
        tracker.offer(&r1, &e1);
        if tracker.reached(known_lb) {
            break;
        }
        let (r2, e2) =
            relink::path_relinking(&env, &pool[b].sol, &pool[a].sol, &mut rng, &mut stats);
        tracker.offer(&r2, &e2);

        for (sol, eval) in [(r1, e1), (r2, e2)] {
            let id = next_id;
            next_id += 1;
            for other in &pool {
                pairs.push((other.id, id));
            }
            pool.push(Member { id, sol, eval });
        }
        for _ in 0..2 {
            let victim = select_victim(&pool);
            let vid = pool[victim].id;
            pool.remove(victim);
            pairs.retain(|&(x, y)| x != vid && y != vid);
        }
        if tracker.reached(known_lb) {
            break;
        }
    }

    let (sol, eval) = tracker
        .best
        .ok_or(EvolveError::BudgetExhaustedInInit { got: 0 })?;
    let stats = RunStats {
        best_makespan: eval.makespan,
        time_to_best: tracker.at,
        relinks: stats.relinks,
        repairs: stats.repairs,
        iterations,
        trace: tracker.trace,
    };
    Ok((sol, eval, stats))
}
