//! Tabu search over critical-block reinsertion moves.
//!
//! Moves take an operation of a critical block and reinsert it at the
//! opposite end of its block. Candidates are screened by an acyclicity
//! precondition on current heads and tails and ranked by a segment-local
//! makespan estimate. Applying a move records every operation ordering it
//! destroyed; a move that would restore a recently destroyed ordering is
//! tabu until that record expires. Keying the memory by ordered pairs
//! rather than by the moved operation matters: the inverse of a move is
//! often expressed through a different operation (swapping a two-op block
//! back is a move of the other op), which per-op signatures cannot see.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;

use crate::graph::{self, ScheduleEval};
use crate::model::{solutions_equal, Instance, OpId, Solution};

/// Which end of its critical block an operation is reinserted at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    BlockFront,
    BlockRear,
}

impl Target {
    pub fn opposite(self) -> Target {
        match self {
            Target::BlockFront => Target::BlockRear,
            Target::BlockRear => Target::BlockFront,
        }
    }
}

/// Reinsertion of one critical operation at the opposite end of its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub machine: usize,
    pub op: OpId,
    pub target: Target,
    /// Index the operation occupies in the machine permutation beforehand.
    pub from_pos: usize,
    /// Index the operation occupies in the machine permutation afterwards.
    pub insert_pos: usize,
    /// Segment-local makespan estimate of the moved solution.
    pub estimate: u64,
}

impl Move {
    /// Operations the moved op jumps across, in current permutation order.
    fn jumped<'a>(&self, sol: &'a Solution) -> &'a [OpId] {
        let perm = &sol.perm[self.machine];
        match self.target {
            Target::BlockRear => &perm[self.from_pos + 1..=self.insert_pos],
            Target::BlockFront => &perm[self.insert_pos..self.from_pos],
        }
    }
}

#[derive(Debug, Clone)]
pub struct TabuConfig {
    /// Stop after this many consecutive iterations without improving the
    /// best makespan found by this search.
    pub cutoff: usize,
    /// Fixed part of the tabu tenure.
    pub tenure_base: usize,
    /// Exclusive upper bound of the random tenure increment.
    pub tenure_spread: usize,
}

impl TabuConfig {
    /// Tenure scaled to instance size; the cutoff is the caller's budget.
    /// The scale was tuned on 10x10 through 30x20 instances: each applied
    /// move forbids one ordering per jumped op, so tenures much past
    /// (n + m) / 4 over-block the neighborhood and trap the walk high
    /// above its best.
    pub fn for_instance(inst: &Instance, cutoff: usize) -> Self {
        TabuConfig {
            cutoff,
            tenure_base: 2 + (inst.n_jobs + inst.n_machines).div_ceil(4),
            tenure_spread: 6,
        }
    }
}

/// All block-end reinsertions of the current critical path that pass the
/// acyclicity precondition. For a two-op block both reinsertions produce the
/// same permutation, so only the forward one is kept.
pub fn generate_moves(inst: &Instance, sol: &Solution, eval: &ScheduleEval) -> Vec<Move> {
    debug_assert!(eval.feasible);
    let mut pos_of = vec![0usize; inst.total_ops()];
    for perm in &sol.perm {
        for (i, &op) in perm.iter().enumerate() {
            pos_of[op] = i;
        }
    }

    let mut moves = Vec::new();
    for block in graph::critical_blocks(inst, eval) {
        let ops = &block.ops;
        if ops.len() < 2 {
            continue;
        }
        let first = ops[0];
        let last = ops[ops.len() - 1];
        let (bstart, bend) = (pos_of[first], pos_of[last]);
        if bend - bstart + 1 != ops.len() {
            // Block ops are not adjacent on the machine; happens only when a
            // job revisits a machine. Reinsertion bounds are ill-defined then.
            continue;
        }
        let mut push = |op: OpId, target: Target| {
            if let Some(mv) = make_move(
                inst,
                eval,
                sol,
                block.machine,
                op,
                pos_of[op],
                target,
                bstart,
                bend,
            ) {
                moves.push(mv);
            }
        };
        if ops.len() == 2 {
            push(first, Target::BlockRear);
        } else {
            for &op in &ops[1..ops.len() - 1] {
                push(op, Target::BlockFront);
                push(op, Target::BlockRear);
            }
            push(first, Target::BlockRear);
            push(last, Target::BlockFront);
        }
    }
    moves
}

/// Screens one reinsertion and computes its estimate. `None` means the move
/// could close a cycle through another machine and is discarded.
#[allow(clippy::too_many_arguments)]
fn make_move(
    inst: &Instance,
    eval: &ScheduleEval,
    sol: &Solution,
    machine: usize,
    op: OpId,
    op_pos: usize,
    target: Target,
    bstart: usize,
    bend: usize,
) -> Option<Move> {
    let perm = &sol.perm[machine];
    let dur = &inst.op_duration;
    let ok = match target {
        // op goes after the block's last op v. Safe when the route successor
        // of op cannot already reach v: r(v) < r(js) + p(js).
        Target::BlockRear => match inst.job_succ[op] {
            Some(js) => eval.head[perm[bend]] < eval.head[js] + dur[js],
            None => true,
        },
        // op goes before the block's first op v. Mirror condition on tails:
        // q(v) < q(jp) + p(jp).
        Target::BlockFront => match inst.job_pred[op] {
            Some(jp) => eval.tail[perm[bstart]] < eval.tail[jp] + dur[jp],
            None => true,
        },
    };
    if !ok {
        return None;
    }
    let insert_pos = match target {
        Target::BlockRear => bend,
        Target::BlockFront => bstart,
    };
    let mut mv = Move {
        machine,
        op,
        target,
        from_pos: op_pos,
        insert_pos,
        estimate: 0,
    };
    mv.estimate = estimate_move(inst, eval, sol, &mv);
    Some(mv)
}

/// Approximate makespan after `mv`: heads and tails are recomputed over the
/// reordered segment only, using current values outside it. Exact whenever
/// the surroundings of the segment keep their heads and tails and a critical
/// path still crosses the segment.
pub fn estimate_move(inst: &Instance, eval: &ScheduleEval, sol: &Solution, mv: &Move) -> u64 {
    let perm = &sol.perm[mv.machine];
    debug_assert_eq!(perm[mv.from_pos], mv.op);
    let dur = &inst.op_duration;
    let (from, to) = match mv.target {
        Target::BlockRear => (mv.from_pos, mv.insert_pos),
        Target::BlockFront => (mv.insert_pos, mv.from_pos),
    };
    debug_assert!(from <= to && to < perm.len());

    // Segment in post-move order.
    let seg: Vec<OpId> = match mv.target {
        Target::BlockRear => perm[from + 1..=to]
            .iter()
            .chain(std::iter::once(&mv.op))
            .copied()
            .collect(),
        Target::BlockFront => std::iter::once(&mv.op)
            .chain(perm[from..to].iter())
            .copied()
            .collect(),
    };

    // New heads, left to right: previous machine completion in the segment
    // vs. the unchanged route predecessor.
    let mut heads = Vec::with_capacity(seg.len());
    let mut prev_done = match from.checked_sub(1) {
        Some(i) => {
            let p = perm[i];
            eval.head[p] + dur[p]
        }
        None => 0,
    };
    for &x in &seg {
        let route = inst.job_pred[x].map_or(0, |p| eval.head[p] + dur[p]);
        let h = route.max(prev_done);
        heads.push(h);
        prev_done = h + dur[x];
    }

    // New tails, right to left, folded straight into the path-length maximum.
    let mut next_q = perm.get(to + 1).map_or(0, |&s| dur[s] + eval.tail[s]);
    let mut longest = 0u64;
    for (i, &x) in seg.iter().enumerate().rev() {
        let route = inst.job_succ[x].map_or(0, |s| dur[s] + eval.tail[s]);
        let q = route.max(next_q);
        longest = longest.max(heads[i] + dur[x] + q);
        next_q = q + dur[x];
    }
    longest
}

/// Applies a reinsertion to a copy of the solution.
pub fn apply_move(sol: &Solution, mv: &Move) -> Solution {
    let mut next = sol.clone();
    let perm = &mut next.perm[mv.machine];
    let i = perm
        .iter()
        .position(|&x| x == mv.op)
        .expect("move op runs on its machine");
    perm.remove(i);
    perm.insert(mv.insert_pos, mv.op);
    next
}

/// Tabu search from a feasible start. Returns the best solution found and
/// its evaluation; never worse than the start. Stops at `cfg.cutoff`
/// consecutive non-improving iterations, at the deadline, or as soon as the
/// best makespan reaches `known_lb`.
pub fn tabu_search<R: Rng + ?Sized>(
    inst: &Instance,
    start: &Solution,
    cfg: &TabuConfig,
    deadline: Option<Instant>,
    known_lb: Option<u64>,
    rng: &mut R,
) -> (Solution, ScheduleEval) {
    let mut cur = start.clone();
    let mut cur_eval = graph::evaluate(inst, &cur);
    assert!(cur_eval.feasible, "tabu search needs a feasible start");
    let mut best = cur.clone();
    let mut best_eval = cur_eval.clone();
    let reached = |e: &ScheduleEval| known_lb.is_some_and(|lb| e.makespan <= lb);
    if reached(&best_eval) {
        return (best, best_eval);
    }

    let mut memory = TabuMemory::default();
    let mut iter: u64 = 0;
    let mut stale = 0usize;

    while stale < cfg.cutoff {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        iter += 1;
        let moves = generate_moves(inst, &cur, &cur_eval);
        let stepped = if moves.is_empty() {
            escape_swap(inst, &mut cur, &mut cur_eval, rng)
        } else {
            step(
                inst,
                &mut cur,
                &mut cur_eval,
                moves,
                cfg,
                iter,
                best_eval.makespan,
                &mut memory,
                rng,
            )
        };
        if !stepped {
            break;
        }
        if cur_eval.makespan < best_eval.makespan {
            best = cur.clone();
            best_eval = cur_eval.clone();
            stale = 0;
            if reached(&best_eval) {
                break;
            }
        } else {
            stale += 1;
        }
    }
    (best, best_eval)
}

/// Recency memory of the search. `forbidden[(a, b)]` holds the last
/// iteration at which reordering a machine so that `a` runs before `b`
/// again is still tabu; entries are written for every ordering a move
/// destroys. `hits` counts applications per (op, direction) for
/// tie-breaking.
#[derive(Default)]
struct TabuMemory {
    forbidden: HashMap<(OpId, OpId), u64>,
    hits: HashMap<(OpId, Target), u64>,
}

impl TabuMemory {
    /// Orderings `mv` would re-establish, as forbidden-map keys.
    fn restored<'a>(mv: &Move, sol: &'a Solution) -> impl Iterator<Item = (OpId, OpId)> + 'a {
        let op = mv.op;
        let target = mv.target;
        mv.jumped(sol).iter().map(move |&w| match target {
            Target::BlockRear => (w, op),
            Target::BlockFront => (op, w),
        })
    }

    fn is_tabu(&self, mv: &Move, sol: &Solution, iter: u64) -> bool {
        Self::restored(mv, sol).any(|pair| {
            self.forbidden
                .get(&pair)
                .is_some_and(|&until| until >= iter)
        })
    }

    /// Iteration after which `mv` stops being tabu.
    fn expiry(&self, mv: &Move, sol: &Solution) -> u64 {
        Self::restored(mv, sol)
            .filter_map(|pair| self.forbidden.get(&pair).copied())
            .max()
            .unwrap_or(0)
    }

    /// Records the orderings destroyed by applying `mv` to `sol`.
    fn block_undo(&mut self, mv: &Move, sol: &Solution, until: u64) {
        for &w in mv.jumped(sol) {
            let pair = match mv.target {
                Target::BlockRear => (mv.op, w),
                Target::BlockFront => (w, mv.op),
            };
            self.forbidden.insert(pair, until);
        }
    }

    /// Makes `mv` itself tabu (for rejected candidates).
    fn block_move(&mut self, mv: &Move, sol: &Solution, until: u64) {
        for pair in Self::restored(mv, sol) {
            self.forbidden.insert(pair, until);
        }
    }
}

/// Selects and applies one move. Cyclic candidates (possible despite the
/// precondition only in pathological cases) are rejected and marked tabu.
#[allow(clippy::too_many_arguments)]
fn step<R: Rng + ?Sized>(
    inst: &Instance,
    cur: &mut Solution,
    cur_eval: &mut ScheduleEval,
    mut live: Vec<Move>,
    cfg: &TabuConfig,
    iter: u64,
    best_makespan: u64,
    memory: &mut TabuMemory,
    rng: &mut R,
) -> bool {
    let tenure = |rng: &mut R| {
        cfg.tenure_base as u64
            + if cfg.tenure_spread == 0 {
                0
            } else {
                rng.gen_range(0..cfg.tenure_spread as u64)
            }
    };
    while !live.is_empty() {
        let pick = choose(&live, cur, iter, best_makespan, memory, rng);
        let mv = live.swap_remove(pick);
        let cand = apply_move(cur, &mv);
        let cand_eval = graph::evaluate(inst, &cand);
        if !cand_eval.feasible {
            let t = tenure(rng);
            memory.block_move(&mv, cur, iter + t);
            continue;
        }
        let t = tenure(rng);
        memory.block_undo(&mv, cur, iter + t);
        *memory.hits.entry((mv.op, mv.target)).or_insert(0) += 1;
        *cur = cand;
        *cur_eval = cand_eval;
        return true;
    }
    escape_swap(inst, cur, cur_eval, rng)
}

/// Move selection: best estimate among non-tabu or aspiring moves (ties by
/// fewer past applications, then uniformly at random); if everything is tabu
/// without aspiration, the move whose tabu status expires first.
fn choose<R: Rng + ?Sized>(
    live: &[Move],
    sol: &Solution,
    iter: u64,
    best_makespan: u64,
    memory: &TabuMemory,
    rng: &mut R,
) -> usize {
    let allowed = |mv: &Move| !memory.is_tabu(mv, sol, iter) || mv.estimate < best_makespan;
    let key = |mv: &Move| {
        (
            mv.estimate,
            memory.hits.get(&(mv.op, mv.target)).copied().unwrap_or(0),
        )
    };

    if let Some(k) = live.iter().filter(|m| allowed(m)).map(key).min() {
        let ties: Vec<usize> = (0..live.len())
            .filter(|&i| allowed(&live[i]) && key(&live[i]) == k)
            .collect();
        ties[rng.gen_range(0..ties.len())]
    } else {
        (0..live.len())
            .min_by_key(|&i| (memory.expiry(&live[i], sol), live[i].estimate))
            .expect("live moves nonempty")
    }
}

/// Escape step for states whose critical path has no two-op block: swap the
/// last critical op (falling back to earlier ones) with a random machine
/// neighbor, repairing if the swap closes a cycle. False when no critical op
/// shares its machine with another op, which leaves nothing to permute.
fn escape_swap<R: Rng + ?Sized>(
    inst: &Instance,
    cur: &mut Solution,
    cur_eval: &mut ScheduleEval,
    rng: &mut R,
) -> bool {
    for &op in cur_eval.critical_ops.iter().rev() {
        let m = inst.op_machine[op];
        let len = cur.perm[m].len();
        if len < 2 {
            continue;
        }
        let i = cur.perm[m]
            .iter()
            .position(|&x| x == op)
            .expect("critical op runs on its machine");
        // Short-circuit keeps the rng untouched at the rear boundary.
        let j = if i == 0 {
            1
        } else if i + 1 == len || rng.gen_bool(0.5) {
            i - 1
        } else {
            i + 1
        };
        let mut next = cur.clone();
        next.perm[m].swap(i, j);
        let mut eval = graph::evaluate(inst, &next);
        if !eval.feasible {
            next = graph::repair(inst, &next);
            if solutions_equal(&next, cur) {
                continue;
            }
            eval = graph::evaluate(inst, &next);
        }
        *cur = next;
        *cur_eval = eval;
        return true;
    }
    false
}
