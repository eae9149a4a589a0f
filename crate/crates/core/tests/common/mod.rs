//! Independent oracles for the property suites.
//!
//! Everything here recomputes schedule facts from first principles, sharing
//! no code with the library: cycle detection is a colored DFS, longest paths
//! come from Bellman-Ford style relaxation, and `simulate` decodes a
//! solution by dispatching ready operations one at a time. Tests compare the
//! library's answers against these.

// Each test binary links this module and uses its own subset of the oracles.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use jobshop_core::{Instance, OpId, Solution};

/// Precedence arcs of a solution: every route arc and every consecutive
/// machine pair, as (pred, succ).
pub fn arcs(inst: &Instance, sol: &Solution) -> Vec<(OpId, OpId)> {
    let mut out = Vec::new();
    for op in 0..inst.total_ops() {
        if let Some(next) = inst.job_succ[op] {
            out.push((op, next));
        }
    }
    for perm in &sol.perm {
        for pair in perm.windows(2) {
            out.push((pair[0], pair[1]));
        }
    }
    out
}

/// Colored-DFS acyclicity check over the solution's precedence arcs.
pub fn is_acyclic(inst: &Instance, sol: &Solution) -> bool {
    let n = inst.total_ops();
    let mut succs = vec![Vec::new(); n];
    for (u, v) in arcs(inst, sol) {
        succs[u].push(v);
    }
    // 0 = white, 1 = on stack, 2 = done.
    let mut color = vec![0u8; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        // Iterative DFS; (node, next child index).
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            if *idx < succs[node].len() {
                let child = succs[node][*idx];
                *idx += 1;
                match color[child] {
                    0 => {
                        color[child] = 1;
                        stack.push((child, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
            }
        }
    }
    true
}

/// Earliest start times by exhaustive relaxation (no topological order),
/// plus the makespan. `None` when the precedence arcs contain a cycle.
pub fn longest_path_eval(inst: &Instance, sol: &Solution) -> Option<(Vec<u64>, u64)> {
    if !is_acyclic(inst, sol) {
        return None;
    }
    let n = inst.total_ops();
    let edges = arcs(inst, sol);
    let mut start = vec![0u64; n];
    // On a DAG with n nodes, n rounds of relaxation reach the fixpoint.
    for _ in 0..n {
        let mut changed = false;
        for &(u, v) in &edges {
            let cand = start[u] + inst.op_duration[u];
            if cand > start[v] {
                start[v] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let makespan = (0..n)
        .map(|op| start[op] + inst.op_duration[op])
        .max()
        .unwrap_or(0);
    Some((start, makespan))
}

/// Longest downstream duration sum per op (the library's "tail"), by
/// relaxation over reversed arcs.
pub fn longest_tails(inst: &Instance, sol: &Solution) -> Option<Vec<u64>> {
    if !is_acyclic(inst, sol) {
        return None;
    }
    let n = inst.total_ops();
    let edges = arcs(inst, sol);
    let mut tail = vec![0u64; n];
    for _ in 0..n {
        let mut changed = false;
        for &(u, v) in &edges {
            let cand = inst.op_duration[v] + tail[v];
            if cand > tail[u] {
                tail[u] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Some(tail)
}

/// Dispatch-based decoder: repeatedly starts any operation whose job
/// predecessor is done and which is next in its machine's permutation, at
/// the earliest feasible time. `None` when it deadlocks (cyclic orders).
pub fn simulate(inst: &Instance, sol: &Solution) -> Option<(Vec<u64>, u64)> {
    let n = inst.total_ops();
    let mut start = vec![0u64; n];
    let mut done = vec![false; n];
    let mut next_on_machine = vec![0usize; inst.n_machines];
    let mut scheduled = 0usize;
    while scheduled < n {
        let mut progressed = false;
        for (m, cursor) in next_on_machine.iter_mut().enumerate() {
            let idx = *cursor;
            if idx >= sol.perm[m].len() {
                continue;
            }
            let op = sol.perm[m][idx];
            let job_ready = match inst.job_pred[op] {
                Some(p) => done[p],
                None => true,
            };
            if !job_ready {
                continue;
            }
            let job_free = inst.job_pred[op].map_or(0, |p| start[p] + inst.op_duration[p]);
            let machine_free = if idx == 0 {
                0
            } else {
                let prev = sol.perm[m][idx - 1];
                start[prev] + inst.op_duration[prev]
            };
            start[op] = job_free.max(machine_free);
            done[op] = true;
            *cursor += 1;
            scheduled += 1;
            progressed = true;
        }
        if !progressed {
            return None;
        }
    }
    let makespan = (0..n)
        .map(|op| start[op] + inst.op_duration[op])
        .max()
        .unwrap_or(0);
    Some((start, makespan))
}

/// Random instance where every job visits every machine once in a shuffled
/// order, durations drawn from 0..=dur_max.
pub fn random_full_instance(
    rng: &mut ChaCha8Rng,
    n_jobs: usize,
    n_machines: usize,
    dur_max: u64,
) -> Instance {
    let routes: Vec<Vec<(usize, u64)>> = (0..n_jobs)
        .map(|_| {
            let mut machines: Vec<usize> = (0..n_machines).collect();
            machines.shuffle(rng);
            machines
                .into_iter()
                .map(|m| (m, rng.gen_range(0..=dur_max)))
                .collect()
        })
        .collect();
    Instance::new(n_jobs, n_machines, &routes).expect("random routes are valid")
}

/// All permutations of `items`, in lexicographic order of index choices.
pub fn permutations(items: &[OpId]) -> Vec<Vec<OpId>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for tail in permutations(&rest) {
            let mut perm = vec![head];
            perm.extend(tail);
            out.push(perm);
        }
    }
    out
}
