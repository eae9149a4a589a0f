//! Disjunctive-graph semantics of a solution: schedule evaluation, critical
//! structure, and repair of cyclic solutions.
//!
//! A solution induces a digraph on operations: route arcs `job_pred(v) -> v`
//! and machine arcs between consecutive operations of each permutation, every
//! arc weighted by the duration of its tail. Feasible solutions are exactly
//! the acyclic ones; their semi-active schedule starts each operation at the
//! length of the longest arc-weighted path into it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{Instance, OpId, Solution};

/// Longest-path data for one solution.
#[derive(Debug, Clone)]
pub struct ScheduleEval {
    pub feasible: bool,
    /// Earliest start of each operation (its head). Unspecified if infeasible.
    pub start: Vec<u64>,
    /// Longest weighted path from any source into the operation, excluding
    /// its own duration. Identical to `start` for feasible solutions.
    pub head: Vec<u64>,
    /// Longest weighted path from the operation to any sink, excluding its
    /// own duration.
    pub tail: Vec<u64>,
    pub makespan: u64,
    /// One longest (critical) path, in schedule order. Every op on it
    /// satisfies `head + duration + tail == makespan`.
    pub critical_ops: Vec<OpId>,
}

/// Maximal run of consecutive critical-path operations on one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalBlock {
    pub machine: usize,
    pub ops: Vec<OpId>,
}

/// Machine predecessor/successor of each op under a solution's permutations.
fn machine_links(inst: &Instance, sol: &Solution) -> (Vec<Option<OpId>>, Vec<Option<OpId>>) {
    let o = inst.total_ops();
    let mut pred = vec![None; o];
    let mut succ = vec![None; o];
    for perm in &sol.perm {
        for w in perm.windows(2) {
            pred[w[1]] = Some(w[0]);
            succ[w[0]] = Some(w[1]);
        }
    }
    (pred, succ)
}

/// Kahn topological order over route and machine arcs; `None` when cyclic.
fn topo_order(
    inst: &Instance,
    mpred: &[Option<OpId>],
    msucc: &[Option<OpId>],
) -> Option<Vec<OpId>> {
    let o = inst.total_ops();
    let mut indegree = vec![0u32; o];
    for v in 0..o {
        indegree[v] = inst.job_pred[v].is_some() as u32 + mpred[v].is_some() as u32;
    }
    let mut queue: Vec<OpId> = (0..o).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(o);
    while let Some(v) = queue.pop() {
        order.push(v);
        for succ in [inst.job_succ[v], msucc[v]].into_iter().flatten() {
            indegree[succ] -= 1;
            if indegree[succ] == 0 {
                queue.push(succ);
            }
        }
    }
    (order.len() == o).then_some(order)
}

/// Evaluates a solution. For feasible (acyclic) solutions all schedule fields
/// are exact; for cyclic ones only `feasible` is meaningful.
pub fn evaluate(inst: &Instance, sol: &Solution) -> ScheduleEval {
    debug_assert!(sol.is_shape_valid(inst));
    let o = inst.total_ops();
    let (mpred, msucc) = machine_links(inst, sol);

    let Some(order) = topo_order(inst, &mpred, &msucc) else {
        return ScheduleEval {
            feasible: false,
            start: Vec::new(),
            head: Vec::new(),
            tail: Vec::new(),
            makespan: 0,
            critical_ops: Vec::new(),
        };
    };

    let dur = &inst.op_duration;
    let mut head = vec![0u64; o];
    for &v in &order {
        for pred in [inst.job_pred[v], mpred[v]].into_iter().flatten() {
            head[v] = head[v].max(head[pred] + dur[pred]);
        }
    }
    let mut tail = vec![0u64; o];
    for &v in order.iter().rev() {
        for succ in [inst.job_succ[v], msucc[v]].into_iter().flatten() {
            tail[v] = tail[v].max(dur[succ] + tail[succ]);
        }
    }
    let makespan = (0..o).map(|v| head[v] + dur[v]).max().unwrap_or(0);

    // Walk one longest path backward from its last operation: from `v` step
    // to a predecessor whose completion equals head(v), preferring the
    // machine arc. The sink is the lowest-id op finishing at the makespan.
    let last = (0..o)
        .filter(|&v| tail[v] == 0 && head[v] + dur[v] == makespan)
        .min();
    let mut critical_ops = Vec::new();
    if let Some(mut v) = last {
        critical_ops.push(v);
        loop {
            let tight = |p: &OpId| head[*p] + dur[*p] == head[v];
            let step = mpred[v].filter(tight).or(inst.job_pred[v].filter(tight));
            match step {
                Some(p) => {
                    critical_ops.push(p);
                    v = p;
                }
                None => break,
            }
        }
        critical_ops.reverse();
    }

    ScheduleEval {
        feasible: true,
        start: head.clone(),
        head,
        tail,
        makespan,
        critical_ops,
    }
}

/// Partitions `eval.critical_ops` into maximal same-machine runs, in path
/// order. Ops inside one block are consecutive in that machine's permutation.
pub fn critical_blocks(inst: &Instance, eval: &ScheduleEval) -> Vec<CriticalBlock> {
    let mut blocks: Vec<CriticalBlock> = Vec::new();
    for &op in &eval.critical_ops {
        let machine = inst.op_machine[op];
        match blocks.last_mut() {
            Some(b) if b.machine == machine => b.ops.push(op),
            _ => blocks.push(CriticalBlock {
                machine,
                ops: vec![op],
            }),
        }
    }
    blocks
}

/// Returns a feasible solution near the input. Feasible solutions come back
/// unchanged; cyclic ones are rebuilt by a list decoder that dispatches
/// route-ready operations in the order of their position in the input
/// permutation (ties: lower machine, then lower op id).
pub fn repair(inst: &Instance, sol: &Solution) -> Solution {
    debug_assert!(sol.is_shape_valid(inst));
    let (mpred, msucc) = machine_links(inst, sol);
    if topo_order(inst, &mpred, &msucc).is_some() {
        return sol.clone();
    }

    let o = inst.total_ops();
    let mut pos_in = vec![0usize; o];
    for perm in &sol.perm {
        for (i, &op) in perm.iter().enumerate() {
            pos_in[op] = i;
        }
    }

    let key = |op: OpId| Reverse((pos_in[op], inst.op_machine[op], op));
    let mut ready: BinaryHeap<_> = inst.ops_of_job.iter().map(|ops| key(ops[0])).collect();
    let mut perm: Vec<Vec<OpId>> = inst
        .ops_of_machine
        .iter()
        .map(|ops| Vec::with_capacity(ops.len()))
        .collect();
    while let Some(Reverse((_, machine, op))) = ready.pop() {
        perm[machine].push(op);
        if let Some(succ) = inst.job_succ[op] {
            ready.push(key(succ));
        }
    }
    // Appending in one global route-respecting order cannot create a cycle.
    Solution { perm }
}
