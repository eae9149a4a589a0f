//! Problem data and the machine-permutation solution encoding.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Dense operation id. Ids are job-major: job 0's operations come first,
/// in route order, then job 1's, and so on.
pub type OpId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("job {job} has an empty route")]
    EmptyRoute { job: usize },
    #[error("job {job} step {step}: machine {machine} out of range (instance has {n_machines})")]
    MachineOutOfRange {
        job: usize,
        step: usize,
        machine: usize,
        n_machines: usize,
    },
    #[error("job {job} visits machine {machine} more than once")]
    DuplicateMachine { job: usize, machine: usize },
}

/// Immutable job-shop instance. Each job is a fixed route of operations,
/// each operation needs one machine for an uninterruptible duration.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n_jobs: usize,
    pub n_machines: usize,
    /// Machine required by each operation, indexed by `OpId`.
    pub op_machine: Vec<usize>,
    /// Processing time of each operation, indexed by `OpId`.
    pub op_duration: Vec<u64>,
    /// Owning job of each operation.
    pub job_of: Vec<usize>,
    /// Route predecessor of each operation, `None` for a job's first op.
    pub job_pred: Vec<Option<OpId>>,
    /// Route successor of each operation, `None` for a job's last op.
    pub job_succ: Vec<Option<OpId>>,
    /// Operations of each job in route order.
    pub ops_of_job: Vec<Vec<OpId>>,
    /// Operations that run on each machine, in job-major id order.
    pub ops_of_machine: Vec<Vec<OpId>>,
}

impl Instance {
    /// Builds an instance from per-job routes of `(machine, duration)` steps.
    /// Benchmark instances visit every machine exactly once per job; routes
    /// that revisit a machine are rejected here.
    pub fn new(
        n_jobs: usize,
        n_machines: usize,
        job_routes: &[Vec<(usize, u64)>],
    ) -> Result<Self, ModelError> {
        Self::build(n_jobs, n_machines, job_routes, false)
    }

    /// Like [`Instance::new`] but allows a job to revisit a machine.
    pub fn new_permissive(
        n_jobs: usize,
        n_machines: usize,
        job_routes: &[Vec<(usize, u64)>],
    ) -> Result<Self, ModelError> {
        Self::build(n_jobs, n_machines, job_routes, true)
    }

    fn build(
        n_jobs: usize,
        n_machines: usize,
        job_routes: &[Vec<(usize, u64)>],
        allow_revisit: bool,
    ) -> Result<Self, ModelError> {
        assert_eq!(job_routes.len(), n_jobs, "route count must equal n_jobs");
        let total: usize = job_routes.iter().map(Vec::len).sum();

        let mut inst = Instance {
            n_jobs,
            n_machines,
            op_machine: Vec::with_capacity(total),
            op_duration: Vec::with_capacity(total),
            job_of: Vec::with_capacity(total),
            job_pred: Vec::with_capacity(total),
            job_succ: Vec::with_capacity(total),
            ops_of_job: Vec::with_capacity(n_jobs),
            ops_of_machine: vec![Vec::new(); n_machines],
        };

        for (job, route) in job_routes.iter().enumerate() {
            if route.is_empty() {
                return Err(ModelError::EmptyRoute { job });
            }
            let mut seen = vec![false; n_machines];
            let mut ops = Vec::with_capacity(route.len());
            for (step, &(machine, duration)) in route.iter().enumerate() {
                if machine >= n_machines {
                    return Err(ModelError::MachineOutOfRange {
                        job,
                        step,
                        machine,
                        n_machines,
                    });
                }
                if seen[machine] && !allow_revisit {
                    return Err(ModelError::DuplicateMachine { job, machine });
                }
                seen[machine] = true;
                let id = inst.op_machine.len();
                inst.op_machine.push(machine);
                inst.op_duration.push(duration);
                inst.job_of.push(job);
                inst.job_pred
                    .push(if step == 0 { None } else { Some(id - 1) });
                inst.job_succ.push(if step + 1 == route.len() {
                    None
                } else {
                    Some(id + 1)
                });
                inst.ops_of_machine[machine].push(id);
                ops.push(id);
            }
            inst.ops_of_job.push(ops);
        }
        Ok(inst)
    }

    pub fn total_ops(&self) -> usize {
        self.op_machine.len()
    }
}

/// A solution is one processing order (permutation) per machine. Orders may
/// conflict with job routes; such solutions are cyclic and unschedulable,
/// see [`crate::graph::evaluate`] and [`crate::graph::repair`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    /// `perm[k]` lists the operations of machine `k` in processing order.
    pub perm: Vec<Vec<OpId>>,
}

impl Solution {
    /// Uniformly random processing order on every machine. The result may
    /// be cyclic.
    pub fn random<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Self {
        let perm = inst
            .ops_of_machine
            .iter()
            .map(|ops| {
                let mut p = ops.clone();
                p.shuffle(rng);
                p
            })
            .collect();
        Solution { perm }
    }

    /// True when every machine's order is a permutation of exactly the
    /// operations that run on that machine.
    pub fn is_shape_valid(&self, inst: &Instance) -> bool {
        if self.perm.len() != inst.n_machines {
            return false;
        }
        self.perm.iter().enumerate().all(|(k, perm)| {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            sorted == inst.ops_of_machine[k]
        })
    }
}

/// Positionwise equality of two solutions for the same instance.
pub fn solutions_equal(a: &Solution, b: &Solution) -> bool {
    assert_eq!(
        a.perm.len(),
        b.perm.len(),
        "solutions belong to different instances"
    );
    a.perm == b.perm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Instance {
        // J0: M0 then M1; J1: M1 then M0.
        Instance::new(2, 2, &[vec![(0, 3), (1, 2)], vec![(1, 4), (0, 1)]]).unwrap()
    }

    #[test]
    fn ids_are_job_major() {
        let inst = two_by_two();
        assert_eq!(inst.total_ops(), 4);
        assert_eq!(inst.job_of, vec![0, 0, 1, 1]);
        assert_eq!(inst.op_machine, vec![0, 1, 1, 0]);
        assert_eq!(inst.job_pred, vec![None, Some(0), None, Some(2)]);
        assert_eq!(inst.job_succ, vec![Some(1), None, Some(3), None]);
        assert_eq!(inst.ops_of_machine, vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn rejects_machine_out_of_range() {
        let err = Instance::new(1, 2, &[vec![(0, 1), (2, 1)]]).unwrap_err();
        assert_eq!(
            err,
            ModelError::MachineOutOfRange {
                job: 0,
                step: 1,
                machine: 2,
                n_machines: 2
            }
        );
    }

    #[test]
    fn rejects_duplicate_machine_unless_permissive() {
        let routes = vec![vec![(0, 1), (0, 2)]];
        let err = Instance::new(1, 2, &routes).unwrap_err();
        assert_eq!(err, ModelError::DuplicateMachine { job: 0, machine: 0 });
        let inst = Instance::new_permissive(1, 2, &routes).unwrap();
        assert_eq!(inst.ops_of_machine[0], vec![0, 1]);
    }

    #[test]
    fn rejects_empty_route() {
        let err = Instance::new(1, 1, &[vec![]]).unwrap_err();
        assert_eq!(err, ModelError::EmptyRoute { job: 0 });
    }

    #[test]
    fn random_solution_is_shape_valid() {
        let inst = two_by_two();
        let mut rng = rand::thread_rng();
        for _ in 0..20 {
            let sol = Solution::random(&inst, &mut rng);
            assert!(sol.is_shape_valid(&inst));
        }
    }

    #[test]
    fn equality_is_positionwise() {
        let a = Solution {
            perm: vec![vec![0, 3], vec![1, 2]],
        };
        let b = Solution {
            perm: vec![vec![3, 0], vec![1, 2]],
        };
        assert!(solutions_equal(&a, &a.clone()));
        assert!(!solutions_equal(&a, &b));
    }
}
