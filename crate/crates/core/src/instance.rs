//! Immutable problem instances: machines, two-size jobs, eligibility sets,
//! schedules, and the discrete grid of makespan guesses.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::numerics::{int, Rational};

/// Index of a machine in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Machine(pub u32);

impl Machine {
    pub fn ix(self) -> usize {
        self.0 as usize
    }
}

/// Index of a job in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub u32);

impl JobId {
    pub fn ix(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    /// Processing time 1.
    Big,
    /// Processing time epsilon.
    Small,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub name: String,
    pub size: SizeClass,
    /// Eligible machines, deduplicated, in declaration order.
    pub eligible: Vec<Machine>,
}

/// A validated, immutable instance.
///
/// Jobs and machines are referred to by their declaration indices
/// everywhere in the solver; names survive for I/O.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    epsilon: Rational,
    machine_names: Vec<String>,
    jobs: Vec<Job>,
    big_jobs: Vec<JobId>,
    small_jobs: Vec<JobId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsilonOutOfRange,
    #[error("duplicate machine id {0:?}")]
    DuplicateMachine(String),
    #[error("duplicate job id {0:?}")]
    DuplicateJob(String),
    #[error("job {0:?} has an empty eligibility set")]
    EmptyEligibility(String),
    #[error("job {0:?} references unknown machine {1:?}")]
    UnknownMachine(String, String),
}

/// Raw instance data as it appears in input files, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    pub epsilon: Rational,
    pub machines: Vec<String>,
    pub jobs: Vec<RawJob>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawJob {
    pub id: String,
    pub size: SizeClass,
    pub eligible: Vec<String>,
}

/// Report every violation in `raw`; an empty list means it will convert
/// into an [`Instance`].
pub fn validate(raw: &RawInstance) -> Vec<Violation> {
    let mut violations = Vec::new();
    if !(raw.epsilon > int(0) && raw.epsilon < int(1)) {
        violations.push(Violation::EpsilonOutOfRange);
    }
    let mut machines = BTreeSet::new();
    for m in &raw.machines {
        if !machines.insert(m.clone()) {
            violations.push(Violation::DuplicateMachine(m.clone()));
        }
    }
    let mut jobs = BTreeSet::new();
    for j in &raw.jobs {
        if !jobs.insert(j.id.clone()) {
            violations.push(Violation::DuplicateJob(j.id.clone()));
        }
        if j.eligible.is_empty() {
            violations.push(Violation::EmptyEligibility(j.id.clone()));
        }
        for m in &j.eligible {
            if !machines.contains(m) {
                violations.push(Violation::UnknownMachine(j.id.clone(), m.clone()));
            }
        }
    }
    violations
}

impl Instance {
    pub fn from_raw(raw: &RawInstance) -> Result<Self, Vec<Violation>> {
        let violations = validate(raw);
        if !violations.is_empty() {
            return Err(violations);
        }
        let index: BTreeMap<&str, Machine> = raw
            .machines
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), Machine(i as u32)))
            .collect();
        let jobs: Vec<Job> = raw
            .jobs
            .iter()
            .map(|j| {
                let mut seen = BTreeSet::new();
                let eligible = j
                    .eligible
                    .iter()
                    .map(|m| index[m.as_str()])
                    .filter(|m| seen.insert(*m))
                    .collect();
                Job {
                    name: j.id.clone(),
                    size: j.size,
                    eligible,
                }
            })
            .collect();
        let big_jobs = jobs
            .iter()
            .enumerate()
            .filter(|(_, j)| j.size == SizeClass::Big)
            .map(|(i, _)| JobId(i as u32))
            .collect();
        let small_jobs = jobs
            .iter()
            .enumerate()
            .filter(|(_, j)| j.size == SizeClass::Small)
            .map(|(i, _)| JobId(i as u32))
            .collect();
        Ok(Instance {
            epsilon: raw.epsilon.clone(),
            machine_names: raw.machines.clone(),
            jobs,
            big_jobs,
            small_jobs,
        })
    }

    /// Convenience constructor for tests and generators. Panics on invalid
    /// data; use [`Instance::from_raw`] for untrusted input.
    pub fn build(
        epsilon: Rational,
        machines: &[&str],
        jobs: &[(&str, SizeClass, &[&str])],
    ) -> Self {
        let raw = RawInstance {
            epsilon,
            machines: machines.iter().map(|s| s.to_string()).collect(),
            jobs: jobs
                .iter()
                .map(|(id, size, eligible)| RawJob {
                    id: id.to_string(),
                    size: *size,
                    eligible: eligible.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        };
        Self::from_raw(&raw).expect("invalid test instance")
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn machine_count(&self) -> usize {
        self.machine_names.len()
    }

    pub fn machines(&self) -> impl Iterator<Item = Machine> + '_ {
        (0..self.machine_names.len() as u32).map(Machine)
    }

    pub fn machine_name(&self, m: Machine) -> &str {
        &self.machine_names[m.ix()]
    }

    pub fn machine_names(&self) -> &[String] {
        &self.machine_names
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> impl Iterator<Item = JobId> + '_ {
        (0..self.jobs.len() as u32).map(JobId)
    }

    pub fn job(&self, j: JobId) -> &Job {
        &self.jobs[j.ix()]
    }

    pub fn big_jobs(&self) -> &[JobId] {
        &self.big_jobs
    }

    pub fn small_jobs(&self) -> &[JobId] {
        &self.small_jobs
    }

    pub fn is_big(&self, j: JobId) -> bool {
        self.jobs[j.ix()].size == SizeClass::Big
    }

    pub fn eligible(&self, j: JobId) -> &[Machine] {
        &self.jobs[j.ix()].eligible
    }

    /// Processing time of `j`: 1 for big jobs, epsilon for small ones.
    pub fn size(&self, j: JobId) -> Rational {
        match self.jobs[j.ix()].size {
            SizeClass::Big => int(1),
            SizeClass::Small => self.epsilon.clone(),
        }
    }

    /// Sum of all processing times.
    pub fn total_load(&self) -> Rational {
        let bigs = int(self.big_jobs.len() as i64);
        let smalls = int(self.small_jobs.len() as i64) * &self.epsilon;
        bigs + smalls
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            epsilon: self.epsilon.clone(),
            machines: self.machine_names.clone(),
            jobs: self
                .jobs
                .iter()
                .map(|j| RawJob {
                    id: j.name.clone(),
                    size: j.size,
                    eligible: j.eligible.iter().map(|m| self.machine_name(*m).to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// A total assignment of jobs to machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub assignment: Vec<Machine>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule assigns {0} jobs but the instance has {1}")]
    WrongLength(usize, usize),
    #[error("job {0:?} assigned outside its eligibility set")]
    IneligibleAssignment(String),
}

/// Exact maximum machine load of `schedule` on `instance`.
pub fn makespan(instance: &Instance, schedule: &Schedule) -> Result<Rational, ScheduleError> {
    if schedule.assignment.len() != instance.job_count() {
        return Err(ScheduleError::WrongLength(
            schedule.assignment.len(),
            instance.job_count(),
        ));
    }
    let mut loads = vec![Rational::zero(); instance.machine_count()];
    for j in instance.jobs() {
        let m = schedule.assignment[j.ix()];
        if !instance.eligible(j).contains(&m) {
            return Err(ScheduleError::IneligibleAssignment(
                instance.job(j).name.clone(),
            ));
        }
        loads[m.ix()] += instance.size(j);
    }
    Ok(loads.into_iter().max().unwrap_or_else(Rational::zero))
}

/// The sorted, deduplicated guess grid `{k eps} U {1 + k eps}` intersected
/// with `[1, 2)` and truncated above the total load plus one. The makespan
/// guess can only take these values, so the feasibility search never needs
/// to probe anything else.
pub fn tau_candidates(instance: &Instance) -> Vec<Rational> {
    let eps = instance.epsilon();
    let cutoff = instance.total_load() + int(1);
    let mut grid = BTreeSet::new();
    // k * eps in [1, 2)
    let mut k = floor_ceil_start(eps);
    loop {
        let v = int(k) * eps;
        if v >= int(2) {
            break;
        }
        if v >= int(1) {
            grid.insert(v);
        }
        k += 1;
    }
    // 1 + k * eps in [1, 2), i.e. k * eps in [0, 1)
    let mut k = 0i64;
    loop {
        let v = int(1) + int(k) * eps;
        if v >= int(2) {
            break;
        }
        grid.insert(v);
        k += 1;
    }
    grid.into_iter().filter(|t| *t <= cutoff).collect()
}

/// Smallest k with k * eps >= 1.
fn floor_ceil_start(eps: &Rational) -> i64 {
    let mut k = 1i64;
    while int(k) * eps < int(1) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn ex_instance() -> Instance {
        Instance::build(
            rat(1, 2),
            &["m1", "m2"],
            &[
                ("b1", SizeClass::Big, &["m1", "m2"]),
                ("s1", SizeClass::Small, &["m1"]),
                ("s2", SizeClass::Small, &["m2"]),
            ],
        )
    }

    #[test]
    fn validate_accepts_well_formed() {
        assert!(validate(&ex_instance().to_raw()).is_empty());
    }

    #[test]
    fn validate_reports_empty_eligibility() {
        let mut raw = ex_instance().to_raw();
        raw.jobs[1].eligible.clear();
        assert_eq!(
            validate(&raw),
            vec![Violation::EmptyEligibility("s1".into())]
        );
    }

    #[test]
    fn validate_reports_unknown_machine() {
        let mut raw = ex_instance().to_raw();
        raw.jobs[2].eligible.push("m9".into());
        assert_eq!(
            validate(&raw),
            vec![Violation::UnknownMachine("s2".into(), "m9".into())]
        );
    }

    #[test]
    fn validate_reports_duplicates() {
        let mut raw = ex_instance().to_raw();
        raw.machines.push("m1".into());
        raw.jobs.push(raw.jobs[0].clone());
        let found = validate(&raw);
        assert!(found.contains(&Violation::DuplicateMachine("m1".into())));
        assert!(found.contains(&Violation::DuplicateJob("b1".into())));
    }

    #[test]
    fn makespan_examples() {
        let inst = ex_instance();
        // b1 -> m1, s1 -> m1? s1 only eligible on m1; use b1 -> m2 instead.
        let s = Schedule {
            assignment: vec![Machine(1), Machine(0), Machine(1)],
        };
        // loads: m1 = 1/2, m2 = 1 + 1/2
        assert_eq!(makespan(&inst, &s).unwrap(), rat(3, 2));

        let inst2 = Instance::build(
            rat(1, 2),
            &["m1"],
            &[
                ("s1", SizeClass::Small, &["m1"]),
                ("s2", SizeClass::Small, &["m1"]),
                ("s3", SizeClass::Small, &["m1"]),
            ],
        );
        let all_m1 = Schedule {
            assignment: vec![Machine(0); 3],
        };
        assert_eq!(makespan(&inst2, &all_m1).unwrap(), rat(3, 2));

        let empty = Instance::build(rat(1, 2), &["m1"], &[]);
        let none = Schedule { assignment: vec![] };
        assert_eq!(makespan(&empty, &none).unwrap(), int(0));
    }

    #[test]
    fn makespan_rejects_ineligible() {
        let inst = ex_instance();
        let s = Schedule {
            assignment: vec![Machine(0), Machine(1), Machine(1)],
        };
        assert!(matches!(
            makespan(&inst, &s),
            Err(ScheduleError::IneligibleAssignment(_))
        ));
    }

    #[test]
    fn tau_grid_matches_enumeration() {
        let build = |eps: Rational, smalls: usize| {
            let jobs: Vec<(String, SizeClass)> = (0..smalls)
                .map(|i| (format!("s{i}"), SizeClass::Small))
                .collect();
            let raw = RawInstance {
                epsilon: eps,
                machines: vec!["m1".into(), "m2".into(), "m3".into(), "m4".into()],
                jobs: jobs
                    .iter()
                    .map(|(id, size)| RawJob {
                        id: id.clone(),
                        size: *size,
                        eligible: vec!["m1".into()],
                    })
                    .collect(),
            };
            Instance::from_raw(&raw).unwrap()
        };
        assert_eq!(
            tau_candidates(&build(rat(1, 2), 8)),
            vec![int(1), rat(3, 2)]
        );
        assert_eq!(
            tau_candidates(&build(rat(2, 3), 8)),
            vec![int(1), rat(4, 3), rat(5, 3)]
        );
        assert_eq!(
            tau_candidates(&build(rat(1, 3), 8)),
            vec![int(1), rat(4, 3), rat(5, 3)]
        );
    }

    #[test]
    fn tau_grid_truncates_and_keeps_one() {
        // A single small job: total load 1/2, cutoff 3/2.
        let inst = Instance::build(
            rat(1, 2),
            &["m1"],
            &[("s1", SizeClass::Small, &["m1"])],
        );
        let grid = tau_candidates(&inst);
        assert_eq!(grid, vec![int(1), rat(3, 2)]);
        assert!(grid.contains(&int(1)));
        assert!(grid.iter().all(|t| *t < int(2)));

        // epsilon = 1/4, tiny load: 7/4 gets truncated.
        let inst = Instance::build(
            rat(1, 4),
            &["m1"],
            &[("s1", SizeClass::Small, &["m1"])],
        );
        assert_eq!(tau_candidates(&inst), vec![int(1), rat(5, 4)]);
    }
}
